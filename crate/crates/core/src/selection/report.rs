use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Forward,
    Backward,
    FrankWolfe,
    Random,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Forward => "forward",
            Method::Backward => "backward",
            Method::FrankWolfe => "frank-wolfe",
            Method::Random => "random",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(Method::Forward),
            "backward" => Ok(Method::Backward),
            "frank-wolfe" | "fw" => Ok(Method::FrankWolfe),
            "random" => Ok(Method::Random),
            other => Err(crate::Error::InvalidInput(format!("unknown method `{other}`"))),
        }
    }
}

/// One recorded stage of a selection run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// Size of the (multi)set after this stage.
    pub size: usize,
    /// Index added (forward, Frank-Wolfe, random) or removed (backward);
    /// `None` for the starting stage.
    pub chosen: Option<usize>,
    pub vec_loss: f64,
    /// `||w^k||` for multiset methods.
    pub residual_norm: Option<f64>,
}

/// Run settings and bookkeeping stored next to a trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub seed: Option<u64>,
    pub stop_rule: String,
    pub converged: bool,
    pub wall_time_secs: f64,
}

/// Outcome of a selection algorithm on one feature instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruneReport {
    pub method: Method,
    pub fingerprint: String,
    /// Final multiset as per-index counts.
    pub counts: Vec<usize>,
    /// Stage 0 is the starting point: the empty set for multiset methods and
    /// the full set for backward elimination.
    pub trace: Vec<TraceEntry>,
    pub meta: ReportMeta,
}

impl PruneReport {
    pub fn initial_loss(&self) -> f64 {
        self.trace[0].vec_loss
    }

    pub fn final_loss(&self) -> f64 {
        self.trace.last().expect("trace has a starting stage").vec_loss
    }

    /// Loss recorded at multiset size `size`, if that stage exists.
    pub fn loss_at(&self, size: usize) -> Option<f64> {
        self.trace.iter().find(|e| e.size == size).map(|e| e.vec_loss)
    }

    /// Chosen indices in order, skipping the starting stage.
    pub fn choices(&self) -> Vec<usize> {
        self.trace.iter().filter_map(|e| e.chosen).collect()
    }

    /// Trace as CSV with header `size,chosen_index,vec_loss`. The starting
    /// stage has an empty `chosen_index`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("size,chosen_index,vec_loss\n");
        for e in &self.trace {
            let chosen = e.chosen.map(|c| c.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", e.size, chosen, e.vec_loss));
        }
        out
    }

    /// Metadata sidecar (JSON): method, instance fingerprint, seed, stop rule.
    pub fn metadata_json(&self) -> String {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            method: Method,
            fingerprint: &'a str,
            final_size: usize,
            distinct: usize,
            #[serde(flatten)]
            meta: &'a ReportMeta,
        }
        let side = Sidecar {
            method: self.method,
            fingerprint: &self.fingerprint,
            final_size: self.counts.iter().sum(),
            distinct: self.counts.iter().filter(|&&c| c > 0).count(),
            meta: &self.meta,
        };
        let mut s = serde_json::to_string_pretty(&side).expect("metadata serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, trace_path: &Path, meta_path: Option<&Path>) -> Result<()> {
        crate::io::write_atomic(trace_path, self.trace_csv().as_bytes())?;
        if let Some(meta) = meta_path {
            crate::io::write_atomic(meta, self.metadata_json().as_bytes())?;
        }
        Ok(())
    }
}
