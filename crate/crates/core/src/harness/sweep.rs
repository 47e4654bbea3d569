use std::path::Path;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::model::{build_feature_instance, gen_toy_data, init_random_net, TOY_TEACHER_WIDTH};
use crate::selection::{run_forward, StopRule};
use crate::training::{gd_train, train_scratch, TrainConfig};

/// Width of the network that gets pruned in the rate experiment.
pub const SOURCE_WIDTH: usize = 1000;

pub const DEFAULT_SIZES: [usize; 6] = [8, 16, 32, 64, 128, 256];

/// Settings of a rate sweep; readable from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_source_width")]
    pub source_width: usize,
    /// Training of the source network. Zero steps prunes the random
    /// initialization.
    #[serde(default = "default_train")]
    pub source_train: TrainConfig,
    #[serde(default = "default_train")]
    pub scratch_train: TrainConfig,
}

fn default_sizes() -> Vec<usize> {
    DEFAULT_SIZES.to_vec()
}

fn default_seeds() -> Vec<u64> {
    vec![0, 1, 2]
}

fn default_source_width() -> usize {
    SOURCE_WIDTH
}

/// Step size and budget used for the rate experiment: the same simulated time
/// as 10^5 steps of 0.05, in a tenth of the steps.
pub const SWEEP_STEP_SIZE: f64 = 0.5;
pub const SWEEP_STEPS: usize = 10_000;

fn default_train() -> TrainConfig {
    TrainConfig {
        step_size: SWEEP_STEP_SIZE,
        steps: SWEEP_STEPS,
        ..TrainConfig::default()
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            sizes: default_sizes(),
            seeds: default_seeds(),
            source_width: SOURCE_WIDTH,
            source_train: default_train(),
            scratch_train: default_train(),
        }
    }
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::parse("sweep config", e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("sweep config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::InvalidInput("sweep needs at least one size".into()));
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n == 0 || n > self.source_width) {
            return Err(Error::InvalidInput(format!(
                "size {n} must lie in 1..={}",
                self.source_width
            )));
        }
        if self.source_width == 0 || self.source_width > TOY_TEACHER_WIDTH {
            return Err(Error::InvalidInput(format!(
                "source width must lie in 1..={TOY_TEACHER_WIDTH}"
            )));
        }
        self.source_train.validate()?;
        self.scratch_train.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    /// Mean loss of the greedy forward subnetwork after `n` steps.
    pub pruned_loss: f64,
    /// Mean loss of a width-`n` network trained from scratch.
    pub scratch_loss: f64,
}

/// Losses of one seed of the rate experiment, in the halved-MSE convention.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub seed: u64,
    pub source_loss: f64,
    pub source_converged: bool,
    /// `ℓ(0)/2`, the loss of the empty selection.
    pub empty_loss: f64,
    pub rows: Vec<SweepRow>,
    pub wall_time_secs: f64,
}

impl SweepResult {
    /// CSV with header `n,pruned_loss,scratch_loss`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("n,pruned_loss,scratch_loss\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.n, r.pruned_loss, r.scratch_loss));
        }
        out
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_csv_string().as_bytes())
    }

    pub fn pruned_points(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.n as f64, r.pruned_loss)).collect()
    }

    pub fn scratch_points(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.n as f64, r.scratch_loss)).collect()
    }
}

/// Seeds for the source network and each scratch network, drawn from one
/// stream so that every `(seed, n)` cell is reproducible on its own.
fn sub_seeds(seed: u64, count: usize) -> (u64, Vec<u64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let source = rng.next_u64();
    (source, (0..count).map(|_| rng.next_u64()).collect())
}

/// Runs the pruned-versus-scratch experiment for one seed: toy data, a
/// trained source network, greedy forward selection up to every size (no
/// finetuning), and a scratch network per size.
pub fn sweep_rate(seed: u64, sizes: &[usize], config: &SweepConfig) -> Result<SweepResult> {
    let started = Instant::now();
    let config = SweepConfig {
        sizes: sizes.to_vec(),
        ..config.clone()
    };
    config.validate()?;
    let (data, _teacher) = gen_toy_data(seed)?;
    let (source_seed, scratch_seeds) = sub_seeds(seed, sizes.len());
    let init = init_random_net(config.source_width, data.dim(), source_seed)?;
    let source = gd_train(&init, &data, &config.source_train)?;
    let instance = build_feature_instance(&source.model, &data)?;
    let max_n = *sizes.iter().max().expect("validated non-empty");
    let report = run_forward(&instance, StopRule::MaxSize(max_n));

    let mut rows = Vec::with_capacity(sizes.len());
    for (&n, &s) in sizes.iter().zip(&scratch_seeds) {
        let pruned = report.loss_at(n).expect("forward ran to the largest size") / 2.0;
        let scratch = train_scratch(n, &data, &config.scratch_train, s)?;
        log::info!(
            "seed {seed} n {n}: pruned {pruned:e} scratch {:e}",
            scratch.final_loss()
        );
        rows.push(SweepRow {
            n,
            pruned_loss: pruned,
            scratch_loss: scratch.final_loss(),
        });
    }
    Ok(SweepResult {
        seed,
        source_loss: source.final_loss(),
        source_converged: source.converged,
        empty_loss: report.initial_loss() / 2.0,
        rows,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

/// Greedy forward losses on an untrained network of `width` neurons over the
/// toy data: the rate experiment with zero training time.
pub fn random_weight_rate(seed: u64, width: usize, sizes: &[usize]) -> Result<Vec<(f64, f64)>> {
    let (data, _) = gen_toy_data(seed)?;
    let (source_seed, _) = sub_seeds(seed, 0);
    let net = init_random_net(width, data.dim(), source_seed)?;
    let instance = build_feature_instance(&net, &data)?;
    let max_n = sizes
        .iter()
        .copied()
        .max()
        .ok_or_else(|| Error::InvalidInput("no sizes".into()))?;
    let report = run_forward(&instance, StopRule::MaxSize(max_n));
    Ok(sizes
        .iter()
        .map(|&n| (n as f64, report.loss_at(n).expect("ran to max size") / 2.0))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let cfg = SweepConfig::default();
        assert_eq!(SweepConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        let partial =
            SweepConfig::from_toml("sizes = [4, 8, 16]\n[scratch_train]\nstep_size = 0.1\nsteps = 50\n").unwrap();
        assert_eq!(partial.sizes, vec![4, 8, 16]);
        assert_eq!(partial.scratch_train.steps, 50);
        assert_eq!(partial.scratch_train.convergence, None);
        assert!(SweepConfig::from_toml("bogus = 1").is_err());
    }

    #[test]
    fn rejects_oversized() {
        let cfg = SweepConfig {
            sizes: vec![2000],
            ..SweepConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn small_sweep_shape() {
        let cfg = SweepConfig {
            source_width: 40,
            source_train: TrainConfig::fixed(0.5, 20),
            scratch_train: TrainConfig::fixed(0.5, 20),
            ..SweepConfig::default()
        };
        let out = sweep_rate(3, &[2, 4, 8], &cfg).unwrap();
        assert_eq!(out.rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![2, 4, 8]);
        assert!(out
            .rows
            .iter()
            .all(|r| r.pruned_loss.is_finite() && r.scratch_loss.is_finite()));
        let again = sweep_rate(3, &[2, 4, 8], &cfg).unwrap();
        assert_eq!(out.to_csv_string(), again.to_csv_string());
        assert!(out.to_csv_string().starts_with("n,pruned_loss,scratch_loss\n2,"));
    }
}
