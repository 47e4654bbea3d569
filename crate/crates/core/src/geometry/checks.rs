use serde::{Deserialize, Serialize};

use super::hull::ExactGamma;
use crate::error::{Error, Result};
use crate::selection::{Method, PruneReport};

/// Absolute slack allowed on every checked inequality.
pub const CHECK_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The bound does not apply to this instance.
    Skipped,
}

/// Per-step margins (`bound - observed`) of an inequality along a trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub status: CheckStatus,
    /// `(k, margin)` for every checked step.
    pub margins: Vec<(usize, f64)>,
    /// First `k` whose margin is below `-CHECK_SLACK`.
    pub first_failure: Option<usize>,
}

impl BoundCheck {
    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }

    /// Smallest margin, `None` when nothing was checked.
    pub fn worst_margin(&self) -> Option<f64> {
        self.margins.iter().map(|&(_, m)| m).reduce(f64::min)
    }

    fn from_margins(margins: Vec<(usize, f64)>) -> Self {
        let first_failure = margins.iter().find(|&&(_, m)| m < -CHECK_SLACK).map(|&(k, _)| k);
        BoundCheck {
            status: if first_failure.is_some() {
                CheckStatus::Fail
            } else {
                CheckStatus::Pass
            },
            margins,
            first_failure,
        }
    }

    fn skipped() -> Self {
        BoundCheck {
            status: CheckStatus::Skipped,
            margins: Vec::new(),
            first_failure: None,
        }
    }
}

/// Losses `ℓ(u^0), ℓ(u^1), ...` of a multiset trace that starts empty.
fn losses(report: &PruneReport) -> Result<Vec<f64>> {
    if !matches!(report.method, Method::Forward | Method::FrankWolfe) {
        return Err(Error::InvalidInput(format!(
            "bound checks need a forward or frank-wolfe trace, got {}",
            report.method
        )));
    }
    for (k, e) in report.trace.iter().enumerate() {
        if e.size != k {
            return Err(Error::InvalidInput(format!(
                "trace stage {k} has size {}, expected {k}",
                e.size
            )));
        }
    }
    Ok(report.trace.iter().map(|e| e.vec_loss).collect())
}

/// Checks `ℓ(u^k) ≤ (ℓ(u^0) - ℓ*)/k + ℓ*` for every `k ≥ 1`, with
/// `lstar_upper` standing in for `ℓ*`.
///
/// This closed form is not implied by the per-step recursion (see
/// [`check_step_recursion`]); a single vertex at squared distance `C` from a
/// target at the origin already breaks it at `k = 1`. [`check_harmonic_bound`]
/// is the bound the recursion does give.
pub fn check_prop1_bound(report: &PruneReport, lstar_upper: f64) -> Result<BoundCheck> {
    let l = losses(report)?;
    let l0 = l[0];
    let margins = (1..l.len())
        .map(|k| (k, (l0 - lstar_upper) / k as f64 + lstar_upper - l[k]))
        .collect();
    Ok(BoundCheck::from_margins(margins))
}

/// Checks `ℓ(u^k) ≤ (1 - 1/k) ℓ(u^{k-1}) + ℓ*/k + C/k²` with `C = diameter²`.
pub fn check_step_recursion(report: &PruneReport, lstar_upper: f64, diameter: f64) -> Result<BoundCheck> {
    let l = losses(report)?;
    let c = diameter * diameter;
    let margins = (1..l.len())
        .map(|k| {
            let kf = k as f64;
            (k, (1.0 - 1.0 / kf) * l[k - 1] + lstar_upper / kf + c / (kf * kf) - l[k])
        })
        .collect();
    Ok(BoundCheck::from_margins(margins))
}

/// Checks `ℓ(u^k) ≤ ℓ* + C·H_k/k`, where `H_k` is the `k`-th harmonic number.
/// Summing `k·(ℓ_k - ℓ*) ≤ (k-1)·(ℓ_{k-1} - ℓ*) + C/k` from the step recursion
/// gives exactly this.
pub fn check_harmonic_bound(report: &PruneReport, lstar_upper: f64, diameter: f64) -> Result<BoundCheck> {
    let l = losses(report)?;
    let c = diameter * diameter;
    let mut harmonic = 0.0;
    let margins = (1..l.len())
        .map(|k| {
            harmonic += 1.0 / k as f64;
            (k, lstar_upper + c * harmonic / k as f64 - l[k])
        })
        .collect();
    Ok(BoundCheck::from_margins(margins))
}

/// Bound `max(√C, C/2, C/(2γ))` on `||w^k||`, with `C = diameter²`.
pub fn w_bound(gamma: f64, diameter: f64) -> f64 {
    let c = diameter * diameter;
    c.sqrt().max(c / 2.0).max(c / (2.0 * gamma))
}

/// Checks `||w^k|| ≤ max(√C, C/2, C/(2γ))` along a forward trace. Skipped
/// when `γ = 0`, where the interior condition fails.
pub fn check_w_bound(report: &PruneReport, gamma: ExactGamma, diameter: f64) -> Result<BoundCheck> {
    if report.method != Method::Forward {
        return Err(Error::InvalidInput(format!(
            "the w bound applies to forward traces, got {}",
            report.method
        )));
    }
    if gamma.value().is_nan() || gamma.value() <= 0.0 {
        return Ok(BoundCheck::skipped());
    }
    let bound = w_bound(gamma.value(), diameter);
    let margins = report
        .trace
        .iter()
        .map(|e| {
            let norm = e
                .residual_norm
                .ok_or_else(|| Error::InvalidInput(format!("trace stage {} has no residual norm", e.size)))?;
            Ok((e.size, bound - norm))
        })
        .collect::<Result<_>>()?;
    Ok(BoundCheck::from_margins(margins))
}
