use std::fmt;
use std::time::Instant;

use super::report::{Method, PruneReport, ReportMeta, TraceEntry};
use super::state::SelectionState;
use crate::model::{sq_dist, FeatureInstance};

/// Default step budget for the ε-gap rule.
pub const DEFAULT_EPS_STEP_CAP: usize = 10_000;

/// When greedy forward selection stops.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopRule {
    /// Run exactly `n` steps.
    MaxSize(usize),
    /// Stop once `ℓ(u)/2 - reference_loss <= eps`, i.e. the subnetwork's
    /// mean loss is within `eps` of the reference model; give up after
    /// `max_steps`.
    EpsGap {
        eps: f64,
        reference_loss: f64,
        max_steps: usize,
    },
}

impl StopRule {
    pub fn eps_gap(eps: f64, reference_loss: f64) -> Self {
        StopRule::EpsGap {
            eps,
            reference_loss,
            max_steps: DEFAULT_EPS_STEP_CAP,
        }
    }
}

impl fmt::Display for StopRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopRule::MaxSize(n) => write!(f, "max-size({n})"),
            StopRule::EpsGap {
                eps,
                reference_loss,
                max_steps,
            } => write!(f, "eps-gap(eps={eps}, reference={reference_loss}, cap={max_steps})"),
        }
    }
}

/// Which of the two equivalent candidate searches to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StepRule {
    /// Evaluate the loss of every augmented average.
    Scan,
    /// Nearest row to the shifted target `y_s + w`.
    #[default]
    Nearest,
}

/// First index attaining the minimum.
pub(crate) fn argmin(values: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if v.is_nan() || v >= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Greedy step by direct evaluation: the `i` minimizing
/// `ℓ((k u + p_i) / (k + 1))`, ties to the smallest index.
pub fn forward_step_scan(instance: &FeatureInstance, state: &SelectionState) -> usize {
    let next = (state.size() + 1) as f64;
    let sum = state.sum();
    let target = instance.target();
    let losses = instance.rows().rows().into_iter().map(|row| {
        row.iter()
            .zip(sum.iter())
            .zip(target.iter())
            .map(|((p, s), y)| {
                let d = (s + p) / next - y;
                d * d
            })
            .sum::<f64>()
    });
    argmin(losses).expect("instance has at least one row")
}

/// Greedy step via the residual: `(k u + p)/(k+1) - y_s = (p - (y_s + w))/(k+1)`,
/// so the best candidate is the row nearest to `y_s + w`.
pub fn forward_step_nearest(instance: &FeatureInstance, state: &SelectionState) -> usize {
    let shifted = instance.target() + state.residual();
    let dists = instance
        .rows()
        .rows()
        .into_iter()
        .map(|row| sq_dist(row, shifted.view()));
    argmin(dists).expect("instance has at least one row")
}

/// Greedy forward selection from the empty multiset.
pub fn run_forward(instance: &FeatureInstance, stop: StopRule) -> PruneReport {
    run_forward_with(instance, stop, StepRule::Nearest)
}

pub fn run_forward_with(instance: &FeatureInstance, stop: StopRule, rule: StepRule) -> PruneReport {
    let started = Instant::now();
    let mut state = SelectionState::empty(instance);
    let mut trace = vec![TraceEntry {
        size: 0,
        chosen: None,
        vec_loss: state.loss(instance),
        residual_norm: Some(0.0),
    }];
    let (cap, gap) = match stop {
        StopRule::MaxSize(n) => (n, None),
        StopRule::EpsGap {
            eps,
            reference_loss,
            max_steps,
        } => (max_steps, Some((eps, reference_loss))),
    };
    let within_gap = |loss: f64| gap.is_some_and(|(eps, reference)| loss / 2.0 - reference <= eps);
    let mut reached = within_gap(trace[0].vec_loss);
    while !reached && state.size() < cap {
        let i = match rule {
            StepRule::Scan => forward_step_scan(instance, &state),
            StepRule::Nearest => forward_step_nearest(instance, &state),
        };
        state.push(instance, i);
        let loss = state.loss(instance);
        trace.push(TraceEntry {
            size: state.size(),
            chosen: Some(i),
            vec_loss: loss,
            residual_norm: Some(state.residual().dot(state.residual()).sqrt()),
        });
        reached = within_gap(loss);
    }
    let converged = gap.is_none() || reached;
    PruneReport {
        method: Method::Forward,
        fingerprint: instance.fingerprint(),
        counts: state.counts().to_vec(),
        trace,
        meta: ReportMeta {
            seed: None,
            stop_rule: stop.to_string(),
            converged,
            wall_time_secs: started.elapsed().as_secs_f64(),
        },
    }
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;

    #[test]
    fn argmin_prefers_first_of_ties() {
        assert_eq!(argmin([3.0, 1.0, 1.0, 2.0]), Some(1));
        assert_eq!(argmin(Vec::<f64>::new()), None);
    }

    #[test]
    fn single_row_always_chosen() {
        let inst = FeatureInstance::direct(array![[0.3, 0.1]], array![1.0, -1.0]).unwrap();
        let report = run_forward(&inst, StopRule::MaxSize(5));
        assert_eq!(report.choices(), vec![0; 5]);
        assert_eq!(report.counts, vec![5]);
    }

    #[test]
    fn first_step_picks_nearest_row() {
        let inst =
            FeatureInstance::direct(array![[2.0, 0.0], [0.9, 0.8], [0.0, 0.0], [1.0, 1.0]], array![1.0, 1.0]).unwrap();
        let state = SelectionState::empty(&inst);
        assert_eq!(forward_step_scan(&inst, &state), 3);
        assert_eq!(forward_step_nearest(&inst, &state), 3);
    }

    #[test]
    fn infinite_eps_returns_empty() {
        let inst = FeatureInstance::direct(array![[0.3, 0.1]], array![1.0, -1.0]).unwrap();
        let report = run_forward(&inst, StopRule::eps_gap(f64::INFINITY, 0.0));
        assert_eq!(report.trace.len(), 1);
        assert_eq!(report.counts, vec![0]);
        assert!(report.meta.converged);
    }

    #[test]
    fn eps_gap_stops_at_threshold() {
        let inst = FeatureInstance::direct(array![[0.0, 0.0], [2.0, 2.0]], array![1.0, 1.0]).unwrap();
        // ℓ hits 0 at k = 2 ({0, 1}).
        let report = run_forward(&inst, StopRule::eps_gap(1e-12, 0.0));
        assert!(report.meta.converged);
        assert_eq!(report.final_loss(), 0.0);
        assert_eq!(report.counts.iter().sum::<usize>(), 2);

        let capped = run_forward(
            &inst,
            StopRule::EpsGap {
                eps: -1.0,
                reference_loss: 0.0,
                max_steps: 7,
            },
        );
        assert!(!capped.meta.converged);
        assert_eq!(capped.trace.len(), 8);
    }

    #[test]
    fn residual_norm_matches_loss_identity() {
        let inst = FeatureInstance::direct(
            array![[0.2, -1.0, 0.5], [1.0, 0.3, -0.2], [-0.4, 0.4, 0.9]],
            array![0.1, 0.0, 0.3],
        )
        .unwrap();
        let report = run_forward(&inst, StopRule::MaxSize(30));
        for e in &report.trace {
            let w = e.residual_norm.unwrap();
            let expected = e.size as f64 * e.vec_loss.sqrt();
            assert!((w - expected).abs() < 1e-12 * (1.0 + expected));
        }
    }
}
