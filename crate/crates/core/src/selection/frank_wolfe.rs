use std::time::Instant;

use super::forward::argmin;
use super::report::{Method, PruneReport, ReportMeta, TraceEntry};
use super::state::SelectionState;
use crate::model::FeatureInstance;

/// Frank-Wolfe with step `1/k` from `u⁰ = 0`.
///
/// Step `k` takes the vertex minimizing `⟨∇ℓ(u^{k-1}), p_i⟩` (ties to the
/// smallest index), so `u^k` is the plain average of the picked vertices and
/// the counts record a multiset just like greedy forward selection.
pub fn run_frank_wolfe(instance: &FeatureInstance, steps: usize) -> PruneReport {
    let started = Instant::now();
    let mut state = SelectionState::empty(instance);
    let mut trace = vec![TraceEntry {
        size: 0,
        chosen: None,
        vec_loss: state.loss(instance),
        residual_norm: Some(0.0),
    }];
    for _ in 0..steps {
        let grad = (state.average() - instance.target()) * 2.0;
        let i = argmin(instance.rows().rows().into_iter().map(|row| row.dot(&grad)))
            .expect("instance has at least one row");
        state.push(instance, i);
        trace.push(TraceEntry {
            size: state.size(),
            chosen: Some(i),
            vec_loss: state.loss(instance),
            residual_norm: Some(state.residual().dot(state.residual()).sqrt()),
        });
    }
    PruneReport {
        method: Method::FrankWolfe,
        fingerprint: instance.fingerprint(),
        counts: state.counts().to_vec(),
        trace,
        meta: ReportMeta {
            seed: None,
            stop_rule: format!("max-size({steps})"),
            converged: true,
            wall_time_secs: started.elapsed().as_secs_f64(),
        },
    }
}
