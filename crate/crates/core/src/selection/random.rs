use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::report::{Method, PruneReport, ReportMeta, TraceEntry};
use super::state::SelectionState;
use crate::model::FeatureInstance;

/// Baseline: `n` indices drawn uniformly with replacement. The trace holds
/// the loss of every prefix average.
pub fn run_random_subset(instance: &FeatureInstance, n: usize, seed: u64) -> PruneReport {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = SelectionState::empty(instance);
    let mut trace = vec![TraceEntry {
        size: 0,
        chosen: None,
        vec_loss: state.loss(instance),
        residual_norm: Some(0.0),
    }];
    for _ in 0..n {
        let i = rng.random_range(0..instance.len());
        state.push(instance, i);
        trace.push(TraceEntry {
            size: state.size(),
            chosen: Some(i),
            vec_loss: state.loss(instance),
            residual_norm: Some(state.residual().dot(state.residual()).sqrt()),
        });
    }
    PruneReport {
        method: Method::Random,
        fingerprint: instance.fingerprint(),
        counts: state.counts().to_vec(),
        trace,
        meta: ReportMeta {
            seed: Some(seed),
            stop_rule: format!("max-size({n})"),
            converged: true,
            wall_time_secs: started.elapsed().as_secs_f64(),
        },
    }
}
