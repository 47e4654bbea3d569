use std::time::Instant;

use ndarray::Array1;

use super::forward::argmin;
use super::report::{Method, PruneReport, ReportMeta, TraceEntry};
use crate::model::{sq_dist, FeatureInstance};

/// Greedy backward elimination over plain subsets.
///
/// Starts from every index once and repeatedly removes the index whose
/// removal leaves the smallest `ℓ` of the remaining average, down to a single
/// neuron. The trace lists sizes `N, N-1, ..., 1`; `chosen` is the index
/// removed to reach that stage.
pub fn run_backward(instance: &FeatureInstance) -> PruneReport {
    let started = Instant::now();
    let n = instance.len();
    let target = instance.target();
    let mut active = vec![true; n];
    let mut sum: Array1<f64> = instance.rows().sum_axis(ndarray::Axis(0));
    let mut trace = vec![TraceEntry {
        size: n,
        chosen: None,
        vec_loss: sq_dist((&sum / n as f64).view(), target.view()),
        residual_norm: None,
    }];
    for size in (1..n).rev() {
        let denom = size as f64;
        let scores = (0..n).map(|i| {
            if !active[i] {
                return f64::INFINITY;
            }
            instance
                .row(i)
                .iter()
                .zip(sum.iter())
                .zip(target.iter())
                .map(|((p, s), y)| {
                    let d = (s - p) / denom - y;
                    d * d
                })
                .sum::<f64>()
        });
        let removed = argmin(scores).expect("non-empty");
        active[removed] = false;
        sum -= &instance.row(removed);
        // Recompute the sum from scratch to avoid drift from repeated subtraction.
        if size % 64 == 0 {
            sum = Array1::zeros(instance.dim());
            for (i, _) in active.iter().enumerate().filter(|(_, &a)| a) {
                sum += &instance.row(i);
            }
        }
        trace.push(TraceEntry {
            size,
            chosen: Some(removed),
            vec_loss: sq_dist((&sum / denom).view(), target.view()),
            residual_norm: None,
        });
    }
    PruneReport {
        method: Method::Backward,
        fingerprint: instance.fingerprint(),
        counts: active.iter().map(|&a| usize::from(a)).collect(),
        trace,
        meta: ReportMeta {
            seed: None,
            stop_rule: "down-to-one".into(),
            converged: true,
            wall_time_secs: started.elapsed().as_secs_f64(),
        },
    }
}

/// Index sets remaining at each stage of a backward report, largest first.
pub fn backward_subsets(report: &PruneReport) -> Vec<Vec<usize>> {
    let n = report.trace[0].size;
    let mut active: Vec<usize> = (0..n).collect();
    let mut out = vec![active.clone()];
    for e in &report.trace[1..] {
        if let Some(r) = e.chosen {
            active.retain(|&i| i != r);
        }
        out.push(active.clone());
    }
    out
}
