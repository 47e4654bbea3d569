//! Experiment plumbing: the pruned-versus-scratch rate sweep, log-log slope
//! fits, and plots.

mod fit;
mod plot;
mod sweep;

use std::path::PathBuf;

pub use fit::{fit_loglog_slope, RateFit};
pub use plot::{emit_plot, render_svg, Series};
pub use sweep::{
    random_weight_rate, sweep_rate, SweepConfig, SweepResult, SweepRow, DEFAULT_SIZES, SOURCE_WIDTH, SWEEP_STEPS,
    SWEEP_STEP_SIZE,
};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "GREEDY_SUBNET_OUT";

/// Output directory from [`OUTPUT_DIR_ENV`], else the current directory.
pub fn default_output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Median of a non-empty slice (mean of the middle pair for even lengths).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(&[]), None);
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
    }
}
