use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares line through `(log₁₀ n, log₁₀ loss)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Points used in the fit, after dropping non-positive ones.
    pub points: Vec<(f64, f64)>,
}

impl RateFit {
    /// Loss predicted by the fitted power law at `n`.
    pub fn predict(&self, n: f64) -> f64 {
        10f64.powf(self.intercept + self.slope * n.log10())
    }
}

/// Fits `log₁₀ loss = intercept + slope · log₁₀ n`. Points with a
/// non-positive coordinate are dropped with a warning; fewer than three
/// remaining points is an error.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<RateFit> {
    let kept: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(n, loss)| {
            let ok = n > 0.0 && loss > 0.0 && n.is_finite() && loss.is_finite();
            if !ok {
                log::warn!("dropping point ({n}, {loss}) from log-log fit");
            }
            ok
        })
        .collect();
    if kept.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "log-log fit needs at least 3 positive points, got {}",
            kept.len()
        )));
    }
    let xs: Vec<f64> = kept.iter().map(|p| p.0.log10()).collect();
    let ys: Vec<f64> = kept.iter().map(|p| p.1.log10()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("log-log fit needs at least two distinct n".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        points: kept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let fit = fit_loglog_slope(&[(1.0, 1.0), (10.0, 0.01), (100.0, 0.0001)]).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        let fit = fit_loglog_slope(&[(1.0, 1.0), (10.0, 0.1), (100.0, 0.01)]).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
    }

    #[test]
    fn drops_non_positive_points() {
        let fit = fit_loglog_slope(&[(1.0, 2.0), (2.0, 0.0), (4.0, 0.125), (8.0, 2.0 / 64.0), (16.0, -1.0)]).unwrap();
        assert_eq!(fit.points.len(), 3);
        assert!((fit.slope + 2.0).abs() < 1e-12);
        assert!(fit_loglog_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
    }

    #[test]
    fn slope_ignores_rescaling() {
        let pts = [(8.0, 0.3), (16.0, 0.11), (32.0, 0.05), (64.0, 0.013)];
        let scaled: Vec<_> = pts.iter().map(|&(n, l)| (n, 7.5 * l)).collect();
        let a = fit_loglog_slope(&pts).unwrap();
        let b = fit_loglog_slope(&scaled).unwrap();
        assert!((a.slope - b.slope).abs() < 1e-12);
        assert!((b.intercept - a.intercept - 7.5f64.log10()).abs() < 1e-12);
    }
}
