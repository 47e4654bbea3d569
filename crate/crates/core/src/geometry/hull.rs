use ndarray::Array1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{sq_dist, FeatureInstance};

/// Largest pairwise Euclidean distance between rows.
pub fn diameter(instance: &FeatureInstance) -> f64 {
    let rows = instance.rows();
    let mut best = 0.0f64;
    for i in 0..rows.nrows() {
        for j in i + 1..rows.nrows() {
            best = best.max(sq_dist(rows.row(i), rows.row(j)));
        }
    }
    best.sqrt()
}

/// Interior radius from an exact planar hull. Only [`gamma_exact_2d`]
/// constructs this, which is what the `w`-sequence checker requires.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactGamma {
    value: f64,
    degenerate: bool,
}

impl ExactGamma {
    /// Radius of the largest ball around the target inside the hull, `0` when
    /// the target is on or outside the hull.
    pub fn value(&self) -> f64 {
        self.value
    }

    /// True when the rows are collinear (or fewer than three distinct points).
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }
}

type Point = [f64; 2];

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise hull vertices by the monotone chain, collinear points
/// dropped.
pub fn convex_hull_2d(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Exact interior radius for two-dimensional instances: the smallest distance
/// from the target to the supporting line of a hull edge, or `0` if the target
/// is not strictly inside.
pub fn gamma_exact_2d(instance: &FeatureInstance) -> Result<ExactGamma> {
    if instance.dim() != 2 {
        return Err(Error::DimensionMismatch {
            context: "gamma_exact_2d",
            expected: 2,
            found: instance.dim(),
        });
    }
    let points: Vec<Point> = instance.rows().rows().into_iter().map(|r| [r[0], r[1]]).collect();
    let hull = convex_hull_2d(&points);
    if hull.len() < 3 {
        return Ok(ExactGamma {
            value: 0.0,
            degenerate: true,
        });
    }
    let y = [instance.target()[0], instance.target()[1]];
    let mut value = f64::INFINITY;
    for (k, &a) in hull.iter().enumerate() {
        let b = hull[(k + 1) % hull.len()];
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        value = value.min(cross(a, b, y) / len);
    }
    Ok(ExactGamma {
        value: value.max(0.0),
        degenerate: false,
    })
}

/// Sampled support-function radius `min_v max_i ⟨p_i - y, v⟩` over
/// `n_directions` random unit directions.
///
/// Every sampled direction is one term of the exact minimum, so the estimate
/// is an upper bound on the true radius. A negative value certifies that the
/// target is outside the hull.
pub fn gamma_estimate(instance: &FeatureInstance, n_directions: usize, seed: u64) -> Result<f64> {
    let m = instance.dim();
    if m < 2 {
        return Err(Error::InvalidInput("gamma_estimate needs dimension at least 2".into()));
    }
    if n_directions == 0 {
        return Err(Error::InvalidInput(
            "gamma_estimate needs at least one direction".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let support = instance.rows() - instance.target();
    let mut best = f64::INFINITY;
    let mut v = Array1::zeros(m);
    for _ in 0..n_directions {
        loop {
            v.mapv_inplace(|_: f64| StandardNormal.sample(&mut rng));
            let norm = v.dot(&v).sqrt();
            if norm > 1e-12 {
                v /= norm;
                break;
            }
        }
        let reach = support.dot(&v).fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        best = best.min(reach);
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaKind {
    Exact2d,
    MonteCarloUpperBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaValue {
    pub value: f64,
    pub kind: GammaKind,
    /// Set only for exact values on collinear point sets.
    pub degenerate: bool,
}

/// Summary of the polytope spanned by an instance's rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolytopeStats {
    pub diameter: f64,
    pub gamma: GammaValue,
    /// Upper estimate of `ℓ*` from [`lstar_solve`](super::lstar_solve).
    pub lstar: f64,
    /// `ℓ* ≤ membership_tol`, i.e. the target is within `√tol` of the hull.
    pub member: bool,
    pub membership_tol: f64,
}

/// Number of directions sampled for `γ` when the instance is not planar.
pub const DEFAULT_GAMMA_DIRECTIONS: usize = 10_000;

/// Diameter, interior radius (exact in 2-D, sampled otherwise) and hull
/// membership.
pub fn polytope_stats(instance: &FeatureInstance, membership_tol: f64, seed: u64) -> Result<PolytopeStats> {
    let gamma = if instance.dim() == 2 {
        let g = gamma_exact_2d(instance)?;
        GammaValue {
            value: g.value(),
            kind: GammaKind::Exact2d,
            degenerate: g.is_degenerate(),
        }
    } else if instance.dim() > 2 {
        GammaValue {
            value: gamma_estimate(instance, DEFAULT_GAMMA_DIRECTIONS, seed)?,
            kind: GammaKind::MonteCarloUpperBound,
            degenerate: false,
        }
    } else {
        // On a line the interval radius is exact.
        let col = instance.rows().column(0);
        let (lo, hi) = col
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
        let y = instance.target()[0];
        GammaValue {
            value: (y - lo).min(hi - y).max(0.0),
            kind: GammaKind::Exact2d,
            degenerate: false,
        }
    };
    let sol = super::lstar_solve(instance, membership_tol.clamp(f64::MIN_POSITIVE, 1e-10))?;
    Ok(PolytopeStats {
        diameter: diameter(instance),
        gamma,
        lstar: sol.loss,
        member: sol.loss <= membership_tol,
        membership_tol,
    })
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;

    fn square(target: [f64; 2]) -> FeatureInstance {
        FeatureInstance::direct(
            array![[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [0.2, 0.3]],
            array![target[0], target[1]],
        )
        .unwrap()
    }

    #[test]
    fn diameter_cases() {
        let inst = FeatureInstance::direct(array![[0.0, 0.0], [3.0, 4.0]], array![0.0, 0.0]).unwrap();
        assert_eq!(diameter(&inst), 5.0);
        let same = FeatureInstance::direct(array![[1.0, 2.0], [1.0, 2.0]], array![0.0, 0.0]).unwrap();
        assert_eq!(diameter(&same), 0.0);
    }

    #[test]
    fn square_interior_radius() {
        let g = gamma_exact_2d(&square([0.0, 0.0])).unwrap();
        assert!((g.value() - 1.0).abs() < 1e-15);
        assert!(!g.is_degenerate());
        assert!((gamma_exact_2d(&square([0.5, 0.0])).unwrap().value() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn outside_and_on_boundary() {
        assert_eq!(gamma_exact_2d(&square([2.0, 0.0])).unwrap().value(), 0.0);
        assert_eq!(gamma_exact_2d(&square([1.0, 0.0])).unwrap().value(), 0.0);
    }

    #[test]
    fn collinear_is_degenerate() {
        let inst = FeatureInstance::direct(array![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]], array![1.0, 1.0]).unwrap();
        let g = gamma_exact_2d(&inst).unwrap();
        assert!(g.is_degenerate());
        assert_eq!(g.value(), 0.0);
    }

    #[test]
    fn hull_drops_interior_and_collinear_points() {
        let hull = convex_hull_2d(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0], [1.0, 1.0]]);
        assert_eq!(hull, vec![[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]]);
    }

    #[test]
    fn estimate_close_to_exact_on_square() {
        let inst = square([0.0, 0.0]);
        let est = gamma_estimate(&inst, 10_000, 3).unwrap();
        assert!(est >= 1.0 - 1e-9);
        assert!(est <= 1.02);
        assert_eq!(est, gamma_estimate(&inst, 10_000, 3).unwrap());
    }

    #[test]
    fn estimate_on_single_row_target() {
        let inst = FeatureInstance::direct(array![[0.3, -0.2]], array![0.3, -0.2]).unwrap();
        assert_eq!(gamma_estimate(&inst, 50, 1).unwrap(), 0.0);
    }

    #[test]
    fn estimate_negative_outside() {
        assert!(gamma_estimate(&square([3.0, 0.0]), 1000, 2).unwrap() < 0.0);
    }

    #[test]
    fn stats_report_membership() {
        let inside = polytope_stats(&square([0.1, 0.1]), 1e-9, 0).unwrap();
        assert!(inside.member);
        assert_eq!(inside.gamma.kind, GammaKind::Exact2d);
        let outside = polytope_stats(&square([3.0, 0.0]), 1e-9, 0).unwrap();
        assert!(!outside.member);
        assert!((outside.lstar - 4.0).abs() < 1e-8);
    }
}
