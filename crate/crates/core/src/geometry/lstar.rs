use ndarray::{Array1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{sq_dist, FeatureInstance};

/// Iteration cap for [`lstar_solve`].
pub const LSTAR_MAX_ITERATIONS: usize = 200_000;

/// Largest subset size [`lstar_binary`] will enumerate.
pub const BINARY_SUBSET_CAP: usize = 20;

/// Minimizer of `ℓ` over convex combinations of the rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexSolution {
    /// Simplex weights, one per row.
    pub weights: Vec<f64>,
    /// `ℓ(Pᵀα)`, recomputed from `weights`.
    pub loss: f64,
    /// Frank-Wolfe duality gap at `weights`; `loss - fw_gap ≤ ℓ* ≤ loss`.
    pub fw_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SimplexSolution {
    /// Certified lower bound on `ℓ*`, clamped at zero.
    pub fn lower_bound(&self) -> f64 {
        (self.loss - self.fw_gap).max(0.0)
    }
}

fn combination(instance: &FeatureInstance, weights: &[f64]) -> Array1<f64> {
    let w = ndarray::ArrayView1::from(weights);
    instance.rows().t().dot(&w)
}

/// Iterations between exact corrections on the active face.
const FACE_SOLVE_EVERY: usize = 32;

/// Minimizes `ℓ` over the affine hull of the support of `weights`, then
/// moves from `weights` toward that minimizer until it is reached or a weight
/// hits zero; repeats on the shrunken support. The loss is convex along each
/// segment with its minimum at the far end, so it never increases.
fn face_correction(instance: &FeatureInstance, weights: &mut [f64]) {
    let rows = instance.rows();
    let target = instance.target();
    let m = instance.dim();
    loop {
        let support: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
        if support.len() < 2 {
            return;
        }
        let base = support[0];
        let k = support.len() - 1;
        let d = nalgebra::DMatrix::from_fn(m, k, |r, c| rows[[support[c + 1], r]] - rows[[base, r]]);
        let rhs = nalgebra::DVector::from_fn(m, |r, _| target[r] - rows[[base, r]]);
        let Ok(t) = d.svd(true, true).solve(&rhs, 1e-12) else {
            return;
        };
        let mut face = vec![0.0; support.len()];
        face[0] = 1.0 - t.sum();
        face[1..].copy_from_slice(t.as_slice());
        // Largest step along `face - w` that keeps every weight non-negative.
        let mut theta: f64 = 1.0;
        for (j, &i) in support.iter().enumerate() {
            if face[j] < 0.0 {
                theta = theta.min(weights[i] / (weights[i] - face[j]));
            }
        }
        for (j, &i) in support.iter().enumerate() {
            let w = weights[i] + theta * (face[j] - weights[i]);
            weights[i] = if w > 1e-15 { w } else { 0.0 };
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        if theta >= 1.0 {
            return;
        }
    }
}

/// Solves the simplex-constrained least squares problem by away-step
/// Frank-Wolfe with exact line search, stopping once the duality gap is at
/// most `tol`. Every few iterations the weights are also moved toward the
/// exact minimizer on their current face, which removes the slow linear
/// rate on thin simplices. Hitting the iteration cap returns the best
/// iterate with `converged = false`.
pub fn lstar_solve(instance: &FeatureInstance, tol: f64) -> Result<SimplexSolution> {
    lstar_solve_with(instance, tol, LSTAR_MAX_ITERATIONS)
}

/// [`lstar_solve`] with an explicit iteration cap.
pub fn lstar_solve_with(instance: &FeatureInstance, tol: f64, max_iterations: usize) -> Result<SimplexSolution> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let rows = instance.rows();
    let target = instance.target();
    let n = instance.len();

    // Start at the vertex closest to the target.
    let start = crate::selection::argmin(rows.axis_iter(Axis(0)).map(|r| sq_dist(r, target.view())))
        .expect("instance has rows");
    let mut weights = vec![0.0; n];
    weights[start] = 1.0;
    let mut v = rows.row(start).to_owned();

    let mut iterations = 0;
    let mut gap;
    loop {
        let resid = &v - target;
        let grad: Array1<f64> = rows.dot(&resid) * 2.0;
        let (mut fw, mut away) = (0, None::<usize>);
        let mut inner = 0.0;
        for i in 0..n {
            if grad[i] < grad[fw] {
                fw = i;
            }
            if weights[i] > 0.0 {
                inner += weights[i] * grad[i];
                if away.is_none_or(|a| grad[i] > grad[a]) {
                    away = Some(i);
                }
            }
        }
        gap = (inner - grad[fw]).max(0.0);
        if gap <= tol || iterations >= max_iterations {
            break;
        }
        iterations += 1;
        let away = away.expect("weights lie on the simplex");
        let fw_gain = inner - grad[fw];
        let away_gain = grad[away] - inner;
        let (dir, t_max, toward) = if fw_gain >= away_gain {
            (&rows.row(fw) - &v, 1.0, Some(fw))
        } else {
            let a = weights[away];
            (&v - &rows.row(away), a / (1.0 - a), None)
        };
        let dd = dir.dot(&dir);
        if dd == 0.0 {
            break;
        }
        let t = (-resid.dot(&dir) / dd).clamp(0.0, t_max);
        match toward {
            Some(s) => {
                for w in weights.iter_mut() {
                    *w *= 1.0 - t;
                }
                weights[s] += t;
            }
            None => {
                for w in weights.iter_mut() {
                    *w *= 1.0 + t;
                }
                weights[away] -= t;
                if t == t_max {
                    weights[away] = 0.0;
                }
            }
        }
        v.scaled_add(t, &dir);
        if iterations % FACE_SOLVE_EVERY == 0 {
            face_correction(instance, &mut weights);
            v = combination(instance, &weights);
        }
    }
    let v = combination(instance, &weights);
    Ok(SimplexSolution {
        loss: sq_dist(v.view(), target.view()),
        weights,
        fw_gap: gap,
        iterations,
        converged: gap <= tol,
    })
}

/// Minimum of `ℓ` over plain averages of every non-empty subset with at most
/// `max_subset_size` members.
///
/// Below `N` the cap makes this a minimum over fewer subsets, so the value is
/// never below the best subset-average loss over all sizes.
pub fn lstar_binary(instance: &FeatureInstance, max_subset_size: usize) -> Result<f64> {
    if max_subset_size > BINARY_SUBSET_CAP {
        return Err(Error::CombinatorialLimit(format!(
            "subset size cap {max_subset_size} exceeds {BINARY_SUBSET_CAP}"
        )));
    }
    let cap = max_subset_size.min(instance.len());
    if cap == 0 {
        return Err(Error::InvalidInput("subset size cap must be at least 1".into()));
    }
    let rows = instance.rows();
    let target = instance.target();
    let m = instance.dim();
    let mut best = f64::INFINITY;
    let mut sums = vec![0.0; m * (cap + 1)];

    fn visit(
        rows: &ndarray::Array2<f64>,
        target: &Array1<f64>,
        sums: &mut [f64],
        start: usize,
        depth: usize,
        cap: usize,
        best: &mut f64,
    ) {
        let m = target.len();
        for i in start..rows.nrows() {
            let (prev, next) = sums.split_at_mut(depth * m + m);
            let prev = &prev[depth * m..];
            let next = &mut next[..m];
            let size = (depth + 1) as f64;
            let mut loss = 0.0;
            for j in 0..m {
                next[j] = prev[j] + rows[[i, j]];
                let d = next[j] / size - target[j];
                loss += d * d;
            }
            if loss < *best {
                *best = loss;
            }
            if depth + 1 < cap {
                visit(rows, target, sums, i + 1, depth + 1, cap, best);
            }
        }
    }

    visit(rows, target, &mut sums, 0, 0, cap, &mut best);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;

    #[test]
    fn target_on_a_vertex() {
        let inst = FeatureInstance::direct(
            array![[1.0, 0.0], [0.0, 1.0], [3.0, 3.0], [-1.0, 2.0]],
            array![3.0, 3.0],
        )
        .unwrap();
        let sol = lstar_solve(&inst, 1e-12).unwrap();
        assert_eq!(sol.loss, 0.0);
        assert_eq!(sol.fw_gap, 0.0);
        assert_eq!(sol.weights, vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn projection_onto_segment() {
        let inst = FeatureInstance::direct(array![[0.0, 0.0], [2.0, 0.0]], array![0.5, 1.0]).unwrap();
        let sol = lstar_solve(&inst, 1e-14).unwrap();
        assert!((sol.loss - 1.0).abs() < 1e-12);
        assert!((sol.weights[1] - 0.25).abs() < 1e-9);
        assert!(sol.converged);
    }

    #[test]
    fn rejects_non_positive_tolerance() {
        let inst = FeatureInstance::direct(array![[0.0]], array![0.0]).unwrap();
        assert!(lstar_solve(&inst, 0.0).is_err());
    }

    #[test]
    fn binary_cap_guard() {
        let inst = FeatureInstance::direct(array![[0.0]], array![0.0]).unwrap();
        assert!(matches!(lstar_binary(&inst, 21), Err(Error::CombinatorialLimit(_))));
        assert_eq!(lstar_binary(&inst, 20).unwrap(), 0.0);
    }

    #[test]
    fn binary_matches_subset_enumeration() {
        let inst = FeatureInstance::direct(array![[1.0, 0.2], [-0.3, 0.8], [0.4, -0.9]], array![0.3, 0.1]).unwrap();
        let mut best = f64::INFINITY;
        for mask in 1u32..8 {
            let counts: Vec<usize> = (0..3).map(|i| ((mask >> i) & 1) as usize).collect();
            best = best.min(inst.multiset_loss(&counts).unwrap());
        }
        assert!((lstar_binary(&inst, 3).unwrap() - best).abs() < 1e-15);
        assert!(lstar_binary(&inst, 1).unwrap() >= best);
    }
}
