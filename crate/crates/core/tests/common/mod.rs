#![allow(dead_code)]

use greedy_subnet::model::{Activation, Dataset, FeatureInstance, TwoLayerNet};
use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-scale..=scale))
}

/// Rows uniform in `[-1, 1]^m`. The target is a random convex combination of
/// the rows when `inside`, and uniform in the same cube otherwise.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, m: usize, inside: bool) -> FeatureInstance {
    let rows = uniform_matrix(rng, n, m, 1.0);
    let target = if inside {
        let w: Array1<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
        let w = &w / w.sum();
        rows.t().dot(&w)
    } else {
        (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect()
    };
    FeatureInstance::direct(rows, target).unwrap()
}

pub fn random_net(rng: &mut ChaCha8Rng, n: usize, d: usize, activation: Activation) -> TwoLayerNet {
    let inner = uniform_matrix(rng, n, d, 1.0);
    let outer = (0..n).map(|_| rng.random_range(-2.0..=2.0)).collect();
    TwoLayerNet::new(inner, outer, activation).unwrap()
}

pub fn random_dataset(rng: &mut ChaCha8Rng, m: usize, d: usize) -> Dataset {
    let inputs = uniform_matrix(rng, m, d, 1.5);
    let labels = (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect();
    Dataset::new(inputs, labels).unwrap()
}

/// Index minimizing `f`, ties to the smallest.
pub fn first_argmin(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, v) in values.into_iter().enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    best.0
}
