//! Synthetic teacher-student regression data and random initializations.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{StandardNormal, Uniform};

use super::{Activation, Dataset, DeepMLP, HiddenLayer, TwoLayerNet};
use crate::error::{Error, Result};

pub const TOY_INPUT_DIM: usize = 10;
pub const TOY_SAMPLES: usize = 100;
pub const TOY_TEACHER_WIDTH: usize = 1000;
pub const TOY_TEACHER_OUTER_RANGE: f64 = 5.0;

/// Teacher network and its noiseless regression data.
///
/// The teacher has 1000 sigmoid neurons with standard Gaussian input weights
/// in `R^10` and outer weights uniform on `(-5, 5)`; 100 standard Gaussian
/// inputs are labelled by the teacher exactly.
pub fn gen_toy_data(seed: u64) -> Result<(Dataset, TwoLayerNet)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inner = gaussian_matrix(&mut rng, TOY_TEACHER_WIDTH, TOY_INPUT_DIM);
    let outer_dist = Uniform::new(-TOY_TEACHER_OUTER_RANGE, TOY_TEACHER_OUTER_RANGE)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let outer: Array1<f64> = (0..TOY_TEACHER_WIDTH).map(|_| rng.sample(outer_dist)).collect();
    let teacher = TwoLayerNet::new(inner, outer, Activation::Sigmoid)?;
    let inputs = gaussian_matrix(&mut rng, TOY_SAMPLES, TOY_INPUT_DIM);
    let labels = teacher.predict(inputs.view())?;
    Ok((Dataset::new(inputs, labels)?, teacher))
}

/// Student network with every coordinate of `a_i` and `b_i` i.i.d.
/// uniform on `[-1, 1]` and tanh activation.
pub fn init_random_net(width: usize, input_dim: usize, seed: u64) -> Result<TwoLayerNet> {
    init_random_net_with(width, input_dim, seed, Activation::Tanh)
}

pub fn init_random_net_with(width: usize, input_dim: usize, seed: u64, activation: Activation) -> Result<TwoLayerNet> {
    if width == 0 {
        return Err(Error::InvalidInput("network width must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
    let inner = Array2::from_shape_simple_fn((width, input_dim), || rng.sample(unit));
    let outer = (0..width).map(|_| rng.sample(unit)).collect();
    TwoLayerNet::new(inner, outer, activation)
}

/// Deep MLP with hidden `widths`, all weights i.i.d. uniform on `[-1, 1]`.
pub fn init_random_mlp(input_dim: usize, widths: &[usize], activation: Activation, seed: u64) -> Result<DeepMLP> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
    let mut fan_in = input_dim;
    let mut hidden = Vec::with_capacity(widths.len());
    for &w in widths {
        let weights = Array2::from_shape_simple_fn((w, fan_in), || rng.sample(unit));
        hidden.push(HiddenLayer::new(weights, activation));
        fan_in = w;
    }
    let readout = (0..fan_in).map(|_| rng.sample(unit)).collect();
    DeepMLP::new(hidden, readout)
}

fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.sample::<f64, _>(StandardNormal))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_data_shape_and_labels() {
        let (data, teacher) = gen_toy_data(3).unwrap();
        assert_eq!(data.len(), 100);
        assert_eq!(data.dim(), 10);
        assert_eq!(teacher.width(), 1000);
        assert_eq!(teacher.activation(), Activation::Sigmoid);
        assert!(teacher.outer().iter().all(|b| b.abs() <= 5.0));
        for j in 0..data.len() {
            let f = teacher.forward(data.input(j)).unwrap();
            assert!((f - data.labels()[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn random_mlp_shapes() {
        let mlp = init_random_mlp(3, &[5, 4], Activation::Tanh, 2).unwrap();
        assert_eq!(mlp.widths(), vec![5, 4]);
        assert_eq!(mlp.input_dim(), 3);
        assert_eq!(mlp, init_random_mlp(3, &[5, 4], Activation::Tanh, 2).unwrap());
        assert!(init_random_mlp(3, &[], Activation::Tanh, 2).is_err());
    }

    #[test]
    fn toy_data_is_seeded() {
        let (a, _) = gen_toy_data(11).unwrap();
        let (b, _) = gen_toy_data(11).unwrap();
        let (c, _) = gen_toy_data(12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn random_net_support_and_determinism() {
        let net = init_random_net(50, 4, 9).unwrap();
        assert!(net.inner().iter().chain(net.outer().iter()).all(|v| v.abs() <= 1.0));
        assert_eq!(net, init_random_net(50, 4, 9).unwrap());
        assert_eq!(net.activation(), Activation::Tanh);
        assert!(init_random_net(0, 4, 9).is_err());
    }

    #[test]
    fn random_net_coordinates_are_centered() {
        // 20_000 neurons x 5 coordinates = 10^5 samples.
        let net = init_random_net(20_000, 4, 1).unwrap();
        let n = (net.inner().len() + net.outer().len()) as f64;
        let mean = (net.inner().sum() + net.outer().sum()) / n;
        assert!(mean.abs() < 0.02, "mean {mean}");
    }
}
