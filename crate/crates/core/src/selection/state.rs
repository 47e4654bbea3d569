use ndarray::Array1;

use crate::model::{sq_dist, FeatureInstance};

/// Multiset selection with its running average and scaled residual.
///
/// Keeps the exact sum of selected rows, from which the average
/// `u = sum / k` and the residual `w = k (y_s - u) = k y_s - sum` are read.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionState {
    counts: Vec<usize>,
    k: usize,
    sum: Array1<f64>,
    u: Array1<f64>,
    w: Array1<f64>,
}

impl SelectionState {
    pub fn empty(instance: &FeatureInstance) -> Self {
        let m = instance.dim();
        Self {
            counts: vec![0; instance.len()],
            k: 0,
            sum: Array1::zeros(m),
            u: Array1::zeros(m),
            w: Array1::zeros(m),
        }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Number of selections made (with repetition).
    pub fn size(&self) -> usize {
        self.k
    }

    /// Number of distinct neurons selected.
    pub fn distinct(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn sum(&self) -> &Array1<f64> {
        &self.sum
    }

    /// Running average `u^k`; zero when nothing is selected.
    pub fn average(&self) -> &Array1<f64> {
        &self.u
    }

    /// Scaled residual `w^k = k (y_s - u^k)`.
    pub fn residual(&self) -> &Array1<f64> {
        &self.w
    }

    /// `ℓ(u^k)`, with `ℓ(0) = ||y_s||²` for the empty selection.
    pub fn loss(&self, instance: &FeatureInstance) -> f64 {
        sq_dist(self.u.view(), instance.target().view())
    }

    pub fn push(&mut self, instance: &FeatureInstance, index: usize) {
        self.counts[index] += 1;
        self.k += 1;
        self.sum += &instance.row(index);
        let k = self.k as f64;
        self.u = &self.sum / k;
        self.w = instance.target() * k - &self.sum;
    }
}
