use ndarray::{Array1, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Activation, Dataset, Neuron, TwoLayerNet};
use crate::error::{ensure_dim, Error, Result};

/// Where the rows of a [`FeatureInstance`] came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    DerivedFromNetwork,
    Direct,
}

/// Geometric view of a pruning problem.
///
/// Row `i` of `rows` is the feature map `p(θ_i) ∈ R^m` of neuron `i`
/// (its outputs on the dataset scaled by `1/√m`); `target` is the scaled
/// label vector `y_s = y/√m`. The convex hull of the rows is the marginal
/// polytope, and a multiset `S` of neurons corresponds to the point
/// `u = mean_{i∈S} p(θ_i)`, whose squared distance to `target` equals twice
/// the subnetwork's mean-field loss.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureInstance {
    rows: Array2<f64>,
    target: Array1<f64>,
    provenance: Provenance,
}

impl FeatureInstance {
    /// Hand-specified instance with no underlying network.
    pub fn direct(rows: Array2<f64>, target: Array1<f64>) -> Result<Self> {
        Self::with_provenance(rows, target, Provenance::Direct)
    }

    pub(crate) fn with_provenance(rows: Array2<f64>, target: Array1<f64>, provenance: Provenance) -> Result<Self> {
        let (n, m) = rows.dim();
        if n == 0 || m == 0 {
            return Err(Error::InvalidInput(format!(
                "feature instance needs N >= 1 rows and m >= 1 columns, got {n}x{m}"
            )));
        }
        ensure_dim("feature target", m, target.len())?;
        if !rows.iter().chain(target.iter()).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("feature instance"));
        }
        Ok(Self {
            rows,
            target,
            provenance,
        })
    }

    /// Number of candidate neurons `N`.
    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Ambient dimension `m` (number of data points).
    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    pub fn rows(&self) -> &Array2<f64> {
        &self.rows
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.rows.row(i)
    }

    pub fn target(&self) -> &Array1<f64> {
        &self.target
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Loss of the empty selection, `ℓ(0) = ||y_s||²`.
    pub fn empty_loss(&self) -> f64 {
        self.target.dot(&self.target)
    }

    /// Sum of `counts[i] * row_i`.
    pub fn weighted_sum(&self, counts: &[usize]) -> Result<Array1<f64>> {
        ensure_dim("selection counts", self.len(), counts.len())?;
        let mut sum = Array1::zeros(self.dim());
        for (i, &c) in counts.iter().enumerate() {
            if c > 0 {
                sum.scaled_add(c as f64, &self.rows.row(i));
            }
        }
        Ok(sum)
    }

    /// `ℓ(u)` for the average of the multiset `counts`; `ℓ(0)` when empty.
    pub fn multiset_loss(&self, counts: &[usize]) -> Result<f64> {
        let k: usize = counts.iter().sum();
        if k == 0 {
            ensure_dim("selection counts", self.len(), counts.len())?;
            return Ok(self.empty_loss());
        }
        let u = self.weighted_sum(counts)? / k as f64;
        vec_loss(u.view(), self.target.view())
    }

    /// Stable content hash, used to tie reports to the instance they ran on.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.len() as u64).to_le_bytes());
        hasher.update((self.dim() as u64).to_le_bytes());
        for v in self.rows.iter().chain(self.target.iter()) {
            hasher.update(v.to_bits().to_le_bytes());
        }
        hex::encode(&hasher.finalize()[..8])
    }
}

/// Feature map of one neuron: entry `j` is `b σ(aᵀx_j)/√m`.
pub fn feature_map(neuron: &Neuron, activation: Activation, dataset: &Dataset) -> Result<Array1<f64>> {
    ensure_dim("neuron input weights", dataset.dim(), neuron.a.len())?;
    let scale = (dataset.len() as f64).sqrt();
    Ok(dataset
        .inputs()
        .axis_iter(Axis(0))
        .map(|x| neuron.eval(activation, x) / scale)
        .collect())
}

/// One row per neuron of `net`, with the scaled labels of `dataset` as target.
pub fn build_feature_instance(net: &TwoLayerNet, dataset: &Dataset) -> Result<FeatureInstance> {
    let mut rows = Array2::zeros((net.width(), dataset.len()));
    for (i, mut row) in rows.axis_iter_mut(Axis(0)).enumerate() {
        row.assign(&feature_map(&net.neuron(i), net.activation(), dataset)?);
    }
    let scale = (dataset.len() as f64).sqrt();
    let target = dataset.labels() / scale;
    FeatureInstance::with_provenance(rows, target, Provenance::DerivedFromNetwork)
}

/// Squared Euclidean distance `ℓ(u) = ||u - y_s||²`.
pub fn vec_loss(u: ArrayView1<'_, f64>, target: ArrayView1<'_, f64>) -> Result<f64> {
    ensure_dim("vector loss", target.len(), u.len())?;
    Ok(sq_dist(u, target))
}

#[inline]
pub(crate) fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}
