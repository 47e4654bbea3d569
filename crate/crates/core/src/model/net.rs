use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use super::{Activation, Dataset};
use crate::error::{ensure_dim, Error, Result};

/// One neuron `x -> b * σ(aᵀx)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Neuron {
    pub a: Array1<f64>,
    pub b: f64,
}

impl Neuron {
    pub fn new(a: Array1<f64>, b: f64) -> Self {
        Self { a, b }
    }

    pub fn eval(&self, activation: Activation, x: ArrayView1<'_, f64>) -> f64 {
        self.b * activation.eval(self.a.dot(&x))
    }
}

/// Two-layer network in the mean-field parameterization,
/// `f(x) = (1/N) Σ_i b_i σ(a_iᵀx)`.
///
/// Incoming weights are stored as an `N x d` matrix whose row `i` is `a_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoLayerNet {
    inner: Array2<f64>,
    outer: Array1<f64>,
    activation: Activation,
}

impl TwoLayerNet {
    pub fn new(inner: Array2<f64>, outer: Array1<f64>, activation: Activation) -> Result<Self> {
        let (n, d) = inner.dim();
        if n == 0 || d == 0 {
            return Err(Error::InvalidInput(format!(
                "network needs N >= 1 neurons and d >= 1 inputs, got N={n}, d={d}"
            )));
        }
        ensure_dim("outer weights", n, outer.len())?;
        if !inner.iter().chain(outer.iter()).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("network weights"));
        }
        Ok(Self {
            inner,
            outer,
            activation,
        })
    }

    pub fn from_neurons(neurons: &[Neuron], activation: Activation) -> Result<Self> {
        let d = neurons
            .first()
            .map(|n| n.a.len())
            .ok_or_else(|| Error::InvalidInput("network needs at least one neuron".into()))?;
        let mut inner = Array2::zeros((neurons.len(), d));
        for (i, neuron) in neurons.iter().enumerate() {
            ensure_dim("neuron input weights", d, neuron.a.len())?;
            inner.row_mut(i).assign(&neuron.a);
        }
        let outer = neurons.iter().map(|n| n.b).collect();
        Self::new(inner, outer, activation)
    }

    pub fn width(&self) -> usize {
        self.inner.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.inner.ncols()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn inner(&self) -> &Array2<f64> {
        &self.inner
    }

    pub fn outer(&self) -> &Array1<f64> {
        &self.outer
    }

    pub(crate) fn params_mut(&mut self) -> (&mut Array2<f64>, &mut Array1<f64>) {
        (&mut self.inner, &mut self.outer)
    }

    pub fn neuron(&self, i: usize) -> Neuron {
        Neuron::new(self.inner.row(i).to_owned(), self.outer[i])
    }

    /// `f(x)` for a single input.
    pub fn forward(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        ensure_dim("network input", self.input_dim(), x.len())?;
        let pre = self.inner.dot(&x);
        let sum: f64 = pre
            .iter()
            .zip(self.outer.iter())
            .map(|(z, b)| b * self.activation.eval(*z))
            .sum();
        Ok(sum / self.width() as f64)
    }

    /// Hidden activations `σ(a_iᵀx_j)` as an `m x N` matrix.
    pub fn hidden(&self, inputs: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        ensure_dim("network input", self.input_dim(), inputs.ncols())?;
        let act = self.activation;
        Ok(inputs.dot(&self.inner.t()).mapv_into(|z| act.eval(z)))
    }

    /// Outputs on every row of `inputs`.
    pub fn predict(&self, inputs: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        let hidden = self.hidden(inputs)?;
        Ok(hidden.dot(&self.outer) / self.width() as f64)
    }

    /// Mean-field loss `(1/2m) Σ (f(x_j) - y_j)²` on a dataset.
    pub fn loss(&self, dataset: &Dataset) -> Result<f64> {
        let preds = self.predict(dataset.inputs().view())?;
        loss_mean(preds.view(), dataset.labels().view())
    }

    /// Subnetwork averaging the neurons of a multiset given by `counts`.
    ///
    /// Only neurons with nonzero count are kept; multiplicities and the
    /// `1/|S|` scaling are folded into the outer weights so that the result is
    /// an ordinary mean-field network over its distinct neurons.
    pub fn subnetwork(&self, counts: &[usize]) -> Result<TwoLayerNet> {
        ensure_dim("selection counts", self.width(), counts.len())?;
        let total: usize = counts.iter().sum();
        let kept: Vec<usize> = (0..counts.len()).filter(|&i| counts[i] > 0).collect();
        if kept.is_empty() {
            return Err(Error::InvalidInput("cannot build an empty subnetwork".into()));
        }
        let scale = kept.len() as f64 / total as f64;
        let inner = self.inner.select(Axis(0), &kept);
        let outer = kept.iter().map(|&i| self.outer[i] * counts[i] as f64 * scale).collect();
        TwoLayerNet::new(inner, outer, self.activation)
    }
}

/// Halved mean squared error `(1/2m) Σ (p_j - y_j)²`.
pub fn loss_mean(predictions: ArrayView1<'_, f64>, labels: ArrayView1<'_, f64>) -> Result<f64> {
    ensure_dim("predictions", labels.len(), predictions.len())?;
    if labels.is_empty() {
        return Err(Error::InvalidInput("loss over zero samples".into()));
    }
    let sse: f64 = predictions
        .iter()
        .zip(labels.iter())
        .map(|(p, y)| (p - y) * (p - y))
        .sum();
    Ok(sse / (2.0 * labels.len() as f64))
}
