use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::{Activation, Dataset, TwoLayerNet};
use crate::error::{ensure_dim, Error, Result};

/// One hidden layer: `width x fan_in` incoming weights and an activation.
#[derive(Clone, Debug, PartialEq)]
pub struct HiddenLayer {
    pub weights: Array2<f64>,
    pub activation: Activation,
}

impl HiddenLayer {
    pub fn new(weights: Array2<f64>, activation: Activation) -> Self {
        Self { weights, activation }
    }

    pub fn width(&self) -> usize {
        self.weights.nrows()
    }

    pub fn fan_in(&self) -> usize {
        self.weights.ncols()
    }
}

/// Multilayer perceptron in the mean-field parameterization.
///
/// With hidden activations `A_0 = σ(W_0 x)` and
/// `A_l = σ(W_l A_{l-1} / N_{l-1})`, the output is `rᵀ A_{H-2} / N_{H-2}`.
/// A network with a single hidden layer (`H = 2`) is exactly a
/// [`TwoLayerNet`]. Neuron `j` of hidden layer `l` owns row `j` of `W_l` and
/// column `j` of the next weight matrix (or entry `j` of the readout).
#[derive(Clone, Debug, PartialEq)]
pub struct DeepMLP {
    hidden: Vec<HiddenLayer>,
    readout: Array1<f64>,
}

/// Per-parameter gradients of the mean loss, same shapes as the model.
#[derive(Clone, Debug)]
pub struct DeepGradients {
    pub hidden: Vec<Array2<f64>>,
    pub readout: Array1<f64>,
}

impl DeepMLP {
    pub fn new(hidden: Vec<HiddenLayer>, readout: Array1<f64>) -> Result<Self> {
        if hidden.is_empty() {
            return Err(Error::InvalidInput(
                "a deep MLP needs at least one hidden layer (H >= 2)".into(),
            ));
        }
        for (l, layer) in hidden.iter().enumerate() {
            if layer.width() == 0 || layer.fan_in() == 0 {
                return Err(Error::InvalidInput(format!("hidden layer {l} is empty")));
            }
            if l > 0 {
                ensure_dim("layer fan-in", hidden[l - 1].width(), layer.fan_in())?;
            }
        }
        ensure_dim("readout", hidden[hidden.len() - 1].width(), readout.len())?;
        let finite = hidden
            .iter()
            .flat_map(|l| l.weights.iter())
            .chain(readout.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("deep MLP weights"));
        }
        Ok(Self { hidden, readout })
    }

    pub fn from_two_layer(net: &TwoLayerNet) -> Self {
        Self {
            hidden: vec![HiddenLayer::new(net.inner().clone(), net.activation())],
            readout: net.outer().clone(),
        }
    }

    /// The equivalent two-layer network when `H = 2`.
    pub fn to_two_layer(&self) -> Option<TwoLayerNet> {
        match self.hidden.as_slice() {
            [only] => TwoLayerNet::new(only.weights.clone(), self.readout.clone(), only.activation).ok(),
            _ => None,
        }
    }

    /// Number of weight layers `H` (hidden layers + readout).
    pub fn depth(&self) -> usize {
        self.hidden.len() + 1
    }

    pub fn input_dim(&self) -> usize {
        self.hidden[0].fan_in()
    }

    pub fn widths(&self) -> Vec<usize> {
        self.hidden.iter().map(HiddenLayer::width).collect()
    }

    pub fn total_neurons(&self) -> usize {
        self.widths().iter().sum()
    }

    pub fn hidden_layers(&self) -> &[HiddenLayer] {
        &self.hidden
    }

    pub fn readout(&self) -> &Array1<f64> {
        &self.readout
    }

    /// Input `z_in` of hidden layer `h`, so that `A_h = σ(z_in W_hᵀ)`.
    pub(crate) fn layer_input(&self, h: usize, inputs: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut z = inputs.to_owned();
        for layer in &self.hidden[..h] {
            let act = layer.activation;
            let width = layer.width() as f64;
            z = z.dot(&layer.weights.t()).mapv_into(|v| act.eval(v) / width);
        }
        z
    }

    /// Outgoing weights of hidden layer `h`, one column per neuron: the next
    /// layer's weight matrix, or the readout as a single row.
    pub(crate) fn outgoing(&self, h: usize) -> Array2<f64> {
        match self.hidden.get(h + 1) {
            // N_{h+1} x N_h; column j is neuron j's outgoing weights.
            Some(next) => next.weights.clone(),
            None => self.readout.clone().insert_axis(Axis(0)),
        }
    }

    /// Finishes the forward pass from the averaged signal layer `h` feeds
    /// forward (pre-activation of layer `h+1`, or the output itself).
    pub(crate) fn finish_from(&self, h: usize, mut signal: Array2<f64>) -> Array1<f64> {
        if h + 1 == self.hidden.len() {
            return signal.column(0).to_owned();
        }
        for l in h + 1..self.hidden.len() {
            let act = self.hidden[l].activation;
            signal.mapv_inplace(|v| act.eval(v));
            let width = self.hidden[l].width() as f64;
            signal = match self.hidden.get(l + 1) {
                Some(next) => signal.dot(&next.weights.t()) / width,
                None => (signal.dot(&self.readout) / width).insert_axis(Axis(1)),
            };
        }
        signal.column(0).to_owned()
    }

    pub fn predict(&self, inputs: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        ensure_dim("network input", self.input_dim(), inputs.ncols())?;
        let last = self.hidden.len() - 1;
        let z = self.layer_input(last, inputs);
        let layer = &self.hidden[last];
        let act = layer.activation;
        let acts = z.dot(&layer.weights.t()).mapv_into(|v| act.eval(v));
        Ok(acts.dot(&self.readout) / layer.width() as f64)
    }

    pub fn loss(&self, dataset: &Dataset) -> Result<f64> {
        let preds = self.predict(dataset.inputs().view())?;
        super::loss_mean(preds.view(), dataset.labels().view())
    }

    /// Loss and exact gradient of `(1/2B) Σ (f(x) - y)²` over the given rows.
    pub fn loss_and_gradients(&self, dataset: &Dataset, rows: Option<&[usize]>) -> Result<(f64, DeepGradients)> {
        ensure_dim("network input", self.input_dim(), dataset.dim())?;
        let (inputs, labels) = match rows {
            Some(r) => (dataset.inputs().select(Axis(0), r), dataset.labels().select(Axis(0), r)),
            None => (dataset.inputs().clone(), dataset.labels().clone()),
        };
        let batch = labels.len() as f64;

        // Forward, caching the (scaled) input and pre-activation of each layer.
        let mut layer_inputs = Vec::with_capacity(self.hidden.len());
        let mut pre = Vec::with_capacity(self.hidden.len());
        let mut z = inputs;
        for layer in &self.hidden {
            let p = z.dot(&layer.weights.t());
            let act = layer.activation;
            let width = layer.width() as f64;
            let next = p.mapv(|v| act.eval(v) / width);
            layer_inputs.push(z);
            pre.push(p);
            z = next;
        }
        // z now holds A_last / N_last.
        let out = z.dot(&self.readout);
        let resid = &out - &labels;
        let loss = resid.dot(&resid) / (2.0 * batch);
        let delta = resid / batch;

        let readout_grad = z.t().dot(&delta);
        // d loss / d (A_l / N_l) for the last layer, then walk backwards.
        let mut upstream = delta
            .view()
            .insert_axis(Axis(1))
            .dot(&self.readout.view().insert_axis(Axis(0)));
        let mut hidden_grads = vec![Array2::zeros((0, 0)); self.hidden.len()];
        for l in (0..self.hidden.len()).rev() {
            let layer = &self.hidden[l];
            let act = layer.activation;
            let width = layer.width() as f64;
            let mut dpre = pre[l].mapv(|v| act.derivative(v) / width);
            dpre *= &upstream;
            hidden_grads[l] = dpre.t().dot(&layer_inputs[l]);
            if l > 0 {
                upstream = dpre.dot(&layer.weights);
            }
        }
        Ok((
            loss,
            DeepGradients {
                hidden: hidden_grads,
                readout: readout_grad,
            },
        ))
    }

    /// Mean-field step: each gradient is multiplied by the widths of the
    /// hidden layers its weights connect, so a two-layer model moves exactly
    /// like the Euler discretization of the two-layer gradient flow.
    pub(crate) fn apply_mean_field_step(&mut self, grads: &DeepGradients, step: f64) {
        let widths = self.widths();
        for (l, (layer, g)) in self.hidden.iter_mut().zip(grads.hidden.iter()).enumerate() {
            let scale = if l == 0 {
                widths[0] as f64
            } else {
                (widths[l - 1] * widths[l]) as f64
            };
            layer.weights.scaled_add(-step * scale, g);
        }
        let last = *widths.last().expect("at least one hidden layer") as f64;
        self.readout.scaled_add(-step * last, &grads.readout);
    }

    /// Copies every hidden neuron `factor` times. Under the mean-field
    /// averaging the copies compute exactly the same function, so this plants
    /// redundancy without changing predictions.
    pub fn replicate_neurons(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidInput("replication factor must be at least 1".into()));
        }
        let repeat = |n: usize| -> Vec<usize> { (0..n * factor).map(|i| i / factor).collect() };
        let hidden = self
            .hidden
            .iter()
            .enumerate()
            .map(|(l, layer)| {
                let rows = layer.weights.select(Axis(0), &repeat(layer.width()));
                let weights = if l == 0 {
                    rows
                } else {
                    rows.select(Axis(1), &repeat(layer.fan_in()))
                };
                HiddenLayer::new(weights, layer.activation)
            })
            .collect();
        let readout = self.readout.select(Axis(0), &repeat(self.readout.len()));
        Self::new(hidden, readout)
    }

    /// Replaces hidden layer `h` by the average over the multiset `counts`.
    ///
    /// Distinct selected neurons are kept; multiplicities and the `1/|S|`
    /// scaling are folded into their outgoing weights, so the new model
    /// computes exactly the averaged subnetwork.
    pub fn replace_layer(&mut self, h: usize, counts: &[usize]) -> Result<()> {
        if h >= self.hidden.len() {
            return Err(Error::InvalidInput(format!(
                "layer {h} out of range (model has {} hidden layers)",
                self.hidden.len()
            )));
        }
        ensure_dim("selection counts", self.hidden[h].width(), counts.len())?;
        let total: usize = counts.iter().sum();
        let kept: Vec<usize> = (0..counts.len()).filter(|&j| counts[j] > 0).collect();
        if kept.is_empty() {
            return Err(Error::InvalidInput("cannot replace a layer by nothing".into()));
        }
        let scale = kept.len() as f64 / total as f64;
        let weights = self.hidden[h].weights.select(Axis(0), &kept);
        self.hidden[h].weights = weights;
        match self.hidden.get_mut(h + 1) {
            Some(next) => {
                let mut cols = next.weights.select(Axis(1), &kept);
                for (mut col, &j) in cols.axis_iter_mut(Axis(1)).zip(kept.iter()) {
                    col *= counts[j] as f64 * scale;
                }
                next.weights = cols;
            }
            None => {
                self.readout = kept
                    .iter()
                    .map(|&j| self.readout[j] * counts[j] as f64 * scale)
                    .collect();
            }
        }
        Ok(())
    }
}
