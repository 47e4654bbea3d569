use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{ensure_dim, Result};
use crate::model::{Dataset, TwoLayerNet};

/// Gradient of the mean-field loss with respect to every neuron.
///
/// `inner` row `i` is `∂L/∂a_i` and `outer[i]` is `∂L/∂b_i`. The gradient
/// flow velocity of neuron `i` is `-N ∂L/∂θ_i`, i.e.
/// `E[(y - f(x)) ∇_θ σ(x; θ_i)]`; see [`Gradients::flow`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub inner: Array2<f64>,
    pub outer: Array1<f64>,
}

impl Gradients {
    /// Per-neuron velocity `g_i = -N ∂L/∂θ_i` of the mean-field gradient flow.
    pub fn flow(&self) -> Gradients {
        let n = self.outer.len() as f64;
        Gradients {
            inner: &self.inner * -n,
            outer: &self.outer * -n,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.inner.iter().chain(self.outer.iter()).all(|&g| g == 0.0)
    }
}

/// Exact gradient of `loss_mean` for `net` on `dataset`.
pub fn grad_loss(net: &TwoLayerNet, dataset: &Dataset) -> Result<Gradients> {
    Ok(loss_and_grad(net, dataset.inputs().view(), dataset.labels().view())?.1)
}

pub(crate) fn loss_and_grad(
    net: &TwoLayerNet,
    inputs: ArrayView2<'_, f64>,
    labels: ArrayView1<'_, f64>,
) -> Result<(f64, Gradients)> {
    ensure_dim("network input", net.input_dim(), inputs.ncols())?;
    ensure_dim("labels", inputs.nrows(), labels.len())?;
    let act = net.activation();
    let width = net.width() as f64;
    let samples = inputs.nrows() as f64;

    // `hidden` starts as the pre-activations and is overwritten in place;
    // `slope` receives σ' and later the full inner-weight coefficient.
    let mut hidden = inputs.dot(&net.inner().t());
    if !hidden.is_standard_layout() {
        hidden = hidden.as_standard_layout().into_owned();
    }
    let mut slope = Array2::zeros(hidden.raw_dim());
    act.apply_with_derivative(
        hidden.as_slice_mut().expect("standard layout"),
        slope.as_slice_mut().expect("fresh array is contiguous"),
    );
    let preds = hidden.dot(net.outer()) / width;
    let resid = &preds - &labels;
    let loss = resid.dot(&resid) / (2.0 * samples);

    let coef = &resid / (samples * width);
    let outer = coef.view().insert_axis(Axis(0)).dot(&hidden).remove_axis(Axis(0));
    // slope_{j,i} * r_j * b_i, then contract over samples.
    let b = net.outer();
    for (mut row, &c) in slope.rows_mut().into_iter().zip(coef.iter()) {
        row.zip_mut_with(b, |s, &bi| *s *= c * bi);
    }
    let inner = slope.t().dot(&inputs);
    Ok((loss, Gradients { inner, outer }))
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;
    use crate::model::Activation;

    #[test]
    fn perfect_fit_has_zero_gradient() {
        let net = TwoLayerNet::new(array![[0.4, -0.2], [0.1, 0.3]], array![1.0, -0.5], Activation::Tanh).unwrap();
        let inputs = array![[1.0, 2.0], [-0.5, 0.5]];
        let labels = net.predict(inputs.view()).unwrap();
        let data = Dataset::new(inputs, labels).unwrap();
        assert!(grad_loss(&net, &data).unwrap().is_zero());
    }

    #[test]
    fn single_neuron_single_point_chain_rule() {
        // L = (b tanh(a·x) - y)² / 2, N = m = 1.
        let (a, b, x, y) = ([0.3, -0.7], 1.7, [1.2, 0.4], 0.25);
        let net = TwoLayerNet::new(array![a], array![b], Activation::Tanh).unwrap();
        let data = Dataset::new(array![x], array![y]).unwrap();
        let g = grad_loss(&net, &data).unwrap();
        let z: f64 = a[0] * x[0] + a[1] * x[1];
        let r = b * z.tanh() - y;
        let dz = 1.0 - z.tanh().powi(2);
        assert!((g.outer[0] - r * z.tanh()).abs() < 1e-15);
        for (k, xk) in x.iter().enumerate() {
            assert!((g.inner[[0, k]] - r * b * dz * xk).abs() < 1e-15);
        }
        let flow = g.flow();
        assert_eq!(flow.outer[0], -g.outer[0]);
    }
}
