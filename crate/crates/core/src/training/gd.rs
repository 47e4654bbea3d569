use std::path::Path;

use ndarray::Axis;

use super::grad::loss_and_grad;
use super::{Batch, TrainConfig};
use crate::error::{Error, Result};
use crate::model::{init_random_net, Dataset, DeepMLP, TwoLayerNet};

/// Factor over the initial loss beyond which a run counts as diverged.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// Models that can take one mean-field gradient step.
pub trait Trainable: Clone {
    /// Mean-field loss on the selected rows (all rows when `None`).
    fn batch_loss(&self, data: &Dataset, rows: Option<&[usize]>) -> Result<f64>;

    /// One descent step of size `step` on the selected rows. Returns the
    /// loss before the step.
    fn descend(&mut self, data: &Dataset, rows: Option<&[usize]>, step: f64) -> Result<f64>;
}

impl Trainable for TwoLayerNet {
    fn batch_loss(&self, data: &Dataset, rows: Option<&[usize]>) -> Result<f64> {
        match rows {
            None => self.loss(data),
            Some(r) => self.loss(&data.subset(r)),
        }
    }

    /// Euler step `θ_i ← θ_i + η g_i` with `g_i = -N ∂L/∂θ_i`.
    fn descend(&mut self, data: &Dataset, rows: Option<&[usize]>, step: f64) -> Result<f64> {
        let (loss, grads) = match rows {
            None => loss_and_grad(self, data.inputs().view(), data.labels().view())?,
            Some(r) => {
                let x = data.inputs().select(Axis(0), r);
                let y = data.labels().select(Axis(0), r);
                loss_and_grad(self, x.view(), y.view())?
            }
        };
        let scale = -step * self.width() as f64;
        let (inner, outer) = self.params_mut();
        inner.scaled_add(scale, &grads.inner);
        outer.scaled_add(scale, &grads.outer);
        Ok(loss)
    }
}

impl Trainable for DeepMLP {
    fn batch_loss(&self, data: &Dataset, rows: Option<&[usize]>) -> Result<f64> {
        match rows {
            None => self.loss(data),
            Some(r) => self.loss(&data.subset(r)),
        }
    }

    fn descend(&mut self, data: &Dataset, rows: Option<&[usize]>, step: f64) -> Result<f64> {
        let (loss, grads) = self.loss_and_gradients(data, rows)?;
        self.apply_mean_field_step(&grads, step);
        Ok(loss)
    }
}

/// Loss after each step; entry 0 is the loss before any update.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LossTrace(pub Vec<f64>);

impl LossTrace {
    pub fn initial(&self) -> Option<f64> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<f64> {
        self.0.last().copied()
    }

    /// CSV with header `step,loss`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("step,loss\n");
        for (t, l) in self.0.iter().enumerate() {
            out.push_str(&format!("{t},{l}\n"));
        }
        out
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_atomic(path.as_ref(), self.to_csv_string().as_bytes())
    }
}

/// Result of a training run.
#[derive(Clone, Debug)]
pub struct TrainOutcome<M> {
    pub model: M,
    pub trace: LossTrace,
    /// Whether the convergence rule fired before the step budget ran out.
    pub converged: bool,
}

impl<M> TrainOutcome<M> {
    pub fn final_loss(&self) -> f64 {
        self.trace.last().expect("trace holds the initial loss")
    }
}

pub(crate) fn check_divergence(step: usize, loss: f64, initial: f64) -> Result<()> {
    let limit = DIVERGENCE_FACTOR * initial.max(f64::MIN_POSITIVE);
    if !loss.is_finite() || loss > limit {
        return Err(Error::Diverged { step, loss, initial });
    }
    Ok(())
}

/// Full-batch Euler discretization of the mean-field gradient flow.
pub fn gd_train<M: Trainable>(model: &M, data: &Dataset, config: &TrainConfig) -> Result<TrainOutcome<M>> {
    config.validate()?;
    if config.batch != Batch::Full {
        return Err(Error::InvalidInput(
            "gradient-flow training is full batch; use sgd_finetune for minibatches".into(),
        ));
    }
    let mut model = model.clone();
    let mut trace = Vec::with_capacity(config.steps.min(1 << 20) + 1);
    let mut converged = false;
    for t in 0..config.steps {
        let loss = model.descend(data, None, config.rate_at(t))?;
        let initial = *trace.first().unwrap_or(&loss);
        check_divergence(t, loss, initial)?;
        trace.push(loss);
        if let Some(rule) = config.convergence {
            if t >= rule.window {
                let before = trace[t - rule.window];
                if (before - loss).abs() <= rule.rel_tol * before.abs() {
                    converged = true;
                    break;
                }
            }
        }
    }
    let last = model.batch_loss(data, None)?;
    if let Some(&initial) = trace.first() {
        check_divergence(trace.len(), last, initial)?;
    }
    trace.push(last);
    Ok(TrainOutcome {
        model,
        trace: LossTrace(trace),
        converged,
    })
}

/// Fresh width-`n` student trained on `data` by [`gd_train`].
pub fn train_scratch(
    width: usize,
    data: &Dataset,
    config: &TrainConfig,
    seed: u64,
) -> Result<TrainOutcome<TwoLayerNet>> {
    let net = init_random_net(width, data.dim(), seed)?;
    gd_train(&net, data, config)
}
