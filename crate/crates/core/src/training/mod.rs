//! Gradient-flow training, scratch baselines and finetuning.
//!
//! All updates use the mean-field time scale: neuron `i` of a width-`N`
//! network moves with velocity `g_i = -N ∂L/∂θ_i`, so step sizes do not
//! depend on the width.

mod config;
mod finetune;
mod gd;
mod grad;

pub use config::{Batch, Convergence, Schedule, TrainConfig, DEFAULT_STEP_CAP, DEFAULT_STEP_SIZE};
pub use finetune::sgd_finetune;
pub use gd::{gd_train, train_scratch, LossTrace, TrainOutcome, Trainable, DIVERGENCE_FACTOR};
pub use grad::{grad_loss, Gradients};
