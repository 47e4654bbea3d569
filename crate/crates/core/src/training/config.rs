use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which samples each step sees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Batch {
    Full,
    Minibatch { size: usize, seed: u64 },
}

/// Step-size schedule over `steps` iterations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    Constant,
    /// `η_t = η₀ (1 + cos(π t / steps)) / 2`, reaching 0 at the last step.
    Cosine,
}

/// Stop once the relative loss change over `window` steps falls below
/// `rel_tol`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub window: usize,
    pub rel_tol: f64,
}

impl Default for Convergence {
    fn default() -> Self {
        Self {
            window: 200,
            rel_tol: 1e-6,
        }
    }
}

/// Discretization of the gradient flow: `steps` Euler steps of size
/// `step_size`, so the simulated time is `step_size * steps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub step_size: f64,
    pub steps: usize,
    #[serde(default = "full_batch")]
    pub batch: Batch,
    #[serde(default = "constant")]
    pub schedule: Schedule,
    #[serde(default)]
    pub convergence: Option<Convergence>,
}

fn full_batch() -> Batch {
    Batch::Full
}

fn constant() -> Schedule {
    Schedule::Constant
}

pub const DEFAULT_STEP_SIZE: f64 = 0.05;
pub const DEFAULT_STEP_CAP: usize = 100_000;

impl Default for TrainConfig {
    /// Full-batch Euler steps of 0.05, run until the loss settles (relative
    /// change below 1e-6 over 200 steps) or 10^5 steps.
    fn default() -> Self {
        Self {
            step_size: DEFAULT_STEP_SIZE,
            steps: DEFAULT_STEP_CAP,
            batch: Batch::Full,
            schedule: Schedule::Constant,
            convergence: Some(Convergence::default()),
        }
    }
}

impl TrainConfig {
    pub fn fixed(step_size: f64, steps: usize) -> Self {
        Self {
            step_size,
            steps,
            batch: Batch::Full,
            schedule: Schedule::Constant,
            convergence: None,
        }
    }

    pub fn simulated_time(&self) -> f64 {
        self.step_size * self.steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "step size must be positive, got {}",
                self.step_size
            )));
        }
        if let Batch::Minibatch { size, .. } = self.batch {
            if size == 0 {
                return Err(Error::InvalidInput("minibatch size must be positive".into()));
            }
        }
        if let Some(c) = self.convergence {
            if c.window == 0 || c.rel_tol.is_nan() || c.rel_tol < 0.0 {
                return Err(Error::InvalidInput("invalid convergence window".into()));
            }
        }
        Ok(())
    }

    /// Step size used at iteration `t` (0-based).
    pub fn rate_at(&self, t: usize) -> f64 {
        match self.schedule {
            Schedule::Constant => self.step_size,
            Schedule::Cosine => {
                if self.steps == 0 {
                    return 0.0;
                }
                let frac = (t as f64 / self.steps as f64).min(1.0);
                self.step_size * 0.5 * (1.0 + (std::f64::consts::PI * frac).cos())
            }
        }
    }
}
