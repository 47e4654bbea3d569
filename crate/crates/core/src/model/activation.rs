use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Scalar nonlinearity applied inside each neuron.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Sigmoid,
    Relu,
}

impl Activation {
    #[inline]
    pub fn eval(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => tanh(z),
            Activation::Sigmoid => sigmoid(z),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative at `z`. For ReLU the derivative at 0 is taken to be 0.
    #[inline]
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => {
                let t = tanh(z);
                1.0 - t * t
            }
            Activation::Sigmoid => {
                let s = sigmoid(z);
                s * (1.0 - s)
            }
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Value and derivative in one evaluation of the transcendental.
    #[inline]
    pub fn eval_with_derivative(self, z: f64) -> (f64, f64) {
        match self {
            Activation::Tanh => {
                let t = tanh(z);
                (t, 1.0 - t * t)
            }
            Activation::Sigmoid => {
                let s = sigmoid(z);
                (s, s * (1.0 - s))
            }
            Activation::Relu => {
                if z > 0.0 {
                    (z, 1.0)
                } else {
                    (0.0, 0.0)
                }
            }
        }
    }

    /// Overwrites `values` with `σ(values)` and fills `slopes` with `σ'`.
    pub(crate) fn apply_with_derivative(self, values: &mut [f64], slopes: &mut [f64]) {
        debug_assert_eq!(values.len(), slopes.len());
        let pairs = values.iter_mut().zip(slopes.iter_mut());
        match self {
            Activation::Tanh => pairs.for_each(|(v, s)| {
                let t = tanh(*v);
                *v = t;
                *s = 1.0 - t * t;
            }),
            Activation::Sigmoid => pairs.for_each(|(v, s)| {
                let t = sigmoid(*v);
                *v = t;
                *s = t * (1.0 - t);
            }),
            Activation::Relu => pairs.for_each(|(v, s)| {
                *s = if *v > 0.0 { 1.0 } else { 0.0 };
                *v = v.max(0.0);
            }),
        }
    }

    /// Whether the derivative is Lipschitz, the smoothness the mean-field
    /// limit requires. ReLU is accepted everywhere but reports `false`.
    pub fn has_lipschitz_derivative(self) -> bool {
        !matches!(self, Activation::Relu)
    }

    /// Whether the activation itself is bounded (`sup |σ| < ∞`).
    pub fn is_bounded(self) -> bool {
        !matches!(self, Activation::Relu)
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
            Activation::Relu => "relu",
        }
    }
}

#[inline]
/// `tanh` through a single `exp`, which is several times cheaper than the
/// libm routine; `exp_m1` covers small inputs where `1 - e` would cancel.
/// Relative error stays within a few ulps.
fn tanh(z: f64) -> f64 {
    let a = z.abs();
    let t = if a < 0.25 {
        let e = (2.0 * a).exp_m1();
        e / (e + 2.0)
    } else {
        let e = (-2.0 * a).exp();
        (1.0 - e) / (1.0 + e)
    };
    t.copysign(z)
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            "relu" => Ok(Activation::Relu),
            other => Err(Error::InvalidInput(format!("unknown activation `{other}`"))),
        }
    }
}
