//! Versioned JSON model files.
//!
//! ```text
//! {
//!   "format": "greedy-subnet-model",
//!   "version": 1,
//!   "model": {
//!     "kind": "two-layer" | "deep-mlp" | "feature-instance",
//!     "scaling": "mean-field",
//!     ...
//!   }
//! }
//! ```
//!
//! Matrices are arrays of rows. Numbers are written in shortest round-trip
//! decimal form, so loading and saving again reproduces the file exactly.

use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::{Activation, DeepMLP, FeatureInstance, HiddenLayer, Provenance, TwoLayerNet};
use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "greedy-subnet-model";
pub const MODEL_VERSION: u32 = 1;

/// Anything that can be stored in a model file.
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    TwoLayer(TwoLayerNet),
    Deep(DeepMLP),
    Features(FeatureInstance),
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    model: Body,
}

#[derive(Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
enum Scaling {
    MeanField,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum Body {
    TwoLayer {
        scaling: Scaling,
        activation: Activation,
        inner: Vec<Vec<f64>>,
        outer: Vec<f64>,
    },
    DeepMlp {
        scaling: Scaling,
        hidden: Vec<LayerBody>,
        readout: Vec<f64>,
    },
    FeatureInstance {
        provenance: Provenance,
        rows: Vec<Vec<f64>>,
        target: Vec<f64>,
    },
}

#[derive(Serialize, Deserialize)]
struct LayerBody {
    activation: Activation,
    weights: Vec<Vec<f64>>,
}

fn to_rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.axis_iter(Axis(0)).map(|r| r.to_vec()).collect()
}

fn from_rows(rows: Vec<Vec<f64>>, what: &str) -> Result<Array2<f64>> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidInput(format!("ragged matrix in {what}")));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((n, cols), flat).map_err(|e| Error::InvalidInput(e.to_string()))
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::TwoLayer(_) => "two-layer",
            Model::Deep(_) => "deep-mlp",
            Model::Features(_) => "feature-instance",
        }
    }

    fn to_body(&self) -> Body {
        match self {
            Model::TwoLayer(net) => Body::TwoLayer {
                scaling: Scaling::MeanField,
                activation: net.activation(),
                inner: to_rows(net.inner()),
                outer: net.outer().to_vec(),
            },
            Model::Deep(mlp) => Body::DeepMlp {
                scaling: Scaling::MeanField,
                hidden: mlp
                    .hidden_layers()
                    .iter()
                    .map(|l| LayerBody {
                        activation: l.activation,
                        weights: to_rows(&l.weights),
                    })
                    .collect(),
                readout: mlp.readout().to_vec(),
            },
            Model::Features(inst) => Body::FeatureInstance {
                provenance: inst.provenance(),
                rows: to_rows(inst.rows()),
                target: inst.target().to_vec(),
            },
        }
    }

    fn from_body(body: Body) -> Result<Self> {
        Ok(match body {
            Body::TwoLayer {
                activation,
                inner,
                outer,
                ..
            } => Model::TwoLayer(TwoLayerNet::new(
                from_rows(inner, "inner weights")?,
                Array1::from(outer),
                activation,
            )?),
            Body::DeepMlp { hidden, readout, .. } => {
                let layers = hidden
                    .into_iter()
                    .map(|l| Ok(HiddenLayer::new(from_rows(l.weights, "layer")?, l.activation)))
                    .collect::<Result<Vec<_>>>()?;
                Model::Deep(DeepMLP::new(layers, Array1::from(readout))?)
            }
            Body::FeatureInstance {
                provenance,
                rows,
                target,
            } => Model::Features(FeatureInstance::with_provenance(
                from_rows(rows, "feature rows")?,
                Array1::from(target),
                provenance,
            )?),
        })
    }

    pub fn to_json(&self) -> String {
        let env = Envelope {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            model: self.to_body(),
        };
        let mut text = serde_json::to_string_pretty(&env).expect("model serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::parse("<model>", e))?;
        match value.get("format").and_then(|f| f.as_str()) {
            Some(MODEL_FORMAT) => {}
            other => {
                return Err(Error::parse(
                    "<model>",
                    format!("expected format `{MODEL_FORMAT}`, found {other:?}"),
                ))
            }
        }
        let version = value
            .get("version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::parse("<model>", "missing version"))?;
        if version != u64::from(MODEL_VERSION) {
            return Err(Error::Version {
                found: version as u32,
                supported: MODEL_VERSION,
            });
        }
        let env: Envelope = serde_json::from_value(value).map_err(|e| Error::parse("<model>", e))?;
        Self::from_body(env.model)
    }
}

pub fn save_model(path: impl AsRef<Path>, model: &Model) -> Result<()> {
    crate::io::write_atomic(path.as_ref(), model.to_json().as_bytes())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Model::from_json(&text).map_err(|e| match e {
        Error::Parse { message, .. } => Error::parse(path, message),
        other => other,
    })
}

impl From<TwoLayerNet> for Model {
    fn from(net: TwoLayerNet) -> Self {
        Model::TwoLayer(net)
    }
}

impl From<DeepMLP> for Model {
    fn from(mlp: DeepMLP) -> Self {
        Model::Deep(mlp)
    }
}

impl From<FeatureInstance> for Model {
    fn from(inst: FeatureInstance) -> Self {
        Model::Features(inst)
    }
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;
    use crate::model::{init_random_net, Dataset};

    #[test]
    fn save_load_save_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        let net = init_random_net(7, 3, 5).unwrap();
        save_model(&path, &net.clone().into()).unwrap();
        let first = std::fs::read(&path).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(back, Model::TwoLayer(net));
        save_model(&path, &back).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), first);
    }

    #[test]
    fn loaded_net_has_identical_loss() {
        let net = init_random_net(12, 2, 8).unwrap();
        let data = Dataset::new(array![[0.3, -0.1], [1.0, 2.0]], array![0.5, -0.5]).unwrap();
        let text = Model::TwoLayer(net.clone()).to_json();
        let Model::TwoLayer(back) = Model::from_json(&text).unwrap() else {
            panic!("wrong kind");
        };
        assert_eq!(back.loss(&data).unwrap(), net.loss(&data).unwrap());
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let text = Model::TwoLayer(init_random_net(3, 2, 1).unwrap()).to_json();
        let cut = &text[..text.len() / 2];
        assert!(matches!(Model::from_json(cut), Err(Error::Parse { .. })));
    }

    #[test]
    fn version_is_checked() {
        let text = Model::TwoLayer(init_random_net(3, 2, 1).unwrap())
            .to_json()
            .replace("\"version\": 1", "\"version\": 9");
        assert!(matches!(Model::from_json(&text), Err(Error::Version { found: 9, .. })));
        let wrong = text.replace(MODEL_FORMAT, "something-else");
        assert!(matches!(Model::from_json(&wrong), Err(Error::Parse { .. })));
    }

    #[test]
    fn deep_and_feature_models_round_trip() {
        let deep = DeepMLP::new(
            vec![
                HiddenLayer::new(array![[0.1, 0.2], [0.3, -0.4]], Activation::Relu),
                HiddenLayer::new(array![[1.0, 2.0]], Activation::Sigmoid),
            ],
            array![0.25],
        )
        .unwrap();
        let inst = FeatureInstance::direct(array![[0.0, 1.5], [-0.5, 1.0]], array![0.0, 1.0]).unwrap();
        for model in [Model::Deep(deep), Model::Features(inst)] {
            let text = model.to_json();
            let back = Model::from_json(&text).unwrap();
            assert_eq!(back, model);
            assert_eq!(back.to_json(), text);
        }
    }
}
