//! Networks, datasets, losses and the feature-map view of pruning.

mod activation;
mod dataset;
mod deep;
mod feature;
mod file;
mod net;
mod toy;

pub use activation::Activation;
pub use dataset::Dataset;
pub use deep::{DeepGradients, DeepMLP, HiddenLayer};
pub(crate) use feature::sq_dist;
pub use feature::{build_feature_instance, feature_map, vec_loss, FeatureInstance, Provenance};
pub use file::{load_model, save_model, Model, MODEL_FORMAT, MODEL_VERSION};
pub use net::{loss_mean, Neuron, TwoLayerNet};
pub use toy::{
    gen_toy_data, init_random_mlp, init_random_net, init_random_net_with, TOY_INPUT_DIM, TOY_SAMPLES, TOY_TEACHER_WIDTH,
};
