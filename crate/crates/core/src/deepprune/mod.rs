//! Layer-wise greedy selection for [`DeepMLP`](crate::model::DeepMLP) models.
//!
//! Hidden layers are pruned from the input side outward. Within a layer,
//! neurons are added one at a time to a multiset `S`; each candidate is scored
//! on a minibatch by replacing the layer with the average over `S ∪ {k}`, and
//! the loop stops once the full-data loss is within `ε` of the original
//! model's loss. The readout is never pruned.

mod layer;

pub use layer::{
    prune_all_layers, prune_layer, score_candidates, BatchSchedule, DeepPruneOutcome, LayerPruneConfig,
    LayerPruneReport, LayerTraceEntry,
};
