//! Greedy forward subnetwork selection for mean-field networks.
//!
//! A width-`N` two-layer network is viewed as `N` feature rows whose average
//! is the network's prediction on the training set; pruning picks a small
//! multiset of rows whose average stays close to the scaled labels. The
//! crate covers the models and their training ([`model`], [`training`]),
//! the selection algorithms ([`selection`]), the polytope geometry and bound
//! checks ([`geometry`]), layer-wise pruning of deep MLPs ([`deepprune`]),
//! and the rate experiment ([`harness`]).
//!
//! ```
//! use greedy_subnet::model::{build_feature_instance, gen_toy_data, init_random_net};
//! use greedy_subnet::selection::{run_forward, StopRule};
//!
//! let (data, _teacher) = gen_toy_data(0)?;
//! let net = init_random_net(100, data.dim(), 0)?;
//! let inst = build_feature_instance(&net, &data)?;
//! let report = run_forward(&inst, StopRule::MaxSize(16));
//! assert!(report.final_loss() < report.initial_loss());
//! # Ok::<(), greedy_subnet::Error>(())
//! ```

pub mod deepprune;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod io;
pub mod model;
pub mod selection;
pub mod training;

pub use error::{Error, Result};

// The guide's chapters, compiled so that `cargo test --doc` runs their
// snippets.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/feature-map.md")]
    mod feature_map {}
    #[doc = include_str!("../../../book/src/forward-selection.md")]
    mod forward_selection {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/counterexample.md")]
    mod counterexample {}
    #[doc = include_str!("../../../book/src/deep-pruning.md")]
    mod deep_pruning {}
    #[doc = include_str!("../../../book/src/rate-experiment.md")]
    mod rate_experiment {}
}
