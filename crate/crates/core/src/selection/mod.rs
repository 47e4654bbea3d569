//! Subnetwork selection on a [`FeatureInstance`](crate::model::FeatureInstance).
//!
//! Every argmin breaks ties toward the smallest index.

mod backward;
mod counterexample;
mod forward;
mod frank_wolfe;
mod random;
mod report;
mod state;

pub use backward::{backward_subsets, run_backward};
pub use counterexample::{counterexample_instance, COUNTEREXAMPLE_WIDTH};
pub(crate) use forward::argmin;
pub use forward::{
    forward_step_nearest, forward_step_scan, run_forward, run_forward_with, StepRule, StopRule, DEFAULT_EPS_STEP_CAP,
};
pub use frank_wolfe::run_frank_wolfe;
pub use random::run_random_subset;
pub use report::{Method, PruneReport, ReportMeta, TraceEntry};
pub use state::SelectionState;
