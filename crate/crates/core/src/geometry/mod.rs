//! Geometry of the polytope spanned by an instance's feature rows: the best
//! convex-combination loss `ℓ*`, diameter, interior radius `γ`, and checkers
//! for the convergence bounds of greedy forward selection.
//!
//! The density regularity condition used for the mean-field limit has no
//! finite-network analogue and is not estimated here.

mod checks;
mod hull;
mod lstar;

pub use checks::{
    check_harmonic_bound, check_prop1_bound, check_step_recursion, check_w_bound, w_bound, BoundCheck, CheckStatus,
    CHECK_SLACK,
};
pub use hull::{
    convex_hull_2d, diameter, gamma_estimate, gamma_exact_2d, polytope_stats, ExactGamma, GammaKind, GammaValue,
    PolytopeStats, DEFAULT_GAMMA_DIRECTIONS,
};
pub use lstar::{
    lstar_binary, lstar_solve, lstar_solve_with, SimplexSolution, BINARY_SUBSET_CAP, LSTAR_MAX_ITERATIONS,
};
