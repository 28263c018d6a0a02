//! Constrained minimization of the covariant MSE and the noon-state analysis.

mod constrained;
mod noon;
mod phase;

pub use constrained::{
    optimize_avg_constraint, optimize_max_constraint, AvgConstraintOptions, Constraint,
    ConstraintKind, OptimizationResult, DENSE_EIGEN_LIMIT,
};
pub use noon::{
    candidate_count, noon_divergence_sweep, noon_local_minimax_lower, noon_minimax_mse, GridMinimaxInstance,
    NoonDivergenceRow,
};
pub use phase::{min_phase_mse, PhaseOptimum, PhaseSearch};
