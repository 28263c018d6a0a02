//! Monte-Carlo layer: draws covariant-measurement outcomes and measures the wrapped
//! square error empirically.

mod demos;
mod sampler;

pub use demos::{
    noon_branch_period, noon_plateau_demo, two_step_demo, PlateauOptions, PlateauReport, PlateauRow, TwoStepReport,
};
pub use sampler::{
    empirical_mse, sample_outcomes, wrapped_error, ErrorStats, OutcomeSampler, SampleBatch, WrappedError,
    CHUNK_SIZE, GRID_PER_PHOTON, MIN_SAMPLER_GRID,
};
