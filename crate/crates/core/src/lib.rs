//! Mean-square-error bounds for optical phase estimation under photon-number
//! constraints.
//!
//! A pure input state in the span of `|n,0⟩` and `|0,n⟩` is a sequence `a_n` over
//! the signed photon-difference index. For the canonical covariant measurement its
//! MSE is the Toeplitz form `Σ conj(a_n) Θ_{n-m} a_m` with `Θ_0 = π²/3` and
//! `Θ_k = 2(-1)^k/k²`. The crate evaluates that form, minimizes it under the
//! `N_max <= E` and `(N²)_av <= E²` budgets, compares it with the SLD Fisher bound
//! `1/(4E²)`, follows the continuum limit, and checks everything by Monte Carlo.
//!
//! All numerical code is generic over [`scalar::Real`] (`f32` or `f64`). The
//! aliases below fix the scalar to `f64` for everyday use.
//!
//! ```
//! use phasebound::{build_noon, covariant_mse, sld_fisher};
//!
//! let noon = build_noon::<f64>(4).unwrap();
//! assert!((sld_fisher(&noon).j - 64.0).abs() < 1e-12);
//! let c = covariant_mse(&noon);
//! assert!((c - (std::f64::consts::PI.powi(2) / 3.0 + 2.0 / 64.0)).abs() < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod continuum;
pub mod error;
pub mod fisher;
pub mod linalg;
pub mod mse;
pub mod optimizer;
pub mod rng;
pub mod scalar;
pub mod simulator;
pub mod state;

pub use continuum::{
    dirichlet_ground_state, p2_expectation, q2_expectation, scaling_convergence, uncertainty_check, ContinuumFunction,
};
pub use error::{Error, Result};
pub use fisher::{lub_bound, phase_fidelity, sld_fisher, FisherResult};
pub use mse::{covariant_mse, kernel_entry, outcome_density, quadrature_mse_oracle, OutcomeDensity, ToeplitzKernel};
pub use optimizer::{
    min_phase_mse, noon_divergence_sweep, noon_local_minimax_lower, optimize_avg_constraint, optimize_max_constraint,
    Constraint, GridMinimaxInstance, OptimizationResult,
};
pub use scalar::Real;
pub use simulator::{empirical_mse, noon_plateau_demo, sample_outcomes, two_step_demo, SampleBatch, WrappedError};
pub use state::{
    build_coherent_noon, build_gaussian, build_noon, build_sine, from_continuum, PhotonIndex, PhotonMetrics,
    StateVector,
};

pub use num_complex::{Complex32, Complex64};

pub type StateVectorF64 = StateVector<f64>;
pub type StateVectorF32 = StateVector<f32>;
pub type PhotonMetricsF64 = PhotonMetrics<f64>;
pub type ToeplitzKernelF64 = ToeplitzKernel<f64>;
pub type ConstraintF64 = Constraint<f64>;
pub type OptimizationResultF64 = OptimizationResult<f64>;
pub type FisherResultF64 = FisherResult<f64>;
pub type ContinuumFunctionF64 = ContinuumFunction<f64>;
pub type SampleBatchF64 = SampleBatch<f64>;
pub type GridMinimaxInstanceF64 = GridMinimaxInstance<f64>;
