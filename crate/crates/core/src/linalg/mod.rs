//! Dense and structured linear algebra used by the optimizers.

pub mod iterative;
pub mod symmetric;
pub mod toeplitz;
pub mod tridiagonal;

pub use symmetric::{smallest_eigenpair, SmallestEigenpair};
pub use toeplitz::SymmetricToeplitz;
pub use tridiagonal::SymmetricTridiagonal;
