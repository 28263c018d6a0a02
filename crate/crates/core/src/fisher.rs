//! SLD Fisher information of the phase-shifted family and the locally-unbiased
//! bound values.
//!
//! The generator of `U_θ` is `diag(n)` in the photon-difference basis, so for a pure
//! state the SLD Fisher information is four times the variance of the index `n`
//! under `|a_n|²`, independently of `θ`.

use crate::error::{Error, Result};
use crate::optimizer::Constraint;
use crate::scalar::{KahanSum, Real};
use crate::state::StateVector;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FisherResult<T> {
    /// SLD Fisher information `J`.
    pub j: T,
    /// `1/J`; infinite when `J = 0`.
    pub cr_bound: T,
}

pub fn sld_fisher<T: Real>(state: &StateVector<T>) -> FisherResult<T> {
    let mut m1 = KahanSum::new();
    let mut m2 = KahanSum::new();
    for (n, a) in state.iter() {
        let p = a.norm_sqr();
        let nf = T::from_index(n);
        m1.add(nf * p);
        m2.add(nf * nf * p);
    }
    let mean = m1.value();
    let j = (T::lit(4.0) * (m2.value() - mean * mean)).max(T::zero());
    let cr_bound = if j > T::zero() { T::one() / j } else { T::infinity() };
    FisherResult { j, cr_bound }
}

/// `1/(4E²)`: the optimum of the locally unbiased criterion under either budget.
pub fn lub_bound<T: Real>(constraint: Constraint<T>) -> Result<T> {
    let e = constraint.energy();
    if !(e >= T::one()) || !e.is_finite() {
        return Err(Error::invalid("E", format!("must be at least 1, got {e}")));
    }
    Ok(T::one() / (T::lit(4.0) * e * e))
}

/// `|⟨φ|U_δ|φ⟩| = |Σ |a_n|² e^{inδ}|`.
pub fn phase_fidelity<T: Real>(state: &StateVector<T>, delta: T) -> T {
    let mut re = KahanSum::new();
    let mut im = KahanSum::new();
    for (n, a) in state.iter() {
        let p = a.norm_sqr();
        let arg = T::from_index(n) * delta;
        re.add(p * arg.cos());
        im.add(p * arg.sin());
    }
    (re.value() * re.value() + im.value() * im.value()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::build_noon;

    #[test]
    fn noon_fisher() {
        for n in 1..=64u64 {
            let f = sld_fisher(&build_noon::<f64>(n).unwrap());
            assert!((f.j - 4.0 * (n * n) as f64).abs() < 1e-12 * (n * n) as f64);
            assert!((f.cr_bound - 1.0 / (4.0 * (n * n) as f64)).abs() < 1e-15);
        }
    }

    #[test]
    fn vacuum_and_pair() {
        let v = sld_fisher(&StateVector::<f64>::vacuum());
        assert_eq!(v.j, 0.0);
        assert!(v.cr_bound.is_infinite());
        let s = StateVector::<f64>::from_real(0, &[1.0, 1.0]).unwrap();
        assert!((sld_fisher(&s).j - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lub_values() {
        assert!((lub_bound(Constraint::<f64>::MaxPhoton(5)).unwrap() - 0.01).abs() < 1e-16);
        assert!((lub_bound(Constraint::AvgSquare(5.0f64)).unwrap() - 0.01).abs() < 1e-16);
        for e in [10u64, 1000, 100_000] {
            let b = lub_bound(Constraint::<f64>::MaxPhoton(e)).unwrap();
            assert!(((e * e) as f64 * b - 0.25).abs() < 1e-15);
        }
        assert!(lub_bound(Constraint::AvgSquare(0.5f64)).is_err());
        assert!(lub_bound(Constraint::<f64>::MaxPhoton(0)).is_err());
    }

    #[test]
    fn fidelity_of_noon() {
        let s = build_noon::<f64>(3).unwrap();
        // |cos(3δ)| for the two-point support.
        for &d in &[0.01, 0.2, 0.5] {
            assert!((phase_fidelity(&s, d) - (3.0 * d).cos().abs()).abs() < 1e-15);
        }
    }
}
