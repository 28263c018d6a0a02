//! Noon-state analysis: the local minimax lower bound, the discretized decision
//! problem behind it, and the divergence of `n²·C(noon_n)`.

use crate::error::{Error, Result};
use crate::scalar::{KahanSum, Real};
use crate::state::build_noon;

use super::phase::{min_phase_mse, PhaseSearch};

/// `(π/n · ⌊nε/π⌋)²`.
pub fn noon_local_minimax_lower<T: Real>(n: u64, eps: T) -> Result<T> {
    if n == 0 {
        return Err(Error::invalid("n", "must be positive"));
    }
    if !(eps > T::zero() && eps <= T::PI()) {
        return Err(Error::invalid("eps", format!("must lie in (0, π], got {eps}")));
    }
    let nf = T::from_u64(n).unwrap();
    let k = (nf * eps / T::PI()).floor();
    let r = T::PI() / nf * k;
    Ok(r * r)
}

/// `K` candidate phases spaced `delta` apart and a randomized decision `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridMinimaxInstance<T> {
    pub k: usize,
    pub delta: T,
    pub probabilities: Vec<T>,
}

impl<T: Real> GridMinimaxInstance<T> {
    pub fn new(delta: T, probabilities: Vec<T>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::invalid("probabilities", "need at least one candidate"));
        }
        if !(delta > T::zero()) || !delta.is_finite() {
            return Err(Error::invalid("delta", format!("must be positive, got {delta}")));
        }
        if probabilities.iter().any(|&p| !(p >= T::zero())) {
            return Err(Error::invalid("probabilities", "must be nonnegative"));
        }
        let total = probabilities.iter().copied().collect::<KahanSum<T>>().value();
        let k = probabilities.len();
        let tol = T::lit(1e-12) * T::from_usize(k).unwrap().max(T::one());
        if (total - T::one()).abs() > tol.max(T::normalization_tolerance()) {
            return Err(Error::invalid("probabilities", format!("must sum to 1, got {total}")));
        }
        Ok(Self { k, delta, probabilities })
    }

    /// Instance for the noon state with `K = ⌊nε/π⌋` candidates spaced `2π/n`.
    pub fn from_noon(n: u64, eps: T, probabilities: Vec<T>) -> Result<Self> {
        let k = candidate_count(n, eps)?;
        if k != probabilities.len() {
            return Err(Error::invalid(
                "probabilities",
                format!("expected K = {k} entries, got {}", probabilities.len()),
            ));
        }
        Self::new(T::TAU() / T::from_u64(n).unwrap(), probabilities)
    }

    /// `Σ_i p_i δ² (j - i)²` for the decision `j ∈ 1..=K`.
    pub fn risk(&self, j: usize) -> T {
        assert!((1..=self.k).contains(&j), "decision index out of range");
        let d2 = self.delta * self.delta;
        self.probabilities
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let diff = T::from_i64(j as i64 - (i as i64 + 1)).unwrap();
                p * d2 * diff * diff
            })
            .collect::<KahanSum<T>>()
            .value()
    }

    pub fn risks(&self) -> Vec<T> {
        (1..=self.k).map(|j| self.risk(j)).collect()
    }

    pub fn worst_case(&self) -> T {
        self.risks().into_iter().fold(T::neg_infinity(), T::max)
    }

    /// `δ²((K-1)/2)²`, which `worst_case` never falls below.
    pub fn rigorous_lower_bound(&self) -> T {
        let h = T::from_usize(self.k - 1).unwrap() / T::lit(2.0);
        self.delta * self.delta * h * h
    }

    /// `δ²(K/2)²`, the constant that reproduces `(π/n⌊nε/π⌋)²` for the noon grid.
    pub fn reported_lower_bound(&self) -> T {
        let h = T::from_usize(self.k).unwrap() / T::lit(2.0);
        self.delta * self.delta * h * h
    }
}

/// `K = ⌊nε/π⌋`.
pub fn candidate_count<T: Real>(n: u64, eps: T) -> Result<usize> {
    if n == 0 {
        return Err(Error::invalid("n", "must be positive"));
    }
    if !(eps > T::zero() && eps <= T::PI()) {
        return Err(Error::invalid("eps", format!("must lie in (0, π], got {eps}")));
    }
    Ok((T::from_u64(n).unwrap() * eps / T::PI()).floor().to_usize().unwrap_or(0))
}

/// `C(noon_n)` by the phase search on noon moduli.
pub fn noon_minimax_mse<T: Real>(n: u64, search: PhaseSearch) -> Result<T> {
    let noon = build_noon::<T>(n)?;
    Ok(min_phase_mse(noon.lo(), &noon.moduli(), search)?.value)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoonDivergenceRow<T> {
    pub n: u64,
    /// `C(noon_n)`.
    pub mse: T,
    /// `n² · C(noon_n)`.
    pub scaled: T,
}

pub fn noon_divergence_sweep<T: Real>(n_list: &[u64], search: PhaseSearch) -> Result<Vec<NoonDivergenceRow<T>>> {
    n_list
        .iter()
        .map(|&n| {
            let mse = noon_minimax_mse::<T>(n, search)?;
            let nf = T::from_u64(n).unwrap();
            Ok(NoonDivergenceRow {
                n,
                mse,
                scaled: nf * nf * mse,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn lower_bound_examples() {
        let b = noon_local_minimax_lower(100, 0.1f64).unwrap();
        assert!((b - (3.0 * PI / 100.0).powi(2)).abs() < 1e-15);
        assert!((b - 8.8826e-3).abs() < 1e-6);
        assert_eq!(noon_local_minimax_lower(10, 0.3f64).unwrap(), 0.0);
        let far = noon_local_minimax_lower(10_000_000, 0.1f64).unwrap();
        assert!((far / 0.01 - 1.0).abs() < 1e-5);
        assert!(noon_local_minimax_lower(10, 0.0f64).is_err());
        assert!(noon_local_minimax_lower(10, 4.0f64).is_err());
    }

    #[test]
    fn grid_examples() {
        let one = GridMinimaxInstance::new(0.7f64, vec![1.0]).unwrap();
        assert_eq!(one.worst_case(), 0.0);
        let g = GridMinimaxInstance::new(1.0f64, vec![1.0 / 3.0; 3]).unwrap();
        let r = g.risks();
        assert!((r[0] - 5.0 / 3.0).abs() < 1e-15);
        assert!((r[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!((r[2] - 5.0 / 3.0).abs() < 1e-15);
        assert!((g.worst_case() - 5.0 / 3.0).abs() < 1e-15);
        assert!((g.rigorous_lower_bound() - 1.0).abs() < 1e-15);
        assert!((g.reported_lower_bound() - 2.25).abs() < 1e-15);
    }

    #[test]
    fn noon_grid_matches_bound_formula() {
        let g = GridMinimaxInstance::from_noon(100, 0.1f64, vec![1.0 / 3.0; 3]).unwrap();
        let bound = noon_local_minimax_lower(100, 0.1f64).unwrap();
        assert!((g.reported_lower_bound() - bound).abs() < 1e-15);
        assert!(GridMinimaxInstance::from_noon(100, 0.1f64, vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn rejects_bad_probabilities() {
        assert!(GridMinimaxInstance::new(1.0f64, vec![0.5, 0.6]).is_err());
        assert!(GridMinimaxInstance::new(1.0f64, vec![-0.5, 1.5]).is_err());
        assert!(GridMinimaxInstance::<f64>::new(1.0, vec![]).is_err());
    }

    #[test]
    fn divergence_sweep_examples() {
        let rows = noon_divergence_sweep::<f64>(&[1, 10], PhaseSearch::default()).unwrap();
        assert!((rows[0].mse - (PI * PI / 3.0 - 0.5)).abs() < 1e-12);
        assert!((rows[0].mse - 2.78987).abs() < 1e-5);
        assert!((rows[1].scaled - 328.49).abs() < 0.01);
    }
}
