//! `C(|φ⟩)`: the best covariant MSE reachable by re-phasing a state with fixed moduli.

use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mse::{covariant_mse, kernel_entry};
use crate::rng::derive_rng;
use crate::scalar::{cis, wrap_angle, Real};
use crate::state::StateVector;

/// Settings of the phase search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhaseSearch {
    /// Random initializations in addition to the all-zero start.
    pub restarts: usize,
    pub seed: u64,
    pub max_sweeps: usize,
}

impl Default for PhaseSearch {
    fn default() -> Self {
        Self {
            restarts: 16,
            seed: 0,
            max_sweeps: 10_000,
        }
    }
}

/// Best phases found and the resulting MSE (an upper bound on `C(|φ⟩)`).
#[derive(Clone, Debug)]
pub struct PhaseOptimum<T: Real> {
    /// `φ_n` over the input index range; entries with zero modulus are 0.
    pub phases: Vec<T>,
    pub value: T,
    pub state: StateVector<T>,
    pub converged: bool,
    pub gradient_norm: T,
    pub sweeps: usize,
}

struct Descent<T> {
    phases: Vec<T>,
    value: T,
    gradient_norm: T,
    sweeps: usize,
}

/// Cyclic coordinate descent on `F(φ) = Θ_0 + Σ_{n≠m} Θ_{n-m} r_n r_m cos(φ_n - φ_m)`.
///
/// With `S_n = Σ_{m≠n} Θ_{n-m} r_m e^{iφ_m}` the terms in `φ_n` are
/// `2 r_n |S_n| cos(φ_n - arg S_n)`, minimized at `φ_n = arg S_n + π`.
fn descend<T: Real>(index: &[i64], moduli: &[T], start: Vec<T>, max_sweeps: usize) -> Descent<T> {
    let d = index.len();
    let coupling = |i: usize, j: usize| kernel_entry::<T>(index[i].abs_diff(index[j]));
    let mut phases = start;
    let field = |phases: &[T], i: usize| -> Complex<T> {
        let mut s = Complex::new(T::zero(), T::zero());
        for j in 0..d {
            if j != i {
                s += cis(phases[j]) * (coupling(i, j) * moduli[j]);
            }
        }
        s
    };
    let objective = |phases: &[T]| -> T {
        let mut acc = kernel_entry::<T>(0) * moduli.iter().fold(T::zero(), |s, &r| s + r * r);
        for i in 0..d {
            acc += moduli[i] * (cis(-phases[i]) * field(phases, i)).re;
        }
        acc
    };
    let mut value = objective(&phases);
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        for i in 0..d {
            let s = field(&phases, i);
            if s.norm() > T::zero() {
                phases[i] = wrap_angle(s.arg() + T::PI());
            }
        }
        let next = objective(&phases);
        let improvement = value - next;
        value = next;
        if improvement <= T::lit(1e-15) * value.abs().max(T::one()) {
            break;
        }
    }
    let gradient_norm = (0..d)
        .map(|i| {
            let g = T::lit(2.0) * moduli[i] * (cis(-phases[i]) * field(&phases, i)).im;
            g * g
        })
        .fold(T::zero(), |s, x| s + x)
        .sqrt();
    Descent {
        phases,
        value,
        gradient_norm,
        sweeps,
    }
}

/// Minimizes the covariant MSE over phases with the moduli `|a_n|` held fixed.
///
/// `moduli[i]` is the modulus at index `lo + i`. The result is the best of the
/// all-zero start and `restarts` seeded random starts.
pub fn min_phase_mse<T: Real>(lo: i64, moduli: &[T], search: PhaseSearch) -> Result<PhaseOptimum<T>> {
    if moduli.is_empty() {
        return Err(Error::invalid("moduli", "empty"));
    }
    if let Some(bad) = moduli.iter().find(|&&r| !(r >= T::zero()) || !r.is_finite()) {
        return Err(Error::invalid("moduli", format!("must be finite and nonnegative, found {bad}")));
    }
    let norm2 = moduli.iter().fold(T::zero(), |s, &r| s + r * r);
    if !((norm2 - T::one()).abs() <= T::normalization_tolerance()) {
        return Err(Error::NotNormalized {
            deviation: (norm2 - T::one()).abs().to_f64_lossy(),
        });
    }
    let support: Vec<usize> = (0..moduli.len()).filter(|&i| moduli[i] > T::zero()).collect();
    let index: Vec<i64> = support.iter().map(|&i| lo + i as i64).collect();
    let r: Vec<T> = support.iter().map(|&i| moduli[i]).collect();

    let starts = search.restarts + 1;
    let best = (0..starts)
        .into_par_iter()
        .map(|k| {
            let start: Vec<T> = if k == 0 {
                vec![T::zero(); r.len()]
            } else {
                let mut rng = derive_rng(search.seed, "min_phase_mse", k as u64);
                (0..r.len())
                    .map(|_| T::lit(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)))
                    .collect()
            };
            (k, descend(&index, &r, start, search.max_sweeps))
        })
        .reduce_with(|a, b| {
            // Lower value wins; ties go to the earlier start so the result is schedule-free.
            if b.1.value < a.1.value || (b.1.value == a.1.value && b.0 < a.0) {
                b
            } else {
                a
            }
        })
        .expect("at least one start")
        .1;

    // Remove the irrelevant global phase.
    let reference = best.phases[0];
    let mut phases = vec![T::zero(); moduli.len()];
    for (&i, &p) in support.iter().zip(&best.phases) {
        phases[i] = wrap_angle(p - reference);
    }
    let amps: Vec<Complex<T>> = moduli.iter().zip(&phases).map(|(&m, &p)| cis(p) * m).collect();
    let state = StateVector::normalized(lo, amps)?;
    let value = covariant_mse(&state);
    let scale = moduli.iter().fold(T::zero(), |m, &x| m.max(x));
    Ok(PhaseOptimum {
        phases,
        value,
        state,
        converged: best.gradient_norm <= T::lit(1e-8).max(T::lit(1e3) * T::epsilon()) * scale.max(T::one()),
        gradient_norm: best.gradient_norm,
        sweeps: best.sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::smallest_eigenpair;
    use crate::mse::ToeplitzKernel;
    use std::f64::consts::PI;

    fn noon_moduli(n: usize) -> Vec<f64> {
        let mut m = vec![0.0; 2 * n + 1];
        m[0] = 0.5f64.sqrt();
        m[2 * n] = 0.5f64.sqrt();
        m
    }

    #[test]
    fn noon_closed_form_and_sweep_oracle() {
        for n in [1usize, 2, 5, 17] {
            let opt = min_phase_mse(-(n as i64), &noon_moduli(n), PhaseSearch::default()).unwrap();
            let closed = PI * PI / 3.0 - 1.0 / (2.0 * (n * n) as f64);
            assert!((opt.value - closed).abs() < 1e-12);
            // 1-D sweep over the relative phase.
            let theta = kernel_entry::<f64>(2 * n as u64);
            let sweep_min = (0..=20_000)
                .map(|i| PI * PI / 3.0 + theta * (i as f64 * PI / 10_000.0).cos())
                .fold(f64::INFINITY, f64::min);
            assert!((opt.value - sweep_min).abs() < 1e-9);
            assert!(opt.converged);
        }
    }

    #[test]
    fn single_index() {
        let opt = min_phase_mse(3, &[1.0f64], PhaseSearch::default()).unwrap();
        assert!((opt.value - PI * PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn adjacent_pair_aligns() {
        let h = 0.5f64.sqrt();
        let opt = min_phase_mse(0, &[h, h], PhaseSearch::default()).unwrap();
        assert!((opt.value - (PI * PI / 3.0 - 2.0)).abs() < 1e-12);
        assert!(opt.phases[1].abs() < 1e-9);
    }

    #[test]
    fn bounded_by_zero_phase_and_relaxation() {
        let weights = [0.3, 0.0, 0.5, 0.9, 0.2, 0.7, 0.1];
        let norm: f64 = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        let moduli: Vec<f64> = weights.iter().map(|w| w / norm).collect();
        let opt = min_phase_mse(-3, &moduli, PhaseSearch { restarts: 8, seed: 11, max_sweeps: 10_000 }).unwrap();
        let zero = StateVector::from_real(-3, &moduli).unwrap();
        assert!(opt.value <= covariant_mse(&zero) + 1e-12);
        let support: Vec<i64> = (0..7).filter(|&i| moduli[i] > 0.0).map(|i| i as i64 - 3).collect();
        let k = ToeplitzKernel::<f64>::new(8);
        let d = support.len();
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                m[i * d + j] = k.get(support[i] - support[j]);
            }
        }
        let lower = smallest_eigenpair(m, d).value;
        assert!(opt.value >= lower - 1e-12);
    }

    #[test]
    fn deterministic_under_seed() {
        let moduli: Vec<f64> = {
            let w: Vec<f64> = (0..9).map(|i| 1.0 + (i as f64 * 1.3).sin()).collect();
            let n: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            w.iter().map(|x| x / n).collect()
        };
        let s = PhaseSearch { restarts: 6, seed: 99, max_sweeps: 10_000 };
        let a = min_phase_mse(-4, &moduli, s).unwrap();
        let b = min_phase_mse(-4, &moduli, s).unwrap();
        assert_eq!(a.phases, b.phases);
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn rejects_bad_moduli() {
        assert!(min_phase_mse::<f64>(0, &[], PhaseSearch::default()).is_err());
        assert!(min_phase_mse(0, &[0.5f64, 0.5], PhaseSearch::default()).is_err());
        assert!(min_phase_mse(0, &[-1.0f64], PhaseSearch::default()).is_err());
    }
}
