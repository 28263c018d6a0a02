use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::rng::derive_rng;
use crate::scalar::{wrap_angle, KahanSum, Real};
use crate::state::StateVector;

/// Lower limit on the number of density grid cells.
pub const MIN_SAMPLER_GRID: usize = 4096;
/// Grid cells per unit of `n_max`.
pub const GRID_PER_PHOTON: usize = 32;
/// Samples drawn from one derived stream.
pub const CHUNK_SIZE: usize = 4096;

const DRIFT_TOLERANCE: f64 = 1e-6;

/// Inverse-CDF sampler for the outcome offset `u = θ̂ - θ_true`.
///
/// The density `q(u) = (1/2π)|Σ a_n e^{-inu}|²` is tabulated on a uniform grid of
/// `[-π, π]`, its CDF accumulated by the trapezoid rule, and each draw inverts the
/// CDF of the piecewise-linear density inside one cell.
#[derive(Clone, Debug)]
pub struct OutcomeSampler<T> {
    h: T,
    density: Vec<T>,
    cdf: Vec<T>,
}

impl<T: Real> OutcomeSampler<T> {
    pub fn new(state: &StateVector<T>) -> Result<Self> {
        let cells = Self::grid_cells(state);
        let mut buf = vec![Complex::new(T::zero(), T::zero()); cells];
        for (n, a) in state.iter() {
            let sign = if n.rem_euclid(2) == 0 { T::one() } else { -T::one() };
            buf[n.rem_euclid(cells as i64) as usize] += a * sign;
        }
        FftPlanner::new().plan_fft_forward(cells).process(&mut buf);
        let mut density: Vec<T> = buf.iter().map(|z| z.norm_sqr() / T::TAU()).collect();
        density.push(density[0]);

        let h = T::TAU() / T::from_usize(cells).unwrap();
        let half = h / T::lit(2.0);
        let mut cdf = Vec::with_capacity(cells + 1);
        let mut acc = KahanSum::new();
        cdf.push(T::zero());
        for w in density.windows(2) {
            acc.add(half * (w[0] + w[1]));
            cdf.push(acc.value());
        }
        let total = acc.value();
        let drift = (total - T::one()).abs().to_f64_lossy();
        if !(drift <= DRIFT_TOLERANCE) {
            return Err(Error::DensityDrift {
                total: total.to_f64_lossy(),
                drift,
            });
        }
        Ok(Self { h, density, cdf })
    }

    /// `max(4096, 32·n_max)` cells.
    pub fn grid_cells(state: &StateVector<T>) -> usize {
        MIN_SAMPLER_GRID.max(GRID_PER_PHOTON * state.half_width() as usize)
    }

    pub fn cells(&self) -> usize {
        self.density.len() - 1
    }

    /// Tabulated density at `u_j = -π + j·h`, `j = 0..=cells`.
    pub fn density(&self) -> &[T] {
        &self.density
    }

    /// Trapezoid CDF at the grid nodes.
    pub fn cdf(&self) -> &[T] {
        &self.cdf
    }

    /// Maps a uniform variate `v ∈ [0, 1)` to an offset in `[-π, π)`.
    pub fn invert(&self, v: T) -> T {
        let total = self.cdf[self.cdf.len() - 1];
        let target = v * total;
        let j = self.cdf.partition_point(|&c| c <= target).clamp(1, self.cdf.len() - 1) - 1;
        let w = target - self.cdf[j];
        let p0 = self.density[j];
        let p1 = self.density[j + 1];
        // p0·s + (p1 - p0)/(2h)·s² = w on s ∈ [0, h].
        let a = (p1 - p0) / (T::lit(2.0) * self.h);
        let disc = (p0 * p0 + T::lit(4.0) * a * w).max(T::zero());
        let denom = p0 + disc.sqrt();
        let s = if denom > T::zero() {
            T::lit(2.0) * w / denom
        } else {
            T::zero()
        };
        let u = -T::PI() + self.h * T::from_usize(j).unwrap() + s.max(T::zero()).min(self.h);
        wrap_angle(u)
    }

    pub fn draw_offset<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        self.invert(T::lit(rng.random::<f64>()))
    }

    /// One estimate `θ̂ = wrap(θ_true + u)`.
    pub fn draw<R: Rng + ?Sized>(&self, theta_true: T, rng: &mut R) -> T {
        wrap_angle(theta_true + self.draw_offset(rng))
    }

    /// `count` estimates drawn in chunks of `CHUNK_SIZE`, chunk `k` from stream
    /// `(seed, tag, k)`.
    pub fn sample_tagged(&self, theta_true: T, count: usize, seed: u64, tag: &str) -> Vec<T> {
        let chunks = count.div_ceil(CHUNK_SIZE);
        (0..chunks)
            .into_par_iter()
            .flat_map_iter(|k| {
                let mut rng = derive_rng(seed, tag, k as u64);
                let len = CHUNK_SIZE.min(count - k * CHUNK_SIZE);
                (0..len).map(move |_| self.draw(theta_true, &mut rng)).collect::<Vec<_>>()
            })
            .collect()
    }

    pub fn sample(&self, theta_true: T, count: usize, seed: u64) -> Result<SampleBatch<T>> {
        if count == 0 {
            return Err(Error::invalid("count", "must be positive"));
        }
        Ok(SampleBatch {
            theta_true: wrap_angle(theta_true),
            estimates: self.sample_tagged(theta_true, count, seed, "sample_outcomes"),
            seed,
            count,
        })
    }
}

/// Estimates drawn i.i.d. from the covariant outcome density.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch<T> {
    pub theta_true: T,
    /// Estimates in `[-π, π)`.
    pub estimates: Vec<T>,
    pub seed: u64,
    pub count: usize,
}

pub fn sample_outcomes<T: Real>(
    state: &StateVector<T>,
    theta_true: T,
    count: usize,
    seed: u64,
) -> Result<SampleBatch<T>> {
    OutcomeSampler::new(state)?.sample(theta_true, count, seed)
}

/// `T_θ(θ̂) - θ`, with `T_θ` shifting `θ̂` by a multiple of `2π` into `[θ-π, θ+π)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct WrappedError<T>(pub T);

impl<T: Real> WrappedError<T> {
    pub fn value(self) -> T {
        self.0
    }
}

pub fn wrapped_error<T: Real>(theta_true: T, theta_hat: T) -> WrappedError<T> {
    WrappedError(wrap_angle(theta_hat - theta_true))
}

/// Mean of squared errors and its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorStats<T> {
    pub mse: T,
    pub stderr: T,
    pub count: usize,
}

impl<T: Real> ErrorStats<T> {
    /// Needs at least two values.
    pub fn from_squared_errors(values: &[T]) -> Result<Self> {
        let count = values.len();
        if count < 2 {
            return Err(Error::invalid("count", format!("need at least 2 samples, got {count}")));
        }
        let nf = T::from_usize(count).unwrap();
        let mse = values.iter().copied().collect::<KahanSum<T>>().value() / nf;
        let ss = values
            .iter()
            .map(|&x| (x - mse) * (x - mse))
            .collect::<KahanSum<T>>()
            .value();
        let var = ss / (nf - T::one());
        Ok(Self {
            mse,
            stderr: (var / nf).sqrt(),
            count,
        })
    }
}

/// Empirical `E[(T_θ(θ̂) - θ)²]`.
pub fn empirical_mse<T: Real>(batch: &SampleBatch<T>) -> Result<ErrorStats<T>> {
    let sq: Vec<T> = batch
        .estimates
        .iter()
        .map(|&e| {
            let d = wrapped_error(batch.theta_true, e).value();
            d * d
        })
        .collect();
    ErrorStats::from_squared_errors(&sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mse::{covariant_mse, outcome_density};
    use crate::state::{build_noon, build_sine};
    use std::f64::consts::PI;

    #[test]
    fn tabulated_density_matches_direct() {
        let s = build_sine::<f64>(7).unwrap();
        let sampler = OutcomeSampler::new(&s).unwrap();
        let h = 2.0 * PI / sampler.cells() as f64;
        for j in [0usize, 1, 100, 2048, 4095, 4096] {
            let u = -PI + h * j as f64;
            assert!((sampler.density()[j] - outcome_density(&s, 0.0, u)).abs() < 1e-12);
        }
        assert!((sampler.cdf()[sampler.cells()] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inversion_is_monotone_and_in_range() {
        let s = build_noon::<f64>(3).unwrap();
        let sampler = OutcomeSampler::new(&s).unwrap();
        let mut prev = -PI;
        for i in 0..10_000 {
            let u = sampler.invert(i as f64 / 10_000.0);
            assert!((-PI..PI).contains(&u));
            assert!(u >= prev - 1e-12);
            prev = u;
        }
    }

    #[test]
    fn deterministic_batches() {
        let s = build_noon::<f64>(2).unwrap();
        let a = sample_outcomes(&s, 0.3, 10_000, 5).unwrap();
        let b = sample_outcomes(&s, 0.3, 10_000, 5).unwrap();
        let c = sample_outcomes(&s, 0.3, 10_000, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.estimates, c.estimates);
        assert_eq!(a.estimates.len(), 10_000);
        assert!(sample_outcomes(&s, 0.3, 0, 5).is_err());
    }

    #[test]
    fn wrap_examples() {
        assert!((wrapped_error(3.0f64, -3.0).value() - (2.0 * PI - 6.0)).abs() < 1e-15);
        assert!((wrapped_error(-3.0f64, 3.0).value() - (6.0 - 2.0 * PI)).abs() < 1e-15);
        assert_eq!(wrapped_error(0.5f64, 0.25).value(), -0.25);
    }

    #[test]
    fn noon_one_mse() {
        let s = build_noon::<f64>(1).unwrap();
        let batch = sample_outcomes(&s, -2.5, 200_000, 1).unwrap();
        let st = empirical_mse(&batch).unwrap();
        assert!((st.mse - covariant_mse(&s)).abs() < 4.0 * st.stderr);
    }

    #[test]
    fn stats_need_two() {
        assert!(ErrorStats::<f64>::from_squared_errors(&[1.0]).is_err());
        let st = ErrorStats::from_squared_errors(&[1.0f64, 3.0]).unwrap();
        assert_eq!(st.mse, 2.0);
        assert!((st.stderr - 1.0).abs() < 1e-15);
    }
}
