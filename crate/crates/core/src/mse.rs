//! Mean-square error of the canonical covariant measurement.
//!
//! For a state `a` the error `θ̂ - θ` has density `(1/2π)|Σ a_n e^{-inθ̂}|²`, so the
//! MSE is the Toeplitz quadratic form `Σ conj(a_n) Θ_{n-m} a_m` with
//! `Θ_k = (1/2π)∫ θ² e^{ikθ} dθ`. Because the measurement is covariant the value
//! does not depend on the true phase.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::toeplitz::{autocorrelation, SymmetricToeplitz};
use crate::scalar::{cis, KahanSum, Real};
use crate::state::StateVector;

/// Support size above which [`covariant_mse`] switches to the FFT route.
pub const DIRECT_FORM_LIMIT: usize = 2048;

/// `Θ_k`: `π²/3` at `k = 0`, `2(-1)^k/k²` otherwise.
#[inline]
pub fn kernel_entry<T: Real>(k: u64) -> T {
    if k == 0 {
        T::PI() * T::PI() / T::lit(3.0)
    } else {
        let kf = T::from_u64(k).unwrap();
        let sign = if k.is_multiple_of(2) { T::one() } else { -T::one() };
        sign * T::lit(2.0) / (kf * kf)
    }
}

/// One-sided table of `Θ_0..=Θ_max_lag`.
#[derive(Clone, Debug, PartialEq)]
pub struct ToeplitzKernel<T> {
    entries: Vec<T>,
}

impl<T: Real> ToeplitzKernel<T> {
    pub fn new(max_lag: usize) -> Self {
        Self {
            entries: (0..=max_lag as u64).map(kernel_entry).collect(),
        }
    }

    pub fn max_lag(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    /// `Θ_k` for signed lag; the kernel is even.
    #[inline]
    pub fn get(&self, lag: i64) -> T {
        self.entries[lag.unsigned_abs() as usize]
    }

    /// `Θ` restricted to `[-half_width, half_width]` as a structured matrix.
    pub fn matrix(half_width: u64) -> SymmetricToeplitz<T> {
        let d = (2 * half_width + 1) as usize;
        SymmetricToeplitz::new(Self::new(d - 1).entries)
    }
}

/// `Σ_{n,m} conj(a_n) Θ_{n-m} a_m`.
pub fn covariant_mse<T: Real>(state: &StateVector<T>) -> T {
    if state.len() <= DIRECT_FORM_LIMIT {
        covariant_mse_direct(state.amplitudes())
    } else {
        covariant_mse_fft(state.amplitudes())
    }
}

/// `O(d²)` evaluation of the quadratic form.
pub fn covariant_mse_direct<T: Real>(a: &[Complex<T>]) -> T {
    let kernel = ToeplitzKernel::<T>::new(a.len().saturating_sub(1));
    let mut diag = KahanSum::new();
    let mut cross = KahanSum::new();
    for (i, ai) in a.iter().enumerate() {
        diag.add(ai.norm_sqr());
        if ai.norm_sqr() == T::zero() {
            continue;
        }
        let mut row = Complex::new(T::zero(), T::zero());
        for (j, aj) in a.iter().enumerate().skip(i + 1) {
            row += *aj * kernel.entries[j - i];
        }
        cross.add((ai.conj() * row).re);
    }
    kernel.entries[0] * diag.value() + T::lit(2.0) * cross.value()
}

/// Quadratic form through the FFT autocorrelation: `Θ_0 r_0 + 2 Σ_{k≥1} Θ_k Re r_k`.
pub fn covariant_mse_fft<T: Real>(a: &[Complex<T>]) -> T {
    let r = autocorrelation(a);
    let mut acc = KahanSum::new();
    acc.add(kernel_entry::<T>(0) * r[0].re);
    for (k, rk) in r.iter().enumerate().skip(1) {
        acc.add(T::lit(2.0) * kernel_entry::<T>(k as u64) * rk.re);
    }
    acc.value()
}

/// `Σ_n a_n e^{-inθ}` evaluated directly.
///
/// The phase factors come from a rotation recurrence restarted every 64 terms.
fn inverse_fourier<T: Real>(state: &StateVector<T>, theta: T) -> Complex<T> {
    let mut re = KahanSum::new();
    let mut im = KahanSum::new();
    let step = cis(-theta);
    let mut w = Complex::new(T::one(), T::zero());
    for (i, (n, a)) in state.iter().enumerate() {
        if i % 64 == 0 {
            w = cis(-T::from_index(n) * theta);
        }
        let z = a * w;
        re.add(z.re);
        im.add(z.im);
        w *= step;
    }
    Complex::new(re.value(), im.value())
}

/// `(1/2π)|Σ_n a_n e^{in(θ_true - θ̂)}|²`.
pub fn outcome_density<T: Real>(state: &StateVector<T>, theta_true: T, theta_hat: T) -> T {
    inverse_fourier(state, theta_hat - theta_true).norm_sqr() / T::TAU()
}

/// Outcome distribution of the covariant measurement at a fixed true phase.
#[derive(Clone, Debug)]
pub struct OutcomeDensity<'a, T: Real> {
    pub state: &'a StateVector<T>,
    pub theta_true: T,
}

impl<'a, T: Real> OutcomeDensity<'a, T> {
    pub fn new(state: &'a StateVector<T>, theta_true: T) -> Self {
        Self { state, theta_true }
    }

    pub fn at(&self, theta_hat: T) -> T {
        outcome_density(self.state, self.theta_true, theta_hat)
    }
}

/// Smallest grid the quadrature oracle accepts for a given state.
pub fn min_quadrature_grid<T: Real>(state: &StateVector<T>) -> usize {
    4 * (state.half_width() as usize + 1)
}

/// Composite trapezoid of `(1/2π)∫_{-π}^{π} θ² |Σ a_n e^{-inθ}|² dθ` on `intervals` panels.
pub fn trapezoid_mse<T: Real>(state: &StateVector<T>, intervals: usize) -> T {
    let h = T::TAU() / T::from_usize(intervals).unwrap();
    let mut acc = KahanSum::new();
    for i in 0..=intervals {
        let theta = -T::PI() + T::from_usize(i).unwrap() * h;
        let w = if i == 0 || i == intervals { T::lit(0.5) } else { T::one() };
        acc.add(w * theta * theta * inverse_fourier(state, theta).norm_sqr());
    }
    acc.value() * h / T::TAU()
}

/// Independent quadrature estimate of [`covariant_mse`].
///
/// The integrand `θ²|F(θ)|²` is smooth on `[-π, π]` but its periodic extension is
/// not, so plain trapezoid sums converge as `h²`. Romberg extrapolation over
/// `grid_points`, `2·grid_points` and `4·grid_points` panels removes the `h²` and
/// `h⁴` terms of the Euler–Maclaurin expansion.
pub fn quadrature_mse_oracle<T: Real>(state: &StateVector<T>, grid_points: usize) -> Result<T> {
    let required = min_quadrature_grid(state);
    if grid_points < required {
        return Err(Error::Undersampled {
            grid: grid_points,
            n_max: state.half_width(),
            required,
        });
    }
    let t1 = trapezoid_mse(state, grid_points);
    let t2 = trapezoid_mse(state, 2 * grid_points);
    let t4 = trapezoid_mse(state, 4 * grid_points);
    let r1 = (T::lit(4.0) * t2 - t1) / T::lit(3.0);
    let r2 = (T::lit(4.0) * t4 - t2) / T::lit(3.0);
    Ok((T::lit(16.0) * r2 - r1) / T::lit(15.0))
}

/// `(1/2π)∫ θ² e^{ikθ} dθ` by the same Romberg scheme, for checking [`kernel_entry`].
pub fn quadrature_kernel_entry(k: u64, grid_points: usize) -> f64 {
    let trap = |m: usize| {
        let h = std::f64::consts::TAU / m as f64;
        let mut acc = KahanSum::new();
        for i in 0..=m {
            let theta = -std::f64::consts::PI + i as f64 * h;
            let w = if i == 0 || i == m { 0.5 } else { 1.0 };
            acc.add(w * theta * theta * (k as f64 * theta).cos());
        }
        acc.value() * h / std::f64::consts::TAU
    };
    let (t1, t2, t4) = (trap(grid_points), trap(2 * grid_points), trap(4 * grid_points));
    let r1 = (4.0 * t2 - t1) / 3.0;
    let r2 = (4.0 * t4 - t2) / 3.0;
    (16.0 * r2 - r1) / 15.0
}
