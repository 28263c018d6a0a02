//! Continuum limit of the discrete problems: grid functions on the rescaled index
//! `x = n/E`, their `⟨Q²⟩` and `⟨P²⟩`, the Dirichlet ground state on `[-1, 1]`, the
//! uncertainty check, and convergence of `E²·C` under the scaling map.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::SymmetricTridiagonal;
use crate::mse::covariant_mse;
use crate::scalar::{KahanSum, Real};
use crate::state::{from_continuum, Profile};

/// Smallest grid accepted by the expectation routines.
pub const MIN_GRID: usize = 8;

/// Default domain for problems without compact support.
pub const DEFAULT_HALF_WIDTH: f64 = 12.0;

/// Uniform-grid samples of a complex function on `[x_lo, x_hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuumFunction<T> {
    pub x_lo: T,
    pub x_hi: T,
    pub samples: Vec<Complex<T>>,
    pub h: T,
}

impl<T: Real> ContinuumFunction<T> {
    pub fn new(x_lo: T, x_hi: T, samples: Vec<Complex<T>>) -> Result<Self> {
        if !(x_hi > x_lo) || !x_lo.is_finite() || !x_hi.is_finite() {
            return Err(Error::invalid("interval", format!("need x_lo < x_hi, got [{x_lo}, {x_hi}]")));
        }
        if samples.len() < 2 {
            return Err(Error::invalid("samples", "need at least two grid points"));
        }
        if let Some(i) = samples.iter().position(|s| !s.re.is_finite() || !s.im.is_finite()) {
            let h = (x_hi - x_lo) / T::from_usize(samples.len() - 1).unwrap();
            return Err(Error::NonFinite {
                x: (x_lo + h * T::from_usize(i).unwrap()).to_f64_lossy(),
            });
        }
        let h = (x_hi - x_lo) / T::from_usize(samples.len() - 1).unwrap();
        Ok(Self { x_lo, x_hi, samples, h })
    }

    /// Samples `f` at `m` equispaced points including both endpoints.
    pub fn sample(x_lo: T, x_hi: T, m: usize, f: impl Fn(T) -> Complex<T>) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid("M", "need at least two grid points"));
        }
        let h = (x_hi - x_lo) / T::from_usize(m - 1).unwrap();
        let samples = (0..m).map(|i| f(x_lo + h * T::from_usize(i).unwrap())).collect();
        Self::new(x_lo, x_hi, samples)
    }

    pub fn sample_real(x_lo: T, x_hi: T, m: usize, f: impl Fn(T) -> T) -> Result<Self> {
        Self::sample(x_lo, x_hi, m, |x| Complex::new(f(x), T::zero()))
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn x(&self, i: usize) -> T {
        if i + 1 == self.samples.len() {
            self.x_hi
        } else {
            self.x_lo + self.h * T::from_usize(i).unwrap()
        }
    }

    /// Trapezoid rule for `∫ g(x_i, f_i) dx` over the grid.
    fn trapezoid(&self, g: impl Fn(T, Complex<T>) -> T) -> T {
        let last = self.samples.len() - 1;
        let half = T::lit(0.5);
        let mut acc = KahanSum::new();
        for (i, &s) in self.samples.iter().enumerate() {
            let w = if i == 0 || i == last { half } else { T::one() };
            acc.add(w * g(self.x(i), s));
        }
        acc.value() * self.h
    }

    /// `∫ |f|² dx` (trapezoid).
    pub fn norm_sqr(&self) -> T {
        self.trapezoid(|_, s| s.norm_sqr())
    }

    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        for s in &mut self.samples {
            *s /= norm;
        }
        Ok(self)
    }

    /// Pads with zeros to `[x_lo, x_hi]` on the same grid spacing.
    ///
    /// Both new endpoints must lie an integer number of steps beyond the old ones.
    pub fn extend_by_zero(&self, x_lo: T, x_hi: T) -> Result<Self> {
        let steps = |d: T, name: &'static str| -> Result<usize> {
            let s = d / self.h;
            let r = s.round();
            if !(d >= T::zero()) || (s - r).abs() > T::lit(1e-6) {
                return Err(Error::invalid(
                    name,
                    format!("must extend the domain by a whole number of grid steps (got {s} steps)"),
                ));
            }
            Ok(r.to_usize().unwrap_or(0))
        };
        let left = steps(self.x_lo - x_lo, "x_lo")?;
        let right = steps(x_hi - self.x_hi, "x_hi")?;
        let zero = Complex::new(T::zero(), T::zero());
        let mut samples = Vec::with_capacity(left + self.samples.len() + right);
        samples.extend(std::iter::repeat_n(zero, left));
        samples.extend_from_slice(&self.samples);
        samples.extend(std::iter::repeat_n(zero, right));
        Ok(Self {
            x_lo: self.x_lo - self.h * T::from_usize(left).unwrap(),
            x_hi: self.x_hi + self.h * T::from_usize(right).unwrap(),
            samples,
            h: self.h,
        })
    }

    /// Second-order finite-difference derivative: central inside, one-sided at the ends.
    pub fn derivative(&self) -> Vec<Complex<T>> {
        let f = &self.samples;
        let m = f.len();
        let two_h = T::lit(2.0) * self.h;
        if m < 3 {
            let d = (f[1] - f[0]) / self.h;
            return vec![d; m];
        }
        let mut d = Vec::with_capacity(m);
        d.push((f[0] * T::lit(-3.0) + f[1] * T::lit(4.0) - f[2]) / two_h);
        for i in 1..m - 1 {
            d.push((f[i + 1] - f[i - 1]) / two_h);
        }
        d.push((f[m - 1] * T::lit(3.0) - f[m - 2] * T::lit(4.0) + f[m - 3]) / two_h);
        d
    }

    fn require_grid(&self) -> Result<()> {
        if self.samples.len() < MIN_GRID {
            return Err(Error::invalid(
                "M",
                format!("need at least {MIN_GRID} grid points, got {}", self.samples.len()),
            ));
        }
        Ok(())
    }
}

/// Linear interpolation on the grid, zero outside `[x_lo, x_hi]`.
impl<T: Real> Profile<T> for ContinuumFunction<T> {
    fn half_width(&self) -> T {
        self.x_lo.abs().max(self.x_hi.abs())
    }

    fn eval(&self, x: T) -> Complex<T> {
        if x < self.x_lo || x > self.x_hi {
            return Complex::new(T::zero(), T::zero());
        }
        let last = self.samples.len() - 1;
        let s = (x - self.x_lo) / self.h;
        let i = s.floor().to_usize().unwrap_or(0).min(last - 1);
        let t = s - T::from_usize(i).unwrap();
        self.samples[i] * (T::one() - t) + self.samples[i + 1] * t
    }
}

/// `⟨Q²⟩ = ∫ x²|f|² dx / ∫|f|² dx`.
pub fn q2_expectation<T: Real>(f: &ContinuumFunction<T>) -> Result<T> {
    f.require_grid()?;
    let norm = positive_norm(f)?;
    Ok(f.trapezoid(|x, s| x * x * s.norm_sqr()) / norm)
}

/// `⟨P²⟩ = ∫ |f'|² dx / ∫|f|² dx`.
pub fn p2_expectation<T: Real>(f: &ContinuumFunction<T>) -> Result<T> {
    f.require_grid()?;
    let norm = positive_norm(f)?;
    let d = ContinuumFunction {
        samples: f.derivative(),
        ..f.clone()
    };
    Ok(d.norm_sqr() / norm)
}

fn positive_norm<T: Real>(f: &ContinuumFunction<T>) -> Result<T> {
    let n = f.norm_sqr();
    if !(n > T::zero()) {
        return Err(Error::ZeroNorm);
    }
    Ok(n)
}

/// Lowest eigenpair of the three-point Dirichlet Laplacian `-d²/dx²` on `[-1, 1]`
/// with `m` grid points (boundary included).
pub fn dirichlet_ground_state<T: Real>(m: usize) -> Result<(T, ContinuumFunction<T>)> {
    if m < 16 {
        return Err(Error::invalid("M", format!("need at least 16 grid points, got {m}")));
    }
    let h = T::lit(2.0) / T::from_usize(m - 1).unwrap();
    let inv_h2 = T::one() / (h * h);
    let interior = m - 2;
    let tri = SymmetricTridiagonal::new(vec![T::lit(2.0) * inv_h2; interior], vec![-inv_h2; interior - 1]);
    let value = tri.eigenvalue(0);
    let mut v = tri.eigenvector(value);
    let sum = v.iter().fold(T::zero(), |s, &x| s + x);
    if sum < T::zero() {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let zero = Complex::new(T::zero(), T::zero());
    let mut samples = Vec::with_capacity(m);
    samples.push(zero);
    samples.extend(v.into_iter().map(|x| Complex::new(x, T::zero())));
    samples.push(zero);
    let f = ContinuumFunction::new(-T::one(), T::one(), samples)?.normalized()?;
    Ok((value, f))
}

/// `(2/h²)(1 - cos(πh/2))`: the exact smallest eigenvalue of the discrete problem.
pub fn dirichlet_discrete_eigenvalue<T: Real>(m: usize) -> T {
    let h = T::lit(2.0) / T::from_usize(m - 1).unwrap();
    T::lit(2.0) / (h * h) * (T::one() - (T::PI() * h / T::lit(2.0)).cos())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UncertaintyCheck<T> {
    /// `⟨(Q-q̄)²⟩`.
    pub q2: T,
    /// `⟨(P-p̄)²⟩`.
    pub p2: T,
    pub product: T,
    /// `product >= 1/4 - 1e-6`.
    pub ok: bool,
}

/// Largest endpoint magnitude accepted by `uncertainty_check`.
pub const BOUNDARY_TOLERANCE: f64 = 1e-8;

/// `⟨ΔQ²⟩·⟨ΔP²⟩` against the bound `1/4`.
///
/// `⟨P²⟩` here is Richardson-extrapolated, so a saturating profile is not pushed
/// below `1/4` by the `O(h²)` bias of the difference quotient.
pub fn uncertainty_check<T: Real>(f: &ContinuumFunction<T>) -> Result<UncertaintyCheck<T>> {
    f.require_grid()?;
    let edge = f.samples[0].norm().max(f.samples[f.len() - 1].norm());
    let scale = f.samples.iter().fold(T::zero(), |m, s| m.max(s.norm()));
    if edge > T::lit(BOUNDARY_TOLERANCE) * scale.max(T::one()) {
        return Err(Error::BoundaryMass {
            magnitude: edge.to_f64_lossy(),
        });
    }
    let norm = positive_norm(f)?;
    let q_mean = f.trapezoid(|x, s| x * s.norm_sqr()) / norm;
    let q2 = f.trapezoid(|x, s| (x - q_mean) * (x - q_mean) * s.norm_sqr()) / norm;
    // Richardson combination of the stride-h and stride-2h central differences.
    let (m1, r1) = momentum_moments(f, 1, norm);
    let (m2, r2) = momentum_moments(f, 2, norm);
    let p_mean = (T::lit(4.0) * m1 - m2) / T::lit(3.0);
    let p2_raw = (T::lit(4.0) * r1 - r2) / T::lit(3.0);
    let p2 = (p2_raw - p_mean * p_mean).max(T::zero());
    let product = q2 * p2;
    Ok(UncertaintyCheck {
        q2,
        p2,
        product,
        ok: product >= T::lit(0.25 - 1e-6),
    })
}

/// `(⟨P⟩, ⟨P²⟩)` from central differences of step `stride·h`, zero outside the grid.
fn momentum_moments<T: Real>(f: &ContinuumFunction<T>, stride: usize, norm: T) -> (T, T) {
    let m = f.len();
    let zero = Complex::new(T::zero(), T::zero());
    let at = |i: isize| if i < 0 || i as usize >= m { zero } else { f.samples[i as usize] };
    let step = T::lit(2.0) * f.h * T::from_usize(stride).unwrap();
    let s = stride as isize;
    let d: Vec<Complex<T>> = (0..m as isize).map(|i| (at(i + s) - at(i - s)) / step).collect();
    // ⟨P⟩ = ∫ conj(f)(-i f') dx = ∫ Im(conj(f) f') dx.
    let mean = ContinuumFunction {
        samples: f.samples.iter().zip(&d).map(|(a, b)| a.conj() * b).collect(),
        ..f.clone()
    }
    .trapezoid(|_, s| s.im)
        / norm;
    let second = ContinuumFunction { samples: d, ..f.clone() }.norm_sqr() / norm;
    (mean, second)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingRow<T> {
    pub energy: T,
    /// `E²·C(from_continuum(f, E))`.
    pub scaled: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingConvergence<T> {
    pub rows: Vec<ScalingRow<T>>,
    /// `⟨f|P²|f⟩`.
    pub limit: T,
    /// `|last - limit| / limit`.
    pub final_gap: T,
    /// Whether the rows after the first two move monotonically toward the limit.
    pub monotone_tail: bool,
}

/// Tabulates `E²·covariant_mse(from_continuum(f, E))` for each `E`.
pub fn scaling_convergence<T: Real>(f: &ContinuumFunction<T>, energies: &[T]) -> Result<ScalingConvergence<T>> {
    if energies.is_empty() {
        return Err(Error::invalid("E_list", "empty"));
    }
    let limit = p2_expectation(f)?;
    let rows = energies
        .iter()
        .map(|&e| {
            let state = from_continuum(f, e)?;
            Ok(ScalingRow {
                energy: e,
                scaled: e * e * covariant_mse(&state),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let gaps: Vec<T> = rows.iter().map(|r| (r.scaled - limit).abs()).collect();
    let monotone_tail = gaps.windows(2).skip(1).all(|w| w[1] <= w[0]);
    let final_gap = gaps[gaps.len() - 1] / limit.abs();
    Ok(ScalingConvergence {
        rows,
        limit,
        final_gap,
        monotone_tail,
    })
}

/// `sin(π(1+x)/2)` on `[-1, 1]` with `m` points, normalized.
pub fn sine_profile<T: Real>(m: usize) -> Result<ContinuumFunction<T>> {
    ContinuumFunction::sample_real(-T::one(), T::one(), m, |x| (T::FRAC_PI_2() * (T::one() + x)).sin())?.normalized()
}

/// `e^{-x²/4}` on `[-X, X]` with `m` points, normalized.
pub fn gaussian_profile<T: Real>(half_width: T, m: usize) -> Result<ContinuumFunction<T>> {
    ContinuumFunction::sample_real(-half_width, half_width, m, |x| (-(x * x) / T::lit(4.0)).exp())?.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_moments() {
        let g = gaussian_profile(12.0f64, 4001).unwrap();
        assert!((g.norm_sqr() - 1.0).abs() < 1e-10);
        assert!((q2_expectation(&g).unwrap() - 1.0).abs() < 1e-4);
        assert!((p2_expectation(&g).unwrap() - 0.25).abs() < 1e-4);
    }

    #[test]
    fn sine_and_constant() {
        let s = sine_profile::<f64>(2001).unwrap();
        assert!((p2_expectation(&s).unwrap() - PI * PI / 4.0).abs() < 1e-4);
        let c = ContinuumFunction::sample_real(-1.0f64, 1.0, 2001, |_| 1.0).unwrap().normalized().unwrap();
        assert!((q2_expectation(&c).unwrap() - 1.0 / 3.0).abs() < 1e-5);
        let tiny = ContinuumFunction::sample_real(-1.0f64, 1.0, 7, |_| 1.0).unwrap();
        assert!(q2_expectation(&tiny).is_err());
        assert!(p2_expectation(&tiny).is_err());
    }

    #[test]
    fn dirichlet_examples() {
        let (v, f) = dirichlet_ground_state::<f64>(101).unwrap();
        let exact = PI * PI / 4.0;
        assert!((v - exact).abs() / exact < 1e-3);
        assert!((v - dirichlet_discrete_eigenvalue::<f64>(101)).abs() < 1e-10);
        assert_eq!(f.samples[0], Complex::new(0.0, 0.0));
        assert_eq!(f.samples[100], Complex::new(0.0, 0.0));
        let (v2, _) = dirichlet_ground_state::<f64>(201).unwrap();
        let ratio = (v - exact).abs() / (v2 - exact).abs();
        assert!(ratio > 3.9 && ratio < 4.1, "ratio {ratio}");
        assert!(dirichlet_ground_state::<f64>(15).is_err());
    }

    #[test]
    fn dirichlet_eigenfunction_is_sine() {
        let (_, f) = dirichlet_ground_state::<f64>(401).unwrap();
        let s = sine_profile::<f64>(401).unwrap();
        let diff = ContinuumFunction {
            samples: f.samples.iter().zip(&s.samples).map(|(a, b)| a - b).collect(),
            ..f.clone()
        };
        assert!(diff.norm_sqr().sqrt() < 1e-3);
    }

    #[test]
    fn uncertainty_examples() {
        let g = gaussian_profile(12.0f64, 4001).unwrap();
        let u = uncertainty_check(&g).unwrap();
        assert!((u.product - 0.25).abs() < 1e-4);
        assert!(u.ok, "{:e}", u.product - 0.25);
        assert!((u.product - 0.25).abs() < 1e-8);

        let (_, d) = dirichlet_ground_state::<f64>(401).unwrap();
        let wide = d.extend_by_zero(-12.0, 12.0).unwrap();
        assert_eq!(wide.len(), 401 + 2 * 2200);
        let u = uncertainty_check(&wide).unwrap();
        let expected = (1.0 / 3.0 - 2.0 / (PI * PI)) * PI * PI / 4.0;
        assert!(u.product > 0.25 && u.ok);
        assert!((u.product - expected).abs() < 5e-3, "{} vs {expected}", u.product);

        let s = sine_profile::<f64>(401).unwrap();
        let shifted = ContinuumFunction::sample_real(-1.0f64, 1.0, 401, |x| (PI * x / 2.0).cos() + 0.5).unwrap();
        assert!(matches!(uncertainty_check(&shifted), Err(Error::BoundaryMass { .. })));
        assert!(uncertainty_check(&s).is_ok());
    }

    #[test]
    fn uncertainty_removes_momentum_mean() {
        // A plane-wave factor shifts ⟨P⟩ but not the centered product.
        let g = ContinuumFunction::sample(-12.0f64, 12.0, 4001, |x| {
            Complex::from_polar((-(x - 0.7) * (x - 0.7) / 4.0).exp(), 3.0 * x)
        })
        .unwrap()
        .normalized()
        .unwrap();
        let u = uncertainty_check(&g).unwrap();
        assert!((u.product - 0.25).abs() < 2e-3, "{}", u.product);
    }

    #[test]
    fn interpolation_reproduces_grid() {
        let g = gaussian_profile(12.0f64, 241).unwrap();
        for i in [0usize, 17, 120, 240] {
            assert!((g.eval(g.x(i)) - g.samples[i]).norm() < 1e-14);
        }
        assert_eq!(g.eval(13.0), Complex::new(0.0, 0.0));
    }

    #[test]
    fn phase_matters_in_scaling() {
        let s = sine_profile::<f64>(2001).unwrap();
        let flipped = ContinuumFunction {
            samples: s.samples.iter().enumerate().map(|(i, &v)| if i > 1000 { -v } else { v }).collect(),
            ..s.clone()
        };
        let a = scaling_convergence(&s, &[16.0]).unwrap();
        let b = scaling_convergence(&flipped, &[16.0]).unwrap();
        assert!((a.rows[0].scaled - b.rows[0].scaled).abs() > 1.0);
    }

    #[test]
    fn scaling_small_run() {
        let s = sine_profile::<f64>(4001).unwrap();
        let t = scaling_convergence(&s, &[16.0, 32.0]).unwrap();
        assert!(t.rows[1].scaled < t.rows[0].scaled);
        assert!(t.final_gap < 0.1);
        assert!(scaling_convergence(&s, &[]).is_err());
    }
}
