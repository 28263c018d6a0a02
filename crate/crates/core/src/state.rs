//! Input states in the photon-difference basis.
//!
//! A state lives in the span of `{|n,0⟩} ∪ {|0,n⟩}` and is stored as a single
//! sequence `a_n` over signed indices: `n > 0` is `|n,0⟩`, `n < 0` is `|0,-n⟩`
//! and `n = 0` is the vacuum `|0,0⟩` (counted once). The phase shift multiplies
//! `a_n` by `e^{inθ}`.

use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cis, KahanSum, Real};

/// Signed photon-difference index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PhotonIndex(pub i64);

impl PhotonIndex {
    /// Factor acquired by the amplitude at this index under a phase shift `θ`.
    pub fn phase_factor<T: Real>(self, theta: T) -> Complex<T> {
        cis(T::from_index(self.0) * theta)
    }

    pub fn photons(self) -> u64 {
        self.0.unsigned_abs()
    }
}

impl From<i64> for PhotonIndex {
    fn from(n: i64) -> Self {
        PhotonIndex(n)
    }
}

impl fmt::Display for PhotonIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 >= 0 {
            write!(f, "|{},0>", self.0)
        } else {
            write!(f, "|0,{}>", -self.0)
        }
    }
}

/// Normalized state with dense amplitudes on `[lo, hi]`, `lo <= 0 <= hi`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Real> {
    lo: i64,
    amplitudes: Vec<Complex<T>>,
}

/// Photon-number figures of a state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhotonMetrics<T> {
    /// `Σ n² |a_n|²`.
    pub n2_avg: T,
    /// `max{|n| : a_n ≠ 0}`.
    pub n_max: u64,
    /// `Σ n |a_n|²`.
    pub n_mean: T,
}

impl<T: Real> StateVector<T> {
    /// Wraps amplitudes for indices `lo, lo+1, ...`, checking normalization.
    ///
    /// The stored range is padded with zeros so that it always contains index 0.
    pub fn new(lo: i64, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let state = Self::padded(lo, amplitudes)?;
        let deviation = (state.norm_sqr() - T::one()).abs();
        if !(deviation <= T::normalization_tolerance()) {
            return Err(Error::NotNormalized {
                deviation: deviation.to_f64_lossy(),
            });
        }
        Ok(state)
    }

    /// Scales arbitrary amplitudes to unit norm.
    pub fn normalized(lo: i64, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let mut state = Self::padded(lo, amplitudes)?;
        let norm = state.norm_sqr().sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        for a in &mut state.amplitudes {
            *a /= norm;
        }
        Ok(state)
    }

    /// Real amplitudes, normalized.
    pub fn from_real(lo: i64, weights: &[T]) -> Result<Self> {
        Self::normalized(lo, weights.iter().map(|&w| Complex::new(w, T::zero())).collect())
    }

    /// `|0,0⟩`.
    pub fn vacuum() -> Self {
        Self {
            lo: 0,
            amplitudes: vec![Complex::new(T::one(), T::zero())],
        }
    }

    fn padded(lo: i64, mut amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::invalid("amplitudes", "empty amplitude vector"));
        }
        if let Some(bad) = amplitudes.iter().position(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite {
                x: (lo + bad as i64) as f64,
            });
        }
        let mut lo = lo;
        let hi = lo + amplitudes.len() as i64 - 1;
        if lo > 0 {
            let pad = lo as usize;
            amplitudes.splice(0..0, std::iter::repeat_n(Complex::new(T::zero(), T::zero()), pad));
            lo = 0;
        }
        if hi < 0 {
            amplitudes.extend(std::iter::repeat_n(Complex::new(T::zero(), T::zero()), (-hi) as usize));
        }
        Ok(Self { lo, amplitudes })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.amplitudes.len() as i64 - 1
    }

    /// Number of stored amplitudes.
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    /// Amplitude at index `n`; zero outside the stored range.
    pub fn amplitude(&self, n: i64) -> Complex<T> {
        if n < self.lo || n > self.hi() {
            Complex::new(T::zero(), T::zero())
        } else {
            self.amplitudes[(n - self.lo) as usize]
        }
    }

    /// `(n, a_n)` over the stored range.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex<T>)> + '_ {
        self.amplitudes
            .iter()
            .enumerate()
            .map(move |(i, &a)| (self.lo + i as i64, a))
    }

    /// Largest `|n|` in the stored range, whether or not the amplitude is zero.
    pub fn half_width(&self) -> u64 {
        self.lo.unsigned_abs().max(self.hi().unsigned_abs())
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect::<KahanSum<T>>().value()
    }

    /// Moduli `|a_n|` over the stored range.
    pub fn moduli(&self) -> Vec<T> {
        self.amplitudes.iter().map(|a| a.norm()).collect()
    }

    /// The state after the phase shift `U_θ`.
    pub fn phase_shifted(&self, theta: T) -> Self {
        Self {
            lo: self.lo,
            amplitudes: self
                .iter()
                .map(|(n, a)| a * PhotonIndex(n).phase_factor(theta))
                .collect(),
        }
    }

    /// `Σ_n conj(a_n) b_n`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi().min(other.hi());
        let mut re = KahanSum::new();
        let mut im = KahanSum::new();
        for n in lo..=hi {
            let z = self.amplitude(n).conj() * other.amplitude(n);
            re.add(z.re);
            im.add(z.im);
        }
        Complex::new(re.value(), im.value())
    }

    /// `‖a - b‖` in `ℓ²(ℤ)`.
    pub fn l2_distance(&self, other: &Self) -> T {
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        (lo..=hi)
            .map(|n| (self.amplitude(n) - other.amplitude(n)).norm_sqr())
            .collect::<KahanSum<T>>()
            .value()
            .sqrt()
    }

    /// Photon-number figures on the stored support.
    pub fn metrics(&self) -> PhotonMetrics<T> {
        let mut n2 = KahanSum::new();
        let mut n1 = KahanSum::new();
        let mut n_max = 0u64;
        for (n, a) in self.iter() {
            let p = a.norm_sqr();
            if p > T::zero() {
                n_max = n_max.max(n.unsigned_abs());
            }
            let nf = T::from_index(n);
            n2.add(nf * nf * p);
            n1.add(nf * p);
        }
        PhotonMetrics {
            n2_avg: n2.value(),
            n_max,
            n_mean: n1.value(),
        }
    }
}

/// `(|n,0⟩ + |0,n⟩)/√2`.
pub fn build_noon<T: Real>(n: u64) -> Result<StateVector<T>> {
    if n == 0 {
        return Err(Error::invalid("n", "noon state needs n >= 1; n = 0 is the vacuum"));
    }
    let n = n as i64;
    let mut amps = vec![Complex::new(T::zero(), T::zero()); (2 * n + 1) as usize];
    let h = T::FRAC_1_SQRT_2();
    amps[0] = Complex::new(h, T::zero());
    amps[(2 * n) as usize] = Complex::new(h, T::zero());
    Ok(StateVector { lo: -n, amplitudes: amps })
}

/// Gaussian-profile state `a_n ∝ exp(-n²/(4E²))`, truncated at `|n| <= ceil(cutoff_sigmas·E)`.
///
/// Returns the state together with the normalization constant `c₁`.
pub fn build_gaussian<T: Real>(energy: T, cutoff_sigmas: T) -> Result<(StateVector<T>, T)> {
    if !(energy > T::zero()) || !energy.is_finite() {
        return Err(Error::invalid("E", format!("must be positive, got {energy}")));
    }
    if !(cutoff_sigmas > T::zero()) || !cutoff_sigmas.is_finite() {
        return Err(Error::invalid("cutoff_sigmas", format!("must be positive, got {cutoff_sigmas}")));
    }
    let half = (cutoff_sigmas * energy).ceil().to_i64().unwrap_or(i64::MAX);
    let four_e2 = T::lit(4.0) * energy * energy;
    let weights: Vec<T> = (-half..=half)
        .map(|n| {
            let nf = T::from_index(n);
            (-(nf * nf) / four_e2).exp()
        })
        .collect();
    let norm = weights.iter().map(|&w| w * w).collect::<KahanSum<T>>().value().sqrt();
    let state = StateVector::from_real(-half, &weights)?;
    Ok((state, T::one() / norm))
}

/// Unnormalized weight `sin(π(E+n+1)/(2E+2))` of the sine-profile state.
pub fn sine_weight<T: Real>(energy: u64, n: i64) -> T {
    let e = energy as i64;
    T::from_index(e + n + 1) * T::PI() / T::from_index(2 * e + 2)
}

/// Sine-profile state on `[-E, E]`.
pub fn build_sine<T: Real>(energy: u64) -> Result<StateVector<T>> {
    if energy == 0 {
        return Err(Error::invalid("E", "sine state needs E >= 1"));
    }
    let e = energy as i64;
    let weights: Vec<T> = (-e..=e).map(|n| sine_weight::<T>(energy, n).sin()).collect();
    StateVector::from_real(-e, &weights)
}

/// Coherent noon state together with its truncation diagnostics.
#[derive(Clone, Debug)]
pub struct CoherentNoon<T: Real> {
    pub state: StateVector<T>,
    pub alpha: T,
    /// Mean photon number `α²` of each branch.
    pub mean_photons: T,
    /// Largest retained `k`.
    pub truncation: u64,
    /// Probability mass of the normalized (untruncated) state beyond `truncation`.
    pub discarded_probability: T,
}

/// `(|α,0⟩_c + |0,α⟩_c)/norm` with Poisson amplitudes `α^k e^{-α²/2}/√k!` placed at
/// indices `±k`; the two `k = 0` terms add at index 0.
pub fn build_coherent_noon<T: Real>(alpha: T, tail_tolerance: T) -> Result<CoherentNoon<T>> {
    if !(alpha > T::zero()) || !alpha.is_finite() {
        return Err(Error::invalid("alpha", format!("must be positive, got {alpha}")));
    }
    if !(tail_tolerance > T::zero() && tail_tolerance <= T::lit(1e-6)) {
        return Err(Error::invalid(
            "tail_tolerance",
            format!("must lie in (0, 1e-6], got {tail_tolerance}"),
        ));
    }
    let a2 = alpha * alpha;
    let ln_alpha = alpha.ln();
    // Branch amplitudes t_k through their logarithms so large α does not underflow t_0.
    let mut log_t = -a2 / T::lit(2.0);
    let mut branch = vec![log_t.exp()];
    // Total norm² of the untruncated superposition: 2(1 + e^{-α²}).
    let full_norm2 = T::lit(2.0) * (T::one() + (-a2).exp());
    let mut k: u64 = 0;
    loop {
        k += 1;
        log_t = log_t + ln_alpha - T::lit(0.5) * T::from_index(k as i64).ln();
        branch.push(log_t.exp());
        let kf = T::from_index(k as i64);
        // Past the mode the Poisson ratio α²/(j+1) decreases, so the tail is
        // dominated by a geometric series.
        if kf + T::lit(2.0) > a2 {
            let next = T::lit(2.0) * (log_t + ln_alpha - T::lit(0.5) * (kf + T::one()).ln());
            let ratio = a2 / (kf + T::lit(2.0));
            if ratio < T::one() {
                let tail_bound = T::lit(2.0) * next.exp() / (T::one() - ratio) / full_norm2;
                if tail_bound < tail_tolerance {
                    break;
                }
            }
        }
        if k > 100_000_000 {
            return Err(Error::invalid("alpha", "too large for a dense representation"));
        }
    }
    let truncation = k;
    // Direct summation of the discarded branch probabilities.
    let mut discarded = KahanSum::new();
    let mut log_d = log_t;
    let mut j = truncation;
    loop {
        j += 1;
        log_d = log_d + ln_alpha - T::lit(0.5) * T::from_index(j as i64).ln();
        let p = (T::lit(2.0) * log_d).exp();
        discarded.add(T::lit(2.0) * p / full_norm2);
        if T::from_index(j as i64) > a2 && p < T::epsilon() * T::epsilon() {
            break;
        }
    }

    let kmax = truncation as i64;
    let mut amps = vec![Complex::new(T::zero(), T::zero()); (2 * kmax + 1) as usize];
    for (k, &t) in branch.iter().enumerate() {
        let k = k as i64;
        if k == 0 {
            amps[kmax as usize] = Complex::new(t + t, T::zero());
        } else {
            amps[(kmax + k) as usize] = Complex::new(t, T::zero());
            amps[(kmax - k) as usize] = Complex::new(t, T::zero());
        }
    }
    let state = StateVector::normalized(-kmax, amps)?;
    Ok(CoherentNoon {
        state,
        alpha,
        mean_photons: a2,
        truncation,
        discarded_probability: discarded.value(),
    })
}

/// A complex profile `f(x)` on `[-X, X]` that can be sampled pointwise.
pub trait Profile<T: Real> {
    /// `X`: the profile vanishes outside `[-X, X]`.
    fn half_width(&self) -> T;
    fn eval(&self, x: T) -> Complex<T>;
}

/// Closure-backed profile.
pub struct FnProfile<F> {
    pub half_width: f64,
    pub f: F,
}

impl<F> FnProfile<F> {
    pub fn new(half_width: f64, f: F) -> Self {
        Self { half_width, f }
    }
}

impl<T: Real, F: Fn(T) -> Complex<T>> Profile<T> for FnProfile<F> {
    fn half_width(&self) -> T {
        T::lit(self.half_width)
    }
    fn eval(&self, x: T) -> Complex<T> {
        (self.f)(x)
    }
}

/// Samples `a_n ∝ f(n/E)` for `|n| <= X·E` and normalizes.
pub fn from_continuum<T: Real, P: Profile<T> + ?Sized>(profile: &P, energy: T) -> Result<StateVector<T>> {
    if !(energy > T::zero()) || !energy.is_finite() {
        return Err(Error::invalid("E", format!("must be positive, got {energy}")));
    }
    let x = profile.half_width();
    if !(x >= T::zero()) || !x.is_finite() {
        return Err(Error::invalid("half_width", format!("must be finite and nonnegative, got {x}")));
    }
    // A few ulps of slack so that X·E landing on an integer keeps that endpoint.
    let reach = x * energy * (T::one() + T::lit(8.0) * T::epsilon());
    let half = reach.floor().to_i64().unwrap_or(0);
    let mut amps = Vec::with_capacity((2 * half + 1) as usize);
    for n in -half..=half {
        let xn = T::from_index(n) / energy;
        let v = profile.eval(xn);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::NonFinite { x: xn.to_f64_lossy() });
        }
        amps.push(v);
    }
    StateVector::normalized(-half, amps)
}
