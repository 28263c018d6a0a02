//! FFT routes for Toeplitz structure: circulant-embedded matvec and autocorrelation.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::scalar::Real;

/// Real symmetric Toeplitz matrix given by its first column.
#[derive(Clone, Debug)]
pub struct SymmetricToeplitz<T: Real> {
    column: Vec<T>,
    /// FFT of the circulant embedding, length `fft_len`.
    spectrum: Vec<Complex<T>>,
    fft_len: usize,
}

impl<T: Real> SymmetricToeplitz<T> {
    pub fn new(column: Vec<T>) -> Self {
        let d = column.len();
        let fft_len = (2 * d).next_power_of_two().max(2);
        let mut embed = vec![Complex::new(T::zero(), T::zero()); fft_len];
        for (k, &t) in column.iter().enumerate() {
            embed[k] = Complex::new(t, T::zero());
            if k > 0 {
                embed[fft_len - k] = Complex::new(t, T::zero());
            }
        }
        FftPlanner::new().plan_fft_forward(fft_len).process(&mut embed);
        Self {
            column,
            spectrum: embed,
            fft_len,
        }
    }

    pub fn dim(&self) -> usize {
        self.column.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> T {
        self.column[i.abs_diff(j)]
    }

    pub fn column(&self) -> &[T] {
        &self.column
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<T> {
        let d = self.dim();
        let mut m = vec![T::zero(); d * d];
        for i in 0..d {
            for j in 0..d {
                m[i * d + j] = self.entry(i, j);
            }
        }
        m
    }

    /// `y = T x` in `O(d log d)`.
    pub fn matvec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let d = self.dim();
        assert_eq!(x.len(), d, "dimension mismatch");
        let mut planner = FftPlanner::new();
        let mut buf = vec![Complex::new(T::zero(), T::zero()); self.fft_len];
        buf[..d].copy_from_slice(x);
        planner.plan_fft_forward(self.fft_len).process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= *s;
        }
        planner.plan_fft_inverse(self.fft_len).process(&mut buf);
        let scale = T::one() / T::from_usize(self.fft_len).unwrap();
        buf.truncate(d);
        for b in &mut buf {
            *b *= scale;
        }
        buf
    }

    pub fn matvec_real(&self, x: &[T]) -> Vec<T> {
        let xc: Vec<Complex<T>> = x.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.matvec(&xc).into_iter().map(|z| z.re).collect()
    }
}

/// `r_k = Σ_m a_{m+k} conj(a_m)` for `k = 0..len`, via zero-padded FFT.
pub fn autocorrelation<T: Real>(a: &[Complex<T>]) -> Vec<Complex<T>> {
    let d = a.len();
    let n = (2 * d).next_power_of_two().max(2);
    let mut planner = FftPlanner::new();
    let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
    buf[..d].copy_from_slice(a);
    planner.plan_fft_forward(n).process(&mut buf);
    for b in &mut buf {
        *b = Complex::new(b.norm_sqr(), T::zero());
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = T::one() / T::from_usize(n).unwrap();
    buf.truncate(d);
    for b in &mut buf {
        *b *= scale;
    }
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_matches_dense() {
        let col: Vec<f64> = (0..37).map(|k| 1.0 / (1.0 + k as f64)).collect();
        let t = SymmetricToeplitz::new(col);
        let x: Vec<f64> = (0..37).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let y = t.matvec_real(&x);
        let dense = t.to_dense();
        for i in 0..37 {
            let yi: f64 = (0..37).map(|j| dense[i * 37 + j] * x[j]).sum();
            assert!((yi - y[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn autocorrelation_matches_direct() {
        let a: Vec<Complex<f64>> = (0..13)
            .map(|i| Complex::new((i as f64).sin(), (2.0 * i as f64).cos()))
            .collect();
        let r = autocorrelation(&a);
        for k in 0..13 {
            let direct: Complex<f64> = (0..13 - k).map(|m| a[m + k] * a[m].conj()).sum();
            assert!((direct - r[k]).norm() < 1e-12);
        }
    }
}
