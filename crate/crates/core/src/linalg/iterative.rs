//! Ground state of `T + D` (symmetric positive-definite Toeplitz plus nonnegative
//! diagonal) for dimensions where dense reduction is too costly. Inverse iteration,
//! each step solved by Jacobi-preconditioned conjugate gradients on the FFT matvec.

use super::symmetric::SmallestEigenpair;
use super::toeplitz::SymmetricToeplitz;
use super::tridiagonal::normalize;
use crate::error::{Error, Result};
use crate::scalar::Real;

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

struct Operator<'a, T: Real> {
    toeplitz: &'a SymmetricToeplitz<T>,
    diagonal: &'a [T],
}

impl<T: Real> Operator<'_, T> {
    fn apply(&self, x: &[T]) -> Vec<T> {
        let mut y = self.toeplitz.matvec_real(x);
        for ((yi, &di), &xi) in y.iter_mut().zip(self.diagonal).zip(x) {
            *yi += di * xi;
        }
        y
    }

    fn preconditioner(&self) -> Vec<T> {
        let t0 = self.toeplitz.column()[0];
        self.diagonal.iter().map(|&d| T::one() / (t0 + d)).collect()
    }

    /// Solves `A x = b` to relative residual `tol`.
    fn solve(&self, b: &[T], x0: Option<&[T]>, tol: T, max_iter: usize) -> Result<(Vec<T>, usize)> {
        let n = b.len();
        let minv = self.preconditioner();
        let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![T::zero(); n]);
        let ax = self.apply(&x);
        let mut r: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
        let bnorm = dot(b, b).sqrt().max(T::min_positive_value());
        let mut z: Vec<T> = r.iter().zip(&minv).map(|(&ri, &mi)| ri * mi).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        for it in 0..max_iter {
            if dot(&r, &r).sqrt() <= tol * bnorm {
                return Ok((x, it));
            }
            let ap = self.apply(&p);
            let alpha = rz / dot(&p, &ap);
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            for i in 0..n {
                z[i] = r[i] * minv[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        let res = dot(&r, &r).sqrt() / bnorm;
        if res <= tol * T::lit(100.0) {
            Ok((x, max_iter))
        } else {
            Err(Error::NoConvergence {
                what: "conjugate gradients",
                iterations: max_iter,
                residual: res.to_f64_lossy(),
            })
        }
    }
}

/// Lowest eigenpair of `toeplitz + diag(diagonal)`, stopping once
/// `‖A v - ρ v‖ <= residual_tol`.
pub fn toeplitz_ground_state<T: Real>(
    toeplitz: &SymmetricToeplitz<T>,
    diagonal: &[T],
    start: Option<&[T]>,
    residual_tol: T,
) -> Result<SmallestEigenpair<T>> {
    let n = toeplitz.dim();
    assert_eq!(diagonal.len(), n, "diagonal length mismatch");
    let op = Operator { toeplitz, diagonal };
    let mut v: Vec<T> = match start {
        Some(s) => s.to_vec(),
        None => {
            // Smooth even start: the ground states here are single-humped.
            let half = T::from_usize(n + 1).unwrap();
            (0..n)
                .map(|i| (T::PI() * T::from_usize(i + 1).unwrap() / half).sin())
                .collect()
        }
    };
    normalize(&mut v);
    let max_outer = 200;
    let mut total_inner = 0;
    let mut residual = T::infinity();
    for outer in 0..max_outer {
        let (mut w, inner) = op.solve(&v, None, T::lit(1e-3).min(residual.max(T::epsilon())), 20 * n + 100)?;
        total_inner += inner;
        normalize(&mut w);
        let aw = op.apply(&w);
        let rho = dot(&w, &aw);
        residual = aw
            .iter()
            .zip(&w)
            .map(|(&a, &x)| (a - rho * x) * (a - rho * x))
            .fold(T::zero(), |s, x| s + x)
            .sqrt();
        v = w;
        if residual <= residual_tol {
            return Ok(SmallestEigenpair {
                value: rho,
                vector: v,
                gap: T::nan(),
                iterations: outer + 1 + total_inner,
            });
        }
    }
    Err(Error::NoConvergence {
        what: "inverse iteration",
        iterations: max_outer,
        residual: residual.to_f64_lossy(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::smallest_eigenpair;
    use crate::mse::ToeplitzKernel;

    #[test]
    fn agrees_with_dense_on_kernel_matrix() {
        let half = 60u64;
        let t = ToeplitzKernel::<f64>::matrix(half);
        let n = t.dim();
        let dense = smallest_eigenpair(t.to_dense(), n);
        let it = toeplitz_ground_state(&t, &vec![0.0; n], None, 1e-11).unwrap();
        assert!((dense.value - it.value).abs() < 1e-11, "{} vs {}", dense.value, it.value);

        let diag: Vec<f64> = (0..n).map(|i| 1e-4 * ((i as f64) - half as f64).powi(2)).collect();
        let mut m = t.to_dense();
        for i in 0..n {
            m[i * n + i] += diag[i];
        }
        let dense = smallest_eigenpair(m, n);
        let it = toeplitz_ground_state(&t, &diag, None, 1e-11).unwrap();
        assert!((dense.value - it.value).abs() < 1e-11);
    }
}
