//! Smallest eigenpair of a dense real symmetric matrix: Householder reduction to
//! tridiagonal form, Sturm bisection, inverse iteration and back-transformation.

use super::tridiagonal::{normalize, SymmetricTridiagonal};
use crate::scalar::Real;

/// Householder reflectors `H_k = I - β_k v_k v_kᵀ` acting on components `k+1..`.
#[derive(Clone, Debug)]
pub struct Reflectors<T> {
    reflectors: Vec<Option<(Vec<T>, T)>>,
}

impl<T: Real> Reflectors<T> {
    /// Maps an eigenvector of the tridiagonal form back to the original basis.
    pub fn apply(&self, y: &mut [T]) {
        for (k, r) in self.reflectors.iter().enumerate().rev() {
            if let Some((v, beta)) = r {
                let tail = &mut y[k + 1..];
                let dot = v.iter().zip(tail.iter()).fold(T::zero(), |a, (&vi, &yi)| a + vi * yi);
                let s = *beta * dot;
                for (yi, &vi) in tail.iter_mut().zip(v) {
                    *yi -= s * vi;
                }
            }
        }
    }
}

/// Reduces a row-major symmetric `n × n` matrix to tridiagonal form. Consumes the matrix.
pub fn tridiagonalize<T: Real>(mut a: Vec<T>, n: usize) -> (SymmetricTridiagonal<T>, Reflectors<T>) {
    assert_eq!(a.len(), n * n, "matrix is not n × n");
    let mut diag = vec![T::zero(); n];
    let mut off = vec![T::zero(); n.saturating_sub(1)];
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    let mut p = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    for k in 0..n.saturating_sub(2) {
        diag[k] = a[k * n + k];
        let m = n - k - 1;
        let mut v: Vec<T> = (0..m).map(|i| a[(k + 1 + i) * n + k]).collect();
        let tail_norm2 = v[1..].iter().fold(T::zero(), |s, &x| s + x * x);
        if tail_norm2 == T::zero() {
            off[k] = v[0];
            reflectors.push(None);
            continue;
        }
        let norm = (v[0] * v[0] + tail_norm2).sqrt();
        let alpha = if v[0] >= T::zero() { -norm } else { norm };
        v[0] -= alpha;
        let beta = T::lit(2.0) / (v[0] * v[0] + tail_norm2);
        off[k] = alpha;

        // p = β B v, with B the trailing block.
        let base = k + 1;
        for i in 0..m {
            let row = &a[(base + i) * n + base..(base + i) * n + n];
            p[i] = beta * row.iter().zip(&v).fold(T::zero(), |s, (&bij, &vj)| s + bij * vj);
        }
        let kfac = beta / T::lit(2.0) * v.iter().zip(&p[..m]).fold(T::zero(), |s, (&vi, &pi)| s + vi * pi);
        for i in 0..m {
            w[i] = p[i] - kfac * v[i];
        }
        for i in 0..m {
            let (vi, wi) = (v[i], w[i]);
            let row = &mut a[(base + i) * n + base..(base + i) * n + n];
            for (j, bij) in row.iter_mut().enumerate() {
                *bij = *bij - vi * w[j] - wi * v[j];
            }
        }
        reflectors.push(Some((v, beta)));
    }
    if n >= 2 {
        diag[n - 2] = a[(n - 2) * n + n - 2];
        diag[n - 1] = a[(n - 1) * n + n - 1];
        off[n - 2] = a[(n - 1) * n + n - 2];
    } else if n == 1 {
        diag[0] = a[0];
    }
    (SymmetricTridiagonal::new(diag, off), Reflectors { reflectors })
}

/// Lowest eigenvalue and unit eigenvector, plus the distance to the next eigenvalue.
#[derive(Clone, Debug, PartialEq)]
pub struct SmallestEigenpair<T> {
    pub value: T,
    pub vector: Vec<T>,
    /// `λ₂ - λ₁`; infinite for a 1 × 1 problem.
    pub gap: T,
    /// Bisection or solver iterations spent.
    pub iterations: usize,
}

/// Smallest eigenpair of a row-major symmetric matrix.
pub fn smallest_eigenpair<T: Real>(matrix: Vec<T>, n: usize) -> SmallestEigenpair<T> {
    let (tri, refl) = tridiagonalize(matrix, n);
    let mut pair = smallest_eigenpair_tridiagonal(&tri);
    refl.apply(&mut pair.vector);
    normalize(&mut pair.vector);
    pair
}

pub fn smallest_eigenpair_tridiagonal<T: Real>(tri: &SymmetricTridiagonal<T>) -> SmallestEigenpair<T> {
    let value = tri.eigenvalue(0);
    let gap = if tri.dim() > 1 {
        tri.eigenvalue(1) - value
    } else {
        T::infinity()
    };
    let vector = tri.eigenvector(value);
    SmallestEigenpair {
        value,
        vector,
        gap,
        iterations: 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(n: usize, seed: u64) -> Vec<f64> {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let x = next();
                m[i * n + j] = x;
                m[j * n + i] = x;
            }
        }
        m
    }

    #[test]
    fn matches_nalgebra() {
        for (n, seed) in [(1usize, 1u64), (2, 2), (3, 3), (10, 4), (57, 5)] {
            let m = sym(n, seed);
            let pair = smallest_eigenpair(m.clone(), n);
            let na = nalgebra::DMatrix::from_row_slice(n, n, &m);
            let eig = na.symmetric_eigen();
            let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!((pair.value - min).abs() < 1e-12, "n={n}");
            let mut res = 0.0;
            for i in 0..n {
                let yi: f64 = (0..n).map(|j| m[i * n + j] * pair.vector[j]).sum();
                res += (yi - pair.value * pair.vector[i]).powi(2);
            }
            assert!(res.sqrt() < 1e-12, "n={n} residual {}", res.sqrt());
        }
    }

    #[test]
    fn already_tridiagonal_input() {
        let n = 5;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = 2.0;
            if i + 1 < n {
                m[i * n + i + 1] = -1.0;
                m[(i + 1) * n + i] = -1.0;
            }
        }
        let pair = smallest_eigenpair(m, n);
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / 6.0).cos();
        assert!((pair.value - exact).abs() < 1e-14);
    }
}
