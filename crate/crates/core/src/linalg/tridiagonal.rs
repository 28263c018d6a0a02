//! Symmetric tridiagonal eigenvalues by Sturm-sequence bisection and eigenvectors by
//! inverse iteration.

use crate::scalar::Real;

/// Symmetric tridiagonal matrix: `diag` of length `n`, `off` of length `n - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricTridiagonal<T> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
}

impl<T: Real> SymmetricTridiagonal<T> {
    pub fn new(diag: Vec<T>, off: Vec<T>) -> Self {
        assert!(!diag.is_empty(), "empty tridiagonal matrix");
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal length mismatch");
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (T, T) {
        let n = self.dim();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { T::zero() };
            let right = if i + 1 < n { self.off[i].abs() } else { T::zero() };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    fn scale(&self) -> T {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(T::min_positive_value())
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: T) -> usize {
        let pivmin = T::min_positive_value() * T::lit(1e4) * self.scale();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < T::zero() {
            count += 1;
        }
        for i in 1..self.dim() {
            let e = self.off[i - 1];
            q = self.diag[i] - x - e * e / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < T::zero() {
                count += 1;
            }
        }
        count
    }

    /// `k`-th smallest eigenvalue (0-based) to full working precision.
    pub fn eigenvalue(&self, k: usize) -> T {
        assert!(k < self.dim(), "eigenvalue index out of range");
        let (mut lo, mut hi) = self.gershgorin();
        let pad = self.scale() * T::epsilon() * T::lit(4.0);
        lo -= pad;
        hi += pad;
        let tol = T::lit(2.0) * T::epsilon();
        for _ in 0..2000 {
            let mid = lo + (hi - lo) / T::lit(2.0);
            if mid <= lo || mid >= hi {
                break;
            }
            if hi - lo <= tol * (lo.abs().max(hi.abs())) + T::min_positive_value() {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo + (hi - lo) / T::lit(2.0)
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Unit eigenvector for an (accurately known) eigenvalue, by inverse iteration.
    pub fn eigenvector(&self, eigenvalue: T) -> Vec<T> {
        let n = self.dim();
        if n == 1 {
            return vec![T::one()];
        }
        let lu = ShiftedLu::factor(self, eigenvalue);
        // Deterministic, generic start vector.
        let mut y: Vec<T> = (0..n)
            .map(|i| T::one() + T::lit(0.5) * T::from_usize((i * 7919) % 101).unwrap() / T::lit(101.0))
            .collect();
        normalize(&mut y);
        let target = T::lit(64.0) * T::epsilon() * self.scale() * T::from_usize(n).unwrap().sqrt();
        for _ in 0..8 {
            lu.solve(&mut y);
            normalize(&mut y);
            let r = self.matvec(&y);
            let res = r
                .iter()
                .zip(&y)
                .map(|(&ri, &yi)| (ri - eigenvalue * yi) * (ri - eigenvalue * yi))
                .fold(T::zero(), |a, b| a + b)
                .sqrt();
            if res <= target {
                break;
            }
        }
        y
    }
}

pub(crate) fn normalize<T: Real>(v: &mut [T]) {
    let norm = v.iter().map(|&x| x * x).fold(T::zero(), |a, b| a + b).sqrt();
    if norm > T::zero() {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

/// LU factorization with partial pivoting of `T - μI`.
struct ShiftedLu<T> {
    dl: Vec<T>,
    d: Vec<T>,
    du: Vec<T>,
    du2: Vec<T>,
    swapped: Vec<bool>,
}

impl<T: Real> ShiftedLu<T> {
    fn factor(t: &SymmetricTridiagonal<T>, mu: T) -> Self {
        let n = t.dim();
        let mut dl = t.off.clone();
        let mut d: Vec<T> = t.diag.iter().map(|&x| x - mu).collect();
        let mut du = t.off.clone();
        let mut du2 = vec![T::zero(); n.saturating_sub(2)];
        let mut swapped = vec![false; n - 1];
        let tiny = T::epsilon() * t.scale();
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == T::zero() {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == T::zero() {
            d[n - 1] = tiny;
        }
        Self { dl, d, du, du2, swapped }
    }

    fn solve(&self, b: &mut [T]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i] - self.dl[i] * b[i + 1];
                b[i] = b[i + 1];
                b[i + 1] = temp;
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}
