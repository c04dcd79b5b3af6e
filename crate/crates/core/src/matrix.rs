//! Dense complex matrix storage for Hermitian operators.
//!
//! Only the operations the mixing matrix, the weighted covariance matrix and
//! the eigensolver need: rank-one accumulation, quadratic forms, matrix-vector
//! products, and Hermitian bookkeeping. Storage is row-major and full (both
//! triangles), which keeps matrix-vector products cache-friendly.

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    dim: usize,
    data: Vec<Cplx<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        CMatrix {
            dim,
            data: vec![Cplx::new(T::zero(), T::zero()); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Cplx::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = Cplx::new(v, T::zero());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, r: usize) -> &[Cplx<T>] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [Cplx<T>] {
        &mut self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn data(&self) -> &[Cplx<T>] {
        &self.data
    }

    /// Adds `scale * v v^*` restricted to the upper triangle (incl. diagonal).
    ///
    /// The lower triangle is left untouched; call [`mirror_upper`] once after
    /// all accumulation to restore an exactly Hermitian matrix.
    pub fn add_scaled_outer_upper(&mut self, scale: T, v: &[Cplx<T>]) {
        debug_assert_eq!(v.len(), self.dim);
        let d = self.dim;
        for p in 0..d {
            let vp = v[p] * scale;
            let row = &mut self.data[p * d..(p + 1) * d];
            for q in p..d {
                row[q] += vp * v[q].conj();
            }
        }
    }

    /// Copies the conjugate of the upper triangle into the lower triangle.
    pub fn mirror_upper(&mut self) {
        let d = self.dim;
        for p in 0..d {
            for q in (p + 1)..d {
                self.data[q * d + p] = self.data[p * d + q].conj();
            }
            // Hermitian diagonal is real.
            self.data[p * d + p].im = T::zero();
        }
    }

    /// Replaces the matrix by `(A + A^*) / 2`.
    pub fn symmetrize(&mut self) {
        let d = self.dim;
        let half = T::from_f64_lossy(0.5);
        for p in 0..d {
            for q in (p + 1)..d {
                let a = self.data[p * d + q];
                let b = self.data[q * d + p].conj();
                let avg = (a + b) * half;
                self.data[p * d + q] = avg;
                self.data[q * d + p] = avg.conj();
            }
            self.data[p * d + p].im = T::zero();
        }
    }

    /// Entrywise addition of another matrix of the same dimension.
    pub fn add_assign(&mut self, other: &CMatrix<T>) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += *b;
        }
    }

    pub fn scale(&mut self, s: T) {
        for a in self.data.iter_mut() {
            *a = *a * s;
        }
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[Cplx<T>], y: &mut [Cplx<T>]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (r, out) in y.iter_mut().enumerate() {
            let row = self.row(r);
            let mut acc = Cplx::new(T::zero(), T::zero());
            for (a, b) in row.iter().zip(x.iter()) {
                acc += *a * *b;
            }
            *out = acc;
        }
    }

    /// Quadratic form `a^* A a` (complex; Hermitian inputs give a real result
    /// up to rounding).
    pub fn quadratic_form(&self, a: &[Cplx<T>]) -> Cplx<T> {
        debug_assert_eq!(a.len(), self.dim);
        let mut acc = Cplx::new(T::zero(), T::zero());
        for (r, ar) in a.iter().enumerate() {
            let row = self.row(r);
            let mut inner = Cplx::new(T::zero(), T::zero());
            for (m, aq) in row.iter().zip(a.iter()) {
                inner += *m * *aq;
            }
            acc += ar.conj() * inner;
        }
        acc
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    pub fn max_abs_entry(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    /// Real part of the trace.
    pub fn trace_real(&self) -> T {
        (0..self.dim)
            .map(|i| self.data[i * self.dim + i].re)
            .fold(T::zero(), |a, b| a + b)
    }

    /// Max-norm of `A - A^*`, the Hermitian defect.
    pub fn hermitian_defect(&self) -> T {
        let d = self.dim;
        let mut worst = T::zero();
        for p in 0..d {
            for q in p..d {
                let delta = self.data[p * d + q] - self.data[q * d + p].conj();
                let mag = delta.norm();
                if mag > worst {
                    worst = mag;
                }
            }
        }
        worst
    }

    /// Errors unless the Hermitian defect is within `tol`.
    pub fn require_hermitian(&self, tol: T) -> Result<()> {
        let defect = self.hermitian_defect();
        if defect > tol {
            return Err(Error::NotHermitian {
                defect: defect.to_f64_lossy(),
                tol: tol.to_f64_lossy(),
            });
        }
        Ok(())
    }
}

impl<T> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = Cplx<T>;
    fn index(&self, (r, c): (usize, usize)) -> &Cplx<T> {
        &self.data[r * self.dim + c]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Cplx<T> {
        &mut self.data[r * self.dim + c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Cplx<f64> {
        Cplx::new(re, im)
    }

    #[test]
    fn outer_accumulation_matches_direct_product() {
        let v = [c(1.0, 2.0), c(-0.5, 0.25), c(0.0, -1.0)];
        let mut m = CMatrix::<f64>::zeros(3);
        m.add_scaled_outer_upper(2.0, &v);
        m.mirror_upper();
        for p in 0..3 {
            for q in 0..3 {
                let want = v[p] * v[q].conj() * 2.0;
                let got = m[(p, q)];
                assert!((want - got).norm() < 1e-15, "entry ({p},{q})");
            }
        }
        assert!(m.hermitian_defect() == 0.0);
    }

    #[test]
    fn quadratic_form_on_identity_is_norm_squared() {
        let m = CMatrix::<f64>::identity(3);
        let a = [c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.0)];
        let q = m.quadratic_form(&a);
        assert!((q.re - 1.0).abs() < 1e-15);
        assert!(q.im.abs() < 1e-15);
    }

    #[test]
    fn symmetrize_halves_defect() {
        let mut m = CMatrix::<f64>::zeros(2);
        m[(0, 1)] = c(1.0, 1.0);
        m[(1, 0)] = c(0.0, 0.0);
        m.symmetrize();
        assert!(m.hermitian_defect() < 1e-15);
        assert!((m[(0, 1)] - c(0.5, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn trace_and_frobenius() {
        let m = CMatrix::<f64>::from_diagonal(&[3.0, 4.0]);
        assert_eq!(m.trace_real(), 7.0);
        assert!((m.frobenius_norm() - 5.0).abs() < 1e-15);
    }
}
