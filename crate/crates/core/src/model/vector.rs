//! Complex signal vectors.

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// Finite complex vector of dimension at least one.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector<T> {
    entries: Vec<Cplx<T>>,
}

impl<T: Real> ComplexVector<T> {
    /// Validating constructor: rejects empty vectors and non-finite entries.
    pub fn new(entries: Vec<Cplx<T>>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Dimension {
                context: "complex vector",
                expected: 1,
                actual: 0,
            });
        }
        for (index, z) in entries.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { index });
            }
        }
        Ok(ComplexVector { entries })
    }

    /// Internal constructor for values produced by the library itself.
    pub(crate) fn from_raw(entries: Vec<Cplx<T>>) -> Self {
        debug_assert!(!entries.is_empty());
        ComplexVector { entries }
    }

    /// Standard basis vector `e_i`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut entries = vec![Cplx::new(T::zero(), T::zero()); dim];
        entries[i] = Cplx::new(T::one(), T::zero());
        ComplexVector { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Cplx<T>] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Cplx<T>> {
        self.entries
    }

    /// Adjoint inner product `self^* other = Σ_j conj(self_j) other_j`.
    pub fn dot_adjoint(&self, other: &ComplexVector<T>) -> Cplx<T> {
        debug_assert_eq!(self.dim(), other.dim());
        let mut acc = Cplx::new(T::zero(), T::zero());
        for (a, b) in self.entries.iter().zip(other.entries.iter()) {
            acc += a.conj() * *b;
        }
        acc
    }

    pub fn norm_sqr(&self) -> T {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    /// Returns a unit-norm copy, or `ZeroVector` for the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == T::zero() {
            return Err(Error::ZeroVector);
        }
        let inv = T::one() / n;
        Ok(ComplexVector {
            entries: self.entries.iter().map(|z| *z * inv).collect(),
        })
    }

    /// Multiplies every entry by `phase` (intended for unit-modulus factors).
    pub fn rotated(&self, phase: Cplx<T>) -> Self {
        ComplexVector {
            entries: self.entries.iter().map(|z| *z * phase).collect(),
        }
    }

    /// Entrywise conjugate.
    pub fn conjugated(&self) -> Self {
        ComplexVector {
            entries: self.entries.iter().map(|z| z.conj()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(ComplexVector::<f64>::new(vec![]).is_err());
        let bad = vec![Cplx::new(f64::NAN, 0.0)];
        assert!(matches!(
            ComplexVector::new(bad),
            Err(Error::NonFinite { index: 0 })
        ));
        let inf = vec![Cplx::new(0.0, f64::INFINITY)];
        assert!(ComplexVector::new(inf).is_err());
    }

    #[test]
    fn dot_adjoint_conjugates_left_argument() {
        let x = ComplexVector::new(vec![Cplx::new(0.0, 1.0)]).unwrap();
        let y = ComplexVector::new(vec![Cplx::new(1.0, 0.0)]).unwrap();
        // (i)^* * 1 = -i
        let d = x.dot_adjoint(&y);
        assert!((d - Cplx::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn normalization_and_zero_vector() {
        let x = ComplexVector::<f64>::new(vec![Cplx::new(3.0, 0.0), Cplx::new(0.0, 4.0)]).unwrap();
        let u = x.normalized().unwrap();
        assert!((u.norm() - 1.0).abs() < 1e-15);
        let z = ComplexVector::new(vec![Cplx::new(0.0, 0.0)]).unwrap();
        assert!(matches!(z.normalized(), Err(Error::ZeroVector)));
    }
}
