//! Source ensembles and their mixing matrix.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::model::vector::ComplexVector;
use crate::scalar::{Cplx, Real};
use crate::seeding::stable_id;

/// Default minimum pairwise gap between weights.
pub const DEFAULT_WEIGHT_GAP: f64 = 1e-6;

/// Tolerances used when constructing or validating an ensemble.
#[derive(Debug, Clone, Copy)]
pub struct EnsembleOptions<T> {
    /// Minimum |w_j - w_k| between any two weights.
    pub min_weight_gap: T,
    /// Allowed deviation from unit norm and from pairwise orthogonality.
    pub orthonormality_tol: T,
}

impl<T: Real> Default for EnsembleOptions<T> {
    fn default() -> Self {
        EnsembleOptions {
            min_weight_gap: T::from_f64_lossy(DEFAULT_WEIGHT_GAP),
            orthonormality_tol: T::from_f64_lossy(1e-10),
        }
    }
}

/// `K` orthonormal complex signals with strictly positive, pairwise distinct
/// intensity weights.
#[derive(Debug, Clone)]
pub struct SourceEnsemble<T> {
    signals: Vec<ComplexVector<T>>,
    weights: Vec<T>,
    d: usize,
    normalized: bool,
}

impl<T: Real> SourceEnsemble<T> {
    /// Validating constructor from explicit parts.
    pub fn from_parts(
        signals: Vec<ComplexVector<T>>,
        weights: Vec<T>,
        normalized: bool,
    ) -> Result<Self> {
        Self::from_parts_with(signals, weights, normalized, &EnsembleOptions::default())
    }

    pub fn from_parts_with(
        signals: Vec<ComplexVector<T>>,
        weights: Vec<T>,
        normalized: bool,
        opts: &EnsembleOptions<T>,
    ) -> Result<Self> {
        if signals.is_empty() || signals.len() != weights.len() {
            return Err(Error::Dimension {
                context: "ensemble signals vs weights",
                expected: weights.len(),
                actual: signals.len(),
            });
        }
        let d = signals[0].dim();
        if signals.len() > d {
            return Err(Error::Dimension {
                context: "ensemble source count exceeds dimension",
                expected: d,
                actual: signals.len(),
            });
        }
        for s in &signals {
            if s.dim() != d {
                return Err(Error::Dimension {
                    context: "ensemble signal dimension",
                    expected: d,
                    actual: s.dim(),
                });
            }
        }
        validate_weights(&weights, opts.min_weight_gap)?;
        if normalized {
            let sum: T = weights.iter().cloned().sum();
            if (sum - T::one()).abs() > T::from_f64_lossy(1e-10) {
                return Err(Error::Config(format!(
                    "normalized ensemble weights must sum to 1, got {}",
                    sum.to_f64_lossy()
                )));
            }
        }
        let ens = SourceEnsemble {
            signals,
            weights,
            d,
            normalized,
        };
        ens.check_orthonormal(opts.orthonormality_tol)?;
        Ok(ens)
    }

    pub fn signals(&self) -> &[ComplexVector<T>] {
        &self.signals
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.signals.len()
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }

    pub fn weight_sum(&self) -> T {
        self.weights.iter().cloned().sum()
    }

    /// Content identifier derived from signal data and weights.
    pub fn id(&self) -> u64 {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&(self.d as u64).to_le_bytes());
        for w in &self.weights {
            bytes.extend_from_slice(&w.to_f64_lossy().to_le_bytes());
        }
        for s in &self.signals {
            for z in s.entries() {
                bytes.extend_from_slice(&z.re.to_f64_lossy().to_le_bytes());
                bytes.extend_from_slice(&z.im.to_f64_lossy().to_le_bytes());
            }
        }
        stable_id(&bytes)
    }

    /// Gram-matrix check: `|<x_j, x_k>| <= tol` off-diagonal, norms within
    /// `tol` of 1.
    fn check_orthonormal(&self, tol: T) -> Result<()> {
        for (j, sj) in self.signals.iter().enumerate() {
            let n = sj.norm();
            if (n - T::one()).abs() > tol {
                return Err(Error::Config(format!(
                    "signal {j} has norm {} (unit norm required)",
                    n.to_f64_lossy()
                )));
            }
            for (k, sk) in self.signals.iter().enumerate().skip(j + 1) {
                let overlap = sj.dot_adjoint(sk).norm();
                if overlap > tol {
                    return Err(Error::Config(format!(
                        "signals {j} and {k} overlap by {} (orthogonality required)",
                        overlap.to_f64_lossy()
                    )));
                }
            }
        }
        Ok(())
    }
}

fn validate_weights<T: Real>(weights: &[T], min_gap: T) -> Result<()> {
    for (index, &w) in weights.iter().enumerate() {
        if !(w > T::zero()) || !w.is_finite() {
            return Err(Error::WeightNotPositive {
                index,
                value: w.to_f64_lossy(),
            });
        }
    }
    for i in 0..weights.len() {
        for j in (i + 1)..weights.len() {
            let gap = (weights[i] - weights[j]).abs();
            if gap < min_gap {
                return Err(Error::WeightDegenerate {
                    i,
                    j,
                    gap: gap.to_f64_lossy(),
                    min_gap: min_gap.to_f64_lossy(),
                });
            }
        }
    }
    Ok(())
}

/// Draws `K` random orthonormal signals in dimension `d` and pairs them with
/// the given weights.
///
/// Signals start as i.i.d. complex-Gaussian vectors (one independent stream
/// per signal) and are orthonormalized by modified Gram-Schmidt with one
/// re-orthogonalization pass. With `normalized` set, weights are rescaled to
/// sum to one. Deterministic in `seed`.
pub fn make_ensemble<T: Real>(
    d: usize,
    weights: &[T],
    seed: u64,
    normalized: bool,
) -> Result<SourceEnsemble<T>> {
    make_ensemble_with(d, weights, seed, normalized, &EnsembleOptions::default())
}

pub fn make_ensemble_with<T: Real>(
    d: usize,
    weights: &[T],
    seed: u64,
    normalized: bool,
    opts: &EnsembleOptions<T>,
) -> Result<SourceEnsemble<T>> {
    let k = weights.len();
    if k == 0 || d == 0 {
        return Err(Error::Dimension {
            context: "ensemble",
            expected: 1,
            actual: 0,
        });
    }
    if k > d {
        return Err(Error::Dimension {
            context: "ensemble source count exceeds dimension",
            expected: d,
            actual: k,
        });
    }

    let mut weights: Vec<T> = weights.to_vec();
    if normalized {
        let sum: T = weights.iter().cloned().sum();
        if !(sum > T::zero()) {
            return Err(Error::WeightNotPositive {
                index: 0,
                value: sum.to_f64_lossy(),
            });
        }
        for w in weights.iter_mut() {
            *w = *w / sum;
        }
    }
    validate_weights(&weights, opts.min_weight_gap)?;

    // One Gaussian draw per signal from its own stream.
    let mut raw: Vec<Vec<Cplx<T>>> = Vec::with_capacity(k);
    for s in 0..k {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(s as u64);
        let v: Vec<Cplx<T>> = (0..d)
            .map(|_| Cplx::new(T::standard_normal(&mut rng), T::standard_normal(&mut rng)))
            .collect();
        raw.push(v);
    }

    // Modified Gram-Schmidt, two passes.
    let mut signals: Vec<ComplexVector<T>> = Vec::with_capacity(k);
    for v in raw.into_iter() {
        let mut v = v;
        for _ in 0..2 {
            for s in &signals {
                let coef = s.dot_adjoint(&ComplexVector::from_raw(v.clone()));
                for (vi, si) in v.iter_mut().zip(s.entries()) {
                    *vi -= *si * coef;
                }
            }
        }
        let vec = ComplexVector::from_raw(v).normalized()?;
        signals.push(vec);
    }

    SourceEnsemble::from_parts_with(signals, weights, normalized, opts)
}

/// Hermitian PSD mixing matrix `M = Σ_k w_k x_k x_k^*`.
#[derive(Debug, Clone)]
pub struct MixingMatrix<T> {
    matrix: CMatrix<T>,
}

impl<T: Real> MixingMatrix<T> {
    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn trace(&self) -> T {
        self.matrix.trace_real()
    }

    /// Wraps an explicitly built matrix after a Hermitian check.
    pub fn from_matrix(matrix: CMatrix<T>) -> Result<Self> {
        matrix.require_hermitian(T::from_f64_lossy(1e-12))?;
        Ok(MixingMatrix { matrix })
    }
}

/// Rank-`K` mixing matrix of an ensemble; its nonzero eigenvalues are the
/// weights and its eigenvectors the signals.
pub fn mixing_matrix<T: Real>(ensemble: &SourceEnsemble<T>) -> MixingMatrix<T> {
    let mut m = CMatrix::zeros(ensemble.d());
    for (x, &w) in ensemble.signals().iter().zip(ensemble.weights()) {
        m.add_scaled_outer_upper(w, x.entries());
    }
    m.mirror_upper();
    MixingMatrix { matrix: m }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_source_is_unit_norm() {
        let e = make_ensemble::<f64>(4, &[1.0], 7, false).unwrap();
        assert_eq!(e.k(), 1);
        assert!((e.signals()[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_sources_in_large_dimension_are_orthonormal() {
        let w = [5.0 / 12.0, 4.0 / 12.0, 3.0 / 12.0];
        let e = make_ensemble::<f64>(1000, &w, 11, true).unwrap();
        assert_eq!(e.k(), 3);
        assert!((e.weight_sum() - 1.0).abs() < 1e-10);
        for j in 0..3 {
            assert!((e.signals()[j].norm() - 1.0).abs() < 1e-10);
            for k in (j + 1)..3 {
                assert!(e.signals()[j].dot_adjoint(&e.signals()[k]).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn equal_weights_are_rejected() {
        let err = make_ensemble::<f64>(4, &[0.5, 0.5], 1, false);
        assert!(matches!(err, Err(Error::WeightDegenerate { .. })));
    }

    #[test]
    fn more_sources_than_dimensions_is_rejected() {
        let err = make_ensemble::<f64>(2, &[0.5, 0.3, 0.2], 1, false);
        assert!(matches!(err, Err(Error::Dimension { .. })));
    }

    #[test]
    fn nonpositive_weights_are_rejected() {
        assert!(make_ensemble::<f64>(4, &[1.0, -0.5], 1, false).is_err());
        assert!(make_ensemble::<f64>(4, &[1.0, 0.0], 1, false).is_err());
    }

    #[test]
    fn determinism_in_seed() {
        let a = make_ensemble::<f64>(16, &[0.6, 0.4], 5, true).unwrap();
        let b = make_ensemble::<f64>(16, &[0.6, 0.4], 5, true).unwrap();
        for (x, y) in a.signals().iter().zip(b.signals()) {
            assert_eq!(x.entries(), y.entries());
        }
    }

    #[test]
    fn mixing_matrix_of_basis_signals_is_diagonal() {
        let signals = vec![ComplexVector::<f64>::basis(4, 0)];
        let e = SourceEnsemble::from_parts(signals, vec![1.0], false).unwrap();
        let m = mixing_matrix(&e);
        for p in 0..4 {
            for q in 0..4 {
                let want = if p == 0 && q == 0 { 1.0 } else { 0.0 };
                assert!((m.matrix()[(p, q)].re - want).abs() < 1e-15);
                assert!(m.matrix()[(p, q)].im.abs() < 1e-15);
            }
        }

        let signals = vec![
            ComplexVector::<f64>::basis(4, 0),
            ComplexVector::<f64>::basis(4, 1),
        ];
        let e = SourceEnsemble::from_parts(signals, vec![0.6, 0.4], true).unwrap();
        let m = mixing_matrix(&e);
        assert!((m.matrix()[(0, 0)].re - 0.6).abs() < 1e-15);
        assert!((m.matrix()[(1, 1)].re - 0.4).abs() < 1e-15);
        assert!((m.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mixing_matrix_maps_signals_to_scaled_signals() {
        let e = make_ensemble::<f64>(8, &[0.5, 0.3, 0.2], 3, true).unwrap();
        let m = mixing_matrix(&e);
        assert!((m.trace() - 1.0).abs() < 1e-8);
        let mut out = vec![Cplx::new(0.0, 0.0); 8];
        for (x, &w) in e.signals().iter().zip(e.weights()) {
            m.matrix().matvec(x.entries(), &mut out);
            for (o, xi) in out.iter().zip(x.entries()) {
                assert!((*o - *xi * w).norm() < 1e-8);
            }
        }
    }
}
