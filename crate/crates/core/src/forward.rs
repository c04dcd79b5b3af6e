//! Forward measurement model.
//!
//! An intensity measurement mixes the individual source intensities:
//! `y_i = Σ_k w_k |a_i^* x_k|^2`. The same value can be written as the
//! quadratic form `y_i = a_i^* M a_i` of the mixing matrix; the two routes
//! agree entrywise and cross-check each other.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    ComplexVector, MeasurementSet, MixingMatrix, NoiseConfig, NoiseModel, SamplingMatrix,
    SourceEnsemble,
};
use crate::scalar::{Cplx, Real};

/// Mixed intensity of one sensing row: `Σ_k w_k |row^* x_k|^2`.
pub fn intensity<T: Real>(signals: &[ComplexVector<T>], weights: &[T], row: &[Cplx<T>]) -> T {
    debug_assert_eq!(signals.len(), weights.len());
    let mut y = T::zero();
    for (x, &w) in signals.iter().zip(weights) {
        let mut dot = Cplx::new(T::zero(), T::zero());
        for (a, xi) in row.iter().zip(x.entries()) {
            dot += a.conj() * *xi;
        }
        y += w * dot.norm_sqr();
    }
    y
}

/// Noise draw for measurement `i`; an independent stream per index keeps
/// measurement generation order-free.
fn noise_draw<T: Real>(noise: &NoiseConfig<T>, i: usize) -> T {
    match noise.model {
        NoiseModel::None => T::zero(),
        NoiseModel::AdditiveGaussian { sigma } => {
            if sigma == T::zero() {
                T::zero()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
                rng.set_stream(i as u64);
                T::standard_normal(&mut rng) * sigma
            }
        }
    }
}

/// Measures raw signals that need not form a validated ensemble.
///
/// Used directly by the focusing simulation, whose ground-truth vectors are
/// conjugated transmission rows and therefore only approximately orthogonal.
pub fn measure_signals<T: Real>(
    signals: &[ComplexVector<T>],
    weights: &[T],
    a: &SamplingMatrix<T>,
    noise: &NoiseConfig<T>,
    ensemble_id: u64,
) -> Result<MeasurementSet<T>> {
    if signals.is_empty() || signals.len() != weights.len() {
        return Err(Error::Dimension {
            context: "measure signals vs weights",
            expected: weights.len(),
            actual: signals.len(),
        });
    }
    for x in signals {
        if x.dim() != a.d() {
            return Err(Error::Dimension {
                context: "measure signal dimension",
                expected: a.d(),
                actual: x.dim(),
            });
        }
    }

    let noisy = !noise.is_none();
    let values: Vec<T> = (0..a.n())
        .into_par_iter()
        .map(|i| intensity(signals, weights, a.row(i)) + noise_draw(noise, i))
        .collect();

    MeasurementSet::new(values, noisy, *noise, ensemble_id, a.id())
}

/// Measures an ensemble: `y_i = Σ_k w_k |a_i^* x_k|^2` plus optional noise.
pub fn measure<T: Real>(
    ensemble: &SourceEnsemble<T>,
    a: &SamplingMatrix<T>,
    noise: &NoiseConfig<T>,
) -> Result<MeasurementSet<T>> {
    if ensemble.d() != a.d() {
        return Err(Error::Dimension {
            context: "measure ensemble vs sampling matrix",
            expected: a.d(),
            actual: ensemble.d(),
        });
    }
    measure_signals(
        ensemble.signals(),
        ensemble.weights(),
        a,
        noise,
        ensemble.id(),
    )
}

/// Relative threshold on the imaginary residue of the quadratic form.
const QUADRATIC_IMAG_TOL: f64 = 1e-10;

/// Measures through the mixing matrix: `y_i = a_i^* M a_i`.
///
/// The quadratic form of a Hermitian matrix is real; the imaginary residue is
/// checked against `1e-10` (relative to the magnitude of the form) and then
/// discarded, so a silently corrupted matrix fails loudly instead.
pub fn measure_via_m<T: Real>(m: &MixingMatrix<T>, a: &SamplingMatrix<T>) -> Result<MeasurementSet<T>> {
    if m.dim() != a.d() {
        return Err(Error::Dimension {
            context: "measure mixing matrix vs sampling matrix",
            expected: a.d(),
            actual: m.dim(),
        });
    }
    let tol = T::from_f64_lossy(QUADRATIC_IMAG_TOL);
    let values: Vec<T> = (0..a.n())
        .into_par_iter()
        .map(|i| {
            let q = m.matrix().quadratic_form(a.row(i));
            let scale = T::one() + q.re.abs();
            if q.im.abs() > tol * scale {
                Err(Error::NotHermitian {
                    defect: q.im.abs().to_f64_lossy(),
                    tol: (tol * scale).to_f64_lossy(),
                })
            } else {
                Ok(q.re)
            }
        })
        .collect::<Result<Vec<T>>>()?;

    // The quadratic form of a PSD matrix can round to a tiny negative number;
    // clamp those to zero so the noiseless non-negativity invariant holds.
    let values = values
        .into_iter()
        .map(|v| if v < T::zero() { T::zero() } else { v })
        .collect();

    MeasurementSet::new(values, false, NoiseConfig::none(), 0, a.id())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::CMatrix;
    use crate::model::{make_ensemble, make_sampling_matrix, MatrixKind};

    fn c(re: f64, im: f64) -> Cplx<f64> {
        Cplx::new(re, im)
    }

    #[test]
    fn hand_computed_two_source_intensity() {
        // x1 = e1, x2 = e2, w = (0.6, 0.4), a = (1/sqrt2, i/sqrt2)
        let signals = vec![ComplexVector::basis(2, 0), ComplexVector::basis(2, 1)];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let row = [c(s, 0.0), c(0.0, s)];
        let y = intensity(&signals, &[0.6, 0.4], &row);
        assert!((y - 0.5).abs() < 1e-15);
    }

    #[test]
    fn aligned_single_source_gives_unit_intensity() {
        let signals = vec![ComplexVector::basis(3, 0)];
        let row = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let y = intensity(&signals, &[1.0], &row);
        assert!((y - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quadratic_form_route_matches_hand_example() {
        // M = diag(0.6, 0.4), a = (1/sqrt2, i/sqrt2) -> y = 0.5
        let m = CMatrix::from_diagonal(&[0.6, 0.4]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let q = m.quadratic_form(&[c(s, 0.0), c(0.0, s)]);
        assert!((q.re - 0.5).abs() < 1e-15);
        assert!(q.im.abs() < 1e-15);

        // M = I, any unit vector -> y = 1
        let m = CMatrix::<f64>::identity(3);
        let q = m.quadratic_form(&[c(0.0, 0.6), c(0.8, 0.0), c(0.0, 0.0)]);
        assert!((q.re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn signal_and_matrix_routes_agree() {
        let e = make_ensemble::<f64>(16, &[0.5, 0.3, 0.2], 21, true).unwrap();
        let a = make_sampling_matrix(MatrixKind::ComplexGaussian, 50, 16, 22).unwrap();
        let y1 = measure(&e, &a, &NoiseConfig::none()).unwrap();
        let m = crate::model::mixing_matrix(&e);
        let y2 = measure_via_m(&m, &a).unwrap();
        for (u, v) in y1.values().iter().zip(y2.values()) {
            assert!((u - v).abs() <= 1e-12, "{u} vs {v}");
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let e = make_ensemble::<f64>(8, &[1.0], 1, false).unwrap();
        let a = make_sampling_matrix(MatrixKind::ComplexGaussian, 4, 9, 1).unwrap();
        assert!(matches!(
            measure(&e, &a, &NoiseConfig::none()),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn noise_is_seeded_and_flagged() {
        let e = make_ensemble::<f64>(8, &[1.0], 1, false).unwrap();
        let a = make_sampling_matrix(MatrixKind::ComplexGaussian, 32, 8, 2).unwrap();
        let clean = measure(&e, &a, &NoiseConfig::none()).unwrap();
        let noise = NoiseConfig::additive_gaussian(0.5, 77).unwrap();
        let dirty = measure(&e, &a, &noise).unwrap();
        let dirty2 = measure(&e, &a, &noise).unwrap();
        assert!(!clean.noisy());
        assert!(dirty.noisy());
        assert_eq!(dirty.values(), dirty2.values());
        assert!(clean
            .values()
            .iter()
            .zip(dirty.values())
            .any(|(c, d)| c != d));
        // noiseless values are non-negative
        assert!(clean.values().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn gaussian_sample_mean_approaches_weight_sum() {
        // E|a^* x|^2 = 1 for unit x, so E y = sum of weights.
        let e = make_ensemble::<f64>(16, &[0.5, 0.3, 0.2], 5, true).unwrap();
        let a = make_sampling_matrix(MatrixKind::ComplexGaussian, 10_000, 16, 6).unwrap();
        let y = measure(&e, &a, &NoiseConfig::none()).unwrap();
        let n = y.n() as f64;
        let mean: f64 = y.values().iter().sum::<f64>() / n;
        let var: f64 = y.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        assert!(
            (mean - 1.0).abs() <= 3.0 * se,
            "mean {mean}, se {se}"
        );
    }
}
