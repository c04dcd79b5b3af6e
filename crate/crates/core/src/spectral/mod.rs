//! Weighted covariance matrix and spectral recovery.
//!
//! The weighted covariance matrix (WCM) of a measurement set is
//! `Y = (1/n) Σ_i y_i a_i a_i^*`. Sensing rows aligned with a source produce
//! larger intensities, so the WCM is biased towards every source: its leading
//! eigenvectors estimate the signals, ordered from the brightest source to
//! the weakest, while the remaining eigenvalues form a noise bulk.

mod eig;
mod spikes;

pub use eig::{hermitian_eig, hermitian_eigenvalues, EigOptions, Eigendecomposition};
pub use spikes::{
    count_spikes, decoupled_null_edge, edge_fluctuation_scale, SpikeContext, SpikeRule,
    DEFAULT_BULK_EDGE_C, DEFAULT_NULL_EDGE_OFFSET,
};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::model::{ComplexVector, MatrixKind, MeasurementSet, SamplingMatrix};
use crate::scalar::{Cplx, Real};
use crate::seeding::stable_id;

/// Maximum matrix dimension accepted by the accumulator; the dense matrix
/// needs `d^2` complex doubles, so absurd sizes fail fast.
pub const MAX_WCM_DIM: usize = 4096;

/// Fixed accumulation chunk: batch construction reduces per-chunk partial
/// sums in index order, which makes the result independent of thread count.
pub(crate) const WCM_CHUNK: usize = 512;

/// Adjacent spikes closer than this are flagged as degenerate: their
/// eigenvectors are an arbitrary rotation of the true pair.
pub const DEGENERATE_SPIKE_GAP: f64 = 1e-10;

/// Hermitian `d x d` weighted covariance with its provenance: the
/// intensities folded in, the sensing-row kind, and an experiment identifier
/// (both feed the spike-rule context).
#[derive(Debug, Clone)]
pub struct WeightedCovarianceMatrix<T> {
    matrix: CMatrix<T>,
    intensities: Vec<T>,
    kind: MatrixKind,
    provenance: u64,
}

impl<T: Real> WeightedCovarianceMatrix<T> {
    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn n_used(&self) -> usize {
        self.intensities.len()
    }

    pub fn intensities(&self) -> &[T] {
        &self.intensities
    }

    /// Aspect ratio `d / n`.
    pub fn gamma(&self) -> T {
        T::from_f64_lossy(self.dim() as f64) / T::from_f64_lossy(self.n_used() as f64)
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn spike_context(&self) -> SpikeContext<'_, T> {
        SpikeContext {
            kind: self.kind,
            intensities: &self.intensities,
            salt: self.provenance,
        }
    }

    pub fn with_kind(mut self, kind: MatrixKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_provenance(mut self, provenance: u64) -> Self {
        self.provenance = provenance;
        self
    }

    /// Wraps an explicit matrix (validated Hermitian within 1e-10 of its
    /// scale) with explicit provenance. Intended for tests and tools.
    pub fn from_parts(matrix: CMatrix<T>, intensities: Vec<T>) -> Result<Self> {
        if intensities.is_empty() {
            return Err(Error::Dimension {
                context: "weighted covariance",
                expected: 1,
                actual: 0,
            });
        }
        let scale = T::one().max(matrix.max_abs_entry());
        matrix.require_hermitian(T::from_f64_lossy(1e-10) * scale)?;
        let provenance = {
            let mut bytes = Vec::with_capacity(8 * intensities.len().min(512));
            for v in intensities.iter().take(512) {
                bytes.extend_from_slice(&v.to_f64_lossy().to_le_bytes());
            }
            stable_id(&bytes)
        };
        Ok(WeightedCovarianceMatrix {
            matrix,
            intensities,
            kind: MatrixKind::ComplexGaussian,
            provenance,
        })
    }
}

/// Streaming accumulator for the WCM.
///
/// `push` folds one measurement in; partial accumulators over disjoint index
/// ranges can be built independently and combined in index order with
/// `merge`, which is how the batch builder parallelizes. Accumulation works
/// on the upper triangle only; `finalize` mirrors it, which doubles as the
/// `(Y + Y^*)/2` symmetrization.
#[derive(Debug, Clone)]
pub struct WcmAccumulator<T> {
    sums: CMatrix<T>,
    intensities: Vec<T>,
}

impl<T: Real> WcmAccumulator<T> {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension {
                context: "weighted covariance",
                expected: 1,
                actual: 0,
            });
        }
        if d > MAX_WCM_DIM {
            return Err(Error::ResourceLimit {
                context: "weighted covariance dimension",
                requested: d,
                limit: MAX_WCM_DIM,
            });
        }
        Ok(WcmAccumulator {
            sums: CMatrix::zeros(d),
            intensities: Vec::new(),
        })
    }

    pub fn d(&self) -> usize {
        self.sums.dim()
    }

    pub fn n_accumulated(&self) -> usize {
        self.intensities.len()
    }

    /// Folds in one measurement: `sums += y · row row^*` (upper triangle).
    pub fn push(&mut self, y: T, row: &[Cplx<T>]) {
        debug_assert_eq!(row.len(), self.d());
        self.sums.add_scaled_outer_upper(y, row);
        self.intensities.push(y);
    }

    /// Appends another accumulator built over the measurements that follow
    /// this one's.
    pub fn merge(&mut self, later: &WcmAccumulator<T>) {
        debug_assert_eq!(self.d(), later.d());
        self.sums.add_assign(&later.sums);
        self.intensities.extend_from_slice(&later.intensities);
    }

    /// Normalizes by the number of measurements and restores the exactly
    /// Hermitian full matrix.
    pub fn finalize(mut self) -> Result<WeightedCovarianceMatrix<T>> {
        let n = self.intensities.len();
        if n == 0 {
            return Err(Error::Dimension {
                context: "weighted covariance measurements",
                expected: 1,
                actual: 0,
            });
        }
        self.sums.scale(T::one() / T::from_f64_lossy(n as f64));
        self.sums.mirror_upper();
        let provenance = {
            let mut bytes = Vec::with_capacity(8 * self.intensities.len().min(512));
            for v in self.intensities.iter().take(512) {
                bytes.extend_from_slice(&v.to_f64_lossy().to_le_bytes());
            }
            stable_id(&bytes)
        };
        Ok(WeightedCovarianceMatrix {
            matrix: self.sums,
            intensities: self.intensities,
            kind: MatrixKind::ComplexGaussian,
            provenance,
        })
    }
}

/// Batch WCM construction: `Y = (1/n) Σ_i y_i a_i a_i^*`, symmetrized.
///
/// Internally a parallel reduction over fixed 512-row chunks combined in
/// index order; the result is identical to sequential streaming accumulation
/// up to that reassociation (within 1e-12 relative) and bit-identical across
/// thread counts.
pub fn build_wcm<T: Real>(
    y: &MeasurementSet<T>,
    a: &SamplingMatrix<T>,
) -> Result<WeightedCovarianceMatrix<T>> {
    if y.n() != a.n() {
        return Err(Error::Dimension {
            context: "wcm measurements vs sampling rows",
            expected: a.n(),
            actual: y.n(),
        });
    }
    Ok(build_wcm_from_rows(a.d(), y.values(), |i| a.row(i))?
        .with_kind(a.kind())
        .with_provenance(a.id()))
}

/// Chunk-parallel WCM build over any row source (dense matrix or streamed
/// regeneration).
pub(crate) fn build_wcm_from_rows<'a, T, F>(
    d: usize,
    values: &[T],
    row: F,
) -> Result<WeightedCovarianceMatrix<T>>
where
    T: Real,
    F: Fn(usize) -> &'a [Cplx<T>] + Sync,
    T: 'a,
{
    let n = values.len();
    let chunk_count = n.div_ceil(WCM_CHUNK);
    let partials: Vec<Result<WcmAccumulator<T>>> = (0..chunk_count)
        .into_par_iter()
        .map(|ci| {
            let lo = ci * WCM_CHUNK;
            let hi = ((ci + 1) * WCM_CHUNK).min(n);
            let mut acc = WcmAccumulator::new(d)?;
            for i in lo..hi {
                acc.push(values[i], row(i));
            }
            Ok(acc)
        })
        .collect();

    let mut total = WcmAccumulator::new(d)?;
    for partial in partials {
        total.merge(&partial?);
    }
    total.finalize()
}

/// Spectral analysis result: full (or truncated) eigensystem plus the spike
/// census and the recovered signal estimates.
#[derive(Debug, Clone)]
pub struct SpectralResult<T> {
    /// Eigenvalues, descending.
    pub eigenvalues: Vec<T>,
    /// Matching orthonormal eigenvectors.
    pub eigenvectors: Vec<ComplexVector<T>>,
    /// Per-pair residuals `‖Y v - λ v‖`.
    pub residuals: Vec<T>,
    /// Detected spike count; `None` when only eigenpairs were requested.
    pub spike_count: Option<usize>,
    /// Unit-norm signal estimates, brightest source first.
    pub estimates: Vec<ComplexVector<T>>,
    /// Set when two adjacent spike eigenvalues are numerically degenerate,
    /// making their eigenvectors an arbitrary rotation of the true pair.
    pub degenerate_spikes: bool,
    /// Measurements behind the matrix.
    pub n_used: usize,
}

impl<T: Real> SpectralResult<T> {
    /// JSON summary with the spike census and the top of the spectrum.
    pub fn json_summary(&self) -> serde_json::Value {
        let top = 16.min(self.eigenvalues.len());
        serde_json::json!({
            "dim": self.eigenvalues.len(),
            "n_used": self.n_used,
            "spike_count": self.spike_count,
            "degenerate_spikes": self.degenerate_spikes,
            "top_eigenvalues": self.eigenvalues[..top]
                .iter().map(|v| v.to_f64_lossy()).collect::<Vec<_>>(),
            "top_residuals": self.residuals[..top.min(self.residuals.len())]
                .iter().map(|v| v.to_f64_lossy()).collect::<Vec<_>>(),
            "estimates": self.estimates.len(),
        })
    }
}

/// Eigenpairs of the WCM: all of them, or the top `k`.
///
/// The spike census and estimates are left unset; see [`recover`].
pub fn eig_hermitian<T: Real>(
    y: &WeightedCovarianceMatrix<T>,
    k: Option<usize>,
) -> Result<SpectralResult<T>> {
    let d = y.dim();
    let k = k.unwrap_or(d);
    if k == 0 || k > d {
        return Err(Error::Dimension {
            context: "eigenpair count",
            expected: d,
            actual: k,
        });
    }
    let mut eig = hermitian_eig(y.matrix(), &EigOptions::default())?;
    eig.values.truncate(k);
    eig.vectors.truncate(k);
    eig.residuals.truncate(k);
    Ok(SpectralResult {
        eigenvalues: eig.values,
        eigenvectors: eig.vectors,
        residuals: eig.residuals,
        spike_count: None,
        estimates: Vec::new(),
        degenerate_spikes: false,
        n_used: y.n_used(),
    })
}

/// Full recovery: eigendecompose, count spikes (unless `k_hint` overrides),
/// and return the top eigenvectors as unit-norm signal estimates ordered by
/// eigenvalue, brightest source first.
pub fn recover<T: Real>(
    y: &WeightedCovarianceMatrix<T>,
    k_hint: Option<usize>,
) -> Result<SpectralResult<T>> {
    recover_with_rule(y, k_hint, &SpikeRule::default())
}

pub fn recover_with_rule<T: Real>(
    y: &WeightedCovarianceMatrix<T>,
    k_hint: Option<usize>,
    rule: &SpikeRule<T>,
) -> Result<SpectralResult<T>> {
    let mut result = eig_hermitian(y, None)?;
    let detected = match k_hint {
        Some(k) => k.min(y.dim()),
        None => count_spikes(&result.eigenvalues, rule, Some(&y.spike_context())),
    };
    result.spike_count = Some(detected);

    let gap_tol = T::from_f64_lossy(DEGENERATE_SPIKE_GAP);
    result.degenerate_spikes = result.eigenvalues[..detected]
        .windows(2)
        .any(|w| (w[0] - w[1]).abs() < gap_tol);

    result.estimates = result.eigenvectors[..detected]
        .iter()
        .map(|v| v.normalized())
        .collect::<Result<Vec<_>>>()?;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::measure;
    use crate::model::{
        make_ensemble, make_sampling_matrix, mixing_matrix, MatrixKind, NoiseConfig,
    };
    use crate::seeding::derive_seed;

    fn c(re: f64, im: f64) -> Cplx<f64> {
        Cplx::new(re, im)
    }

    #[test]
    fn single_rank_one_term() {
        let mut acc = WcmAccumulator::<f64>::new(3).unwrap();
        acc.push(2.5, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let y = acc.finalize().unwrap();
        assert_eq!(y.n_used(), 1);
        for p in 0..3 {
            for q in 0..3 {
                let want = if (p, q) == (0, 0) { 2.5 } else { 0.0 };
                assert!((y.matrix()[(p, q)] - c(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn streaming_equals_batch_within_tolerance() {
        let e = make_ensemble::<f64>(24, &[0.6, 0.4], 3, true).unwrap();
        let a = make_sampling_matrix(MatrixKind::ComplexGaussian, 1200, 24, 4).unwrap();
        let y = measure(&e, &a, &NoiseConfig::none()).unwrap();

        let batch = build_wcm(&y, &a).unwrap();
        let mut acc = WcmAccumulator::new(24).unwrap();
        for (i, &v) in y.values().iter().enumerate() {
            acc.push(v, a.row(i));
        }
        let streamed = acc.finalize().unwrap();

        let mut diff2 = 0.0;
        for (x, z) in batch.matrix().data().iter().zip(streamed.matrix().data()) {
            diff2 += (*x - *z).norm_sqr();
        }
        let rel = diff2.sqrt() / batch.matrix().frobenius_norm();
        assert!(rel <= 1e-12, "rel {rel}");
        assert_eq!(batch.intensities(), streamed.intensities());
    }

    #[test]
    fn unit_intensities_converge_to_identity() {
        // y ≡ 1 is the plain covariance of the sensing rows.
        let d = 32;
        let n = 100_000;
        let a = make_sampling_matrix::<f64>(MatrixKind::ComplexGaussian, n, d, 8).unwrap();
        let values = vec![1.0; n];
        let y = build_wcm_from_rows(d, &values, |i| a.row(i)).unwrap();
        let mut diff2 = 0.0;
        for p in 0..d {
            for q in 0..d {
                let want = if p == q { 1.0 } else { 0.0 };
                diff2 += (y.matrix()[(p, q)] - c(want, 0.0)).norm_sqr();
            }
        }
        let rel = diff2.sqrt() / (d as f64).sqrt();
        assert!(rel <= 0.05, "rel {rel}");
    }

    #[test]
    fn wcm_is_psd_for_noiseless_measurements() {
        let e = make_ensemble::<f64>(16, &[0.7, 0.3], 5, true).unwrap();
        let a = make_sampling_matrix(MatrixKind::ComplexGaussian, 64, 16, 6).unwrap();
        let y = measure(&e, &a, &NoiseConfig::none()).unwrap();
        let wcm = build_wcm(&y, &a).unwrap();
        let eig = eig_hermitian(&wcm, None).unwrap();
        assert!(*eig.eigenvalues.last().unwrap() >= -1e-8);
    }

    #[test]
    fn exact_mixing_plus_identity_structure() {
        // Y = M + I has eigenvalues w_k + 1 with eigenvectors the signals.
        let e = make_ensemble::<f64>(8, &[0.5, 0.3, 0.2], 9, true).unwrap();
        let m = mixing_matrix(&e);
        let mut mat = m.matrix().clone();
        for i in 0..8 {
            mat[(i, i)] += c(1.0, 0.0);
        }
        let wcm = WeightedCovarianceMatrix::from_parts(mat, vec![1.0; 8]).unwrap();
        let res = recover(&wcm, Some(3)).unwrap();
        for (j, w) in [0.5, 0.3, 0.2].iter().enumerate() {
            assert!((res.eigenvalues[j] - (w + 1.0)).abs() < 1e-10);
            let rho = res.estimates[j].dot_adjoint(&e.signals()[j]).norm();
            assert!(rho >= 1.0 - 1e-10, "source {j}: rho {rho}");
        }
        for v in &res.eigenvalues[3..] {
            assert!((v - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn k_hint_overrides_spike_census() {
        let e = make_ensemble::<f64>(64, &[0.5, 0.3, 0.2], 17, true).unwrap();
        let a = make_sampling_matrix(
            MatrixKind::ComplexGaussian,
            64 * 200,
            64,
            derive_seed(17, &[1]),
        )
        .unwrap();
        let y = measure(&e, &a, &NoiseConfig::none()).unwrap();
        let wcm = build_wcm(&y, &a).unwrap();
        let res = recover(&wcm, Some(2)).unwrap();
        assert_eq!(res.spike_count, Some(2));
        assert_eq!(res.estimates.len(), 2);
        // the two brightest sources come first
        for (j, x) in e.signals().iter().take(2).enumerate() {
            let rho = res.estimates[j].dot_adjoint(x).norm();
            assert!(rho > 0.8, "estimate {j} similarity {rho}");
        }
    }

    #[test]
    fn degenerate_spikes_are_flagged() {
        let mat = CMatrix::from_diagonal(&[2.0, 2.0, 1.0, 1.0]);
        let wcm = WeightedCovarianceMatrix::from_parts(mat, vec![1.0; 4]).unwrap();
        let res = recover(&wcm, Some(2)).unwrap();
        assert!(res.degenerate_spikes);
        let res = recover(&wcm, Some(1)).unwrap();
        assert!(!res.degenerate_spikes);
    }

    #[test]
    fn dimension_cap_is_enforced() {
        assert!(matches!(
            WcmAccumulator::<f64>::new(MAX_WCM_DIM + 1),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let e = make_ensemble::<f64>(8, &[1.0], 1, false).unwrap();
        let a1 = make_sampling_matrix(MatrixKind::ComplexGaussian, 16, 8, 2).unwrap();
        let a2 = make_sampling_matrix(MatrixKind::ComplexGaussian, 8, 8, 2).unwrap();
        let y = measure(&e, &a1, &NoiseConfig::none()).unwrap();
        assert!(matches!(
            build_wcm(&y, &a2),
            Err(Error::Dimension { .. })
        ));
    }
}
