//! Evaluation metrics: cosine similarity, recovery matching, and the
//! signal-to-background ratio of focus images.

use crate::error::{Error, Result};
use crate::model::{ComplexVector, SourceEnsemble};
use crate::scalar::Real;

/// Phase- and scale-invariant alignment `ρ(x, y) = |x^* y| / (‖x‖ ‖y‖)`,
/// in `[0, 1]`.
pub fn cosine_similarity<T: Real>(x: &ComplexVector<T>, y: &ComplexVector<T>) -> Result<T> {
    if x.dim() != y.dim() {
        return Err(Error::Dimension {
            context: "cosine similarity",
            expected: x.dim(),
            actual: y.dim(),
        });
    }
    let nx = x.norm();
    let ny = y.norm();
    if nx == T::zero() || ny == T::zero() {
        return Err(Error::ZeroVector);
    }
    let rho = x.dot_adjoint(y).norm() / (nx * ny);
    // Cauchy-Schwarz can be violated by at most a few ulps.
    Ok(rho.min(T::one()).max(T::zero()))
}

/// Recovery quality of a set of estimates against the ground-truth ensemble.
#[derive(Debug, Clone)]
pub struct RecoveryReport<T> {
    /// Per-true-source similarity, 0 for unmatched sources.
    pub rho: Vec<T>,
    /// Estimate index matched to each true source, if any.
    pub matched_estimate: Vec<Option<usize>>,
    /// Spike count reported by the recovery stage, if known.
    pub spike_count_detected: Option<usize>,
    /// True source count.
    pub true_k: usize,
}

/// Greedily matches estimates to ground-truth sources by descending
/// similarity (ties broken by the lower source index, then the lower
/// estimate index) and reports per-source `ρ`.
pub fn match_and_score<T: Real>(
    estimates: &[ComplexVector<T>],
    ensemble: &SourceEnsemble<T>,
) -> Result<RecoveryReport<T>> {
    match_and_score_signals(estimates, ensemble.signals(), None)
}

/// Matching against raw ground-truth signals; used by simulations whose
/// truths do not form a validated ensemble.
pub fn match_and_score_signals<T: Real>(
    estimates: &[ComplexVector<T>],
    truths: &[ComplexVector<T>],
    spike_count_detected: Option<usize>,
) -> Result<RecoveryReport<T>> {
    if estimates.is_empty() {
        return Err(Error::Config("no estimates to score".into()));
    }
    let k = truths.len();
    let mut pairs: Vec<(T, usize, usize)> = Vec::with_capacity(estimates.len() * k);
    for (src, x) in truths.iter().enumerate() {
        for (est, v) in estimates.iter().enumerate() {
            pairs.push((cosine_similarity(x, v)?, src, est));
        }
    }
    pairs.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });

    let mut rho = vec![T::zero(); k];
    let mut matched_estimate = vec![None; k];
    let mut estimate_taken = vec![false; estimates.len()];
    let mut source_taken = vec![false; k];
    for (r, src, est) in pairs {
        if source_taken[src] || estimate_taken[est] {
            continue;
        }
        source_taken[src] = true;
        estimate_taken[est] = true;
        rho[src] = r;
        matched_estimate[src] = Some(est);
    }

    Ok(RecoveryReport {
        rho,
        matched_estimate,
        spike_count_detected,
        true_k: k,
    })
}

/// Rectangular grid of non-negative intensities, row-major.
#[derive(Debug, Clone)]
pub struct IntensityImage<T> {
    rows: usize,
    cols: usize,
    pixels: Vec<T>,
}

impl<T: Real> IntensityImage<T> {
    pub fn new(rows: usize, cols: usize, pixels: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 || pixels.len() != rows * cols {
            return Err(Error::Dimension {
                context: "intensity image",
                expected: rows * cols,
                actual: pixels.len(),
            });
        }
        Ok(IntensityImage { rows, cols, pixels })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pixels(&self) -> &[T] {
        &self.pixels
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.pixels[r * self.cols + c]
    }

    /// Position of the brightest pixel.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut best_v = T::neg_infinity();
        for r in 0..self.rows {
            for c in 0..self.cols {
                let v = self.get(r, c);
                if v > best_v {
                    best_v = v;
                    best = (r, c);
                }
            }
        }
        best
    }
}

/// Minimum number of background pixels required for a stable ratio.
pub const MIN_BACKGROUND_PIXELS: usize = 10;

/// Signal-to-background ratio per target:
/// `SBR = I(target) / mean(I over non-target pixels)`.
///
/// The background mean excludes every declared target. Invariant under
/// positive rescaling of the whole image.
pub fn sbr<T: Real>(image: &IntensityImage<T>, targets: &[(usize, usize)]) -> Result<Vec<T>> {
    for &(r, c) in targets {
        if r >= image.rows() || c >= image.cols() {
            return Err(Error::Config(format!(
                "target ({r}, {c}) outside {}x{} image",
                image.rows(),
                image.cols()
            )));
        }
    }
    let total = image.rows() * image.cols();
    let background = total - targets.len();
    if background < MIN_BACKGROUND_PIXELS {
        return Err(Error::EmptyBackground {
            required: MIN_BACKGROUND_PIXELS,
        });
    }

    let mut sum = T::zero();
    for r in 0..image.rows() {
        for c in 0..image.cols() {
            if !targets.contains(&(r, c)) {
                sum += image.get(r, c);
            }
        }
    }
    let mean = sum / T::from_f64_lossy(background as f64);
    if mean <= T::zero() {
        return Err(Error::EmptyBackground {
            required: MIN_BACKGROUND_PIXELS,
        });
    }

    Ok(targets
        .iter()
        .map(|&(r, c)| image.get(r, c) / mean)
        .collect())
}
