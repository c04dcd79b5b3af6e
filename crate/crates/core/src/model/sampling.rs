//! Random sampling matrices.
//!
//! A sampling matrix holds the `n` sensing vectors `a_i` as rows. Entries are
//! normalized so that `E |a_ij|^2 = 1`: complex-Gaussian entries have real and
//! imaginary parts of variance 1/2 each, and phase-only entries are exactly
//! `e^{iθ}`. Under this convention the weighted covariance of the measured
//! intensities converges to `M + tr(M)·I` for Gaussian sampling, with the bulk
//! at `tr(M)` and one spike per source.
//!
//! Rows are generated from independent per-row random streams derived from
//! `(seed, row_index)`, so generation parallelizes across rows and a matrix is
//! reproduced bit-for-bit from `(kind, n, d, seed)` alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};
use crate::seeding::stable_id;

/// Entry distribution of a sampling matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    /// i.i.d. circular complex Gaussian entries, `E |a_ij|^2 = 1`.
    ComplexGaussian,
    /// Unit-modulus entries `e^{iθ}` with `θ` uniform on `[0, 2π)`.
    PhaseOnly,
}

impl MatrixKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MatrixKind::ComplexGaussian => "gaussian",
            MatrixKind::PhaseOnly => "phase",
        }
    }
}

/// Maximum number of stored entries (`n * d`) accepted by a constructor.
pub const MAX_SAMPLING_ENTRIES: usize = 1 << 27;

/// Dense `n x d` sampling matrix with reproducible rows.
#[derive(Debug, Clone)]
pub struct SamplingMatrix<T> {
    kind: MatrixKind,
    n: usize,
    d: usize,
    seed: u64,
    entries: Vec<Cplx<T>>, // row-major
}

/// Fills `buf` with row `i` of the matrix determined by `(kind, d, seed)`.
///
/// This is the single source of truth for entry generation; the dense
/// constructor and the streaming experiment pipelines both call it, so they
/// see bit-identical rows.
pub fn generate_row<T: Real>(kind: MatrixKind, seed: u64, row: usize, buf: &mut [Cplx<T>]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(row as u64);
    match kind {
        MatrixKind::ComplexGaussian => {
            // Re and Im each N(0, 1/2) so that E|a|^2 = 1.
            let scale = T::from_f64_lossy(std::f64::consts::FRAC_1_SQRT_2);
            for slot in buf.iter_mut() {
                let re = T::standard_normal(&mut rng) * scale;
                let im = T::standard_normal(&mut rng) * scale;
                *slot = Cplx::new(re, im);
            }
        }
        MatrixKind::PhaseOnly => {
            for slot in buf.iter_mut() {
                let theta = T::uniform_angle(&mut rng);
                *slot = Cplx::new(theta.cos(), theta.sin());
            }
        }
    }
}

/// Builds a dense sampling matrix. See [`generate_row`] for the distribution.
pub fn make_sampling_matrix<T: Real>(
    kind: MatrixKind,
    n: usize,
    d: usize,
    seed: u64,
) -> Result<SamplingMatrix<T>> {
    if n == 0 || d == 0 {
        return Err(Error::Dimension {
            context: "sampling matrix",
            expected: 1,
            actual: 0,
        });
    }
    let total = n.checked_mul(d).ok_or(Error::ResourceLimit {
        context: "sampling matrix",
        requested: usize::MAX,
        limit: MAX_SAMPLING_ENTRIES,
    })?;
    if total > MAX_SAMPLING_ENTRIES {
        return Err(Error::ResourceLimit {
            context: "sampling matrix",
            requested: total,
            limit: MAX_SAMPLING_ENTRIES,
        });
    }

    let mut entries = vec![Cplx::new(T::zero(), T::zero()); total];
    entries
        .par_chunks_mut(d)
        .enumerate()
        .for_each(|(i, row)| generate_row(kind, seed, i, row));

    Ok(SamplingMatrix {
        kind,
        n,
        d,
        seed,
        entries,
    })
}

impl<T: Real> SamplingMatrix<T> {
    /// Wraps explicit rows, e.g. deserialized ones. Rows must share one length.
    pub fn from_rows(kind: MatrixKind, seed: u64, d: usize, entries: Vec<Cplx<T>>) -> Result<Self> {
        if d == 0 || entries.is_empty() || entries.len() % d != 0 {
            return Err(Error::Dimension {
                context: "sampling matrix rows",
                expected: d.max(1),
                actual: entries.len(),
            });
        }
        for (index, z) in entries.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { index });
            }
        }
        let n = entries.len() / d;
        Ok(SamplingMatrix {
            kind,
            n,
            d,
            seed,
            entries,
        })
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn row(&self, i: usize) -> &[Cplx<T>] {
        &self.entries[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Cplx<T>]> {
        self.entries.chunks(self.d)
    }

    pub fn entries(&self) -> &[Cplx<T>] {
        &self.entries
    }

    /// Content identifier derived from the defining parameters.
    pub fn id(&self) -> u64 {
        sampling_id(self.kind, self.n, self.d, self.seed)
    }
}

/// Identifier of the matrix determined by `(kind, n, d, seed)`; equals
/// [`SamplingMatrix::id`] without materializing the matrix.
pub fn sampling_id(kind: MatrixKind, n: usize, d: usize, seed: u64) -> u64 {
    let mut bytes = Vec::with_capacity(33);
    bytes.push(match kind {
        MatrixKind::ComplexGaussian => 1u8,
        MatrixKind::PhaseOnly => 2u8,
    });
    bytes.extend_from_slice(&(n as u64).to_le_bytes());
    bytes.extend_from_slice(&(d as u64).to_le_bytes());
    bytes.extend_from_slice(&seed.to_le_bytes());
    stable_id(&bytes)
}
