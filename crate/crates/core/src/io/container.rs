//! Binary container for ensembles, sampling matrices, measurements, and
//! spectral results.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic   4 bytes  "MPR1"
//! kind    u8       1 ensemble, 2 sampling gaussian, 3 sampling phase-only,
//!                  4 measurements, 5 spectral result
//! flags   u8       bit 0: ensemble normalized / measurements noisy
//! pad     u16      zero
//! n       u64      rows / measurement count (0 where unused)
//! d       u64      dimension
//! seed    u64      generation seed (0 where unused)
//! k       u64      source count / spike count / eigenpair count
//! lambda  k × f64  weights (ensemble), eigenvalues (spectral), else absent
//! extra   kind-specific header extension (measurements only)
//! payload kind-specific, f64 little-endian; complex data as re/im pairs,
//!         row-major
//! ```
//!
//! Round trips are bit-exact: floats are stored and restored by their IEEE
//! bit patterns.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::model::{
    ComplexVector, MatrixKind, MeasurementSet, NoiseConfig, NoiseModel, SamplingMatrix,
    SourceEnsemble,
};
use crate::scalar::{Cplx, Real};
use crate::spectral::SpectralResult;

const MAGIC: &[u8; 4] = b"MPR1";

const KIND_ENSEMBLE: u8 = 1;
const KIND_SAMPLING_GAUSSIAN: u8 = 2;
const KIND_SAMPLING_PHASE: u8 = 3;
const KIND_MEASUREMENTS: u8 = 4;
const KIND_SPECTRAL: u8 = 5;

struct Header {
    kind: u8,
    flags: u8,
    n: u64,
    d: u64,
    seed: u64,
    k: u64,
}

fn write_header<W: Write>(w: &mut W, h: &Header) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&[h.kind, h.flags])?;
    w.write_all(&0u16.to_le_bytes())?;
    w.write_all(&h.n.to_le_bytes())?;
    w.write_all(&h.d.to_le_bytes())?;
    w.write_all(&h.seed.to_le_bytes())?;
    w.write_all(&h.k.to_le_bytes())?;
    Ok(())
}

fn read_header<R: Read>(r: &mut R) -> Result<Header> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Container("bad magic bytes".into()));
    }
    let mut kf = [0u8; 2];
    r.read_exact(&mut kf)?;
    let mut pad = [0u8; 2];
    r.read_exact(&mut pad)?;
    Ok(Header {
        kind: kf[0],
        flags: kf[1],
        n: read_u64(r)?,
        d: read_u64(r)?,
        seed: read_u64(r)?,
        k: read_u64(r)?,
    })
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn write_f64<W: Write, T: Real>(w: &mut W, v: T) -> Result<()> {
    w.write_all(&v.to_f64_lossy().to_le_bytes())?;
    Ok(())
}

fn read_f64<R: Read, T: Real>(r: &mut R) -> Result<T> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    let v = f64::from_le_bytes(buf);
    Ok(T::from_f64_lossy(v))
}

fn write_complex_slice<W: Write, T: Real>(w: &mut W, zs: &[Cplx<T>]) -> Result<()> {
    for z in zs {
        write_f64(w, z.re)?;
        write_f64(w, z.im)?;
    }
    Ok(())
}

fn read_complex_vec<R: Read, T: Real>(r: &mut R, len: usize) -> Result<Vec<Cplx<T>>> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let re = read_f64(r)?;
        let im = read_f64(r)?;
        out.push(Cplx::new(re, im));
    }
    Ok(out)
}

pub fn write_ensemble<W: Write, T: Real>(w: &mut W, e: &SourceEnsemble<T>) -> Result<()> {
    write_header(
        w,
        &Header {
            kind: KIND_ENSEMBLE,
            flags: e.normalized() as u8,
            n: 0,
            d: e.d() as u64,
            seed: 0,
            k: e.k() as u64,
        },
    )?;
    for &weight in e.weights() {
        write_f64(w, weight)?;
    }
    for s in e.signals() {
        write_complex_slice(w, s.entries())?;
    }
    Ok(())
}

pub fn read_ensemble<R: Read, T: Real>(r: &mut R) -> Result<SourceEnsemble<T>> {
    let h = read_header(r)?;
    if h.kind != KIND_ENSEMBLE {
        return Err(Error::Container(format!(
            "expected ensemble container, found kind {}",
            h.kind
        )));
    }
    let (d, k) = (h.d as usize, h.k as usize);
    let mut weights = Vec::with_capacity(k);
    for _ in 0..k {
        weights.push(read_f64(r)?);
    }
    let mut signals = Vec::with_capacity(k);
    for _ in 0..k {
        signals.push(ComplexVector::new(read_complex_vec(r, d)?)?);
    }
    SourceEnsemble::from_parts(signals, weights, h.flags & 1 == 1)
}

pub fn write_sampling_matrix<W: Write, T: Real>(w: &mut W, a: &SamplingMatrix<T>) -> Result<()> {
    let kind = match a.kind() {
        MatrixKind::ComplexGaussian => KIND_SAMPLING_GAUSSIAN,
        MatrixKind::PhaseOnly => KIND_SAMPLING_PHASE,
    };
    write_header(
        w,
        &Header {
            kind,
            flags: 0,
            n: a.n() as u64,
            d: a.d() as u64,
            seed: a.seed(),
            k: 0,
        },
    )?;
    write_complex_slice(w, a.entries())
}

pub fn read_sampling_matrix<R: Read, T: Real>(r: &mut R) -> Result<SamplingMatrix<T>> {
    let h = read_header(r)?;
    let kind = match h.kind {
        KIND_SAMPLING_GAUSSIAN => MatrixKind::ComplexGaussian,
        KIND_SAMPLING_PHASE => MatrixKind::PhaseOnly,
        other => {
            return Err(Error::Container(format!(
                "expected sampling container, found kind {other}"
            )))
        }
    };
    let (n, d) = (h.n as usize, h.d as usize);
    let total = n
        .checked_mul(d)
        .ok_or_else(|| Error::Container("sampling size overflow".into()))?;
    let entries = read_complex_vec(r, total)?;
    SamplingMatrix::from_rows(kind, h.seed, d, entries)
}

pub fn write_measurements<W: Write, T: Real>(w: &mut W, m: &MeasurementSet<T>) -> Result<()> {
    write_header(
        w,
        &Header {
            kind: KIND_MEASUREMENTS,
            flags: m.noisy() as u8,
            n: m.n() as u64,
            d: 0,
            seed: m.noise().seed,
            k: 0,
        },
    )?;
    // extension: noise model, sigma, provenance ids
    let (model, sigma) = match m.noise().model {
        NoiseModel::None => (0u8, T::zero()),
        NoiseModel::AdditiveGaussian { sigma } => (1u8, sigma),
    };
    w.write_all(&[model, 0, 0, 0, 0, 0, 0, 0])?;
    write_f64(w, sigma)?;
    w.write_all(&m.ensemble_id().to_le_bytes())?;
    w.write_all(&m.matrix_id().to_le_bytes())?;
    for &v in m.values() {
        write_f64(w, v)?;
    }
    Ok(())
}

pub fn read_measurements<R: Read, T: Real>(r: &mut R) -> Result<MeasurementSet<T>> {
    let h = read_header(r)?;
    if h.kind != KIND_MEASUREMENTS {
        return Err(Error::Container(format!(
            "expected measurement container, found kind {}",
            h.kind
        )));
    }
    let mut ext = [0u8; 8];
    r.read_exact(&mut ext)?;
    let sigma: T = read_f64(r)?;
    let ensemble_id = read_u64(r)?;
    let matrix_id = read_u64(r)?;
    let model = match ext[0] {
        0 => NoiseModel::None,
        1 => NoiseModel::AdditiveGaussian { sigma },
        other => {
            return Err(Error::Container(format!("unknown noise model {other}")));
        }
    };
    let mut values = Vec::with_capacity(h.n as usize);
    for _ in 0..h.n {
        values.push(read_f64(r)?);
    }
    MeasurementSet::new(
        values,
        h.flags & 1 == 1,
        NoiseConfig {
            model,
            seed: h.seed,
        },
        ensemble_id,
        matrix_id,
    )
}

pub fn write_spectral_result<W: Write, T: Real>(w: &mut W, s: &SpectralResult<T>) -> Result<()> {
    let pairs = s.eigenvalues.len();
    let d = s.eigenvectors.first().map_or(0, |v| v.dim());
    write_header(
        w,
        &Header {
            kind: KIND_SPECTRAL,
            flags: s.degenerate_spikes as u8,
            n: s.n_used as u64,
            d: d as u64,
            seed: s.spike_count.map_or(u64::MAX, |k| k as u64),
            k: pairs as u64,
        },
    )?;
    for &v in &s.eigenvalues {
        write_f64(w, v)?;
    }
    for &v in &s.residuals {
        write_f64(w, v)?;
    }
    for vec in &s.eigenvectors {
        write_complex_slice(w, vec.entries())?;
    }
    Ok(())
}

pub fn read_spectral_result<R: Read, T: Real>(r: &mut R) -> Result<SpectralResult<T>> {
    let h = read_header(r)?;
    if h.kind != KIND_SPECTRAL {
        return Err(Error::Container(format!(
            "expected spectral container, found kind {}",
            h.kind
        )));
    }
    let pairs = h.k as usize;
    let d = h.d as usize;
    let mut eigenvalues = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        eigenvalues.push(read_f64(r)?);
    }
    let mut residuals = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        residuals.push(read_f64(r)?);
    }
    let mut eigenvectors = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        eigenvectors.push(ComplexVector::new(read_complex_vec(r, d)?)?);
    }
    let spike_count = if h.seed == u64::MAX {
        None
    } else {
        Some(h.seed as usize)
    };
    let estimates = match spike_count {
        Some(k) => eigenvectors.iter().take(k).cloned().collect(),
        None => Vec::new(),
    };
    Ok(SpectralResult {
        eigenvalues,
        eigenvectors,
        residuals,
        spike_count,
        estimates,
        degenerate_spikes: h.flags & 1 == 1,
        n_used: h.n as usize,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_ensemble, make_sampling_matrix};

    #[test]
    fn ensemble_round_trip_is_bit_exact() {
        let e = make_ensemble::<f64>(12, &[0.55, 0.45], 3, true).unwrap();
        let mut buf = Vec::new();
        write_ensemble(&mut buf, &e).unwrap();
        let back: SourceEnsemble<f64> = read_ensemble(&mut buf.as_slice()).unwrap();
        assert_eq!(back.normalized(), e.normalized());
        assert_eq!(back.weights(), e.weights());
        for (a, b) in e.signals().iter().zip(back.signals()) {
            assert_eq!(a.entries(), b.entries());
        }
        // serialization is stable byte-for-byte
        let mut buf2 = Vec::new();
        write_ensemble(&mut buf2, &back).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn sampling_round_trip_is_bit_exact() {
        let a = make_sampling_matrix::<f64>(MatrixKind::PhaseOnly, 7, 5, 99).unwrap();
        let mut buf = Vec::new();
        write_sampling_matrix(&mut buf, &a).unwrap();
        let back: SamplingMatrix<f64> = read_sampling_matrix(&mut buf.as_slice()).unwrap();
        assert_eq!(back.kind(), a.kind());
        assert_eq!(back.seed(), a.seed());
        assert_eq!(back.entries(), a.entries());
    }

    #[test]
    fn measurement_round_trip_preserves_noise_config() {
        let m = MeasurementSet::new(
            vec![0.5, -0.25, 1.75],
            true,
            NoiseConfig {
                model: NoiseModel::AdditiveGaussian { sigma: 0.1 },
                seed: 42,
            },
            7,
            8,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_measurements(&mut buf, &m).unwrap();
        let back: MeasurementSet<f64> = read_measurements(&mut buf.as_slice()).unwrap();
        assert_eq!(back.values(), m.values());
        assert_eq!(back.noise(), m.noise());
        assert_eq!(back.ensemble_id(), 7);
        assert_eq!(back.matrix_id(), 8);
        assert!(back.noisy());
    }

    #[test]
    fn truncated_and_corrupt_containers_are_rejected() {
        let e = make_ensemble::<f64>(4, &[1.0], 1, false).unwrap();
        let mut buf = Vec::new();
        write_ensemble(&mut buf, &e).unwrap();
        // corrupt magic
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_ensemble::<_, f64>(&mut bad.as_slice()).is_err());
        // truncate
        let short = &buf[..buf.len() - 3];
        assert!(read_ensemble::<_, f64>(&mut &short[..]).is_err());
        // wrong kind
        assert!(read_sampling_matrix::<_, f64>(&mut buf.as_slice()).is_err());
    }
}
