//! Dense Hermitian eigensolver.
//!
//! Householder reduction of the complex Hermitian matrix to a real symmetric
//! tridiagonal form (unitary similarity), followed by the implicit
//! tridiagonal QL algorithm with Wilkinson-style shifts, accumulating the
//! unitary transformation throughout. The QL iteration follows the classic
//! Algol/EISPACK `tql2` procedure.
//!
//! Contracts enforced on output: eigenvalues descending, eigenvectors
//! orthonormal (unitary by construction), and per-pair residuals
//! `‖A v - λ v‖` bounded by `residual_tol · ‖A‖_F`; if the bound fails the
//! solver reports `ConvergenceFailure` instead of returning low-quality
//! pairs.

use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::model::ComplexVector;
use crate::scalar::{Cplx, Real};

/// Solver options.
#[derive(Debug, Clone, Copy)]
pub struct EigOptions<T> {
    /// Residual bound relative to the Frobenius norm of the input.
    pub residual_tol: T,
    /// Hermitian-defect bound relative to `max(1, max |entry|)`.
    pub hermitian_tol: T,
    /// QL iteration cap per eigenvalue.
    pub max_iter_per_eigenvalue: usize,
}

impl<T: Real> Default for EigOptions<T> {
    fn default() -> Self {
        EigOptions {
            residual_tol: T::default_eig_tol(),
            hermitian_tol: T::from_f64_lossy(1e-10),
            max_iter_per_eigenvalue: 60,
        }
    }
}

/// Full eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigendecomposition<T> {
    /// Eigenvalues, descending.
    pub values: Vec<T>,
    /// Matching orthonormal eigenvectors.
    pub vectors: Vec<ComplexVector<T>>,
    /// Per-pair residuals `‖A v - λ v‖`.
    pub residuals: Vec<T>,
    /// Total QL iterations spent.
    pub iterations: usize,
}

/// Computes all eigenpairs of a Hermitian matrix.
pub fn hermitian_eig<T: Real>(a: &CMatrix<T>, opts: &EigOptions<T>) -> Result<Eigendecomposition<T>> {
    let d = a.dim();
    if d == 0 {
        return Err(Error::Dimension {
            context: "eigensolver",
            expected: 1,
            actual: 0,
        });
    }
    let scale = T::one().max(a.max_abs_entry());
    a.require_hermitian(opts.hermitian_tol * scale)?;

    let mut work = a.clone();
    let mut q = CMatrix::identity(d);
    let mut diag = vec![T::zero(); d];
    let mut off = vec![T::zero(); d];

    tridiagonalize(&mut work, Some(&mut q), &mut diag, &mut off);

    let iterations = ql_implicit(&mut diag, &mut off, Some(&mut q), opts.max_iter_per_eigenvalue)?;

    // Descending order.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap());

    let values: Vec<T> = order.iter().map(|&i| diag[i]).collect();
    let vectors: Vec<ComplexVector<T>> = order
        .iter()
        .map(|&col| {
            let v: Vec<Cplx<T>> = (0..d).map(|row| q[(row, col)]).collect();
            ComplexVector::from_raw(v)
        })
        .collect();

    // Residual contract against the original matrix.
    let fro = a.frobenius_norm();
    let mut residuals = Vec::with_capacity(d);
    let mut worst = T::zero();
    let mut av = vec![Cplx::new(T::zero(), T::zero()); d];
    for (lambda, v) in values.iter().zip(&vectors) {
        a.matvec(v.entries(), &mut av);
        let mut r2 = T::zero();
        for (avi, vi) in av.iter().zip(v.entries()) {
            r2 += (*avi - *vi * *lambda).norm_sqr();
        }
        let r = r2.sqrt();
        if r > worst {
            worst = r;
        }
        residuals.push(r);
    }
    if fro > T::zero() && worst > opts.residual_tol * fro {
        return Err(Error::ConvergenceFailure {
            iterations,
            worst_residual: worst.to_f64_lossy(),
        });
    }

    Ok(Eigendecomposition {
        values,
        vectors,
        residuals,
        iterations,
    })
}

/// Eigenvalues only (descending), skipping the unitary accumulation.
pub fn hermitian_eigenvalues<T: Real>(a: &CMatrix<T>, opts: &EigOptions<T>) -> Result<Vec<T>> {
    let d = a.dim();
    if d == 0 {
        return Err(Error::Dimension {
            context: "eigensolver",
            expected: 1,
            actual: 0,
        });
    }
    let scale = T::one().max(a.max_abs_entry());
    a.require_hermitian(opts.hermitian_tol * scale)?;

    let mut work = a.clone();
    let mut diag = vec![T::zero(); d];
    let mut off = vec![T::zero(); d];
    tridiagonalize(&mut work, None, &mut diag, &mut off);
    ql_implicit(&mut diag, &mut off, None, opts.max_iter_per_eigenvalue)?;
    diag.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(diag)
}

/// Householder reduction to real symmetric tridiagonal form.
///
/// On return `diag`/`off` hold the tridiagonal entries (`off[k]` couples
/// `k` and `k+1`, `off[d-1] = 0`) and `q`, when given, the accumulated
/// unitary, so that `A = Q T Q^*`.
fn tridiagonalize<T: Real>(
    a: &mut CMatrix<T>,
    mut q: Option<&mut CMatrix<T>>,
    diag: &mut [T],
    off: &mut [T],
) {
    let d = a.dim();
    let zero = Cplx::new(T::zero(), T::zero());
    let mut reflectors: Vec<Option<Vec<Cplx<T>>>> = Vec::new();

    for k in 0..d.saturating_sub(2) {
        let m = d - k - 1;

        // Scaled column norm below the diagonal.
        let mut scale = T::zero();
        for i in (k + 1)..d {
            let z = a[(i, k)];
            scale = scale.max(z.re.abs()).max(z.im.abs());
        }
        if scale == T::zero() {
            reflectors.push(None);
            continue;
        }
        let inv_scale = T::one() / scale;
        let mut sum = T::zero();
        for i in (k + 1)..d {
            let z = a[(i, k)] * inv_scale;
            sum += z.norm_sqr();
        }
        let beta = scale * sum.sqrt();

        let x0 = a[(k + 1, k)];
        let x0n = x0.norm();
        let phase = if x0n > T::zero() {
            x0 / x0n
        } else {
            Cplx::new(T::one(), T::zero())
        };
        let alpha = -phase * beta;

        // Householder vector v = (x - alpha e1) / ‖·‖.
        let mut v: Vec<Cplx<T>> = (0..m).map(|i| a[(k + 1 + i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v
            .iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |x, y| x + y)
            .sqrt();
        if vnorm == T::zero() {
            reflectors.push(None);
            continue;
        }
        let inv = T::one() / vnorm;
        for z in v.iter_mut() {
            *z = *z * inv;
        }

        // Trailing block update S <- S - v w^* - w v^*, with
        // p = S v, kappa = v^* p (real), w = 2 (p - kappa v).
        let mut p = vec![zero; m];
        for i in 0..m {
            let row = &a.row(k + 1 + i)[k + 1..];
            let mut acc = zero;
            for (s, vj) in row.iter().zip(v.iter()) {
                acc += *s * *vj;
            }
            p[i] = acc;
        }
        let mut kappa = T::zero();
        for (vi, pi) in v.iter().zip(p.iter()) {
            kappa += (vi.conj() * *pi).re;
        }
        let two = T::from_f64_lossy(2.0);
        let w: Vec<Cplx<T>> = p
            .iter()
            .zip(v.iter())
            .map(|(pi, vi)| (*pi - *vi * kappa) * two)
            .collect();
        for i in 0..m {
            let vi = v[i];
            let wi = w[i];
            let row = &mut a.row_mut(k + 1 + i)[k + 1..];
            for ((s, vj), wj) in row.iter_mut().zip(v.iter()).zip(w.iter()) {
                *s -= vi * wj.conj() + wi * vj.conj();
            }
        }

        // New column k: alpha on the subdiagonal, zeros below.
        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        for i in (k + 2)..d {
            a[(i, k)] = zero;
            a[(k, i)] = zero;
        }
        reflectors.push(Some(v));
    }

    // Back-accumulate Q = H_0 H_1 ... H_{d-3}.
    if let Some(q) = q.as_deref_mut() {
        for k in (0..reflectors.len()).rev() {
            let Some(v) = &reflectors[k] else { continue };
            let m = d - k - 1;
            // u = v^* Q over the trailing block (cols <= k of those rows are 0).
            let mut u = vec![zero; m];
            for i in 0..m {
                let vi_conj = v[i].conj();
                let row = &q.row(k + 1 + i)[k + 1..];
                for (uj, qj) in u.iter_mut().zip(row.iter()) {
                    *uj += vi_conj * *qj;
                }
            }
            let two = T::from_f64_lossy(2.0);
            for i in 0..m {
                let vi2 = v[i] * two;
                let row = &mut q.row_mut(k + 1 + i)[k + 1..];
                for (qj, uj) in row.iter_mut().zip(u.iter()) {
                    *qj -= vi2 * *uj;
                }
            }
        }
    }

    // Unit-modulus column scaling makes the subdiagonal real non-negative.
    let mut phi = Cplx::new(T::one(), T::zero());
    for k in 0..d {
        diag[k] = a[(k, k)].re;
        if k + 1 < d {
            let e = a[(k + 1, k)];
            let en = e.norm();
            // T'[k+1,k] = conj(phi_{k+1}) e phi_k = |e| with this choice.
            let phi_next = if en > T::zero() { e * phi / en } else { phi };
            off[k] = en;
            phi = phi_next;
            if let Some(q) = q.as_deref_mut() {
                for row in 0..d {
                    let z = q[(row, k + 1)];
                    q[(row, k + 1)] = z * phi;
                }
            }
        }
    }
    off[d - 1] = T::zero();
}

/// Implicit tridiagonal QL with shifts (classic `tql2`), rotations applied to
/// the complex columns of `q` when given. Returns total iterations.
fn ql_implicit<T: Real>(
    diag: &mut [T],
    off: &mut [T],
    mut q: Option<&mut CMatrix<T>>,
    max_iter_per_eigenvalue: usize,
) -> Result<usize> {
    let n = diag.len();
    let eps = T::epsilon();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let mut total_iter = 0usize;

    for l in 0..n {
        tst1 = tst1.max(diag[l].abs() + off[l].abs());
        let mut iter = 0usize;
        loop {
            // Find a negligible subdiagonal element.
            let mut m = l;
            while m < n - 1 {
                if off[m].abs() <= eps * tst1 {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            total_iter += 1;
            if iter > max_iter_per_eigenvalue {
                return Err(Error::ConvergenceFailure {
                    iterations: total_iter,
                    worst_residual: off[l].abs().to_f64_lossy(),
                });
            }

            // Implicit shift.
            let two = T::from_f64_lossy(2.0);
            let g = diag[l];
            let mut p = (diag[l + 1] - g) / (two * off[l]);
            let mut r = p.hypot(T::one());
            if p < T::zero() {
                r = -r;
            }
            diag[l] = off[l] / (p + r);
            diag[l + 1] = off[l] * (p + r);
            let dl1 = diag[l + 1];
            let mut h = g - diag[l];
            for i in (l + 2)..n {
                diag[i] -= h;
            }
            f += h;

            // Implicit QL sweep from m down to l.
            p = diag[m];
            let mut c = T::one();
            let mut c2 = c;
            let mut c3 = c;
            let el1 = off[l + 1];
            let mut s = T::zero();
            let mut s2 = T::zero();
            for i in (l..m).rev() {
                c3 = c2;
                c2 = c;
                s2 = s;
                let g = c * off[i];
                h = c * p;
                let r = p.hypot(off[i]);
                off[i + 1] = s * r;
                s = off[i] / r;
                c = p / r;
                p = c * diag[i] - s * g;
                diag[i + 1] = h + s * (c * g + s * diag[i]);

                // Plane rotation on columns i, i+1 of the unitary.
                if let Some(q) = q.as_deref_mut() {
                    for row in 0..n {
                        let qr = q.row_mut(row);
                        let hc = qr[i + 1];
                        qr[i + 1] = hc * c + qr[i] * s;
                        qr[i] = qr[i] * c - hc * s;
                    }
                }
            }
            p = -s * s2 * c3 * el1 * off[l] / dl1;
            off[l] = s * p;
            diag[l] = c * p;

            if off[l].abs() <= eps * tst1 {
                break;
            }
        }
        diag[l] += f;
        off[l] = T::zero();
    }
    Ok(total_iter)
}
