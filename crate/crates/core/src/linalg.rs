//! Small dense complex linear algebra.
//!
//! The hybrid systems handled here have a handful of modes, so eigenvalues
//! are computed with a plain Hessenberg reduction followed by single-shift
//! complex QR sweeps. Eigenvectors come from inverse iteration.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Eigenvalues of a general complex square matrix, in deflation order.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidModel(format!(
            "eigenvalues of a non-square {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidModel("matrix has non-finite entries".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }

    let mut h = hessenberg(a);
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(n);
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;

    loop {
        if hi == 0 {
            out.push(h[(0, 0)]);
            break;
        }
        // locate the start of the active unreduced block
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            let reference = if diag > 0.0 { diag } else { scale };
            if sub <= f64::EPSILON * reference {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            out.push(h[(hi, hi)]);
            hi -= 1;
            iter = 0;
            continue;
        }

        iter += 1;
        total += 1;
        if iter > MAX_SWEEPS_PER_EIGENVALUE {
            return Err(Error::EigenNoConvergence { iterations: total });
        }

        let shift = if iter % 11 == 0 {
            // exceptional shift to break cycles
            h[(hi, hi)] + Complex64::new(h[(hi, hi - 1)].norm(), 0.0) * 0.75
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_sweep(&mut h, lo, hi, shift);
    }
    Ok(out)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    // eigenvalue of [[a, b], [c, d]] closest to d
    let tr_half = (a + d) * 0.5;
    let diff = (a - d) * 0.5;
    let disc = (diff * diff + b * c).sqrt();
    let l1 = tr_half + disc;
    let l2 = tr_half - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One explicit-shift QR step `H - μI = QR, H <- RQ + μI` on rows/cols `lo..=hi`.
fn qr_sweep(h: &mut CMatrix, lo: usize, hi: usize, shift: Complex64) {
    for k in lo..=hi {
        h[(k, k)] -= shift;
    }
    let mut rotations = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        for j in k..=hi {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = x * c + s * y;
            h[(k + 1, j)] = -s.conj() * x + y * c;
        }
        rotations.push((c, s));
    }
    for (offset, &(c, s)) in rotations.iter().enumerate() {
        let k = lo + offset;
        let last = (k + 2).min(hi);
        for i in lo..=last {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * c + y * s.conj();
            h[(i, k + 1)] = -x * s + y * c;
        }
    }
    for k in lo..=hi {
        h[(k, k)] += shift;
    }
}

/// Rotation `[[c, s], [-s̄, c]]` with real `c` mapping `(x, y)` to `(r, 0)`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if ax == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let norm = ax.hypot(ay);
    let c = ax / norm;
    let s = (x / ax) * y.conj() / norm;
    (c, s)
}

/// Householder reduction to upper Hessenberg form (similarity transform).
fn hessenberg(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let mut h = a.clone();
    if n < 3 {
        return h;
    }
    for k in 0..n - 2 {
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if v[0].norm() > 0.0 {
            v[0] / v[0].norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        v[0] += phase * xnorm;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H <- (I - 2vv^H) H
        for j in 0..n {
            let dot: Complex64 = v
                .iter()
                .enumerate()
                .map(|(i, vi)| vi.conj() * h[(k + 1 + i, j)])
                .sum();
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, j)] -= *vi * dot * 2.0;
            }
        }
        // H <- H (I - 2vv^H)
        for i in 0..n {
            let dot: Complex64 = v
                .iter()
                .enumerate()
                .map(|(j, vj)| h[(i, k + 1 + j)] * *vj)
                .sum();
            for (j, vj) in v.iter().enumerate() {
                h[(i, k + 1 + j)] -= dot * vj.conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    h
}

/// Unit-norm right eigenvector for a known eigenvalue, by inverse iteration.
pub fn eigenvector(a: &CMatrix, lambda: Complex64) -> Result<CVector> {
    let n = a.nrows();
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    // perturb the shift so the iteration matrix is numerically invertible
    let shifted_lambda = lambda + Complex64::new(scale * 1e-10, scale * 1e-10);
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] -= shifted_lambda;
    }
    let lu = m.lu();
    let mut x = CVector::from_element(n, Complex64::new(1.0, 0.0));
    for _ in 0..3 {
        x = lu
            .solve(&x)
            .ok_or_else(|| Error::Singular("inverse iteration".into()))?;
        let norm = x.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Singular("inverse iteration produced a null vector".into()));
        }
        x /= Complex64::new(norm, 0.0);
    }
    Ok(x)
}

/// Solve `a x = b` by LU with partial pivoting.
pub fn solve(a: &CMatrix, b: &CVector) -> Result<CVector> {
    let x = a
        .clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Singular("LU solve".into()))?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Singular("LU solve produced non-finite values".into()));
    }
    Ok(x)
}

/// |⟨u, v⟩| for unit vectors.
pub fn overlap(u: &CVector, v: &CVector) -> f64 {
    u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm()
}
