//! Small dense linear-algebra helpers shared by the fitting and estimation modules.

use nalgebra::{Cholesky, DMatrix, Dyn, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{HacError, Result};

pub type CMatrix = DMatrix<Complex64>;

pub(crate) fn check_finite(m: &DMatrix<f64>, what: &'static str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(HacError::NonFinite(what))
    }
}

/// Eigenvalues of a general real square matrix (real Schur form, Hessenberg + QR).
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(HacError::DimensionMismatch {
            expected: m.nrows(),
            actual: m.ncols(),
        });
    }
    check_finite(m, "eigenvalue input")?;
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let scale = m.amax();
    if scale == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); m.nrows()]);
    }
    // nalgebra's Schur iteration fails on some degenerate inputs at a tight
    // tolerance; normalize and retry once with a looser one.
    let normalized = m / scale;
    let schur = normalized
        .clone()
        .try_schur(f64::EPSILON, 10_000)
        .or_else(|| normalized.try_schur(1e-12, 100_000))
        .ok_or_else(|| HacError::Degenerate("Schur iteration did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().map(|z| z * scale).collect())
}

/// Eigenvalue magnitudes sorted in descending order.
pub fn eigen_magnitudes(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let mut mags: Vec<f64> = eigenvalues(m)?.iter().map(|z| z.norm()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    Ok(mags)
}

/// Largest eigenvalue magnitude.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    Ok(eigen_magnitudes(m)?.first().copied().unwrap_or(0.0))
}

/// Singular value decomposition `m = u diag(s) v'` of a square matrix.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DMatrix<f64>,
    /// Descending.
    pub s: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl Svd {
    pub fn reconstruct(&self, s: &[f64]) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (j, sj) in s.iter().enumerate() {
            us.column_mut(j).scale_mut(*sj);
        }
        us * self.v.transpose()
    }
}

/// One-sided Jacobi SVD. The bidiagonal routine in nalgebra can return
/// inaccurate singular vectors when two singular values nearly coincide,
/// which is exactly the situation after clamping.
pub fn svd(m: &DMatrix<f64>) -> Result<Svd> {
    if !m.is_square() {
        return Err(HacError::DimensionMismatch {
            expected: m.nrows(),
            actual: m.ncols(),
        });
    }
    check_finite(m, "SVD input")?;
    let n = m.ncols();
    let mut w = m.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut w, &mut v] {
                    for i in 0..n {
                        let a = mat[(i, p)];
                        let b = mat[(i, q)];
                        mat[(i, p)] = c * a - s * b;
                        mat[(i, q)] = s * a + c * b;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let mut u = DMatrix::<f64>::zeros(n, n);
    let mut vs = DMatrix::<f64>::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        if sigma > 0.0 {
            u.set_column(dst, &(w.column(src) / sigma));
        }
        vs.set_column(dst, &v.column(src));
        s.push(sigma);
    }
    Ok(Svd { u, s, v: vs })
}

/// Singular values sorted in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    if m.is_square() {
        return Ok(svd(m)?.s);
    }
    check_finite(m, "SVD input")?;
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Entrywise l1 norm, `sum_ij |a_ij|`.
pub fn norm_l11(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x.abs()).sum()
}

/// Ratio of extreme eigenvalues of a symmetric matrix; infinite when the
/// smallest eigenvalue is not positive.
pub fn symmetric_condition(m: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(m.clone());
    let max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

pub(crate) fn cholesky(m: &DMatrix<f64>, context: &'static str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(m.clone()).ok_or(HacError::Singular {
        context,
        condition: symmetric_condition(m),
    })
}

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

pub(crate) fn hermitianize(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

pub(crate) fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Smallest eigenvalue of a Hermitian matrix, computed from the real
/// symmetric embedding `[[Re, -Im], [Im, Re]]`.
pub fn min_hermitian_eigenvalue(m: &CMatrix) -> f64 {
    let k = m.nrows();
    let mut big = DMatrix::<f64>::zeros(2 * k, 2 * k);
    for i in 0..k {
        for j in 0..k {
            let z = m[(i, j)];
            big[(i, j)] = z.re;
            big[(i + k, j + k)] = z.re;
            big[(i, j + k)] = -z.im;
            big[(i + k, j)] = z.im;
        }
    }
    symmetrize(&mut big);
    min_symmetric_eigenvalue(&big)
}
