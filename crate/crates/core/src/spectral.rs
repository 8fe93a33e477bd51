//! Discrete Fourier transform of a multivariate series, its inverse, the
//! periodogram, and leave-one-frequency-out surgery.
//!
//! Conventions: `J(w_j) = (1/n) sum_t V_t exp(-i w_j t)` with `w_j = 2 pi j / n`,
//! `V_t = sum_j J(w_j) exp(i w_j t)`, and `I(w) = (n / 2 pi) J(w) J(w)^*`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{HacError, Result};
use crate::linalg::CMatrix;

/// `exp(-2 pi i m / n)` for `m = 0..n`, so every twiddle is looked up by
/// `(j * t) mod n` rather than recomputed.
#[derive(Debug, Clone)]
pub(crate) struct Twiddles {
    table: Vec<Complex64>,
}

impl Twiddles {
    pub(crate) fn new(n: usize) -> Self {
        let table = (0..n)
            .map(|m| {
                let angle = -2.0 * PI * m as f64 / n as f64;
                Complex64::new(angle.cos(), angle.sin())
            })
            .collect();
        Self { table }
    }

    /// `exp(-i w_j t)`.
    #[inline]
    pub(crate) fn forward(&self, j: usize, t: usize) -> Complex64 {
        let n = self.table.len();
        self.table[(j % n) * (t % n) % n]
    }

    /// `exp(+i w_j t)`.
    #[inline]
    pub(crate) fn inverse(&self, j: usize, t: usize) -> Complex64 {
        self.forward(j, t).conj()
    }
}

/// Fourier frequency `w_j = 2 pi j / n`.
pub fn fourier_frequency(j: usize, n: usize) -> f64 {
    2.0 * PI * j as f64 / n as f64
}

/// `J(w_0), .., J(w_{n-1})`, stored as the rows of an `n x k` complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DftSequence {
    coefficients: CMatrix,
}

impl DftSequence {
    pub fn from_matrix(coefficients: CMatrix) -> Self {
        Self { coefficients }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.coefficients
    }

    pub fn n(&self) -> usize {
        self.coefficients.nrows()
    }

    pub fn dim(&self) -> usize {
        self.coefficients.ncols()
    }

    /// `J(w_j)` as a column vector.
    pub fn at(&self, j: usize) -> DVector<Complex64> {
        self.coefficients.row(j).transpose()
    }

    pub fn frequency(&self, j: usize) -> f64 {
        fourier_frequency(j, self.n())
    }
}

/// Forward transform with the `1/n` normalization.
pub fn dft(v: &DMatrix<f64>) -> Result<DftSequence> {
    let (n, k) = v.shape();
    if n < 2 {
        return Err(HacError::InsufficientData {
            required: 1,
            actual: n,
        });
    }
    let tw = Twiddles::new(n);
    let mut out = CMatrix::zeros(n, k);
    for j in 0..n {
        for t in 0..n {
            let w = tw.forward(j, t);
            for c in 0..k {
                out[(j, c)] += w * v[(t, c)];
            }
        }
    }
    out /= Complex64::new(n as f64, 0.0);
    Ok(DftSequence { coefficients: out })
}

/// Inverse transform; returns the complex series as an `n x k` matrix.
pub fn idft(seq: &DftSequence) -> CMatrix {
    let (n, k) = seq.coefficients.shape();
    let tw = Twiddles::new(n.max(1));
    let mut out = CMatrix::zeros(n, k);
    for t in 0..n {
        for j in 0..n {
            let w = tw.inverse(j, t);
            for c in 0..k {
                out[(t, c)] += w * seq.coefficients[(j, c)];
            }
        }
    }
    out
}

/// Real part of [`idft`], failing if any imaginary part exceeds `tol` times
/// the largest magnitude.
pub fn idft_real(seq: &DftSequence, tol: f64) -> Result<DMatrix<f64>> {
    let z = idft(seq);
    let scale = z.iter().map(|c| c.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let worst = z.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if worst > tol * scale {
        return Err(HacError::Degenerate(format!(
            "inverse transform is not real: max |imag| = {worst:.3e}"
        )));
    }
    Ok(z.map(|c| c.re))
}

/// Periodogram matrices `I(w_j)`, `j = 0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodogramSequence {
    pub matrices: Vec<CMatrix>,
}

pub fn periodogram(seq: &DftSequence) -> PeriodogramSequence {
    let n = seq.n() as f64;
    let scale = Complex64::new(n / (2.0 * PI), 0.0);
    let matrices = (0..seq.n())
        .map(|j| {
            let col = seq.at(j);
            &col * col.adjoint() * scale
        })
        .collect();
    PeriodogramSequence { matrices }
}

/// Which leave-one-out rule to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LooVariant {
    /// Replace `J(w_j)` by the average of its neighbours (and `J(w_{n-j})`
    /// by the conjugate-symmetric counterpart), with `J(w_n) = J(w_0)`.
    #[default]
    Standard,
    /// As `Standard`, except that for `j` in `{1, n-1}` position 1 takes
    /// `J(w_2)` and position `n-1` takes `J(w_{n-2})`, so the rule never
    /// reads `J(w_0)`.
    Demeaned,
}

/// Positions touched when leaving `j` out, with their replacement values.
fn replacements(
    seq: &DftSequence,
    j: usize,
    variant: LooVariant,
) -> Result<Vec<(usize, DVector<Complex64>)>> {
    let n = seq.n();
    if j == 0 || j >= n {
        return Err(HacError::InvalidParameter(format!(
            "leave-one-out index must satisfy 1 <= j <= n-1 (n = {n}), got {j}"
        )));
    }
    let mirror = n - j;
    let neighbour_avg = |pos: usize| -> DVector<Complex64> {
        let lo = seq.at((pos + n - 1) % n);
        let hi = seq.at((pos + 1) % n);
        (lo + hi) * Complex64::new(0.5, 0.0)
    };
    let edge = variant == LooVariant::Demeaned && (j == 1 || j == n - 1) && n > 2;
    let mut out = Vec::with_capacity(2);
    for pos in [j, mirror] {
        if out.iter().any(|(p, _)| *p == pos) {
            continue;
        }
        let value = if edge {
            if pos == 1 {
                seq.at(2 % n)
            } else {
                seq.at(n - 2)
            }
        } else {
            neighbour_avg(pos)
        };
        out.push((pos, value));
    }
    Ok(out)
}

/// `J^{-j}`: the transform with frequency `j` (and its mirror `n - j`) replaced.
pub fn leave_one_out(seq: &DftSequence, j: usize, variant: LooVariant) -> Result<DftSequence> {
    let mut out = seq.clone();
    for (pos, value) in replacements(seq, j, variant)? {
        out.coefficients.set_row(pos, &value.transpose());
    }
    Ok(out)
}

/// The real leave-`j`-out series `V^{-j}`.
///
/// Only two transform positions differ from `seq`, so instead of a full
/// inverse transform this adds the inverse of the difference to `v`, which
/// must be the series `seq` was computed from.
pub fn leave_one_out_series(
    v: &DMatrix<f64>,
    seq: &DftSequence,
    j: usize,
    variant: LooVariant,
) -> Result<DMatrix<f64>> {
    let (n, k) = v.shape();
    if seq.n() != n || seq.dim() != k {
        return Err(HacError::DimensionMismatch {
            expected: n,
            actual: seq.n(),
        });
    }
    let tw = Twiddles::new(n);
    let mut out = v.clone();
    for (pos, value) in replacements(seq, j, variant)? {
        let delta = value - seq.at(pos);
        for t in 0..n {
            let w = tw.inverse(pos, t);
            for c in 0..k {
                out[(t, c)] += (w * delta[c]).re;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_series(n: usize, k: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, k, |_, _| rng.sample(StandardNormal))
    }

    /// Direct summation with freshly computed exponentials.
    fn dft_oracle(v: &DMatrix<f64>, j: usize) -> Vec<Complex64> {
        let n = v.nrows();
        (0..v.ncols())
            .map(|c| {
                (0..n)
                    .map(|t| {
                        let a = -2.0 * PI * (j * t) as f64 / n as f64;
                        Complex64::from_polar(v[(t, c)], a)
                    })
                    .sum::<Complex64>()
                    / n as f64
            })
            .collect()
    }

    #[test]
    fn constant_series() {
        let v = DMatrix::from_element(8, 2, 3.0);
        let seq = dft(&v).unwrap();
        assert!((seq.matrix()[(0, 0)] - Complex64::new(3.0, 0.0)).norm() < 1e-14);
        for j in 1..8 {
            assert!(seq.at(j).iter().all(|z| z.norm() < 1e-14));
        }
    }

    #[test]
    fn cosine_input() {
        let n = 12;
        let v = DMatrix::from_fn(n, 1, |t, _| (fourier_frequency(1, n) * t as f64).cos());
        let seq = dft(&v).unwrap();
        for j in 0..n {
            let expected = if j == 1 || j == n - 1 { 0.5 } else { 0.0 };
            assert!((seq.matrix()[(j, 0)] - Complex64::new(expected, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn matches_direct_summation() {
        let v = random_series(17, 3, 1);
        let seq = dft(&v).unwrap();
        for j in 0..17 {
            for (c, z) in dft_oracle(&v, j).iter().enumerate() {
                assert!((seq.matrix()[(j, c)] - z).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn round_trip_and_conjugate_symmetry() {
        let v = random_series(50, 4, 2);
        let seq = dft(&v).unwrap();
        for j in 1..50 {
            let a = seq.at(j);
            let b = seq.at(50 - j);
            assert!((a - b.conjugate()).camax() < 1e-14);
        }
        let back = idft_real(&seq, 1e-12).unwrap();
        assert!((back - &v).amax() < 1e-10 * v.amax());
    }

    #[test]
    fn zero_transform_inverts_to_zero() {
        let seq = DftSequence::from_matrix(CMatrix::zeros(6, 2));
        assert!(idft(&seq).iter().all(|z| z.norm() == 0.0));
        assert!(periodogram(&seq).matrices.iter().all(|m| m.iter().all(|z| z.norm() == 0.0)));
    }

    #[test]
    fn impulse_periodogram() {
        let mut v = DMatrix::zeros(4, 1);
        v[(0, 0)] = 1.0;
        let seq = dft(&v).unwrap();
        let per = periodogram(&seq);
        for j in 0..4 {
            assert!((seq.matrix()[(j, 0)] - Complex64::new(0.25, 0.0)).norm() < 1e-15);
            assert!((per.matrices[j][(0, 0)].re - 1.0 / (8.0 * PI)).abs() < 1e-15);
        }
    }

    #[test]
    fn white_noise_periodogram_is_flat() {
        let n = 4000;
        let v = random_series(n, 1, 3);
        let per = periodogram(&dft(&v).unwrap());
        let mean: f64 = per.matrices[1..].iter().map(|m| m[(0, 0)].re).sum::<f64>() / (n - 1) as f64;
        let target = 1.0 / (2.0 * PI);
        // I(w_j) ~ f * Exp(1): sd of the mean is f / sqrt(n/2) after pairing mirrors
        assert!((mean - target).abs() < 4.0 * target / ((n / 2) as f64).sqrt());
    }

    #[test]
    fn periodogram_trace_and_psd() {
        let v = random_series(21, 3, 4);
        let seq = dft(&v).unwrap();
        let per = periodogram(&seq);
        for (j, m) in per.matrices.iter().enumerate() {
            let tr: f64 = (0..3).map(|i| m[(i, i)].re).sum();
            let norm2: f64 = seq.at(j).iter().map(|z| z.norm_sqr()).sum();
            assert!((tr - 21.0 / (2.0 * PI) * norm2).abs() < 1e-12 * tr.max(1.0));
            assert!((m - m.adjoint()).camax() < 1e-14);
            assert!(crate::linalg::min_hermitian_eigenvalue(m) >= -1e-12 * tr);
        }
    }

    #[test]
    fn parseval() {
        let v = random_series(33, 2, 5);
        let seq = dft(&v).unwrap();
        let time: f64 = v.iter().map(|x| x * x).sum();
        let freq: f64 = seq.matrix().iter().map(|z| z.norm_sqr()).sum::<f64>() * 33.0;
        assert!((time - freq).abs() < 1e-10 * time);
    }

    #[test]
    fn leave_one_out_touches_only_j_and_mirror() {
        let v = random_series(20, 2, 6);
        let seq = dft(&v).unwrap();
        for j in 1..20 {
            let loo = leave_one_out(&seq, j, LooVariant::Standard).unwrap();
            let changed: Vec<usize> = (0..20)
                .filter(|&k| (loo.at(k) - seq.at(k)).camax() > 0.0)
                .collect();
            let expected: Vec<usize> = if j == 10 { vec![10] } else { let mut e = vec![j, 20 - j]; e.sort(); e };
            assert_eq!(changed, expected, "j = {j}");
            let back = idft(&loo);
            assert!(back.iter().all(|z| z.im.abs() < 1e-10));
            let fast = leave_one_out_series(&v, &seq, j, LooVariant::Standard).unwrap();
            assert!((back.map(|z| z.re) - fast).amax() < 1e-12);
        }
    }

    #[test]
    fn first_frequency_uses_zero_mean() {
        let mut v = random_series(16, 2, 7);
        for mut col in v.column_iter_mut() {
            let m = col.mean();
            col.add_scalar_mut(-m);
        }
        let seq = dft(&v).unwrap();
        let loo = leave_one_out(&seq, 1, LooVariant::Standard).unwrap();
        let expected = seq.at(2) * Complex64::new(0.5, 0.0);
        assert!((loo.at(1) - expected).camax() < 1e-15);
    }

    #[test]
    fn demeaned_variant_edges() {
        let v = random_series(16, 2, 8);
        let seq = dft(&v).unwrap();
        for j in [1, 15] {
            let loo = leave_one_out(&seq, j, LooVariant::Demeaned).unwrap();
            assert_eq!(loo.at(1), seq.at(2));
            assert_eq!(loo.at(15), seq.at(14));
            assert_eq!(loo.at(0), seq.at(0));
            let fast = leave_one_out_series(&v, &seq, j, LooVariant::Demeaned).unwrap();
            assert!((idft_real(&loo, 1e-10).unwrap() - fast).amax() < 1e-12);
        }
        let inner = leave_one_out(&seq, 4, LooVariant::Demeaned).unwrap();
        let standard = leave_one_out(&seq, 4, LooVariant::Standard).unwrap();
        assert_eq!(inner, standard);
    }

    #[test]
    fn frequency_zero_is_never_left_out() {
        let seq = dft(&random_series(8, 1, 9)).unwrap();
        assert!(leave_one_out(&seq, 0, LooVariant::Standard).is_err());
        assert!(leave_one_out(&seq, 8, LooVariant::Standard).is_err());
    }
}
