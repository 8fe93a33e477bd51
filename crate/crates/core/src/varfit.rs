//! Prewhitening VAR fits (least squares and multivariate Burg), companion
//! matrices, the singular-value clamp used by Andrews–Monahan prewhitening,
//! and the closed forms for the VAR(1) structure of `V_t = u_t X_t` under
//! AR(1) regressors and errors.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{HacError, Result};
use crate::linalg::{self, CMatrix};

pub use crate::linalg::spectral_radius;

/// Singular-value threshold of the eigen adjustment rule.
pub const ADJUSTMENT_THRESHOLD: f64 = 0.97;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarMethod {
    Ols,
    Burg,
}

impl VarMethod {
    pub fn name(&self) -> &'static str {
        match self {
            VarMethod::Ols => "ols",
            VarMethod::Burg => "burg",
        }
    }
}

/// A fitted prewhitening VAR(q) without intercept:
/// `V_t = sum_k A_k V_{t-k} + residual_t`, `t = q..n-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarModel {
    pub coefficients: Vec<DMatrix<f64>>,
    /// Rows correspond to `t = q..n-1`.
    pub residuals: DMatrix<f64>,
    pub method: VarMethod,
    pub innovation_cov: DMatrix<f64>,
}

impl VarModel {
    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn dim(&self) -> usize {
        self.residuals.ncols()
    }

    pub fn companion(&self) -> CompanionMatrix {
        companion(&self.coefficients)
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        spectral_radius(&self.companion().matrix)
    }

    /// Replace the coefficients (e.g. by their adjusted version) and
    /// recompute the residuals on `v`.
    pub fn with_coefficients(&self, v: &DMatrix<f64>, coefficients: Vec<DMatrix<f64>>) -> Result<Self> {
        let residuals = var_residuals(v, &coefficients)?;
        let innovation_cov = residual_covariance(&residuals);
        Ok(Self {
            coefficients,
            residuals,
            method: self.method,
            innovation_cov,
        })
    }
}

/// `I - sum_k A_k z^k` evaluated at `z = exp(-i omega)`.
pub fn var_polynomial(coefficients: &[DMatrix<f64>], dim: usize, omega: f64) -> CMatrix {
    let mut out = CMatrix::identity(dim, dim);
    for (idx, a) in coefficients.iter().enumerate() {
        let z = Complex64::from_polar(1.0, -omega * (idx + 1) as f64);
        out -= linalg::to_complex(a) * z;
    }
    out
}

/// `V_t - sum_k A_k V_{t-k}` for `t = q..n-1`.
pub fn var_residuals(v: &DMatrix<f64>, coefficients: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    let (n, k) = v.shape();
    let q = coefficients.len();
    if q >= n {
        return Err(HacError::InsufficientData {
            required: q,
            actual: n,
        });
    }
    for a in coefficients {
        if a.shape() != (k, k) {
            return Err(HacError::DimensionMismatch {
                expected: k,
                actual: a.nrows(),
            });
        }
    }
    let mut out = v.rows(q, n - q).into_owned();
    for (idx, a) in coefficients.iter().enumerate() {
        let lagged = v.rows(q - idx - 1, n - q);
        out -= lagged * a.transpose();
    }
    Ok(out)
}

fn residual_covariance(residuals: &DMatrix<f64>) -> DMatrix<f64> {
    let mut s = residuals.transpose() * residuals / residuals.nrows().max(1) as f64;
    linalg::symmetrize(&mut s);
    s
}

fn check_fit_input(v: &DMatrix<f64>, q: usize) -> Result<()> {
    if q == 0 {
        return Err(HacError::InvalidParameter("VAR order must be at least 1".into()));
    }
    let (n, k) = v.shape();
    let required = k * q + q;
    if n <= required {
        return Err(HacError::InsufficientData {
            required,
            actual: n,
        });
    }
    linalg::check_finite(v, "VAR input")
}

/// Multivariate least squares without intercept.
pub fn ols_var(v: &DMatrix<f64>, q: usize) -> Result<VarModel> {
    check_fit_input(v, q)?;
    let (n, k) = v.shape();
    let rows = n - q;
    let y = v.rows(q, rows);
    let mut z = DMatrix::<f64>::zeros(rows, k * q);
    for lag in 1..=q {
        z.view_mut((0, (lag - 1) * k), (rows, k))
            .copy_from(&v.rows(q - lag, rows));
    }
    let mut ztz = z.transpose() * &z;
    linalg::symmetrize(&mut ztz);
    let chol = linalg::cholesky(&ztz, "VAR regressor cross-product")?;
    let b = chol.solve(&(z.transpose() * y));
    let coefficients: Vec<DMatrix<f64>> = (0..q)
        .map(|lag| b.rows(lag * k, k).transpose())
        .collect();
    if coefficients.iter().any(|a| a.iter().any(|x| !x.is_finite())) {
        return Err(HacError::NonFinite("OLS VAR coefficients"));
    }
    let residuals = var_residuals(v, &coefficients)?;
    let innovation_cov = residual_covariance(&residuals);
    Ok(VarModel {
        coefficients,
        residuals,
        method: VarMethod::Ols,
        innovation_cov,
    })
}

/// Solve `a p + p b = rhs` for symmetric positive semidefinite `a`, `b`.
fn solve_sylvester_symmetric(a: &DMatrix<f64>, b: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let ea = SymmetricEigen::new(a.clone());
    let eb = SymmetricEigen::new(b.clone());
    let mut p = ea.eigenvectors.transpose() * rhs * &eb.eigenvectors;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let denom = ea.eigenvalues[i] + eb.eigenvalues[j];
            if denom <= 0.0 {
                return Err(HacError::Degenerate(
                    "prediction errors vanish in the Burg recursion".into(),
                ));
            }
            p[(i, j)] /= denom;
        }
    }
    Ok(&ea.eigenvectors * p * eb.eigenvectors.transpose())
}

fn lower_inverse(l: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = l.nrows();
    l.solve_lower_triangular(&DMatrix::identity(k, k))
        .ok_or(HacError::Singular {
            context: "Burg innovation covariance",
            condition: f64::INFINITY,
        })
}

/// Multivariate Burg fit via the Whittle (Levinson) recursion.
///
/// At stage `p` the forward errors `f_t` and lagged backward errors
/// `b_{t-1}` are whitened by the Cholesky factors of the current forward
/// and backward innovation covariances, `a_t = L_f^{-1} f_t`,
/// `c_t = L_b^{-1} b_{t-1}`. The normalized partial autocorrelation `P`
/// minimizes the sum of the whitened forward and backward prediction
/// error sums of squares under the Whittle relation between forward and
/// backward coefficients, i.e. it solves the Sylvester equation
///
/// ```text
/// (sum a a') P + P (sum c c') = 2 sum a c'
/// ```
///
/// Cauchy–Schwarz gives `||P||_2 <= 1` (strict unless the two error
/// sequences are exactly collinear), so each stage yields positive
/// definite innovation covariances and the fitted VAR is stationary.
pub fn burg_var(v: &DMatrix<f64>, q: usize) -> Result<VarModel> {
    check_fit_input(v, q)?;
    let (n, k) = v.shape();
    let mut gamma0 = v.transpose() * v / n as f64;
    linalg::symmetrize(&mut gamma0);
    if gamma0.iter().all(|x| *x == 0.0) {
        return Err(HacError::Degenerate("Burg fit on an all-zero series".into()));
    }
    let mut forward_cov = gamma0.clone();
    let mut backward_cov = gamma0;
    let mut forward_err = v.clone();
    let mut backward_err = v.clone();
    let mut fwd: Vec<DMatrix<f64>> = Vec::with_capacity(q);
    let mut bwd: Vec<DMatrix<f64>> = Vec::with_capacity(q);
    let eye = DMatrix::<f64>::identity(k, k);

    for p in 1..=q {
        let rows = n - p;
        let f = forward_err.rows(p, rows).into_owned();
        let b = backward_err.rows(p - 1, rows).into_owned();

        let lf = linalg::cholesky(&forward_cov, "Burg forward innovation covariance")?.l();
        let lb = linalg::cholesky(&backward_cov, "Burg backward innovation covariance")?.l();
        let lf_inv = lower_inverse(&lf)?;
        let lb_inv = lower_inverse(&lb)?;
        let a = &f * lf_inv.transpose();
        let c = &b * lb_inv.transpose();
        let mut saa = a.transpose() * &a;
        let mut scc = c.transpose() * &c;
        linalg::symmetrize(&mut saa);
        linalg::symmetrize(&mut scc);
        let sac = a.transpose() * &c * 2.0;
        let partial = solve_sylvester_symmetric(&saa, &scc, &sac)?;

        let phi = &lf * &partial * &lb_inv;
        let phi_back = &lb * partial.transpose() * &lf_inv;

        let mut new_fwd = Vec::with_capacity(p);
        let mut new_bwd = Vec::with_capacity(p);
        for i in 1..p {
            new_fwd.push(&fwd[i - 1] - &phi * &bwd[p - i - 1]);
            new_bwd.push(&bwd[i - 1] - &phi_back * &fwd[p - i - 1]);
        }
        new_fwd.push(phi.clone());
        new_bwd.push(phi_back.clone());
        fwd = new_fwd;
        bwd = new_bwd;

        forward_cov = &lf * (&eye - &partial * partial.transpose()) * lf.transpose();
        backward_cov = &lb * (&eye - partial.transpose() * &partial) * lb.transpose();
        linalg::symmetrize(&mut forward_cov);
        linalg::symmetrize(&mut backward_cov);

        let new_f = &f - &b * phi.transpose();
        let new_b = &b - &f * phi_back.transpose();
        forward_err.rows_mut(p, rows).copy_from(&new_f);
        backward_err.rows_mut(p, rows).copy_from(&new_b);
    }

    if fwd.iter().any(|a| a.iter().any(|x| !x.is_finite())) {
        return Err(HacError::NonFinite("Burg VAR coefficients"));
    }
    let residuals = var_residuals(v, &fwd)?;
    Ok(VarModel {
        coefficients: fwd,
        residuals,
        method: VarMethod::Burg,
        innovation_cov: forward_cov,
    })
}

pub fn fit_var(v: &DMatrix<f64>, q: usize, method: VarMethod) -> Result<VarModel> {
    match method {
        VarMethod::Ols => ols_var(v, q),
        VarMethod::Burg => burg_var(v, q),
    }
}

/// Block companion matrix: `[A_1 .. A_q]` in the first block row,
/// identity blocks on the block subdiagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CompanionMatrix {
    pub matrix: DMatrix<f64>,
}

pub fn companion(coefficients: &[DMatrix<f64>]) -> CompanionMatrix {
    let q = coefficients.len();
    let k = coefficients.first().map_or(0, |a| a.nrows());
    let mut b = DMatrix::<f64>::zeros(k * q, k * q);
    for (idx, a) in coefficients.iter().enumerate() {
        b.view_mut((0, idx * k), (k, k)).copy_from(a);
    }
    for i in 1..q {
        b.view_mut((i * k, (i - 1) * k), (k, k))
            .copy_from(&DMatrix::identity(k, k));
    }
    CompanionMatrix { matrix: b }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdjustmentReport {
    /// Singular values of the input, descending.
    pub singular_values: Vec<f64>,
    pub triggered: bool,
    pub adjusted: DMatrix<f64>,
    /// `||A_adj - A||_{1,1} / ||A||_{1,1}`.
    pub distortion: f64,
    pub original_eigen_magnitudes: Vec<f64>,
    pub adjusted_eigen_magnitudes: Vec<f64>,
}

/// Clamp the singular values of `a` at `threshold`: with `A = U S V'`,
/// return `U min(S, threshold) V'`. Untouched when no singular value
/// exceeds the threshold.
pub fn eigen_adjust(a: &DMatrix<f64>, threshold: f64) -> Result<AdjustmentReport> {
    if !a.is_square() {
        return Err(HacError::DimensionMismatch {
            expected: a.nrows(),
            actual: a.ncols(),
        });
    }
    linalg::check_finite(a, "eigen adjustment input")?;
    let svd = linalg::svd(a)?;
    let singular_values = svd.s.clone();
    let triggered = singular_values.iter().any(|s| *s > threshold);
    let original_eigen_magnitudes = linalg::eigen_magnitudes(a)?;
    if !triggered {
        return Ok(AdjustmentReport {
            singular_values,
            triggered,
            adjusted: a.clone(),
            distortion: 0.0,
            adjusted_eigen_magnitudes: original_eigen_magnitudes.clone(),
            original_eigen_magnitudes,
        });
    }
    let clamped: Vec<f64> = svd.s.iter().map(|s| s.min(threshold)).collect();
    let adjusted = svd.reconstruct(&clamped);
    let base = linalg::norm_l11(a);
    let distortion = if base > 0.0 {
        linalg::norm_l11(&(&adjusted - a)) / base
    } else {
        0.0
    };
    let adjusted_eigen_magnitudes = linalg::eigen_magnitudes(&adjusted)?;
    Ok(AdjustmentReport {
        singular_values,
        triggered,
        adjusted,
        distortion,
        original_eigen_magnitudes,
        adjusted_eigen_magnitudes,
    })
}

/// VAR(1) coefficient matrix of `V_t = u_t X_t` when every regressor is
/// `x = alpha + phi x_{-1} + e` and `u = phi u_{-1} + e~`:
/// `[[phi, 0], [alpha phi 1_d, phi^2 I_d]]`.
pub fn theoretical_a(phi: f64, alpha: f64, d: usize) -> Result<DMatrix<f64>> {
    if d == 0 {
        return Err(HacError::InvalidParameter("d must be at least 1".into()));
    }
    if !(phi.abs() < 1.0) {
        return Err(HacError::InvalidParameter(format!("|phi| must be below 1, got {phi}")));
    }
    let mut a = DMatrix::<f64>::zeros(d + 1, d + 1);
    a[(0, 0)] = phi;
    for i in 1..=d {
        a[(i, 0)] = alpha * phi;
        a[(i, i)] = phi * phi;
    }
    Ok(a)
}

/// Closed-form singular values of [`theoretical_a`], descending:
/// `|s1|, |s2|` with `s = (phi/2) sqrt(alpha^2 d + (phi+1)^2) +- (phi/2) sqrt(alpha^2 d + (phi-1)^2)`,
/// plus `phi^2` repeated `d - 1` times.
pub fn theoretical_singular_values(phi: f64, alpha: f64, d: usize) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(HacError::InvalidParameter("d must be at least 1".into()));
    }
    let dd = d as f64;
    let plus = 0.5 * phi * (alpha * alpha * dd + (phi + 1.0).powi(2)).sqrt();
    let minus = 0.5 * phi * (alpha * alpha * dd + (phi - 1.0).powi(2)).sqrt();
    let mut out = vec![(plus + minus).abs(), (plus - minus).abs()];
    out.extend(std::iter::repeat_n(phi * phi, d - 1));
    out.sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}

/// Eigenvalue magnitudes of [`theoretical_a`], descending: `|phi|` once and
/// `phi^2` with multiplicity `d`.
pub fn theoretical_eigen_magnitudes(phi: f64, d: usize) -> Vec<f64> {
    let mut out = vec![phi.abs()];
    out.extend(std::iter::repeat_n(phi * phi, d));
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::{ArSpec, RngStreams};
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn simulate_var1(a: &DMatrix<f64>, n: usize, noise: f64, seed: u64) -> DMatrix<f64> {
        let k = a.nrows();
        let mut rng = RngStreams::new(seed).stream(0, 0);
        let mut v = DMatrix::<f64>::zeros(n, k);
        let mut state = nalgebra::DVector::<f64>::from_fn(k, |_, _| rng.sample(StandardNormal));
        for t in 0..n + 200 {
            let e = nalgebra::DVector::<f64>::from_fn(k, |_, _| noise * rng.sample::<f64, _>(StandardNormal));
            state = a * &state + e;
            if t >= 200 {
                v.set_row(t - 200, &state.transpose());
            }
        }
        v
    }

    #[test]
    fn ols_recovers_noiseless_var1() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, -0.2, 0.3]);
        let mut v = DMatrix::<f64>::zeros(30, 2);
        v[(0, 0)] = 1.0;
        v[(0, 1)] = -0.5;
        v[(1, 0)] = 0.2;
        v[(1, 1)] = 0.7;
        for t in 2..30 {
            let prev = v.row(t - 1).transpose();
            let next = &a * prev;
            v.set_row(t, &next.transpose());
        }
        // two free initial rows make the noiseless system identifiable
        let v = v.rows(1, 29).into_owned();
        let fit = ols_var(&v, 1).unwrap();
        assert!((&fit.coefficients[0] - &a).amax() < 1e-10);
        assert!(fit.residuals.amax() < 1e-10);
    }

    #[test]
    fn ols_on_white_noise_is_near_zero() {
        let n = 100_000;
        let v = simulate_var1(&DMatrix::zeros(3, 3), n, 1.0, 4);
        let fit = ols_var(&v, 1).unwrap();
        let se = 1.0 / (n as f64).sqrt();
        assert!(fit.coefficients[0].amax() < 4.0 * se, "{}", fit.coefficients[0]);
    }

    #[test]
    fn burg_univariate_ar1() {
        let mut rng = RngStreams::new(12).stream(0, 0);
        let x = crate::dgp::simulate_ar(&ArSpec::ar1(0.0, 0.9), 10_000, &mut rng).unwrap();
        let v = DMatrix::from_column_slice(x.len(), 1, &x);
        let fit = burg_var(&v, 1).unwrap();
        assert!((fit.coefficients[0][(0, 0)] - 0.9).abs() < 0.05);
        // univariate Burg reflection: 2 sum f b / (sum f^2 + sum b^2)
        let num: f64 = (1..x.len()).map(|t| x[t] * x[t - 1]).sum::<f64>() * 2.0;
        let den: f64 = (1..x.len()).map(|t| x[t] * x[t] + x[t - 1] * x[t - 1]).sum();
        assert!((fit.coefficients[0][(0, 0)] - num / den).abs() < 1e-12);
    }

    #[test]
    fn burg_matches_ols_on_long_var2() {
        let a1 = DMatrix::from_row_slice(2, 2, &[0.4, 0.1, 0.0, 0.3]);
        let a2 = DMatrix::from_row_slice(2, 2, &[0.2, 0.0, 0.1, 0.2]);
        let k = 2;
        let n = 50_000;
        let mut rng = RngStreams::new(21).stream(0, 0);
        let mut v = DMatrix::<f64>::zeros(n, k);
        for t in 2..n {
            let e = nalgebra::DVector::<f64>::from_fn(k, |_, _| rng.sample(StandardNormal));
            let next = &a1 * v.row(t - 1).transpose() + &a2 * v.row(t - 2).transpose() + e;
            v.set_row(t, &next.transpose());
        }
        let burg = burg_var(&v, 2).unwrap();
        let ols = ols_var(&v, 2).unwrap();
        for i in 0..2 {
            assert!((&burg.coefficients[i] - &ols.coefficients[i]).amax() < 0.02);
        }
        assert!((&burg.coefficients[0] - &a1).amax() < 0.05);
        assert!((&burg.coefficients[1] - &a2).amax() < 0.05);
    }

    #[test]
    fn burg_is_stationary_where_ols_is_not() {
        // a short random walk: OLS happily fits a unit root
        let mut rng = RngStreams::new(31).stream(0, 0);
        for _ in 0..50 {
            let mut v = DMatrix::<f64>::zeros(40, 2);
            for t in 1..40 {
                for c in 0..2 {
                    v[(t, c)] = v[(t - 1, c)] + rng.sample::<f64, _>(StandardNormal);
                }
            }
            for q in 1..=3 {
                let burg = burg_var(&v, q).unwrap();
                assert!(burg.spectral_radius().unwrap() < 1.0);
            }
        }
    }

    #[test]
    fn burg_rejects_zero_input() {
        let v = DMatrix::<f64>::zeros(20, 2);
        assert!(matches!(burg_var(&v, 1), Err(HacError::Degenerate(_))));
    }

    #[test]
    fn fits_are_scale_invariant() {
        let a = DMatrix::from_row_slice(2, 2, &[0.6, 0.0, 0.3, 0.4]);
        let v = simulate_var1(&a, 300, 1.0, 5);
        for method in [VarMethod::Ols, VarMethod::Burg] {
            let base = fit_var(&v, 2, method).unwrap();
            let scaled = fit_var(&(&v * 7.5), 2, method).unwrap();
            for (x, y) in base.coefficients.iter().zip(&scaled.coefficients) {
                assert!((x - y).amax() < 1e-10);
            }
            assert!((&base.residuals * 7.5 - &scaled.residuals).amax() < 1e-9);
        }
    }

    #[test]
    fn order_precondition() {
        let v = DMatrix::<f64>::from_fn(9, 4, |i, j| ((i * 7 + j * 3) % 5) as f64);
        assert!(matches!(ols_var(&v, 2), Err(HacError::InsufficientData { .. })));
        assert!(ols_var(&v, 0).is_err());
    }

    #[test]
    fn companion_layout() {
        let a1 = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let a2 = DMatrix::from_row_slice(2, 2, &[5.0, 6.0, 7.0, 8.0]);
        assert_eq!(companion(std::slice::from_ref(&a1)).matrix, a1);
        let b = companion(&[a1, a2]).matrix;
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 2.0, 5.0, 6.0, //
                3.0, 4.0, 7.0, 8.0, //
                1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0,
            ],
        );
        assert_eq!(b, expected);
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.3, -0.7]));
        let mut mags = linalg::eigen_magnitudes(&diag).unwrap();
        mags.sort_by(|a, b| a.total_cmp(b));
        assert!((mags[0] - 0.3).abs() < 1e-14 && (mags[1] - 0.7).abs() < 1e-14);
    }

    /// Roots of the characteristic polynomial by Durand–Kerner, independent
    /// of the Schur-based eigen routine.
    fn poly_roots(coeffs_high_first: &[f64]) -> Vec<Complex64> {
        let deg = coeffs_high_first.len() - 1;
        let lead = coeffs_high_first[0];
        let c: Vec<f64> = coeffs_high_first.iter().map(|x| x / lead).collect();
        let eval = |z: Complex64| c.iter().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a);
        let seed = Complex64::new(0.4, 0.9);
        let mut roots: Vec<Complex64> = (0..deg).map(|i| seed.powu(i as u32)).collect();
        for _ in 0..2000 {
            let prev = roots.clone();
            for i in 0..deg {
                let mut denom = Complex64::new(1.0, 0.0);
                for j in 0..deg {
                    if i != j {
                        denom *= roots[i] - roots[j];
                    }
                }
                let step = eval(roots[i]) / denom;
                roots[i] -= step;
            }
            if roots.iter().zip(&prev).all(|(a, b)| (a - b).norm() < 1e-15) {
                break;
            }
        }
        roots
    }

    /// Characteristic polynomial coefficients via Faddeev–LeVerrier.
    fn char_poly(m: &DMatrix<f64>) -> Vec<f64> {
        let n = m.nrows();
        let mut coeffs = vec![1.0];
        let mut mk = DMatrix::<f64>::zeros(n, n);
        let eye = DMatrix::<f64>::identity(n, n);
        let mut c_prev = 1.0;
        for k in 1..=n {
            mk = m * &mk + &eye * c_prev;
            let c = -(m * &mk).trace() / k as f64;
            coeffs.push(c);
            c_prev = c;
        }
        coeffs
    }

    #[test]
    fn spectral_radius_matches_polynomial_roots() {
        let mut rng = RngStreams::new(77).stream(0, 0);
        for _ in 0..20 {
            let m = DMatrix::<f64>::from_fn(5, 5, |_, _| rng.sample::<f64, _>(StandardNormal) * 0.5);
            let roots = poly_roots(&char_poly(&m));
            let oracle = roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let got = spectral_radius(&m).unwrap();
            assert!((got - oracle).abs() < 1e-8, "{got} vs {oracle}");
        }
    }

    #[test]
    fn adjustment_examples() {
        let small = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.0, 0.3]);
        let rep = eigen_adjust(&small, ADJUSTMENT_THRESHOLD).unwrap();
        assert!(!rep.triggered);
        assert_eq!(rep.adjusted, small);
        assert_eq!(rep.distortion, 0.0);

        let diag = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let rep = eigen_adjust(&diag, ADJUSTMENT_THRESHOLD).unwrap();
        assert!(rep.triggered);
        let expected = DMatrix::from_row_slice(2, 2, &[0.97, 0.0, 0.0, 0.5]);
        assert!((&rep.adjusted - expected).amax() < 1e-14);
    }

    #[test]
    fn adjustment_is_idempotent_and_clamps() {
        let mut rng = RngStreams::new(9).stream(0, 0);
        for _ in 0..200 {
            let a = DMatrix::<f64>::from_fn(3, 3, |_, _| rng.sample::<f64, _>(StandardNormal));
            let once = eigen_adjust(&a, 0.97).unwrap();
            let sv = linalg::singular_values(&once.adjusted).unwrap();
            assert!(sv[0] <= 0.97 + 1e-12);
            assert!(once.adjusted_eigen_magnitudes[0] <= 0.97 + 1e-12);
            let twice = eigen_adjust(&once.adjusted, 0.97 + 1e-9).unwrap();
            assert!(!twice.triggered);
            assert_eq!(twice.adjusted, once.adjusted);
        }
    }

    #[test]
    fn theoretical_a_examples() {
        let a = theoretical_a(0.5, 0.0, 1).unwrap();
        assert_eq!(a, DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.25]));
        assert!(theoretical_a(0.0, 2.0, 3).unwrap().iter().all(|x| *x == 0.0));
        let a = theoretical_a(0.5, 2.0, 1).unwrap();
        assert_eq!(a, DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 1.0, 0.25]));
        assert!((spectral_radius(&theoretical_a(0.9, 2.0, 1).unwrap()).unwrap() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn theoretical_singular_values_examples() {
        let sv = theoretical_singular_values(0.3, 2.0, 1).unwrap();
        assert!((sv[0] - 0.68).abs() < 0.005 && (sv[1] - 0.04).abs() < 0.005);
        let sv = theoretical_singular_values(0.6, 0.0, 1).unwrap();
        assert!((sv[0] - 0.6).abs() < 1e-15 && (sv[1] - 0.36).abs() < 1e-15);
        let sv = theoretical_singular_values(0.9, 2.0, 1).unwrap();
        let numeric = linalg::singular_values(&theoretical_a(0.9, 2.0, 1).unwrap()).unwrap();
        assert!((sv[0] - 2.14).abs() < 0.005 && (sv[1] - 0.34).abs() < 0.005);
        for (a, b) in sv.iter().zip(&numeric) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn largest_singular_value_grows_with_alpha() {
        for phi in [0.1, 0.3, 0.5, 0.9, -0.6] {
            let mut prev = 0.0;
            for i in 0..50 {
                let alpha = i as f64 * 0.2;
                let s = theoretical_singular_values(phi, alpha, 2).unwrap()[0];
                assert!(s >= prev - 1e-15);
                prev = s;
            }
        }
    }
}
