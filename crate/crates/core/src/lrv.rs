//! Kernel spectral density and long-run variance estimators, with optional
//! VAR prewhitening, and the AR(1) plug-in bandwidth for the QS kernel.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{HacError, Result};
use crate::linalg::{self, CMatrix};
use crate::regress::{EstimatorTag, HacEstimate, MomentSeries};
use crate::varfit::{self, AdjustmentReport, VarMethod, VarModel, ADJUSTMENT_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kernel {
    Parzen,
    Qs,
}

impl Kernel {
    pub fn weight(&self, x: f64) -> f64 {
        match self {
            Kernel::Parzen => parzen(x),
            Kernel::Qs => qs(x),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Parzen => "parzen",
            Kernel::Qs => "qs",
        }
    }
}

pub fn parzen(x: f64) -> f64 {
    let a = x.abs();
    if a <= 0.5 {
        1.0 - 6.0 * a * a + 6.0 * a * a * a
    } else if a <= 1.0 {
        2.0 * (1.0 - a).powi(3)
    } else {
        0.0
    }
}

/// Quadratic spectral kernel.
pub fn qs(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let z = 6.0 * PI * x / 5.0;
    if z.abs() < 1e-4 {
        // series of the bracket: z^2/3 - z^4/30
        let z2 = z * z;
        return 25.0 / (12.0 * PI * PI * x * x) * (z2 / 3.0 - z2 * z2 / 30.0);
    }
    25.0 / (12.0 * PI * PI * x * x) * (z.sin() / z - z.cos())
}

/// `(1/n) sum_{t=r}^{n-1} V_t V_{t-r}'`, and its transpose for negative lags.
pub fn sample_autocov(v: &DMatrix<f64>, r: i64) -> Result<DMatrix<f64>> {
    let n = v.nrows();
    let lag = r.unsigned_abs() as usize;
    if lag >= n {
        return Err(HacError::InvalidParameter(format!(
            "lag {r} out of range for {n} observations"
        )));
    }
    let g = autocov_with_divisor(v, lag, n);
    Ok(if r < 0 { g.transpose() } else { g })
}

fn autocov_with_divisor(e: &DMatrix<f64>, lag: usize, divisor: usize) -> DMatrix<f64> {
    let rows = e.nrows() - lag;
    let mut g = e.rows(lag, rows).transpose() * e.rows(0, rows);
    g /= divisor as f64;
    g
}

/// Autocovariances `Gamma(0..=max_lag)` of `e` with a fixed divisor.
pub fn autocovariances(e: &DMatrix<f64>, max_lag: usize, divisor: usize) -> Vec<DMatrix<f64>> {
    let max_lag = max_lag.min(e.nrows().saturating_sub(1));
    (0..=max_lag)
        .map(|r| {
            let mut g = autocov_with_divisor(e, r, divisor);
            if r == 0 {
                linalg::symmetrize(&mut g);
            }
            g
        })
        .collect()
}

/// A spectral density matrix estimate at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMatrix {
    pub f: CMatrix,
    pub omega: f64,
}

impl SpectralMatrix {
    /// `2 pi Re f`, symmetrized. Equal to the long-run variance at `omega = 0`.
    pub fn long_run_variance(&self) -> DMatrix<f64> {
        let mut s = self.f.map(|z| z.re) * (2.0 * PI);
        linalg::symmetrize(&mut s);
        s
    }
}

/// `(factor / 2 pi) sum_r k(r/m) Gamma(r) e^{-i omega r}` from precomputed
/// nonnegative-lag autocovariances.
pub fn spectrum_from_autocov(
    gammas: &[DMatrix<f64>],
    kernel: Kernel,
    m: f64,
    omega: f64,
    factor: f64,
) -> Result<SpectralMatrix> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(HacError::InvalidParameter(format!("bandwidth must be positive, got {m}")));
    }
    let g0 = gammas
        .first()
        .ok_or_else(|| HacError::InvalidParameter("no autocovariances supplied".into()))?;
    let k = g0.nrows();
    let mut re = g0.clone();
    let mut im = DMatrix::<f64>::zeros(k, k);
    for (r, g) in gammas.iter().enumerate().skip(1) {
        let w = kernel.weight(r as f64 / m);
        if w == 0.0 {
            continue;
        }
        let (s, c) = (omega * r as f64).sin_cos();
        let gt = g.transpose();
        re += (g + &gt) * (w * c);
        if s != 0.0 {
            im -= (g - &gt) * (w * s);
        }
    }
    let scale = factor / (2.0 * PI);
    let f = CMatrix::from_fn(k, k, |i, j| Complex64::new(re[(i, j)], im[(i, j)]) * scale);
    let mut out = SpectralMatrix { f, omega };
    linalg::hermitianize(&mut out.f);
    Ok(out)
}

fn dof_factor(n: usize, d: usize) -> Result<f64> {
    if n <= d + 1 {
        return Err(HacError::InsufficientData {
            required: d + 2,
            actual: n,
        });
    }
    Ok(n as f64 / (n - d - 1) as f64)
}

fn lags_needed(kernel: Kernel, m: f64, rows: usize) -> usize {
    let all = rows.saturating_sub(1);
    match kernel {
        // k(r/m) > 0 iff r < m
        Kernel::Parzen => {
            let below = if m.fract() == 0.0 { m - 1.0 } else { m.floor() };
            if below >= all as f64 {
                all
            } else {
                below.max(0.0) as usize
            }
        }
        Kernel::Qs => all,
    }
}

/// Residual-series spectrum with the autocovariance divisor and degrees of
/// freedom correction taken from the original sample size `n_total`.
fn smoothed_spectrum(
    e: &DMatrix<f64>,
    kernel: Kernel,
    m: f64,
    omega: f64,
    n_total: usize,
    d: usize,
) -> Result<SpectralMatrix> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(HacError::InvalidParameter(format!("bandwidth must be positive, got {m}")));
    }
    let factor = dof_factor(n_total, d)?;
    let gammas = autocovariances(e, lags_needed(kernel, m, e.nrows()), n_total);
    spectrum_from_autocov(&gammas, kernel, m, omega, factor)
}

/// Kernel spectral density estimate of `v` at `omega` with the
/// `n / (n - d - 1)` small-sample factor.
pub fn kernel_spectrum(v: &DMatrix<f64>, kernel: Kernel, m: f64, omega: f64, d: usize) -> Result<SpectralMatrix> {
    linalg::check_finite(v, "kernel spectrum input")?;
    smoothed_spectrum(v, kernel, m, omega, v.nrows(), d)
}

/// `(I - sum_k A_k e^{-i omega k})^{-1}`.
pub fn recoloring_filter(coefficients: &[DMatrix<f64>], dim: usize, omega: f64) -> Result<CMatrix> {
    let poly = varfit::var_polynomial(coefficients, dim, omega);
    match poly.clone().try_inverse() {
        Some(inv) if inv.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => Ok(inv),
        _ => {
            // report the companion eigenvalue closest to e^{i omega}
            let comp = varfit::companion(coefficients).matrix;
            let target = Complex64::from_polar(1.0, omega);
            let eig = linalg::eigenvalues(&comp)?;
            let worst = eig
                .iter()
                .copied()
                .min_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()))
                .unwrap_or(target);
            Err(HacError::SingularFilter {
                eigenvalue_re: worst.re,
                eigenvalue_im: worst.im,
            })
        }
    }
}

/// How the smoothing bandwidth of a (prewhitened) estimate is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Fixed(f64),
    /// AR(1) plug-in for the QS kernel computed on the series being smoothed.
    PluginQs,
}

#[derive(Debug, Clone)]
pub struct PrewhitenedSpectrum {
    pub spectrum: SpectralMatrix,
    /// Filter actually used (after adjustment, if any).
    pub model: VarModel,
    pub adjustment: Option<AdjustmentReport>,
    pub bandwidth: f64,
}

/// Fit a VAR(q), optionally clamp its singular values (q = 1 only), smooth
/// the residuals with `kernel` and recolor with the inverted VAR filter.
pub fn prewhitened_spectrum(
    v: &DMatrix<f64>,
    q: usize,
    kernel: Kernel,
    bandwidth: Bandwidth,
    omega: f64,
    method: VarMethod,
    adjust: bool,
) -> Result<PrewhitenedSpectrum> {
    if adjust && q != 1 {
        return Err(HacError::Unsupported(format!(
            "eigen adjustment is defined for VAR(1) prewhitening only, got order {q}"
        )));
    }
    let fitted = varfit::fit_var(v, q, method)?;
    let (model, adjustment) = if adjust {
        let report = varfit::eigen_adjust(&fitted.coefficients[0], ADJUSTMENT_THRESHOLD)?;
        let model = if report.triggered {
            fitted.with_coefficients(v, vec![report.adjusted.clone()])?
        } else {
            fitted
        };
        (model, Some(report))
    } else {
        (fitted, None)
    };
    let spectrum = recolored_spectrum(v.nrows(), &model, kernel, bandwidth, omega)?;
    Ok(PrewhitenedSpectrum {
        bandwidth: spectrum.1,
        spectrum: spectrum.0,
        model,
        adjustment,
    })
}

/// Smooth the residuals of `model` and recolor. Returns the spectrum and the
/// bandwidth used.
pub fn recolored_spectrum(
    n_total: usize,
    model: &VarModel,
    kernel: Kernel,
    bandwidth: Bandwidth,
    omega: f64,
) -> Result<(SpectralMatrix, f64)> {
    let k = model.dim();
    let d = k - 1;
    let m = match bandwidth {
        Bandwidth::Fixed(m) => m,
        Bandwidth::PluginQs => plugin_bandwidth_qs(&model.residuals)?,
    };
    let inner = smoothed_spectrum(&model.residuals, kernel, m, omega, n_total, d)?;
    let phi = recoloring_filter(&model.coefficients, k, omega)?;
    let mut f = &phi * &inner.f * phi.adjoint();
    linalg::hermitianize(&mut f);
    Ok((SpectralMatrix { f, omega }, m))
}

/// Andrews' AR(1) plug-in bandwidth for the QS kernel,
/// `1.3221 (alpha(2) T)^{1/5}`, floored at 1 and capped at `T - 1`.
///
/// Every column gets weight 1 except the first (the intercept moment) when
/// there is more than one column.
pub fn plugin_bandwidth_qs(v: &DMatrix<f64>) -> Result<f64> {
    let (t_len, k) = v.shape();
    if t_len < 3 {
        return Err(HacError::InsufficientData {
            required: 3,
            actual: t_len,
        });
    }
    linalg::check_finite(v, "plug-in bandwidth input")?;
    let mut num = 0.0;
    let mut den = 0.0;
    for a in 0..k {
        let w = if k > 1 && a == 0 { 0.0 } else { 1.0 };
        let col = v.column(a);
        let mut sxy = 0.0;
        let mut sxx = 0.0;
        for t in 1..t_len {
            sxy += col[t] * col[t - 1];
            sxx += col[t - 1] * col[t - 1];
        }
        if sxx == 0.0 {
            continue;
        }
        let rho = sxy / sxx;
        if rho == 1.0 {
            return Err(HacError::NonStationary { spectral_radius: 1.0 });
        }
        let sigma2 = (1..t_len)
            .map(|t| (col[t] - rho * col[t - 1]).powi(2))
            .sum::<f64>()
            / (t_len - 1) as f64;
        if w == 0.0 {
            continue;
        }
        let s4 = sigma2 * sigma2;
        num += w * 4.0 * rho * rho * s4 / (1.0 - rho).powi(8);
        den += w * s4 / (1.0 - rho).powi(4);
    }
    let alpha2 = if den > 0.0 { num / den } else { 0.0 };
    let m = 1.3221 * (alpha2 * t_len as f64).powf(0.2);
    if !m.is_finite() {
        return Err(HacError::NonFinite("plug-in bandwidth"));
    }
    Ok(m.clamp(1.0, (t_len - 1) as f64))
}

fn estimate_from_prewhitened(tag: EstimatorTag, pw: &PrewhitenedSpectrum) -> Result<HacEstimate> {
    let s_hat = pw.spectrum.long_run_variance();
    linalg::check_finite(&s_hat, "long-run variance estimate")?;
    let (triggered, distortion) = pw
        .adjustment
        .as_ref()
        .map_or((false, 0.0), |r| (r.triggered, r.distortion));
    Ok(HacEstimate {
        s_hat,
        estimator: tag,
        order: pw.model.order(),
        bandwidth: pw.bandwidth,
        adjustment_triggered: triggered,
        adjustment_distortion: distortion,
        prewhitener_spectral_radius: pw.model.spectral_radius()?,
    })
}

/// QS kernel estimate with the plug-in bandwidth, no prewhitening.
pub fn estimate_am(v: &MomentSeries) -> Result<HacEstimate> {
    let m = plugin_bandwidth_qs(v.matrix())?;
    let s_hat = kernel_spectrum(v.matrix(), Kernel::Qs, m, 0.0, v.d())?.long_run_variance();
    linalg::check_finite(&s_hat, "long-run variance estimate")?;
    Ok(HacEstimate {
        s_hat,
        estimator: EstimatorTag::Am,
        order: 0,
        bandwidth: m,
        adjustment_triggered: false,
        adjustment_distortion: 0.0,
        prewhitener_spectral_radius: 0.0,
    })
}

/// OLS VAR(1) prewhitening with eigen adjustment, QS kernel with the
/// plug-in bandwidth computed on the prewhitened residuals.
pub fn estimate_am_pw(v: &MomentSeries) -> Result<HacEstimate> {
    let pw = prewhitened_spectrum(v.matrix(), 1, Kernel::Qs, Bandwidth::PluginQs, 0.0, VarMethod::Ols, true)?;
    estimate_from_prewhitened(EstimatorTag::AmPw, &pw)
}

/// As [`estimate_am_pw`] without eigen adjustment.
pub fn estimate_am_pw_unadj(v: &MomentSeries) -> Result<HacEstimate> {
    let pw = prewhitened_spectrum(v.matrix(), 1, Kernel::Qs, Bandwidth::PluginQs, 0.0, VarMethod::Ols, false)?;
    estimate_from_prewhitened(EstimatorTag::AmPwUnadj, &pw)
}

/// Burg VAR(1) prewhitening, QS kernel with the plug-in bandwidth on the
/// residuals. Isolates the effect of the prewhitener in comparisons.
pub fn estimate_burg_pw(v: &MomentSeries) -> Result<HacEstimate> {
    let pw = prewhitened_spectrum(v.matrix(), 1, Kernel::Qs, Bandwidth::PluginQs, 0.0, VarMethod::Burg, false)?;
    estimate_from_prewhitened(EstimatorTag::BurgPw, &pw)
}
