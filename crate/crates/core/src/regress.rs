//! OLS fitting, the moment series `V_t = u_t X_t`, sandwich assembly and
//! normal-based confidence intervals.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dgp::RegressionDataset;
use crate::error::{HacError, Result};
use crate::linalg;

/// Largest admissible condition number of `X'X / n`.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub beta_hat: DVector<f64>,
    pub residuals: DVector<f64>,
    /// `S_n = X'X / n`.
    pub xtx_over_n: DMatrix<f64>,
}

impl OlsFit {
    pub fn n(&self) -> usize {
        self.residuals.len()
    }
}

/// OLS on a dataset. See [`ols`].
pub fn ols_fit(data: &RegressionDataset) -> Result<OlsFit> {
    ols(&data.y, &data.x)
}

/// Solve the normal equations with a Cholesky factorization, guarded by the
/// condition number of `X'X / n`. One step of iterative refinement keeps
/// `X'u` at rounding level.
pub fn ols(y: &DVector<f64>, x: &DMatrix<f64>) -> Result<OlsFit> {
    let (n, k) = x.shape();
    if y.len() != n {
        return Err(HacError::DimensionMismatch {
            expected: n,
            actual: y.len(),
        });
    }
    if n <= k {
        return Err(HacError::InsufficientData {
            required: k,
            actual: n,
        });
    }
    linalg::check_finite(x, "regressor matrix")?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(HacError::NonFinite("response vector"));
    }
    let mut s_n = x.transpose() * x / n as f64;
    linalg::symmetrize(&mut s_n);
    let condition = linalg::symmetric_condition(&s_n);
    if !(condition <= MAX_CONDITION) {
        return Err(HacError::Singular {
            context: "X'X (collinear regressors)",
            condition,
        });
    }
    let chol = linalg::cholesky(&s_n, "X'X")?;
    let mut beta = chol.solve(&(x.transpose() * y / n as f64));
    let resid = y - x * &beta;
    beta += chol.solve(&(x.transpose() * &resid / n as f64));
    let residuals = y - x * &beta;
    Ok(OlsFit {
        beta_hat: beta,
        residuals,
        xtx_over_n: s_n,
    })
}

/// The `n x (d+1)` matrix whose row `t` is `u_t X_t'`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSeries {
    v: DMatrix<f64>,
}

impl MomentSeries {
    /// Wrap an arbitrary `n x k` matrix (`k = d + 1`).
    pub fn new(v: DMatrix<f64>) -> Result<Self> {
        if v.ncols() == 0 || v.nrows() < 2 {
            return Err(HacError::InsufficientData {
                required: 1,
                actual: v.nrows(),
            });
        }
        linalg::check_finite(&v, "moment series")?;
        Ok(Self { v })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn n(&self) -> usize {
        self.v.nrows()
    }

    /// Dimension `d + 1`.
    pub fn dim(&self) -> usize {
        self.v.ncols()
    }

    /// Number of non-constant regressors.
    pub fn d(&self) -> usize {
        self.v.ncols() - 1
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { v: &self.v * c }
    }
}

pub fn moment_series(fit: &OlsFit, x: &DMatrix<f64>) -> Result<MomentSeries> {
    if x.nrows() != fit.residuals.len() {
        return Err(HacError::DimensionMismatch {
            expected: fit.residuals.len(),
            actual: x.nrows(),
        });
    }
    let mut v = x.clone();
    for (mut row, u) in v.row_iter_mut().zip(fit.residuals.iter()) {
        row *= *u;
    }
    MomentSeries::new(v)
}

/// `S_n^{-1} S_hat S_n^{-1}`, an estimate of `n Var(beta_hat)`.
pub fn sandwich(s_n: &DMatrix<f64>, s_hat: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if s_n.shape() != s_hat.shape() || !s_n.is_square() {
        return Err(HacError::DimensionMismatch {
            expected: s_n.nrows(),
            actual: s_hat.nrows(),
        });
    }
    let inv = s_n.clone().try_inverse().ok_or(HacError::Singular {
        context: "S_n",
        condition: f64::INFINITY,
    })?;
    let mut out = &inv * s_hat * &inv;
    linalg::symmetrize(&mut out);
    Ok(out)
}

/// `sqrt(diag(sandwich) / n)`.
pub fn standard_errors(sandwich: &DMatrix<f64>, n: usize) -> Vec<f64> {
    (0..sandwich.nrows())
        .map(|i| (sandwich[(i, i)] / n as f64).sqrt())
        .collect()
}

/// Two-sided standard-normal critical value `z_{alpha/2}`.
pub fn normal_critical_value(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(HacError::InvalidParameter(format!(
            "significance level must lie in (0, 1), got {alpha}"
        )));
    }
    let z = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(z.inverse_cdf(1.0 - alpha / 2.0))
}

/// Two-sided normal p-value of `estimate / se`.
pub fn normal_p_value(estimate: f64, se: f64) -> f64 {
    let z = Normal::new(0.0, 1.0).expect("standard normal");
    2.0 * (1.0 - z.cdf((estimate / se).abs()))
}

/// Confidence levels used throughout: 90%, 95% and 99%.
pub const ALPHAS: [f64; 3] = [0.1, 0.05, 0.01];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// `[beta - z se, beta + z se]` for `alpha` in {0.1, 0.05, 0.01}.
pub fn confidence_interval(beta: f64, se: f64, alpha: f64) -> Result<Interval> {
    if !ALPHAS.contains(&alpha) {
        return Err(HacError::InvalidParameter(format!(
            "alpha must be one of 0.1, 0.05, 0.01; got {alpha}"
        )));
    }
    if se.is_nan() || se < 0.0 {
        return Err(HacError::InvalidParameter(format!(
            "standard error must be nonnegative, got {se}"
        )));
    }
    let z = normal_critical_value(alpha)?;
    Ok(Interval {
        lower: beta - z * se,
        upper: beta + z * se,
    })
}

/// Which long-run variance estimator produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorTag {
    /// QS kernel, plug-in bandwidth.
    Am,
    /// OLS VAR(1) prewhitening with eigen adjustment, QS kernel.
    AmPw,
    /// As `AmPw` without eigen adjustment.
    AmPwUnadj,
    /// Burg VAR(1) prewhitening without adjustment, QS kernel.
    BurgPw,
    /// Burg-prewhitened Parzen kernel with cross-validated order and bandwidth.
    Cvll,
}

impl EstimatorTag {
    pub const PAPER_SET: [EstimatorTag; 4] = [
        EstimatorTag::Am,
        EstimatorTag::AmPw,
        EstimatorTag::AmPwUnadj,
        EstimatorTag::Cvll,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            EstimatorTag::Am => "AM",
            EstimatorTag::AmPw => "AM-PW",
            EstimatorTag::AmPwUnadj => "AM-PW-unadj",
            EstimatorTag::BurgPw => "BURG-PW",
            EstimatorTag::Cvll => "CVLL",
        }
    }

    /// Parse a name as accepted on the command line (`am`, `ampw`,
    /// `ampw-unadj`, `burgpw`, `cvll`, or the display names).
    pub fn parse(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "am" => Ok(EstimatorTag::Am),
            "ampw" => Ok(EstimatorTag::AmPw),
            "ampwunadj" => Ok(EstimatorTag::AmPwUnadj),
            "burgpw" => Ok(EstimatorTag::BurgPw),
            "cvll" => Ok(EstimatorTag::Cvll),
            _ => Err(HacError::InvalidParameter(format!("unknown estimator `{s}`"))),
        }
    }
}

impl fmt::Display for EstimatorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A long-run variance estimate of the moment series plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct HacEstimate {
    /// Symmetric `(d+1) x (d+1)` LRV estimate.
    pub s_hat: DMatrix<f64>,
    pub estimator: EstimatorTag,
    /// Prewhitening order (0 if none).
    pub order: usize,
    pub bandwidth: f64,
    pub adjustment_triggered: bool,
    /// Relative l11 change made by the eigen adjustment (0 if not triggered).
    pub adjustment_distortion: f64,
    /// Spectral radius of the companion matrix of the prewhitening filter
    /// actually used (0 without prewhitening).
    pub prewhitener_spectral_radius: f64,
}

impl HacEstimate {
    /// `n Var(beta_hat)` for the regression with `S_n = X'X / n`.
    pub fn sandwich(&self, s_n: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        sandwich(s_n, &self.s_hat)
    }
}
