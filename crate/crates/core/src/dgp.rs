//! Synthetic regressors and errors: Gaussian AR(p) and MA(2) processes,
//! regression datasets built from them, and closed-form autocovariances
//! used as test oracles.
//!
//! Every random draw goes through an explicitly passed RNG. [`RngStreams`]
//! hands out one ChaCha stream per `(repetition, series)` pair so that a
//! simulation is reproducible no matter how repetitions are scheduled.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{HacError, Result};
use crate::linalg;

/// Draws discarded before an AR path is returned.
pub const AR_BURN_IN: usize = 1_000;

/// `x_t = intercept + sum_k coefficients[k-1] x_{t-k} + sd * e_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArSpec {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub innovation_sd: f64,
}

impl ArSpec {
    pub fn new(intercept: f64, coefficients: Vec<f64>) -> Self {
        Self {
            intercept,
            coefficients,
            innovation_sd: 1.0,
        }
    }

    pub fn white_noise() -> Self {
        Self::new(0.0, Vec::new())
    }

    /// AR(1) with coefficient `phi`.
    pub fn ar1(intercept: f64, phi: f64) -> Self {
        Self::new(intercept, vec![phi])
    }

    /// AR(p) whose `p` coefficients all equal `phi / p`.
    pub fn split(intercept: f64, phi: f64, order: usize) -> Self {
        Self::new(intercept, vec![phi / order as f64; order])
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    /// Population mean `intercept / (1 - sum phi_k)`.
    pub fn mean(&self) -> f64 {
        self.intercept / (1.0 - self.coefficients.iter().sum::<f64>())
    }

    /// Largest root magnitude of the companion matrix; the process is
    /// stationary iff this is below one.
    pub fn companion_radius(&self) -> Result<f64> {
        let p = self.order();
        if p == 0 {
            return Ok(0.0);
        }
        let mut c = DMatrix::<f64>::zeros(p, p);
        for (k, phi) in self.coefficients.iter().enumerate() {
            c[(0, k)] = *phi;
        }
        for i in 1..p {
            c[(i, i - 1)] = 1.0;
        }
        linalg::spectral_radius(&c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.innovation_sd > 0.0 && self.innovation_sd.is_finite()) {
            return Err(HacError::InvalidParameter(format!(
                "innovation_sd must be positive, got {}",
                self.innovation_sd
            )));
        }
        if !self.intercept.is_finite() || self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(HacError::NonFinite("AR specification"));
        }
        let radius = self.companion_radius()?;
        if radius >= 1.0 {
            return Err(HacError::NonStationary {
                spectral_radius: radius,
            });
        }
        Ok(())
    }
}

/// `x_t = intercept + theta1 e_{t-1} + theta2 e_{t-2} + e_t`, with `e ~ N(0, sd^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaSpec {
    pub intercept: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub innovation_sd: f64,
}

impl MaSpec {
    pub fn new(intercept: f64, theta1: f64, theta2: f64) -> Self {
        Self {
            intercept,
            theta1,
            theta2,
            innovation_sd: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.innovation_sd > 0.0 && self.innovation_sd.is_finite()) {
            return Err(HacError::InvalidParameter(format!(
                "innovation_sd must be positive, got {}",
                self.innovation_sd
            )));
        }
        if ![self.intercept, self.theta1, self.theta2].iter().all(|v| v.is_finite()) {
            return Err(HacError::NonFinite("MA specification"));
        }
        Ok(())
    }
}

/// A univariate process used for a regressor or for the error term.
#[derive(Debug, Clone, PartialEq)]
pub enum Process {
    Ar(ArSpec),
    Ma(MaSpec),
}

impl Process {
    pub fn simulate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        match self {
            Process::Ar(spec) => simulate_ar(spec, n, rng),
            Process::Ma(spec) => simulate_ma(spec, n, rng),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Process::Ar(spec) => spec.mean(),
            Process::Ma(spec) => spec.intercept,
        }
    }

    /// Autocovariances at lags `0..=max_lag`.
    pub fn acvf(&self, max_lag: usize) -> Result<Vec<f64>> {
        match self {
            Process::Ar(spec) => acvf_ar(spec, max_lag),
            Process::Ma(spec) => Ok(acvf_ma(spec, max_lag)),
        }
    }
}

impl From<ArSpec> for Process {
    fn from(spec: ArSpec) -> Self {
        Process::Ar(spec)
    }
}

impl From<MaSpec> for Process {
    fn from(spec: MaSpec) -> Self {
        Process::Ma(spec)
    }
}

/// Deterministic source of independent random streams.
///
/// The stream for `(repetition, series)` depends only on the master seed and
/// those two indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStreams {
    master: u64,
}

impl RngStreams {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn stream(&self, repetition: u64, series: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream((repetition << 12) | (series & 0xfff));
        rng
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(HacError::InvalidParameter("series length must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Draw a path of length `n` from a stationary AR(p) process. The recursion
/// starts at the process mean and the first [`AR_BURN_IN`] draws are dropped.
pub fn simulate_ar<R: Rng + ?Sized>(spec: &ArSpec, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    check_n(n)?;
    spec.validate()?;
    let p = spec.order();
    let mean = spec.mean();
    let total = AR_BURN_IN + n;
    let mut path = Vec::with_capacity(p + total);
    path.extend(std::iter::repeat_n(mean, p));
    for t in p..p + total {
        let e: f64 = rng.sample(StandardNormal);
        let mut x = spec.intercept + spec.innovation_sd * e;
        for (k, phi) in spec.coefficients.iter().enumerate() {
            x += phi * path[t - k - 1];
        }
        path.push(x);
    }
    Ok(path.split_off(p + AR_BURN_IN))
}

/// Draw an exactly stationary MA(2) path of length `n`.
pub fn simulate_ma<R: Rng + ?Sized>(spec: &MaSpec, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    check_n(n)?;
    spec.validate()?;
    let eps: Vec<f64> = (0..n + 2)
        .map(|_| spec.innovation_sd * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok((0..n)
        .map(|t| spec.intercept + eps[t + 2] + spec.theta1 * eps[t + 1] + spec.theta2 * eps[t])
        .collect())
}

/// Regression data `y = X beta + u` with an intercept column in `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionDataset {
    pub y: DVector<f64>,
    pub x: DMatrix<f64>,
    pub true_beta: DVector<f64>,
}

impl RegressionDataset {
    pub fn new(y: DVector<f64>, x: DMatrix<f64>, true_beta: DVector<f64>) -> Result<Self> {
        let (n, k) = x.shape();
        if y.len() != n {
            return Err(HacError::DimensionMismatch {
                expected: n,
                actual: y.len(),
            });
        }
        if true_beta.len() != k {
            return Err(HacError::DimensionMismatch {
                expected: k,
                actual: true_beta.len(),
            });
        }
        if k == 0 || x.column(0).iter().any(|v| *v != 1.0) {
            return Err(HacError::Data("first column of X must be identically 1".into()));
        }
        if n <= k {
            return Err(HacError::InsufficientData {
                required: k,
                actual: n,
            });
        }
        if y.iter().chain(x.iter()).any(|v| !v.is_finite()) {
            return Err(HacError::NonFinite("regression data"));
        }
        Ok(Self { y, x, true_beta })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    /// Number of non-constant regressors.
    pub fn d(&self) -> usize {
        self.x.ncols() - 1
    }
}

/// Stream index of the error series; regressor `i` (1-based) uses stream `i`.
pub const ERROR_SERIES: u64 = 0;

/// Simulate regressors and errors independently and assemble `y = X beta + u`.
///
/// `beta` has length `d + 1` (intercept first); pass `None` for `beta = 0`.
pub fn make_dataset(
    regressors: &[Process],
    error: &Process,
    beta: Option<&[f64]>,
    n: usize,
    streams: &RngStreams,
    repetition: u64,
) -> Result<RegressionDataset> {
    let k = regressors.len() + 1;
    let beta = match beta {
        Some(b) if b.len() != k => {
            return Err(HacError::DimensionMismatch {
                expected: k,
                actual: b.len(),
            })
        }
        Some(b) => DVector::from_column_slice(b),
        None => DVector::zeros(k),
    };
    let mut x = DMatrix::<f64>::from_element(n, k, 1.0);
    for (i, process) in regressors.iter().enumerate() {
        let mut rng = streams.stream(repetition, i as u64 + 1);
        let path = process.simulate(n, &mut rng)?;
        x.set_column(i + 1, &DVector::from_vec(path));
    }
    let mut rng = streams.stream(repetition, ERROR_SERIES);
    let u = DVector::from_vec(error.simulate(n, &mut rng)?);
    let y = &x * &beta + u;
    RegressionDataset::new(y, x, beta)
}

/// Exact autocovariances `gamma(0..=max_lag)` of a stationary AR(p),
/// from the Yule–Walker equations.
pub fn acvf_ar(spec: &ArSpec, max_lag: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    let p = spec.order();
    let sigma2 = spec.innovation_sd * spec.innovation_sd;
    // gamma(r) - sum_k phi_k gamma(|r-k|) = sigma2 * [r == 0], r = 0..=p
    let mut system = DMatrix::<f64>::zeros(p + 1, p + 1);
    let mut rhs = DVector::<f64>::zeros(p + 1);
    rhs[0] = sigma2;
    for r in 0..=p {
        system[(r, r)] += 1.0;
        for (idx, phi) in spec.coefficients.iter().enumerate() {
            let k = idx + 1;
            let lag = (r as isize - k as isize).unsigned_abs();
            system[(r, lag)] -= phi;
        }
    }
    let solved = system.lu().solve(&rhs).ok_or(HacError::Singular {
        context: "Yule-Walker system",
        condition: f64::INFINITY,
    })?;
    let mut gamma: Vec<f64> = solved.iter().copied().collect();
    for r in (p + 1)..=max_lag {
        let next = spec
            .coefficients
            .iter()
            .enumerate()
            .map(|(idx, phi)| phi * gamma[r - idx - 1])
            .sum();
        gamma.push(next);
    }
    gamma.truncate(max_lag + 1);
    Ok(gamma)
}

/// Exact autocovariances of an MA(2).
pub fn acvf_ma(spec: &MaSpec, max_lag: usize) -> Vec<f64> {
    let s2 = spec.innovation_sd * spec.innovation_sd;
    let (t1, t2) = (spec.theta1, spec.theta2);
    (0..=max_lag)
        .map(|r| match r {
            0 => s2 * (1.0 + t1 * t1 + t2 * t2),
            1 => s2 * (t1 + t1 * t2),
            2 => s2 * t2,
            _ => 0.0,
        })
        .collect()
}

/// Centered autocovariance `Gamma_X(r)` of `X_t = (1, x_1t, .., x_dt)'` for
/// mutually independent regressors.
pub fn regressor_autocov(regressors: &[Process], r: usize) -> Result<DMatrix<f64>> {
    let k = regressors.len() + 1;
    let mut g = DMatrix::<f64>::zeros(k, k);
    for (i, process) in regressors.iter().enumerate() {
        g[(i + 1, i + 1)] = process.acvf(r)?[r];
    }
    Ok(g)
}

/// `Gamma_V(r) = gamma_u(r) Gamma_X(r) + gamma_u(r) mu_X mu_X'` for `V_t = u_t X_t`
/// with Gaussian, mutually independent `u` and `X`.
///
/// `gamma_u[r]` and `gamma_x[r]` hold lags `r >= 0`; negative lags use
/// `Gamma_V(-r) = Gamma_V(r)'`.
pub fn gamma_v_oracle(
    gamma_u: &[f64],
    gamma_x: &[DMatrix<f64>],
    mu_x: &DVector<f64>,
    r: i64,
) -> Result<DMatrix<f64>> {
    let lag = r.unsigned_abs() as usize;
    if lag >= gamma_u.len() || lag >= gamma_x.len() {
        return Err(HacError::InvalidParameter(format!(
            "lag {r} exceeds the supplied autocovariances"
        )));
    }
    let gx = &gamma_x[lag];
    if gx.nrows() != mu_x.len() || !gx.is_square() {
        return Err(HacError::DimensionMismatch {
            expected: mu_x.len(),
            actual: gx.nrows(),
        });
    }
    let out = (gx + mu_x * mu_x.transpose()) * gamma_u[lag];
    Ok(if r < 0 { out.transpose() } else { out })
}
