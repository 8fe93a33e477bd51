//! Monte Carlo evaluation of the long-run variance estimators in the
//! regression `y = X beta + u` with `beta = 0`.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::cvll::{CandidateGrid, DEFAULT_C};
use crate::dgp::{make_dataset, ArSpec, MaSpec, Process, RngStreams};
use crate::error::{HacError, Result};
use crate::regress::{self, EstimatorTag, ALPHAS};

use super::table::{fmt_num, OutputFormat, Table};

/// Data-generating process shared by the regressors and the error. The
/// regressors carry the intercept `alpha`; the error has mean zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DgpKind {
    Ar1 { phi: f64 },
    /// Two coefficients equal to `phi / 2`.
    Ar2 { phi: f64 },
    /// Three coefficients equal to `phi / 3`.
    Ar3 { phi: f64 },
    Ma2 { theta1: f64, theta2: f64 },
}

impl DgpKind {
    pub fn parse(name: &str, phi: Option<f64>, theta1: Option<f64>, theta2: Option<f64>) -> Result<Self> {
        let need_phi = || {
            phi.ok_or_else(|| HacError::InvalidParameter(format!("--phi is required for dgp `{name}`")))
        };
        match name.to_ascii_lowercase().as_str() {
            "ar1" => Ok(DgpKind::Ar1 { phi: need_phi()? }),
            "ar2" => Ok(DgpKind::Ar2 { phi: need_phi()? }),
            "ar3" => Ok(DgpKind::Ar3 { phi: need_phi()? }),
            "ma2" => Ok(DgpKind::Ma2 {
                theta1: theta1.unwrap_or(0.0),
                theta2: theta2.unwrap_or(0.0),
            }),
            _ => Err(HacError::InvalidParameter(format!(
                "unknown dgp `{name}` (expected ar1, ar2, ar3 or ma2)"
            ))),
        }
    }

    pub fn label(&self) -> String {
        match self {
            DgpKind::Ar1 { .. } => "AR(1)".into(),
            DgpKind::Ar2 { .. } => "AR(2)".into(),
            DgpKind::Ar3 { .. } => "AR(3)".into(),
            DgpKind::Ma2 { .. } => "MA(2)".into(),
        }
    }

    pub fn parameter_label(&self) -> String {
        match self {
            DgpKind::Ar1 { phi } | DgpKind::Ar2 { phi } | DgpKind::Ar3 { phi } => format!("{phi}"),
            DgpKind::Ma2 { theta1, theta2 } => format!("{{{theta1},{theta2}}}"),
        }
    }

    fn process(&self, intercept: f64) -> Process {
        match *self {
            DgpKind::Ar1 { phi } => ArSpec::split(intercept, phi, 1).into(),
            DgpKind::Ar2 { phi } => ArSpec::split(intercept, phi, 2).into(),
            DgpKind::Ar3 { phi } => ArSpec::split(intercept, phi, 3).into(),
            DgpKind::Ma2 { theta1, theta2 } => MaSpec::new(intercept, theta1, theta2).into(),
        }
    }

    /// `(regressor processes, error process)`.
    pub fn processes(&self, alpha: f64, d: usize) -> (Vec<Process>, Process) {
        (vec![self.process(alpha); d], self.process(0.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub dgp: DgpKind,
    pub alpha: f64,
    pub d: usize,
    pub n: usize,
    pub repetitions: usize,
    pub estimators: Vec<EstimatorTag>,
    /// Index of the coefficient of interest in `(beta_0, ..., beta_d)`.
    pub target: usize,
    pub seed: u64,
    pub c: f64,
}

impl McConfig {
    pub fn new(dgp: DgpKind) -> Self {
        Self {
            dgp,
            alpha: 0.0,
            d: 3,
            n: 100,
            repetitions: 1000,
            estimators: EstimatorTag::PAPER_SET.to_vec(),
            target: 1,
            seed: 20_261_016,
            c: DEFAULT_C,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions < 2 {
            return Err(HacError::InvalidParameter("at least 2 repetitions are required".into()));
        }
        if self.estimators.is_empty() {
            return Err(HacError::InvalidParameter("no estimators selected".into()));
        }
        if self.d == 0 {
            return Err(HacError::InvalidParameter("d must be at least 1".into()));
        }
        if self.target > self.d {
            return Err(HacError::InvalidParameter(format!(
                "target coefficient {} out of range for d = {}",
                self.target, self.d
            )));
        }
        if !(self.c > 0.0 && self.c < 1.0) {
            return Err(HacError::InvalidParameter(format!("c must lie in (0, 1), got {}", self.c)));
        }
        if self.n < 10 {
            return Err(HacError::InsufficientData { required: 10, actual: self.n });
        }
        let (regs, err) = self.dgp.processes(self.alpha, self.d);
        for p in regs.iter().chain(std::iter::once(&err)) {
            if let Process::Ar(spec) = p {
                spec.validate()?;
            }
        }
        Ok(())
    }
}

/// One estimator's output in one repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorDraw {
    /// `n Var(beta_target)` estimate.
    pub estimate: f64,
    pub se: f64,
    /// Whether the interval at each level of [`ALPHAS`] covers the true value.
    pub covers: [bool; 3],
    pub width95: f64,
    pub order: usize,
    pub bandwidth: f64,
    pub adjustment_triggered: bool,
    pub adjustment_distortion: f64,
    pub prewhitener_spectral_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepRecord {
    pub repetition: usize,
    pub beta_hat: f64,
    /// Aligned with `McConfig::estimators`; `Err` carries the failure message.
    pub draws: Vec<std::result::Result<EstimatorDraw, String>>,
}

/// Summary statistics over a set of finite estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSummary {
    pub count: usize,
    pub bias: f64,
    /// Divisor is `count`, so `mse = bias^2 + variance`.
    pub variance: f64,
    pub mse: f64,
}

impl MomentSummary {
    fn of(values: &[f64], truth: f64) -> Self {
        let count = values.len();
        if count == 0 {
            return Self { count, bias: f64::NAN, variance: f64::NAN, mse: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let variance = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / count as f64;
        let bias = mean - truth;
        Self { count, bias, variance, mse: bias * bias + variance }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSummary {
    pub estimator: EstimatorTag,
    /// Repetitions with a finite estimate.
    pub effective: usize,
    /// Repetitions where the estimator failed or returned a non-finite value.
    pub excluded: usize,
    /// Every finite estimate.
    pub raw: MomentSummary,
    /// Finite estimates no larger than 1000 times the median estimate.
    pub trimmed: MomentSummary,
    /// Percent of effective repetitions whose interval contains the true
    /// coefficient, at 90/95/99%.
    pub coverage: [f64; 3],
    pub mean_width95: f64,
    pub mean_order: f64,
    pub order_histogram: BTreeMap<usize, usize>,
    pub bandwidth_histogram: BTreeMap<usize, usize>,
    /// Percent of effective repetitions where the eigen adjustment fired.
    pub trigger_frequency: f64,
    /// Mean relative distortion over effective repetitions (0 when not fired).
    pub mean_distortion: f64,
    pub max_spectral_radius: f64,
    /// Repetitions whose prewhitening filter has spectral radius >= 1.
    pub nonstationary_fits: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    pub config: McConfig,
    /// `n` times the cross-repetition variance of `beta_hat_target`.
    pub true_value: f64,
    pub summaries: Vec<EstimatorSummary>,
    pub records: Vec<RepRecord>,
}

fn run_repetition(config: &McConfig, streams: &RngStreams, grid: &CandidateGrid, rep: usize) -> Result<RepRecord> {
    let (regs, err) = config.dgp.processes(config.alpha, config.d);
    let data = make_dataset(&regs, &err, None, config.n, streams, rep as u64)?;
    let fit = regress::ols_fit(&data)?;
    let v = regress::moment_series(&fit, &data.x)?;
    let truth = data.true_beta[config.target];
    let beta_hat = fit.beta_hat[config.target];
    let draws = config
        .estimators
        .iter()
        .map(|&tag| {
            let draw = || -> Result<EstimatorDraw> {
                let est = super::estimate(tag, &v, grid)?;
                let sandwich = est.sandwich(&fit.xtx_over_n)?;
                let estimate = sandwich[(config.target, config.target)];
                if !estimate.is_finite() {
                    return Err(HacError::NonFinite("sandwich entry"));
                }
                let se = (estimate.max(0.0) / config.n as f64).sqrt();
                let mut covers = [false; 3];
                for (slot, alpha) in covers.iter_mut().zip(ALPHAS) {
                    *slot = regress::confidence_interval(beta_hat, se, alpha)?.contains(truth);
                }
                let width95 = regress::confidence_interval(beta_hat, se, 0.05)?.width();
                Ok(EstimatorDraw {
                    estimate,
                    se,
                    covers,
                    width95,
                    order: est.order,
                    bandwidth: est.bandwidth,
                    adjustment_triggered: est.adjustment_triggered,
                    adjustment_distortion: est.adjustment_distortion,
                    prewhitener_spectral_radius: est.prewhitener_spectral_radius,
                })
            };
            draw().map_err(|e| e.to_string())
        })
        .collect();
    Ok(RepRecord { repetition: rep, beta_hat, draws })
}

fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

fn summarize(tag: EstimatorTag, idx: usize, records: &[RepRecord], truth: f64) -> EstimatorSummary {
    let draws: Vec<&EstimatorDraw> = records
        .iter()
        .filter_map(|r| r.draws[idx].as_ref().ok())
        .filter(|d| d.estimate.is_finite())
        .collect();
    let effective = draws.len();
    let excluded = records.len() - effective;
    let values: Vec<f64> = draws.iter().map(|d| d.estimate).collect();
    let raw = MomentSummary::of(&values, truth);
    let med = median(&values);
    let kept: Vec<f64> = values.iter().copied().filter(|x| *x <= 1000.0 * med.abs()).collect();
    let trimmed = MomentSummary::of(&kept, truth);
    let eff = effective.max(1) as f64;
    let mut coverage = [0.0; 3];
    for (level, slot) in coverage.iter_mut().enumerate() {
        *slot = 100.0 * draws.iter().filter(|d| d.covers[level]).count() as f64 / eff;
    }
    let mut order_histogram = BTreeMap::new();
    let mut bandwidth_histogram = BTreeMap::new();
    for d in &draws {
        *order_histogram.entry(d.order).or_insert(0) += 1;
        if d.bandwidth.fract() == 0.0 {
            *bandwidth_histogram.entry(d.bandwidth as usize).or_insert(0) += 1;
        }
    }
    let mean = |f: &dyn Fn(&EstimatorDraw) -> f64| draws.iter().map(|d| f(d)).sum::<f64>() / eff;
    EstimatorSummary {
        estimator: tag,
        effective,
        excluded,
        raw,
        trimmed,
        coverage,
        mean_width95: mean(&|d| d.width95),
        mean_order: mean(&|d| d.order as f64),
        order_histogram,
        bandwidth_histogram,
        trigger_frequency: 100.0 * draws.iter().filter(|d| d.adjustment_triggered).count() as f64 / eff,
        mean_distortion: mean(&|d| d.adjustment_distortion),
        max_spectral_radius: draws.iter().map(|d| d.prewhitener_spectral_radius).fold(0.0, f64::max),
        nonstationary_fits: draws.iter().filter(|d| d.prewhitener_spectral_radius >= 1.0).count(),
    }
}

/// Run every repetition (in parallel; the repetition index alone determines
/// the random streams) and aggregate in repetition order.
pub fn run_monte_carlo(config: &McConfig) -> Result<McReport> {
    config.validate()?;
    let streams = RngStreams::new(config.seed);
    let grid = CandidateGrid::default_for(config.n).with_c(config.c);
    let records: Vec<RepRecord> = (0..config.repetitions)
        .into_par_iter()
        .map(|rep| run_repetition(config, &streams, &grid, rep))
        .collect::<Result<_>>()?;
    let betas: Vec<f64> = records.iter().map(|r| r.beta_hat).collect();
    let r = betas.len() as f64;
    let mean_beta = betas.iter().sum::<f64>() / r;
    let var_beta = betas.iter().map(|b| (b - mean_beta).powi(2)).sum::<f64>() / r;
    let true_value = config.n as f64 * var_beta;
    let summaries = config
        .estimators
        .iter()
        .enumerate()
        .map(|(idx, &tag)| summarize(tag, idx, &records, true_value))
        .collect();
    Ok(McReport {
        config: config.clone(),
        true_value,
        summaries,
        records,
    })
}

impl McReport {
    pub fn summary(&self, tag: EstimatorTag) -> Option<&EstimatorSummary> {
        self.summaries.iter().find(|s| s.estimator == tag)
    }

    /// Per-repetition estimates of `tag` (NaN where excluded).
    pub fn estimates(&self, tag: EstimatorTag) -> Vec<f64> {
        let idx = self.config.estimators.iter().position(|t| *t == tag);
        self.records
            .iter()
            .map(|r| {
                idx.and_then(|i| r.draws[i].as_ref().ok())
                    .map_or(f64::NAN, |d| d.estimate)
            })
            .collect()
    }

    fn table(&self) -> Table {
        let mut t = Table::new([
            "dgp", "param", "alpha", "n", "true_value", "estimator", "reps", "excluded", "bias", "variance", "mse",
            "cov90", "cov95", "cov99", "width95", "trim_kept", "trim_bias", "trim_variance", "trim_mse", "mean_order",
            "trigger_pct", "mean_distortion", "max_radius",
        ]);
        let c = &self.config;
        for s in &self.summaries {
            t.push(vec![
                c.dgp.label(),
                c.dgp.parameter_label(),
                format!("{}", c.alpha),
                c.n.to_string(),
                fmt_num(self.true_value),
                s.estimator.name().to_string(),
                s.effective.to_string(),
                s.excluded.to_string(),
                fmt_num(s.raw.bias),
                fmt_num(s.raw.variance),
                fmt_num(s.raw.mse),
                format!("{:.1}", s.coverage[0]),
                format!("{:.1}", s.coverage[1]),
                format!("{:.1}", s.coverage[2]),
                fmt_num(s.mean_width95),
                s.trimmed.count.to_string(),
                fmt_num(s.trimmed.bias),
                fmt_num(s.trimmed.variance),
                fmt_num(s.trimmed.mse),
                format!("{:.3}", s.mean_order),
                format!("{:.1}", s.trigger_frequency),
                format!("{:.4}", s.mean_distortion),
                format!("{:.4}", s.max_spectral_radius),
            ]);
        }
        t
    }

    fn selection_table(&self) -> Option<Table> {
        let s = self.summary(EstimatorTag::Cvll)?;
        let mut t = Table::new(["kind", "value", "count"]);
        for (q, count) in &s.order_histogram {
            t.push(vec!["order".into(), q.to_string(), count.to_string()]);
        }
        for (m, count) in &s.bandwidth_histogram {
            t.push(vec!["bandwidth".into(), m.to_string(), count.to_string()]);
        }
        Some(t)
    }

    /// Summary table; in markdown form the CVLL order and bandwidth
    /// histograms follow.
    pub fn render(&self, format: OutputFormat) -> Result<String> {
        let mut out = self.table().render(format)?;
        if format == OutputFormat::Markdown {
            if let Some(sel) = self.selection_table() {
                out.push_str("\nCVLL selections\n\n");
                out.push_str(&sel.to_markdown());
            }
        }
        Ok(out)
    }

    /// One row per repetition: `beta_hat` and every estimator's estimate.
    pub fn render_repetitions(&self) -> Result<String> {
        let mut headers = vec!["repetition".to_string(), "beta_hat".to_string()];
        for tag in &self.config.estimators {
            headers.push(tag.name().to_string());
            headers.push(format!("{}_radius", tag.name()));
        }
        let mut t = Table::new(headers);
        for r in &self.records {
            let mut row = vec![r.repetition.to_string(), format!("{:e}", r.beta_hat)];
            for d in &r.draws {
                match d {
                    Ok(d) => {
                        row.push(format!("{:e}", d.estimate));
                        row.push(format!("{:e}", d.prewhitener_spectral_radius));
                    }
                    Err(_) => {
                        row.push("NaN".into());
                        row.push("NaN".into());
                    }
                }
            }
            t.push(row);
        }
        t.to_csv()
    }
}
