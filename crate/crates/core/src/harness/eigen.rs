//! When does the singular-value clamp fire on the VAR(1) of `V_t = u_t X_t`,
//! and how much does it change the coefficient matrix?

use rayon::prelude::*;

use crate::dgp::{make_dataset, ArSpec, Process, RngStreams};
use crate::error::{HacError, Result};
use crate::linalg;
use crate::regress;
use crate::varfit::{self, ADJUSTMENT_THRESHOLD};

use super::table::{fmt_num, OutputFormat, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct EigenRow {
    pub phi: f64,
    /// Descending; averaged elementwise over repetitions in the empirical table.
    pub eigen_magnitudes: Vec<f64>,
    pub singular_values: Vec<f64>,
    /// 0 or 100 in the theoretical table, a percentage of repetitions otherwise.
    pub trigger_frequency: f64,
    /// Relative `l11` change, averaged over all repetitions (0 when not fired).
    pub distortion: f64,
}

/// Closed-form analysis of `A = [[phi, 0], [alpha phi 1_d, phi^2 I_d]]`.
pub fn eigen_analysis_theoretical(alpha: f64, phis: &[f64], d: usize) -> Result<Vec<EigenRow>> {
    phis.iter()
        .map(|&phi| {
            let a = varfit::theoretical_a(phi, alpha, d)?;
            let report = varfit::eigen_adjust(&a, ADJUSTMENT_THRESHOLD)?;
            Ok(EigenRow {
                phi,
                eigen_magnitudes: varfit::theoretical_eigen_magnitudes(phi, d),
                singular_values: varfit::theoretical_singular_values(phi, alpha, d)?,
                trigger_frequency: if report.triggered { 100.0 } else { 0.0 },
                distortion: report.distortion,
            })
        })
        .collect()
}

struct Draw {
    eig: Vec<f64>,
    sv: Vec<f64>,
    triggered: bool,
    distortion: f64,
}

/// Simulate the AR(1) regression with one regressor (`x = alpha + phi x_{-1} + e`,
/// `u = phi u_{-1} + e~`, `beta = 0`), fit an OLS VAR(1) to the moment
/// series and apply the clamp.
pub fn eigen_analysis_empirical(alpha: f64, phis: &[f64], n: usize, reps: usize, seed: u64) -> Result<Vec<EigenRow>> {
    if reps == 0 {
        return Err(HacError::InvalidParameter("at least one repetition is required".into()));
    }
    let streams = RngStreams::new(seed);
    phis.iter()
        .map(|&phi| {
            let regressor: Process = ArSpec::ar1(alpha, phi).into();
            let error: Process = ArSpec::ar1(0.0, phi).into();
            let draws: Vec<Draw> = (0..reps)
                .into_par_iter()
                .map(|rep| -> Result<Draw> {
                    let data = make_dataset(std::slice::from_ref(&regressor), &error, None, n, &streams, rep as u64)?;
                    let fit = regress::ols_fit(&data)?;
                    let v = regress::moment_series(&fit, &data.x)?;
                    let model = varfit::ols_var(v.matrix(), 1)?;
                    let report = varfit::eigen_adjust(&model.coefficients[0], ADJUSTMENT_THRESHOLD)?;
                    Ok(Draw {
                        eig: linalg::eigen_magnitudes(&model.coefficients[0])?,
                        sv: report.singular_values.clone(),
                        triggered: report.triggered,
                        distortion: report.distortion,
                    })
                })
                .collect::<Result<_>>()?;
            let r = draws.len() as f64;
            let k = draws[0].eig.len();
            let avg = |f: &dyn Fn(&Draw) -> &Vec<f64>| -> Vec<f64> {
                (0..k).map(|i| draws.iter().map(|d| f(d)[i]).sum::<f64>() / r).collect()
            };
            Ok(EigenRow {
                phi,
                eigen_magnitudes: avg(&|d| &d.eig),
                singular_values: avg(&|d| &d.sv),
                trigger_frequency: 100.0 * draws.iter().filter(|d| d.triggered).count() as f64 / r,
                distortion: draws.iter().map(|d| d.distortion).sum::<f64>() / r,
            })
        })
        .collect()
}

fn join(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.2}")).collect();
    format!("{{{}}}", parts.join(", "))
}

pub fn render_eigen_rows(rows: &[EigenRow], format: OutputFormat) -> Result<String> {
    let mut t = Table::new(["phi", "eigen_magnitudes", "singular_values", "trigger_pct", "distortion_pct"]);
    for r in rows {
        t.push(vec![
            format!("{}", r.phi),
            join(&r.eigen_magnitudes),
            join(&r.singular_values),
            format!("{:.1}", r.trigger_frequency),
            fmt_num(100.0 * r.distortion),
        ]);
    }
    t.render(format)
}
