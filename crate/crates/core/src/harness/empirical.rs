//! Standard errors for a regression read from CSV, with prewhitening
//! diagnostics, and the prewhitening-order sweep.

use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::cvll::{self, CandidateGrid, DEFAULT_C};
use crate::error::{HacError, Result};
use crate::linalg;
use crate::lrv::{self, Bandwidth, Kernel};
use crate::regress::{self, EstimatorTag, HacEstimate, MomentSeries, OlsFit};
use crate::varfit::{self, VarMethod, ADJUSTMENT_THRESHOLD};

use super::table::{fmt_num, OutputFormat, Table};

/// Selected columns of a CSV file: the response and a design matrix whose
/// first column is the intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvData {
    /// `"(Intercept)"` followed by the regressor column names.
    pub names: Vec<String>,
    pub y: DVector<f64>,
    pub x: DMatrix<f64>,
}

pub fn read_csv(path: &Path, y: &str, x: &[String]) -> Result<CsvData> {
    let file = std::fs::File::open(path)
        .map_err(|e| HacError::Data(format!("cannot open {}: {e}", path.display())))?;
    read_csv_from(file, y, x)
}

/// Parse CSV from any reader. Rows are numbered from 1 after the header.
pub fn read_csv_from<R: Read>(reader: R, y: &str, x: &[String]) -> Result<CsvData> {
    if x.is_empty() {
        return Err(HacError::InvalidParameter("at least one regressor column is required".into()));
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| HacError::Data(format!("column `{name}` not found; available: {}", headers.join(", "))))
    };
    let y_idx = find(y)?;
    let x_idx: Vec<usize> = x.iter().map(|c| find(c)).collect::<Result<_>>()?;
    let wanted: Vec<(usize, &str)> = std::iter::once((y_idx, y))
        .chain(x_idx.iter().copied().zip(x.iter().map(String::as_str)))
        .collect();

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); wanted.len()];
    for (row_no, record) in rdr.records().enumerate() {
        let record = record?;
        let row = row_no + 1;
        for (slot, &(idx, name)) in wanted.iter().enumerate() {
            let cell = record.get(idx).map(str::trim).unwrap_or("");
            if cell.is_empty() {
                return Err(HacError::Data(format!("row {row}, column `{name}`: empty cell")));
            }
            let value: f64 = cell
                .parse()
                .map_err(|_| HacError::Data(format!("row {row}, column `{name}`: `{cell}` is not a number")))?;
            if !value.is_finite() {
                return Err(HacError::Data(format!("row {row}, column `{name}`: `{cell}` is not finite")));
            }
            columns[slot].push(value);
        }
    }
    let n = columns[0].len();
    if n <= x.len() + 1 {
        return Err(HacError::InsufficientData { required: x.len() + 2, actual: n });
    }
    let mut design = DMatrix::<f64>::from_element(n, x.len() + 1, 1.0);
    for (j, col) in columns[1..].iter().enumerate() {
        if col.iter().all(|v| *v == col[0]) {
            return Err(HacError::Data(format!(
                "column `{}` is constant and collinear with the intercept",
                x[j]
            )));
        }
        design.set_column(j + 1, &DVector::from_column_slice(col));
    }
    let mut names = vec!["(Intercept)".to_string()];
    names.extend(x.iter().cloned());
    Ok(CsvData {
        names,
        y: DVector::from_vec(columns.swap_remove(0)),
        x: design,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub estimators: Vec<EstimatorTag>,
    /// Restrict the CVLL order grid to a single value.
    pub q: Option<usize>,
    /// Restrict the CVLL bandwidth grid to a single value.
    pub m: Option<usize>,
    pub c: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            estimators: EstimatorTag::PAPER_SET.to_vec(),
            q: None,
            m: None,
            c: DEFAULT_C,
        }
    }
}

impl FitOptions {
    pub fn grid(&self, n: usize) -> CandidateGrid {
        let mut grid = CandidateGrid::default_for(n).with_c(self.c);
        if let Some(q) = self.q {
            grid.orders = vec![q];
        }
        if let Some(m) = self.m {
            grid.bandwidths = vec![m];
        }
        grid
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StandardErrorColumn {
    pub estimate: HacEstimate,
    pub se: Vec<f64>,
    pub p_values: Vec<f64>,
}

/// Prewhitening diagnostics of the moment series.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// Eigenvalue magnitudes of the OLS VAR(1) coefficient matrix.
    pub ols_eigen_magnitudes: Vec<f64>,
    pub ols_singular_values: Vec<f64>,
    pub adjustment_triggered: bool,
    pub adjustment_distortion: f64,
    /// Eigenvalue magnitudes of the Burg VAR(1) coefficient matrix.
    pub burg_eigen_magnitudes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalResult {
    pub names: Vec<String>,
    pub n: usize,
    pub beta_hat: Vec<f64>,
    pub columns: Vec<StandardErrorColumn>,
    /// Estimators that failed, with the reason.
    pub failures: Vec<(EstimatorTag, String)>,
    pub diagnostics: Diagnostics,
}

/// `*` for p < 0.05, `**` for p < 0.01, `***` for p < 0.001.
pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

fn diagnostics(v: &MomentSeries) -> Result<Diagnostics> {
    let ols = varfit::ols_var(v.matrix(), 1)?;
    let report = varfit::eigen_adjust(&ols.coefficients[0], ADJUSTMENT_THRESHOLD)?;
    let burg = varfit::burg_var(v.matrix(), 1)?;
    Ok(Diagnostics {
        ols_eigen_magnitudes: report.original_eigen_magnitudes.clone(),
        ols_singular_values: report.singular_values.clone(),
        adjustment_triggered: report.triggered,
        adjustment_distortion: report.distortion,
        burg_eigen_magnitudes: linalg::eigen_magnitudes(&burg.coefficients[0])?,
    })
}

pub fn fit_dataset(data: &CsvData, options: &FitOptions) -> Result<EmpiricalResult> {
    if options.estimators.is_empty() {
        return Err(HacError::InvalidParameter("no estimators selected".into()));
    }
    let fit = regress::ols(&data.y, &data.x)?;
    let v = regress::moment_series(&fit, &data.x)?;
    let n = data.y.len();
    let grid = options.grid(n);
    grid.validate()?;
    let mut columns = Vec::new();
    let mut failures = Vec::new();
    for &tag in &options.estimators {
        match standard_error_column(tag, &fit, &v, &grid) {
            Ok(col) => columns.push(col),
            Err(e) => failures.push((tag, e.to_string())),
        }
    }
    if columns.is_empty() {
        let (_, reason) = failures.swap_remove(0);
        return Err(HacError::Degenerate(format!("every estimator failed; first failure: {reason}")));
    }
    Ok(EmpiricalResult {
        names: data.names.clone(),
        n,
        beta_hat: fit.beta_hat.iter().copied().collect(),
        columns,
        failures,
        diagnostics: diagnostics(&v)?,
    })
}

fn standard_error_column(
    tag: EstimatorTag,
    fit: &OlsFit,
    v: &MomentSeries,
    grid: &CandidateGrid,
) -> Result<StandardErrorColumn> {
    let estimate = super::estimate(tag, v, grid)?;
    let sandwich = estimate.sandwich(&fit.xtx_over_n)?;
    let se = regress::standard_errors(&sandwich, fit.n());
    let p_values = fit
        .beta_hat
        .iter()
        .zip(&se)
        .map(|(b, s)| regress::normal_p_value(*b, *s))
        .collect();
    Ok(StandardErrorColumn { estimate, se, p_values })
}

pub fn fit_csv(path: &Path, y: &str, x: &[String], options: &FitOptions) -> Result<EmpiricalResult> {
    fit_dataset(&read_csv(path, y, x)?, options)
}

impl EmpiricalResult {
    pub fn column(&self, tag: EstimatorTag) -> Option<&StandardErrorColumn> {
        self.columns.iter().find(|c| c.estimate.estimator == tag)
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        let mut headers = vec!["coefficient".to_string(), "estimate".to_string()];
        headers.extend(self.columns.iter().map(|c| c.estimate.estimator.name().to_string()));
        let mut t = Table::new(headers);
        for (i, name) in self.names.iter().enumerate() {
            let mut row = vec![name.clone(), fmt_num(self.beta_hat[i])];
            for c in &self.columns {
                row.push(format!("{}{}", fmt_num(c.se[i]), stars(c.p_values[i])));
            }
            t.push(row);
        }
        let mut out = t.render(format)?;
        if format == OutputFormat::Markdown {
            out.push_str("\n* p<0.05, ** p<0.01, *** p<0.001\n\n");
            let d = &self.diagnostics;
            let list = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ");
            out.push_str(&format!("n = {}\n", self.n));
            out.push_str(&format!("OLS VAR(1) eigenvalue magnitudes: {}\n", list(&d.ols_eigen_magnitudes)));
            out.push_str(&format!("OLS VAR(1) singular values: {}\n", list(&d.ols_singular_values)));
            out.push_str(&format!(
                "eigen adjustment triggered: {} (relative change {:.2}%)\n",
                if d.adjustment_triggered { "yes" } else { "no" },
                100.0 * d.adjustment_distortion
            ));
            out.push_str(&format!("Burg VAR(1) eigenvalue magnitudes: {}\n", list(&d.burg_eigen_magnitudes)));
            for c in &self.columns {
                let e = &c.estimate;
                out.push_str(&format!(
                    "{}: order {}, bandwidth {:.3}, prewhitener spectral radius {:.4}\n",
                    e.estimator, e.order, e.bandwidth, e.prewhitener_spectral_radius
                ));
            }
            for (tag, reason) in &self.failures {
                out.push_str(&format!("{tag}: failed: {reason}\n"));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub order: usize,
    pub se: f64,
    pub bandwidth: f64,
    pub spectral_radius: f64,
}

/// Standard error of coefficient `coef` with OLS VAR(q) prewhitening (no
/// adjustment) and the plug-in QS kernel, for `q = 0..=max_order`. Order 0
/// is the unprewhitened QS estimate.
pub fn order_sweep(data: &CsvData, max_order: usize, coef: usize) -> Result<Vec<SweepPoint>> {
    let k = data.x.ncols();
    if coef >= k {
        return Err(HacError::InvalidParameter(format!(
            "coefficient index {coef} out of range (model has {k} coefficients)"
        )));
    }
    let n = data.y.len();
    let required = k * max_order + max_order;
    if n <= required {
        return Err(HacError::InsufficientData { required: required + 1, actual: n });
    }
    let fit = regress::ols(&data.y, &data.x)?;
    let v = regress::moment_series(&fit, &data.x)?;
    (0..=max_order)
        .map(|q| {
            let est = if q == 0 {
                lrv::estimate_am(&v)?
            } else {
                let pw = lrv::prewhitened_spectrum(
                    v.matrix(),
                    q,
                    Kernel::Qs,
                    Bandwidth::PluginQs,
                    0.0,
                    VarMethod::Ols,
                    false,
                )?;
                HacEstimate {
                    s_hat: pw.spectrum.long_run_variance(),
                    estimator: EstimatorTag::AmPwUnadj,
                    order: q,
                    bandwidth: pw.bandwidth,
                    adjustment_triggered: false,
                    adjustment_distortion: 0.0,
                    prewhitener_spectral_radius: pw.model.spectral_radius()?,
                }
            };
            let sandwich = est.sandwich(&fit.xtx_over_n)?;
            Ok(SweepPoint {
                order: q,
                se: regress::standard_errors(&sandwich, n)[coef],
                bandwidth: est.bandwidth,
                spectral_radius: est.prewhitener_spectral_radius,
            })
        })
        .collect()
}

pub fn render_sweep(points: &[SweepPoint], format: OutputFormat) -> Result<String> {
    let mut t = Table::new(["order", "se", "bandwidth", "spectral_radius"]);
    for p in points {
        t.push(vec![
            p.order.to_string(),
            format!("{:.6e}", p.se),
            format!("{:.4}", p.bandwidth),
            format!("{:.4}", p.spectral_radius),
        ]);
    }
    t.render(format)
}

/// CVLL scores of every candidate on the moment series of `data`.
pub fn cvll_selection(data: &CsvData, options: &FitOptions) -> Result<cvll::Selection> {
    let fit = regress::ols(&data.y, &data.x)?;
    let v = regress::moment_series(&fit, &data.x)?;
    cvll::select(&v, &options.grid(data.y.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_selected_columns() {
        let csv = "a,b,c\n1,2,x\n2,4.5,y\n3,1,z\n4,0,w\n";
        let d = read_csv_from(csv.as_bytes(), "a", &x(&["b"])).unwrap();
        assert_eq!(d.names, vec!["(Intercept)", "b"]);
        assert_eq!(d.y.as_slice(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(d.x.column(1).as_slice(), &[2.0, 4.5, 1.0, 0.0]);
        assert!(d.x.column(0).iter().all(|v| *v == 1.0));
    }

    #[test]
    fn reports_row_and_column() {
        let csv = "a,b\n1,2\n2,\n3,1\n";
        let err = read_csv_from(csv.as_bytes(), "a", &x(&["b"])).unwrap_err().to_string();
        assert!(err.contains("row 2") && err.contains("`b`"), "{err}");
        let csv = "a,b\n1,2\n2,3\nfoo,1\n4,4\n";
        let err = read_csv_from(csv.as_bytes(), "a", &x(&["b"])).unwrap_err().to_string();
        assert!(err.contains("row 3") && err.contains("`a`"), "{err}");
        let err = read_csv_from(csv.as_bytes(), "a", &x(&["zz"])).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn constant_regressor_rejected() {
        let csv = "y,k\n1,5\n2,5\n3,5\n4,5\n";
        let err = read_csv_from(csv.as_bytes(), "y", &x(&["k"])).unwrap_err().to_string();
        assert!(err.contains("constant"), "{err}");
    }

    #[test]
    fn stars_thresholds() {
        assert_eq!(stars(0.0009), "***");
        assert_eq!(stars(0.001), "**");
        assert_eq!(stars(0.009), "**");
        assert_eq!(stars(0.01), "*");
        assert_eq!(stars(0.049), "*");
        assert_eq!(stars(0.05), "");
    }

    #[test]
    fn options_restrict_grid() {
        let o = FitOptions { q: Some(2), m: Some(3), ..FitOptions::default() };
        let g = o.grid(100);
        assert_eq!(g.orders, vec![2]);
        assert_eq!(g.bandwidths, vec![3]);
    }
}
