//! Monte Carlo experiments, the eigen-adjustment analyses, and the
//! empirical CSV pipeline.

pub mod eigen;
pub mod empirical;
pub mod montecarlo;
mod table;

pub use eigen::{eigen_analysis_empirical, eigen_analysis_theoretical, render_eigen_rows, EigenRow};
pub use empirical::{
    cvll_selection, fit_csv, fit_dataset, order_sweep, read_csv, read_csv_from, render_sweep, stars, CsvData,
    Diagnostics, EmpiricalResult, FitOptions, StandardErrorColumn, SweepPoint,
};
pub use montecarlo::{
    run_monte_carlo, DgpKind, EstimatorDraw, EstimatorSummary, McConfig, McReport, MomentSummary, RepRecord,
};
pub use table::OutputFormat;

use crate::cvll::{self, CandidateGrid};
use crate::error::Result;
use crate::lrv;
use crate::regress::{EstimatorTag, HacEstimate, MomentSeries};

/// Dispatch an estimator tag. `grid` is used by CVLL only.
pub fn estimate(tag: EstimatorTag, v: &MomentSeries, grid: &CandidateGrid) -> Result<HacEstimate> {
    match tag {
        EstimatorTag::Am => lrv::estimate_am(v),
        EstimatorTag::AmPw => lrv::estimate_am_pw(v),
        EstimatorTag::AmPwUnadj => lrv::estimate_am_pw_unadj(v),
        EstimatorTag::BurgPw => lrv::estimate_burg_pw(v),
        EstimatorTag::Cvll => cvll::estimate_cvll(v, grid),
    }
}

/// Parse a comma-separated estimator list; `all` selects the four
/// standard estimators.
pub fn parse_estimators(list: &str) -> Result<Vec<EstimatorTag>> {
    let mut out = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if item.eq_ignore_ascii_case("all") {
            out.extend(EstimatorTag::PAPER_SET);
        } else {
            out.push(EstimatorTag::parse(item)?);
        }
    }
    let mut seen = std::collections::HashSet::new();
    out.retain(|t| seen.insert(*t));
    if out.is_empty() {
        return Err(crate::HacError::InvalidParameter("no estimators selected".into()));
    }
    Ok(out)
}

/// Parse a comma-separated list of reals.
pub fn parse_reals(list: &str) -> Result<Vec<f64>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| crate::HacError::InvalidParameter(format!("not a number: `{s}`")))
        })
        .collect()
}
