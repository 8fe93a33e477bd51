//! Joint selection of the prewhitening order and Parzen bandwidth by a
//! localized leave-one-frequency-out Whittle likelihood (CVLL).
//!
//! For each of the first `J = floor((n/2)^c)` Fourier frequencies `w_j`, the
//! transform value at `w_j` is replaced by the average of its neighbours,
//! the series is rebuilt, the VAR prewhitener is refitted on it, and the
//! resulting prewhitened Parzen estimate `f_{-j}(w_j)` is scored against the
//! periodogram of the original series:
//!
//! ```text
//! CVLL(q, m) = sum_j log det f_{-j}(w_j) + tr[I(w_j) f_{-j}(w_j)^{-1}]
//! ```

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{HacError, Result};
use crate::linalg::CMatrix;
use crate::lrv::{self, Bandwidth, Kernel};
use crate::regress::{EstimatorTag, HacEstimate, MomentSeries};
use crate::spectral::{self, DftSequence, LooVariant};
use crate::varfit::{self, VarMethod};

pub const DEFAULT_C: f64 = 0.8;

/// Largest integer `k >= 0` with `k <= x`, where `x = exp(log_x)`, robust to
/// rounding when `x` is an exact integer.
fn floor_exp(log_x: f64) -> usize {
    let mut k = log_x.exp().floor().max(0.0) as usize;
    while k > 0 && (k as f64).ln() > log_x + 1e-12 {
        k -= 1;
    }
    while ((k + 1) as f64).ln() <= log_x + 1e-12 {
        k += 1;
    }
    k
}

/// Number of frequencies in the criterion, `floor((n/2)^c)`, at least 1 and
/// at most `floor((n-1)/2)`.
pub fn frequency_count(n: usize, c: f64) -> Result<usize> {
    if !(c > 0.0 && c < 1.0) {
        return Err(HacError::InvalidParameter(format!(
            "localization exponent must lie in (0, 1), got {c}"
        )));
    }
    if n < 4 {
        return Err(HacError::InsufficientData { required: 4, actual: n });
    }
    let k = floor_exp(c * (n as f64 / 2.0).ln());
    Ok(k.clamp(1, (n - 1) / 2))
}

/// Largest candidate bandwidth, `floor(4 (n/100)^{2/9})`, at least 1.
pub fn bandwidth_cap(n: usize) -> usize {
    let log_x = 4f64.ln() + (2.0 / 9.0) * (n as f64 / 100.0).ln();
    floor_exp(log_x).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateGrid {
    pub orders: Vec<usize>,
    pub bandwidths: Vec<usize>,
    pub c: f64,
    pub fit_method: VarMethod,
    pub variant: LooVariant,
}

impl CandidateGrid {
    /// Orders `{1, 2}`, bandwidths `1..=floor(4 (n/100)^{2/9})`, `c = 0.8`,
    /// Burg prewhitening.
    pub fn default_for(n: usize) -> Self {
        Self {
            orders: vec![1, 2],
            bandwidths: (1..=bandwidth_cap(n)).collect(),
            c: DEFAULT_C,
            fit_method: VarMethod::Burg,
            variant: LooVariant::Standard,
        }
    }

    pub fn single(q: usize, m: usize) -> Self {
        Self {
            orders: vec![q],
            bandwidths: vec![m],
            c: DEFAULT_C,
            fit_method: VarMethod::Burg,
            variant: LooVariant::Standard,
        }
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.orders.is_empty() || self.bandwidths.is_empty() {
            return Err(HacError::InvalidParameter("candidate grid is empty".into()));
        }
        if self.orders.contains(&0) {
            return Err(HacError::InvalidParameter("candidate orders must be at least 1".into()));
        }
        if self.bandwidths.contains(&0) {
            return Err(HacError::InvalidParameter("candidate bandwidths must be at least 1".into()));
        }
        if !(self.c > 0.0 && self.c < 1.0) {
            return Err(HacError::InvalidParameter(format!(
                "localization exponent must lie in (0, 1), got {}",
                self.c
            )));
        }
        Ok(())
    }

    fn sorted(&self) -> (Vec<usize>, Vec<usize>) {
        let mut orders = self.orders.clone();
        orders.sort_unstable();
        orders.dedup();
        let mut bandwidths = self.bandwidths.clone();
        bandwidths.sort_unstable();
        bandwidths.dedup();
        (orders, bandwidths)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvllScore {
    pub q: usize,
    pub m: usize,
    /// `NaN` when excluded.
    pub score: f64,
    pub excluded: Option<String>,
}

impl CvllScore {
    pub fn is_excluded(&self) -> bool {
        self.excluded.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub q: usize,
    pub m: usize,
    /// Every candidate, ordered by `(q, m)`.
    pub scores: Vec<CvllScore>,
    /// Frequency indices `j` entering the criterion.
    pub frequencies: Vec<usize>,
    /// VAR refits performed per candidate order.
    pub refits_per_order: usize,
}

/// `log det f + tr[I f^{-1}]` with `I = (n / 2 pi) J J^*`, via the Cholesky
/// factor of the Hermitian matrix `f`.
pub fn whittle_term(f: &CMatrix, j_vec: &DVector<Complex64>, n: usize) -> Result<f64> {
    let chol = Cholesky::new(f.clone()).ok_or(HacError::Singular {
        context: "leave-one-out spectral estimate",
        condition: f64::INFINITY,
    })?;
    let l = chol.l();
    let mut logdet = 0.0;
    for i in 0..l.nrows() {
        let d = l[(i, i)].re;
        if !(d > 0.0) || !d.is_finite() {
            return Err(HacError::Singular {
                context: "leave-one-out spectral estimate",
                condition: f64::INFINITY,
            });
        }
        logdet += 2.0 * d.ln();
    }
    let z = l
        .solve_lower_triangular(j_vec)
        .ok_or(HacError::Singular {
            context: "leave-one-out spectral estimate",
            condition: f64::INFINITY,
        })?;
    let quad: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    let value = logdet + n as f64 / (2.0 * PI) * quad;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(HacError::NonFinite("CVLL term"))
    }
}

/// Per-frequency terms for every `(q, m)` candidate, or the reason the
/// candidate failed at this frequency.
fn frequency_terms(
    v: &DMatrix<f64>,
    seq: &DftSequence,
    j: usize,
    orders: &[usize],
    bandwidths: &[usize],
    grid: &CandidateGrid,
) -> Vec<std::result::Result<f64, String>> {
    let n = v.nrows();
    let k = v.ncols();
    let d = k - 1;
    let omega = spectral::fourier_frequency(j, n);
    let j_vec = seq.at(j);
    let mut out = Vec::with_capacity(orders.len() * bandwidths.len());
    let loo = spectral::leave_one_out_series(v, seq, j, grid.variant);
    let max_lag = bandwidths.iter().copied().max().unwrap_or(1).saturating_sub(1);
    for &q in orders {
        let prepared = loo.as_ref().map_err(|e| e.to_string()).and_then(|loo| {
            let model = varfit::fit_var(loo, q, grid.fit_method).map_err(|e| e.to_string())?;
            let phi = lrv::recoloring_filter(&model.coefficients, k, omega).map_err(|e| e.to_string())?;
            let gammas = lrv::autocovariances(&model.residuals, max_lag, n);
            Ok((phi, gammas))
        });
        for &m in bandwidths {
            let term = prepared.as_ref().map_err(|e| e.clone()).and_then(|(phi, gammas)| {
                let factor = n as f64 / (n - d - 1) as f64;
                let inner = lrv::spectrum_from_autocov(gammas, Kernel::Parzen, m as f64, omega, factor)
                    .map_err(|e| e.to_string())?;
                let f = phi * &inner.f * phi.adjoint();
                whittle_term(&f, &j_vec, n).map_err(|e| format!("frequency {j}: {e}"))
            });
            out.push(term);
        }
    }
    out
}

/// Score every candidate of `grid` on `v`.
pub fn select(v: &MomentSeries, grid: &CandidateGrid) -> Result<Selection> {
    grid.validate()?;
    let (orders, bandwidths) = grid.sorted();
    let mat = v.matrix();
    let (n, k) = mat.shape();
    if n <= k {
        return Err(HacError::InsufficientData { required: k + 1, actual: n });
    }
    let count = frequency_count(n, grid.c)?;
    let seq = spectral::dft(mat)?;
    let frequencies: Vec<usize> = (1..=count).collect();

    let per_frequency: Vec<Vec<std::result::Result<f64, String>>> = frequencies
        .par_iter()
        .map(|&j| frequency_terms(mat, &seq, j, &orders, &bandwidths, grid))
        .collect();

    let mut scores = Vec::with_capacity(orders.len() * bandwidths.len());
    for (qi, &q) in orders.iter().enumerate() {
        for (mi, &m) in bandwidths.iter().enumerate() {
            let idx = qi * bandwidths.len() + mi;
            let mut total = 0.0;
            let mut excluded = None;
            for terms in &per_frequency {
                match &terms[idx] {
                    Ok(x) => total += x,
                    Err(reason) => {
                        excluded = Some(reason.clone());
                        break;
                    }
                }
            }
            if let Some(reason) = &excluded {
                log::warn!("CVLL candidate (q={q}, m={m}) excluded: {reason}");
            }
            scores.push(CvllScore {
                q,
                m,
                score: if excluded.is_some() { f64::NAN } else { total },
                excluded,
            });
        }
    }

    // strict `<` in (q, m) order keeps the smallest (q, m) on ties
    let mut best: Option<&CvllScore> = None;
    for s in scores.iter().filter(|s| !s.is_excluded()) {
        if best.is_none_or(|b| s.score < b.score) {
            best = Some(s);
        }
    }
    let best = best.ok_or_else(|| {
        HacError::AllCandidatesExcluded(
            scores
                .iter()
                .map(|s| format!("(q={}, m={}): {}", s.q, s.m, s.excluded.as_deref().unwrap_or("")))
                .collect(),
        )
    })?;
    let (q, m) = (best.q, best.m);
    Ok(Selection {
        q,
        m,
        scores,
        refits_per_order: frequencies.len(),
        frequencies,
    })
}

/// Criterion value of a single candidate.
pub fn cvll_score(v: &MomentSeries, q: usize, m: usize, c: f64, fit_method: VarMethod) -> Result<CvllScore> {
    let mut grid = CandidateGrid::single(q, m).with_c(c);
    grid.fit_method = fit_method;
    grid.validate()?;
    let (orders, bandwidths) = grid.sorted();
    let mat = v.matrix();
    let count = frequency_count(mat.nrows(), c)?;
    let seq = spectral::dft(mat)?;
    let mut total = 0.0;
    for j in 1..=count {
        match frequency_terms(mat, &seq, j, &orders, &bandwidths, &grid).remove(0) {
            Ok(x) => total += x,
            Err(reason) => {
                return Ok(CvllScore {
                    q,
                    m,
                    score: f64::NAN,
                    excluded: Some(reason),
                })
            }
        }
    }
    Ok(CvllScore { q, m, score: total, excluded: None })
}

/// Select `(q*, m*)` and return the full-sample prewhitened Parzen estimate
/// at frequency zero.
pub fn estimate_cvll(v: &MomentSeries, grid: &CandidateGrid) -> Result<HacEstimate> {
    let selection = select(v, grid)?;
    estimate_with(v, selection.q, selection.m, grid.fit_method)
}

/// Full-sample prewhitened Parzen estimate for a given `(q, m)`.
pub fn estimate_with(v: &MomentSeries, q: usize, m: usize, fit_method: VarMethod) -> Result<HacEstimate> {
    let pw = lrv::prewhitened_spectrum(
        v.matrix(),
        q,
        Kernel::Parzen,
        Bandwidth::Fixed(m as f64),
        0.0,
        fit_method,
        false,
    )?;
    let s_hat = pw.spectrum.long_run_variance();
    crate::linalg::check_finite(&s_hat, "long-run variance estimate")?;
    Ok(HacEstimate {
        s_hat,
        estimator: EstimatorTag::Cvll,
        order: q,
        bandwidth: m as f64,
        adjustment_triggered: false,
        adjustment_distortion: 0.0,
        prewhitener_spectral_radius: pw.model.spectral_radius()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::RngStreams;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn ar_series(n: usize, k: usize, phi: f64, seed: u64) -> MomentSeries {
        let mut rng = RngStreams::new(seed).stream(0, 0);
        let mut v = DMatrix::<f64>::from_fn(n, k, |_, _| rng.sample(StandardNormal));
        for t in 1..n {
            for c in 0..k {
                v[(t, c)] += phi * v[(t - 1, c)];
            }
        }
        MomentSeries::new(v).unwrap()
    }

    #[test]
    fn frequency_count_examples() {
        // 22^5 = 5_153_632 <= 50^4 = 6_250_000 < 23^5 = 6_436_343
        assert_eq!(frequency_count(100, 0.8).unwrap(), 22);
        // 39^5 = 90_224_199 <= 100^4 = 10^8 < 40^5 = 1.024e8
        assert_eq!(frequency_count(200, 0.8).unwrap(), 39);
        assert_eq!(frequency_count(100, 0.01).unwrap(), 1);
        // exact power: 32^0.8 = 16
        assert_eq!(frequency_count(64, 0.8).unwrap(), 16);
        assert!(frequency_count(100, 1.0).is_err());
        assert!(frequency_count(100, 0.0).is_err());
        assert!(frequency_count(3, 0.5).is_err());
        for n in 4..300 {
            assert!(frequency_count(n, 0.99).unwrap() <= (n - 1) / 2);
        }
    }

    #[test]
    fn bandwidth_cap_examples() {
        // 4^9 n^2 / 100^2 >= k^9: n = 100 -> 4, n = 200 -> 4 (4.67), n = 500 -> 5
        assert_eq!(bandwidth_cap(100), 4);
        assert_eq!(bandwidth_cap(200), 4);
        assert_eq!(bandwidth_cap(500), 5);
        assert_eq!(bandwidth_cap(1), 1);
        let g = CandidateGrid::default_for(100);
        assert_eq!(g.orders, vec![1, 2]);
        assert_eq!(g.bandwidths, vec![1, 2, 3, 4]);
    }

    #[test]
    fn whittle_term_matches_direct_formula() {
        let f = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(2.0, 0.0),
                Complex64::new(0.3, 0.4),
                Complex64::new(0.3, -0.4),
                Complex64::new(1.5, 0.0),
            ],
        );
        let j = DVector::from_vec(vec![Complex64::new(0.2, -0.1), Complex64::new(-0.3, 0.5)]);
        let n = 50;
        let det = (f[(0, 0)] * f[(1, 1)] - f[(0, 1)] * f[(1, 0)]).re;
        let inv = f.clone().try_inverse().unwrap();
        let periodogram = &j * j.adjoint() * Complex64::new(n as f64 / (2.0 * PI), 0.0);
        let tr = (periodogram * inv).trace().re;
        let got = whittle_term(&f, &j, n).unwrap();
        assert!((got - (det.ln() + tr)).abs() < 1e-12);
    }

    #[test]
    fn singular_spectrum_is_rejected() {
        let f = CMatrix::from_element(2, 2, Complex64::new(1.0, 0.0));
        let j = DVector::from_element(2, Complex64::new(1.0, 0.0));
        assert!(whittle_term(&f, &j, 10).is_err());
    }

    #[test]
    fn single_candidate_is_selected() {
        let v = ar_series(100, 3, 0.5, 1);
        let sel = select(&v, &CandidateGrid::single(2, 3)).unwrap();
        assert_eq!((sel.q, sel.m), (2, 3));
        assert_eq!(sel.scores.len(), 1);
    }

    #[test]
    fn doubling_shifts_scores_by_constant() {
        let v = ar_series(100, 3, 0.7, 2);
        let grid = CandidateGrid::default_for(100);
        let a = select(&v, &grid).unwrap();
        let b = select(&v.scaled(2.0), &grid).unwrap();
        let shift = 22.0 * 3.0 * 4f64.ln();
        for (x, y) in a.scores.iter().zip(&b.scores) {
            assert!((y.score - x.score - shift).abs() < 1e-8, "{} vs {}", x.score, y.score);
        }
        assert_eq!((a.q, a.m), (b.q, b.m));
    }

    #[test]
    fn argmin_invariant_under_scaling() {
        for seed in 0..5 {
            let v = ar_series(100, 2, 0.9, 10 + seed);
            let grid = CandidateGrid::default_for(100);
            let a = select(&v, &grid).unwrap();
            for c in [0.01, 0.3, 17.0] {
                let b = select(&v.scaled(c), &grid).unwrap();
                assert_eq!((a.q, a.m), (b.q, b.m));
            }
        }
    }

    #[test]
    fn counting_audit() {
        let v = ar_series(100, 2, 0.3, 3);
        let sel = select(&v, &CandidateGrid::default_for(100)).unwrap();
        assert_eq!(sel.frequencies, (1..=22).collect::<Vec<_>>());
        assert_eq!(sel.refits_per_order, 22);
        assert_eq!(sel.scores.len(), 8);
        let pairs: Vec<(usize, usize)> = sel.scores.iter().map(|s| (s.q, s.m)).collect();
        assert_eq!(pairs[0], (1, 1));
        assert_eq!(pairs[7], (2, 4));
    }

    #[test]
    fn single_score_matches_grid_score() {
        let v = ar_series(120, 2, 0.6, 4);
        let sel = select(&v, &CandidateGrid::default_for(120)).unwrap();
        for s in &sel.scores {
            let one = cvll_score(&v, s.q, s.m, DEFAULT_C, VarMethod::Burg).unwrap();
            assert!((one.score - s.score).abs() < 1e-9 * s.score.abs().max(1.0));
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let v = ar_series(150, 3, 0.8, 5);
        let grid = CandidateGrid::default_for(150);
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| select(&v, &grid).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a, b);
    }

    #[test]
    fn forced_zero_prewhitener_unit_bandwidth() {
        // Parzen m = 1 keeps only lag zero; with an exactly white-looking
        // VAR fit replaced by zeros this is dof * Gamma(0)
        let v = ar_series(80, 2, 0.0, 6);
        let model = varfit::burg_var(v.matrix(), 1).unwrap();
        let zero = model.with_coefficients(v.matrix(), vec![DMatrix::zeros(2, 2)]).unwrap();
        let (s, _) = lrv::recolored_spectrum(80, &zero, Kernel::Parzen, Bandwidth::Fixed(1.0), 0.0).unwrap();
        let resid = v.matrix().rows(1, 79);
        let g0 = resid.transpose() * resid / 80.0 * (80.0 / 78.0);
        assert!((s.long_run_variance() - g0).amax() < 1e-12);
    }

    #[test]
    fn cvll_estimate_reports_selection() {
        let v = ar_series(100, 3, 0.5, 7);
        let grid = CandidateGrid::default_for(100);
        let sel = select(&v, &grid).unwrap();
        let est = estimate_cvll(&v, &grid).unwrap();
        assert_eq!(est.order, sel.q);
        assert_eq!(est.bandwidth, sel.m as f64);
        assert!(est.prewhitener_spectral_radius < 1.0);
        assert!(crate::linalg::min_symmetric_eigenvalue(&est.s_hat) > 0.0);
    }

    #[test]
    fn invalid_grids() {
        let v = ar_series(100, 2, 0.5, 8);
        let mut g = CandidateGrid::default_for(100);
        g.orders.clear();
        assert!(select(&v, &g).is_err());
        let g = CandidateGrid::single(1, 0);
        assert!(select(&v, &g).is_err());
        let g = CandidateGrid::default_for(100).with_c(1.5);
        assert!(select(&v, &g).is_err());
    }
}
