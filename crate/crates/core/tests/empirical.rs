use std::fmt::Write as _;
use std::io::Cursor;

use cvhac::cvll::CandidateGrid;
use cvhac::dgp::{make_dataset, ArSpec, Process, RegressionDataset, RngStreams};
use cvhac::harness::{self, CsvData, FitOptions};
use cvhac::regress::{self, EstimatorTag};

fn dataset(regressor: ArSpec, error: ArSpec, n: usize, seed: u64) -> RegressionDataset {
    let regressor: Process = regressor.into();
    make_dataset(&[regressor], &error.into(), Some(&[1.0, 0.3]), n, &RngStreams::new(seed), 0).unwrap()
}

fn to_csv(data: &RegressionDataset) -> String {
    let mut text = String::from("y,x1\n");
    for t in 0..data.y.len() {
        // Display prints the shortest string that parses back to the same f64
        let _ = writeln!(text, "{},{}", data.y[t], data.x[(t, 1)]);
    }
    text
}

fn parse(text: &str) -> CsvData {
    harness::read_csv_from(Cursor::new(text.as_bytes()), "y", &["x1".to_string()]).unwrap()
}

#[test]
fn csv_round_trip_is_bit_exact() {
    let data = dataset(ArSpec::ar1(0.5, 0.8), ArSpec::ar1(0.0, 0.5), 150, 3);
    let parsed = parse(&to_csv(&data));
    assert_eq!(parsed.y, data.y);
    assert_eq!(parsed.x, data.x);

    let options = FitOptions::default();
    let result = harness::fit_dataset(&parsed, &options).unwrap();

    let fit = regress::ols(&data.y, &data.x).unwrap();
    let v = regress::moment_series(&fit, &data.x).unwrap();
    let grid = options.grid(data.y.len());
    for tag in EstimatorTag::PAPER_SET {
        let est = harness::estimate(tag, &v, &grid).unwrap();
        let se = regress::standard_errors(&est.sandwich(&fit.xtx_over_n).unwrap(), fit.n());
        let col = result.column(tag).unwrap();
        for (a, b) in col.se.iter().zip(&se) {
            assert_eq!(a.to_bits(), b.to_bits(), "{}", tag.name());
        }
    }
}

#[test]
fn fit_csv_matches_fit_dataset() {
    let data = dataset(ArSpec::ar1(0.0, 0.5), ArSpec::ar1(0.0, 0.3), 120, 5);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    std::fs::write(&path, to_csv(&data)).unwrap();
    let options = FitOptions::default();
    let a = harness::fit_csv(&path, "y", &["x1".to_string()], &options).unwrap();
    let b = harness::fit_dataset(&parse(&to_csv(&data)), &options).unwrap();
    assert_eq!(a.render(harness::OutputFormat::Csv).unwrap(), b.render(harness::OutputFormat::Csv).unwrap());
}

#[test]
fn empty_cell_reports_row_and_column() {
    let text = "y,x1\n1,2\n2,3\n3,\n4,5\n";
    let err = harness::read_csv_from(Cursor::new(text.as_bytes()), "y", &["x1".to_string()]).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("row 3") && msg.contains("x1"), "{msg}");
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn missing_column_is_a_data_error() {
    let text = "y,x1\n1,2\n";
    let err = harness::read_csv_from(Cursor::new(text.as_bytes()), "y", &["x9".to_string()]).unwrap_err();
    assert!(err.to_string().contains("x9"));
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn large_mean_regressor_triggers_clamp_below_unit_eigenvalues() {
    // regressor mean 10.7, so the intercept and slope moments are nearly collinear
    let data = dataset(ArSpec::ar1(10.7 * 0.1, 0.9), ArSpec::ar1(0.0, 0.9), 240, 9);
    let result = harness::fit_dataset(&parse(&to_csv(&data)), &FitOptions::default()).unwrap();
    let diag = &result.diagnostics;
    assert!(diag.adjustment_triggered, "{diag:?}");
    assert!(diag.ols_eigen_magnitudes.iter().all(|&m| m < 0.97), "{diag:?}");
    assert!(diag.ols_singular_values[0] > 0.97);
}

#[test]
fn white_noise_sweep_is_flat() {
    let data = dataset(ArSpec::white_noise(), ArSpec::white_noise(), 1000, 21);
    let points = harness::order_sweep(&parse(&to_csv(&data)), 6, 1).unwrap();
    let base = points[0].se;
    for p in &points {
        assert!((p.se / base - 1.0).abs() < 0.1, "order {}: {} vs {}", p.order, p.se, base);
    }
}

#[test]
fn ar2_sweep_stabilizes_from_order_two() {
    let data = dataset(ArSpec::new(0.0, vec![0.5, 0.3]), ArSpec::new(0.0, vec![0.5, 0.3]), 2000, 22);
    let points = harness::order_sweep(&parse(&to_csv(&data)), 6, 1).unwrap();
    let at2 = points[2].se;
    for p in &points[2..] {
        assert!((p.se / at2 - 1.0).abs() < 0.1, "order {}: {} vs {}", p.order, p.se, at2);
    }
}

#[test]
fn sweep_order_zero_is_am() {
    let data = dataset(ArSpec::ar1(0.0, 0.7), ArSpec::ar1(0.0, 0.7), 200, 4);
    let parsed = parse(&to_csv(&data));
    let points = harness::order_sweep(&parsed, 2, 1).unwrap();
    let result = harness::fit_dataset(
        &parsed,
        &FitOptions { estimators: vec![EstimatorTag::Am], ..FitOptions::default() },
    )
    .unwrap();
    assert_eq!(points[0].se, result.column(EstimatorTag::Am).unwrap().se[1]);
}

#[test]
fn restricted_grid_selects_given_order() {
    let data = dataset(ArSpec::ar1(0.0, 0.7), ArSpec::ar1(0.0, 0.7), 200, 6);
    let options = FitOptions { q: Some(2), m: Some(3), ..FitOptions::default() };
    let grid: CandidateGrid = options.grid(200);
    assert_eq!((grid.orders.clone(), grid.bandwidths.clone()), (vec![2], vec![3]));
    let result = harness::fit_dataset(&parse(&to_csv(&data)), &options).unwrap();
    let cvll = result.column(EstimatorTag::Cvll).unwrap();
    assert_eq!((cvll.estimate.order, cvll.estimate.bandwidth), (2, 3.0));
}
