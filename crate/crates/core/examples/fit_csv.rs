//! Write a regression to CSV, then run the CSV pipeline on it: OLS, all
//! standard errors with significance stars, and prewhitening diagnostics.

use std::fmt::Write as _;

use cvhac::dgp::{make_dataset, ArSpec, Process, RngStreams};
use cvhac::harness::{self, FitOptions, OutputFormat};

fn main() -> cvhac::Result<()> {
    let n = 240;
    // one persistent regressor with a large mean, like an inflation gap
    let regressor: Process = ArSpec::ar1(0.54, 0.95).into();
    let error: Process = ArSpec::ar1(0.0, 0.6).into();
    let data = make_dataset(std::slice::from_ref(&regressor), &error, Some(&[1.0, 0.3]), n, &RngStreams::new(11), 0)?;

    let mut text = String::from("y,gap\n");
    for t in 0..n {
        let _ = writeln!(text, "{},{}", data.y[t], data.x[(t, 1)]);
    }
    let path = std::env::temp_dir().join("cvhac_fit_example.csv");
    std::fs::write(&path, text)?;

    let result = harness::fit_csv(&path, "y", &["gap".to_string()], &FitOptions::default())?;
    print!("{}", result.render(OutputFormat::Markdown)?);
    Ok(())
}
