//! Standard error of the slope as the OLS prewhitening order runs from 0
//! to 8, on errors whose dependence is mostly at lag 2.

use cvhac::dgp::{make_dataset, ArSpec, Process, RngStreams};
use cvhac::harness::{self, CsvData, OutputFormat};

fn main() -> cvhac::Result<()> {
    let n = 400;
    let regressor: Process = ArSpec::new(2.0, vec![0.1, 0.7]).into();
    let error: Process = ArSpec::new(0.0, vec![0.1, 0.7]).into();
    let data = make_dataset(std::slice::from_ref(&regressor), &error, None, n, &RngStreams::new(5), 0)?;
    let csv = CsvData {
        names: vec!["(Intercept)".into(), "x".into()],
        y: data.y.clone(),
        x: data.x.clone(),
    };
    let points = harness::order_sweep(&csv, 8, 1)?;
    print!("{}", harness::render_sweep(&points, OutputFormat::Markdown)?);
    Ok(())
}
