//! A reduced Monte Carlo cell: AR(1) regressors and errors, phi = 0.6.
//! Pass a repetition count as the first argument (default 300).

use cvhac::harness::{self, DgpKind, McConfig, OutputFormat};

fn main() -> cvhac::Result<()> {
    let reps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(300);
    let mut config = McConfig::new(DgpKind::Ar1 { phi: 0.6 });
    config.repetitions = reps;
    let report = harness::run_monte_carlo(&config)?;
    print!("{}", report.render(OutputFormat::Markdown)?);
    Ok(())
}
