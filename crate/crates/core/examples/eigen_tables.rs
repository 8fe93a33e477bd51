//! Singular-value clamp on the VAR(1) of `V_t = u_t X_t`: closed form for
//! the population coefficient matrix, and its frequency on simulated data.

use cvhac::harness::{self, OutputFormat};

fn main() -> cvhac::Result<()> {
    let phis = [0.3, 0.5, 0.7, 0.9];

    println!("population A, alpha = 2, d = 1\n");
    let rows = harness::eigen_analysis_theoretical(2.0, &phis, 1)?;
    print!("{}", harness::render_eigen_rows(&rows, OutputFormat::Markdown)?);

    println!("\nOLS VAR(1) on simulated V, alpha = 2, n = 500, 300 repetitions\n");
    let rows = harness::eigen_analysis_empirical(2.0, &phis, 500, 300, 1)?;
    print!("{}", harness::render_eigen_rows(&rows, OutputFormat::Markdown)?);

    println!("\nsame with zero-mean regressors\n");
    let rows = harness::eigen_analysis_empirical(0.0, &phis, 500, 300, 1)?;
    print!("{}", harness::render_eigen_rows(&rows, OutputFormat::Markdown)?);
    Ok(())
}
