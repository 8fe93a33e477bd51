use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cvhac::harness::{self, DgpKind, FitOptions, McConfig, OutputFormat};
use cvhac::{HacError, Result};

#[derive(Parser)]
#[command(name = "cvhac", version, about = "Prewhitened HAC standard errors and their Monte Carlo evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo comparison of HAC estimators.
    Mc(McArgs),
    /// Eigenvalues, singular values and clamp behavior of the VAR(1) fitted to the moment series.
    EigenAnalysis(EigenArgs),
    /// OLS with HAC standard errors for a CSV file.
    Fit(FitArgs),
    /// Standard error of one coefficient across OLS VAR prewhitening orders.
    OrderSweep(SweepArgs),
}

#[derive(Args)]
struct McArgs {
    #[arg(long, default_value = "ar1")]
    dgp: String,
    /// One value or a comma-separated list.
    #[arg(long)]
    phi: Option<String>,
    #[arg(long)]
    theta1: Option<f64>,
    #[arg(long)]
    theta2: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value = "all")]
    estimators: String,
    #[arg(long, default_value_t = 20_261_016)]
    seed: u64,
    #[arg(long, default_value_t = cvhac::cvll::DEFAULT_C)]
    c: f64,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "md")]
    format: String,
}

#[derive(Args)]
struct EigenArgs {
    #[arg(long, default_value = "theoretical")]
    mode: String,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value = "0.3,0.5,0.7,0.9")]
    phis: String,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = 20_261_016)]
    seed: u64,
    /// Number of regressors (theoretical mode).
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value = "md")]
    format: String,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    y: String,
    /// Comma-separated regressor columns; an intercept is always added.
    #[arg(long)]
    x: String,
    #[arg(long, default_value = "all")]
    estimator: String,
    /// Fix the CVLL prewhitening order.
    #[arg(long)]
    q: Option<usize>,
    /// Fix the CVLL bandwidth.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = cvhac::cvll::DEFAULT_C)]
    c: f64,
    #[arg(long, default_value = "md")]
    format: String,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    y: String,
    #[arg(long)]
    x: String,
    #[arg(long, default_value_t = 16)]
    max_order: usize,
    /// Coefficient index; 0 is the intercept.
    #[arg(long, default_value_t = 1)]
    coef: usize,
    #[arg(long, default_value = "csv")]
    format: String,
}

fn columns(list: &str) -> Vec<String> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

fn run_mc(a: McArgs) -> Result<String> {
    let format = OutputFormat::parse(&a.format)?;
    let estimators = harness::parse_estimators(&a.estimators)?;
    let phis: Vec<Option<f64>> = match &a.phi {
        Some(list) => harness::parse_reals(list)?.into_iter().map(Some).collect(),
        None => vec![None],
    };
    let mut out = String::new();
    for (i, phi) in phis.into_iter().enumerate() {
        let mut config = McConfig::new(DgpKind::parse(&a.dgp, phi, a.theta1, a.theta2)?);
        config.alpha = a.alpha;
        config.n = a.n;
        config.repetitions = a.reps;
        config.d = a.d;
        config.estimators = estimators.clone();
        config.seed = a.seed;
        config.c = a.c;
        let table = harness::run_monte_carlo(&config)?.render(format)?;
        match (format, i) {
            (_, 0) => out.push_str(&table),
            // later cells share the header
            (OutputFormat::Csv, _) => out.extend(table.split_inclusive('\n').skip(1)),
            (OutputFormat::Markdown, _) => {
                out.push('\n');
                out.push_str(&table);
            }
        }
    }
    Ok(out)
}

fn run_eigen(a: EigenArgs) -> Result<String> {
    let format = OutputFormat::parse(&a.format)?;
    let phis = harness::parse_reals(&a.phis)?;
    let rows = match a.mode.as_str() {
        "theoretical" => harness::eigen_analysis_theoretical(a.alpha, &phis, a.d)?,
        "empirical" => harness::eigen_analysis_empirical(a.alpha, &phis, a.n, a.reps, a.seed)?,
        other => {
            return Err(HacError::InvalidParameter(format!(
                "unknown mode `{other}` (expected theoretical or empirical)"
            )))
        }
    };
    harness::render_eigen_rows(&rows, format)
}

fn run_fit(a: FitArgs) -> Result<String> {
    let format = OutputFormat::parse(&a.format)?;
    let options = FitOptions {
        estimators: harness::parse_estimators(&a.estimator)?,
        q: a.q,
        m: a.m,
        c: a.c,
    };
    harness::fit_csv(&a.csv, &a.y, &columns(&a.x), &options)?.render(format)
}

fn run_sweep(a: SweepArgs) -> Result<String> {
    let format = OutputFormat::parse(&a.format)?;
    let data = harness::read_csv(&a.csv, &a.y, &columns(&a.x))?;
    harness::render_sweep(&harness::order_sweep(&data, a.max_order, a.coef)?, format)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (result, out) = match cli.command {
        Command::Mc(a) => {
            let out = a.out.clone();
            (run_mc(a), out)
        }
        Command::EigenAnalysis(a) => (run_eigen(a), None),
        Command::Fit(a) => (run_fit(a), None),
        Command::OrderSweep(a) => (run_sweep(a), None),
    };
    let written = result.and_then(|text| match out {
        Some(path) => std::fs::write(path, text).map_err(HacError::from),
        None => {
            print!("{text}");
            Ok(())
        }
    });
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
