//! OLS on a simulated regression, then every HAC estimator's standard
//! errors and 95% intervals for the slope.

use cvhac::cvll::CandidateGrid;
use cvhac::dgp::{make_dataset, ArSpec, Process, RngStreams};
use cvhac::harness;
use cvhac::regress::{self, EstimatorTag};

fn main() -> cvhac::Result<()> {
    let n = 200;
    let regressors: Vec<Process> = (0..2).map(|_| ArSpec::ar1(1.0, 0.7).into()).collect();
    let error: Process = ArSpec::ar1(0.0, 0.7).into();
    let data = make_dataset(&regressors, &error, Some(&[0.5, 1.0, -2.0]), n, &RngStreams::new(42), 0)?;

    let fit = regress::ols_fit(&data)?;
    let v = regress::moment_series(&fit, &data.x)?;
    println!("beta_hat = {:.4?}", fit.beta_hat.as_slice());

    let grid = CandidateGrid::default_for(n);
    let tags = [
        EstimatorTag::Am,
        EstimatorTag::AmPw,
        EstimatorTag::AmPwUnadj,
        EstimatorTag::BurgPw,
        EstimatorTag::Cvll,
    ];
    println!(
        "{:<12} {:>9} {:>9} {:>9}  {:>5} {:>9} {:>7}  interval for beta_1",
        "estimator", "se0", "se1", "se2", "order", "bandwidth", "radius"
    );
    for tag in tags {
        let est = harness::estimate(tag, &v, &grid)?;
        let se = regress::standard_errors(&est.sandwich(&fit.xtx_over_n)?, n);
        let ci = regress::confidence_interval(fit.beta_hat[1], se[1], 0.05)?;
        println!(
            "{:<12} {:>9.6} {:>9.6} {:>9.6}  {:>5} {:>9.3} {:>7.4}  [{:.3}, {:.3}]",
            tag.name(),
            se[0],
            se[1],
            se[2],
            est.order,
            est.bandwidth,
            est.prewhitener_spectral_radius,
            ci.lower,
            ci.upper
        );
    }
    Ok(())
}
