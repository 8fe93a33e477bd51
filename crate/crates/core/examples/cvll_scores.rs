//! The full CVLL score grid for one AR(2) regression, and the estimate at
//! the selected order and bandwidth.

use cvhac::cvll::{self, CandidateGrid};
use cvhac::harness::DgpKind;
use cvhac::dgp::{make_dataset, RngStreams};
use cvhac::regress;

fn main() -> cvhac::Result<()> {
    let n = 100;
    let (regs, err) = DgpKind::Ar2 { phi: 0.9 }.processes(0.0, 3);
    let data = make_dataset(&regs, &err, None, n, &RngStreams::new(3), 0)?;
    let fit = regress::ols_fit(&data)?;
    let v = regress::moment_series(&fit, &data.x)?;

    let grid = CandidateGrid::default_for(n);
    let sel = cvll::select(&v, &grid)?;
    println!(
        "{} leave-one-out frequencies, orders {:?}, bandwidths {:?}",
        sel.frequencies.len(),
        grid.orders,
        grid.bandwidths
    );
    for s in &sel.scores {
        let mark = if (s.q, s.m) == (sel.q, sel.m) { "  <- selected" } else { "" };
        match &s.excluded {
            None => println!("q = {}  m = {}  CVLL = {:10.4}{mark}", s.q, s.m, s.score),
            Some(why) => println!("q = {}  m = {}  excluded: {why}", s.q, s.m),
        }
    }

    let est = cvll::estimate_with(&v, sel.q, sel.m, grid.fit_method)?;
    let se = regress::standard_errors(&est.sandwich(&fit.xtx_over_n)?, n);
    println!("n Var(beta_1) estimate {:.4}, se(beta_1) {:.4}", est.sandwich(&fit.xtx_over_n)?[(1, 1)], se[1]);
    Ok(())
}
