//! OLS and Burg VAR fits on persistent moment series. OLS can return a
//! nonstationary companion matrix; Burg cannot.

use cvhac::dgp::{make_dataset, ArSpec, Process, RngStreams};
use cvhac::regress;
use cvhac::varfit;

fn main() -> cvhac::Result<()> {
    let regressor: Process = ArSpec::ar1(1.0, 0.95).into();
    let error: Process = ArSpec::ar1(0.0, 0.95).into();
    let streams = RngStreams::new(7);

    let (mut ols_bad, mut burg_bad) = (0, 0);
    let (mut ols_max, mut burg_max) = (0.0f64, 0.0f64);
    let reps = 500;
    for rep in 0..reps {
        let data = make_dataset(std::slice::from_ref(&regressor), &error, None, 200, &streams, rep)?;
        let fit = regress::ols_fit(&data)?;
        let v = regress::moment_series(&fit, &data.x)?;
        for q in 1..=2 {
            let ols = varfit::ols_var(v.matrix(), q)?.spectral_radius()?;
            let burg = varfit::burg_var(v.matrix(), q)?.spectral_radius()?;
            ols_max = ols_max.max(ols);
            burg_max = burg_max.max(burg);
            ols_bad += usize::from(ols >= 1.0);
            burg_bad += usize::from(burg >= 1.0);
        }
    }
    println!("{} fits (q = 1, 2 on {reps} series)", 2 * reps);
    println!("OLS:  {ols_bad:>4} nonstationary, max spectral radius {ols_max:.5}");
    println!("Burg: {burg_bad:>4} nonstationary, max spectral radius {burg_max:.5}");
    Ok(())
}
