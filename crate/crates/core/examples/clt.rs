//! Marginal and functional Gaussianity of the normalised sums.

use nonconv::classify::PolyFamily;
use nonconv::process::ProcessModel;
use nonconv::stats::{clt_audit, RunConfig};
use nonconv::sums::Observable;

fn main() -> nonconv::Result<()> {
    let family = PolyFamily::parse("n, n+N, n^2")?;
    let obs = Observable::indicator_product(2, &vec![vec![1]; 3])?;
    let mut cfg = RunConfig::new(family, obs, ProcessModel::base_m(2)?);
    cfg.n_grid = vec![1024];
    cfg.reps = 1000;
    let rep = clt_audit(&cfg)?;
    println!("KS {:.4} (threshold {:.4})", rep.marginal.statistic, rep.marginal.threshold);
    println!("projections passed {}/{}", rep.functional.passed, rep.functional.tests.len());
    println!("b_hat(1, 1) = {:.4} +- {:.4}", rep.covariance.b_hat[3][3], rep.covariance.se[3][3]);
    Ok(())
}
