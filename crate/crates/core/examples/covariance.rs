//! Exact limiting covariance against the Monte Carlo estimate.

use nonconv::classify::PolyFamily;
use nonconv::process::ProcessModel;
use nonconv::stats::{estimate_covariance, theoretical_covariance, CovMode, RunConfig};
use nonconv::sums::Observable;

fn main() -> nonconv::Result<()> {
    let grid = vec![0.25, 0.5, 0.75, 1.0];
    for (spec, mode) in [("n^2", CovMode::Diagonal), ("n^2, n^2+2n+1", CovMode::Equivalent)] {
        let family = PolyFamily::parse(spec)?;
        let obs = Observable::indicator_product(2, &vec![vec![1]; family.len()])?;
        let model = ProcessModel::base_m(2)?;
        let th = theoretical_covariance(&family, &obs, &model, &grid, mode)?;
        let mut cfg = RunConfig::new(family, obs, model);
        cfg.time_grid = grid.clone();
        cfg.reps = 1000;
        let est = estimate_covariance(&cfg)?;
        println!("{spec}:");
        for (i, t) in grid.iter().enumerate() {
            println!("  b({t}, {t}) exact {:.4} estimate {:.4} +- {:.4}", th.b[i][i], est.b_hat[i][i], est.se[i][i]);
        }
    }
    Ok(())
}
