//! Moment growth across N and the bounded-variance proxy.

use nonconv::classify::PolyFamily;
use nonconv::process::ProcessModel;
use nonconv::stats::{coboundary_flag, moment_growth_audit, RunConfig};
use nonconv::sums::Observable;

fn main() -> nonconv::Result<()> {
    let family = PolyFamily::parse("n, n+N, n^2")?;
    let obs = Observable::indicator_product(2, &vec![vec![1]; 3])?;
    let mut cfg = RunConfig::new(family, obs, ProcessModel::base_m(2)?);
    cfg.n_grid = (10..=13).map(|k| 1u64 << k).collect();
    cfg.reps = 200;
    let rep = moment_growth_audit(&cfg)?;
    for r in &rep.rows {
        println!("N={:>5} sqrt(N)|mean|={:.3} Var/N={:.4} M4/N^2={:.4}", r.n_max, r.sum_abs_mean, r.var_ratio, r.m4_ratio);
    }
    println!("bounded {:?}", rep.bounded);
    let cob = coboundary_flag(&cfg)?;
    println!("Var slope {:.4} +- {:.4}, bounded variance: {}", cob.slope, cob.slope_se, cob.bounded_verdict);
    Ok(())
}
