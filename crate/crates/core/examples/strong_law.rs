//! Strong-law audit for the indicator of (1, 1, 1) on binary digits.

use nonconv::classify::PolyFamily;
use nonconv::process::ProcessModel;
use nonconv::stats::{slln_audit, RunConfig};
use nonconv::sums::Observable;

fn main() -> nonconv::Result<()> {
    let family = PolyFamily::parse("n, n+N, n^2")?;
    let obs = Observable::indicator_product(2, &vec![vec![1]; 3])?;
    let mut cfg = RunConfig::new(family, obs, ProcessModel::base_m(2)?);
    cfg.n_grid = vec![1_000, 10_000, 100_000];
    cfg.reps = 20;
    for r in slln_audit(&cfg)? {
        println!("N={:>6} mean={:.5} bar_F={} |err|={:.5} tol={:.5} pass={}", r.n_max, r.mean, r.bar_f, r.abs_error, r.tolerance, r.pass);
    }
    Ok(())
}
