//! Dependence graph and Stein diagnostics on a two-state chain.

use nonconv::classify::PolyFamily;
use nonconv::polyalg::rat;
use nonconv::process::{Matrix, ProcessModel};
use nonconv::stein::{build_graph, stein_report, SteinConfig};
use nonconv::sums::Observable;

fn main() -> nonconv::Result<()> {
    let family = PolyFamily::parse("n, n+N, n^2")?;
    let g = build_graph(&family, 4096, 5.0 / 24.0)?;
    println!("N=4096: l={:.2} max ball {} bound {:.1} pair bound {} edges {}", g.l_n, g.max_ball, g.ball_bound, g.pair_ball_bound, g.edges);
    let p = Matrix::Exact(vec![vec![rat(9, 10), rat(1, 10)], vec![rat(1, 10), rat(9, 10)]]);
    let model = ProcessModel::markov(p, vec![0.0, 1.0])?;
    let obs = Observable::indicator_product(2, &vec![vec![1]; 3])?;
    let mut cfg = SteinConfig::new(family, obs, model);
    cfg.n_grid = vec![1 << 10, 1 << 11, 1 << 12];
    cfg.reps = 5;
    let rep = stein_report(&cfg)?;
    for r in &rep.rows {
        println!(
            "N={:>5} d1={:.3e} d2={:.3e} d3={:.3e} (mc {:.3e}) d4={:.3e} tau ln^2 N={:.3e}",
            r.n_max, r.d1, r.d2, r.d3_analytic, r.d3_mc, r.d4, r.tau_ln2
        );
    }
    println!("tau decreasing: {}, d3 within bound: {}", rep.tau_decreasing, rep.d3_within_bound);
    Ok(())
}
