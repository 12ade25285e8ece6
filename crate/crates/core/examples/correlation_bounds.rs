//! Block mixing bounds against exact covariances of a two-state chain.

use nonconv::polyalg::rat;
use nonconv::process::{Matrix, ProcessModel};
use nonconv::stein::{block_alpha_bound, correlation_bound, BlockMoments};

fn main() -> nonconv::Result<()> {
    let p = Matrix::Exact(vec![vec![rat(9, 10), rat(1, 10)], vec![rat(1, 10), rat(9, 10)]]);
    let model = ProcessModel::markov(p, vec![0.0, 1.0])?;
    let profile = model.profile();
    let moments = BlockMoments { g_m: 1.0, k_const: 1.0, iota: 0.0, kappa: 0.0, v: 8.0, k: 2 };
    for gap in [1u64, 5, 10, 20, 30] {
        // Cov(X_0, X_gap) = (1/4) 0.8^gap for the symmetric chain.
        let cov = 0.25 * 0.8f64.powi(gap as i32);
        let cb = correlation_bound(&[gap], &moments, &profile, 8.0, 8.0)?;
        let ab = block_alpha_bound(&[gap], 1.0, &profile)?;
        println!("gap {gap:>2}: |Cov| {cov:.3e} correlation bound {cb:.3e} alpha bound {ab:.3e}");
    }
    Ok(())
}
