//! Finite Markov chain: stationary law, Dobrushin profile and sparse sampling.

use nonconv::polyalg::rat;
use nonconv::process::{generate, IndexSet, Matrix, ProcessModel, RngKey};

fn main() -> nonconv::Result<()> {
    let p = Matrix::Exact(vec![vec![rat(9, 10), rat(1, 10)], vec![rat(1, 10), rat(9, 10)]]);
    let model = ProcessModel::markov(p, vec![0.0, 1.0])?;
    let profile = model.profile();
    println!("marginal {:?}", model.marginal());
    println!("phi(n) <= {} * {}^n, certified={}", profile.c, profile.lambda, profile.certified);
    let idx: Vec<u64> = (1..=10u64).map(|n| n * n * 1000).collect();
    let sparse = generate(&model, IndexSet::Sparse(&idx), RngKey::new(3, 0))?;
    println!("symbols at 1000 n^2: {sparse:?}");
    let prefix = generate(&model, IndexSet::Prefix(40), RngKey::new(3, 0))?;
    println!("prefix: {}", prefix.iter().map(|s| s.to_string()).collect::<String>());
    Ok(())
}
