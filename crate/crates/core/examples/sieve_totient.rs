//! Perfect-power sieve for m^2 = nN and the totient lower bound.

use nonconv::classify::{sieve_density, totient_bound};

fn main() -> nonconv::Result<()> {
    for n in [1_000u64, 10_000, 100_000] {
        let r = sieve_density(2, 1, &[1, 0], n)?;
        let ok = r.witnesses.iter().all(|w| w.structure_holds);
        println!("N={n:>6} solutions={:>3} density={:.5} 2/sqrt(N)={:.5} structure={ok}", r.count, r.density, 2.0 / (n as f64).sqrt());
    }
    let worst = (3..=100_000u64)
        .map(|m| totient_bound(m).map(|b| (b.phi as f64 / b.r, m)))
        .collect::<nonconv::Result<Vec<_>>>()?
        .into_iter()
        .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a });
    println!("min phi(M)/R(M) over 3..1e5: {:.4} at M={}", worst.0, worst.1);
    Ok(())
}
