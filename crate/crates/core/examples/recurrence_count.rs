//! One sample path of S_N(t) and the multiple-recurrence count M(N).

use nonconv::classify::PolyFamily;
use nonconv::process::{ProcessModel, RngKey};
use nonconv::sums::{compute_path, count_recurrences, Observable};

fn main() -> nonconv::Result<()> {
    let family = PolyFamily::parse("n, n+N, n^2")?;
    let model = ProcessModel::base_m(10)?;
    let targets = vec![vec![7], vec![7], vec![7]];
    let key = RngKey::new(5, 0);
    for n in [1_000u64, 10_000, 100_000] {
        let m = count_recurrences(&family, &model, n, &targets, key)?;
        println!("N={n:>6} M(N)={m:>4} M(N)/N={:.5} (limit 0.001)", m as f64 / n as f64);
    }
    let obs = Observable::indicator_product(10, &targets)?.centered(&model.marginal())?;
    let path = compute_path(&family, &obs, &model, 10_000, &[0.25, 0.5, 0.75, 1.0], key)?;
    let vals: Vec<String> = path.values.iter().map(|v| format!("{v:.4}")).collect();
    println!("centred S_N(t) at t = 1/4, 1/2, 3/4, 1: {}", vals.join(" "));
    Ok(())
}
