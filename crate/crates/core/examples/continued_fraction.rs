//! Continued-fraction digits of Gauss-distributed points.

use nonconv::process::{cf_digits, gauss_digit_prob, RngKey};

fn main() -> nonconv::Result<()> {
    println!("digits: {:?}", cf_digits(20, RngKey::new(1, 0))?);
    let points = 5_000u64;
    let mut counts = [0u64; 6];
    for i in 0..points {
        let d = cf_digits(1, RngKey::new(2, i))?[0] as usize;
        if d <= 5 {
            counts[d] += 1;
        }
    }
    for k in 1..=5 {
        println!("P(a_1 = {k}): empirical {:.4}, Gauss {:.4}", counts[k] as f64 / points as f64, gauss_digit_prob(k));
    }
    Ok(())
}
