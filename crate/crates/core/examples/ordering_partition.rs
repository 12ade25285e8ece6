//! Ordering partition and admissibility diagnostics of a family.

use nonconv::classify::PolyFamily;
use nonconv::ordering::{scan_partition, validate_family};

fn main() -> nonconv::Result<()> {
    for spec in ["n, n+N, n^2", "n^2, 2n^2+N, nN"] {
        let family = PolyFamily::parse(spec)?;
        let diag = validate_family(&family)?;
        let part = scan_partition(&family, 10_000)?;
        println!("{spec}: admissible={} exceptional={}", diag.ok(), part.exceptional.len());
        for s in &part.segments {
            println!("  [{:>5}, {:>5}] order {:?}", s.lo, s.hi, s.perm);
        }
    }
    Ok(())
}
