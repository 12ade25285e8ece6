//! Classifies polynomial pairs and prints an explosion certificate.

use nonconv::classify::{classify_pair, explosion_certificate, CERT_C_GRID};
use nonconv::polyalg::BivariatePoly;

fn main() -> nonconv::Result<()> {
    let pairs = [("4n^2", "n^2"), ("n^2+2n+1", "n^2"), ("n^2+nN", "n^2"), ("n^3", "n^2"), ("n^2", "n^3+N")];
    for (p, q) in pairs {
        let (p, q): (BivariatePoly, BivariatePoly) = (p.parse()?, q.parse()?);
        let v = classify_pair(&p, &q)?;
        let class = serde_json::to_string(&v.class).expect("serialisable");
        println!("{p:>12} vs {q:<8} {class} explodes={:?}", v.explodes);
    }
    let cert = explosion_certificate(&"n^2".parse()?, &"n^2+nN".parse()?, 0.1, 2000, &CERT_C_GRID)?;
    println!("certificate: densities {:?}, max certified c {:?}", cert.violator_density, cert.max_certified_c);
    Ok(())
}
