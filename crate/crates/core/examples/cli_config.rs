//! Runs CLI commands in-process from a TOML configuration.

fn main() {
    let dir = std::env::temp_dir().join("nonconv-example");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let cfg = dir.join("run.toml");
    std::fs::write(
        &cfg,
        "family = \"n^2\"\n[process]\nkind = \"base_m\"\nm = 2\n[experiment]\nN = 1024\nreps = 400\n",
    )
    .expect("write config");
    let out = dir.join("out");
    let (c, o) = (cfg.to_str().unwrap(), out.to_str().unwrap());
    for cmd in ["covariance", "clt"] {
        let code = nonconv::cli::run(["nonconv", cmd, "--config", c, "--seed", "1", "--out", o, "--plots"]);
        println!("{cmd}: exit {code}, outputs in {o}");
    }
}
