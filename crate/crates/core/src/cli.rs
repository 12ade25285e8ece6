//! Command-line front end: configuration, orchestration and report emission.
//!
//! Every command writes `summary.json` and, where it produces a table,
//! `table.csv` with columns `N,statistic,value,stderr,pass` into `--out`.
//! Exit status is 0 when every verdict passes, 2 when one fails and 1 on
//! usage, configuration or library errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::classify::{classify_pair, explosion_certificate, sieve_density, CERT_C_GRID};
use crate::config::{Config, Experiment, FamilySpec, OneOrMany};
use crate::error::{Error, Result};
use crate::ordering::{scan_partition, validate_family};
use crate::plot::{render, Series};
use crate::polyalg::BivariatePoly;
use crate::process::RngKey;
use crate::stats::{
    clt_audit, coboundary_flag, estimate_covariance, moment_growth_audit, slln_audit,
    theoretical_covariance, CovMode, RunConfig,
};
use crate::stein::{stein_report, SteinConfig};
use crate::sums::{compute_path, count_recurrences};

#[derive(Parser, Debug)]
#[command(name = "nonconv", version, about = "Nonconventional sums over polynomial index families")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Global {
    /// Run configuration (JSON, or TOML by extension).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; a random value is drawn and printed when absent.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; falls back to NONCONV_THREADS, then logical cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "nonconv-out")]
    pub out: PathBuf,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub plots: bool,
    /// Comma-separated sizes; `2^k` and `1eK` are accepted.
    #[arg(long = "N", global = true, value_delimiter = ',', value_parser = parse_size)]
    pub n: Option<Vec<u64>>,
    #[arg(long, global = true)]
    pub reps: Option<usize>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Comma-separated time grid in (0, 1].
    #[arg(long, global = true, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Classify the pair (p, q).
    Classify {
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
    },
    /// Ordering partition and admissibility diagnostics of a family.
    Order {
        #[arg(long)]
        family: Option<String>,
    },
    /// Perfect-power sieve for `m^a = sum_j alpha_j n^j N^(a-j)`.
    Sieve {
        #[arg(long)]
        a: u32,
        #[arg(long)]
        b: u32,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alphas: Vec<i64>,
    },
    /// One sample path and recurrence count.
    Simulate,
    /// Strong-law audit.
    Slln,
    /// Marginal and functional Gaussianity audit.
    Clt,
    /// Estimated against exact limiting covariance.
    Covariance,
    /// Moment growth and bounded-variance proxy.
    Moments,
    /// Stein dependence diagnostics.
    SteinAudit,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Classify { .. } => "classify",
            Command::Order { .. } => "order",
            Command::Sieve { .. } => "sieve",
            Command::Simulate => "simulate",
            Command::Slln => "slln",
            Command::Clt => "clt",
            Command::Covariance => "covariance",
            Command::Moments => "moments",
            Command::SteinAudit => "stein-audit",
        }
    }
}

fn parse_size(s: &str) -> std::result::Result<u64, String> {
    let s = s.trim();
    let bad = || format!("invalid size {s:?}");
    if let Some((b, e)) = s.split_once('^') {
        let b: u64 = b.parse().map_err(|_| bad())?;
        let e: u32 = e.parse().map_err(|_| bad())?;
        return b.checked_pow(e).ok_or_else(bad);
    }
    if let Some((m, e)) = s.split_once(['e', 'E']) {
        let m: u64 = m.parse().map_err(|_| bad())?;
        let e: u32 = e.parse().map_err(|_| bad())?;
        return 10u64.checked_pow(e).and_then(|p| p.checked_mul(m)).ok_or_else(bad);
    }
    s.parse().map_err(|_| bad())
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    /// The tolerance or rule the verdict applies.
    pub rule: String,
}

impl Verdict {
    fn new(name: &str, pass: bool, rule: &str) -> Self {
        Self { name: name.into(), pass, rule: rule.into() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CsvRow {
    #[serde(rename = "N")]
    pub n: Option<u64>,
    pub statistic: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub pass: Option<bool>,
}

fn row(n: u64, statistic: &str, value: f64, stderr: Option<f64>, pass: Option<bool>) -> CsvRow {
    CsvRow { n: Some(n), statistic: statistic.into(), value, stderr, pass }
}

/// Result of one command before it is written out.
#[derive(Debug, Default)]
pub struct Outcome {
    pub verdicts: Vec<Verdict>,
    pub report: Value,
    pub table: Vec<CsvRow>,
    pub plots: Vec<(String, String)>,
}

#[derive(Serialize)]
struct Summary<'a> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    config: &'a Config,
    verdicts: &'a [Verdict],
    pass: bool,
    report: &'a Value,
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(pass) => {
            if pass {
                0
            } else {
                2
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn init_threads(requested: Option<usize>) {
    let k = requested.or_else(|| std::env::var("NONCONV_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(k) = k.filter(|&k| k > 0) {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
}

/// Applies command-line overrides to the configuration.
pub fn effective_config(global: &Global, command: &Command) -> Result<(Config, u64)> {
    let mut cfg = match &global.config {
        Some(p) => Config::from_path(p)?,
        None => Config::default(),
    };
    if let Command::Order { family: Some(f) } = command {
        cfg.family = Some(FamilySpec::Text(f.clone()));
    }
    let mut exp = cfg.experiment.take().unwrap_or_default();
    if let Some(n) = &global.n {
        exp.n = Some(OneOrMany::Many(n.clone()));
    }
    if let Some(r) = global.reps {
        exp.reps = Some(r);
    }
    if let Some(d) = global.delta {
        exp.delta = Some(d);
    }
    if let Some(g) = &global.grid {
        exp.grid = Some(g.clone());
    }
    let seed = match global.seed.or(exp.seed) {
        Some(s) => s,
        None => {
            let s = rand::random::<u64>();
            eprintln!("seed: {s}");
            s
        }
    };
    exp.seed = Some(seed);
    cfg.experiment = Some(exp);
    Ok((cfg, seed))
}

fn execute(cli: &Cli) -> Result<bool> {
    init_threads(cli.global.threads);
    let (cfg, seed) = effective_config(&cli.global, &cli.command)?;
    let outcome = dispatch(&cli.command, &cfg, seed, cli.global.plots)?;
    let pass = outcome.verdicts.iter().all(|v| v.pass);
    write_outputs(&cli.global.out, cli.command.name(), &cfg, seed, &outcome, pass)?;
    for v in &outcome.verdicts {
        println!("{} {}", if v.pass { "PASS" } else { "FAIL" }, v.name);
    }
    Ok(pass)
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Config(format!("{}: {e}", path.display()))
}

/// The bytes of `summary.json`; deterministic in the configuration and seed.
pub fn summary_json(command: &str, cfg: &Config, seed: u64, outcome: &Outcome, pass: bool) -> Result<String> {
    let s = Summary {
        command,
        version: env!("CARGO_PKG_VERSION"),
        seed,
        config: cfg,
        verdicts: &outcome.verdicts,
        pass,
        report: &outcome.report,
    };
    serde_json::to_string_pretty(&s).map_err(|e| Error::Numerical(e.to_string()))
}

fn write_outputs(dir: &Path, command: &str, cfg: &Config, seed: u64, outcome: &Outcome, pass: bool) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let summary = dir.join("summary.json");
    let text = summary_json(command, cfg, seed, outcome, pass)?;
    std::fs::write(&summary, text + "\n").map_err(|e| io_err(&summary, e))?;
    if !outcome.table.is_empty() {
        let path = dir.join("table.csv");
        let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
        for r in &outcome.table {
            w.serialize(r).map_err(|e| io_err(&path, e))?;
        }
        w.flush().map_err(|e| io_err(&path, e))?;
    }
    for (name, svg) in &outcome.plots {
        let path = dir.join(name);
        std::fs::write(&path, svg).map_err(|e| io_err(&path, e))?;
    }
    Ok(())
}

fn to_value<T: Serialize>(x: &T) -> Result<Value> {
    serde_json::to_value(x).map_err(|e| Error::Numerical(e.to_string()))
}

fn sizes(exp: &Experiment, default: &[u64]) -> Vec<u64> {
    exp.n.as_ref().map(|n| n.to_vec()).unwrap_or_else(|| default.to_vec())
}

fn run_config(cfg: &Config, seed: u64, default_n: &[u64], default_reps: usize) -> Result<RunConfig> {
    let exp = cfg.experiment();
    let family = cfg.family()?;
    let model = cfg.model()?;
    let obs = cfg.observable(&family, &model)?;
    let mut rc = RunConfig::new(family, obs, model);
    rc.n_grid = sizes(&exp, default_n);
    rc.reps = exp.reps.unwrap_or(default_reps);
    rc.seed = seed;
    if let Some(g) = exp.grid {
        rc.time_grid = g;
    }
    if let Some(c) = exp.centered {
        rc.centered = c;
    }
    if let Some(t) = &exp.tolerances {
        rc.tol = t.build();
    }
    Ok(rc)
}

pub fn dispatch(command: &Command, cfg: &Config, seed: u64, plots: bool) -> Result<Outcome> {
    match command {
        Command::Classify { p, q } => cmd_classify(p, q, cfg),
        Command::Order { .. } => cmd_order(cfg),
        Command::Sieve { a, b, alphas } => cmd_sieve(*a, *b, alphas, cfg),
        Command::Simulate => cmd_simulate(cfg, seed),
        Command::Slln => cmd_slln(cfg, seed),
        Command::Clt => cmd_clt(cfg, seed, plots),
        Command::Covariance => cmd_covariance(cfg, seed, plots),
        Command::Moments => cmd_moments(cfg, seed),
        Command::SteinAudit => cmd_stein(cfg, seed, plots),
    }
}

fn cmd_classify(p: &str, q: &str, cfg: &Config) -> Result<Outcome> {
    let p: BivariatePoly = p.parse()?;
    let q: BivariatePoly = q.parse()?;
    let verdict = classify_pair(&p, &q)?;
    let mut report = json!({ "verdict": to_value(&verdict)? });
    if let Some(delta) = cfg.experiment().delta {
        let n = sizes(&cfg.experiment(), &[2000])[0];
        let cert = explosion_certificate(&q, &p, delta, n, &CERT_C_GRID)?;
        report["certificate"] = to_value(&cert)?;
    }
    // Unknown classes carry their evidence and are not verdict failures.
    Ok(Outcome { report, ..Default::default() })
}

fn cmd_order(cfg: &Config) -> Result<Outcome> {
    let family = cfg.family()?;
    let n = sizes(&cfg.experiment(), &[10_000])[0];
    let diag = validate_family(&family)?;
    let part = scan_partition(&family, n)?;
    let perms: Vec<Value> = part
        .perms()
        .into_iter()
        .map(|perm| {
            let m = part.measure(&perm);
            json!({ "perm": perm, "measure": m })
        })
        .collect();
    let table = part
        .perms()
        .iter()
        .map(|perm| {
            let name = format!("measure[{}]", perm.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "));
            row(n, &name, part.measure(perm), None, None)
        })
        .collect();
    Ok(Outcome {
        verdicts: vec![Verdict::new("family admissible", diag.ok(), "A1, A2, degree and nonconstant differences")],
        report: json!({
            "diagnostics": to_value(&diag)?,
            "segments": to_value(&part.segments)?,
            "exceptional": part.exceptional.len(),
            "perms": perms,
            "N": n,
        }),
        table,
        ..Default::default()
    })
}

fn cmd_sieve(a: u32, b: u32, alphas: &[i64], cfg: &Config) -> Result<Outcome> {
    let ns = sizes(&cfg.experiment(), &[1_000, 10_000, 100_000]);
    let mut verdicts = Vec::new();
    let mut table = Vec::new();
    let mut results = Vec::new();
    for n in ns {
        let r = sieve_density(a, b, alphas, n)?;
        let bound = 2.0 / (n as f64).sqrt();
        let ok = r.density <= bound && r.witnesses.iter().all(|w| w.structure_holds);
        verdicts.push(Verdict::new(&format!("sieve N={n}"), ok, "density <= 2 N^-1/2 and n = v z^a for every witness"));
        table.push(row(n, "density", r.density, None, Some(ok)));
        table.push(row(n, "count", r.count as f64, None, None));
        results.push(r);
    }
    Ok(Outcome { verdicts, report: json!({ "results": to_value(&results)? }), table, ..Default::default() })
}

fn cmd_simulate(cfg: &Config, seed: u64) -> Result<Outcome> {
    let rc = run_config(cfg, seed, &[1024], 1)?;
    let n = rc.n_grid[0];
    let obs = if rc.centered { rc.observable.centered(&rc.model.marginal())? } else { rc.observable.clone() };
    let key = RngKey::new(seed, 0);
    let path = compute_path(&rc.family, &obs, &rc.model, n, &rc.time_grid, key)?;
    let mut table: Vec<CsvRow> = path
        .grid
        .iter()
        .zip(&path.values)
        .map(|(t, v)| row(n, &format!("S({t})"), *v, None, None))
        .collect();
    let mut report = json!({ "path": to_value(&path)? });
    if let Some(crate::config::ObservableSpec::IndicatorProduct { targets }) = &cfg.observable {
        let m = count_recurrences(&rc.family, &rc.model, n, targets, key)?;
        report["recurrences"] = json!(m);
        table.push(row(n, "recurrences", m as f64, None, None));
    }
    Ok(Outcome { report, table, ..Default::default() })
}

fn cmd_slln(cfg: &Config, seed: u64) -> Result<Outcome> {
    let rc = run_config(cfg, seed, &[10_000, 160_000], 20)?;
    let rows = slln_audit(&rc)?;
    let r = rc.reps as f64;
    let verdicts = rows
        .iter()
        .map(|x| Verdict::new(&format!("slln N={}", x.n_max), x.pass, "|mean - bar_F| <= 3 sd / sqrt(R) + 5 / sqrt(N)"))
        .collect();
    let table = rows
        .iter()
        .flat_map(|x| {
            [
                row(x.n_max, "mean", x.mean, Some(x.sd / r.sqrt()), None),
                row(x.n_max, "abs_error", x.abs_error, Some(x.sd / r.sqrt()), Some(x.pass)),
            ]
        })
        .collect();
    Ok(Outcome { verdicts, report: json!({ "rows": to_value(&rows)? }), table, ..Default::default() })
}

fn qq_points(samples: &[f64]) -> Vec<(f64, f64)> {
    let n = samples.len();
    if n < 2 {
        return Vec::new();
    }
    let m = samples.iter().sum::<f64>() / n as f64;
    let sd = (samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let mut z: Vec<f64> = samples.iter().map(|x| (x - m) / sd).collect();
    z.sort_by(|a, b| a.total_cmp(b));
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    z.iter()
        .enumerate()
        .map(|(i, &v)| (normal.inverse_cdf((i as f64 + 0.5) / n as f64), v))
        .collect()
}

fn cmd_clt(cfg: &Config, seed: u64, plots: bool) -> Result<Outcome> {
    let rc = run_config(cfg, seed, &[1024], 500)?;
    let rep = clt_audit(&rc)?;
    let n = rep.covariance.n_max;
    let verdicts = vec![
        Verdict::new("marginal KS", rep.marginal.pass, "KS <= ks_slack * 1.36 / sqrt(R)"),
        Verdict::new("functional projections", rep.functional.pass, "at least projections_required of projections pass"),
    ];
    let mut table = vec![
        row(n, "ks_marginal", rep.marginal.statistic, None, Some(rep.marginal.pass)),
        row(n, "ks_threshold", rep.marginal.threshold, None, None),
        row(n, "projections_passed", rep.functional.passed as f64, None, Some(rep.functional.pass)),
    ];
    let mut plots_out = Vec::new();
    if plots {
        // Regenerates the same paths; plots never feed verdicts.
        let paths = rc.paths(n, &[1.0])?;
        let s1: Vec<f64> = paths.iter().map(|p| p[0]).collect();
        let qq = qq_points(&s1);
        let diag: Vec<(f64, f64)> = qq.iter().map(|&(x, _)| (x, x)).collect();
        plots_out.push((
            "qq.svg".into(),
            render("Normal QQ of S_N(1)", "normal quantile", "standardised sample", &[Series::scatter("sample", qq), Series::line("identity", diag)]),
        ));
    }
    for (i, t) in rep.covariance.grid.iter().enumerate() {
        table.push(row(n, &format!("b({t},{t})"), rep.covariance.b_hat[i][i], Some(rep.covariance.se[i][i]), None));
    }
    Ok(Outcome { verdicts, report: to_value(&rep)?, table, plots: plots_out })
}

fn cmd_covariance(cfg: &Config, seed: u64, plots: bool) -> Result<Outcome> {
    let rc = run_config(cfg, seed, &[1024], 500)?;
    let est = estimate_covariance(&rc)?;
    let theory = match theoretical_covariance(&rc.family, &rc.observable, &rc.model, &rc.time_grid, CovMode::Diagonal) {
        Err(Error::Precondition(_)) => {
            theoretical_covariance(&rc.family, &rc.observable, &rc.model, &rc.time_grid, CovMode::Equivalent)
        }
        other => other,
    };
    let (theory, theory_note) = match theory {
        Ok(t) => (Some(t), None),
        Err(e @ (Error::Unsupported(_) | Error::Precondition(_))) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let k = rc.tol.se_mult;
    let n = est.n_max;
    let mut verdicts = Vec::new();
    let mut table = Vec::new();
    for (i, t) in est.grid.iter().enumerate() {
        let (b, se) = (est.b_hat[i][i], est.se[i][i]);
        let pass = theory.as_ref().map(|th| (b - th.b[i][i]).abs() <= k * se);
        if let Some(p) = pass {
            verdicts.push(Verdict::new(&format!("b({t},{t})"), p, "|b_hat - b| <= se_mult SE"));
        }
        table.push(row(n, &format!("b_hat({t},{t})"), b, Some(se), pass));
        if let Some(th) = &theory {
            table.push(row(n, &format!("b({t},{t})"), th.b[i][i], None, None));
        }
    }
    table.push(row(n, "D2_hat", est.d2_hat, Some(est.d2_se), None));
    let mut plots_out = Vec::new();
    if plots {
        let mut series = vec![Series::line("estimate", est.grid.iter().enumerate().map(|(i, &t)| (t, est.b_hat[i][i])).collect())];
        if let Some(th) = &theory {
            series.push(Series::line("exact", est.grid.iter().enumerate().map(|(i, &t)| (t, th.b[i][i])).collect()));
        }
        plots_out.push(("covariance.svg".into(), render("b(t, t)", "t", "b(t, t)", &series)));
    }
    Ok(Outcome {
        verdicts,
        report: json!({
            "estimate": to_value(&est)?,
            "theory": theory.as_ref().map(to_value).transpose()?,
            "theory_unavailable": theory_note,
        }),
        table,
        plots: plots_out,
    })
}

fn cmd_moments(cfg: &Config, seed: u64) -> Result<Outcome> {
    let rc = run_config(cfg, seed, &[1 << 10, 1 << 11, 1 << 12, 1 << 13, 1 << 14], 100)?;
    let rep = moment_growth_audit(&rc)?;
    let cob = coboundary_flag(&rc)?;
    let names = ["sqrt(N)|mean|", "Var/N", "E S^4/N^2"];
    let verdicts = names
        .iter()
        .zip(rep.bounded)
        .map(|(nm, ok)| Verdict::new(&format!("{nm} bounded"), ok, "within median_factor of the median, allowing se_mult SE"))
        .collect();
    let table = rep
        .rows
        .iter()
        .flat_map(|x| {
            [
                row(x.n_max, names[0], x.sum_abs_mean, Some(x.sum_abs_mean_se), Some(rep.bounded[0])),
                row(x.n_max, names[1], x.var_ratio, Some(x.var_ratio_se), Some(rep.bounded[1])),
                row(x.n_max, names[2], x.m4_ratio, Some(x.m4_ratio_se), Some(rep.bounded[2])),
            ]
        })
        .collect();
    Ok(Outcome {
        verdicts,
        report: json!({ "moments": to_value(&rep)?, "bounded_variance_proxy": to_value(&cob)? }),
        table,
        ..Default::default()
    })
}

fn cmd_stein(cfg: &Config, seed: u64, plots: bool) -> Result<Outcome> {
    let exp = cfg.experiment();
    let family = cfg.family()?;
    let model = cfg.model()?;
    let obs = cfg.observable(&family, &model)?;
    let mut sc = SteinConfig::new(family, obs, model);
    if let Some(n) = &exp.n {
        sc.n_grid = n.to_vec();
    }
    sc.seed = seed;
    sc.reps = exp.reps.unwrap_or(sc.reps);
    sc.w = exp.w.unwrap_or(sc.w);
    sc.theta = exp.theta.unwrap_or(sc.theta);
    sc.zeta1 = exp.zeta1.or(sc.zeta1);
    sc.gamma_pairs = exp.gamma_pairs.unwrap_or(sc.gamma_pairs);
    let rep = stein_report(&sc)?;
    let verdicts = vec![
        Verdict::new("tau_N ln^2 N decreasing", rep.tau_decreasing, "strictly decreasing over the N grid"),
        Verdict::new("d3 Monte Carlo within analytic bound", rep.d3_within_bound, "d3_mc <= d3_analytic"),
        Verdict::new("ball bound", rep.rows.iter().all(|r| r.ball_ok), "max |N_n| <= 2 d* (l + 1) + 1"),
    ];
    let mut table = Vec::new();
    for r in &rep.rows {
        let n = r.n_max;
        table.push(row(n, "d1", r.d1, None, None));
        table.push(row(n, "d2", r.d2, None, None));
        table.push(row(n, "d3_analytic", r.d3_analytic, None, None));
        table.push(row(n, "d3_mc", r.d3_mc, Some(r.d3_mc_se), Some(r.d3_mc <= r.d3_analytic)));
        table.push(row(n, "d4", r.d4, None, None));
        table.push(row(n, "tau", r.tau, None, None));
        table.push(row(n, "tau_ln2", r.tau_ln2, None, None));
        table.push(row(n, "max_ball", r.max_ball as f64, None, Some(r.ball_ok)));
        table.push(row(n, "gamma_hat", r.gamma_hat, None, None));
    }
    let mut plots_out = Vec::new();
    if plots {
        let pts = rep.rows.iter().map(|r| ((r.n_max as f64).log2(), r.tau_ln2)).collect();
        plots_out.push(("tau.svg".into(), render("tau_N ln^2 N", "log2 N", "tau_N ln^2 N", &[Series::line("tau ln^2 N", pts)])));
    }
    Ok(Outcome { verdicts, report: to_value(&rep)?, table, plots: plots_out })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("nonconv-cli-{name}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&d);
        d
    }

    #[test]
    fn sizes_accept_powers() {
        assert_eq!(parse_size("2^10"), Ok(1024));
        assert_eq!(parse_size("1e4"), Ok(10_000));
        assert_eq!(parse_size("77"), Ok(77));
        assert!(parse_size("x").is_err());
    }

    #[test]
    fn classify_reports_q_equivalence() {
        let out = tmp("classify");
        let code = run(["nonconv", "classify", "--p", "4n^2", "--q", "n^2", "--seed", "1", "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0);
        let s: Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
        let class = &s["report"]["verdict"]["class"];
        assert_eq!(class["kind"], "QEquivalent");
        assert_eq!(class["c"], "2");
        assert_eq!(class["r"], "0");
        assert_eq!(class["d"], "0");
    }

    #[test]
    fn identical_seeds_give_identical_summaries() {
        let a = tmp("det-a");
        let b = tmp("det-b");
        for d in [&a, &b] {
            let code = run([
                "nonconv", "simulate", "--seed", "42", "--N", "256", "--out", d.to_str().unwrap(),
            ]);
            assert_eq!(code, 0);
        }
        let sa = std::fs::read(a.join("summary.json")).unwrap();
        let sb = std::fs::read(b.join("summary.json")).unwrap();
        assert_eq!(sa, sb);
        assert!(std::fs::read_to_string(a.join("table.csv")).unwrap().starts_with("N,statistic,value,stderr,pass"));
    }

    #[test]
    fn unknown_config_key_exits_one() {
        let d = tmp("badcfg");
        std::fs::create_dir_all(&d).unwrap();
        let p = d.join("c.json");
        std::fs::write(&p, r#"{"experiment": {"replicatons": 5}}"#).unwrap();
        let code = run(["nonconv", "slln", "--config", p.to_str().unwrap(), "--seed", "0", "--out", d.to_str().unwrap()]);
        assert_eq!(code, 1);
    }

    #[test]
    fn sieve_command_passes() {
        let d = tmp("sieve");
        let code = run(["nonconv", "sieve", "--a", "2", "--b", "1", "--alphas", "1,0", "--N", "1000", "--seed", "0", "--out", d.to_str().unwrap()]);
        assert_eq!(code, 0);
    }
}
