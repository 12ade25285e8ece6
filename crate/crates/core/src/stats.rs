//! Monte Carlo audits: strong law, moment growth, limiting covariances,
//! Gaussianity of `S_N` and the bounded-variance criterion, plus the exact
//! limiting covariance for nonlinear families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::classify::{classify_pair, detect_q_equivalence, Explodes, PolyFamily};
use crate::error::{pre, Error, Result};
use crate::ordering::{scan_partition, OrderingPartition};
use crate::polyalg::{compose_affine, Rat};
use crate::process::{ProcessModel, RngKey};
use crate::sums::{bar_f, compute_path, decompose_f, Decomposition, Observable};

/// Thresholds shared by the audits.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Width of error bands in standard errors.
    pub se_mult: f64,
    /// Allowed ratio to the grid median in the moment audit.
    pub median_factor: f64,
    /// Multiplier on the 5% Kolmogorov-Smirnov critical value.
    pub ks_slack: f64,
    pub projections: usize,
    pub projections_required: usize,
    pub bootstrap: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            se_mult: 3.0,
            median_factor: 2.0,
            ks_slack: 1.5,
            projections: 20,
            projections_required: 18,
            bootstrap: 200,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub family: PolyFamily,
    pub observable: Observable,
    pub model: ProcessModel,
    pub n_grid: Vec<u64>,
    pub time_grid: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    /// Subtract `bar_F` before summing.
    pub centered: bool,
    pub tol: Tolerances,
}

impl RunConfig {
    pub fn new(family: PolyFamily, observable: Observable, model: ProcessModel) -> Self {
        Self {
            family,
            observable,
            model,
            n_grid: vec![1024],
            time_grid: vec![0.25, 0.5, 0.75, 1.0],
            reps: 200,
            seed: 0,
            centered: true,
            tol: Tolerances::default(),
        }
    }

    fn observable_for_run(&self) -> Result<Observable> {
        if self.centered {
            self.observable.centered(&self.model.marginal())
        } else {
            Ok(self.observable.clone())
        }
    }

    /// `S_N(t)` on `grid` for every replication; replication `r` uses stream `r`.
    pub fn paths(&self, big_n: u64, grid: &[f64]) -> Result<Vec<Vec<f64>>> {
        let obs = self.observable_for_run()?;
        (0..self.reps as u64)
            .into_par_iter()
            .map(|r| {
                compute_path(&self.family, &obs, &self.model, big_n, grid, RngKey::new(self.seed, r))
                    .map(|p| p.values)
            })
            .collect()
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sample_var(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}

fn median(x: &[f64]) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

// ---------------------------------------------------------------------------
// Strong law
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SllnRow {
    #[serde(rename = "N")]
    pub n_max: u64,
    /// Mean of `S_N / N` over replications, with the raw sum.
    pub mean: f64,
    pub sd: f64,
    pub bar_f: f64,
    pub abs_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// `|mean - bar_F| <= 3 sd / sqrt(R) + 5 / sqrt(N)` at each `N`.
pub fn slln_audit(cfg: &RunConfig) -> Result<Vec<SllnRow>> {
    let bar = bar_f(&cfg.observable, &cfg.model.marginal())?;
    let raw = RunConfig {
        centered: false,
        ..cfg.clone()
    };
    cfg.n_grid
        .iter()
        .map(|&n| {
            let vals: Vec<f64> = raw
                .paths(n, &[1.0])?
                .into_iter()
                .map(|p| p[0] / (n as f64).sqrt())
                .collect();
            let m = mean(&vals);
            let sd = sample_var(&vals).sqrt();
            let tolerance =
                cfg.tol.se_mult * sd / (vals.len() as f64).sqrt() + 5.0 / (n as f64).sqrt();
            let abs_error = (m - bar).abs();
            Ok(SllnRow {
                n_max: n,
                mean: m,
                sd,
                bar_f: bar,
                abs_error,
                tolerance,
                pass: abs_error <= tolerance,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Moment growth
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentRow {
    #[serde(rename = "N")]
    pub n_max: u64,
    /// `sqrt(N) |mean S_N(1)|`.
    pub sum_abs_mean: f64,
    pub sum_abs_mean_se: f64,
    /// `Var(sum F) / N`.
    pub var_ratio: f64,
    pub var_ratio_se: f64,
    /// `E (sum F)^4 / N^2`.
    pub m4_ratio: f64,
    pub m4_ratio_se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub rows: Vec<MomentRow>,
    pub medians: [f64; 3],
    /// Per column: every value lies within `median_factor` of the median,
    /// allowing `se_mult` standard errors.
    pub bounded: [bool; 3],
    pub pass: bool,
}

fn moment_stats(t: &[f64], n: f64) -> [f64; 3] {
    let r = t.len() as f64;
    let m = mean(t);
    let var = sample_var(t);
    let m4 = t.iter().map(|x| x.powi(4)).sum::<f64>() / r;
    [m.abs(), var / n, m4 / (n * n)]
}

fn within_factor(v: f64, se: f64, med: f64, factor: f64, k: f64) -> bool {
    let too_big = v - k * se > factor * med;
    let too_small = v + k * se < med / factor;
    !(too_big || too_small)
}

pub fn moment_growth_audit(cfg: &RunConfig) -> Result<MomentReport> {
    if cfg.reps < 2 {
        return pre("at least two replications are required");
    }
    let mut rows = Vec::new();
    for (gi, &n) in cfg.n_grid.iter().enumerate() {
        let sq = (n as f64).sqrt();
        let t: Vec<f64> = cfg.paths(n, &[1.0])?.into_iter().map(|p| p[0] * sq).collect();
        let point = moment_stats(&t, n as f64);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xb007_5742);
        rng.set_stream(gi as u64);
        let boots: Vec<[f64; 3]> = (0..cfg.tol.bootstrap)
            .map(|_| {
                let s: Vec<f64> = (0..t.len()).map(|_| t[rng.gen_range(0..t.len())]).collect();
                moment_stats(&s, n as f64)
            })
            .collect();
        let se: Vec<f64> = (0..3)
            .map(|c| sample_var(&boots.iter().map(|b| b[c]).collect::<Vec<_>>()).sqrt())
            .collect();
        rows.push(MomentRow {
            n_max: n,
            sum_abs_mean: point[0],
            sum_abs_mean_se: se[0],
            var_ratio: point[1],
            var_ratio_se: se[1],
            m4_ratio: point[2],
            m4_ratio_se: se[2],
        });
    }
    let col = |r: &MomentRow, c: usize| match c {
        0 => (r.sum_abs_mean, r.sum_abs_mean_se),
        1 => (r.var_ratio, r.var_ratio_se),
        _ => (r.m4_ratio, r.m4_ratio_se),
    };
    let mut medians = [0.0; 3];
    let mut bounded = [true; 3];
    for c in 0..3 {
        let vals: Vec<f64> = rows.iter().map(|r| col(r, c).0).collect();
        medians[c] = median(&vals);
        bounded[c] = rows.iter().all(|r| {
            let (v, se) = col(r, c);
            within_factor(v, se, medians[c], cfg.tol.median_factor, cfg.tol.se_mult)
        });
    }
    Ok(MomentReport {
        pass: bounded.iter().all(|&b| b),
        rows,
        medians,
        bounded,
    })
}

// ---------------------------------------------------------------------------
// Covariances
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovEstimate {
    #[serde(rename = "N")]
    pub n_max: u64,
    pub grid: Vec<f64>,
    pub b_hat: Vec<Vec<f64>>,
    /// Jackknife standard errors.
    pub se: Vec<Vec<f64>>,
    pub d2_hat: f64,
    pub d2_se: f64,
}

/// Sample covariance of `(x, y)` and its jackknife standard error.
pub fn cov_with_jackknife(x: &[f64], y: &[f64]) -> (f64, f64) {
    let r = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let cov = (sxy - sx * sy / r) / (r - 1.0);
    if x.len() < 3 {
        return (cov, f64::NAN);
    }
    let loo: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| (sxy - a * b - (sx - a) * (sy - b) / (r - 1.0)) / (r - 2.0))
        .collect();
    let m = mean(&loo);
    let jv = (r - 1.0) / r * loo.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
    (cov, jv.sqrt())
}

/// Covariance matrix of path samples (`paths[r][t]`).
pub fn covariance_from_paths(big_n: u64, grid: &[f64], paths: &[Vec<f64>]) -> CovEstimate {
    let j = grid.len();
    let cols: Vec<Vec<f64>> = (0..j).map(|t| paths.iter().map(|p| p[t]).collect()).collect();
    let mut b_hat = vec![vec![0.0; j]; j];
    let mut se = vec![vec![0.0; j]; j];
    for a in 0..j {
        for b in a..j {
            let (c, e) = cov_with_jackknife(&cols[a], &cols[b]);
            b_hat[a][b] = c;
            b_hat[b][a] = c;
            se[a][b] = e;
            se[b][a] = e;
        }
    }
    let last = grid.iter().position(|&t| t == 1.0);
    let (d2_hat, d2_se) = last.map_or((f64::NAN, f64::NAN), |k| (b_hat[k][k], se[k][k]));
    CovEstimate {
        n_max: big_n,
        grid: grid.to_vec(),
        b_hat,
        se,
        d2_hat,
        d2_se,
    }
}

/// Estimate at the first `N` of the grid.
pub fn estimate_covariance(cfg: &RunConfig) -> Result<CovEstimate> {
    if cfg.reps < 3 {
        return pre("at least three replications are required");
    }
    let n = *cfg.n_grid.first().ok_or_else(|| Error::Precondition("empty N grid".into()))?;
    let paths = cfg.paths(n, &cfg.time_grid)?;
    Ok(covariance_from_paths(n, &cfg.time_grid, &paths))
}

// ---------------------------------------------------------------------------
// Gaussianity
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub threshold: f64,
    pub degenerate: bool,
    pub pass: bool,
}

/// One-sample Kolmogorov-Smirnov distance to `N(mean, var)`; passes when at
/// most `slack * 1.36 / sqrt(R)`.
pub fn gaussianity_test(samples: &[f64], mean: f64, var: f64, slack: f64) -> Result<KsResult> {
    if samples.len() < 200 {
        return pre("at least 200 samples are required");
    }
    let threshold = slack * 1.36 / (samples.len() as f64).sqrt();
    if !(var >= 1e-12) {
        return Ok(KsResult {
            statistic: f64::NAN,
            threshold,
            degenerate: true,
            pass: true,
        });
    }
    let normal = Normal::new(mean, var.sqrt()).map_err(|e| Error::Numerical(e.to_string()))?;
    let mut x = samples.to_vec();
    x.sort_by(|a, b| a.total_cmp(b));
    let r = x.len() as f64;
    let statistic = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = normal.cdf(v);
            (f - i as f64 / r).abs().max(((i + 1) as f64 / r - f).abs())
        })
        .fold(0.0, f64::max);
    Ok(KsResult {
        statistic,
        threshold,
        degenerate: false,
        pass: statistic <= threshold,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionalResult {
    pub tests: Vec<KsResult>,
    pub passed: usize,
    pub required: usize,
    pub pass: bool,
}

/// KS tests of random unit projections `sum_j u_j S_N(t_j)` against the
/// normal with the fitted mean and variance `u^T b_hat u`.
pub fn functional_gaussianity(
    paths: &[Vec<f64>],
    b_hat: &[Vec<f64>],
    tol: &Tolerances,
    seed: u64,
) -> Result<FunctionalResult> {
    let j = b_hat.len();
    let normal = Normal::new(0.0, 1.0).map_err(|e| Error::Numerical(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xf0c7_1a75);
    let mut tests = Vec::new();
    for _ in 0..tol.projections {
        let mut u: Vec<f64> = (0..j).map(|_| normal.inverse_cdf(rng.gen::<f64>())).collect();
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        u.iter_mut().for_each(|x| *x /= norm);
        let proj: Vec<f64> = paths
            .iter()
            .map(|p| p.iter().zip(&u).map(|(a, b)| a * b).sum())
            .collect();
        let var: f64 = (0..j)
            .flat_map(|a| (0..j).map(move |b| (a, b)))
            .map(|(a, b)| u[a] * u[b] * b_hat[a][b])
            .sum();
        tests.push(gaussianity_test(&proj, mean(&proj), var, tol.ks_slack)?);
    }
    let passed = tests.iter().filter(|t| t.pass).count();
    Ok(FunctionalResult {
        passed,
        required: tol.projections_required,
        pass: passed >= tol.projections_required,
        tests,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CltReport {
    pub covariance: CovEstimate,
    pub marginal: KsResult,
    pub functional: FunctionalResult,
    pub pass: bool,
}

/// Marginal KS test of `S_N(1)` and the projection test on the time grid, at
/// the first `N` of the grid.
pub fn clt_audit(cfg: &RunConfig) -> Result<CltReport> {
    let n = *cfg.n_grid.first().ok_or_else(|| Error::Precondition("empty N grid".into()))?;
    let mut grid = cfg.time_grid.clone();
    if !grid.contains(&1.0) {
        grid.push(1.0);
    }
    let paths = cfg.paths(n, &grid)?;
    let cov = covariance_from_paths(n, &grid, &paths);
    let last = grid.iter().position(|&t| t == 1.0).unwrap();
    let s1: Vec<f64> = paths.iter().map(|p| p[last]).collect();
    let marginal = gaussianity_test(&s1, mean(&s1), sample_var(&s1), cfg.tol.ks_slack)?;
    let functional = functional_gaussianity(&paths, &cov.b_hat, &cfg.tol, cfg.seed)?;
    Ok(CltReport {
        pass: marginal.pass && functional.pass,
        covariance: cov,
        marginal,
        functional,
    })
}

// ---------------------------------------------------------------------------
// Bounded variance
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoboundaryReport {
    /// `(N, Var(sum F), se)`.
    pub var_sequence: Vec<(u64, f64, f64)>,
    pub slope: f64,
    pub slope_se: f64,
    pub degenerate: bool,
    /// The slope band contains 0.  A proxy: a coboundary cannot be
    /// recognised from finitely many samples.
    pub bounded_verdict: bool,
}

pub fn coboundary_flag(cfg: &RunConfig) -> Result<CoboundaryReport> {
    if cfg.reps < 3 || cfg.n_grid.len() < 2 {
        return pre("at least three replications and two grid sizes are required");
    }
    let mut seq = Vec::new();
    for &n in &cfg.n_grid {
        let sq = (n as f64).sqrt();
        let t: Vec<f64> = cfg.paths(n, &[1.0])?.into_iter().map(|p| p[0] * sq).collect();
        let v = sample_var(&t);
        seq.push((n, v, v * (2.0 / (t.len() - 1) as f64).sqrt()));
    }
    let degenerate = seq.iter().all(|s| s.1 < 1e-12);
    if degenerate {
        return Ok(CoboundaryReport {
            var_sequence: seq,
            slope: 0.0,
            slope_se: 0.0,
            degenerate,
            bounded_verdict: true,
        });
    }
    let floor = seq.iter().map(|s| s.2).fold(0.0, f64::max) * 1e-6 + 1e-300;
    let w: Vec<f64> = seq.iter().map(|s| 1.0 / s.2.max(floor).powi(2)).collect();
    let sw: f64 = w.iter().sum();
    let xm = seq.iter().zip(&w).map(|(s, w)| w * s.0 as f64).sum::<f64>() / sw;
    let ym = seq.iter().zip(&w).map(|(s, w)| w * s.1).sum::<f64>() / sw;
    let sxx: f64 = seq.iter().zip(&w).map(|(s, w)| w * (s.0 as f64 - xm).powi(2)).sum();
    let sxy: f64 = seq
        .iter()
        .zip(&w)
        .map(|(s, w)| w * (s.0 as f64 - xm) * (s.1 - ym))
        .sum();
    let slope = sxy / sxx;
    let slope_se = sxx.recip().sqrt();
    Ok(CoboundaryReport {
        var_sequence: seq,
        slope,
        slope_se,
        degenerate,
        bounded_verdict: slope.abs() <= cfg.tol.se_mult * slope_se,
    })
}

// ---------------------------------------------------------------------------
// Exact limiting covariance
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CovMode {
    /// Every nonlinear member is equivalent only to itself.
    Diagonal,
    /// At least one pair of distinct members is Q-equivalent.
    Equivalent,
}

/// One `E[F_{eps,i} F_{eps,j}]` contribution on the lattice `m = n + r`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovTerm {
    pub perm: Vec<usize>,
    pub i: usize,
    pub j: usize,
    pub r: i64,
    /// Coupled coordinates `(l, z, d)` with `q_{eps(l)}(n) - q_{eps(z)}(n + r) = d`.
    pub couplings: Vec<(usize, usize, i64)>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoreticalCov {
    pub mode: CovMode,
    pub grid: Vec<f64>,
    pub b: Vec<Vec<f64>>,
    pub terms: Vec<CovTerm>,
    /// `(perm, N^{-1} |I_eps(N)|)` at the scan size.
    pub measures: Vec<(Vec<usize>, f64)>,
    pub scan_n: u64,
}

/// Ordering scan size used for segment measures.
pub const THEORY_SCAN_N: u64 = 10_000;

fn integer_shift(r: &Rat) -> Option<i64> {
    if r.is_integer() {
        i64::try_from(r.to_integer()).ok()
    } else {
        None
    }
}

/// Lattice shift `r` with `q_a(n) - q_b(n + r)` constant, when `a` and `b`
/// are Q-equivalent with unit scaling.
fn unit_shift(family: &PolyFamily, a: usize, b: usize) -> Result<Option<(i64, i64)>> {
    let qa = family.member(a);
    let qb = family.member(b);
    if a == b {
        return Ok(Some((0, 0)));
    }
    if family.degree(a) != family.degree(b) {
        return Ok(None);
    }
    if let Some(eq) = detect_q_equivalence(qa, qb) {
        let one = Rat::from_integer(1.into());
        let r = integer_shift(&eq.r);
        let d = integer_shift(&eq.d);
        return match (eq.c == one, r, d) {
            (true, Some(r), Some(d)) => Ok(Some((r, d))),
            _ => Err(Error::Unsupported(format!(
                "members {} and {} are equivalent with c = {}, r = {}; only c = 1 with integer r is supported",
                a + 1,
                b + 1,
                eq.c,
                eq.r
            ))),
        };
    }
    let v = classify_pair(qa, qb)?;
    if v.explodes == Explodes::Yes {
        Ok(None)
    } else {
        Err(Error::Unsupported(format!(
            "pair ({}, {}) has non-exploding differences without unit equivalence",
            a + 1,
            b + 1
        )))
    }
}

/// `q_a(n) - q_b(n + r)` when it is a constant.
fn constant_offset(family: &PolyFamily, a: usize, b: usize, r: i64) -> Option<i64> {
    let one = Rat::from_integer(1.into());
    let shifted = compose_affine(family.member(b), &one, &Rat::from_integer(r.into()));
    let diff = family.member(a).to_rational().sub(&shifted);
    diff.as_constant().and_then(|c| integer_shift(&c))
}

fn pair_prob(laws: &[(i64, Vec<Vec<f64>>)], d: i64, x: u32, y: u32) -> f64 {
    // X = xi_a, Y = xi_b with a - b = d.
    let t = &laws.iter().find(|(k, _)| *k == d.abs()).unwrap().1;
    if d >= 0 {
        t[y as usize][x as usize]
    } else {
        t[x as usize][y as usize]
    }
}

fn coupled_expectation(
    model: &ProcessModel,
    dec: &Decomposition,
    i: usize,
    j: usize,
    couplings: &[(usize, usize, i64)],
) -> Result<f64> {
    let mu = model.marginal();
    let a = mu.len() as u32;
    let mut laws: Vec<(i64, Vec<Vec<f64>>)> = Vec::new();
    for &(_, _, d) in couplings {
        if !laws.iter().any(|(k, _)| *k == d.abs()) {
            laws.push((d.abs(), model.joint_law(d.unsigned_abs())?.table));
        }
    }
    let fi = &dec.parts[i - 1];
    let fj = &dec.parts[j - 1];
    let mut total = 0.0;
    let mut x = vec![0u32; i];
    let mut y = vec![0u32; j];
    let count = (a as usize).pow((i + j) as u32);
    for _ in 0..count {
        let mut p = 1.0;
        for (l, &xl) in x.iter().enumerate() {
            if let Some(&(_, z, d)) = couplings.iter().find(|c| c.0 == l) {
                p *= pair_prob(&laws, d, xl, y[z]);
            } else {
                p *= mu[xl as usize];
            }
        }
        for (z, &yz) in y.iter().enumerate() {
            if !couplings.iter().any(|c| c.1 == z) {
                p *= mu[yz as usize];
            }
        }
        if p != 0.0 {
            total += p * fi.get(&x) * fj.get(&y);
        }
        // Odometer over (x, y).
        let mut k = 0;
        loop {
            let slot = if k < i { &mut x[k] } else { &mut y[k - i] };
            *slot += 1;
            if *slot < a {
                break;
            }
            *slot = 0;
            k += 1;
            if k == i + j {
                break;
            }
        }
    }
    Ok(total)
}

fn perm_measure(part: &OrderingPartition, perm: &[usize], t: f64) -> f64 {
    let cut = (part.n_max as f64 * t).floor() as u64;
    part.segments
        .iter()
        .filter(|s| s.perm == perm && s.lo <= cut)
        .map(|s| s.hi.min(cut) - s.lo + 1)
        .sum::<u64>() as f64
        / part.n_max as f64
}

/// `b(t, s)` on `grid` for families whose members are all nonlinear.
/// Contributions come from pairs of coordinates at a common lattice offset;
/// other pairs have exploding differences and vanish in the limit.
pub fn theoretical_covariance(
    family: &PolyFamily,
    obs: &Observable,
    model: &ProcessModel,
    grid: &[f64],
    mode: CovMode,
) -> Result<TheoreticalCov> {
    let ell = family.len();
    if (0..ell).any(|i| family.is_linear(i)) {
        return Err(Error::Unsupported(
            "exact covariances are implemented for nonlinear members only".into(),
        ));
    }
    if !model.has_exact_laws() {
        return Err(Error::Unsupported("model has no exact pairwise laws".into()));
    }
    let mut shifts = vec![vec![None; ell]; ell];
    let mut any_equivalent = false;
    for a in 0..ell {
        for b in 0..ell {
            shifts[a][b] = unit_shift(family, a, b)?;
            if a != b && shifts[a][b].is_some() {
                any_equivalent = true;
            }
        }
    }
    match (mode, any_equivalent) {
        (CovMode::Diagonal, true) => {
            return Err(Error::Precondition(
                "family has equivalent members; use the equivalent mode".into(),
            ))
        }
        (CovMode::Equivalent, false) => {
            return Err(Error::Precondition("family has no equivalent pair".into()))
        }
        _ => {}
    }
    let scan_n = THEORY_SCAN_N.max((ell * ell) as u64);
    let part = scan_partition(family, scan_n)?;
    let mu = model.marginal();
    let mut terms = Vec::new();
    let mut weights: Vec<(Vec<usize>, f64)> = Vec::new();
    for perm in part.perms() {
        let dec = decompose_f(obs, &mu, &perm)?;
        let mut k_eps = 0.0;
        for i in 1..=ell {
            for j in 1..=ell {
                let Some((r, _)) = shifts[perm[i - 1]][perm[j - 1]] else {
                    continue;
                };
                let mut couplings = Vec::new();
                for l in 0..i {
                    for z in 0..j {
                        if let Some(d) = constant_offset(family, perm[l], perm[z], r) {
                            couplings.push((l, z, d));
                        }
                    }
                }
                let value = coupled_expectation(model, &dec, i, j, &couplings)?;
                k_eps += value;
                terms.push(CovTerm {
                    perm: perm.clone(),
                    i,
                    j,
                    r,
                    couplings,
                    value,
                });
            }
        }
        weights.push((perm, k_eps));
    }
    let b: Vec<Vec<f64>> = grid
        .iter()
        .map(|&t| {
            grid.iter()
                .map(|&s| {
                    weights
                        .iter()
                        .map(|(perm, k)| perm_measure(&part, perm, t.min(s)) * k)
                        .sum()
                })
                .collect()
        })
        .collect();
    let measures = weights
        .iter()
        .map(|(perm, _)| (perm.clone(), perm_measure(&part, perm, 1.0)))
        .collect();
    Ok(TheoreticalCov {
        mode,
        grid: grid.to_vec(),
        b,
        terms,
        measures,
        scan_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sums::TensorTable;

    fn fam(s: &str) -> PolyFamily {
        PolyFamily::parse(s).unwrap()
    }

    fn indicator(ell: usize) -> Observable {
        Observable::indicator_product(2, &vec![vec![1]; ell]).unwrap()
    }

    #[test]
    fn diagonal_theory_quarter() {
        let model = ProcessModel::base_m(2).unwrap();
        let th = theoretical_covariance(&fam("n^2"), &indicator(1), &model, &[0.25, 1.0], CovMode::Diagonal)
            .unwrap();
        assert!((th.b[0][0] - 0.0625).abs() < 1e-12);
        assert!((th.b[1][1] - 0.25).abs() < 1e-12);
        assert!((th.b[0][1] - 0.0625).abs() < 1e-12);
        let zero = Observable::TensorTable(TensorTable::constant(vec![2], 0.0).unwrap());
        let th = theoretical_covariance(&fam("n^2"), &zero, &model, &[1.0], CovMode::Diagonal).unwrap();
        assert_eq!(th.b[0][0], 0.0);
    }

    #[test]
    fn equivalent_pair_five_sixteenths() {
        let model = ProcessModel::base_m(2).unwrap();
        let family = fam("n^2, n^2+2n+1");
        assert!(theoretical_covariance(&family, &indicator(2), &model, &[1.0], CovMode::Diagonal).is_err());
        let th = theoretical_covariance(&family, &indicator(2), &model, &[1.0], CovMode::Equivalent).unwrap();
        assert!((th.b[0][0] - 5.0 / 16.0).abs() < 1e-12, "{:?}", th.terms);
    }

    #[test]
    fn non_exploding_unrelated_pairs_split() {
        let model = ProcessModel::base_m(2).unwrap();
        // 4n^2 and n^2 are equivalent with c = 2.
        assert!(theoretical_covariance(&fam("n^2, 4n^2"), &indicator(2), &model, &[1.0], CovMode::Equivalent).is_err());
        assert!(theoretical_covariance(&fam("n, n^2"), &indicator(2), &model, &[1.0], CovMode::Diagonal).is_err());
    }

    #[test]
    fn ks_null_and_shift() {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<f64> = (0..2000).map(|_| normal.inverse_cdf(rng.gen::<f64>())).collect();
        assert!(gaussianity_test(&x, 0.0, 1.0, 1.5).unwrap().pass);
        let shifted: Vec<f64> = x.iter().map(|v| v + 5.0).collect();
        assert!(!gaussianity_test(&shifted, 0.0, 1.0, 1.5).unwrap().pass);
        assert!(gaussianity_test(&x, 0.0, 0.0, 1.5).unwrap().degenerate);
        assert!(gaussianity_test(&x[..100], 0.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn jackknife_matches_direct_loo() {
        let x = [1.0, 2.0, 4.0, 3.0, 7.0];
        let y = [2.0, 1.0, 5.0, 2.0, 9.0];
        let (c, se) = cov_with_jackknife(&x, &y);
        let direct = |xs: &[f64], ys: &[f64]| {
            let mx = mean(xs);
            let my = mean(ys);
            xs.iter().zip(ys).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (xs.len() - 1) as f64
        };
        assert!((c - direct(&x, &y)).abs() < 1e-12);
        let loo: Vec<f64> = (0..5)
            .map(|k| {
                let xs: Vec<f64> = x.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, v)| *v).collect();
                let ys: Vec<f64> = y.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, v)| *v).collect();
                direct(&xs, &ys)
            })
            .collect();
        let m = mean(&loo);
        let want = (0.8 * loo.iter().map(|v| (v - m).powi(2)).sum::<f64>()).sqrt();
        assert!((se - want).abs() < 1e-12);
    }

    #[test]
    fn constant_and_zero_observables() {
        let model = ProcessModel::base_m(2).unwrap();
        let c = Observable::TensorTable(TensorTable::constant(vec![2, 2], 0.7).unwrap());
        let mut cfg = RunConfig::new(fam("n, n+N"), c, model.clone());
        cfg.n_grid = vec![100, 400];
        cfg.reps = 4;
        for row in slln_audit(&cfg).unwrap() {
            assert!((row.mean - 0.7).abs() < 1e-12 && row.pass);
        }
        let z = Observable::TensorTable(TensorTable::constant(vec![2, 2], 0.0).unwrap());
        let mut cfg = RunConfig::new(fam("n, n+N"), z, model);
        cfg.n_grid = vec![64, 128, 256];
        cfg.reps = 10;
        let m = moment_growth_audit(&cfg).unwrap();
        assert!(m.pass && m.rows.iter().all(|r| r.var_ratio == 0.0 && r.m4_ratio == 0.0));
        let cob = coboundary_flag(&cfg).unwrap();
        assert!(cob.bounded_verdict && cob.degenerate);
    }

    #[test]
    fn iid_variance_grows_linearly() {
        let model = ProcessModel::base_m(2).unwrap();
        let mut cfg = RunConfig::new(fam("n"), indicator(1), model);
        cfg.n_grid = vec![100, 400, 1600];
        cfg.reps = 400;
        let cob = coboundary_flag(&cfg).unwrap();
        assert!(!cob.bounded_verdict);
        let m = moment_growth_audit(&cfg).unwrap();
        for r in &m.rows {
            assert!((r.var_ratio - 0.25).abs() <= 3.0 * r.var_ratio_se);
        }
    }

    #[test]
    fn covariance_symmetry_and_origin() {
        let model = ProcessModel::base_m(2).unwrap();
        let mut cfg = RunConfig::new(fam("n^2"), indicator(1), model);
        cfg.n_grid = vec![256];
        cfg.time_grid = vec![0.0, 0.5, 1.0];
        cfg.reps = 300;
        let est = estimate_covariance(&cfg).unwrap();
        assert_eq!(est.b_hat[0], vec![0.0, 0.0, 0.0]);
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(est.b_hat[a][b], est.b_hat[b][a]);
            }
        }
        assert!((est.d2_hat - 0.25).abs() <= 3.0 * est.d2_se);
    }
}
