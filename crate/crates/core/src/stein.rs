//! Dependence graphs over `[1, N]`, the Stein-method terms `d_1..d_4` and
//! the block-dependence bounds for mixing sequences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::classify::PolyFamily;
use crate::error::{pre, Error, Result};
use crate::polyalg::BivariatePoly;
use crate::process::{MixingProfile, ProcessModel, RngKey};
use crate::sums::{index_table, summands, Observable};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZetaWindow {
    pub lo: f64,
    pub hi: f64,
    pub chosen: f64,
}

/// `1/(theta (1 - 2/w)) < zeta_1 < 1/4`, midpoint chosen.
pub fn zeta1_window(w: f64, theta: f64) -> Result<ZetaWindow> {
    if !(w > 4.0) {
        return pre("w must exceed 4");
    }
    let lo = 1.0 / (theta * (1.0 - 2.0 / w));
    let hi = 0.25;
    if !(theta > 0.0) || lo >= hi {
        return pre(format!(
            "empty window: theta = {theta} must exceed 4w/(w-2) = {}",
            4.0 * w / (w - 2.0)
        ));
    }
    Ok(ZetaWindow {
        lo,
        hi,
        chosen: 0.5 * (lo + hi),
    })
}

/// `l(N) = 3 N^zeta + 3`.
pub fn l_of(big_n: u64, zeta1: f64) -> f64 {
    3.0 * (big_n as f64).powf(zeta1) + 3.0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DependenceGraph {
    #[serde(rename = "N")]
    pub n_max: u64,
    pub zeta1: f64,
    pub l_n: f64,
    /// Closed neighbourhoods, sorted; `neighborhoods[n - 1]` belongs to `n`.
    #[serde(skip)]
    pub neighborhoods: Vec<Vec<u32>>,
    /// `2 d* (l + 1) + 1`.
    pub ball_bound: f64,
    pub max_ball: usize,
    pub ball_ok: bool,
    /// Violations of `ball_bound`, as `(n, |N_n|)`.
    pub ball_violations: Vec<(u64, usize)>,
    /// `l^2 (2 floor(l(N)) + 1)`: one solution per member pair and offset,
    /// since members are increasing in `n`.
    pub pair_ball_bound: u64,
    pub pair_ball_ok: bool,
    /// Undirected edges excluding loops.
    pub edges: u64,
}

impl DependenceGraph {
    pub fn neighborhood(&self, n: u64) -> &[u32] {
        &self.neighborhoods[n as usize - 1]
    }

    pub fn total_ball(&self) -> u64 {
        self.neighborhoods.iter().map(|v| v.len() as u64).sum()
    }
}

fn eval(q: &BivariatePoly, n: u64, big_n: u64) -> Result<i128> {
    q.eval_i128(n as i128, big_n as i128)
        .ok_or_else(|| Error::Unsupported(format!("{q} overflows at n = {n}")))
}

/// Smallest `m` in `[1, N]` with `q(m) >= target`, or `N + 1`.
fn lower_bound(q: &BivariatePoly, target: i128, big_n: u64) -> Result<u64> {
    let (mut lo, mut hi) = (1u64, big_n + 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if eval(q, mid, big_n)? >= target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// `n ~ m` iff `d_min(n, m) <= l(N)`.  Members are increasing in `n`, so each
/// pair of members contributes an interval of `m` found by bisection.
pub fn build_graph(family: &PolyFamily, big_n: u64, zeta1: f64) -> Result<DependenceGraph> {
    if big_n < 16 {
        return pre("N must be at least 16");
    }
    if big_n > u32::MAX as u64 {
        return pre("N must fit in 32 bits");
    }
    if family.members().iter().any(|q| !q.depends_on_n()) {
        return pre("every member must depend on n");
    }
    let l_n = l_of(big_n, zeta1);
    let li = l_n.floor() as i128;
    let dstar = (0..family.len()).map(|i| family.degree(i)).max().unwrap_or(1);
    let ball_bound = 2.0 * dstar as f64 * (l_n + 1.0) + 1.0;
    let members = family.members();
    let neighborhoods: Vec<Vec<u32>> = (1..=big_n)
        .into_par_iter()
        .map(|n| -> Result<Vec<u32>> {
            let mut out = Vec::new();
            for qi in members {
                let v = eval(qi, n, big_n)?;
                for qj in members {
                    let a = lower_bound(qj, v - li, big_n)?;
                    let b = lower_bound(qj, v + li + 1, big_n)?;
                    out.extend((a..b).map(|m| m as u32));
                }
            }
            out.push(n as u32);
            out.sort_unstable();
            out.dedup();
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let max_ball = neighborhoods.iter().map(Vec::len).max().unwrap_or(0);
    let ball_violations: Vec<(u64, usize)> = neighborhoods
        .iter()
        .enumerate()
        .filter(|(_, v)| v.len() as f64 > ball_bound)
        .map(|(i, v)| (i as u64 + 1, v.len()))
        .collect();
    let pair_ball_bound = (members.len() * members.len()) as u64 * (2 * li as u64 + 1);
    let pair_ball_ok = max_ball as u64 <= pair_ball_bound;
    let edges = (neighborhoods.iter().map(|v| v.len() as u64 - 1).sum::<u64>()) / 2;
    Ok(DependenceGraph {
        n_max: big_n,
        zeta1,
        l_n,
        neighborhoods,
        ball_bound,
        max_ball,
        ball_ok: ball_violations.is_empty(),
        ball_violations,
        pair_ball_bound,
        pair_ball_ok,
        edges,
    })
}

// ---------------------------------------------------------------------------
// Block bounds
// ---------------------------------------------------------------------------

/// Constants of the growth bound for `H` and the blocks `U_i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlockMoments {
    /// `max_i ||U_i||_{L^m}`.
    pub g_m: f64,
    #[serde(rename = "K")]
    pub k_const: f64,
    pub iota: f64,
    pub kappa: f64,
    pub v: f64,
    /// Number of blocks.
    pub k: usize,
}

/// `6 R_0 (sum_i phi(r_i))^{1 - 1/w}` with `r_i = floor(gap_i / 3)` and
/// `R_0 = K (1 + k g_m^iota)`; approximation terms vanish when each symbol
/// is a function of one coordinate.
pub fn correlation_bound(
    gaps: &[u64],
    moments: &BlockMoments,
    profile: &MixingProfile,
    w: f64,
    q: f64,
) -> Result<f64> {
    if !(1.0 / w > moments.iota / moments.v + moments.kappa / q) {
        return pre("1/w must exceed iota/v + kappa/q");
    }
    if !profile.beta_zero {
        return Err(Error::Unsupported("approximation coefficients are not available".into()));
    }
    let r0 = moments.k_const * (1.0 + moments.k as f64 * moments.g_m.powf(moments.iota));
    let s: f64 = gaps.iter().map(|&g| profile.phi(g / 3)).sum();
    Ok(6.0 * r0 * s.powf(1.0 - 1.0 / w))
}

/// `4 sup|H| sum_i phi(gap_i)`.
pub fn block_alpha_bound(gaps: &[u64], sup_h: f64, profile: &MixingProfile) -> Result<f64> {
    if !sup_h.is_finite() || sup_h < 0.0 {
        return pre("sup|H| must be finite and nonnegative");
    }
    Ok(4.0 * sup_h * gaps.iter().map(|&g| profile.phi(g)).sum::<f64>())
}

// ---------------------------------------------------------------------------
// Stein report
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct SteinConfig {
    pub family: PolyFamily,
    pub observable: Observable,
    pub model: ProcessModel,
    pub n_grid: Vec<u64>,
    pub w: f64,
    pub theta: f64,
    /// Defaults to the window midpoint.
    pub zeta1: Option<f64>,
    /// Replications for the `d_3` and increment estimates.
    pub reps: usize,
    pub gamma_pairs: usize,
    pub seed: u64,
}

impl SteinConfig {
    pub fn new(family: PolyFamily, observable: Observable, model: ProcessModel) -> Self {
        Self {
            family,
            observable,
            model,
            n_grid: (10..=14).map(|k| 1u64 << k).collect(),
            w: 8.0,
            theta: 8.0,
            zeta1: None,
            reps: 20,
            gamma_pairs: 20,
            seed: 0,
        }
    }
}

/// Constants shared by the plug-in bounds, printed with the report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SteinConstants {
    pub sup_f: f64,
    pub w: f64,
    pub theta: f64,
    pub zeta: ZetaWindow,
    pub zeta1: f64,
    pub profile: MixingProfile,
    /// Block counts for `d_1, d_4` and for `d_2`.
    pub l_single: usize,
    pub l_pair: usize,
    pub formulas: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SteinRow {
    #[serde(rename = "N")]
    pub n_max: u64,
    pub l_n: f64,
    pub r_n: u64,
    pub ball_bound: f64,
    pub max_ball: usize,
    pub ball_ok: bool,
    pub pair_ball_ok: bool,
    pub alpha_single: f64,
    pub alpha_pair: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3_analytic: f64,
    pub d3_mc: f64,
    pub d3_mc_se: f64,
    pub d4: f64,
    pub tau: f64,
    pub tau_ln2: f64,
    /// `max Var(S_N(s) - S_N(t)) N / ([Ns] - [Nt])` over sampled pairs.
    pub gamma_hat: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SteinReport {
    pub constants: SteinConstants,
    pub rows: Vec<SteinRow>,
    pub tau_decreasing: bool,
    pub d3_within_bound: bool,
    /// Every term vanishes identically.
    pub degenerate: bool,
    pub gamma_max: f64,
    pub pass: bool,
}

/// `E F(Xi_{n,N})` for `n = 1..=N` when the model has exact laws.
fn exact_means(family: &PolyFamily, obs: &Observable, model: &ProcessModel, big_n: u64) -> Result<Option<Vec<f64>>> {
    let Some(table) = obs.table() else {
        return Ok(None);
    };
    if !model.has_exact_laws() {
        return Ok(None);
    }
    let ell = family.len();
    let (idx, _) = index_table(family, big_n)?;
    idx.par_chunks(ell)
        .map(|ix| {
            let law = model.tuple_law(ix)?;
            Ok(law.iter().map(|(s, p)| p * table.get(s)).sum())
        })
        .collect::<Result<Vec<f64>>>()
        .map(Some)
}

/// `|X_n|` per replication with `X_n = (F(Xi_n) - E F(Xi_n)) / sqrt(N)`,
/// and the centred summands.
fn centred_samples(cfg: &SteinConfig, big_n: u64) -> Result<Vec<Vec<f64>>> {
    let raw: Vec<Vec<f64>> = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|r| {
            summands(&cfg.family, &cfg.observable, &cfg.model, big_n, RngKey::new(cfg.seed, r))
                .map(|x| x.0)
        })
        .collect::<Result<_>>()?;
    let means = match exact_means(&cfg.family, &cfg.observable, &cfg.model, big_n)? {
        Some(m) => m,
        None => (0..big_n as usize)
            .map(|n| raw.iter().map(|x| x[n]).sum::<f64>() / raw.len() as f64)
            .collect(),
    };
    let scale = (big_n as f64).sqrt().recip();
    Ok(raw
        .into_iter()
        .map(|x| x.iter().zip(&means).map(|(v, m)| (v - m) * scale).collect())
        .collect())
}

fn d3_monte_carlo(graph: &DependenceGraph, xs: &[Vec<f64>]) -> (f64, f64) {
    let r = xs.len() as f64;
    let per_rep_first: Vec<f64> = xs
        .iter()
        .map(|x| {
            graph
                .neighborhoods
                .iter()
                .enumerate()
                .map(|(n, nb)| {
                    let s: f64 = nb.iter().map(|&m| x[m as usize - 1].abs()).sum();
                    x[n].abs() * s * s
                })
                .sum()
        })
        .collect();
    let n = graph.n_max as usize;
    let abs_mean: Vec<f64> = (0..n).map(|k| xs.iter().map(|x| x[k].abs()).sum::<f64>() / r).collect();
    // sum_n sum_{m in N_n} E|X_n X_m| * sum_{k in N_n} E|X_k|.
    let second: f64 = graph
        .neighborhoods
        .iter()
        .enumerate()
        .map(|(i, nb)| {
            let ek: f64 = nb.iter().map(|&k| abs_mean[k as usize - 1]).sum();
            let enm: f64 = nb
                .iter()
                .map(|&m| xs.iter().map(|x| (x[i] * x[m as usize - 1]).abs()).sum::<f64>() / r)
                .sum();
            enm * ek
        })
        .sum();
    let mean_first = per_rep_first.iter().sum::<f64>() / r;
    let var_first = if xs.len() > 1 {
        per_rep_first.iter().map(|v| (v - mean_first).powi(2)).sum::<f64>() / (r - 1.0)
    } else {
        0.0
    };
    (mean_first + second, (var_first / r).sqrt())
}

fn gamma_estimate(cfg: &SteinConfig, xs: &[Vec<f64>], big_n: u64, stream: u64) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6a33_a5c1);
    rng.set_stream(stream);
    let cums: Vec<Vec<f64>> = xs
        .iter()
        .map(|x| {
            let mut c = vec![0.0];
            let mut acc = 0.0;
            for v in x {
                acc += v;
                c.push(acc);
            }
            c
        })
        .collect();
    let r = xs.len() as f64;
    let mut best: f64 = 0.0;
    for _ in 0..cfg.gamma_pairs {
        let a = rng.gen::<f64>();
        let b = rng.gen::<f64>();
        let (t, s) = if a < b { (a, b) } else { (b, a) };
        let it = (big_n as f64 * t).floor() as usize;
        let is = (big_n as f64 * s).floor() as usize;
        if is == it {
            continue;
        }
        let d: Vec<f64> = cums.iter().map(|c| c[is] - c[it]).collect();
        let m = d.iter().sum::<f64>() / r;
        let var = d.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (r - 1.0);
        best = best.max(var * big_n as f64 / (is - it) as f64);
    }
    best
}

pub fn stein_report(cfg: &SteinConfig) -> Result<SteinReport> {
    let profile = cfg.model.profile();
    if !profile.certified {
        return Err(Error::Precondition("mixing profile is not certified".into()));
    }
    let sup_f = cfg
        .observable
        .sup_norm()
        .ok_or_else(|| Error::Precondition("a bounded observable is required".into()))?;
    let zeta = zeta1_window(cfg.w, cfg.theta)?;
    let zeta1 = cfg.zeta1.unwrap_or(zeta.chosen);
    if !(zeta.lo < zeta1 && zeta1 < zeta.hi) {
        return pre(format!("zeta1 = {zeta1} is outside ({}, {})", zeta.lo, zeta.hi));
    }
    let ell = cfg.family.len();
    let (l_single, l_pair) = (2 * ell + 1, 4 * ell + 1);
    let w = cfg.w;
    let m = sup_f;
    let mut rows = Vec::new();
    for (gi, &big_n) in cfg.n_grid.iter().enumerate() {
        let graph = build_graph(&cfg.family, big_n, zeta1)?;
        let l_n = graph.l_n;
        let r_n = (l_n / 3.0).floor() as u64;
        let phi_r = profile.phi(r_n);
        let alpha_single = (l_single as f64 * phi_r).min(0.25);
        let alpha_pair = (l_pair as f64 * phi_r).min(0.25);
        let nf = big_n as f64;
        let d1 = 12.0 * m * nf.sqrt() * alpha_single.powf(1.0 - 1.0 / w);
        let d4 = 32.0 * m * m * nf * alpha_single.powf(1.0 - 2.0 / w);
        let mean_ball = graph.total_ball() as f64 / nf;
        let d2 = 48.0 * m * m * mean_ball * alpha_pair.powf(1.0 - 2.0 / w);
        let d3_analytic = 16.0 * m.powi(3) * nf.powf(-0.5) * graph.ball_bound.powi(2);
        let (d3_mc, d3_mc_se, gamma_hat) = if m == 0.0 || cfg.reps == 0 {
            (0.0, 0.0, 0.0)
        } else {
            let xs = centred_samples(cfg, big_n)?;
            let (v, se) = d3_monte_carlo(&graph, &xs);
            (v, se, gamma_estimate(cfg, &xs, big_n, gi as u64))
        };
        let tau = d1 + d2 + d3_analytic + d4;
        rows.push(SteinRow {
            n_max: big_n,
            l_n,
            r_n,
            ball_bound: graph.ball_bound,
            max_ball: graph.max_ball,
            ball_ok: graph.ball_ok,
            pair_ball_ok: graph.pair_ball_ok,
            alpha_single,
            alpha_pair,
            d1,
            d2,
            d3_analytic,
            d3_mc,
            d3_mc_se,
            d4,
            tau,
            tau_ln2: tau * nf.ln().powi(2),
            gamma_hat,
        });
    }
    let degenerate = rows.iter().all(|r| r.tau == 0.0);
    let tau_decreasing = rows.windows(2).all(|w| w[1].tau_ln2 < w[0].tau_ln2);
    let d3_within_bound = rows.iter().all(|r| r.d3_mc <= r.d3_analytic);
    let gamma_max = rows.iter().map(|r| r.gamma_hat).fold(0.0, f64::max);
    let formulas = vec![
        "alpha_L = min(1/4, L phi(r)), r = floor(l/3)".to_string(),
        "d1 <= 12 M sqrt(N) alpha_{2l+1}^(1-1/w)".to_string(),
        "d2 <= 48 M^2 (sum_n |N_n| / N) alpha_{4l+1}^(1-2/w)".to_string(),
        "d3 <= 16 M^3 N^(-1/2) (2 d* (l+1) + 1)^2".to_string(),
        "d4 <= 32 M^2 N alpha_{2l+1}^(1-2/w)".to_string(),
    ];
    Ok(SteinReport {
        constants: SteinConstants {
            sup_f,
            w,
            theta: cfg.theta,
            zeta,
            zeta1,
            profile,
            l_single,
            l_pair,
            formulas,
        },
        pass: (degenerate || tau_decreasing) && d3_within_bound,
        rows,
        tau_decreasing,
        d3_within_bound,
        degenerate,
        gamma_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{build_markov, Matrix};
    use crate::sums::TensorTable;
    use std::sync::Arc;

    fn fam(s: &str) -> PolyFamily {
        PolyFamily::parse(s).unwrap()
    }

    #[test]
    fn zeta_window_examples() {
        let z = zeta1_window(8.0, 6.0).unwrap();
        assert!((z.lo - 1.0 / 4.5).abs() < 1e-15);
        assert!((z.chosen - 0.236_111).abs() < 1e-5);
        assert!(zeta1_window(8.0, 5.0).is_err());
        let z = zeta1_window(1e6, 4.1).unwrap();
        assert!((z.lo - 0.2439).abs() < 1e-4 && z.lo < 0.25);
    }

    #[test]
    fn graph_examples() {
        assert!((l_of(4096, 0.2361) - 24.4).abs() < 0.1);
        let g = build_graph(&fam("n"), 1000, 0.2).unwrap();
        let l = g.l_n.floor() as u32;
        assert_eq!(g.neighborhood(500).len() as u32, 2 * l + 1);
        assert!(g.neighborhood(500).iter().all(|&m| m.abs_diff(500) <= l));
        assert!(g.ball_ok);
        let g = build_graph(&fam("n, n+N, n^2"), 4096, 0.2361).unwrap();
        assert!(g.pair_ball_ok);
        // Windows around n and n^2 plus the squares near n exceed 2 d* (l + 1) + 1.
        assert_eq!(g.ball_violations, vec![(32, 103), (33, 103), (40, 103)]);
        // Symmetry.
        for n in (1..=4096u64).step_by(97) {
            for &m in g.neighborhood(n) {
                assert!(g.neighborhood(m as u64).binary_search(&(n as u32)).is_ok());
            }
        }
    }

    fn chain() -> ProcessModel {
        ProcessModel::FiniteMarkov(Arc::new(
            build_markov(
                Matrix::Float(vec![vec![0.9, 0.1], vec![0.1, 0.9]]),
                vec![0.0, 1.0],
            )
            .unwrap(),
        ))
    }

    #[test]
    fn block_bounds() {
        let p = chain().profile();
        let b = block_alpha_bound(&[5, 5], 1.0, &p).unwrap();
        assert!((b - 16.0 * 0.8f64.powi(5)).abs() < 1e-12);
        let iid = MixingProfile::independent();
        assert_eq!(block_alpha_bound(&[3, 4], 1.0, &iid).unwrap(), 0.0);
        let mom = BlockMoments { g_m: 1.0, k_const: 1.0, iota: 0.0, kappa: 1.0, v: 1.0, k: 2 };
        assert_eq!(correlation_bound(&[9], &mom, &iid, 8.0, 100.0).unwrap(), 0.0);
        let a = correlation_bound(&[9], &mom, &p, 8.0, 100.0).unwrap();
        let b = correlation_bound(&[30], &mom, &p, 8.0, 100.0).unwrap();
        assert!(b <= a);
        assert!(correlation_bound(&[9], &mom, &p, 8.0, 1.0).is_err());
    }

    #[test]
    fn zero_observable_report() {
        let zero = Observable::TensorTable(TensorTable::constant(vec![2, 2], 0.0).unwrap());
        let mut cfg = SteinConfig::new(fam("n, n^2"), zero, chain());
        cfg.n_grid = vec![256, 512];
        let rep = stein_report(&cfg).unwrap();
        assert!(rep.degenerate && rep.pass);
        assert!(rep.rows.iter().all(|r| r.d1 == 0.0 && r.d2 == 0.0 && r.d3_analytic == 0.0 && r.d4 == 0.0));
        let cf = ProcessModel::continued_fraction(3).unwrap();
        let f = Observable::indicator_product(3, &[vec![0], vec![0]]).unwrap();
        assert!(stein_report(&SteinConfig::new(fam("n, n^2"), f, cf)).is_err());
    }

    #[test]
    fn d3_estimate_below_analytic() {
        let f = Observable::indicator_product(2, &[vec![1], vec![1]]).unwrap();
        let mut cfg = SteinConfig::new(fam("n, n^2"), f, chain());
        cfg.n_grid = vec![256, 1024];
        cfg.reps = 8;
        let rep = stein_report(&cfg).unwrap();
        assert!(rep.d3_within_bound);
        assert!(rep.rows.iter().all(|r| r.d3_mc > 0.0 && r.gamma_hat > 0.0));
    }
}
