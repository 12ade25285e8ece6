//! Stationary symbol sequences `xi_0, xi_1, ...`: i.i.d. base-m digits,
//! finite-state Markov chains and continued-fraction digits under the Gauss
//! measure, together with their mixing profiles and pairwise laws.
//!
//! All randomness comes from ChaCha8 streams keyed by `(seed, stream)`; the
//! word position encodes the sequence index, so any index can be sampled
//! without touching the others.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{pre, Error, Result};
use crate::polyalg::{rat_to_f64, Rat};

/// Identifies one independent random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RngKey {
    pub seed: u64,
    pub stream: u64,
}

impl RngKey {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream);
        r
    }
}

/// 32-bit words reserved per sequence index.
const WORDS_PER_INDEX: u128 = 16;

fn rng_at(key: RngKey, index: u64) -> ChaCha8Rng {
    let mut r = key.rng();
    r.set_word_pos(index as u128 * WORDS_PER_INDEX);
    r
}

// ---------------------------------------------------------------------------
// Mixing profiles and laws
// ---------------------------------------------------------------------------

/// `phi(n) <= C lambda^n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MixingProfile {
    #[serde(rename = "C")]
    pub c: f64,
    pub lambda: f64,
    /// Each `xi_n` is a function of the `n`-th coordinate alone.
    pub beta_zero: bool,
    /// Derived from a rigorous contraction estimate.
    pub certified: bool,
}

impl MixingProfile {
    /// `min(1, C lambda^n)`.
    pub fn phi(&self, n: u64) -> f64 {
        self.phi_raw(n).min(1.0)
    }

    /// `C lambda^n`, without the `phi <= 1` cap.
    pub fn phi_raw(&self, n: u64) -> f64 {
        if n == 0 {
            return self.c;
        }
        self.c * self.lambda.powf(n as f64)
    }

    pub fn independent() -> Self {
        Self {
            c: 2.0,
            lambda: 0.0,
            beta_zero: true,
            certified: true,
        }
    }
}

/// Law of `(xi_0, xi_k)` over the symbol alphabet.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointLaw {
    pub k: u64,
    pub table: Vec<Vec<f64>>,
}

// ---------------------------------------------------------------------------
// Finite Markov chains
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub enum Matrix {
    Float(Vec<Vec<f64>>),
    Exact(Vec<Vec<Rat>>),
}

impl Matrix {
    fn dim(&self) -> usize {
        match self {
            Matrix::Float(m) => m.len(),
            Matrix::Exact(m) => m.len(),
        }
    }

    fn to_f64(&self) -> Vec<Vec<f64>> {
        match self {
            Matrix::Float(m) => m.clone(),
            Matrix::Exact(m) => m
                .iter()
                .map(|r| r.iter().map(rat_to_f64).collect())
                .collect(),
        }
    }
}

type Mat = Vec<Vec<f64>>;

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

fn dobrushin(p: &Mat) -> f64 {
    let n = p.len();
    let mut best: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d: f64 = (0..n).map(|k| (p[i][k] - p[j][k]).abs()).sum::<f64>() * 0.5;
            best = best.max(d);
        }
    }
    best.min(1.0)
}

fn dobrushin_exact(p: &[Vec<Rat>]) -> Rat {
    let n = p.len();
    let mut best = Rat::zero();
    for i in 0..n {
        for j in i + 1..n {
            let mut d = Rat::zero();
            for k in 0..n {
                d += (&p[i][k] - &p[j][k]).abs();
            }
            d /= Rat::from_integer(BigInt::from(2));
            if d > best {
                best = d;
            }
        }
    }
    best
}

/// `P^k > 0` entrywise for `k = (S-1)^2 + 1`.
fn is_primitive(p: &Mat) -> bool {
    let n = p.len();
    let pat: Vec<Vec<bool>> = p.iter().map(|r| r.iter().map(|&x| x > 0.0).collect()).collect();
    let mut cur = pat.clone();
    let steps = (n - 1) * (n - 1) + 1;
    for _ in 1..steps {
        let mut next = vec![vec![false; n]; n];
        for i in 0..n {
            for k in 0..n {
                if cur[i][k] {
                    for j in 0..n {
                        next[i][j] |= pat[k][j];
                    }
                }
            }
        }
        cur = next;
    }
    cur.iter().all(|r| r.iter().all(|&b| b))
}

fn stationary_exact(p: &[Vec<Rat>]) -> Result<Vec<Rat>> {
    let n = p.len();
    // Rows: (P^T - I) pi = 0 with the last equation replaced by sum pi = 1.
    let mut a: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            let mut row: Vec<Rat> = (0..n)
                .map(|j| {
                    let mut v = p[j][i].clone();
                    if i == j {
                        v -= Rat::one();
                    }
                    v
                })
                .collect();
            row.push(Rat::zero());
            row
        })
        .collect();
    a[n - 1] = vec![Rat::one(); n + 1];
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::InvalidModel("singular stationary system".into()))?;
        a.swap(col, piv);
        let pv = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v /= &pv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..=n {
                    let t = &a[col][c] * &f;
                    a[r][c] -= t;
                }
            }
        }
    }
    Ok(a.into_iter().map(|r| r[n].clone()).collect())
}

fn stationary_f64(p: &Mat) -> Result<Vec<f64>> {
    let n = p.len();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n)
                .map(|j| p[j][i] - if i == j { 1.0 } else { 0.0 })
                .collect();
            row.push(0.0);
            row
        })
        .collect();
    a[n - 1] = vec![1.0; n + 1];
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        if a[piv][col].abs() < 1e-300 {
            return Err(Error::InvalidModel("singular stationary system".into()));
        }
        a.swap(col, piv);
        let pv = a[col][col];
        for v in a[col].iter_mut() {
            *v /= pv;
        }
        for r in 0..n {
            if r != col && a[r][col] != 0.0 {
                let f = a[r][col];
                for c in col..=n {
                    a[r][c] -= a[col][c] * f;
                }
            }
        }
    }
    Ok(a.into_iter().map(|r| r[n]).collect())
}

/// Finite-state chain observed through a state map `f`.
#[derive(Clone, Debug)]
pub struct MarkovModel {
    pub p: Matrix,
    pub f: Vec<f64>,
    pub pi: Vec<f64>,
    pub pi_exact: Option<Vec<Rat>>,
    /// Dobrushin coefficient of `P^steps`, the first power below 1.
    pub dobrushin: f64,
    pub dobrushin_steps: u32,
    pub profile: MixingProfile,
    /// Distinct values of `f`, sorted; symbols index into this list.
    pub values: Vec<f64>,
    pub state_symbol: Vec<u32>,
    pf: Mat,
    /// `pow2[b] = P^{2^b}`.
    pow2: Vec<Mat>,
}

pub fn build_markov(p: Matrix, f: Vec<f64>) -> Result<MarkovModel> {
    let s = p.dim();
    if s == 0 {
        return Err(Error::InvalidModel("empty transition matrix".into()));
    }
    if f.len() != s {
        return Err(Error::InvalidModel(format!("state map has {} entries, expected {s}", f.len())));
    }
    match &p {
        Matrix::Float(m) => {
            for (i, r) in m.iter().enumerate() {
                if r.len() != s || r.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return Err(Error::InvalidModel(format!("row {i} is not a probability vector")));
                }
                if (r.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidModel(format!("row {i} does not sum to 1")));
                }
            }
        }
        Matrix::Exact(m) => {
            for (i, r) in m.iter().enumerate() {
                if r.len() != s || r.iter().any(|x| x.is_negative()) {
                    return Err(Error::InvalidModel(format!("row {i} is not a probability vector")));
                }
                if r.iter().fold(Rat::zero(), |a, b| a + b) != Rat::one() {
                    return Err(Error::InvalidModel(format!("row {i} does not sum to 1")));
                }
            }
        }
    }
    if f.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidModel("state map values must be finite".into()));
    }
    let pf = p.to_f64();
    if !is_primitive(&pf) {
        return Err(Error::InvalidModel("chain is reducible or periodic".into()));
    }
    let (pi, pi_exact) = match &p {
        Matrix::Exact(m) => {
            let e = stationary_exact(m)?;
            (e.iter().map(rat_to_f64).collect(), Some(e))
        }
        Matrix::Float(_) => (stationary_f64(&pf)?, None),
    };
    // phi(n) <= delta(P^n); for a first contracting power j, delta(P^n) <= delta_j^{floor(n/j)}.
    let max_steps = ((s - 1) * (s - 1) + 1) as u32;
    let mut pk = pf.clone();
    let mut found = None;
    for j in 1..=max_steps.max(1) {
        let d = if j == 1 {
            match &p {
                Matrix::Exact(m) => rat_to_f64(&dobrushin_exact(m)),
                Matrix::Float(_) => dobrushin(&pf),
            }
        } else {
            dobrushin(&pk)
        };
        if d < 1.0 {
            found = Some((j, d));
            break;
        }
        pk = mat_mul(&pk, &pf);
    }
    let (steps, delta) =
        found.ok_or_else(|| Error::InvalidModel("no contracting power found".into()))?;
    let (c, lambda) = if steps == 1 {
        (2.0, delta)
    } else if delta == 0.0 {
        (2f64.powi(steps as i32), 0.5)
    } else {
        (2.0 / delta, delta.powf(1.0 / steps as f64))
    };
    let mut values: Vec<f64> = f.clone();
    values.sort_by(|a, b| a.total_cmp(b));
    values.dedup();
    let state_symbol = f
        .iter()
        .map(|x| values.iter().position(|v| v == x).unwrap() as u32)
        .collect();
    let mut pow2 = vec![pf.clone()];
    for b in 1..64 {
        let prev = &pow2[b - 1];
        pow2.push(mat_mul(prev, prev));
    }
    Ok(MarkovModel {
        p,
        f,
        pi,
        pi_exact,
        dobrushin: delta,
        dobrushin_steps: steps,
        profile: MixingProfile {
            c,
            lambda,
            beta_zero: true,
            certified: true,
        },
        values,
        state_symbol,
        pf,
        pow2,
    })
}

impl MarkovModel {
    pub fn n_states(&self) -> usize {
        self.pf.len()
    }

    pub fn transition(&self) -> &Mat {
        &self.pf
    }

    /// `P^k` by binary powering.
    pub fn power(&self, k: u64) -> Mat {
        let n = self.n_states();
        let mut acc: Mat = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        for b in 0..64 {
            if k >> b & 1 == 1 {
                acc = mat_mul(&acc, &self.pow2[b]);
            }
        }
        acc
    }

    /// Row `i` of `P^k`.
    pub fn power_row(&self, i: usize, k: u64) -> Vec<f64> {
        let n = self.n_states();
        let mut row = vec![0.0; n];
        row[i] = 1.0;
        for b in 0..64 {
            if k >> b & 1 == 1 {
                let m = &self.pow2[b];
                let mut next = vec![0.0; n];
                for (a, &ra) in row.iter().enumerate() {
                    if ra != 0.0 {
                        for j in 0..n {
                            next[j] += ra * m[a][j];
                        }
                    }
                }
                row = next;
            }
        }
        row
    }

    /// Law of `(Y_0, Y_k)` over states.
    pub fn state_joint(&self, k: u64) -> Mat {
        let pk = self.power(k);
        (0..self.n_states())
            .map(|i| pk[i].iter().map(|x| self.pi[i] * x).collect())
            .collect()
    }
}

fn sample_discrete(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding slack: last state with positive mass.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

/// Rate used for the continued-fraction profile: the Gauss-Kuzmin-Wirsing
/// constant, which governs the asymptotic decay but is not a certified
/// finite-n bound.
pub const WIRSING: f64 = 0.303_663_002_898_732_6;

#[derive(Clone, Debug)]
pub enum ProcessModel {
    BaseM { m: u32 },
    /// Digits `a_{n+1}` with values at or above `digit_cap` merged into one symbol.
    ContinuedFraction { digit_cap: u32 },
    FiniteMarkov(Arc<MarkovModel>),
}

/// Largest prefix length served for continued-fraction digits.
pub const CF_MAX_PREFIX: u64 = 100_000;

impl ProcessModel {
    pub fn base_m(m: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidModel("base must be at least 2".into()));
        }
        Ok(ProcessModel::BaseM { m })
    }

    pub fn continued_fraction(digit_cap: u32) -> Result<Self> {
        if digit_cap < 2 {
            return Err(Error::InvalidModel("digit cap must be at least 2".into()));
        }
        Ok(ProcessModel::ContinuedFraction { digit_cap })
    }

    pub fn markov(p: Matrix, f: Vec<f64>) -> Result<Self> {
        Ok(ProcessModel::FiniteMarkov(Arc::new(build_markov(p, f)?)))
    }

    pub fn alphabet_size(&self) -> usize {
        match self {
            ProcessModel::BaseM { m } => *m as usize,
            ProcessModel::ContinuedFraction { digit_cap } => *digit_cap as usize,
            ProcessModel::FiniteMarkov(mm) => mm.values.len(),
        }
    }

    /// Real value carried by a symbol.
    pub fn symbol_value(&self, s: u32) -> f64 {
        match self {
            ProcessModel::BaseM { .. } => s as f64,
            ProcessModel::ContinuedFraction { .. } => (s + 1) as f64,
            ProcessModel::FiniteMarkov(mm) => mm.values[s as usize],
        }
    }

    /// Stationary one-dimensional law of the symbols.
    pub fn marginal(&self) -> Vec<f64> {
        match self {
            ProcessModel::BaseM { m } => vec![1.0 / *m as f64; *m as usize],
            ProcessModel::ContinuedFraction { digit_cap } => {
                let cap = *digit_cap as usize;
                let mut v: Vec<f64> = (1..cap).map(gauss_digit_prob).collect();
                v.push((1.0 + 1.0 / cap as f64).log2());
                v
            }
            ProcessModel::FiniteMarkov(mm) => {
                let mut v = vec![0.0; mm.values.len()];
                for (i, &s) in mm.state_symbol.iter().enumerate() {
                    v[s as usize] += mm.pi[i];
                }
                v
            }
        }
    }

    pub fn profile(&self) -> MixingProfile {
        match self {
            ProcessModel::BaseM { .. } => MixingProfile::independent(),
            ProcessModel::ContinuedFraction { .. } => MixingProfile {
                c: 2.0,
                lambda: WIRSING,
                beta_zero: true,
                certified: false,
            },
            ProcessModel::FiniteMarkov(mm) => mm.profile,
        }
    }

    /// Exact pairwise laws are available for the i.i.d. and Markov models.
    pub fn has_exact_laws(&self) -> bool {
        !matches!(self, ProcessModel::ContinuedFraction { .. })
    }

    pub fn supports_sparse(&self) -> bool {
        !matches!(self, ProcessModel::ContinuedFraction { .. })
    }

    pub fn joint_law(&self, k: u64) -> Result<JointLaw> {
        let a = self.alphabet_size();
        let table = match self {
            ProcessModel::BaseM { m } => {
                let p = 1.0 / *m as f64;
                (0..a)
                    .map(|i| {
                        (0..a)
                            .map(|j| match (k, i == j) {
                                (0, true) => p,
                                (0, false) => 0.0,
                                _ => p * p,
                            })
                            .collect()
                    })
                    .collect()
            }
            ProcessModel::FiniteMarkov(mm) => {
                let sj = mm.state_joint(k);
                let mut t = vec![vec![0.0; a]; a];
                for (i, row) in sj.iter().enumerate() {
                    for (j, x) in row.iter().enumerate() {
                        t[mm.state_symbol[i] as usize][mm.state_symbol[j] as usize] += x;
                    }
                }
                t
            }
            ProcessModel::ContinuedFraction { .. } => {
                return Err(Error::Unsupported(
                    "exact pairwise laws are not available for continued-fraction digits".into(),
                ))
            }
        };
        Ok(JointLaw { k, table })
    }

    /// Law of `(xi_{i_1}, ..., xi_{i_l})` as a list of (symbols, probability)
    /// with positive mass.  Indices may repeat and need not be sorted.
    pub fn tuple_law(&self, indices: &[u64]) -> Result<Vec<(Vec<u32>, f64)>> {
        let mut distinct: Vec<u64> = indices.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let pos: Vec<usize> = indices
            .iter()
            .map(|i| distinct.binary_search(i).unwrap())
            .collect();
        let d = distinct.len();
        match self {
            ProcessModel::BaseM { m } => {
                let m = *m as usize;
                let p = (1.0 / m as f64).powi(d as i32);
                let mut out = Vec::with_capacity(m.pow(d as u32));
                let mut cur = vec![0u32; d];
                loop {
                    out.push((pos.iter().map(|&t| cur[t]).collect(), p));
                    if !odometer(&mut cur, m as u32) {
                        break;
                    }
                }
                Ok(out)
            }
            ProcessModel::FiniteMarkov(mm) => {
                let s = mm.n_states();
                let rows: Vec<Mat> = distinct
                    .windows(2)
                    .map(|w| mm.power(w[1] - w[0]))
                    .collect();
                let mut out = Vec::new();
                let mut cur = vec![0u32; d];
                loop {
                    let mut pr = mm.pi[cur[0] as usize];
                    for t in 1..d {
                        pr *= rows[t - 1][cur[t - 1] as usize][cur[t] as usize];
                    }
                    if pr > 0.0 {
                        out.push((
                            pos.iter().map(|&t| mm.state_symbol[cur[t] as usize]).collect(),
                            pr,
                        ));
                    }
                    if !odometer(&mut cur, s as u32) {
                        break;
                    }
                }
                Ok(out)
            }
            ProcessModel::ContinuedFraction { .. } => Err(Error::Unsupported(
                "exact joint laws are not available for continued-fraction digits".into(),
            )),
        }
    }
}

fn odometer(cur: &mut [u32], base: u32) -> bool {
    for c in cur.iter_mut() {
        *c += 1;
        if *c < base {
            return true;
        }
        *c = 0;
    }
    false
}

/// `P(a_n = k) = log2(1 + 1/(k(k+2)))`.
pub fn gauss_digit_prob(k: usize) -> f64 {
    let k = k as f64;
    (1.0 + 1.0 / (k * (k + 2.0))).log2()
}

/// Which indices to generate.
#[derive(Clone, Copy, Debug)]
pub enum IndexSet<'a> {
    /// `0, 1, ..., len - 1`.
    Prefix(u64),
    /// Strictly increasing indices.
    Sparse(&'a [u64]),
}

/// Base-m digit at `index`.
pub fn base_m_digit(m: u32, key: RngKey, index: u64) -> u32 {
    rng_at(key, index).gen_range(0..m)
}

fn uniform_at(key: RngKey, index: u64) -> f64 {
    rng_at(key, index).gen::<f64>()
}

/// Symbols at the requested indices.  Markov chains are sampled at sparse
/// indices through `P^gap`, which leaves the joint law unchanged; continued
/// fractions need the full prefix.
pub fn generate(model: &ProcessModel, indices: IndexSet<'_>, key: RngKey) -> Result<Vec<u32>> {
    let owned;
    let idx: &[u64] = match indices {
        IndexSet::Prefix(len) => {
            owned = (0..len).collect::<Vec<u64>>();
            &owned
        }
        IndexSet::Sparse(v) => {
            if v.windows(2).any(|w| w[0] >= w[1]) {
                return pre("sparse indices must be strictly increasing");
            }
            v
        }
    };
    match model {
        ProcessModel::BaseM { m } => Ok(idx.iter().map(|&i| base_m_digit(*m, key, i)).collect()),
        ProcessModel::FiniteMarkov(mm) => {
            let mut out = Vec::with_capacity(idx.len());
            let mut state = 0usize;
            let mut prev: Option<u64> = None;
            let mut last_gap = 0u64;
            let mut gap_rows: Vec<Vec<f64>> = Vec::new();
            for &i in idx {
                let u = uniform_at(key, i);
                state = match prev {
                    None => sample_discrete(&mm.pi, u),
                    Some(p) => {
                        let gap = i - p;
                        if gap != last_gap || gap_rows.is_empty() {
                            gap_rows = mm.power(gap);
                            last_gap = gap;
                        }
                        sample_discrete(&gap_rows[state], u)
                    }
                };
                prev = Some(i);
                out.push(mm.state_symbol[state]);
            }
            Ok(out)
        }
        ProcessModel::ContinuedFraction { digit_cap } => {
            let is_prefix = idx.iter().enumerate().all(|(t, &i)| t as u64 == i);
            if !is_prefix {
                return Err(Error::Unsupported(
                    "continued-fraction digits support prefix generation only".into(),
                ));
            }
            let len = idx.len() as u64;
            if len > CF_MAX_PREFIX {
                return Err(Error::Unsupported(format!(
                    "continued-fraction prefix {len} exceeds the supported {CF_MAX_PREFIX}"
                )));
            }
            if len == 0 {
                return Ok(Vec::new());
            }
            let digits = cf_digits(len as usize, key)?;
            Ok(digits
                .into_iter()
                .map(|a| (a.min(*digit_cap as u64) - 1) as u32)
                .collect())
        }
    }
}

/// Symbols at arbitrary indices (any order, repeats allowed).
pub fn generate_at(model: &ProcessModel, indices: &[u64], key: RngKey) -> Result<Vec<u32>> {
    if let ProcessModel::BaseM { m } = model {
        return Ok(indices.iter().map(|&i| base_m_digit(*m, key, i)).collect());
    }
    let mut distinct = indices.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let symbols = match model {
        ProcessModel::ContinuedFraction { .. } => {
            let len = distinct.last().map_or(0, |&i| i + 1);
            let prefix = generate(model, IndexSet::Prefix(len), key)?;
            distinct.iter().map(|&i| prefix[i as usize]).collect()
        }
        _ => generate(model, IndexSet::Sparse(&distinct), key)?,
    };
    Ok(indices
        .iter()
        .map(|i| symbols[distinct.binary_search(i).unwrap()])
        .collect())
}

// ---------------------------------------------------------------------------
// Continued fractions
// ---------------------------------------------------------------------------

/// Largest precision (bits) attempted before giving up.
pub const CF_MAX_BITS: u64 = 1 << 20;

/// Word offset separating rejection trials inside one stream.
const TRIAL_STRIDE: u128 = 1 << 40;

/// Lazily extended uniform bit string `0.b_1 b_2 ...`.
struct BitStream {
    rng: ChaCha8Rng,
    value: BigUint,
    bits: u64,
}

impl BitStream {
    fn new(key: RngKey, word_offset: u128) -> Self {
        let mut rng = key.rng();
        rng.set_word_pos(word_offset);
        Self {
            rng,
            value: BigUint::zero(),
            bits: 0,
        }
    }

    /// First `bits` bits as an integer (`bits` a multiple of 32).
    fn prefix(&mut self, bits: u64) -> BigUint {
        while self.bits < bits {
            self.value = (&self.value << 32u32) + BigUint::from(self.rng.next_u32());
            self.bits += 32;
        }
        &self.value >> (self.bits - bits)
    }
}

fn round_bits(b: u64) -> u64 {
    b.div_ceil(32) * 32
}

/// Draws the bits of a Gauss-distributed point: `x` uniform, accepted with
/// probability `1 / (1 + x)`, the comparison refined until decided.
fn gauss_point(key: RngKey) -> BitStream {
    for trial in 0u128.. {
        let base = trial * TRIAL_STRIDE;
        let mut xs = BitStream::new(key, base);
        let mut vs = BitStream::new(key, base + TRIAL_STRIDE / 2);
        let mut b = 64u64;
        loop {
            let x = xs.prefix(b);
            let v = vs.prefix(b);
            let one = BigUint::one() << b;
            let full = BigUint::one() << (2 * b);
            // Accept surely: (v + 1)(2^b + x + 1) <= 2^{2b}.
            if (&v + 1u32) * (&one + &x + 1u32) <= full {
                return xs;
            }
            // Reject surely: v (2^b + x) >= 2^{2b}.
            if &v * (&one + &x) >= full {
                break;
            }
            b *= 2;
        }
    }
    unreachable!("rejection loop always terminates with probability one")
}

/// First `count` continued-fraction digits of a Gauss-distributed point.
pub fn cf_digits(count: usize, key: RngKey) -> Result<Vec<u64>> {
    let mut bits = 8 * count as u64 + 64;
    loop {
        match cf_digits_with_bits(count, key, bits)? {
            Some(d) => return Ok(d),
            None => {
                bits *= 2;
                if bits > CF_MAX_BITS.max(4 * (8 * count as u64 + 64)) {
                    return Err(Error::Numerical(format!(
                        "continued-fraction digits not certified at {bits} bits"
                    )));
                }
            }
        }
    }
}

/// Digits certified from the first `bits` bits of the sampled point, or
/// `None` when that precision cannot resolve all of them.
pub fn cf_digits_with_bits(count: usize, key: RngKey, bits: u64) -> Result<Option<Vec<u64>>> {
    if count == 0 {
        return pre("count must be positive");
    }
    let bits = round_bits(bits);
    let mut stream = gauss_point(key);
    let x = stream.prefix(bits);
    let den = BigUint::one() << bits;
    // x lies in the open interval (lo, hi) = (x / 2^B, (x + 1) / 2^B).
    let (mut lo_n, mut lo_d) = (x.clone(), den.clone());
    let (mut hi_n, mut hi_d) = (x + 1u32, den);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        if lo_n.is_zero() {
            return Ok(None);
        }
        // 1/x lies in (hi_d / hi_n, lo_d / lo_n); its floor must be constant there.
        let a = &hi_d / &hi_n;
        let upper = &a + 1u32;
        // Need lo_d / lo_n <= a + 1.
        if lo_d > &upper * &lo_n {
            return Ok(None);
        }
        if a.is_zero() {
            return Ok(None);
        }
        let digit = a
            .to_u64()
            .ok_or_else(|| Error::Numerical("continued-fraction digit exceeds 64 bits".into()))?;
        out.push(digit);
        // T maps (lo, hi) onto (1/hi - a, 1/lo - a).
        let new_lo = (&hi_d - &a * &hi_n, hi_n);
        let new_hi = (&lo_d - &a * &lo_n, lo_n);
        (lo_n, lo_d) = new_lo;
        (hi_n, hi_d) = new_hi;
    }
    Ok(Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::rat;

    fn two_state(stay: f64) -> MarkovModel {
        build_markov(
            Matrix::Float(vec![vec![stay, 1.0 - stay], vec![1.0 - stay, stay]]),
            vec![0.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn two_state_profile() {
        let mm = build_markov(
            Matrix::Exact(vec![vec![rat(9, 10), rat(1, 10)], vec![rat(1, 10), rat(9, 10)]]),
            vec![0.0, 1.0],
        )
        .unwrap();
        assert_eq!(mm.pi_exact, Some(vec![rat(1, 2), rat(1, 2)]));
        assert!((mm.dobrushin - 0.8).abs() < 1e-15);
        assert_eq!((mm.profile.c, mm.dobrushin_steps), (2.0, 1));
        assert!((mm.profile.phi_raw(3) - 2.0 * 0.512).abs() < 1e-12);
        assert!((mm.profile.phi(10) - 2.0 * 0.8f64.powi(10)).abs() < 1e-12);
    }

    #[test]
    fn iid_rows_and_bad_chains() {
        let mm = build_markov(
            Matrix::Float(vec![vec![0.3, 0.7], vec![0.3, 0.7]]),
            vec![0.0, 1.0],
        )
        .unwrap();
        assert_eq!(mm.dobrushin, 0.0);
        assert_eq!(mm.profile.phi(1), 0.0);
        assert!((mm.pi[0] - 0.3).abs() < 1e-15);
        let reducible = Matrix::Float(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(build_markov(reducible, vec![0.0, 1.0]).is_err());
        let periodic = Matrix::Float(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(build_markov(periodic, vec![0.0, 1.0]).is_err());
        let bad = Matrix::Float(vec![vec![0.5, 0.6], vec![0.5, 0.5]]);
        assert!(build_markov(bad, vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn multi_step_contraction() {
        // Rows 0 and 1 have disjoint supports, so one step does not contract.
        let p = Matrix::Float(vec![
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.5, 0.5, 0.0],
        ]);
        let mm = build_markov(p, vec![0.0, 1.0, 2.0]).unwrap();
        assert!(mm.dobrushin_steps > 1);
        for n in 1..20u64 {
            assert!(dobrushin(&mm.power(n)) <= mm.profile.phi_raw(n) + 1e-12);
        }
    }

    #[test]
    fn joint_law_marginals() {
        let model = ProcessModel::FiniteMarkov(Arc::new(two_state(0.9)));
        let j = model.joint_law(3).unwrap();
        let row0: f64 = j.table[0].iter().sum();
        let col1: f64 = j.table.iter().map(|r| r[1]).sum();
        assert!((row0 - 0.5).abs() < 1e-15 && (col1 - 0.5).abs() < 1e-15);
        let j0 = model.joint_law(0).unwrap();
        assert_eq!(j0.table[0][1], 0.0);
    }

    #[test]
    fn base_m_sparse_matches_prefix() {
        let model = ProcessModel::base_m(2).unwrap();
        let key = RngKey::new(7, 3);
        let prefix = generate(&model, IndexSet::Prefix(10), key).unwrap();
        let sparse = generate(&model, IndexSet::Sparse(&[5, 1_000_000_000]), key).unwrap();
        assert_eq!(prefix[5], sparse[0]);
        let big = generate(&model, IndexSet::Prefix(100_000), key).unwrap();
        let freq = big.iter().filter(|&&d| d == 1).count() as f64 / 1e5;
        assert!((freq - 0.5).abs() <= 3.0 / 1e5f64.sqrt());
    }

    #[test]
    fn markov_transition_frequencies() {
        let model = ProcessModel::FiniteMarkov(Arc::new(two_state(0.9)));
        let n = 200_000u64;
        let seq = generate(&model, IndexSet::Prefix(n), RngKey::new(1, 0)).unwrap();
        let (mut stay, mut from0) = (0u64, 0u64);
        for w in seq.windows(2) {
            if w[0] == 0 {
                from0 += 1;
                if w[1] == 0 {
                    stay += 1;
                }
            }
        }
        let phat = stay as f64 / from0 as f64;
        // Transitions are Markov dependent; the binomial SE is the right scale.
        let se = (0.9 * 0.1 / from0 as f64).sqrt();
        assert!((phat - 0.9).abs() <= 3.0 * se, "{phat}");
    }

    #[test]
    fn markov_sparse_gap_law() {
        // P(Y_0 = Y_g) at gap g = 5 equals (1 + 0.8^5) / 2.
        let model = ProcessModel::FiniteMarkov(Arc::new(two_state(0.9)));
        let reps = 20_000u64;
        let same = (0..reps)
            .filter(|&r| {
                let s = generate(&model, IndexSet::Sparse(&[10, 15]), RngKey::new(5, r)).unwrap();
                s[0] == s[1]
            })
            .count() as f64
            / reps as f64;
        let want = (1.0 + 0.8f64.powi(5)) / 2.0;
        assert!((same - want).abs() <= 3.0 * (want * (1.0 - want) / reps as f64).sqrt());
    }

    #[test]
    fn cf_precision_doubling_is_invariant() {
        for s in 0..20 {
            let key = RngKey::new(11, s);
            let a = cf_digits_with_bits(50, key, 8 * 50 + 64).unwrap().unwrap();
            let b = cf_digits_with_bits(50, key, 2 * (8 * 50 + 64)).unwrap().unwrap();
            assert_eq!(a, b);
            assert_eq!(cf_digits(50, key).unwrap(), a);
        }
        // Too little precision is reported, not guessed.
        assert!(cf_digits_with_bits(200, RngKey::new(1, 1), 64).unwrap().is_none());
    }

    #[test]
    fn cf_first_digit_law() {
        let reps = 4000u64;
        let ones = (0..reps)
            .filter(|&r| cf_digits(1, RngKey::new(3, r)).unwrap()[0] == 1)
            .count() as f64
            / reps as f64;
        let p1 = gauss_digit_prob(1);
        assert!((p1 - (4.0f64 / 3.0).log2()).abs() < 1e-15);
        assert!((ones - p1).abs() < 3.0 * (p1 * (1.0 - p1) / reps as f64).sqrt());
        let model = ProcessModel::continued_fraction(5).unwrap();
        assert!((model.marginal().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(generate(&model, IndexSet::Sparse(&[3, 9]), RngKey::new(0, 0)).is_err());
    }

    #[test]
    fn tuple_law_sums_to_one() {
        let model = ProcessModel::FiniteMarkov(Arc::new(two_state(0.9)));
        let law = model.tuple_law(&[4, 1, 4, 9]).unwrap();
        let total: f64 = law.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(law.iter().all(|(s, _)| s[0] == s[2]));
    }
}
