//! Observables `F`, their decomposition along an ordering `eps`, the
//! nonconventional sums `S_N(t)` and the recurrence counter `M(N)`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::classify::PolyFamily;
use crate::error::{pre, Error, Result};
use crate::process::{generate_at, ProcessModel, RngKey, CF_MAX_PREFIX};

/// Dense real array over `sizes[0] x ... x sizes[l-1]`, last coordinate fastest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TensorTable {
    sizes: Vec<usize>,
    values: Vec<f64>,
}

impl TensorTable {
    pub fn new(sizes: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if sizes.contains(&0) {
            return Err(Error::InvalidModel("alphabet sizes must be positive".into()));
        }
        let len: usize = sizes.iter().product();
        if values.len() != len {
            return Err(Error::InvalidModel(format!(
                "table has {} entries, expected {len}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("table entries must be finite".into()));
        }
        Ok(Self { sizes, values })
    }

    /// `F(x) = f(x)` cell by cell.
    pub fn from_fn(sizes: Vec<usize>, mut f: impl FnMut(&[u32]) -> f64) -> Result<Self> {
        let len: usize = sizes.iter().product();
        let mut values = Vec::with_capacity(len);
        let mut cell = vec![0u32; sizes.len()];
        for _ in 0..len {
            values.push(f(&cell));
            increment(&mut cell, &sizes);
        }
        Self::new(sizes, values)
    }

    pub fn constant(sizes: Vec<usize>, c: f64) -> Result<Self> {
        let len = sizes.iter().product();
        Self::new(sizes, vec![c; len])
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn arity(&self) -> usize {
        self.sizes.len()
    }

    fn offset(&self, x: &[u32]) -> usize {
        x.iter()
            .zip(&self.sizes)
            .fold(0usize, |acc, (&xi, &s)| acc * s + xi as usize)
    }

    pub fn get(&self, x: &[u32]) -> f64 {
        self.values[self.offset(x)]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Integrates out the last coordinate against `mu`.
    fn integrate_last(&self, mu: &[f64]) -> TensorTable {
        let s = *self.sizes.last().expect("arity at least one");
        let values = self
            .values
            .chunks(s)
            .map(|c| c.iter().zip(mu).map(|(v, p)| v * p).sum())
            .collect();
        TensorTable {
            sizes: self.sizes[..self.sizes.len() - 1].to_vec(),
            values,
        }
    }

    /// `G(z_1..z_l) = F(x)` with `x_{eps(k)} = z_k`.
    fn permuted(&self, eps: &[usize]) -> TensorTable {
        let sizes: Vec<usize> = eps.iter().map(|&e| self.sizes[e]).collect();
        let mut x = vec![0u32; eps.len()];
        TensorTable::from_fn(sizes, |z| {
            for (k, &e) in eps.iter().enumerate() {
                x[e] = z[k];
            }
            self.get(&x)
        })
        .expect("permutation preserves shape")
    }

    /// `H(z_1..z_l) = self(z_1..z_j)` for the first `j = self.arity()` coordinates.
    fn extend_to(&self, sizes: &[usize]) -> TensorTable {
        let j = self.arity();
        TensorTable::from_fn(sizes.to_vec(), |z| self.get(&z[..j])).expect("shape is valid")
    }

    fn sub(&self, o: &TensorTable) -> TensorTable {
        TensorTable {
            sizes: self.sizes.clone(),
            values: self.values.iter().zip(&o.values).map(|(a, b)| a - b).collect(),
        }
    }
}

fn increment(cell: &mut [u32], sizes: &[usize]) {
    for k in (0..cell.len()).rev() {
        cell[k] += 1;
        if (cell[k] as usize) < sizes[k] {
            return;
        }
        cell[k] = 0;
    }
}

pub type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Observable given by a function of the symbol values.  `(k, iota, kappa)`
/// are the declared constants of the growth and regularity bounds.
#[derive(Clone)]
pub struct BlackBox {
    pub arity: usize,
    pub eval: Evaluator,
    pub k: f64,
    pub iota: f64,
    pub kappa: f64,
}

impl fmt::Debug for BlackBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlackBox")
            .field("arity", &self.arity)
            .field("k", &self.k)
            .field("iota", &self.iota)
            .field("kappa", &self.kappa)
            .finish()
    }
}

#[derive(Clone, Debug)]
pub enum Observable {
    TensorTable(TensorTable),
    BlackBox(BlackBox),
}

impl Observable {
    /// `prod_j 1[x_j in targets[j]]` on a common alphabet.
    pub fn indicator_product(alphabet: usize, targets: &[Vec<u32>]) -> Result<Self> {
        if targets.is_empty() {
            return pre("at least one target set is required");
        }
        if targets.iter().flatten().any(|&a| a as usize >= alphabet) {
            return Err(Error::InvalidModel("target symbol outside the alphabet".into()));
        }
        let sizes = vec![alphabet; targets.len()];
        let t = TensorTable::from_fn(sizes, |x| {
            let hit = x.iter().zip(targets).all(|(xi, a)| a.contains(xi));
            if hit {
                1.0
            } else {
                0.0
            }
        })?;
        Ok(Observable::TensorTable(t))
    }

    pub fn black_box(arity: usize, eval: Evaluator, k: f64, iota: f64, kappa: f64) -> Result<Self> {
        if arity == 0 || !(k >= 0.0) || !(iota >= 0.0) || !(kappa > 0.0 && kappa <= 1.0) {
            return Err(Error::InvalidModel(
                "black box needs arity >= 1, K >= 0, iota >= 0 and kappa in (0, 1]".into(),
            ));
        }
        Ok(Observable::BlackBox(BlackBox {
            arity,
            eval,
            k,
            iota,
            kappa,
        }))
    }

    pub fn arity(&self) -> usize {
        match self {
            Observable::TensorTable(t) => t.arity(),
            Observable::BlackBox(b) => b.arity,
        }
    }

    pub fn table(&self) -> Option<&TensorTable> {
        match self {
            Observable::TensorTable(t) => Some(t),
            Observable::BlackBox(_) => None,
        }
    }

    /// `||F||_inf` when known.
    pub fn sup_norm(&self) -> Option<f64> {
        match self {
            Observable::TensorTable(t) => Some(t.sup_norm()),
            Observable::BlackBox(b) if b.iota == 0.0 => Some(b.k),
            Observable::BlackBox(_) => None,
        }
    }

    /// `F - c`.
    pub fn shifted(&self, c: f64) -> Observable {
        match self {
            Observable::TensorTable(t) => Observable::TensorTable(TensorTable {
                sizes: t.sizes.clone(),
                values: t.values.iter().map(|v| v - c).collect(),
            }),
            Observable::BlackBox(b) => {
                let inner = b.eval.clone();
                Observable::BlackBox(BlackBox {
                    eval: Arc::new(move |x| inner(x) - c),
                    k: b.k + c.abs(),
                    ..b.clone()
                })
            }
        }
    }

    /// `F - bar_F` for tables.
    pub fn centered(&self, mu: &[f64]) -> Result<Observable> {
        Ok(self.shifted(bar_f(self, mu)?))
    }

    /// `F` at the given symbols.
    pub fn eval(&self, model: &ProcessModel, symbols: &[u32]) -> f64 {
        match self {
            Observable::TensorTable(t) => t.get(symbols),
            Observable::BlackBox(b) => {
                let x: Vec<f64> = symbols.iter().map(|&s| model.symbol_value(s)).collect();
                (b.eval)(&x)
            }
        }
    }

    fn check_model(&self, model: &ProcessModel, ell: usize) -> Result<()> {
        if self.arity() != ell {
            return Err(Error::InvalidModel(format!(
                "observable arity {} does not match family size {ell}",
                self.arity()
            )));
        }
        if let Observable::TensorTable(t) = self {
            let a = model.alphabet_size();
            if t.sizes.iter().any(|&s| s != a) {
                return Err(Error::InvalidModel(format!(
                    "table alphabet sizes {:?} do not match the model alphabet {a}",
                    t.sizes
                )));
            }
        }
        Ok(())
    }
}

/// `int F d mu^l`.
pub fn bar_f(obs: &Observable, mu: &[f64]) -> Result<f64> {
    let t = obs.table().ok_or_else(|| {
        Error::Unsupported("exact integrals need a tensor-table observable".into())
    })?;
    check_mu(t, mu)?;
    let mut cur = t.clone();
    while cur.arity() > 0 {
        cur = cur.integrate_last(mu);
    }
    Ok(cur.values[0])
}

fn check_mu(t: &TensorTable, mu: &[f64]) -> Result<()> {
    if t.sizes.iter().any(|&s| s != mu.len()) {
        return Err(Error::InvalidModel("law does not match the table alphabet".into()));
    }
    if mu.iter().any(|&p| !(p >= 0.0)) || (mu.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidModel("law is not a probability vector".into()));
    }
    Ok(())
}

/// Parts `F_{eps,1}, ..., F_{eps,l}`; part `j` is a table in
/// `(x_{eps(1)}, ..., x_{eps(j)})`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    pub perm: Vec<usize>,
    pub bar_f: f64,
    pub parts: Vec<TensorTable>,
}

impl Decomposition {
    /// `F_{eps,j}` (1-based `j`) at the full argument `x` in original order.
    pub fn eval_part(&self, j: usize, x: &[u32]) -> f64 {
        let z: Vec<u32> = self.perm[..j].iter().map(|&e| x[e]).collect();
        self.parts[j - 1].get(&z)
    }
}

const DECOMP_TOL: f64 = 1e-12;

pub fn decompose_f(obs: &Observable, mu: &[f64], perm: &[usize]) -> Result<Decomposition> {
    let t = obs.table().ok_or_else(|| {
        Error::Unsupported("decomposition needs a tensor-table observable".into())
    })?;
    check_mu(t, mu)?;
    let ell = t.arity();
    let mut sorted = perm.to_vec();
    sorted.sort_unstable();
    if sorted != (0..ell).collect::<Vec<_>>() {
        return pre("perm must be a permutation of 0..l");
    }
    let g = t.permuted(perm);
    // marg[j] = int G d mu(z_{j+1}..z_l), a table in z_1..z_j.
    let mut marg = vec![g.clone()];
    for _ in 0..ell {
        let next = marg.last().unwrap().integrate_last(mu);
        marg.push(next);
    }
    marg.reverse();
    let bar = marg[0].values[0];
    let parts: Vec<TensorTable> = (1..=ell)
        .map(|j| marg[j].sub(&marg[j - 1].extend_to(&marg[j].sizes)))
        .collect();
    let scale = t.sup_norm().max(1.0);
    for p in &parts {
        let last = p.integrate_last(mu);
        if last.values.iter().any(|v| v.abs() > DECOMP_TOL * scale) {
            return Err(Error::Numerical("decomposition part has a nonzero last marginal".into()));
        }
    }
    let mut total = TensorTable::constant(g.sizes.clone(), 0.0)?;
    for p in &parts {
        let e = p.extend_to(&g.sizes);
        for (a, b) in total.values.iter_mut().zip(&e.values) {
            *a += b;
        }
    }
    for (tv, gv) in total.values.iter().zip(&g.values) {
        if (tv - (gv - bar)).abs() > DECOMP_TOL * scale {
            return Err(Error::Numerical("decomposition does not telescope".into()));
        }
    }
    Ok(Decomposition {
        perm: perm.to_vec(),
        bar_f: bar,
        parts,
    })
}

/// Outcome of the moment and mixing-rate gates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssumptionCheck {
    pub moment_ok: bool,
    pub clt_ok: bool,
    pub reasons: Vec<String>,
}

/// `moment_ok` iff `w > 4` and `1/w > iota/v + kappa/q`; `clt_ok` iff
/// `theta > 4w/(w-2)`.
pub fn check_assumptions(
    w: f64,
    q: f64,
    v: f64,
    iota: f64,
    kappa: f64,
    theta: f64,
) -> Result<AssumptionCheck> {
    if !(w > 0.0 && q > 0.0 && v > 0.0 && theta > 0.0 && iota >= 0.0 && kappa > 0.0) {
        return pre("w, q, v, kappa and theta must be positive and iota nonnegative");
    }
    let mut reasons = Vec::new();
    if w <= 4.0 {
        reasons.push(format!("w = {w} must exceed 4"));
    }
    if 1.0 / w <= iota / v + kappa / q {
        reasons.push(format!(
            "1/w = {} does not exceed iota/v + kappa/q = {}",
            1.0 / w,
            iota / v + kappa / q
        ));
    }
    let moment_ok = reasons.is_empty();
    let threshold = 4.0 * w / (w - 2.0);
    let clt_ok = w > 2.0 && theta > threshold;
    if !clt_ok {
        reasons.push(format!("theta = {theta} must exceed 4w/(w-2) = {threshold}"));
    }
    Ok(AssumptionCheck {
        moment_ok,
        clt_ok,
        reasons,
    })
}

/// Sequence indices `q_i(n, N)` for `n = 1..=N`, flattened `n`-major, and
/// the required sequence length `1 + max q_i(n, N)`.
pub fn index_table(family: &PolyFamily, big_n: u64) -> Result<(Vec<u64>, u64)> {
    if big_n == 0 {
        return pre("N must be positive");
    }
    let ell = family.len();
    let mut out = Vec::with_capacity(big_n as usize * ell);
    let mut max = 0u64;
    for n in 1..=big_n {
        for q in family.members() {
            let v = q
                .eval_i128(n as i128, big_n as i128)
                .and_then(|v| u64::try_from(v).ok())
                .ok_or_else(|| Error::Unsupported(format!("index {q} at n = {n} exceeds 64 bits")))?;
            max = max.max(v);
            out.push(v);
        }
    }
    Ok((out, max + 1))
}

fn check_capability(model: &ProcessModel, required_len: u64) -> Result<()> {
    if let ProcessModel::ContinuedFraction { .. } = model {
        if required_len > CF_MAX_PREFIX {
            return Err(Error::Unsupported(format!(
                "continued-fraction digits need a prefix of length {required_len}, above the supported {CF_MAX_PREFIX}"
            )));
        }
    }
    Ok(())
}

/// Symbol tuples `Xi_{n,N}` for `n = 1..=N`, flattened, plus the required length.
pub fn sample_tuples(
    family: &PolyFamily,
    model: &ProcessModel,
    big_n: u64,
    key: RngKey,
) -> Result<(Vec<u32>, u64)> {
    let (idx, required) = index_table(family, big_n)?;
    check_capability(model, required)?;
    Ok((generate_at(model, &idx, key)?, required))
}

/// `F(Xi_{n,N})` for `n = 1..=N`.
pub fn summands(
    family: &PolyFamily,
    obs: &Observable,
    model: &ProcessModel,
    big_n: u64,
    key: RngKey,
) -> Result<(Vec<f64>, u64)> {
    let ell = family.len();
    obs.check_model(model, ell)?;
    let (sym, required) = sample_tuples(family, model, big_n, key)?;
    Ok((sym.chunks(ell).map(|x| obs.eval(model, x)).collect(), required))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathSample {
    #[serde(rename = "N")]
    pub n_max: u64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub required_len: u64,
    pub seed: RngKey,
}

/// `floor(N t)` clamped to `[0, N]`.
pub fn grid_index(big_n: u64, t: f64) -> usize {
    ((big_n as f64 * t).floor().max(0.0) as u64).min(big_n) as usize
}

/// `N^{-1/2} sum_{n <= [N t]} x_n` at each grid point.
pub fn path_from_summands(x: &[f64], grid: &[f64]) -> Vec<f64> {
    let big_n = x.len() as u64;
    let scale = (big_n as f64).sqrt().recip();
    let mut cum = Vec::with_capacity(x.len() + 1);
    let mut acc = 0.0;
    cum.push(0.0);
    for v in x {
        acc += v;
        cum.push(acc);
    }
    grid.iter()
        .map(|&t| cum[grid_index(big_n, t)] * scale)
        .collect()
}

pub fn compute_path(
    family: &PolyFamily,
    obs: &Observable,
    model: &ProcessModel,
    big_n: u64,
    grid: &[f64],
    key: RngKey,
) -> Result<PathSample> {
    if grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return pre("grid points must lie in [0, 1]");
    }
    let (x, required_len) = summands(family, obs, model, big_n, key)?;
    Ok(PathSample {
        n_max: big_n,
        grid: grid.to_vec(),
        values: path_from_summands(&x, grid),
        required_len,
        seed: key,
    })
}

fn check_targets(model: &ProcessModel, family: &PolyFamily, targets: &[Vec<u32>]) -> Result<()> {
    if targets.len() != family.len() {
        return pre("one target set per family member is required");
    }
    let a = model.alphabet_size() as u32;
    if targets.iter().flatten().any(|&s| s >= a) {
        return Err(Error::InvalidModel("target symbol outside the alphabet".into()));
    }
    Ok(())
}

/// `M(N) = sum_{n <= N} prod_j 1[xi_{q_j(n,N)} in A_j]`.
pub fn count_recurrences(
    family: &PolyFamily,
    model: &ProcessModel,
    big_n: u64,
    targets: &[Vec<u32>],
    key: RngKey,
) -> Result<u64> {
    check_targets(model, family, targets)?;
    let (sym, _) = sample_tuples(family, model, big_n, key)?;
    Ok(count_hits(&sym, family.len(), targets))
}

/// `M(N)` over a given sequence `seq[k] = xi_k`.
pub fn count_in_sequence(
    family: &PolyFamily,
    big_n: u64,
    targets: &[Vec<u32>],
    seq: &[u32],
) -> Result<u64> {
    if targets.len() != family.len() {
        return pre("one target set per family member is required");
    }
    let (idx, required) = index_table(family, big_n)?;
    if required > seq.len() as u64 {
        return pre(format!("sequence of length {} is shorter than {required}", seq.len()));
    }
    let sym: Vec<u32> = idx.iter().map(|&i| seq[i as usize]).collect();
    Ok(count_hits(&sym, family.len(), targets))
}

fn count_hits(sym: &[u32], ell: usize, targets: &[Vec<u32>]) -> u64 {
    sym.chunks(ell)
        .filter(|x| x.iter().zip(targets).all(|(s, a)| a.contains(s)))
        .count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{build_markov, Matrix};
    use proptest::prelude::*;

    fn fam(s: &str) -> PolyFamily {
        PolyFamily::parse(s).unwrap()
    }

    #[test]
    fn check_assumptions_examples() {
        assert!(check_assumptions(8.0, 100.0, 1.0, 0.0, 1.0, 6.0).unwrap().moment_ok);
        let c = check_assumptions(8.0, 100.0, 1.0, 0.0, 1.0, 6.0).unwrap();
        assert!(c.clt_ok);
        assert!(!check_assumptions(8.0, 100.0, 1.0, 0.0, 1.0, 5.0).unwrap().clt_ok);
        assert!(!check_assumptions(4.0, 100.0, 1.0, 2.0, 1.0, 6.0).unwrap().moment_ok);
    }

    #[test]
    fn bar_f_examples() {
        let f = Observable::indicator_product(2, &[vec![1], vec![1]]).unwrap();
        assert_eq!(bar_f(&f, &[0.5, 0.5]).unwrap(), 0.25);
        let c = Observable::TensorTable(TensorTable::constant(vec![3, 3], 1.5).unwrap());
        assert_eq!(bar_f(&c, &[0.2, 0.3, 0.5]).unwrap(), 1.5);
        let mm = build_markov(
            Matrix::Float(vec![vec![0.9, 0.1], vec![0.1, 0.9]]),
            vec![0.0, 1.0],
        )
        .unwrap();
        let model = ProcessModel::FiniteMarkov(Arc::new(mm));
        let prod = Observable::TensorTable(
            TensorTable::from_fn(vec![2, 2], |x| (x[0] * x[1]) as f64).unwrap(),
        );
        assert!((bar_f(&prod, &model.marginal()).unwrap() - 0.25).abs() < 1e-15);
        let centered = prod.centered(&model.marginal()).unwrap();
        assert!(bar_f(&centered, &model.marginal()).unwrap().abs() <= 1e-15);
    }

    #[test]
    fn decomposition_example() {
        let f = Observable::indicator_product(2, &[vec![1], vec![1]]).unwrap();
        let d = decompose_f(&f, &[0.5, 0.5], &[0, 1]).unwrap();
        assert_eq!(d.parts[0].values(), &[-0.25, 0.25]);
        // F_2 = F - 1/4 - F_1.
        for x0 in 0..2u32 {
            for x1 in 0..2u32 {
                let fv = f.table().unwrap().get(&[x0, x1]);
                assert_eq!(d.eval_part(2, &[x0, x1]), fv - 0.25 - d.eval_part(1, &[x0, x1]));
            }
        }
        let c = Observable::TensorTable(TensorTable::constant(vec![2, 2], 3.0).unwrap());
        let d = decompose_f(&c, &[0.5, 0.5], &[1, 0]).unwrap();
        assert!(d.parts.iter().all(|p| p.values().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn path_basics() {
        let model = ProcessModel::base_m(2).unwrap();
        let family = fam("n, n+N, n^2");
        let one = Observable::TensorTable(TensorTable::constant(vec![2, 2, 2], 1.0).unwrap());
        let key = RngKey::new(9, 0);
        let p = compute_path(&family, &one, &model, 400, &[0.0, 1.0], key).unwrap();
        assert_eq!(p.values, vec![0.0, 20.0]);
        assert_eq!(p.required_len, 400 * 400 + 1);
        let f = Observable::indicator_product(2, &[vec![1], vec![1], vec![0]]).unwrap();
        let coarse = compute_path(&family, &f, &model, 400, &[0.0, 0.5, 1.0], key).unwrap();
        let fine = compute_path(&family, &f, &model, 400, &[0.0, 0.25, 0.5, 0.75, 1.0], key).unwrap();
        assert_eq!(coarse.values, vec![fine.values[0], fine.values[2], fine.values[4]]);
    }

    #[test]
    fn recurrence_examples() {
        let seq = [0, 1, 0, 1, 1, 0, 1, 0, 0];
        assert_eq!(count_in_sequence(&fam("n"), 8, &[vec![1]], &seq).unwrap(), 4);
        let model = ProcessModel::base_m(3).unwrap();
        let family = fam("n, n^2+N");
        let full = vec![vec![0, 1, 2], vec![0, 1, 2]];
        assert_eq!(count_recurrences(&family, &model, 60, &full, RngKey::new(1, 1)).unwrap(), 60);
    }

    #[test]
    fn recurrence_matches_path_and_brute_force() {
        let model = ProcessModel::base_m(2).unwrap();
        let family = fam("n, 2n+N, n^2");
        let targets = vec![vec![1], vec![0], vec![1]];
        let key = RngKey::new(4, 2);
        let m = count_recurrences(&family, &model, 50, &targets, key).unwrap();
        let f = Observable::indicator_product(2, &targets).unwrap();
        let p = compute_path(&family, &f, &model, 50, &[1.0], key).unwrap();
        assert_eq!((p.values[0] * 50f64.sqrt()).round() as u64, m);
        // Independent scan: generate the whole prefix and count directly.
        let seq = crate::process::generate(
            &model,
            crate::process::IndexSet::Prefix(50 * 50 + 1),
            key,
        )
        .unwrap();
        let brute = (1..=50u64)
            .filter(|&n| seq[n as usize] == 1 && seq[(2 * n + 50) as usize] == 0 && seq[(n * n) as usize] == 1)
            .count() as u64;
        assert_eq!(m, brute);
    }

    #[test]
    fn cf_capability_error() {
        let model = ProcessModel::continued_fraction(4).unwrap();
        let f = Observable::indicator_product(4, &[vec![0], vec![0]]).unwrap();
        assert!(compute_path(&fam("n, n^2"), &f, &model, 1000, &[1.0], RngKey::new(0, 0)).is_err());
    }

    fn table_strategy() -> impl Strategy<Value = (usize, Vec<usize>, Vec<f64>, Vec<f64>)> {
        (1usize..=4, 2usize..=5).prop_flat_map(|(ell, a)| {
            let len = a.pow(ell as u32);
            (
                Just(ell),
                Just(a).prop_flat_map(move |a| Just((0..a).collect::<Vec<_>>())),
                prop::collection::vec(-8i32..8, len).prop_map(|v| v.into_iter().map(|x| x as f64 / 4.0).collect()),
                prop::collection::vec(1u32..10, a).prop_map(|w| {
                    let s: u32 = w.iter().sum();
                    w.iter().map(|&x| x as f64 / s as f64).collect()
                }),
            )
        })
    }

    proptest! {
        #[test]
        fn decomposition_invariants((ell, alph, vals, mu) in table_strategy(), seed in 0u64..1000) {
            let a = alph.len();
            let t = TensorTable::new(vec![a; ell], vals).unwrap();
            let obs = Observable::TensorTable(t.clone());
            let mut perm: Vec<usize> = (0..ell).collect();
            // Deterministic shuffle from the seed.
            let mut s = seed;
            for i in (1..ell).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (s >> 33) as usize % (i + 1));
            }
            let d = decompose_f(&obs, &mu, &perm).unwrap();
            let bar = bar_f(&obs, &mu).unwrap();
            prop_assert!((d.bar_f - bar).abs() < 1e-12);
            let mut cell = vec![0u32; ell];
            for _ in 0..t.values().len() {
                let total: f64 = (1..=ell).map(|j| d.eval_part(j, &cell)).sum();
                prop_assert!((total - (t.get(&cell) - bar)).abs() < 1e-12);
                increment(&mut cell, t.sizes());
            }
        }
    }
}
