//! Taxonomy of polynomial pairs: linear relations, Q-equivalence, structure
//! functions, the exact difference identity, lower bounds for the difference,
//! the perfect-power sieve and empirical certificates of exploding
//! differences.
//!
//! Throughout, `q` is evaluated at the `m` side and `p` at the `n` side, so
//! the difference under study is `q_N(m) - p_N(n)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{pre, Error, Result};
use crate::polyalg::{
    compose_affine, hom_decompose, rat_int, rat_to_f64, rational_root, BivariatePoly,
    HomDecomposition, Rat, RationalFunction, UniPoly,
};

pub(crate) fn ser_rat<S: Serializer>(x: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

fn ser_opt_rat<S: Serializer>(x: &Option<Rat>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_some(&v.to_string()),
        None => s.serialize_none(),
    }
}

const SAMPLE_POINTS: usize = 21;
const SAMPLE_TOL: f64 = 1e-9;

fn sample_grid() -> impl Iterator<Item = f64> {
    (0..SAMPLE_POINTS).map(|t| 0.05 + 0.95 * t as f64 / (SAMPLE_POINTS - 1) as f64)
}

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

/// An ordered family `q_1, ..., q_l` of index polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyFamily {
    members: Vec<BivariatePoly>,
}

impl PolyFamily {
    /// Every member must have nonnegative coefficients and depend on `n`;
    /// linear members must be of the form `a n + b N`.
    pub fn new(members: Vec<BivariatePoly>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::IllFormed("empty family".into()));
        }
        for (i, q) in members.iter().enumerate() {
            if !q.is_family_member() {
                return Err(Error::IllFormed(format!(
                    "member {} ({q}) must have nonnegative coefficients and depend on n",
                    i + 1
                )));
            }
            if q.degree() == Some(1) && !q.coeff(0, 0).is_zero() {
                return Err(Error::IllFormed(format!(
                    "linear member {} ({q}) has a constant term",
                    i + 1
                )));
            }
        }
        Ok(Self { members })
    }

    /// Comma-separated text form, e.g. `"n, n+N, n^2"`.
    pub fn parse(s: &str) -> Result<Self> {
        let members = s
            .split(',')
            .map(|t| t.trim().parse())
            .collect::<Result<Vec<BivariatePoly>>>()?;
        Self::new(members)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[BivariatePoly] {
        &self.members
    }

    pub fn member(&self, i: usize) -> &BivariatePoly {
        &self.members[i]
    }

    pub fn degree(&self, i: usize) -> u32 {
        self.members[i].degree().unwrap_or(0)
    }

    pub fn is_linear(&self, i: usize) -> bool {
        self.degree(i) == 1
    }

    pub fn linear_form(&self, i: usize) -> Option<(BigInt, BigInt)> {
        self.members[i].linear_form()
    }

    pub fn n_linear(&self) -> usize {
        (0..self.len()).filter(|&i| self.is_linear(i)).count()
    }
}

impl std::fmt::Display for PolyFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.members.iter().map(|q| q.to_string()).collect();
        write!(f, "{}", parts.join(", "))
    }
}

// ---------------------------------------------------------------------------
// Linear relations and Q-equivalence
// ---------------------------------------------------------------------------

/// `Q_{j,k}(c y) = Q_{i,k}(y)` and `Q_{i,k-1}(y) - Q_{j,k-1}(c y) = r Q'_{j,k}(c y)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearRelation {
    pub c: f64,
    pub r: f64,
    #[serde(serialize_with = "ser_opt_rat")]
    pub c_exact: Option<Rat>,
    #[serde(serialize_with = "ser_opt_rat")]
    pub r_exact: Option<Rat>,
    /// Both identities verified in exact rational arithmetic.
    pub exact: bool,
}

fn related_degree(qi: &BivariatePoly, qj: &BivariatePoly) -> Result<(HomDecomposition, HomDecomposition)> {
    let (di, dj) = (qi.degree(), qj.degree());
    if di != dj {
        return pre(format!("degree mismatch: {di:?} vs {dj:?}"));
    }
    if di.unwrap_or(0) < 2 {
        return pre("common degree must exceed 1");
    }
    let hi = hom_decompose(qi)?;
    let hj = hom_decompose(qj)?;
    if hi.top().is_constant() || hj.top().is_constant() {
        return pre("leading homogeneous parts must be non-constant");
    }
    Ok((hi, hj))
}

/// Finds `c > 0` with `B(c y) = A(y)`; exact when `c` is rational.
fn top_scaling(a: &UniPoly, b: &UniPoly) -> Option<(f64, Option<Rat>)> {
    let d = a.degree()?;
    if b.degree()? != d || d == 0 {
        return None;
    }
    let lead_ratio = a.leading() / b.leading();
    if !lead_ratio.is_positive() {
        return None;
    }
    if let Some(c) = rational_root(&lead_ratio, d as u32) {
        return (b.scale_arg(&c) == *a).then(|| (rat_to_f64(&c), Some(c)));
    }
    // Irrational c: (a_m / b_m)^d = (lead ratio)^m for every m, same zero pattern.
    for m in 0..d {
        let (am, bm) = (a.coeff(m), b.coeff(m));
        if am.is_zero() != bm.is_zero() {
            return None;
        }
        if am.is_zero() {
            continue;
        }
        let ratio = &am / &bm;
        if !ratio.is_positive() && m > 0 {
            return None;
        }
        let lhs = num_traits::pow::pow(ratio, d);
        let rhs = num_traits::pow::pow(lead_ratio.clone(), m);
        if lhs != rhs {
            return None;
        }
    }
    Some((rat_to_f64(&lead_ratio).powf(1.0 / d as f64), None))
}

pub fn detect_linear_relation(qi: &BivariatePoly, qj: &BivariatePoly) -> Result<Option<LinearRelation>> {
    let (hi, hj) = related_degree(qi, qj)?;
    let k = hi.k as i64;
    let Some((c, c_exact)) = top_scaling(hi.top(), hj.top()) else {
        return Ok(None);
    };
    let qik1 = hi.part(k - 1);
    let qjk1 = hj.part(k - 1);
    let djk = hj.top().derivative();
    if let Some(ce) = &c_exact {
        let lhs = qik1.sub(&qjk1.scale_arg(ce));
        let rhs = djk.scale_arg(ce);
        let r = if lhs.is_zero() {
            Rat::zero()
        } else {
            match (lhs.degree(), rhs.degree()) {
                (Some(dl), Some(dr)) if dl == dr => lhs.leading() / rhs.leading(),
                _ => return Ok(None),
            }
        };
        if !lhs.sub(&rhs.scale(&r)).is_zero() {
            return Ok(None);
        }
        return Ok(Some(LinearRelation {
            c,
            r: rat_to_f64(&r),
            c_exact,
            r_exact: Some(r),
            exact: true,
        }));
    }
    // Numeric r at sample points.
    let ratios: Vec<f64> = sample_grid()
        .map(|y| (qik1.eval_f64(y) - qjk1.eval_f64(c * y)) / djk.eval_f64(c * y))
        .collect();
    let r = ratios[0];
    let agree = ratios
        .iter()
        .all(|x| (x - r).abs() <= SAMPLE_TOL * (1.0 + r.abs()));
    Ok(agree.then_some(LinearRelation {
        c,
        r,
        c_exact: None,
        r_exact: None,
        exact: false,
    }))
}

/// `qi(n, N) - qj(c n + r, N) = d` identically.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QEquivalence {
    #[serde(serialize_with = "ser_rat")]
    pub c: Rat,
    #[serde(serialize_with = "ser_rat")]
    pub r: Rat,
    #[serde(serialize_with = "ser_rat")]
    pub d: Rat,
}

pub fn detect_q_equivalence(qi: &BivariatePoly, qj: &BivariatePoly) -> Option<QEquivalence> {
    let rel = detect_linear_relation(qi, qj).ok()??;
    let (c, r) = (rel.c_exact?, rel.r_exact?);
    let diff = qi.to_rational().sub(&compose_affine(qj, &c, &r));
    let d = diff.as_constant()?;
    Some(QEquivalence { c, r, d })
}

// ---------------------------------------------------------------------------
// Structure functions
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Gamma {
    RationalLinear(#[serde(serialize_with = "ser_rat")] Rat),
    /// `gamma(y) = (sum_{j=b}^a alphas[j-b] y^j)^{1/a}`.
    Radical { a: u32, b: u32, alphas: Vec<i64> },
    Numeric,
}

/// A structure function, exact when the top parts are related by a rational
/// scaling.
#[derive(Clone, Debug, PartialEq)]
pub enum StructFn {
    Exact(RationalFunction),
    Numeric,
}

/// Structure functions of an ordered pair `(q, p)` of common degree `k`.
#[derive(Clone, Debug)]
pub struct RelatedData {
    pub k: u32,
    pub gamma: Gamma,
    pub r_k: StructFn,
    /// `c_u[u - 2]` holds `C_u` for `u = 2..=k-1`.
    pub c_u: Vec<StructFn>,
    /// First `u` with `C_u` not identically zero.
    pub s0: Option<u32>,
    /// `q(R, 0) - P_0` when `R_k` is an exact constant.
    pub constant_d: Option<Rat>,
    /// Some decision here was made by sampling.
    pub numeric: bool,
    hq: HomDecomposition,
    hp: HomDecomposition,
}

impl RelatedData {
    pub fn gamma_f64(&self, y: f64) -> f64 {
        match &self.gamma {
            Gamma::RationalLinear(c) => rat_to_f64(c) * y,
            Gamma::Radical { a, b, alphas } => {
                let s: f64 = alphas
                    .iter()
                    .enumerate()
                    .map(|(t, al)| *al as f64 * y.powi((*b as usize + t) as i32))
                    .sum();
                s.max(0.0).powf(1.0 / *a as f64)
            }
            Gamma::Numeric => invert_monotone(self.hq.top(), self.hp.top().eval_f64(y)),
        }
    }

    fn qk_prime(&self, g: f64) -> f64 {
        self.hq.top().derivative().eval_f64(g)
    }

    pub fn r_f64(&self, y: f64) -> f64 {
        if let StructFn::Exact(f) = &self.r_k {
            return f.eval_f64(y);
        }
        let k = self.k as i64;
        let g = self.gamma_f64(y);
        (self.hp.part(k - 1).eval_f64(y) - self.hq.part(k - 1).eval_f64(g)) / self.qk_prime(g)
    }

    pub fn c_f64(&self, u: u32, y: f64) -> f64 {
        if let Some(StructFn::Exact(f)) = self.c_u.get(u as usize - 2) {
            return f.eval_f64(y);
        }
        let k = self.k as i64;
        let g = self.gamma_f64(y);
        (self.hq.part(k - u as i64).eval_f64(g) - self.hp.part(k - u as i64).eval_f64(y))
            / self.qk_prime(g)
    }

    pub fn r_is_zero(&self) -> bool {
        match &self.r_k {
            StructFn::Exact(f) => f.is_zero(),
            StructFn::Numeric => sample_grid().all(|y| self.r_f64(y).abs() <= SAMPLE_TOL),
        }
    }

    pub fn c_is_zero(&self, u: u32) -> bool {
        match self.c_u.get(u as usize - 2) {
            Some(StructFn::Exact(f)) => f.is_zero(),
            Some(StructFn::Numeric) => sample_grid().all(|y| self.c_f64(u, y).abs() <= SAMPLE_TOL),
            None => true,
        }
    }
}

/// Nonnegative root of `f(x) = target` for `f` nondecreasing on `[0, inf)`.
fn invert_monotone(f: &UniPoly, target: f64) -> f64 {
    invert_fn(|x| f.eval_f64(x), target)
}

fn invert_fn(f: impl Fn(f64) -> f64, target: f64) -> f64 {
    if f(0.0) >= target {
        return 0.0;
    }
    let mut hi = 1.0;
    while f(hi) < target {
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn radical_form(qk: &UniPoly, pk: &UniPoly) -> Option<Gamma> {
    let a = qk.degree()?;
    if qk.lowest_degree()? != a || !qk.leading().is_one() {
        return None;
    }
    if pk.degree()? > a {
        return None;
    }
    let b = pk.lowest_degree()?;
    let mut alphas = Vec::new();
    for j in b..=a {
        let c = pk.coeff(j);
        if !c.is_integer() {
            return None;
        }
        alphas.push(c.to_integer().to_i64()?);
    }
    Some(Gamma::Radical {
        a: a as u32,
        b: b as u32,
        alphas,
    })
}

pub fn structure_functions(q: &BivariatePoly, p: &BivariatePoly) -> Result<RelatedData> {
    let (hp, hq) = related_degree(p, q)?;
    let k = hq.k;
    let ki = k as i64;
    let (qk, pk) = (hq.top().clone(), hp.top().clone());
    if qk.coeff(0) > pk.coeff(0) {
        return pre("Q_k(0) > P_k(0); swap the roles of q and p");
    }
    let scaling = top_scaling(&pk, &qk);
    let exact_c = scaling.as_ref().and_then(|(_, c)| c.clone());
    let gamma = if let Some(c) = &exact_c {
        Gamma::RationalLinear(c.clone())
    } else if let Some(g) = radical_form(&qk, &pk) {
        g
    } else {
        Gamma::Numeric
    };
    let (r_k, c_u) = if let Some(c) = &exact_c {
        let den = qk.derivative().scale_arg(c);
        let r = RationalFunction {
            num: hp.part(ki - 1).sub(&hq.part(ki - 1).scale_arg(c)),
            den: den.clone(),
        };
        let cs = (2..k)
            .map(|u| {
                StructFn::Exact(RationalFunction {
                    num: hq.part(ki - u as i64).scale_arg(c).sub(&hp.part(ki - u as i64)),
                    den: den.clone(),
                })
            })
            .collect();
        (StructFn::Exact(r), cs)
    } else {
        (StructFn::Numeric, (2..k).map(|_| StructFn::Numeric).collect())
    };
    let numeric = exact_c.is_none();
    let mut data = RelatedData {
        k,
        gamma,
        r_k,
        c_u,
        s0: None,
        constant_d: None,
        numeric,
        hq,
        hp,
    };
    data.s0 = (2..k).find(|&u| !data.c_is_zero(u));
    if let StructFn::Exact(f) = &data.r_k {
        if let Some(r) = f.as_constant() {
            let q0 = q.n_part();
            data.constant_d = Some(q0.eval(&r) - data.hp.part(0).coeff(0));
        }
    }
    Ok(data)
}

// ---------------------------------------------------------------------------
// Exact difference identity
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct LemmaResidual {
    /// `q_N(m) - p_N(n)`.
    pub lhs: f64,
    pub residual: f64,
    /// Present when the computation was exact.
    pub exact_residual: Option<Rat>,
    /// Coefficients of `H_{N,y}(xi)` in the exact case.
    pub h: Option<UniPoly>,
}

/// `q_N(m) - p_N(n) - [q_0(R) - P_0 + Q_k'(g) N^{k-1} H(m - N g - R)]` with
/// `g = gamma_k(n/N)`, `R = R_k(n/N)` and `H` assembled from the Taylor
/// expansion of `sum_j N^j Q_j(g + x / N)` around `g` and then around `R`.
/// The two leading orders are dropped from `H` on the strength of
/// `Q_k(g) = P_k(y)` and the defining relation of `R`, so the residual
/// vanishes exactly only when the structure functions are right.
pub fn lemma_identity_residual(
    q: &BivariatePoly,
    p: &BivariatePoly,
    n: u64,
    big_n: u64,
    m: u64,
) -> Result<LemmaResidual> {
    let sf = structure_functions(q, p)?;
    let lhs_int = q.eval_u64(m, big_n) - p.eval_u64(n, big_n);
    let k = sf.k as usize;
    let y = Rat::new(BigInt::from(n), BigInt::from(big_n));
    let bn = rat_int(big_n);
    match (&sf.gamma, &sf.r_k) {
        (Gamma::RationalLinear(c), StructFn::Exact(rf)) => {
            let g = c * &y;
            let r = rf
                .eval(&y)
                .ok_or_else(|| Error::Precondition("Q_k'(gamma) vanishes at y".into()))?;
            // taylor[j][s] = Q_j^{(s)}(g) / s!
            let taylor: Vec<UniPoly> = (0..=k).map(|j| sf.hq.part(j as i64).shift(&g)).collect();
            let qk_prime = sf.hq.top().derivative().eval(&g);
            if qk_prime.is_zero() {
                return pre("Q_k'(gamma) vanishes at y");
            }
            // Polynomial (R + xi)^s.
            let r_plus = UniPoly::from_coeffs(vec![r.clone(), Rat::one()]);
            let mut pow_rx = vec![UniPoly::constant(Rat::one())];
            for s in 1..=k {
                pow_rx.push(pow_rx[s - 1].mul(&r_plus));
            }
            // Order u = 1 contributes xi alone; orders u >= 2 contribute
            // N^{1-u} [sum_s Q_{k-u+s}^{(s)}(g)/s! (R+xi)^s - P_{k-u}(y)] / Q_k'(g).
            let mut h = UniPoly::from_coeffs(vec![Rat::zero(), Rat::one()]);
            for u in 2..=k {
                let mut acc = UniPoly::constant(-sf.hp.part((k - u) as i64).eval(&y));
                for s in 0..=u {
                    let coeff = taylor[k - u + s].coeff(s);
                    acc = acc.add(&pow_rx[s].scale(&coeff));
                }
                let scale = Rat::one() / (num_traits::pow::pow(bn.clone(), u - 1) * &qk_prime);
                h = h.add(&acc.scale(&scale));
            }
            // Remove the constant q_0(R) - P_0 that the top order u = k carries.
            let d = q.n_part().eval(&r) - sf.hp.part(0).coeff(0);
            let dscale = Rat::one() / (num_traits::pow::pow(bn.clone(), k - 1) * &qk_prime);
            h = h.sub(&UniPoly::constant(&d * &dscale));
            let xi = rat_int(m) - &bn * &g - &r;
            let rhs = &d + &qk_prime * num_traits::pow::pow(bn.clone(), k - 1) * h.eval(&xi);
            let lhs = Rat::from_integer(lhs_int);
            let res = &lhs - rhs;
            Ok(LemmaResidual {
                lhs: rat_to_f64(&lhs),
                residual: rat_to_f64(&res),
                exact_residual: Some(res),
                h: Some(h),
            })
        }
        _ => {
            let yf = n as f64 / big_n as f64;
            let nf = big_n as f64;
            let g = sf.gamma_f64(yf);
            let r = sf.r_f64(yf);
            let qk_prime = sf.qk_prime(g);
            let xi = m as f64 - nf * g - r;
            let mut h = xi;
            for u in 2..=k {
                let mut acc = -sf.hp.part((k - u) as i64).eval_f64(yf);
                for s in 0..=u {
                    let coeff = taylor_f64(&sf.hq.part((k - u + s) as i64), g, s);
                    acc += coeff * (r + xi).powi(s as i32);
                }
                h += acc / (nf.powi(u as i32 - 1) * qk_prime);
            }
            let d = q.n_part().eval_f64(r) - rat_to_f64(&sf.hp.part(0).coeff(0));
            h -= d / (nf.powi(k as i32 - 1) * qk_prime);
            let rhs = d + qk_prime * nf.powi(k as i32 - 1) * h;
            let lhs = lhs_int.to_f64().unwrap_or(f64::NAN);
            Ok(LemmaResidual {
                lhs,
                residual: lhs - rhs,
                exact_residual: None,
                h: None,
            })
        }
    }
}

/// `f^{(s)}(g) / s!`.
fn taylor_f64(f: &UniPoly, g: f64, s: usize) -> f64 {
    let mut d = f.clone();
    let mut fact = 1.0;
    for t in 1..=s {
        d = d.derivative();
        fact *= t as f64;
    }
    d.eval_f64(g) / fact
}

// ---------------------------------------------------------------------------
// Lower bound for the difference
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prop1Bound {
    pub delta: f64,
    pub bound: f64,
    pub difference: f64,
    pub holds: bool,
    pub equal_values: bool,
}

pub struct Prop1Input<'a> {
    pub q: &'a BivariatePoly,
    pub p: &'a BivariatePoly,
    pub h: &'a BivariatePoly,
    pub big_q: &'a BivariatePoly,
    pub big_p: &'a BivariatePoly,
    pub s: &'a BivariatePoly,
    pub r: &'a BivariatePoly,
}

fn deg_or_neg(p: &BivariatePoly) -> i64 {
    p.degree().map(|d| d as i64).unwrap_or(-1)
}

/// `x -> d/dx f(x, N)` evaluated in floating point.
fn d_dx(f: &BivariatePoly, x: f64, big_n: f64) -> f64 {
    f.terms()
        .filter(|((i, _), _)| *i > 0)
        .map(|(&(i, j), c)| {
            c.to_f64().unwrap_or(f64::NAN) * i as f64 * x.powi(i as i32 - 1) * big_n.powi(j as i32)
        })
        .sum()
}

pub fn prop1_lower_bound(inp: &Prop1Input<'_>, n: u64, m: u64, big_n: u64) -> Result<Prop1Bound> {
    if inp.h.depends_on_n() || inp.h.degree().unwrap_or(0) == 0 {
        return pre("H must be a non-constant polynomial in N only");
    }
    if inp.h.mul(inp.big_p).add(inp.r) != *inp.p {
        return pre("p != H P + r");
    }
    if inp.h.mul(inp.big_q).add(inp.s) != *inp.q {
        return pre("q != H Q + s");
    }
    if deg_or_neg(inp.h) <= deg_or_neg(inp.s).max(deg_or_neg(inp.r)) {
        return pre("deg H must exceed deg s and deg r");
    }
    if !inp.big_p.is_family_member() || !inp.big_q.is_family_member() {
        return pre("P and Q must have nonnegative coefficients and depend on n");
    }
    let qv = inp.q.eval_u64(m, big_n);
    let pv = inp.p.eval_u64(n, big_n);
    if pv <= inp.q.eval_u64(0, big_n) || qv <= inp.p.eval_u64(0, big_n) {
        return pre("need p_N(n) > q_N(0) and q_N(m) > p_N(0)");
    }
    let difference = (&qv - &pv).abs().to_f64().unwrap_or(f64::INFINITY);
    let big_qv = inp.big_q.eval_u64(m, big_n);
    let big_pv = inp.big_p.eval_u64(n, big_n);
    if big_qv == big_pv {
        return Ok(Prop1Bound {
            delta: f64::NAN,
            bound: f64::NAN,
            difference,
            holds: true,
            equal_values: true,
        });
    }
    let nf = big_n as f64;
    let (bq, bp) = (inp.big_q, inp.big_p);
    let x1 = invert_fn(|x| bq.eval_f64(x, nf), big_pv.to_f64().unwrap_or(f64::INFINITY));
    let x2 = invert_fn(|x| bp.eval_f64(x, nf), big_qv.to_f64().unwrap_or(f64::INFINITY));
    let t1 = d_dx(bq, x1, nf) / d_dx(bq, m as f64, nf);
    let t2 = d_dx(bp, x2, nf) / d_dx(bp, n as f64, nf);
    let delta = t1.min(t2);
    let hv = inp.h.eval_u64(0, big_n).abs().to_f64().unwrap_or(f64::INFINITY);
    let sr = (inp.s.eval_u64(m, big_n) - inp.r.eval_u64(n, big_n))
        .abs()
        .to_f64()
        .unwrap_or(f64::INFINITY);
    let bound = delta * hv - sr;
    Ok(Prop1Bound {
        delta,
        bound,
        difference,
        holds: difference >= bound * (1.0 - 1e-12),
        equal_values: false,
    })
}

// ---------------------------------------------------------------------------
// Empirical certificates
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExplosionCertificate {
    #[serde(rename = "N")]
    pub n_max: u64,
    pub delta: f64,
    /// First and last `n` of the scanned range.
    pub range: (u64, u64),
    pub c_grid: Vec<f64>,
    pub violator_counts: Vec<u64>,
    pub violator_density: Vec<f64>,
    /// `n` with `q_N(m) = p_N(n)` for some `m >= 1`.
    pub exact_hits: Vec<u64>,
    /// Largest `c` in the grid whose violator count is at most `delta N`.
    pub max_certified_c: Option<f64>,
}

fn eval_fast(q: &BivariatePoly, x: u64, big_n: u64) -> BigInt {
    match q.eval_i128(x as i128, big_n as i128) {
        Some(v) => BigInt::from(v),
        None => q.eval_u64(x, big_n),
    }
}

/// `min_{m >= 1} |q(m, N) - target|` using that `q(., N)` strictly increases.
pub fn min_gap(q: &BivariatePoly, target: &BigInt, big_n: u64) -> BigInt {
    let at = |m: u64| eval_fast(q, m, big_n);
    let first = at(1);
    if first >= *target {
        return first - target;
    }
    let mut hi = 2u64;
    while at(hi) < *target {
        hi = hi.saturating_mul(2);
    }
    let mut lo = hi / 2;
    // at(lo) < target <= at(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if at(mid) < *target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = target - at(lo);
    let b = at(hi) - target;
    a.min(b)
}

/// The minimum runs over every `m >= 1`; the resulting counts dominate those
/// with `m` restricted to `[delta N, N]`.
pub fn explosion_certificate(
    q: &BivariatePoly,
    p: &BivariatePoly,
    delta: f64,
    n_max: u64,
    c_grid: &[f64],
) -> Result<ExplosionCertificate> {
    if !(delta > 0.0 && delta < 1.0) {
        return pre("delta must lie in (0, 1)");
    }
    if n_max < 100 {
        return pre("N must be at least 100");
    }
    if !q.is_family_member() || !p.is_family_member() {
        return Err(Error::IllFormed("certificate needs family polynomials".into()));
    }
    let lo = (delta * n_max as f64).ceil().max(1.0) as u64;
    if lo > n_max {
        return pre("empty range");
    }
    let gaps: Vec<BigInt> = (lo..=n_max)
        .into_par_iter()
        .map(|n| min_gap(q, &eval_fast(p, n, n_max), n_max))
        .collect();
    let mut grid: Vec<f64> = c_grid.to_vec();
    grid.sort_by(|a, b| a.total_cmp(b));
    let total = gaps.len() as f64;
    let gaps_f: Vec<f64> = gaps.iter().map(|g| g.to_f64().unwrap_or(f64::INFINITY)).collect();
    let counts: Vec<u64> = grid
        .iter()
        .map(|&c| {
            let thr = c * n_max as f64;
            gaps_f.iter().filter(|&&g| g == 0.0 || g < thr).count() as u64
        })
        .collect();
    let exact_hits = gaps
        .iter()
        .zip(lo..)
        .filter(|(g, _)| g.is_zero())
        .map(|(_, n)| n)
        .collect();
    let limit = delta * n_max as f64;
    let max_certified_c = grid
        .iter()
        .zip(&counts)
        .filter(|(_, &k)| k as f64 <= limit)
        .map(|(c, _)| *c)
        .next_back();
    Ok(ExplosionCertificate {
        n_max,
        delta,
        range: (lo, n_max),
        violator_density: counts.iter().map(|&k| k as f64 / total).collect(),
        c_grid: grid,
        violator_counts: counts,
        exact_hits,
        max_certified_c,
    })
}

// ---------------------------------------------------------------------------
// Pair classification
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Explodes {
    Yes,
    No,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum PairClass {
    BothLinear,
    DifferentDegree,
    LinearlyRelated { c: f64, r: f64, exact: bool },
    QEquivalent(QEquivalence),
    FractionalExploding { a: u32, b: u32, alphas: Vec<i64>, route: FractionalRoute },
    Unknown { reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FractionalRoute {
    /// Vanishing `R_k` and enough vanishing `C_u`.
    StructureFunctions,
    /// `q = N^h m^a + s`, `p = N^h P + r` with low-degree remainders.
    CommonFactor,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairVerdict {
    pub class: PairClass,
    pub explodes: Explodes,
    pub evidence: Option<ExplosionCertificate>,
    /// Sieve scan for the radical equation when the top parts have that shape.
    pub sieve: Option<SieveResult>,
}

/// Certificate parameters used when a pair cannot be decided symbolically.
pub const CERT_DELTA: f64 = 0.1;
pub const CERT_N: u64 = 2000;
pub const CERT_C_GRID: [f64; 5] = [0.0, 0.01, 0.1, 0.5, 1.0];

fn sieve_hypotheses(a: u32, b: u32, alphas: &[i64]) -> bool {
    a > b && b >= 1 && a.gcd(&b) == 1 && alphas.first().map(|x| x.abs()) == Some(1)
}

fn fractional_route(q: &BivariatePoly, p: &BivariatePoly) -> Option<(Gamma, FractionalRoute)> {
    let sf = structure_functions(q, p).ok()?;
    let (a, b, alphas) = match &sf.gamma {
        Gamma::Radical { a, b, alphas } => (*a, *b, alphas.clone()),
        _ => radical_form(sf.hq.top(), sf.hp.top()).and_then(|g| match g {
            Gamma::Radical { a, b, alphas } => Some((a, b, alphas)),
            _ => None,
        })?,
    };
    if !sieve_hypotheses(a, b, &alphas) {
        return None;
    }
    let gamma = Gamma::Radical { a, b, alphas: alphas.clone() };
    let k = sf.k;
    if sf.r_is_zero() {
        // Need a < s <= k - 1 with C_u = 0 for 2 <= u <= s.
        let s_max = (2..k).take_while(|&u| sf.c_is_zero(u)).last();
        if s_max.is_some_and(|s| a < s) {
            return Some((gamma, FractionalRoute::StructureFunctions));
        }
    }
    // Common factor N^h with h = k - a.
    let h = k.checked_sub(a)?;
    if h == 0 {
        return None;
    }
    let head_q = BivariatePoly::monomial(1, a, h);
    let mut head_p = BivariatePoly::zero();
    for (t, al) in alphas.iter().enumerate() {
        let j = b + t as u32;
        head_p = head_p.add(&BivariatePoly::monomial(*al, j, a - j + h));
    }
    let s = q.sub(&head_q);
    let r = p.sub(&head_p);
    if (deg_or_neg(&s).max(deg_or_neg(&r))) < h as i64 {
        return Some((gamma, FractionalRoute::CommonFactor));
    }
    None
}

fn radical_sieve(q: &BivariatePoly, p: &BivariatePoly) -> Option<SieveResult> {
    let (hq, hp) = (hom_decompose(q).ok()?, hom_decompose(p).ok()?);
    match radical_form(hq.top(), hp.top())? {
        Gamma::Radical { a, b, alphas } if sieve_hypotheses(a, b, &alphas) => {
            sieve_density(a, b, &alphas, 1000).ok()
        }
        _ => None,
    }
}

pub fn classify_pair(qi: &BivariatePoly, qj: &BivariatePoly) -> Result<PairVerdict> {
    for q in [qi, qj] {
        if !q.is_family_member() {
            return Err(Error::IllFormed(format!("{q} is not a family polynomial")));
        }
    }
    let verdict = |class, explodes| PairVerdict {
        class,
        explodes,
        evidence: None,
        sieve: None,
    };
    let (di, dj) = (qi.degree().unwrap(), qj.degree().unwrap());
    if di != dj {
        return Ok(verdict(PairClass::DifferentDegree, Explodes::Yes));
    }
    if di == 1 {
        return Ok(verdict(PairClass::BothLinear, Explodes::No));
    }
    let (hi, hj) = (hom_decompose(qi)?, hom_decompose(qj)?);
    if !hi.top().is_constant() && !hj.top().is_constant() {
        if let Some(rel) = detect_linear_relation(qi, qj)? {
            if let Some(eq) = detect_q_equivalence(qi, qj) {
                return Ok(verdict(PairClass::QEquivalent(eq), Explodes::No));
            }
            return Ok(verdict(
                PairClass::LinearlyRelated {
                    c: rel.c,
                    r: rel.r,
                    exact: rel.exact,
                },
                Explodes::Yes,
            ));
        }
        for (q, p) in [(qj, qi), (qi, qj)] {
            if let Some((Gamma::Radical { a, b, alphas }, route)) = fractional_route(q, p) {
                return Ok(verdict(
                    PairClass::FractionalExploding { a, b, alphas, route },
                    Explodes::Yes,
                ));
            }
        }
    }
    let reason = if hi.top().is_constant() || hj.top().is_constant() {
        "a leading homogeneous part is constant".to_string()
    } else {
        "no linear relation and no corollary hypotheses met".to_string()
    };
    let evidence = explosion_certificate(qj, qi, CERT_DELTA, CERT_N, &CERT_C_GRID)?;
    let sieve = radical_sieve(qj, qi).or_else(|| radical_sieve(qi, qj));
    Ok(PairVerdict {
        class: PairClass::Unknown { reason },
        explodes: Explodes::Unknown,
        evidence: Some(evidence),
        sieve,
    })
}

// ---------------------------------------------------------------------------
// Perfect-power sieve and totient bound
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SieveWitness {
    pub n: u64,
    pub m: String,
    pub v: u64,
    pub z: u64,
    /// `n = v z^a` with `v = gcd(n, N)`.
    pub structure_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SieveResult {
    #[serde(rename = "N")]
    pub n_max: u64,
    pub count: u64,
    pub density: f64,
    pub witnesses: Vec<SieveWitness>,
}

/// Solutions of `m^a = sum_{j=b}^a alphas[j-b] n^j N^{a-j}` for `1 <= n <= N`.
pub fn sieve_density(a: u32, b: u32, alphas: &[i64], n_max: u64) -> Result<SieveResult> {
    if !(a > b && b >= 1) {
        return pre("need a > b >= 1");
    }
    if a.gcd(&b) != 1 {
        return pre("a and b must be coprime");
    }
    if alphas.len() != (a - b + 1) as usize {
        return pre(format!("expected {} coefficients alpha_b..alpha_a", a - b + 1));
    }
    if alphas[0].abs() != 1 {
        return pre("|alpha_b| must be 1");
    }
    if n_max == 0 {
        return pre("N must be positive");
    }
    let bn = BigInt::from(n_max);
    let witnesses: Vec<SieveWitness> = (1..=n_max)
        .into_par_iter()
        .filter_map(|n| {
            let nb = BigInt::from(n);
            let mut rhs = BigInt::zero();
            for (t, al) in alphas.iter().enumerate() {
                let j = b as usize + t;
                rhs += BigInt::from(*al)
                    * num_traits::pow::pow(nb.clone(), j)
                    * num_traits::pow::pow(bn.clone(), a as usize - j);
            }
            if !rhs.is_positive() {
                return None;
            }
            let m = rhs.nth_root(a);
            if num_traits::pow::pow(m.clone(), a as usize) != rhs {
                return None;
            }
            let v = n.gcd(&n_max);
            let rest = n / v;
            let z = (rest as f64).powf(1.0 / a as f64).round() as u64;
            let z = (z.saturating_sub(1)..=z + 1)
                .find(|zz| zz.checked_pow(a) == Some(rest))
                .unwrap_or(0);
            Some(SieveWitness {
                n,
                m: m.to_string(),
                v,
                z,
                structure_holds: z > 0,
            })
        })
        .collect();
    let count = witnesses.len() as u64;
    Ok(SieveResult {
        n_max,
        count,
        density: count as f64 / n_max as f64,
        witnesses,
    })
}

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TotientBound {
    pub phi: u64,
    pub r: f64,
    pub holds: bool,
}

pub fn euler_phi(mut m: u64) -> u64 {
    let mut phi = m;
    let mut p = 2u64;
    while p * p <= m {
        if m.is_multiple_of(p) {
            while m.is_multiple_of(p) {
                m /= p;
            }
            phi -= phi / p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        phi -= phi / m;
    }
    phi
}

/// `R(M) = M / (e^gamma ln ln M + 3 / ln ln M)`.
pub fn totient_r(m: u64) -> f64 {
    let ll = (m as f64).ln().ln();
    m as f64 / (EULER_GAMMA.exp() * ll + 3.0 / ll)
}

pub fn totient_bound(m: u64) -> Result<TotientBound> {
    if m <= 2 {
        return pre("M must exceed 2");
    }
    let phi = euler_phi(m);
    let r = totient_r(m);
    Ok(TotientBound {
        phi,
        r,
        holds: phi as f64 >= r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::rat;

    fn p(s: &str) -> BivariatePoly {
        s.parse().unwrap()
    }

    #[test]
    fn linear_relation_examples() {
        let rel = detect_linear_relation(&p("4n^2"), &p("m^2")).unwrap().unwrap();
        assert_eq!(rel.c_exact, Some(rat(2, 1)));
        assert_eq!(rel.r_exact, Some(rat(0, 1)));
        let rel = detect_linear_relation(&p("n^2+2n+1"), &p("m^2")).unwrap().unwrap();
        assert_eq!((rel.c_exact, rel.r_exact), (Some(rat(1, 1)), Some(rat(1, 1))));
        assert!(detect_linear_relation(&p("n^2"), &p("m^3")).is_err());
        assert!(detect_linear_relation(&p("n+N^2"), &p("n^2")).is_err());
    }

    #[test]
    fn irrational_scaling() {
        // 2n^2 versus m^2: c = sqrt(2), r = 0.
        let rel = detect_linear_relation(&p("2n^2"), &p("m^2")).unwrap().unwrap();
        assert!(!rel.exact);
        assert!((rel.c - 2f64.sqrt()).abs() < 1e-12);
        assert!(rel.r.abs() < 1e-12);
        let v = classify_pair(&p("2n^2"), &p("m^2")).unwrap();
        assert_eq!(v.explodes, Explodes::Yes);
        // 2n^2 + nN versus m^2 + mN fails the coefficient criterion.
        assert!(detect_linear_relation(&p("2n^2+nN"), &p("m^2+mN")).unwrap().is_none());
    }

    #[test]
    fn q_equivalence_examples() {
        let e = detect_q_equivalence(&p("n^2+2n+1"), &p("m^2")).unwrap();
        assert_eq!((e.c, e.r, e.d), (rat(1, 1), rat(1, 1), rat(0, 1)));
        let e = detect_q_equivalence(&p("4n^2"), &p("m^2")).unwrap();
        assert_eq!((e.c, e.r, e.d), (rat(2, 1), rat(0, 1), rat(0, 1)));
        let e = detect_q_equivalence(&p("n^2+n"), &p("m^2")).unwrap();
        assert_eq!((e.c, e.r, e.d), (rat(1, 1), rat(1, 2), rat(-1, 4)));
        let back = detect_q_equivalence(&p("m^2"), &p("n^2+n")).unwrap();
        assert_eq!((back.c, back.r, back.d), (rat(1, 1), rat(-1, 2), rat(1, 4)));
    }

    #[test]
    fn structure_function_examples() {
        let sf = structure_functions(&p("m^2"), &p("4n^2")).unwrap();
        assert_eq!(sf.gamma, Gamma::RationalLinear(rat(2, 1)));
        assert!(sf.r_is_zero());
        assert!(sf.c_u.is_empty());
        assert_eq!(sf.constant_d, Some(rat(0, 1)));

        let sf = structure_functions(&p("m^2"), &p("n^2+2n+1")).unwrap();
        assert_eq!(sf.gamma, Gamma::RationalLinear(rat(1, 1)));
        match &sf.r_k {
            StructFn::Exact(f) => assert_eq!(f.as_constant(), Some(rat(1, 1))),
            _ => panic!("expected exact R"),
        }
        assert_eq!(sf.constant_d, Some(rat(0, 1)));

        let sf = structure_functions(&p("m^3"), &p("n^3+n^2N")).unwrap();
        assert_eq!(
            sf.gamma,
            Gamma::Radical {
                a: 3,
                b: 2,
                alphas: vec![1, 1]
            }
        );
        assert!(sf.numeric);
        let y = 0.4f64;
        assert!((sf.gamma_f64(y).powi(3) - (y.powi(3) + y * y)).abs() < 1e-12);
        assert!(structure_functions(&p("m^2+N^2"), &p("n^2")).is_err());
    }

    #[test]
    fn lemma_identity_example() {
        let res = lemma_identity_residual(&p("m^2"), &p("4n^2"), 3, 10, 7).unwrap();
        assert_eq!(res.lhs, 13.0);
        assert_eq!(res.exact_residual, Some(rat(0, 1)));
        // H(xi) = xi + xi^2 / (4 y N) with y N = 3.
        let h = res.h.unwrap();
        assert_eq!(h.coeff(0), rat(0, 1));
        assert_eq!(h.coeff(1), rat(1, 1));
        assert_eq!(h.coeff(2), rat(1, 12));

        for big_n in [5u64, 17, 40] {
            for n in 1..big_n {
                let r = lemma_identity_residual(&p("m^2"), &p("n^2+2n+1"), n, big_n, n + 1).unwrap();
                assert_eq!(r.lhs, 0.0);
                assert_eq!(r.exact_residual, Some(rat(0, 1)));
            }
        }
    }

    #[test]
    fn lemma_identity_numeric_mode() {
        let r = lemma_identity_residual(&p("m^3"), &p("n^3+n^2N"), 7, 20, 9).unwrap();
        assert!(r.exact_residual.is_none());
        assert!(r.residual.abs() <= 1e-9 * (1.0 + r.lhs.abs()), "{r:?}");
    }

    #[test]
    fn prop1_example() {
        let (q, pp, h) = (p("m^2N"), p("n^2N+nN"), p("N"));
        let (bq, bp, z) = (p("m^2"), p("n^2+n"), BivariatePoly::zero());
        let inp = Prop1Input {
            q: &q,
            p: &pp,
            h: &h,
            big_q: &bq,
            big_p: &bp,
            s: &z,
            r: &z,
        };
        let b = prop1_lower_bound(&inp, 3, 3, 10).unwrap();
        assert_eq!(b.difference, 30.0);
        let x = (-1.0 + 37f64.sqrt()) / 2.0;
        let want = ((2.0 * x + 1.0) / 7.0).min(2.0 * 12f64.sqrt() / 6.0);
        assert!((b.delta - want).abs() < 1e-12);
        assert!((b.bound - 10.0 * want).abs() < 1e-10);
        assert!(b.holds && !b.equal_values);
        let (q2, p2) = (p("m^2N"), p("n^2N"));
        let (bq2, bp2) = (p("m^2"), p("n^2"));
        let inp2 = Prop1Input {
            q: &q2,
            p: &p2,
            h: &h,
            big_q: &bq2,
            big_p: &bp2,
            s: &z,
            r: &z,
        };
        assert!(prop1_lower_bound(&inp2, 4, 4, 10).unwrap().equal_values);
        let b2 = prop1_lower_bound(&inp2, 4, 5, 10).unwrap();
        assert!((b2.bound - b2.delta * 10.0).abs() < 1e-12);
        let wrong = Prop1Input { r: &h, ..inp2 };
        assert!(prop1_lower_bound(&wrong, 4, 5, 10).is_err());
    }

    #[test]
    fn certificate_examples() {
        let c = explosion_certificate(&p("m^3"), &p("n^2"), 0.1, 1000, &[0.0, 0.5]).unwrap();
        assert_eq!(c.exact_hits, vec![125, 216, 343, 512, 729, 1000]);
        assert_eq!(c.violator_counts[0], 6);
        assert!((c.violator_density[0] - 6.0 / 901.0).abs() < 1e-12);

        let c = explosion_certificate(&p("2m"), &p("n+N"), 0.1, 1000, &[0.01, 0.1]).unwrap();
        assert!(c.violator_density.iter().all(|&d| d == 1.0));

        let c = explosion_certificate(&p("m^2"), &p("4n^2"), 0.1, 1000, &[0.0]).unwrap();
        assert_eq!(c.violator_density[0], 1.0);
        assert_eq!(c.max_certified_c, None);
        assert!(explosion_certificate(&p("m^2"), &p("n^2"), 1.5, 1000, &[0.0]).is_err());
    }

    #[test]
    fn classify_examples() {
        let v = classify_pair(&p("n^2"), &p("m^3")).unwrap();
        assert_eq!((v.class, v.explodes), (PairClass::DifferentDegree, Explodes::Yes));
        let v = classify_pair(&p("n+N"), &p("2n")).unwrap();
        assert_eq!((v.class, v.explodes), (PairClass::BothLinear, Explodes::No));
        let v = classify_pair(&p("4n^2"), &p("m^2")).unwrap();
        assert_eq!(v.explodes, Explodes::No);
        assert_eq!(
            v.class,
            PairClass::QEquivalent(QEquivalence {
                c: rat(2, 1),
                r: rat(0, 1),
                d: rat(0, 1)
            })
        );
        let v = classify_pair(&p("n^2+nN"), &p("m^2")).unwrap();
        assert!(matches!(v.class, PairClass::Unknown { .. }));
        assert_eq!(v.explodes, Explodes::Unknown);
        assert!(v.evidence.is_some());
        let sieve = v.sieve.as_ref().unwrap();
        assert!(sieve.witnesses.iter().all(|w| w.structure_holds));
        // Common-factor route: q = N m^2, p = N(n^2 + nN).
        let v = classify_pair(&p("n^2N+nN^2"), &p("m^2N")).unwrap();
        assert_eq!(v.explodes, Explodes::Yes);
        assert!(matches!(
            v.class,
            PairClass::FractionalExploding {
                route: FractionalRoute::CommonFactor,
                ..
            }
        ));
        // Structure-function route: k = 5, a = 2, R = 0, C_2 = C_3 = 0.
        let v = classify_pair(&p("n^2N^3+nN^4+n"), &p("m^2N^3+m")).unwrap();
        assert_eq!(v.explodes, Explodes::Yes, "{v:?}");
    }

    #[test]
    fn sieve_examples() {
        let s = sieve_density(2, 1, &[1, 0], 16).unwrap();
        assert_eq!(s.count, 4);
        let ns: Vec<u64> = s.witnesses.iter().map(|w| w.n).collect();
        assert_eq!(ns, vec![1, 4, 9, 16]);
        let w4 = &s.witnesses[1];
        assert_eq!((w4.v, w4.z), (4, 1));
        assert!(s.witnesses.iter().all(|w| w.structure_holds));
        assert_eq!(sieve_density(2, 1, &[1, 1], 4).unwrap().count, 0);
        assert!(sieve_density(4, 2, &[1, 0, 0], 4).is_err());
        assert!(sieve_density(2, 1, &[2, 0], 4).is_err());
    }

    #[test]
    fn totient_examples() {
        let t = totient_bound(10).unwrap();
        assert_eq!(t.phi, 4);
        assert!((t.r - 1.967).abs() < 1e-3 && t.holds);
        assert_eq!(totient_bound(7).unwrap().phi, 6);
        let t = totient_bound(1 << 20).unwrap();
        assert_eq!(t.phi, 1 << 19);
        assert!(t.holds);
        assert!(totient_bound(2).is_err());
    }
}
