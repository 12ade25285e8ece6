//! Exact bivariate integer polynomials `p(n, N)` and the univariate rational
//! polynomials produced by their homogeneous decomposition.
//!
//! A monomial `n^i N^j` has total degree `i + j` and lands in `Q_{i+j}` as the
//! coefficient of `y^i`, so that `p(n, N) = sum_d N^d Q_d(n / N)`.
//!
//! Text form: `term ("+" term)*` with `term = [coeff]["n"["^"i]]["N"["^"j]]`.
//! The parser also accepts `-` separators, an optional `*` between factors and
//! `m` as an alias for `n`; the printer emits the canonical form only.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: impl Into<BigInt>) -> Rat {
    Rat::from_integer(n.into())
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    // Go through the integer parts to avoid overflow for huge numerators.
    match (x.numer().to_f64(), x.denom().to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
        _ => {
            let shift = x.numer().bits().max(x.denom().bits()) as i64 - 60;
            let s = shift.max(0) as u32;
            let n = (x.numer() >> s).to_f64().unwrap_or(0.0);
            let d = (x.denom() >> s).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

/// Exact rational approximation of a finite float.
pub fn f64_to_rat(x: f64) -> Option<Rat> {
    Rat::from_float(x)
}

fn binomial(n: u32, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for t in 0..k {
        acc = acc * BigInt::from(n - t) / BigInt::from(t + 1);
    }
    acc
}

fn pow_rat(x: &Rat, e: u32) -> Rat {
    num_traits::pow::pow(x.clone(), e as usize)
}

// ---------------------------------------------------------------------------
// Bivariate integer polynomials
// ---------------------------------------------------------------------------

/// Polynomial in `n` and `N` with integer coefficients; only nonzero
/// coefficients are stored, keyed by `(deg_n, deg_N)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct BivariatePoly {
    terms: BTreeMap<(u32, u32), BigInt>,
}

impl BivariatePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: impl Into<BigInt>, i: u32, j: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(c.into(), i, j);
        p
    }

    /// The polynomial `n`.
    pub fn n() -> Self {
        Self::monomial(1, 1, 0)
    }

    /// The polynomial `N`.
    pub fn big_n() -> Self {
        Self::monomial(1, 0, 1)
    }

    pub fn from_terms<I, C>(terms: I) -> Self
    where
        I: IntoIterator<Item = (C, u32, u32)>,
        C: Into<BigInt>,
    {
        let mut p = Self::zero();
        for (c, i, j) in terms {
            p.add_term(c.into(), i, j);
        }
        p
    }

    fn add_term(&mut self, c: BigInt, i: u32, j: u32) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry((i, j)).or_insert_with(BigInt::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    /// Nonzero terms as `((deg_n, deg_N), coeff)`.
    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &BigInt)> {
        self.terms.iter()
    }

    pub fn coeff(&self, i: u32, j: u32) -> BigInt {
        self.terms.get(&(i, j)).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|(i, j)| i + j).max()
    }

    pub fn degree_n(&self) -> Option<u32> {
        self.terms.keys().map(|(i, _)| *i).max()
    }

    pub fn depends_on_n(&self) -> bool {
        self.terms.keys().any(|(i, _)| *i > 0)
    }

    pub fn has_nonneg_coeffs(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    /// Nonzero, nonnegative coefficients and genuinely dependent on `n`.
    pub fn is_family_member(&self) -> bool {
        !self.is_zero() && self.has_nonneg_coeffs() && self.depends_on_n()
    }

    pub fn eval(&self, n: &BigInt, big_n: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for (&(i, j), c) in &self.terms {
            acc += c * num_traits::pow::pow(n.clone(), i as usize)
                * num_traits::pow::pow(big_n.clone(), j as usize);
        }
        acc
    }

    pub fn eval_u64(&self, n: u64, big_n: u64) -> BigInt {
        self.eval(&BigInt::from(n), &BigInt::from(big_n))
    }

    /// `i128` evaluation when the value fits, without allocating.
    pub fn eval_i128(&self, n: i128, big_n: i128) -> Option<i128> {
        let mut acc: i128 = 0;
        for (&(i, j), c) in &self.terms {
            let mut t: i128 = c.to_i128()?;
            for _ in 0..i {
                t = t.checked_mul(n)?;
            }
            for _ in 0..j {
                t = t.checked_mul(big_n)?;
            }
            acc = acc.checked_add(t)?;
        }
        Some(acc)
    }

    pub fn eval_f64(&self, n: f64, big_n: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), c)| {
                c.to_f64().unwrap_or(f64::NAN) * n.powi(i as i32) * big_n.powi(j as i32)
            })
            .sum()
    }

    pub fn eval_rat(&self, n: &Rat, big_n: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for (&(i, j), c) in &self.terms {
            acc += Rat::from_integer(c.clone()) * pow_rat(n, i) * pow_rat(big_n, j);
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = self.clone();
        for (&(i, j), c) in &other.terms {
            p.add_term(c.clone(), i, j);
        }
        p
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut p = Self::zero();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &other.terms {
                p.add_term(c1 * c2, i1 + i2, j1 + j2);
            }
        }
        p
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        let mut p = Self::zero();
        for (&(i, j), c) in &self.terms {
            p.add_term(c * k, i, j);
        }
        p
    }

    /// Univariate polynomial `x -> p(x, 0)`.
    pub fn n_part(&self) -> UniPoly {
        let mut v = Vec::new();
        for (&(i, j), c) in &self.terms {
            if j == 0 {
                set_coeff(&mut v, i as usize, Rat::from_integer(c.clone()));
            }
        }
        UniPoly::from_coeffs(v)
    }

    /// Univariate polynomial `x -> p(0, x)`.
    pub fn big_n_part(&self) -> UniPoly {
        let mut v = Vec::new();
        for (&(i, j), c) in &self.terms {
            if i == 0 {
                set_coeff(&mut v, j as usize, Rat::from_integer(c.clone()));
            }
        }
        UniPoly::from_coeffs(v)
    }

    /// Univariate polynomial `x -> p(x, x)`.
    pub fn diagonal(&self) -> UniPoly {
        let mut v = Vec::new();
        for (&(i, j), c) in &self.terms {
            let d = (i + j) as usize;
            let cur = v.get(d).cloned().unwrap_or_else(Rat::zero);
            set_coeff(&mut v, d, cur + Rat::from_integer(c.clone()));
        }
        UniPoly::from_coeffs(v)
    }

    /// True if `p` has no `n` dependence, i.e. `p = H(N)`.
    pub fn is_in_big_n_only(&self) -> bool {
        !self.depends_on_n()
    }

    /// Linear form `a n + b N` when the polynomial is exactly such a form.
    pub fn linear_form(&self) -> Option<(BigInt, BigInt)> {
        if self.degree()? != 1 || !self.coeff(0, 0).is_zero() {
            return None;
        }
        Some((self.coeff(1, 0), self.coeff(0, 1)))
    }

    pub fn to_rational(&self) -> RatBivariate {
        RatBivariate {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (*k, Rat::from_integer(c.clone())))
                .collect(),
        }
    }
}

fn set_coeff(v: &mut Vec<Rat>, idx: usize, c: Rat) {
    if v.len() <= idx {
        v.resize(idx + 1, Rat::zero());
    }
    v[idx] = c;
}

impl fmt::Display for BivariatePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<_> = self.terms.iter().collect();
        keys.sort_by(|a, b| {
            let (ia, ja) = *a.0;
            let (ib, jb) = *b.0;
            (ib + jb, ib).cmp(&(ia + ja, ia))
        });
        for (idx, (&(i, j), c)) in keys.into_iter().enumerate() {
            if c.is_negative() {
                write!(f, "-")?;
            } else if idx > 0 {
                write!(f, "+")?;
            }
            let a = c.abs();
            if !a.is_one() || (i == 0 && j == 0) {
                write!(f, "{a}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "n")?,
                _ => write!(f, "n^{i}")?,
            }
            match j {
                0 => {}
                1 => write!(f, "N")?,
                _ => write!(f, "N^{j}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for BivariatePoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Parser { s: s.as_bytes(), pos: 0 }.parse()
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn digits(&mut self) -> Option<&str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start).then(|| std::str::from_utf8(&self.s[start..self.pos]).unwrap())
    }

    fn exponent(&mut self) -> Result<u32> {
        if self.peek() != Some(b'^') {
            return Ok(1);
        }
        self.pos += 1;
        match self.digits() {
            Some(d) => d.parse().or_else(|_| self.err("exponent too large")),
            None => self.err("expected exponent after '^'"),
        }
    }

    fn parse(mut self) -> Result<BivariatePoly> {
        let mut p = BivariatePoly::zero();
        let mut sign = BigInt::one();
        if self.peek() == Some(b'-') {
            sign = -sign;
            self.pos += 1;
        }
        loop {
            let (c, i, j) = self.term()?;
            p.add_term(&sign * c, i, j);
            match self.peek() {
                None => break,
                Some(b'+') => sign = BigInt::one(),
                Some(b'-') => sign = -BigInt::one(),
                Some(_) => return self.err("expected '+' or '-'"),
            }
            self.pos += 1;
        }
        Ok(p)
    }

    fn term(&mut self) -> Result<(BigInt, u32, u32)> {
        let start = self.pos;
        let coeff = match self.digits() {
            Some(d) => d.parse::<BigInt>().unwrap(),
            None => BigInt::one(),
        };
        let mut i = 0;
        let mut j = 0;
        let mut seen_n = false;
        let mut seen_big_n = false;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                }
                Some(b'n') | Some(b'm') if !seen_n && !seen_big_n => {
                    self.pos += 1;
                    seen_n = true;
                    i = self.exponent()?;
                }
                Some(b'N') if !seen_big_n => {
                    self.pos += 1;
                    seen_big_n = true;
                    j = self.exponent()?;
                }
                _ => break,
            }
        }
        if self.pos == start || (self.s[start..self.pos].iter().all(|b| b.is_ascii_whitespace())) {
            return self.err("expected a term");
        }
        Ok((coeff, i, j))
    }
}

// ---------------------------------------------------------------------------
// Univariate rational polynomials
// ---------------------------------------------------------------------------

/// Univariate polynomial with rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct UniPoly {
    coeffs: Vec<Rat>,
}

impl UniPoly {
    pub fn from_coeffs(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::from_coeffs(c.iter().map(|&x| rat_int(x)).collect())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rat) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn leading(&self) -> Rat {
        self.coeffs.last().cloned().unwrap_or_else(Rat::zero)
    }

    /// Lowest index with a nonzero coefficient.
    pub fn lowest_degree(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + rat_to_f64(c);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * rat_int(i as i64))
                .collect(),
        )
    }

    /// `x -> p(c x)`.
    pub fn scale_arg(&self, c: &Rat) -> Self {
        let mut pw = Rat::one();
        let mut v = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            v.push(a * &pw);
            pw *= c;
        }
        Self::from_coeffs(v)
    }

    /// `x -> p(x + a)`; coefficient `s` of the result is `p^{(s)}(a) / s!`.
    pub fn shift(&self, a: &Rat) -> Self {
        let d = self.coeffs.len();
        let mut v = vec![Rat::zero(); d];
        for (i, c) in self.coeffs.iter().enumerate() {
            let mut apow = Rat::one();
            // c (x + a)^i = c sum_s binom(i, s) a^{i-s} x^s
            let mut col = vec![Rat::zero(); i + 1];
            for t in 0..=i {
                col[i - t] = Rat::from_integer(binomial(i as u32, t as u32)) * &apow;
                apow *= a;
            }
            for (s, b) in col.into_iter().enumerate() {
                v[s] += c * b;
            }
        }
        Self::from_coeffs(v)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::from_coeffs((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::from_coeffs((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut v = vec![Rat::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Self::from_coeffs(v)
    }

    pub fn scale(&self, k: &Rat) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn has_nonneg_coeffs(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})y")?,
                _ => write!(f, "({c})y^{i}")?,
            }
        }
        Ok(())
    }
}

/// Quotient of two univariate rational polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFunction {
    pub num: UniPoly,
    pub den: UniPoly,
}

impl RationalFunction {
    pub fn eval(&self, x: &Rat) -> Option<Rat> {
        let d = self.den.eval(x);
        (!d.is_zero()).then(|| self.num.eval(x) / d)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.num.eval_f64(x) / self.den.eval_f64(x)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Exact constant value when `num = k * den`.
    pub fn as_constant(&self) -> Option<Rat> {
        if self.num.is_zero() {
            return Some(Rat::zero());
        }
        let dn = self.num.degree()?;
        let dd = self.den.degree()?;
        if dn != dd {
            return None;
        }
        let k = self.num.leading() / self.den.leading();
        self.num.sub(&self.den.scale(&k)).is_zero().then_some(k)
    }
}

// ---------------------------------------------------------------------------
// Homogeneous decomposition and affine composition
// ---------------------------------------------------------------------------

/// `p(n, N) = sum_{d=0}^k N^d Q_d(n / N)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomDecomposition {
    pub k: u32,
    /// `parts[d] = Q_d`, for `d = 0..=k`.
    pub parts: Vec<UniPoly>,
    /// `x -> p(x, 0)`.
    pub n_part: UniPoly,
}

impl HomDecomposition {
    pub fn part(&self, d: i64) -> UniPoly {
        if d < 0 {
            return UniPoly::zero();
        }
        self.parts.get(d as usize).cloned().unwrap_or_default()
    }

    pub fn top(&self) -> &UniPoly {
        &self.parts[self.k as usize]
    }
}

pub fn hom_decompose(p: &BivariatePoly) -> Result<HomDecomposition> {
    let k = p
        .degree()
        .ok_or_else(|| Error::IllFormed("zero polynomial has no degree".into()))?;
    let mut parts = vec![Vec::<Rat>::new(); k as usize + 1];
    for (&(i, j), c) in p.terms() {
        set_coeff(&mut parts[(i + j) as usize], i as usize, Rat::from_integer(c.clone()));
    }
    let parts: Vec<UniPoly> = parts.into_iter().map(UniPoly::from_coeffs).collect();
    Ok(HomDecomposition {
        k,
        parts,
        n_part: p.n_part(),
    })
}

/// Bivariate polynomial with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RatBivariate {
    terms: BTreeMap<(u32, u32), Rat>,
}

impl RatBivariate {
    pub fn add_term(&mut self, c: Rat, i: u32, j: u32) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry((i, j)).or_insert_with(Rat::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, i: u32, j: u32) -> Rat {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (&(i, j), c) in &o.terms {
            r.add_term(-c, i, j);
        }
        r
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value when no monomial of positive degree survives.
    pub fn as_constant(&self) -> Option<Rat> {
        if self.terms.keys().any(|&(i, j)| i + j > 0) {
            return None;
        }
        Some(self.coeff(0, 0))
    }

    pub fn eval(&self, n: &Rat, big_n: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for (&(i, j), c) in &self.terms {
            acc += c * pow_rat(n, i) * pow_rat(big_n, j);
        }
        acc
    }

    /// Integer polynomial when every coefficient is integral.
    pub fn to_integer(&self) -> Option<BivariatePoly> {
        let mut p = BivariatePoly::zero();
        for (&(i, j), c) in &self.terms {
            if !c.is_integer() {
                return None;
            }
            p.add_term(c.to_integer(), i, j);
        }
        Some(p)
    }
}

/// `(n, N) -> p(c n + r, N)`.
pub fn compose_affine(p: &BivariatePoly, c: &Rat, r: &Rat) -> RatBivariate {
    let mut out = RatBivariate::default();
    for (&(i, j), a) in p.terms() {
        let a = Rat::from_integer(a.clone());
        // (c n + r)^i = sum_t binom(i, t) c^t r^{i-t} n^t
        for t in 0..=i {
            let b = Rat::from_integer(binomial(i, t)) * pow_rat(c, t) * pow_rat(r, i - t);
            out.add_term(&a * b, t, j);
        }
    }
    out
}

/// Exact rational `d`-th root when one exists.
pub fn rational_root(x: &Rat, d: u32) -> Option<Rat> {
    if x.is_negative() || d == 0 {
        return None;
    }
    let n = x.numer().nth_root(d);
    let m = x.denom().nth_root(d);
    let back = Rat::new(
        num_traits::pow::pow(n.clone(), d as usize),
        num_traits::pow::pow(m.clone(), d as usize),
    );
    (back == *x).then(|| Rat::new(n, m))
}

/// `gcd(a, b)` with `gcd(0, x) = |x|`.
pub fn gcd_int(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> BivariatePoly {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_print_canonical() {
        let q = p("n^2+3nN+N^2");
        assert_eq!(q.coeff(2, 0), BigInt::from(1));
        assert_eq!(q.coeff(1, 1), BigInt::from(3));
        assert_eq!(q.coeff(0, 2), BigInt::from(1));
        assert_eq!(q.to_string(), "n^2+3nN+N^2");
        assert_eq!(p("N + n").to_string(), "n+N");
        assert_eq!(p("7").to_string(), "7");
        assert_eq!(p("2*m^3 - n").to_string(), "2n^3-n");
        assert!("n^".parse::<BivariatePoly>().is_err());
        assert!("n+".parse::<BivariatePoly>().is_err());
        assert!("x".parse::<BivariatePoly>().is_err());
        assert!("".parse::<BivariatePoly>().is_err());
    }

    #[test]
    fn hom_decomposition_example() {
        let h = hom_decompose(&p("n^2+3nN+N^2")).unwrap();
        assert_eq!(h.k, 2);
        assert_eq!(h.parts[2], UniPoly::from_ints(&[1, 3, 1]));
        assert!(h.parts[1].is_zero() && h.parts[0].is_zero());
        assert_eq!(h.n_part, UniPoly::from_ints(&[0, 0, 1]));
    }

    #[test]
    fn compose_affine_example() {
        let q = p("n^2");
        let c = compose_affine(&q, &rat(1, 1), &rat(1, 2));
        // (n + 1/2)^2 = n^2 + n + 1/4
        assert_eq!(c.coeff(2, 0), rat(1, 1));
        assert_eq!(c.coeff(1, 0), rat(1, 1));
        assert_eq!(c.coeff(0, 0), rat(1, 4));
    }

    #[test]
    fn shift_gives_taylor_coefficients() {
        let q = UniPoly::from_ints(&[1, 2, 3]);
        let s = q.shift(&rat(2, 1));
        // q(x+2) = 3x^2 + 14x + 17
        assert_eq!(s, UniPoly::from_ints(&[17, 14, 3]));
    }

    #[test]
    fn rational_roots() {
        assert_eq!(rational_root(&rat(4, 9), 2), Some(rat(2, 3)));
        assert_eq!(rational_root(&rat(2, 1), 2), None);
        assert_eq!(rational_root(&rat(27, 8), 3), Some(rat(3, 2)));
    }

    fn arb_poly() -> impl Strategy<Value = BivariatePoly> {
        prop::collection::vec((-50i64..50, 0u32..4, 0u32..4), 0..6)
            .prop_map(BivariatePoly::from_terms)
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(q in arb_poly()) {
            let s = q.to_string();
            let back: BivariatePoly = s.parse().unwrap();
            prop_assert_eq!(&back, &q);
            prop_assert_eq!(back.to_string(), s);
        }

        #[test]
        fn hom_parts_reassemble(q in arb_poly(), n in 0i64..40, big_n in 1i64..40) {
            prop_assume!(!q.is_zero());
            let h = hom_decompose(&q).unwrap();
            let y = rat(n, big_n);
            let bn = rat_int(big_n);
            let mut acc = Rat::zero();
            for (d, part) in h.parts.iter().enumerate() {
                acc += pow_rat(&bn, d as u32) * part.eval(&y);
            }
            prop_assert_eq!(acc, rat_int(q.eval_u64(n as u64, big_n as u64)));
        }

        #[test]
        fn compose_affine_matches_eval(q in arb_poly(), c in 1i64..5, r in -5i64..5, n in 0i64..30, big_n in 1i64..30) {
            let cr = rat(c, 2);
            let rr = rat(r, 3);
            let comp = compose_affine(&q, &cr, &rr);
            let direct = q.to_rational().eval(&(&cr * rat_int(n) + &rr), &rat_int(big_n));
            prop_assert_eq!(comp.eval(&rat_int(n), &rat_int(big_n)), direct);
        }
    }
}
