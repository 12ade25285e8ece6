//! Finite-N ordering partition of `[1, N]` by the relative order of the
//! values `q_i(n, N)`, the index distance `d_N` and family validation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

pub use crate::classify::PolyFamily;
use crate::classify::{classify_pair, Explodes, PairVerdict};
use crate::error::{pre, Result};
use crate::polyalg::BivariatePoly;

fn value(q: &BivariatePoly, n: u64, big_n: u64) -> BigInt {
    match q.eval_i128(n as i128, big_n as i128) {
        Some(v) => BigInt::from(v),
        None => q.eval_u64(n, big_n),
    }
}

/// `min_{i,j} |q_i(n, N) - q_j(m, N)|`.
pub fn d_min(family: &PolyFamily, n: u64, m: u64, big_n: u64) -> Result<BigInt> {
    if n == 0 || m == 0 || big_n == 0 {
        return pre("n, m and N must be positive");
    }
    let a: Vec<BigInt> = family.members().iter().map(|q| value(q, n, big_n)).collect();
    let b: Vec<BigInt> = family.members().iter().map(|q| value(q, m, big_n)).collect();
    Ok(a.iter()
        .flat_map(|x| b.iter().map(move |y| (x - y).abs()))
        .min()
        .expect("families are nonempty"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub lo: u64,
    pub hi: u64,
    /// Zero-based member indices in increasing order of value.
    pub perm: Vec<usize>,
    /// Smallest difference between consecutive (in `perm`) values of members
    /// sharing a nonlinear degree, over the whole segment.
    pub min_same_degree_gap: Option<u64>,
    /// The same minimum restricted to `n >= N / 10`.
    pub interior_min_gap: Option<u64>,
}

impl Segment {
    pub fn len(&self) -> u64 {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrderingPartition {
    #[serde(rename = "N")]
    pub n_max: u64,
    pub segments: Vec<Segment>,
    pub exceptional: Vec<u64>,
}

impl OrderingPartition {
    /// Segment containing `n`, if any.
    pub fn segment_of(&self, n: u64) -> Option<&Segment> {
        let idx = self.segments.partition_point(|s| s.hi < n);
        self.segments.get(idx).filter(|s| s.lo <= n)
    }

    /// Fraction of `[1, N]` covered by segments with permutation `perm`.
    pub fn measure(&self, perm: &[usize]) -> f64 {
        self.segments
            .iter()
            .filter(|s| s.perm == perm)
            .map(|s| s.len())
            .sum::<u64>() as f64
            / self.n_max as f64
    }

    /// Distinct permutations in order of first appearance.
    pub fn perms(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for s in &self.segments {
            if !out.contains(&s.perm) {
                out.push(s.perm.clone());
            }
        }
        out
    }
}

struct Point {
    perm: Option<Vec<usize>>,
    gap: Option<u64>,
}

fn scan_point(family: &PolyFamily, n: u64, big_n: u64) -> Point {
    let vals: Vec<BigInt> = family.members().iter().map(|q| value(q, n, big_n)).collect();
    let mut perm: Vec<usize> = (0..vals.len()).collect();
    perm.sort_by(|&a, &b| vals[a].cmp(&vals[b]).then(a.cmp(&b)));
    if perm.windows(2).any(|w| vals[w[0]] == vals[w[1]]) {
        return Point { perm: None, gap: None };
    }
    // Consecutive members of a common nonlinear degree, in the sorted order of
    // that degree class.
    let mut gap: Option<u64> = None;
    let mut last_by_degree: Vec<(u32, usize)> = Vec::new();
    for &i in &perm {
        let d = family.degree(i);
        if d < 2 {
            continue;
        }
        if let Some(&(_, prev)) = last_by_degree.iter().find(|(dd, _)| *dd == d) {
            let g = &vals[i] - &vals[prev];
            let g = u64::try_from(g).unwrap_or(u64::MAX);
            gap = Some(gap.map_or(g, |x| x.min(g)));
        }
        last_by_degree.retain(|(dd, _)| *dd != d);
        last_by_degree.push((d, i));
    }
    Point { perm: Some(perm), gap }
}

fn merge_min(a: Option<u64>, b: Option<u64>) -> Option<u64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

pub fn scan_partition(family: &PolyFamily, big_n: u64) -> Result<OrderingPartition> {
    let ell = family.len() as u64;
    if big_n < ell * ell {
        return pre("N must be at least l^2");
    }
    let points: Vec<Point> = (1..=big_n)
        .into_par_iter()
        .map(|n| scan_point(family, n, big_n))
        .collect();
    let interior_from = big_n.div_ceil(10);
    let mut runs: Vec<Segment> = Vec::new();
    let mut exceptional = Vec::new();
    for (pt, n) in points.into_iter().zip(1u64..) {
        let Some(perm) = pt.perm else {
            exceptional.push(n);
            continue;
        };
        let interior = if n >= interior_from { pt.gap } else { None };
        match runs.last_mut() {
            Some(s) if s.hi + 1 == n && s.perm == perm => {
                s.hi = n;
                s.min_same_degree_gap = merge_min(s.min_same_degree_gap, pt.gap);
                s.interior_min_gap = merge_min(s.interior_min_gap, interior);
            }
            _ => runs.push(Segment {
                lo: n,
                hi: n,
                perm,
                min_same_degree_gap: pt.gap,
                interior_min_gap: interior,
            }),
        }
    }
    let min_len = (big_n as f64).sqrt().ceil() as u64;
    let mut segments = Vec::new();
    for s in runs {
        if s.len() < min_len {
            exceptional.extend(s.lo..=s.hi);
        } else {
            segments.push(s);
        }
    }
    exceptional.sort_unstable();
    Ok(OrderingPartition {
        n_max: big_n,
        segments,
        exceptional,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairReport {
    pub i: usize,
    pub j: usize,
    pub verdict: PairVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyDiagnostics {
    pub a1_ok: bool,
    /// Linear pairs `(i, j)` violating the divisibility condition.
    pub a1_violations: Vec<(usize, usize)>,
    pub a2_report: Vec<PairReport>,
    /// Pairs whose classification is `Unknown`; reported, not failed.
    pub warnings: Vec<String>,
    pub degree_ok: bool,
    pub nonconstant_diffs_ok: bool,
}

impl FamilyDiagnostics {
    pub fn ok(&self) -> bool {
        self.a1_ok && self.degree_ok && self.nonconstant_diffs_ok
    }
}

/// `(a_i - a_j)` divisible by `gcd(b_i, b_j)`, with `gcd(0, x) = |x|`.
pub fn a1_pair_ok(ai: &BigInt, bi: &BigInt, aj: &BigInt, bj: &BigInt) -> bool {
    let g = bi.gcd(bj);
    let diff = ai - aj;
    if g.is_zero() {
        return diff.is_zero();
    }
    (diff % g).is_zero()
}

pub fn validate_family(family: &PolyFamily) -> Result<FamilyDiagnostics> {
    let ell = family.len();
    let mut a1_violations = Vec::new();
    for i in 0..ell {
        for j in i + 1..ell {
            if let (Some((ai, bi)), Some((aj, bj))) = (family.linear_form(i), family.linear_form(j)) {
                if !a1_pair_ok(&ai, &bi, &aj, &bj) {
                    a1_violations.push((i, j));
                }
            }
        }
    }
    let degree_ok = (1..ell).all(|i| family.degree(i - 1) <= family.degree(i));
    let nonconstant_diffs_ok = (0..ell).all(|i| {
        (i + 1..ell).all(|j| {
            let d = family.member(i).sub(family.member(j));
            d.degree().unwrap_or(0) > 0
        })
    });
    let mut a2_report = Vec::new();
    let mut warnings = Vec::new();
    for i in 0..ell {
        for j in i + 1..ell {
            if family.is_linear(i) || family.degree(i) != family.degree(j) {
                continue;
            }
            let verdict = classify_pair(family.member(i), family.member(j))?;
            if verdict.explodes == Explodes::Unknown {
                warnings.push(format!(
                    "pair ({}, {}) = ({}, {}) could not be classified",
                    i + 1,
                    j + 1,
                    family.member(i),
                    family.member(j)
                ));
            }
            a2_report.push(PairReport { i, j, verdict });
        }
    }
    Ok(FamilyDiagnostics {
        a1_ok: a1_violations.is_empty(),
        a1_violations,
        a2_report,
        warnings,
        degree_ok,
        nonconstant_diffs_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(s: &str) -> PolyFamily {
        PolyFamily::parse(s).unwrap()
    }

    #[test]
    fn d_min_examples() {
        assert_eq!(d_min(&fam("n, n+N"), 1, 2, 10).unwrap(), BigInt::from(1));
        assert_eq!(d_min(&fam("n^2, n+N"), 7, 7, 10).unwrap(), BigInt::from(0));
        assert_eq!(d_min(&fam("n^2, n^3"), 2, 3, 5).unwrap(), BigInt::from(1));
    }

    #[test]
    fn scan_examples() {
        let part = scan_partition(&fam("3n, n+N"), 100).unwrap();
        assert_eq!(part.segments.len(), 2);
        assert_eq!((part.segments[0].lo, part.segments[0].hi), (1, 49));
        assert_eq!(part.segments[0].perm, vec![0, 1]);
        assert_eq!((part.segments[1].lo, part.segments[1].hi), (51, 100));
        assert_eq!(part.segments[1].perm, vec![1, 0]);
        assert_eq!(part.exceptional, vec![50]);

        let part = scan_partition(&fam("2n, n+N"), 100).unwrap();
        assert_eq!(part.segments.len(), 1);
        assert_eq!((part.segments[0].lo, part.segments[0].hi), (1, 99));
        assert_eq!(part.exceptional, vec![100]);

        let part = scan_partition(&fam("n^2, n^2+n"), 100).unwrap();
        assert_eq!(part.segments.len(), 1);
        assert_eq!(part.segments[0].min_same_degree_gap, Some(1));
        assert_eq!(part.segments[0].interior_min_gap, Some(10));
        assert_eq!(part.segment_of(37).map(|s| s.lo), Some(1));
    }

    #[test]
    fn short_runs_become_exceptional() {
        // n^2 < n + N only for n < ~sqrt(N) + 1/2.
        let part = scan_partition(&fam("n+N, n^2"), 400).unwrap();
        let covered: u64 = part.segments.iter().map(|s| s.len()).sum();
        assert_eq!(covered + part.exceptional.len() as u64, 400);
        assert!(part.segments.iter().all(|s| s.len() >= 20));
    }

    #[test]
    fn a1_examples() {
        let d = validate_family(&fam("n+2N, 3n+4N")).unwrap();
        assert!(d.a1_ok);
        let d = validate_family(&fam("n+2N, 2n+4N")).unwrap();
        assert!(!d.a1_ok);
        assert!(a1_pair_ok(&3.into(), &0.into(), &3.into(), &0.into()));
        assert!(!a1_pair_ok(&3.into(), &0.into(), &2.into(), &0.into()));
        let d = validate_family(&fam("n^2, n")).unwrap();
        assert!(!d.degree_ok);
        let d = validate_family(&fam("n^2, n^2+1")).unwrap();
        assert!(!d.nonconstant_diffs_ok);
        let d = validate_family(&fam("n, n^2+nN, n^2")).unwrap();
        assert!(d.ok());
        assert_eq!(d.warnings.len(), 1);
    }
}
