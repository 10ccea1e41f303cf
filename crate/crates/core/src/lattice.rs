//! The lattice `Z^m`: l1 balls, subgroups in Hermite normal form, and exact
//! covering numbers of the space of its subgroups.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use rayon::prelude::*;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::metric::{BallFingerprint, Geometry};

/// A point of `Z^m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint(pub Vec<i64>);

impl LatticePoint {
    pub fn zero(m: usize) -> Self {
        LatticePoint(vec![0; m])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> u64 {
        self.0.iter().map(|x| x.unsigned_abs()).sum()
    }

    pub fn neg(&self) -> Self {
        LatticePoint(self.0.iter().map(|x| -x).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        LatticePoint(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// `b_n = sum_k 2^k C(m, k) C(n, k)`, the number of points of l1 norm at most `n`.
pub fn l1_ball_count(m: usize, n: u32) -> Option<u128> {
    (0..=m.min(n as usize) as u128).try_fold(0u128, |acc, k| {
        let term = 1u128
            .checked_shl(k as u32)?
            .checked_mul(binomial(m as u128, k)?)?
            .checked_mul(binomial(n as u128, k)?)?;
        acc.checked_add(term)
    })
}

fn push_sphere(m: usize, norm: i64, prefix: &mut Vec<i64>, out: &mut Vec<LatticePoint>) {
    let used: i64 = prefix.iter().map(|x| x.abs()).sum();
    let left = norm - used;
    if prefix.len() + 1 == m {
        if left == 0 {
            prefix.push(0);
            out.push(LatticePoint(prefix.clone()));
            prefix.pop();
        } else {
            for x in [-left, left] {
                prefix.push(x);
                out.push(LatticePoint(prefix.clone()));
                prefix.pop();
            }
        }
        return;
    }
    for x in -left..=left {
        prefix.push(x);
        push_sphere(m, norm, prefix, out);
        prefix.pop();
    }
}

/// Points of l1 norm at most `n`, by norm and then lexicographically.
pub fn l1_ball(m: usize, n: u32, budget: &Budget) -> Result<Vec<LatticePoint>> {
    if m == 0 {
        return Err(Error::AlphabetSize(0));
    }
    let total = l1_ball_count(m, n).ok_or(Error::Overflow("l1 ball size"))?;
    budget.check(total)?;
    let mut out = Vec::with_capacity(total as usize);
    for k in 0..=n as i64 {
        push_sphere(m, k, &mut Vec::with_capacity(m), &mut out);
    }
    debug_assert_eq!(out.len() as u128, total);
    Ok(out)
}

/// A subgroup of `Z^m` as its row Hermite normal form: echelon rows with
/// positive pivots, entries above each pivot reduced into `[0, pivot)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HnfMatrix {
    m: usize,
    rows: Vec<Vec<i64>>,
}

impl HnfMatrix {
    pub fn trivial(m: usize) -> Self {
        HnfMatrix { m, rows: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    fn pivot(row: &[i64]) -> usize {
        row.iter().position(|&x| x != 0).expect("nonzero row")
    }

    /// Membership by solving the triangular system over the integers.
    pub fn contains(&self, p: &LatticePoint) -> bool {
        let mut x = p.0.clone();
        for row in &self.rows {
            let c = Self::pivot(row);
            if x[..c].iter().any(|&v| v != 0) {
                return false;
            }
            if x[c] % row[c] != 0 {
                return false;
            }
            let q = x[c] / row[c];
            for (xi, ri) in x.iter_mut().zip(row) {
                *xi -= q * ri;
            }
        }
        x.iter().all(|&v| v == 0)
    }

    /// Text form: the rank on the first line, then one row per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.rank());
        for r in &self.rows {
            let parts: Vec<String> = r.iter().map(i64::to_string).collect();
            s.push_str(&parts.join(" "));
            s.push('\n');
        }
        s
    }

    /// Parses [`HnfMatrix::to_text`] output for `Z^m` and renormalizes it.
    pub fn parse(text: &str, m: usize) -> Result<Self> {
        let bad = |why: String| Error::InvalidArgument(format!("malformed HNF text: {why}"));
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let rank: usize = lines
            .next()
            .ok_or_else(|| bad("missing rank line".into()))?
            .parse()
            .map_err(|_| bad("rank is not an integer".into()))?;
        let mut gens = Vec::with_capacity(rank);
        for line in lines {
            let row: Vec<i64> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| bad(format!("bad entry {t:?}"))))
                .collect::<Result<_>>()?;
            if row.len() != m {
                return Err(bad(format!("row has {} entries, expected {m}", row.len())));
            }
            gens.push(LatticePoint(row));
        }
        if gens.len() != rank {
            return Err(bad(format!("rank {rank} but {} rows", gens.len())));
        }
        let h = hnf(m, &gens)?;
        if h.rank() != rank {
            return Err(bad("rows are linearly dependent".into()));
        }
        Ok(h)
    }
}

impl fmt::Display for HnfMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| format!("[{}]", r.iter().map(i64::to_string).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

fn sub_mul(a: &mut [i64], b: &[i64], q: i64) -> Result<()> {
    for (x, y) in a.iter_mut().zip(b) {
        *x = q
            .checked_mul(*y)
            .and_then(|t| x.checked_sub(t))
            .ok_or(Error::Overflow("HNF entries"))?;
    }
    Ok(())
}

/// Canonical HNF of the subgroup generated by `gens` in `Z^m`.
pub fn hnf(m: usize, gens: &[LatticePoint]) -> Result<HnfMatrix> {
    if let Some(g) = gens.iter().find(|g| g.dim() != m) {
        return Err(Error::InvalidArgument(format!("point {g} is not in Z^{m}")));
    }
    let mut rows: Vec<Vec<i64>> = gens.iter().map(|g| g.0.clone()).filter(|r| r.iter().any(|&x| x != 0)).collect();
    let mut out: Vec<Vec<i64>> = Vec::new();
    for c in 0..m {
        // Euclid on column c among the remaining rows
        loop {
            let nz: Vec<usize> = (0..rows.len()).filter(|&i| rows[i][c] != 0).collect();
            if nz.len() <= 1 {
                break;
            }
            let p = *nz.iter().min_by_key(|&&i| rows[i][c].unsigned_abs()).unwrap();
            let pivot_row = rows[p].clone();
            for &i in &nz {
                if i != p {
                    let q = rows[i][c].div_euclid(pivot_row[c]);
                    sub_mul(&mut rows[i], &pivot_row, q)?;
                }
            }
        }
        if let Some(i) = rows.iter().position(|r| r[c] != 0) {
            let mut r = rows.swap_remove(i);
            if r[c] < 0 {
                r.iter_mut().for_each(|x| *x = -*x);
            }
            for prev in out.iter_mut() {
                let q = prev[c].div_euclid(r[c]);
                sub_mul(prev, &r, q)?;
            }
            out.push(r);
        }
        rows.retain(|r| r.iter().any(|&x| x != 0));
    }
    debug_assert!(rows.is_empty());
    Ok(HnfMatrix { m, rows: out })
}

/// Bitmap of the ball points lying in `h`.
pub fn subgroup_fingerprint(h: &HnfMatrix, n: u32, budget: &Budget) -> Result<BallFingerprint> {
    let ball = l1_ball(h.m, n, budget)?;
    Ok(fingerprint_over(h, n, &ball))
}

fn fingerprint_over(h: &HnfMatrix, n: u32, ball: &[LatticePoint]) -> BallFingerprint {
    let mut f = BallFingerprint::empty(Geometry::Lattice { m: h.m }, n);
    for (i, p) in ball.iter().enumerate() {
        if h.contains(p) {
            f.set(i);
        }
    }
    f
}

/// `sum_{l=0}^m C(b_n, l)`, the a priori bound on the covering number.
pub fn covering_bound(m: usize, n: u32) -> Option<u128> {
    subsets_up_to(l1_ball_count(m, n)?, m)
}

fn subsets_up_to(b: u128, k: usize) -> Option<u128> {
    (0..=k as u128).try_fold(0u128, |acc, l| acc.checked_add(binomial(b, l)?))
}

/// Largest rank handled exhaustively.
pub const MAX_EXHAUSTIVE_RANK: usize = 2;

/// Subgroups generated by ball points, found by closing the trivial
/// subgroup under "add one ball point". Each such subgroup is generated by
/// its own ball points, so distinct ones have distinct fingerprints.
pub fn ball_generated_subgroups(m: usize, n: u32, budget: &Budget) -> Result<Vec<HnfMatrix>> {
    if m > MAX_EXHAUSTIVE_RANK {
        return Err(Error::ExhaustiveRefused { m, bound: covering_bound(m, n).unwrap_or(u128::MAX) });
    }
    let ball = l1_ball(m, n, budget)?;
    let mut seen: HashSet<HnfMatrix> = HashSet::new();
    let start = HnfMatrix::trivial(m);
    seen.insert(start.clone());
    let mut queue = VecDeque::from([start]);
    let mut work: u128 = 0;
    while let Some(h) = queue.pop_front() {
        work += ball.len() as u128;
        budget.check(work)?;
        let next: Vec<HnfMatrix> = ball
            .par_iter()
            .filter(|p| !h.contains(p))
            .map(|p| {
                let mut gens: Vec<LatticePoint> = h.rows.iter().cloned().map(LatticePoint).collect();
                gens.push(p.clone());
                hnf(m, &gens)
            })
            .collect::<Result<_>>()?;
        for g in next {
            if seen.insert(g.clone()) {
                queue.push_back(g);
            }
        }
    }
    let mut out: Vec<HnfMatrix> = seen.into_iter().collect();
    out.sort();
    Ok(out)
}

/// Exact `N(G(Z^m), 2^-n)` for `m <= 2`; larger ranks are refused with the
/// a priori bound.
pub fn covering_number_zm(m: usize, n: u32, budget: &Budget) -> Result<usize> {
    Ok(ball_generated_subgroups(m, n, budget)?.len())
}

/// Covering number through subgroups generated by at most `m + 1` ball
/// points, deduplicated by fingerprint.
pub fn covering_number_zm_subsets(m: usize, n: u32, budget: &Budget) -> Result<usize> {
    if m > MAX_EXHAUSTIVE_RANK {
        return Err(Error::ExhaustiveRefused { m, bound: covering_bound(m, n).unwrap_or(u128::MAX) });
    }
    let ball = l1_ball(m, n, budget)?;
    budget.check(subsets_up_to(ball.len() as u128, m + 1).unwrap_or(u128::MAX))?;
    let mut found: HashSet<HnfMatrix> = HashSet::new();
    let mut idx = Vec::with_capacity(m + 1);
    subsets(&ball, 0, m + 1, &mut idx, &mut |t| {
        let gens: Vec<LatticePoint> = t.iter().map(|&i| ball[i].clone()).collect();
        found.insert(hnf(m, &gens).expect("small entries"));
    });
    let fps: HashSet<BallFingerprint> = found.iter().map(|h| fingerprint_over(h, n, &ball)).collect();
    Ok(fps.len())
}

fn subsets(ball: &[LatticePoint], from: usize, left: usize, idx: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    f(idx);
    if left == 0 {
        return;
    }
    for i in from..ball.len() {
        idx.push(i);
        subsets(ball, i + 1, left - 1, idx, f);
        idx.pop();
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZmDimRow {
    pub n: u32,
    pub ball: u128,
    /// `b_n / n^m`, tending to `2^m / m!`.
    pub volume_ratio: f64,
    pub exact: Option<usize>,
    /// `sum_{l<=m} C(b_n, l)`.
    pub subset_bound: Option<u128>,
    /// `b_n^(m+1)`.
    pub power_bound: f64,
    pub count: f64,
    pub s: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZmDimReport {
    pub m: usize,
    /// `2^m / m!`.
    pub volume: f64,
    pub rows: Vec<ZmDimRow>,
}

pub fn zm_dimension_experiment(
    m: usize,
    ns: impl IntoIterator<Item = u32>,
    budget: &Budget,
) -> Result<ZmDimReport> {
    if m == 0 {
        return Err(Error::AlphabetSize(0));
    }
    let volume = 2f64.powi(m as i32) / (1..=m).map(|k| k as f64).product::<f64>();
    let mut rows = Vec::new();
    for n in ns {
        let ball = l1_ball_count(m, n).ok_or(Error::Overflow("l1 ball size"))?;
        let exact = if m <= MAX_EXHAUSTIVE_RANK {
            match covering_number_zm(m, n, budget) {
                Ok(c) => Some(c),
                Err(e) if e.is_budget() => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        let power_bound = (ball as f64).powi(m as i32 + 1);
        let count = exact.map_or(power_bound, |c| c as f64);
        rows.push(ZmDimRow {
            n,
            ball,
            volume_ratio: if n == 0 { f64::NAN } else { ball as f64 / (n as f64).powi(m as i32) },
            exact,
            subset_bound: covering_bound(m, n),
            power_bound,
            count,
            s: (n > 0).then(|| count.log2() / n as f64),
        });
    }
    Ok(ZmDimReport { m, volume, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(xs: &[i64]) -> LatticePoint {
        LatticePoint(xs.to_vec())
    }

    #[test]
    fn ball_examples() {
        let b = Budget::default();
        assert_eq!(l1_ball(1, 3, &b).unwrap().len(), 7);
        assert_eq!(l1_ball(2, 1, &b).unwrap().len(), 5);
        assert_eq!(l1_ball(2, 2, &b).unwrap().len(), 13);
        let ball = l1_ball(2, 1, &b).unwrap();
        assert_eq!(ball, vec![p(&[0, 0]), p(&[-1, 0]), p(&[0, -1]), p(&[0, 1]), p(&[1, 0])]);
        for n in 0..10 {
            assert_eq!(l1_ball_count(2, n), Some(2 * (n as u128).pow(2) + 2 * n as u128 + 1));
        }
    }

    #[test]
    fn hnf_examples() {
        let h = hnf(2, &[p(&[2, 0]), p(&[0, 2])]).unwrap();
        assert_eq!(h.rows(), &[vec![2, 0], vec![0, 2]]);
        let h = hnf(2, &[p(&[1, 1]), p(&[1, -1])]).unwrap();
        assert_eq!(h.rows(), &[vec![1, 1], vec![0, 2]]);
        assert_eq!(hnf(2, &[]).unwrap().rank(), 0);
        let h = hnf(3, &[p(&[4, 6, 0]), p(&[6, 4, 2]), p(&[0, 0, 0])]).unwrap();
        assert_eq!(hnf(3, &h.rows().iter().cloned().map(LatticePoint).collect::<Vec<_>>()).unwrap(), h);
        assert_eq!(HnfMatrix::parse(&h.to_text(), 3).unwrap(), h);
        assert!(hnf(2, &[p(&[1])]).is_err());
    }

    #[test]
    fn fingerprint_examples() {
        let b = Budget::default();
        let two_z = hnf(1, &[p(&[2])]).unwrap();
        let f = subgroup_fingerprint(&two_z, 3, &b).unwrap();
        let ball = l1_ball(1, 3, &b).unwrap();
        let pts: Vec<&LatticePoint> = f.ones().map(|i| &ball[i]).collect();
        assert_eq!(pts, [&p(&[0]), &p(&[-2]), &p(&[2])]);
        let f = subgroup_fingerprint(&HnfMatrix::trivial(2), 4, &b).unwrap();
        assert_eq!(f.ones().collect::<Vec<_>>(), [0]);
        let h = hnf(2, &[p(&[1, 1]), p(&[0, 2])]).unwrap();
        assert_eq!(subgroup_fingerprint(&h, 1, &b).unwrap().ones().collect::<Vec<_>>(), [0]);
    }

    #[test]
    fn covering_examples() {
        let b = Budget::default();
        assert_eq!(covering_number_zm(1, 3, &b).unwrap(), 4);
        assert_eq!(covering_number_zm(1, 1, &b).unwrap(), 2);
        assert_eq!(covering_number_zm(2, 1, &b).unwrap(), 4);
        for n in 1..=3 {
            assert_eq!(covering_number_zm(2, n, &b).unwrap(), covering_number_zm_subsets(2, n, &b).unwrap());
        }
        assert!(matches!(covering_number_zm(3, 2, &b), Err(Error::ExhaustiveRefused { m: 3, .. })));
    }

    #[test]
    fn dimension_rows() {
        let r = zm_dimension_experiment(1, [1, 20], &Budget::default()).unwrap();
        assert_eq!(r.rows[0].s, Some(1.0));
        assert!((r.rows[1].s.unwrap() - 0.219_616).abs() < 1e-5);
        let r2 = zm_dimension_experiment(3, [2], &Budget::default()).unwrap();
        assert!(r2.rows[0].exact.is_none());
        assert!((r2.volume - 4.0 / 3.0).abs() < 1e-12);
    }
}
