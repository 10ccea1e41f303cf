//! The ultrametric `d(A, B) = 2^-nu(A, B)` on subsets of a finitely generated
//! group, computed through ball restrictions ("fingerprints"), together with
//! exact covering numbers and box-counting dimension sequences.
//!
//! A fingerprint is the membership bitmap of a set restricted to the ball of
//! some radius, in the canonical order of that ball. Canonical orders list
//! elements by length first, so the restriction to a smaller radius is a
//! prefix of the bitmap.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::lattice;
use crate::budget::Budget;
use crate::word::{self, ball_count, letter_at_rank, visit_layer_from, Ball, FreeAlphabet, Letter, Word};

/// The ambient ball structure a fingerprint is indexed by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Geometry {
    /// Reduced words of the free group of rank `m`.
    Free { m: usize },
    /// Points of `Z^m` under the l1 norm.
    Lattice { m: usize },
}

impl Geometry {
    pub fn rank(&self) -> usize {
        match *self {
            Geometry::Free { m } | Geometry::Lattice { m } => m,
        }
    }

    /// Number of elements of length at most `r`.
    pub fn ball_count(&self, r: u32) -> u128 {
        match *self {
            Geometry::Free { m } => word::ball_count(m, r).expect("ball size overflow"),
            Geometry::Lattice { m } => lattice::l1_ball_count(m, r).expect("ball size overflow"),
        }
    }

    /// Length of the element at canonical position `index`.
    pub fn radius_of_index(&self, index: usize) -> u32 {
        let mut r = 0;
        while self.ball_count(r) <= index as u128 {
            r += 1;
        }
        r
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Geometry::Free { m } => write!(f, "F_{m}"),
            Geometry::Lattice { m } => write!(f, "Z^{m}"),
        }
    }
}

/// Membership bitmap of a set restricted to the ball of radius `radius`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BallFingerprint {
    geometry: Geometry,
    radius: u32,
    len: usize,
    blocks: Vec<u64>,
}

impl BallFingerprint {
    pub fn empty(geometry: Geometry, radius: u32) -> Self {
        let len = geometry.ball_count(radius) as usize;
        BallFingerprint { geometry, radius, len, blocks: vec![0; len.div_ceil(64)] }
    }

    pub fn from_bits(geometry: Geometry, radius: u32, bits: &[bool]) -> Result<Self> {
        let mut fp = BallFingerprint::empty(geometry, radius);
        if bits.len() != fp.len {
            return Err(Error::ParseFingerprint(format!(
                "expected {} bits for radius {radius} in {geometry}, got {}",
                fp.len,
                bits.len()
            )));
        }
        for (i, &b) in bits.iter().enumerate() {
            if b {
                fp.set(i);
            }
        }
        Ok(fp)
    }

    /// Fingerprint of the set described by `contains` over an enumerated ball.
    pub fn from_predicate<F: Fn(&Word) -> bool + Sync>(ball: &Ball, contains: F) -> Self {
        use rayon::prelude::*;
        let bits: Vec<bool> = ball.words().par_iter().map(&contains).collect();
        BallFingerprint::from_bits(Geometry::Free { m: ball.rank() }, ball.radius(), &bits)
            .expect("ball length matches geometry")
    }

    /// Fingerprint of a set over the free ball of radius `radius`, streaming
    /// the words instead of materializing them.
    pub fn from_letters_predicate<F: Fn(&[Letter]) -> bool + Sync>(
        m: usize,
        radius: u32,
        budget: &Budget,
        contains: F,
    ) -> Result<Self> {
        use rayon::prelude::*;
        FreeAlphabet::new(m)?;
        budget.check(ball_count(m, radius).ok_or(Error::Overflow("ball size"))?)?;
        let mut bits = vec![contains(&[])];
        for len in 1..=radius as usize {
            let shards: Vec<Vec<bool>> = (0..2 * m)
                .into_par_iter()
                .map(|r| {
                    let mut out = Vec::new();
                    visit_layer_from(m, len, letter_at_rank(r), &mut |s| out.push(contains(s)));
                    out
                })
                .collect();
            bits.extend(shards.into_iter().flatten());
        }
        BallFingerprint::from_bits(Geometry::Free { m }, radius, &bits)
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    /// Number of ball elements, `beta(radius)`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        self.blocks[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize) {
        assert!(i < self.len);
        self.blocks[i / 64] |= 1 << (i % 64);
    }

    pub fn count_ones(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    /// The fingerprint of the same set at a smaller radius.
    pub fn restrict(&self, radius: u32) -> Result<Self> {
        if radius > self.radius {
            return Err(Error::RadiusMismatch { have: self.radius, want: radius });
        }
        let len = self.geometry.ball_count(radius) as usize;
        let mut blocks = self.blocks[..len.div_ceil(64)].to_vec();
        if !len.is_multiple_of(64) {
            *blocks.last_mut().unwrap() &= (1u64 << (len % 64)) - 1;
        }
        Ok(BallFingerprint { geometry: self.geometry, radius, len, blocks })
    }

    /// First canonical position where the two bitmaps disagree.
    pub fn first_difference(&self, other: &Self) -> Option<usize> {
        debug_assert_eq!(self.len, other.len);
        self.blocks
            .iter()
            .zip(&other.blocks)
            .enumerate()
            .find(|(_, (a, b))| a != b)
            .map(|(k, (a, b))| k * 64 + (a ^ b).trailing_zeros() as usize)
    }

    /// Bitmap as hex, most significant bit of each nibble first.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.len.div_ceil(4));
        for nib in 0..self.len.div_ceil(4) {
            let mut v = 0u8;
            for j in 0..4 {
                let i = nib * 4 + j;
                if i < self.len && self.get(i) {
                    v |= 8 >> j;
                }
            }
            s.push(char::from_digit(v as u32, 16).unwrap());
        }
        s
    }

    pub fn from_hex(geometry: Geometry, radius: u32, hex: &str) -> Result<Self> {
        let mut fp = BallFingerprint::empty(geometry, radius);
        let hex = hex.trim();
        if hex.len() != fp.len.div_ceil(4) {
            return Err(Error::ParseFingerprint(format!(
                "expected {} hex digits, got {}",
                fp.len.div_ceil(4),
                hex.len()
            )));
        }
        for (nib, ch) in hex.chars().enumerate() {
            let v = ch
                .to_digit(16)
                .ok_or_else(|| Error::ParseFingerprint(format!("bad hex digit {ch:?}")))?;
            for j in 0..4 {
                if v & (8 >> j) != 0 {
                    let i = nib * 4 + j;
                    if i >= fp.len {
                        return Err(Error::ParseFingerprint("nonzero padding bits".into()));
                    }
                    fp.set(i);
                }
            }
        }
        Ok(fp)
    }
}

/// `nu(A, B)`: the largest radius on which two sets agree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Valuation {
    /// The sets first differ at radius `value + 1`. `-1` means they
    /// already differ on the identity.
    Exact(i64),
    /// No difference up to the probe radius.
    AtLeast(u32),
}

/// `d(A, B) = 2^-nu`, kept as a dyadic exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Distance {
    /// Exactly `2^-exponent`.
    Exact { exponent: i64 },
    /// At most `2^-probe`; the sets agree as far as they were compared.
    AtMost { probe: u32 },
}

impl Distance {
    /// Numeric value, with `AtMost` reported as 0.
    pub fn value(&self) -> f64 {
        match *self {
            Distance::Exact { exponent } => (-(exponent as f64)).exp2(),
            Distance::AtMost { .. } => 0.0,
        }
    }

    /// Upper bound on the true distance, usable for comparisons.
    pub fn upper(&self) -> f64 {
        match *self {
            Distance::Exact { exponent } => (-(exponent as f64)).exp2(),
            Distance::AtMost { probe } => (-(probe as f64)).exp2(),
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Distance::Exact { exponent } => write!(f, "2^{}", -exponent),
            Distance::AtMost { probe } => write!(f, "<=2^-{probe}"),
        }
    }
}

fn comparable(a: &BallFingerprint, b: &BallFingerprint) -> Result<()> {
    if a.geometry != b.geometry {
        return Err(Error::Incomparable(format!("{} vs {}", a.geometry, b.geometry)));
    }
    if a.radius != b.radius {
        return Err(Error::RadiusMismatch { have: b.radius, want: a.radius });
    }
    Ok(())
}

pub fn valuation(a: &BallFingerprint, b: &BallFingerprint) -> Result<Valuation> {
    comparable(a, b)?;
    Ok(match a.first_difference(b) {
        None => Valuation::AtLeast(a.radius),
        Some(i) => Valuation::Exact(a.geometry.radius_of_index(i) as i64 - 1),
    })
}

pub fn distance(a: &BallFingerprint, b: &BallFingerprint) -> Result<Distance> {
    Ok(match valuation(a, b)? {
        Valuation::Exact(nu) => Distance::Exact { exponent: nu },
        Valuation::AtLeast(probe) => Distance::AtMost { probe },
    })
}

/// Number of distinct restrictions to radius `n`. In an ultrametric space
/// this is both the covering number and the packing number at `2^-n`.
pub fn covering_number(family: &[BallFingerprint], n: u32) -> Result<usize> {
    let mut seen = HashSet::new();
    let geometry = family.first().map(|f| f.geometry);
    for f in family {
        if Some(f.geometry) != geometry {
            return Err(Error::Incomparable("mixed geometries in family".into()));
        }
        seen.insert(f.restrict(n)?.blocks);
    }
    Ok(seen.len())
}

/// Greedy maximal family of points pairwise at distance `> 2^-n`.
///
/// Computed from pairwise valuations, independently of the restriction
/// dedup in [`covering_number`].
pub fn packing_number(family: &[BallFingerprint], n: u32) -> Result<usize> {
    let mut centers: Vec<&BallFingerprint> = Vec::new();
    for f in family {
        if f.radius < n {
            return Err(Error::RadiusMismatch { have: f.radius, want: n });
        }
        let mut separated = true;
        for c in &centers {
            let nu = match f.first_difference_upto(c, n)? {
                None => n as i64,
                Some(i) => f.geometry.radius_of_index(i) as i64 - 1,
            };
            if nu >= n as i64 {
                separated = false;
                break;
            }
        }
        if separated {
            centers.push(f);
        }
    }
    Ok(centers.len())
}

impl BallFingerprint {
    fn first_difference_upto(&self, other: &Self, n: u32) -> Result<Option<usize>> {
        if self.geometry != other.geometry {
            return Err(Error::Incomparable(format!("{} vs {}", self.geometry, other.geometry)));
        }
        let len = self.geometry.ball_count(n) as usize;
        Ok((0..len).find(|&i| self.get(i) != other.get(i)))
    }
}

/// Which rows enter the finite-window liminf / limsup summary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Window {
    /// The upper half of the computed range of `n`.
    #[default]
    TopHalf,
    /// The last `k` rows.
    Last(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimRow {
    pub n: u32,
    pub count: f64,
    /// `log2(count) / n`; undefined for `n = 0` or an empty family.
    pub s: Option<f64>,
}

/// Box-counting dimension estimates `s_n = log2(N_n) / n`, with min/max over
/// a trailing window standing in for liminf / limsup.
#[derive(Clone, Debug, PartialEq)]
pub struct DimEstimate {
    pub rows: Vec<DimRow>,
    pub window_start: usize,
    pub liminf: Option<f64>,
    pub limsup: Option<f64>,
}

impl DimEstimate {
    /// Tab-separated `n`, `N`, `s_n` with a header line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("n\tN\ts_n\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                r.n,
                crate::format::float(r.count),
                r.s.map(crate::format::float).unwrap_or_default()
            ));
        }
        out
    }

    pub fn window(&self) -> &[DimRow] {
        &self.rows[self.window_start..]
    }
}

pub fn dim_sequence(counts: &[(u32, f64)], window: Window) -> Result<DimEstimate> {
    if counts.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(&(n, c)) = counts.iter().find(|(_, c)| c.is_nan() || *c < 0.0) {
        return Err(Error::InvalidArgument(format!("count {c} at n = {n} is negative")));
    }
    let rows: Vec<DimRow> = counts
        .iter()
        .map(|&(n, count)| DimRow {
            n,
            count,
            s: (n > 0 && count > 0.0).then(|| count.log2() / n as f64),
        })
        .collect();
    let k = match window {
        Window::TopHalf => rows.len().div_ceil(2),
        Window::Last(k) => k.clamp(1, rows.len()),
    };
    let window_start = rows.len() - k;
    let ss: Vec<f64> = rows[window_start..].iter().filter_map(|r| r.s).collect();
    let liminf = ss.iter().copied().reduce(f64::min);
    let limsup = ss.iter().copied().reduce(f64::max);
    Ok(DimEstimate { rows, window_start, liminf, limsup })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthRow {
    pub n: u32,
    pub beta: u128,
    pub sigma: u128,
    /// `beta(n) / n`, undefined at `n = 0`.
    pub beta_over_n: Option<f64>,
    /// `beta(n)^(1/n)`, tending to the exponential growth rate `2m - 1`.
    pub root: Option<f64>,
}

/// Exact `beta(n)` and `sigma(n)` of the free group for `n = 0..=n_max`.
pub fn growth_stats(m: usize, n_max: u32) -> Result<Vec<GrowthRow>> {
    (0..=n_max)
        .map(|n| {
            let beta = word::ball_size(m, n)?;
            let sigma = word::ball_size(m, n + 1)? - beta;
            let (bn, root) = if n == 0 {
                (None, None)
            } else {
                let b = beta as f64;
                (Some(b / n as f64), Some(b.powf(1.0 / n as f64)))
            };
            Ok(GrowthRow { n, beta, sigma, beta_over_n: bn, root })
        })
        .collect()
}

/// Serializes fingerprints sharing one ball: a header line `m n beta`
/// (followed by ` zm` for lattice fingerprints), then one hex bitmap per line.
pub fn write_fingerprints(family: &[BallFingerprint]) -> Result<String> {
    let first = family.first().ok_or(Error::EmptyInput)?;
    let mut out = match first.geometry {
        Geometry::Free { m } => format!("{} {} {}\n", m, first.radius, first.len),
        Geometry::Lattice { m } => format!("{} {} {} zm\n", m, first.radius, first.len),
    };
    for f in family {
        comparable(first, f)?;
        out.push_str(&f.to_hex());
        out.push('\n');
    }
    Ok(out)
}

pub fn read_fingerprints(text: &str) -> Result<Vec<BallFingerprint>> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or(Error::EmptyInput)?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let bad = |msg: &str| Error::ParseFingerprint(format!("{msg}: {header:?}"));
    if fields.len() != 3 && !(fields.len() == 4 && fields[3] == "zm") {
        return Err(bad("header must be `m n beta` or `m n beta zm`"));
    }
    let m: usize = fields[0].parse().map_err(|_| bad("bad m"))?;
    let n: u32 = fields[1].parse().map_err(|_| bad("bad n"))?;
    let beta: u128 = fields[2].parse().map_err(|_| bad("bad beta"))?;
    if m == 0 || m > word::MAX_RANK {
        return Err(bad("m out of range"));
    }
    let geometry =
        if fields.len() == 4 { Geometry::Lattice { m } } else { Geometry::Free { m } };
    if geometry.ball_count(n) != beta {
        return Err(bad("beta does not match the ball size"));
    }
    lines.map(|l| BallFingerprint::from_hex(geometry, n, l)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::Budget;
    use crate::word::enumerate_ball;

    fn set_fp(m: usize, n: u32, members: &[&str]) -> BallFingerprint {
        let ball = enumerate_ball(m, n, &Budget::default()).unwrap();
        let set: Vec<Word> = members.iter().map(|s| Word::parse(s).unwrap()).collect();
        BallFingerprint::from_predicate(&ball, |w| set.contains(w))
    }

    #[test]
    fn valuation_examples() {
        let a = set_fp(2, 3, &["1"]);
        assert_eq!(valuation(&a, &set_fp(2, 3, &["1", "a"])).unwrap(), Valuation::Exact(0));
        assert_eq!(valuation(&a, &a).unwrap(), Valuation::AtLeast(3));
        assert_eq!(valuation(&a, &set_fp(2, 3, &["1", "aa"])).unwrap(), Valuation::Exact(1));
    }

    #[test]
    fn distance_examples() {
        let a = set_fp(2, 3, &["1"]);
        let d = distance(&a, &set_fp(2, 3, &["1", "a"])).unwrap();
        assert_eq!(d, Distance::Exact { exponent: 0 });
        assert_eq!(d.value(), 1.0);
        assert_eq!(distance(&a, &a).unwrap(), Distance::AtMost { probe: 3 });
        assert_eq!(distance(&a, &a).unwrap().to_string(), "<=2^-3");
        let d = distance(&a, &set_fp(2, 3, &["1", "aa"])).unwrap();
        assert_eq!(d.value(), 0.5);
        // disagreement on the identity itself
        let d = distance(&a, &set_fp(2, 3, &[])).unwrap();
        assert_eq!(d.value(), 2.0);
    }

    #[test]
    fn valuation_rejects_mismatch() {
        let a = set_fp(2, 3, &["1"]);
        let b = set_fp(2, 2, &["1"]);
        assert!(matches!(valuation(&a, &b), Err(Error::RadiusMismatch { .. })));
        let c = set_fp(3, 3, &["1"]);
        assert!(matches!(valuation(&a, &c), Err(Error::Incomparable(_))));
    }

    #[test]
    fn covering_number_examples() {
        let one = vec![set_fp(2, 2, &["1"])];
        assert_eq!(covering_number(&one, 2).unwrap(), 1);
        // the full powerset of B(1) for m = 2
        let g = Geometry::Free { m: 2 };
        let family: Vec<_> = (0..32u32)
            .map(|mask| {
                let bits: Vec<bool> = (0..5).map(|i| mask >> i & 1 == 1).collect();
                BallFingerprint::from_bits(g, 1, &bits).unwrap()
            })
            .collect();
        assert_eq!(covering_number(&family, 1).unwrap(), 32);
        assert_eq!(packing_number(&family, 1).unwrap(), 32);
        assert_eq!(covering_number(&family, 0).unwrap(), 2);
        assert!(matches!(covering_number(&family, 2), Err(Error::RadiusMismatch { .. })));
    }

    #[test]
    fn dim_sequence_examples() {
        let lin: Vec<(u32, f64)> = (1..=20).map(|n| (n, (n + 1) as f64)).collect();
        let d = dim_sequence(&lin, Window::TopHalf).unwrap();
        let s20 = d.rows.last().unwrap().s.unwrap();
        assert!((s20 - 21f64.log2() / 20.0).abs() < 1e-12);
        assert!((s20 - 0.2196).abs() < 1e-4);
        assert_eq!(d.window().len(), 10);
        assert_eq!(d.liminf, Some(s20));

        let pow2: Vec<(u32, f64)> = (1..=10).map(|n| (n, 2f64.powi(n as i32))).collect();
        let d = dim_sequence(&pow2, Window::Last(3)).unwrap();
        assert!(d.rows.iter().all(|r| (r.s.unwrap() - 1.0).abs() < 1e-12));

        let pow3: Vec<(u32, f64)> = (1..=10).map(|n| (n, 3f64.powi(n as i32))).collect();
        let d = dim_sequence(&pow3, Window::TopHalf).unwrap();
        assert!((d.limsup.unwrap() - 1.5849625).abs() < 1e-6);

        assert_eq!(dim_sequence(&[], Window::TopHalf), Err(Error::EmptyInput));
        let d = dim_sequence(&[(3, 0.0)], Window::TopHalf).unwrap();
        assert_eq!(d.rows[0].s, None);
        assert_eq!(d.to_tsv(), "n\tN\ts_n\n3\t0\t\n");
    }

    #[test]
    fn growth_examples() {
        let g = growth_stats(2, 10).unwrap();
        assert_eq!(g[1].beta, 5);
        assert_eq!(g[1].sigma, 12);
        assert_eq!(g[2].beta, 17);
        let r10 = g[10].root.unwrap();
        assert!((r10 - 118097f64.powf(0.1)).abs() < 1e-9, "{r10}");
        assert_eq!(growth_stats(3, 2).unwrap()[2].beta, 37);
        assert!(growth_stats(1, 2).is_err());
    }

    #[test]
    fn fingerprint_file_round_trip() {
        let fam = vec![set_fp(2, 2, &["1", "ab"]), set_fp(2, 2, &["1", "a", "A"])];
        let text = write_fingerprints(&fam).unwrap();
        assert!(text.starts_with("2 2 17\n"));
        assert_eq!(text.lines().nth(1).unwrap(), "82000");
        assert_eq!(read_fingerprints(&text).unwrap(), fam);
        assert!(read_fingerprints("2 2 16\n0000\n").is_err());
        assert!(read_fingerprints("2 2 17\n800004\n").is_err());
    }

    #[test]
    fn restrict_is_prefix() {
        let f = set_fp(2, 3, &["1", "a", "ab", "aba"]);
        let r = f.restrict(2).unwrap();
        assert_eq!(r, set_fp(2, 2, &["1", "a", "ab"]));
        assert_eq!(f.restrict(3).unwrap(), f);
    }
}
