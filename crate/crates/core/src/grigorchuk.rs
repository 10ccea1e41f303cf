//! Words over `{a, b, c, d}`, their reduced positive form in
//! `Gamma = <a,b,c,d | a^2 = b^2 = c^2 = d^2 = bcd = 1>`, the parity
//! substitutions driven by an oracle sequence, and the oracle membership
//! algorithm defining the subgroups `S_omega` of the free group of rank 4.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::metric::{BallFingerprint, Distance};
use crate::word::{word_at_index, Letter, Word};

/// Rank of the ambient free group.
pub const RANK: usize = 4;

const A: Letter = 1;

/// A word over `a, b, c, d` and their formal inverses, not necessarily
/// reduced in any sense.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct GrigWord(Vec<Letter>);

impl GrigWord {
    pub fn new(letters: Vec<Letter>) -> Result<Self> {
        for &l in &letters {
            if l == 0 || l.unsigned_abs() as usize > RANK {
                return Err(Error::LetterOutOfRange { letter: l as i32, m: RANK });
            }
        }
        Ok(GrigWord(letters))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        GrigWord(self.0.iter().rev().map(|l| -l).collect())
    }

    /// The free-group element this word spells.
    pub fn to_word(&self) -> Word {
        Word::new(self.0.iter().copied())
    }

    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|&l| l > 0)
    }

    pub fn a_count(&self) -> usize {
        self.0.iter().filter(|l| l.abs() == A).count()
    }

    /// Exponent sum of `a` over the integers.
    pub fn a_exponent_sum(&self) -> i64 {
        a_exponent_sum(&self.0)
    }
}

impl From<&Word> for GrigWord {
    fn from(w: &Word) -> Self {
        GrigWord(w.letters().to_vec())
    }
}

impl fmt::Display for GrigWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for &l in &self.0 {
            let c = (b'a' + (l.unsigned_abs() - 1)) as char;
            let c = if l < 0 { c.to_ascii_uppercase() } else { c };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for GrigWord {
    type Err = Error;

    /// Letters `a`-`d`, inverses `A`-`D`; `1` or the empty string is the
    /// empty word.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() || t == "1" {
            return Ok(GrigWord::default());
        }
        let mut out = Vec::with_capacity(t.len());
        for c in t.chars() {
            let l = match c {
                'a'..='d' => (c as u8 - b'a' + 1) as Letter,
                'A'..='D' => -((c as u8 - b'A' + 1) as Letter),
                _ => {
                    return Err(Error::ParseWord {
                        text: s.to_string(),
                        reason: format!("unexpected character {c:?} (alphabet is a-d, A-D)"),
                    })
                }
            };
            out.push(l);
        }
        Ok(GrigWord(out))
    }
}

fn a_exponent_sum(w: &[Letter]) -> i64 {
    w.iter()
        .map(|&l| match l {
            A => 1,
            -1 => -1,
            _ => 0,
        })
        .sum()
}

fn push_gamma(stack: &mut Vec<Letter>, l: Letter) {
    let mut x = l.abs();
    loop {
        match stack.last().copied() {
            Some(t) if t == x => {
                stack.pop();
                return;
            }
            // b, c, d are 2, 3, 4 and the product of two of them is the third
            Some(t) if t > A && x > A => {
                stack.pop();
                x = 9 - t - x;
            }
            _ => {
                stack.push(x);
                return;
            }
        }
    }
}

fn gamma_reduce_letters(w: &[Letter]) -> Vec<Letter> {
    let mut stack = Vec::with_capacity(w.len());
    for &l in w {
        push_gamma(&mut stack, l);
    }
    stack
}

/// The reduced positive form `r(w)`: empty iff `w = 1` in Gamma.
pub fn gamma_reduce(w: &GrigWord) -> GrigWord {
    GrigWord(gamma_reduce_letters(&w.0))
}

/// Order in which elementary simplifications are applied by
/// [`gamma_reduce_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Leftmost,
    Rightmost,
}

/// Applies one elementary simplification at a time, always at the leftmost
/// (or rightmost) position where one applies, until none does.
pub fn gamma_reduce_with(w: &GrigWord, strategy: Strategy) -> GrigWord {
    let mut v = w.0.clone();
    loop {
        let n = v.len();
        let applicable = |k: usize| -> bool {
            v[k] < 0 || (k + 1 < n && v[k] > 0 && v[k + 1] > 0 && (v[k] == v[k + 1] || (v[k] > A && v[k + 1] > A)))
        };
        let pos = match strategy {
            Strategy::Leftmost => (0..n).find(|&k| applicable(k)),
            Strategy::Rightmost => (0..n).rev().find(|&k| applicable(k)),
        };
        let Some(k) = pos else {
            return GrigWord(v);
        };
        if v[k] < 0 {
            v[k] = -v[k];
        } else if v[k] == v[k + 1] {
            v.drain(k..k + 2);
        } else {
            let z = 9 - v[k] - v[k + 1];
            v.splice(k..k + 2, [z]);
        }
    }
}

/// One symbol of an oracle sequence, giving the images of `(b, c, d)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OracleSymbol(u8);

impl OracleSymbol {
    pub fn new(s: u8) -> Result<Self> {
        if s > 2 {
            return Err(Error::ParseOracle { text: s.to_string(), reason: "symbols are 0, 1, 2".into() });
        }
        Ok(OracleSymbol(s))
    }

    pub fn index(&self) -> u8 {
        self.0
    }

    /// Images of `b`, `c`, `d`; `None` is the empty word.
    pub fn triple(&self) -> [Option<Letter>; 3] {
        match self.0 {
            0 => [Some(A), Some(A), None],
            1 => [Some(A), None, Some(A)],
            _ => [None, Some(A), Some(A)],
        }
    }

    pub fn all() -> [OracleSymbol; 3] {
        [OracleSymbol(0), OracleSymbol(1), OracleSymbol(2)]
    }
}

/// An eventually constant sequence of oracle symbols: an explicit prefix
/// followed by a repeated tail symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OracleSeq {
    prefix: Vec<OracleSymbol>,
    tail: OracleSymbol,
}

impl OracleSeq {
    /// Normalized so that equal sequences compare equal: trailing prefix
    /// symbols equal to the tail are dropped, keeping at least one.
    pub fn new(prefix: Vec<OracleSymbol>, tail: OracleSymbol) -> Result<Self> {
        if prefix.is_empty() {
            return Err(Error::ParseOracle { text: String::new(), reason: "empty prefix".into() });
        }
        let mut prefix = prefix;
        while prefix.len() > 1 && prefix.last() == Some(&tail) {
            prefix.pop();
        }
        Ok(OracleSeq { prefix, tail })
    }

    pub fn constant(s: OracleSymbol) -> Self {
        OracleSeq { prefix: vec![s], tail: s }
    }

    /// The `i`-th symbol, counting from 0.
    pub fn symbol(&self, i: usize) -> OracleSymbol {
        self.prefix.get(i).copied().unwrap_or(self.tail)
    }

    pub fn prefix(&self) -> &[OracleSymbol] {
        &self.prefix
    }

    pub fn tail(&self) -> OracleSymbol {
        self.tail
    }

    /// Whether the first `n` symbols coincide.
    pub fn agrees_on(&self, other: &OracleSeq, n: usize) -> bool {
        (0..n).all(|i| self.symbol(i) == other.symbol(i))
    }
}

impl fmt::Display for OracleSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.prefix {
            write!(f, "{}", s.0)?;
        }
        write!(f, "({})*", self.tail.0)
    }
}

impl FromStr for OracleSeq {
    type Err = Error;

    /// `012(0)*`: digits, then an optional repeated tail in `(k)*`. Without
    /// a tail the last digit repeats.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::ParseOracle { text: s.to_string(), reason: reason.into() };
        let t = s.trim();
        let (head, tail) = match t.find('(') {
            Some(i) => {
                let rest = &t[i..];
                let inner = rest
                    .strip_prefix('(')
                    .and_then(|r| r.strip_suffix(")*"))
                    .ok_or_else(|| bad("tail must look like (k)*"))?;
                (&t[..i], Some(inner))
            }
            None => (t, None),
        };
        let digit = |c: char| -> Result<OracleSymbol> {
            match c {
                '0'..='2' => Ok(OracleSymbol(c as u8 - b'0')),
                _ => Err(bad("symbols are 0, 1, 2")),
            }
        };
        let mut prefix: Vec<OracleSymbol> = head.chars().map(digit).collect::<Result<_>>()?;
        let tail = match tail {
            Some(inner) => {
                let mut cs = inner.chars();
                match (cs.next(), cs.next()) {
                    (Some(c), None) => digit(c)?,
                    _ => return Err(bad("tail must be a single symbol")),
                }
            }
            None => *prefix.last().ok_or_else(|| bad("empty sequence"))?,
        };
        if prefix.is_empty() {
            prefix.push(tail);
        }
        OracleSeq::new(prefix, tail)
    }
}

fn phi_letters(w: &[Letter], i: u8, triple: [Option<Letter>; 3], out: &mut Vec<Letter>) {
    out.clear();
    let mut parity = 0u8;
    for &l in w {
        if l == A {
            parity ^= 1;
        } else if parity == i {
            if let Some(x) = triple[(l - 2) as usize] {
                out.push(x);
            }
        } else {
            out.push(l);
        }
    }
}

/// The substitution `phi_i` for a symbol with images `triple` of `(b, c, d)`:
/// `a` is erased; `b, c, d` are replaced through the triple when the number
/// of preceding `a`s has parity `i`, and kept otherwise.
pub fn phi(w: &GrigWord, i: u8, triple: [Option<Letter>; 3]) -> Result<GrigWord> {
    if i > 1 {
        return Err(Error::InvalidArgument(format!("phi index {i} must be 0 or 1")));
    }
    if !w.is_positive() {
        return Err(Error::InvalidArgument(format!("phi needs a positive word, got {w}")));
    }
    if w.a_count() % 2 == 1 {
        return Err(Error::OddACount(w.to_string()));
    }
    let mut out = Vec::new();
    phi_letters(&w.0, i, triple, &mut out);
    Ok(GrigWord(out))
}

/// What decided a node of the membership recursion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    /// Odd exponent sum of `a`: rejected.
    OddExponent,
    /// `r(w)` empty: accepted.
    Trivial,
    /// `|r(w)| = 1`: rejected.
    SingleLetter,
    /// Both substitutions were recursed into.
    Split,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipNode {
    pub word: GrigWord,
    pub depth: usize,
    pub rule: Rule,
    pub accepted: bool,
    /// `w_0` and `w_1` for a split, empty otherwise.
    pub children: Vec<MembershipNode>,
}

impl MembershipNode {
    pub fn height(&self) -> usize {
        self.children.iter().map(|c| 1 + c.height()).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(MembershipNode::size).sum::<usize>()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipVerdict {
    pub accepted: bool,
    pub tree: MembershipNode,
}

fn member_node(w: GrigWord, depth: usize, omega: &OracleSeq) -> MembershipNode {
    if a_exponent_sum(&w.0) % 2 != 0 {
        return MembershipNode { word: w, depth, rule: Rule::OddExponent, accepted: false, children: vec![] };
    }
    let r = gamma_reduce_letters(&w.0);
    match r.len() {
        0 => MembershipNode { word: w, depth, rule: Rule::Trivial, accepted: true, children: vec![] },
        1 => MembershipNode { word: w, depth, rule: Rule::SingleLetter, accepted: false, children: vec![] },
        _ => {
            let triple = omega.symbol(depth).triple();
            let children: Vec<MembershipNode> = (0..2)
                .map(|i| {
                    let mut out = Vec::new();
                    phi_letters(&r, i, triple, &mut out);
                    member_node(GrigWord(out), depth + 1, omega)
                })
                .collect();
            let accepted = children.iter().all(|c| c.accepted);
            MembershipNode { word: w, depth, rule: Rule::Split, accepted, children }
        }
    }
}

/// Runs the oracle algorithm on `w`, keeping the whole recursion tree. A
/// split node is accepted iff both branches are.
pub fn member(w: &GrigWord, omega: &OracleSeq) -> MembershipVerdict {
    let tree = member_node(w.clone(), 0, omega);
    MembershipVerdict { accepted: tree.accepted, tree }
}

fn is_member_at(w: &[Letter], depth: usize, omega: &OracleSeq) -> bool {
    if a_exponent_sum(w) % 2 != 0 {
        return false;
    }
    let r = gamma_reduce_letters(w);
    match r.len() {
        0 => true,
        1 => false,
        _ => {
            let triple = omega.symbol(depth).triple();
            let mut out = Vec::with_capacity(r.len() / 2 + 1);
            (0..2).all(|i| {
                phi_letters(&r, i, triple, &mut out);
                let next = std::mem::take(&mut out);
                let ok = is_member_at(&next, depth + 1, omega);
                out = next;
                ok
            })
        }
    }
}

/// Same verdict as [`member`] without building the tree.
pub fn is_member(w: &[Letter], omega: &OracleSeq) -> bool {
    is_member_at(w, 0, omega)
}

/// Membership bitmap of `S_omega` over the free ball of radius `len`.
pub fn fingerprint_s(omega: &OracleSeq, len: u32, budget: &Budget) -> Result<BallFingerprint> {
    BallFingerprint::from_letters_predicate(RANK, len, budget, |w| is_member(w, omega))
}

/// Outcome of comparing two oracle sequences against the Cantor-set
/// estimates: agreement on `n` symbols forces equal fingerprints up to
/// length `2^n`, and disagreement within `n` symbols should be visible up to
/// length `2^(n+2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparationReport {
    pub n: u32,
    pub prefixes_agree: bool,
    /// Fingerprint radius used for the first check, `2^n`.
    pub near_radius: u32,
    pub equal_near: bool,
    /// Radius actually searched for a separating word, at most `2^(n+2)`.
    pub far_radius: Option<u32>,
    pub separating_word: Option<Word>,
    pub distance: Option<Distance>,
    /// False only when prefixes agree but the fingerprints differ.
    pub consistent: bool,
}

/// Checks both implications on finite fingerprints. The separating search
/// grows the radius up to `2^(n+2)` and stops at the first radius that the
/// budget refuses.
pub fn verify_separation(w1: &OracleSeq, w2: &OracleSeq, n: u32, budget: &Budget) -> Result<SeparationReport> {
    let near_radius = 1u32.checked_shl(n).ok_or(Error::Overflow("2^n"))?;
    let prefixes_agree = w1.agrees_on(w2, n as usize);
    let f1 = fingerprint_s(w1, near_radius, budget)?;
    let f2 = fingerprint_s(w2, near_radius, budget)?;
    let equal_near = f1 == f2;
    let mut report = SeparationReport {
        n,
        prefixes_agree,
        near_radius,
        equal_near,
        far_radius: None,
        separating_word: None,
        distance: None,
        consistent: !prefixes_agree || equal_near,
    };
    if !prefixes_agree {
        let limit = 1u32.checked_shl(n + 2).ok_or(Error::Overflow("2^(n+2)"))?;
        for r in 1..=limit {
            let (Ok(g1), Ok(g2)) = (fingerprint_s(w1, r, budget), fingerprint_s(w2, r, budget)) else {
                break;
            };
            report.far_radius = Some(r);
            if let Some(i) = g1.first_difference(&g2) {
                report.separating_word = word_at_index(RANK, i as u128);
                report.distance = Some(crate::metric::distance(&g1, &g2)?);
                break;
            }
        }
    }
    Ok(report)
}

/// The centers of the `3^n` covering: sequences constant from the `n`-th
/// symbol on, one per prefix of length `n` (a single constant sequence for
/// `n = 0`).
pub fn covering_centers(n: u32) -> Vec<OracleSeq> {
    if n == 0 {
        return vec![OracleSeq::constant(OracleSymbol(0))];
    }
    let mut out = Vec::with_capacity(3usize.pow(n));
    for code in 0..3usize.pow(n) {
        let mut c = code;
        let mut prefix = vec![OracleSymbol(0); n as usize];
        for p in prefix.iter_mut().rev() {
            *p = OracleSymbol((c % 3) as u8);
            c /= 3;
        }
        let tail = *prefix.last().unwrap();
        out.push(OracleSeq::new(prefix, tail).expect("nonempty prefix"));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoveringEstimate {
    pub n: u32,
    /// `3^n`.
    pub bound: u128,
    /// Fingerprint radius `2^n`.
    pub radius: u32,
    /// Distinct fingerprints over the centers, when affordable.
    pub observed: Option<usize>,
}

pub fn covering_estimate_b(n: u32, budget: &Budget) -> Result<CoveringEstimate> {
    let bound = 3u128.checked_pow(n).ok_or(Error::Overflow("3^n"))?;
    let radius = 1u32.checked_shl(n).ok_or(Error::Overflow("2^n"))?;
    let centers = covering_centers(n);
    let affordable = crate::word::ball_count(RANK, radius)
        .and_then(|b| b.checked_mul(centers.len() as u128))
        .is_some_and(|t| budget.check(t).is_ok());
    let observed = if affordable {
        let fps: Vec<BallFingerprint> = centers
            .par_iter()
            .map(|w| fingerprint_s(w, radius, &Budget::unlimited()))
            .collect::<Result<_>>()?;
        let mut hex: Vec<String> = fps.iter().map(BallFingerprint::to_hex).collect();
        hex.sort();
        hex.dedup();
        Some(hex.len())
    } else {
        None
    };
    Ok(CoveringEstimate { n, bound, radius, observed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> GrigWord {
        s.parse().unwrap()
    }

    fn o(s: &str) -> OracleSeq {
        s.parse().unwrap()
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_reduce(&g("bc")), g("d"));
        assert_eq!(gamma_reduce(&g("aa")), g(""));
        assert_eq!(gamma_reduce(&g("cdb")), g(""));
        assert_eq!(gamma_reduce(&g("AbA")), g("aba"));
        assert_eq!(gamma_reduce(&g("abcda")), g(""));
        for s in ["bc", "aa", "cdb", "abDcAdb", "BCDbcd"] {
            let w = g(s);
            assert_eq!(gamma_reduce_with(&w, Strategy::Leftmost), gamma_reduce(&w));
            assert_eq!(gamma_reduce_with(&w, Strategy::Rightmost), gamma_reduce(&w));
        }
    }

    #[test]
    fn phi_examples() {
        let zero = OracleSymbol(0).triple();
        assert_eq!(phi(&g("adad"), 0, zero).unwrap(), g("d"));
        assert_eq!(phi(&g("adad"), 1, zero).unwrap(), g("d"));
        assert_eq!(phi(&g("abab"), 0, zero).unwrap(), g("ba"));
        assert_eq!(phi(&g("ab"), 0, zero), Err(Error::OddACount("ab".into())));
        assert!(phi(&g("abAb"), 0, zero).is_err());
    }

    #[test]
    fn oracle_format() {
        let w = o("012(0)*");
        assert_eq!(w.to_string(), "012(0)*");
        assert_eq!(w.symbol(0), OracleSymbol(0));
        assert_eq!(w.symbol(2), OracleSymbol(2));
        assert_eq!(w.symbol(10), OracleSymbol(0));
        assert_eq!(o("01"), o("01(1)*"));
        assert_eq!(o("0111(1)*"), o("01"));
        assert_eq!(o("(2)*"), OracleSeq::constant(OracleSymbol(2)));
        for bad in ["", "013", "0(1)", "0(12)*", "0(x)*"] {
            assert!(bad.parse::<OracleSeq>().is_err(), "{bad}");
        }
    }

    #[test]
    fn member_examples() {
        let w0 = o("0(0)*");
        let v = member(&g("a"), &w0);
        assert!(!v.accepted);
        assert_eq!(v.tree.rule, Rule::OddExponent);
        assert!(member(&g("bb"), &w0).accepted);
        let v = member(&g("adad"), &w0);
        assert!(!v.accepted);
        assert_eq!(v.tree.children.len(), 2);
        for c in &v.tree.children {
            assert_eq!(c.word, g("d"));
            assert_eq!(c.rule, Rule::SingleLetter);
        }
        assert!(member(&g(""), &w0).accepted);
        assert!(member(&g("AA"), &w0).accepted);
    }

    #[test]
    fn relators_are_members() {
        for w in ["0(0)*", "1(1)*", "2(2)*", "0120(1)*"] {
            let w = o(w);
            for r in ["aa", "bb", "cc", "dd", "bcd"] {
                assert!(member(&g(r), &w).accepted, "{r} {w}");
            }
        }
    }

    #[test]
    fn tree_and_fast_path_agree() {
        let w = o("021(1)*");
        let f = fingerprint_s(&w, 3, &Budget::default()).unwrap();
        let ball = crate::word::enumerate_ball(RANK, 3, &Budget::default()).unwrap();
        for (i, x) in ball.words().iter().enumerate() {
            let v = member(&GrigWord::from(x), &w);
            assert_eq!(v.accepted, f.get(i), "{x}");
            let bound = (x.len().max(1) as f64).log2().ceil() as usize + 1;
            assert!(v.tree.height() <= bound, "{x}");
        }
    }

    #[test]
    fn length_two_members_are_squares() {
        let f = fingerprint_s(&o("0(0)*"), 2, &Budget::default()).unwrap();
        let members: Vec<Word> =
            f.ones().map(|i| word_at_index(RANK, i as u128).unwrap()).filter(|w| w.len() == 2).collect();
        let names: Vec<String> = members.iter().map(Word::to_string).collect();
        assert_eq!(names, ["aa", "AA", "bb", "BB", "cc", "CC", "dd", "DD"]);
    }

    #[test]
    fn covering_bounds() {
        let b = Budget::default();
        let e0 = covering_estimate_b(0, &b).unwrap();
        assert_eq!((e0.bound, e0.observed), (1, Some(1)));
        let e2 = covering_estimate_b(2, &b).unwrap();
        assert_eq!(e2.bound, 9);
        assert!(e2.observed.unwrap() <= 9);
        assert_eq!(covering_centers(3).len(), 27);
    }
}
