//! Reduced words in the free group of rank `m`, and exhaustive enumeration
//! of balls and cyclically reduced words.
//!
//! A letter is a nonzero `i8`: `+g` is the `g`-th generator (1-based), `-g`
//! its inverse. The canonical order on words is length first, then
//! lexicographic with `a < A < b < B < ...`; enumeration always emits words
//! in this order, so fingerprints are bit-exact whatever the thread count.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use rayon::prelude::*;

use crate::budget::Budget;
use crate::error::{Error, Result};

pub type Letter = i8;

/// Largest rank supported by the ASCII word format.
pub const MAX_RANK: usize = 26;

/// Position of a letter in the canonical order `a < A < b < B < ...`.
#[inline]
pub fn letter_rank(l: Letter) -> usize {
    let g = l.unsigned_abs() as usize - 1;
    2 * g + usize::from(l < 0)
}

#[inline]
pub fn letter_at_rank(rank: usize) -> Letter {
    let g = (rank / 2 + 1) as Letter;
    if rank.is_multiple_of(2) {
        g
    } else {
        -g
    }
}

/// The basis `{e_1, ..., e_m}` of a free group together with formal inverses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FreeAlphabet {
    m: usize,
}

impl FreeAlphabet {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 || m > MAX_RANK {
            return Err(Error::AlphabetSize(m));
        }
        Ok(FreeAlphabet { m })
    }

    pub fn rank(&self) -> usize {
        self.m
    }

    /// Number of letters, generators and inverses together.
    pub fn size(&self) -> usize {
        2 * self.m
    }

    pub fn contains(&self, l: Letter) -> bool {
        l != 0 && (l.unsigned_abs() as usize) <= self.m
    }

    /// All letters in canonical order.
    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.size()).map(letter_at_rank)
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        match w.letters().iter().find(|&&l| !self.contains(l)) {
            Some(&l) => Err(Error::LetterOutOfRange { letter: l as i32, m: self.m }),
            None => Ok(()),
        }
    }
}

/// A freely reduced word. The empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<Letter>);

fn push_reduced(buf: &mut Vec<Letter>, l: Letter) {
    if buf.last() == Some(&-l) {
        buf.pop();
    } else {
        buf.push(l);
    }
}

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// Freely reduces a sequence of nonzero letters.
    pub fn new<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut buf = Vec::new();
        for l in letters {
            debug_assert!(l != 0);
            push_reduced(&mut buf, l);
        }
        Word(buf)
    }

    /// Wraps letters already known to be freely reduced.
    pub(crate) fn from_reduced(letters: Vec<Letter>) -> Self {
        debug_assert!(letters.windows(2).all(|p| p[0] != -p[1]));
        Word(letters)
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

    /// Highest generator index used, 0 for the identity.
    pub fn max_generator(&self) -> usize {
        self.0.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn inverse(&self) -> Self {
        Word(self.0.iter().rev().map(|l| -l).collect())
    }

    pub fn pow(&self, q: u32) -> Self {
        let mut out = Word::identity();
        for _ in 0..q {
            out = &out * self;
        }
        out
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.0.first(), self.0.last()) {
            (Some(&f), Some(&l)) if self.0.len() >= 2 => f != -l,
            _ => true,
        }
    }

    /// Rotation moving the first `k` letters to the end.
    pub fn rotate(&self, k: usize) -> Self {
        if self.0.is_empty() {
            return self.clone();
        }
        let k = k % self.0.len();
        let mut v = Vec::with_capacity(self.0.len());
        v.extend_from_slice(&self.0[k..]);
        v.extend_from_slice(&self.0[..k]);
        // rotations of a cyclically reduced word stay reduced; others may not
        Word::new(v)
    }

    /// Parses the ASCII format: `a` is the first generator, `A` its inverse,
    /// `1` or the empty string is the identity; whitespace is ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = Vec::new();
        let mut saw_one = false;
        for ch in text.chars().filter(|c| !c.is_whitespace()) {
            match ch {
                'a'..='z' => raw.push((ch as u8 - b'a' + 1) as Letter),
                'A'..='Z' => raw.push(-((ch as u8 - b'A' + 1) as Letter)),
                '1' => saw_one = true,
                _ => {
                    return Err(Error::ParseWord {
                        text: text.to_string(),
                        reason: format!("unexpected character {ch:?}"),
                    })
                }
            }
        }
        if saw_one && !raw.is_empty() {
            return Err(Error::ParseWord {
                text: text.to_string(),
                reason: "'1' denotes the identity and cannot be mixed with letters".into(),
            });
        }
        Ok(Word::new(raw))
    }

    /// Parses and checks every letter against the alphabet.
    pub fn parse_in(alphabet: &FreeAlphabet, text: &str) -> Result<Self> {
        let w = Word::parse(text)?;
        alphabet.check_word(&w)?;
        Ok(w)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| {
            let a = self.0.iter().map(|&l| letter_rank(l));
            let b = other.0.iter().map(|&l| letter_rank(l));
            a.cmp(b)
        })
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for &l in &self.0 {
            let g = l.unsigned_abs() - 1;
            let base = if l > 0 { b'a' } else { b'A' };
            write!(f, "{}", (base + g) as char)?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Word::parse(s)
    }
}

impl Mul<&Word> for &Word {
    type Output = Word;

    fn mul(self, rhs: &Word) -> Word {
        let mut buf = self.0.clone();
        for &l in &rhs.0 {
            push_reduced(&mut buf, l);
        }
        Word(buf)
    }
}

impl Mul<Word> for Word {
    type Output = Word;

    fn mul(self, rhs: Word) -> Word {
        &self * &rhs
    }
}

/// Free reduction of a raw letter sequence given as signed generator indices.
pub fn reduce(alphabet: &FreeAlphabet, raw: &[i32]) -> Result<Word> {
    let mut buf = Vec::with_capacity(raw.len());
    for &l in raw {
        if l == 0 || l.unsigned_abs() as usize > alphabet.rank() {
            return Err(Error::LetterOutOfRange { letter: l, m: alphabet.rank() });
        }
        push_reduced(&mut buf, l as Letter);
    }
    Ok(Word(buf))
}

/// Strips conjugating letters until the first letter is not the inverse of
/// the last.
pub fn cyclic_reduce(w: &Word) -> Word {
    let s = w.letters();
    let (mut i, mut j) = (0, s.len());
    while j - i >= 2 && s[i] == -s[j - 1] {
        i += 1;
        j -= 1;
    }
    Word(s[i..j].to_vec())
}

/// All rotations of `w`, and of `w^{-1}` when requested, deduplicated.
pub fn cyclic_conjugates(w: &Word, with_inverse: bool) -> Result<BTreeSet<Word>> {
    if !w.is_cyclically_reduced() {
        return Err(Error::NotCyclicallyReduced(w.to_string()));
    }
    let mut out = BTreeSet::new();
    let n = w.len().max(1);
    for k in 0..n {
        out.insert(w.rotate(k));
    }
    if with_inverse {
        let inv = w.inverse();
        for k in 0..n {
            out.insert(inv.rotate(k));
        }
    }
    Ok(out)
}

/// Number of reduced words of length exactly `len`; valid for every `m >= 1`.
pub fn sphere_size(m: usize, len: u32) -> Option<u128> {
    if len == 0 {
        return Some(1);
    }
    let branch = (2 * m - 1) as u128;
    branch.checked_pow(len - 1)?.checked_mul(2 * m as u128)
}

/// Closed form `m/(m-1) * ((2m-1)^n - 1) + 1` for the number of reduced
/// words of length at most `n`.
pub fn ball_size(m: usize, n: u32) -> Result<u128> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "ball_size needs m >= 2 (got {m}); the rank-one ball has 2n+1 elements"
        )));
    }
    let m = m as u128;
    let p = (2 * m - 1).checked_pow(n).ok_or(Error::Overflow("ball size"))?;
    // (2m-1)^n - 1 is divisible by 2(m-1)
    let q = (p - 1) / (m - 1);
    q.checked_mul(m)
        .and_then(|x| x.checked_add(1))
        .ok_or(Error::Overflow("ball size"))
}

/// Ball cardinality by summing spheres; agrees with [`ball_size`] for
/// `m >= 2` and also covers `m = 1`.
pub fn ball_count(m: usize, n: u32) -> Option<u128> {
    (0..=n).try_fold(0u128, |acc, l| acc.checked_add(sphere_size(m, l)?))
}

/// Index of `w` in the canonical enumeration of any ball containing it.
pub fn canonical_index(m: usize, w: &Word) -> u128 {
    let len = w.len() as u32;
    let before = if len == 0 { 0 } else { ball_count(m, len - 1).expect("index overflow") };
    let branch = (2 * m - 1) as u128;
    let mut idx: u128 = 0;
    let mut prev: Option<Letter> = None;
    for &l in w.letters() {
        let r = letter_rank(l);
        let digit = match prev {
            None => r,
            Some(p) => {
                let skip = letter_rank(-p);
                if r > skip {
                    r - 1
                } else {
                    r
                }
            }
        } as u128;
        idx = match prev {
            None => digit,
            Some(_) => idx * branch + digit,
        };
        prev = Some(l);
    }
    before + idx
}

/// The word at position `index` of the canonical enumeration; inverse of
/// [`canonical_index`].
pub fn word_at_index(m: usize, index: u128) -> Option<Word> {
    let branch = (2 * m - 1) as u128;
    let mut len = 0u32;
    let mut start = 0u128;
    loop {
        let layer = sphere_size(m, len)?;
        if index < start + layer {
            break;
        }
        start += layer;
        len += 1;
    }
    if len == 0 {
        return Some(Word::identity());
    }
    let mut off = index - start;
    let mut digits = vec![0u128; len as usize];
    for d in digits.iter_mut().skip(1).rev() {
        *d = off % branch;
        off /= branch;
    }
    digits[0] = off;
    let mut out: Vec<Letter> = Vec::with_capacity(len as usize);
    for d in digits {
        let mut r = d as usize;
        if let Some(&p) = out.last() {
            if r >= letter_rank(-p) {
                r += 1;
            }
        }
        out.push(letter_at_rank(r));
    }
    Some(Word::from_reduced(out))
}

/// Calls `f` on every reduced word of length `len` whose first letter is
/// `first`, in lexicographic order.
pub fn visit_layer_from<F: FnMut(&[Letter])>(m: usize, len: usize, first: Letter, f: &mut F) {
    if len == 0 {
        f(&[]);
        return;
    }
    let mut buf = Vec::with_capacity(len);
    buf.push(first);
    extend_layer(m, len, &mut buf, f);
}

fn extend_layer<F: FnMut(&[Letter])>(m: usize, len: usize, buf: &mut Vec<Letter>, f: &mut F) {
    if buf.len() == len {
        f(buf);
        return;
    }
    let forbidden = -*buf.last().expect("nonempty prefix");
    for r in 0..2 * m {
        let l = letter_at_rank(r);
        if l == forbidden {
            continue;
        }
        buf.push(l);
        extend_layer(m, len, buf, f);
        buf.pop();
    }
}

/// Reduced words of length `len` in canonical order, sharded by first
/// letter; shards are concatenated in letter order.
fn layer_words(m: usize, len: usize) -> Vec<Word> {
    if len == 0 {
        return vec![Word::identity()];
    }
    let shards: Vec<Vec<Word>> = (0..2 * m)
        .into_par_iter()
        .map(|r| {
            let mut out = Vec::new();
            visit_layer_from(m, len, letter_at_rank(r), &mut |s| {
                out.push(Word::from_reduced(s.to_vec()))
            });
            out
        })
        .collect();
    shards.concat()
}

/// The ball `B(n)` of the free group of rank `m` in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    m: usize,
    radius: u32,
    words: Vec<Word>,
}

impl Ball {
    pub fn rank(&self) -> usize {
        self.m
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// `beta(r)`, the size of the sub-ball of radius `r <= radius`.
    pub fn beta(&self, r: u32) -> usize {
        assert!(r <= self.radius);
        ball_count(self.m, r).expect("fits in memory") as usize
    }

    /// `sigma(r) = beta(r+1) - beta(r)`, defined for `r < radius`.
    pub fn sigma(&self, r: u32) -> usize {
        self.beta(r + 1) - self.beta(r)
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        if w.len() as u32 > self.radius || w.max_generator() > self.m {
            return None;
        }
        Some(canonical_index(self.m, w) as usize)
    }

    pub fn into_words(self) -> Vec<Word> {
        self.words
    }
}

/// Every reduced word of length at most `n`, in canonical order.
pub fn enumerate_ball(m: usize, n: u32, budget: &Budget) -> Result<Ball> {
    FreeAlphabet::new(m)?;
    let total = ball_count(m, n).ok_or(Error::Overflow("ball size"))?;
    budget.check(total)?;
    let mut words = Vec::with_capacity(total as usize);
    for len in 0..=n as usize {
        words.extend(layer_words(m, len));
    }
    Ok(Ball { m, radius: n, words })
}

fn first_last_ok(s: &[Letter]) -> bool {
    s.len() < 2 || s[0] != -s[s.len() - 1]
}

/// The cyclically reduced words of length exactly `n`, in canonical order.
pub fn enumerate_cyc(m: usize, n: u32, budget: &Budget) -> Result<Vec<Word>> {
    FreeAlphabet::new(m)?;
    let layer = sphere_size(m, n).ok_or(Error::Overflow("sphere size"))?;
    budget.check(layer)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let shards: Vec<Vec<Word>> = (0..2 * m)
        .into_par_iter()
        .map(|r| {
            let mut out = Vec::new();
            visit_layer_from(m, n as usize, letter_at_rank(r), &mut |s| {
                if first_last_ok(s) {
                    out.push(Word::from_reduced(s.to_vec()));
                }
            });
            out
        })
        .collect();
    Ok(shards.concat())
}

/// `|cyc(n)|` by a streaming scan, without materializing the words.
pub fn count_cyc(m: usize, n: u32, budget: &Budget) -> Result<u128> {
    FreeAlphabet::new(m)?;
    let layer = sphere_size(m, n).ok_or(Error::Overflow("sphere size"))?;
    budget.check(layer)?;
    if n == 0 {
        return Ok(0);
    }
    Ok((0..2 * m)
        .into_par_iter()
        .map(|r| {
            let mut c: u128 = 0;
            visit_layer_from(m, n as usize, letter_at_rank(r), &mut |s| {
                if first_last_ok(s) {
                    c += 1;
                }
            });
            c
        })
        .sum())
}

/// `|cyc(n)|` in closed recursion, for any `m >= 1` and `n` within `u128`.
///
/// Tracks reduced words starting with a fixed letter `f` by their last
/// letter: `f`, `f^-1`, or one specific other letter.
pub fn cyc_count_dp(m: usize, n: u32) -> u128 {
    if n == 0 {
        return 0;
    }
    if n == 1 || m == 1 {
        return 2 * m as u128;
    }
    let k = 2 * m as u128;
    let (mut a, mut b, mut c) = (1u128, 0u128, 0u128);
    for _ in 1..n {
        let others = (k - 2) * c;
        let na = a + others;
        let nb = b + others;
        let nc = a + b + (k - 3) * c;
        (a, b, c) = (na, nb, nc);
    }
    k * (a + (k - 2) * c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn reduce_examples() {
        let a2 = FreeAlphabet::new(2).unwrap();
        assert_eq!(reduce(&a2, &[1, -1, 2]).unwrap(), w("b"));
        assert_eq!(reduce(&a2, &[]).unwrap(), Word::identity());
        assert_eq!(reduce(&a2, &[1, 2, -2, -1]).unwrap(), Word::identity());
        assert_eq!(w("aA b"), w("b"));
        assert_eq!(w("abBA"), Word::identity());
    }

    #[test]
    fn reduce_rejects_out_of_range() {
        let a2 = FreeAlphabet::new(2).unwrap();
        assert_eq!(
            reduce(&a2, &[1, 3]),
            Err(Error::LetterOutOfRange { letter: 3, m: 2 })
        );
        assert!(reduce(&a2, &[0]).is_err());
        assert!(Word::parse_in(&a2, "ac").is_err());
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(w("1"), Word::identity());
        assert_eq!(w(""), Word::identity());
        assert_eq!(w("a bB A c").to_string(), "c");
        assert_eq!(Word::identity().to_string(), "1");
        assert!(Word::parse("a1").is_err());
        assert!(Word::parse("a-b").is_err());
    }

    #[test]
    fn cyclic_reduce_examples() {
        assert_eq!(cyclic_reduce(&w("Aba")), w("b"));
        assert_eq!(cyclic_reduce(&w("ab")), w("ab"));
        assert_eq!(cyclic_reduce(&w("AbbA")), w("AbbA"));
        assert_eq!(cyclic_reduce(&w("abcBA")), w("c"));
        assert_eq!(cyclic_reduce(&Word::identity()), Word::identity());
    }

    #[test]
    fn ball_size_examples() {
        assert_eq!(ball_size(2, 1).unwrap(), 5);
        assert_eq!(ball_size(2, 2).unwrap(), 17);
        assert_eq!(ball_size(2, 0).unwrap(), 1);
        assert_eq!(ball_size(3, 2).unwrap(), 37);
        assert!(ball_size(1, 3).is_err());
    }

    #[test]
    fn enumerate_ball_small() {
        let b = enumerate_ball(2, 1, &Budget::default()).unwrap();
        let got: Vec<String> = b.words().iter().map(|x| x.to_string()).collect();
        assert_eq!(got, ["1", "a", "A", "b", "B"]);
        assert_eq!(enumerate_ball(2, 2, &Budget::default()).unwrap().len(), 17);
        assert_eq!(enumerate_ball(3, 2, &Budget::default()).unwrap().len(), 37);
    }

    #[test]
    fn enumerate_ball_refuses_over_budget() {
        let err = enumerate_ball(2, 3, &Budget::new(52)).unwrap_err();
        assert_eq!(err, Error::BudgetExceeded { requested: 53, limit: 52 });
    }

    #[test]
    fn cyc_examples() {
        let b = Budget::default();
        assert_eq!(enumerate_cyc(2, 1, &b).unwrap().len(), 4);
        assert_eq!(enumerate_cyc(2, 2, &b).unwrap().len(), 12);
        assert_eq!(enumerate_cyc(2, 3, &b).unwrap().len(), 28);
        assert_eq!(count_cyc(2, 3, &b).unwrap(), 28);
    }

    #[test]
    fn conjugates_examples() {
        let names = |s: BTreeSet<Word>| s.into_iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert_eq!(names(cyclic_conjugates(&w("ab"), false).unwrap()), ["ab", "ba"]);
        assert_eq!(names(cyclic_conjugates(&w("aa"), true).unwrap()), ["aa", "AA"]);
        assert_eq!(
            names(cyclic_conjugates(&w("ab"), true).unwrap()),
            ["ab", "AB", "ba", "BA"]
        );
        assert!(cyclic_conjugates(&w("abA"), false).is_err());
    }

    #[test]
    fn canonical_index_matches_enumeration() {
        for m in 1..=3 {
            let b = enumerate_ball(m, 4, &Budget::default()).unwrap();
            for (i, x) in b.words().iter().enumerate() {
                assert_eq!(b.index_of(x), Some(i), "m={m} word {x}");
            }
        }
    }

    #[test]
    fn ball_count_matches_closed_form() {
        for m in 2..=5 {
            for n in 0..=10 {
                assert_eq!(ball_count(m, n).unwrap(), ball_size(m, n).unwrap());
            }
        }
        assert_eq!(ball_count(1, 7).unwrap(), 15);
    }

    #[test]
    fn canonical_order_on_letters() {
        let mut v = vec![w("B"), w("b"), w("A"), w("a")];
        v.sort();
        assert_eq!(v, [w("a"), w("A"), w("b"), w("B")]);
        assert!(w("B") < w("aa"));
    }
}
