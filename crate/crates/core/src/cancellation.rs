//! Pieces, the metric small-cancellation condition C'(lambda), the sets
//! ps(n) of C'(lambda) tuples of cyclically reduced words, and membership in
//! their normal closures through Dehn's algorithm.
//!
//! A piece is a word with two distinct occurrences among the cyclic words
//! `r` and `r^-1`, `r` ranging over the relators. An occurrence is a triple
//! (relator, orientation, cyclic start). Reading a whole relator from two
//! starts of the same cyclic word yields the same conjugate, so such
//! full-length matches are not pieces; everything shorter is.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::budget::Budget;
use crate::dehn::{patterns_for, DehnEngine, Reduction};
use crate::error::{Error, Result};
use crate::metric::BallFingerprint;
use crate::one_relator::class_representative;
use crate::word::{
    cyc_count_dp, enumerate_ball, enumerate_cyc, letter_at_rank, FreeAlphabet, Letter, Word,
};

/// A positive rational, the small-cancellation parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Lambda {
    num: u64,
    den: u64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Lambda {
    pub const ONE_SIXTH: Lambda = Lambda { num: 1, den: 6 };

    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidArgument(format!("lambda {num}/{den} must be positive")));
        }
        let g = gcd(num, den);
        Ok(Lambda { num: num / g, den: den / g })
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Whether Dehn's algorithm applies, i.e. `lambda <= 1/6`.
    pub fn admits_dehn(&self) -> bool {
        6 * self.num <= self.den
    }

    /// Smallest piece length that violates C'(lambda) when the shortest
    /// relator has length `min_len`: `ceil(lambda * min_len)`, at least 1.
    pub fn forbidden_piece_len(&self, min_len: usize) -> usize {
        let x = self.num * min_len as u64;
        (x.div_ceil(self.den) as usize).max(1)
    }

    /// `|p| < lambda * min_len`, compared exactly.
    pub fn allows_piece(&self, piece_len: usize, min_len: usize) -> bool {
        (piece_len as u64) * self.den < self.num * min_len as u64
    }

    /// Greendlinger threshold `1 - 3 lambda` as a fraction `(num, den)`.
    pub fn greendlinger_fraction(&self) -> (u64, u64) {
        (self.den - 3 * self.num, self.den)
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Lambda {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("cannot parse lambda {s:?} (expected p/q)"));
        let (p, q) = s.trim().split_once('/').unwrap_or((s.trim(), "1"));
        Lambda::new(p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?)
    }
}

/// Where a piece occurs: relator index, orientation, cyclic start.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Occurrence {
    pub relator: usize,
    pub inverse: bool,
    pub start: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub word: Word,
    pub first: Occurrence,
    pub second: Occurrence,
}

impl Piece {
    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }
}

struct Cycle {
    relator: usize,
    inverse: bool,
    letters: Vec<Letter>,
}

fn cycles_of(relators: &[Word]) -> Result<Vec<Cycle>> {
    let mut out = Vec::with_capacity(2 * relators.len());
    for (i, r) in relators.iter().enumerate() {
        if r.is_empty() {
            return Err(Error::EmptyRelator);
        }
        if !r.is_cyclically_reduced() {
            return Err(Error::NotCyclicallyReduced(r.to_string()));
        }
        out.push(Cycle { relator: i, inverse: false, letters: r.letters().to_vec() });
        out.push(Cycle { relator: i, inverse: true, letters: r.inverse().letters().to_vec() });
    }
    Ok(out)
}

/// Scans occurrence pairs allowed by `pair_ok`. Stops early at the first
/// piece of length `>= stop_at`; otherwise returns the longest piece.
fn scan_pieces(
    cycles: &[Cycle],
    pair_ok: impl Fn(&Cycle, &Cycle) -> bool,
    stop_at: usize,
) -> Option<Piece> {
    let mut best: Option<(usize, usize, usize, usize, usize)> = None;
    'outer: for (ci, a) in cycles.iter().enumerate() {
        for (cj, b) in cycles.iter().enumerate().skip(ci) {
            if !pair_ok(a, b) {
                continue;
            }
            let same = ci == cj;
            let (na, nb) = (a.letters.len(), b.letters.len());
            let cap = if same { na - 1 } else { na.min(nb) };
            let best_len = best.map_or(0, |b| b.4);
            if cap <= best_len {
                continue;
            }
            for s in 0..na {
                let t0 = if same { s + 1 } else { 0 };
                for t in t0..nb {
                    let len = (0..cap)
                        .take_while(|&k| a.letters[(s + k) % na] == b.letters[(t + k) % nb])
                        .count();
                    if len > best.map_or(0, |b| b.4) {
                        best = Some((ci, s, cj, t, len));
                        if len >= stop_at {
                            break 'outer;
                        }
                    }
                }
            }
        }
    }
    best.map(|(ci, s, cj, t, len)| {
        let a = &cycles[ci];
        let b = &cycles[cj];
        let na = a.letters.len();
        Piece {
            word: Word::new((0..len).map(|k| a.letters[(s + k) % na])),
            first: Occurrence { relator: a.relator, inverse: a.inverse, start: s },
            second: Occurrence { relator: b.relator, inverse: b.inverse, start: t },
        }
    })
}

/// The longest piece among a set of relators, if any.
pub fn longest_piece(relators: &[Word]) -> Result<Option<Piece>> {
    let cycles = cycles_of(relators)?;
    Ok(scan_pieces(&cycles, |_, _| true, usize::MAX))
}

/// Length of the longest piece between `u` and `v`. When `v` is a cyclic
/// conjugate of `u` or `u^-1` the two are the same cyclic word and only
/// distinct occurrences inside it count.
pub fn max_piece(u: &Word, v: &Word) -> Result<usize> {
    for x in [u, v] {
        if !x.is_cyclically_reduced() {
            return Err(Error::NotCyclicallyReduced(x.to_string()));
        }
    }
    if u.is_empty() || v.is_empty() {
        return Ok(0);
    }
    let conj = crate::word::cyclic_conjugates(u, true)?;
    if conj.contains(v) {
        return Ok(longest_piece(std::slice::from_ref(u))?.map_or(0, |p| p.len()));
    }
    let cycles = cycles_of(&[u.clone(), v.clone()])?;
    Ok(scan_pieces(&cycles, |a, b| a.relator != b.relator, usize::MAX).map_or(0, |p| p.len()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CPrimeReport {
    pub holds: bool,
    /// The longest piece; on failure it violates the bound.
    pub longest: Option<Piece>,
    pub min_len: usize,
}

impl CPrimeReport {
    pub fn witness(&self) -> Option<&Piece> {
        if self.holds {
            None
        } else {
            self.longest.as_ref()
        }
    }
}

/// Whether every piece `p` satisfies `|p| < lambda * min |r|`.
pub fn check_c_prime(relators: &[Word], lambda: Lambda) -> Result<CPrimeReport> {
    if relators.is_empty() {
        return Err(Error::EmptyRelators);
    }
    let longest = longest_piece(relators)?;
    let min_len = relators.iter().map(Word::len).min().unwrap();
    let holds = lambda.allows_piece(longest.as_ref().map_or(0, Piece::len), min_len);
    Ok(CPrimeReport { holds, longest, min_len })
}

/// Fast yes/no C'(lambda) test, stopping at the first violating piece.
pub fn satisfies_c_prime(relators: &[Word], lambda: Lambda) -> bool {
    let Ok(cycles) = cycles_of(relators) else {
        return false;
    };
    let Some(min_len) = relators.iter().map(Word::len).min() else {
        return false;
    };
    let stop = lambda.forbidden_piece_len(min_len);
    match scan_pieces(&cycles, |_, _| true, stop) {
        None => true,
        Some(p) => lambda.allows_piece(p.len(), min_len),
    }
}

/// The two presentation modes: a C'(lambda) family, or a single `r^q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    SmallCancellation(Lambda),
    OneRelatorPower(u32),
}

/// Relators over a fixed alphabet together with the mode fixing the Dehn
/// threshold.
#[derive(Clone, Debug)]
pub struct Presentation {
    alphabet: FreeAlphabet,
    relators: Vec<Word>,
    mode: Mode,
    engine: DehnEngine,
}

impl Presentation {
    /// A C'(lambda) presentation with `lambda <= 1/6`; the condition is checked.
    pub fn small_cancellation(m: usize, relators: Vec<Word>, lambda: Lambda) -> Result<Self> {
        let alphabet = FreeAlphabet::new(m)?;
        if !lambda.admits_dehn() {
            return Err(Error::LambdaOutOfRange(lambda.to_string()));
        }
        for r in &relators {
            alphabet.check_word(r)?;
        }
        let report = check_c_prime(&relators, lambda)?;
        if let Some(p) = report.witness() {
            return Err(Error::CPrimeViolated {
                lambda: lambda.to_string(),
                piece: p.word.to_string(),
                length: p.len(),
            });
        }
        let (num, den) = lambda.greendlinger_fraction();
        let engine = DehnEngine::new(patterns_for(&relators), num, den)?;
        Ok(Presentation { alphabet, relators, mode: Mode::SmallCancellation(lambda), engine })
    }

    /// The one-relator presentation `<S | root^q>`.
    pub fn one_relator(m: usize, root: Word, q: u32) -> Result<Self> {
        let alphabet = FreeAlphabet::new(m)?;
        alphabet.check_word(&root)?;
        let pr = crate::one_relator::PowerRelator::new(root, q)?;
        let engine = pr.engine().clone();
        Ok(Presentation {
            alphabet,
            relators: vec![pr.relator()],
            mode: Mode::OneRelatorPower(q),
            engine,
        })
    }

    pub fn alphabet(&self) -> FreeAlphabet {
        self.alphabet
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn engine(&self) -> &DehnEngine {
        &self.engine
    }
}

/// Membership in the normal closure of a C'(lambda) presentation,
/// `lambda <= 1/6`, by Dehn's algorithm with the Greendlinger threshold
/// `|s| > (1 - 3 lambda) |r|`. The reduction trace certifies acceptance.
pub fn dehn_member(w: &Word, p: &Presentation) -> Result<Reduction> {
    match p.mode {
        Mode::SmallCancellation(l) if l.admits_dehn() => {}
        Mode::SmallCancellation(l) => return Err(Error::LambdaOutOfRange(l.to_string())),
        Mode::OneRelatorPower(_) => {
            return Err(Error::ModeMismatch { expected: "small cancellation" })
        }
    }
    p.alphabet.check_word(w)?;
    Ok(p.engine.reduce(w))
}

/// Membership bitmap of the normal closure over the ball of radius `n`.
pub fn closure_fingerprint(p: &Presentation, n: u32, budget: &Budget) -> Result<BallFingerprint> {
    let ball = enumerate_ball(p.alphabet.rank(), n, budget)?;
    Ok(BallFingerprint::from_predicate(&ball, |w| p.engine.accepts(w)))
}

/// ps(n): ordered k-tuples from cyc(n) satisfying C'(lambda).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsEnumeration {
    pub count: u128,
    pub tuples: Option<Vec<Vec<Word>>>,
}

fn tuple_budget(m: usize, k: u32, n: u32) -> Result<u128> {
    ((2 * m - 1) as u128)
        .checked_pow(k * n)
        .ok_or(Error::Overflow("ps enumeration size"))
}

/// Exhaustive count of ps(n), optionally keeping the tuples.
pub fn enumerate_ps(
    m: usize,
    k: u32,
    lambda: Lambda,
    n: u32,
    budget: &Budget,
    keep_tuples: bool,
) -> Result<PsEnumeration> {
    FreeAlphabet::new(m)?;
    if k == 0 {
        return Ok(PsEnumeration { count: 1, tuples: keep_tuples.then(|| vec![Vec::new()]) });
    }
    budget.check(tuple_budget(m, k, n)?)?;
    let cyc = enumerate_cyc(m, n, budget)?;
    let shards: Vec<(u128, Vec<Vec<Word>>)> = cyc
        .par_iter()
        .map(|first| {
            let mut count = 0u128;
            let mut kept = Vec::new();
            let mut tuple = vec![first.clone()];
            extend_tuples(&cyc, k as usize, lambda, &mut tuple, &mut |t| {
                count += 1;
                if keep_tuples {
                    kept.push(t.to_vec());
                }
            });
            (count, kept)
        })
        .collect();
    let count = shards.iter().map(|s| s.0).sum();
    let tuples = keep_tuples.then(|| shards.into_iter().flat_map(|s| s.1).collect());
    Ok(PsEnumeration { count, tuples })
}

fn extend_tuples(
    cyc: &[Word],
    k: usize,
    lambda: Lambda,
    tuple: &mut Vec<Word>,
    emit: &mut impl FnMut(&[Word]),
) {
    // every sub-tuple of a C'(lambda) tuple of equal-length words is C'(lambda)
    if !satisfies_c_prime(tuple, lambda) {
        return;
    }
    if tuple.len() == k {
        emit(tuple);
        return;
    }
    for w in cyc {
        tuple.push(w.clone());
        extend_tuples(cyc, k, lambda, tuple, emit);
        tuple.pop();
    }
}

/// Uniform random element of cyc(n): a uniform reduced word, rejected until
/// cyclically reduced.
pub fn sample_cyc(m: usize, n: u32, rng: &mut impl Rng) -> Word {
    assert!(n >= 1);
    loop {
        let mut v: Vec<Letter> = Vec::with_capacity(n as usize);
        v.push(letter_at_rank(rng.random_range(0..2 * m)));
        while v.len() < n as usize {
            let forbidden = -*v.last().unwrap();
            let mut r = rng.random_range(0..2 * m - 1);
            if r >= crate::word::letter_rank(forbidden) {
                r += 1;
            }
            v.push(letter_at_rank(r));
        }
        let w = Word::new(v);
        if w.is_cyclically_reduced() {
            return w;
        }
    }
}

/// Monte Carlo estimate of `|ps(n)|` from uniform samples of cyc(n)^k.
#[derive(Clone, Debug, PartialEq)]
pub struct PsSample {
    pub seed: u64,
    pub samples: u64,
    pub hits: u64,
    pub estimate: f64,
    pub std_error: f64,
    /// `estimate / (2m-1)^(kn)`.
    pub density: f64,
}

pub fn sample_ps(m: usize, k: u32, lambda: Lambda, n: u32, samples: u64, seed: u64) -> Result<PsSample> {
    FreeAlphabet::new(m)?;
    if samples == 0 || n == 0 {
        return Err(Error::InvalidArgument("sampling needs n >= 1 and samples >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..samples {
        let t: Vec<Word> = (0..k).map(|_| sample_cyc(m, n, &mut rng)).collect();
        if k == 0 || satisfies_c_prime(&t, lambda) {
            hits += 1;
        }
    }
    let total = (cyc_count_dp(m, n) as f64).powi(k as i32);
    let p = hits as f64 / samples as f64;
    let estimate = p * total;
    let std_error = total * (p * (1.0 - p) / samples as f64).sqrt();
    let density = estimate / ((2 * m - 1) as f64).powi((k * n) as i32);
    Ok(PsSample { seed, samples, hits, estimate, std_error, density })
}

/// Seeded randomized depth-first search for a cyclically reduced word of
/// length `len` satisfying C'(lambda) on its own. Gives up after
/// `max_nodes` search nodes.
pub fn find_c_prime_relator(
    m: usize,
    len: usize,
    lambda: Lambda,
    seed: u64,
    max_nodes: u64,
) -> Result<Option<Word>> {
    FreeAlphabet::new(m)?;
    if len == 0 {
        return Err(Error::EmptyRelator);
    }
    let bad = lambda.forbidden_piece_len(len);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut search = RelatorSearch {
        m,
        len,
        lambda,
        bad,
        word: Vec::with_capacity(len),
        windows: HashMap::new(),
        nodes: 0,
        max_nodes,
    };
    Ok(search.run(&mut rng))
}

struct RelatorSearch {
    m: usize,
    len: usize,
    lambda: Lambda,
    bad: usize,
    word: Vec<Letter>,
    windows: HashMap<Vec<Letter>, u32>,
    nodes: u64,
    max_nodes: u64,
}

impl RelatorSearch {
    fn run(&mut self, rng: &mut ChaCha8Rng) -> Option<Word> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return None;
        }
        if self.word.len() == self.len {
            let w = Word::new(self.word.iter().copied());
            return (w.len() == self.len
                && w.is_cyclically_reduced()
                && satisfies_c_prime(std::slice::from_ref(&w), self.lambda))
            .then_some(w);
        }
        let mut order: Vec<usize> = (0..2 * self.m).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        for r in order {
            let l = letter_at_rank(r);
            if self.word.last() == Some(&-l) {
                continue;
            }
            self.word.push(l);
            if let Some(added) = self.add_window() {
                if let Some(found) = self.run(rng) {
                    return Some(found);
                }
                self.remove_window(added);
            }
            self.word.pop();
            if self.nodes > self.max_nodes {
                return None;
            }
        }
        None
    }

    /// Registers the newest length-`bad` window and its inverse; `None` when
    /// either already occurs, which would make a forbidden piece.
    fn add_window(&mut self) -> Option<Option<(Vec<Letter>, Vec<Letter>)>> {
        let n = self.word.len();
        if n < self.bad {
            return Some(None);
        }
        let win = self.word[n - self.bad..].to_vec();
        let inv: Vec<Letter> = win.iter().rev().map(|l| -l).collect();
        if self.windows.contains_key(&win) || self.windows.contains_key(&inv) || win == inv {
            return None;
        }
        self.windows.insert(win.clone(), 1);
        self.windows.insert(inv.clone(), 1);
        Some(Some((win, inv)))
    }

    fn remove_window(&mut self, added: Option<(Vec<Letter>, Vec<Letter>)>) {
        if let Some((a, b)) = added {
            self.windows.remove(&a);
            self.windows.remove(&b);
        }
    }
}

/// Key identifying a tuple's normal closure under the known uniqueness
/// results: the multiset of cyclic classes of its relators.
pub fn tuple_class_key(tuple: &[Word]) -> Vec<Word> {
    let mut key: Vec<Word> = tuple.iter().map(class_representative).collect();
    key.sort();
    key
}

/// Result of comparing closure fingerprints across ps(n).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distinguishability {
    pub tuples: usize,
    pub classes: usize,
    pub distinct_fingerprints: usize,
    /// Pairs of distinct classes sharing a fingerprint.
    pub collisions: Vec<(Vec<Word>, Vec<Word>)>,
    /// Classes whose tuples disagree on the fingerprint.
    pub split_classes: Vec<Vec<Word>>,
}

impl Distinguishability {
    pub fn ok(&self) -> bool {
        self.collisions.is_empty() && self.split_classes.is_empty()
    }
}

/// Closure fingerprints at radius `n` for every tuple in ps(n), compared
/// class by class.
pub fn ps_distinguishability(
    m: usize,
    k: u32,
    lambda: Lambda,
    n: u32,
    budget: &Budget,
) -> Result<Distinguishability> {
    let ps = enumerate_ps(m, k, lambda, n, budget, true)?;
    let tuples = ps.tuples.unwrap();
    let ball = enumerate_ball(m, n, budget)?;
    budget.check(tuples.len() as u128 * ball.len() as u128)?;
    let fps: Vec<BallFingerprint> = tuples
        .iter()
        .map(|t| {
            let p = Presentation::small_cancellation(m, t.clone(), lambda)?;
            Ok(BallFingerprint::from_predicate(&ball, |w| p.engine.accepts(w)))
        })
        .collect::<Result<_>>()?;
    let mut by_class: HashMap<Vec<Word>, &BallFingerprint> = HashMap::new();
    let mut split = BTreeSet::new();
    for (t, f) in tuples.iter().zip(&fps) {
        let key = tuple_class_key(t);
        match by_class.get(&key) {
            Some(g) if *g != f => {
                split.insert(key);
            }
            Some(_) => {}
            None => {
                by_class.insert(key, f);
            }
        }
    }
    let mut by_fp: HashMap<&BallFingerprint, Vec<Word>> = HashMap::new();
    let mut collisions = Vec::new();
    let mut keys: Vec<_> = by_class.iter().collect();
    keys.sort_by(|a, b| a.0.cmp(b.0));
    for (key, f) in keys {
        if let Some(other) = by_fp.get(*f) {
            collisions.push((other.clone(), key.clone()));
        } else {
            by_fp.insert(*f, key.clone());
        }
    }
    Ok(Distinguishability {
        tuples: tuples.len(),
        classes: by_class.len(),
        distinct_fingerprints: by_fp.len(),
        collisions,
        split_classes: split.into_iter().collect(),
    })
}

/// One row of the PS dimension experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct PsDimRow {
    pub n: u32,
    /// Exact `|ps(n)|` when the exhaustive scan fits the budget.
    pub ps_count: Option<u128>,
    /// Sampling estimate when the exhaustive scan does not fit.
    pub ps_sample: Option<PsSample>,
    /// `|ps(n)| / (k! (2n)^k)`, a lower bound on the number of distinct closures.
    pub lower_certificate: Option<f64>,
    /// Number of distinct closure fingerprints at radius `n` over ps(n).
    pub fingerprint_count: Option<usize>,
    /// Exact `N(PS, 2^-n)` when affordable.
    pub covering: Option<usize>,
    /// The count used for `s_n`: the covering number when known, else the
    /// lower certificate.
    pub count: f64,
    pub s: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsDimReport {
    pub m: usize,
    pub k: u32,
    pub lambda: Lambda,
    pub rows: Vec<PsDimRow>,
    /// `k log2(2m-1)`.
    pub lower_line: f64,
    /// `k / (1 - 3 lambda) * log2(2m-1)`.
    pub upper_line: f64,
}

/// Options for [`ps_dimension_experiment`].
#[derive(Clone, Copy, Debug)]
pub struct PsDimOptions {
    /// Fall back to sampling with this seed when the scan is too large.
    pub seed: Option<u64>,
    pub samples: u64,
}

impl Default for PsDimOptions {
    fn default() -> Self {
        PsDimOptions { seed: None, samples: 100_000 }
    }
}

/// Largest relator length whose closures can meet the ball of radius `n`
/// in more than the identity: `(1 - 3 lambda) j < n`.
fn visible_length(lambda: Lambda, n: u32) -> u32 {
    let (gn, gd) = lambda.greendlinger_fraction();
    ((n as u64 * gd).saturating_sub(1) / gn) as u32
}

/// Exact `N(PS, 2^-n)`. Closures of relators of length `j` with
/// `(1 - 3 lambda) j >= n` meet the ball of radius `n` only in the identity,
/// so the distinct fingerprints of shorter tuples, up to cyclic classes,
/// plus the trivial one are all there is.
pub fn ps_covering_number(m: usize, k: u32, lambda: Lambda, n: u32, budget: &Budget) -> Result<usize> {
    FreeAlphabet::new(m)?;
    if !lambda.admits_dehn() {
        return Err(Error::LambdaOutOfRange(lambda.to_string()));
    }
    let jmax = visible_length(lambda, n);
    let scan = (1..=jmax).try_fold(0u128, |acc, j| acc.checked_add(tuple_budget(m, k, j).ok()?));
    budget.check(scan.ok_or(Error::Overflow("ps enumeration size"))?)?;
    let ball = enumerate_ball(m, n, budget)?;
    let mut keys: BTreeSet<Vec<Word>> = BTreeSet::new();
    if k > 0 {
        for j in 1..=jmax {
            for t in enumerate_ps(m, k, lambda, j, budget, true)?.tuples.unwrap() {
                keys.insert(tuple_class_key(&t));
            }
        }
    }
    budget.check((keys.len() as u128 + 1) * ball.len() as u128)?;
    let keys: Vec<Vec<Word>> = keys.into_iter().collect();
    let mut fps: Vec<BallFingerprint> = keys
        .par_iter()
        .map(|t| {
            let p = Presentation::small_cancellation(m, t.clone(), lambda)?;
            Ok(BallFingerprint::from_predicate(&ball, |w| p.engine.accepts(w)))
        })
        .collect::<Result<_>>()?;
    fps.push(BallFingerprint::from_predicate(&ball, Word::is_empty));
    let distinct: std::collections::HashSet<&BallFingerprint> = fps.iter().collect();
    Ok(distinct.len())
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

pub fn ps_dimension_experiment(
    m: usize,
    k: u32,
    lambda: Lambda,
    ns: impl IntoIterator<Item = u32>,
    budget: &Budget,
    opts: PsDimOptions,
) -> Result<PsDimReport> {
    FreeAlphabet::new(m)?;
    if m < 2 {
        return Err(Error::InvalidArgument("the PS experiment needs m >= 2".into()));
    }
    if !lambda.admits_dehn() {
        return Err(Error::LambdaOutOfRange(lambda.to_string()));
    }
    let log_branch = ((2 * m - 1) as f64).log2();
    let (gn, gd) = lambda.greendlinger_fraction();
    let lower_line = k as f64 * log_branch;
    let upper_line = k as f64 * gd as f64 / gn as f64 * log_branch;
    let mut rows = Vec::new();
    for n in ns {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        let fiber = factorial(k) * ((2 * n) as f64).powi(k as i32);
        let exhaustive = tuple_budget(m, k, n).is_ok_and(|t| budget.check(t).is_ok());
        let mut row = PsDimRow {
            n,
            ps_count: None,
            ps_sample: None,
            lower_certificate: None,
            fingerprint_count: None,
            covering: None,
            count: 0.0,
            s: None,
        };
        if exhaustive {
            let ps = enumerate_ps(m, k, lambda, n, budget, false)?;
            row.ps_count = Some(ps.count);
            row.lower_certificate = Some(ps.count as f64 / fiber);
            let ball_len = crate::word::ball_count(m, n).unwrap_or(u128::MAX);
            if ps.count > 0 && budget.check(ps.count.saturating_mul(ball_len)).is_ok() {
                let d = ps_distinguishability(m, k, lambda, n, budget)?;
                row.fingerprint_count = Some(d.distinct_fingerprints);
            } else if ps.count == 0 {
                row.fingerprint_count = Some(0);
            }
        } else if let Some(seed) = opts.seed {
            let s = sample_ps(m, k, lambda, n, opts.samples, seed.wrapping_add(n as u64))?;
            row.lower_certificate = Some(s.estimate / fiber);
            row.ps_sample = Some(s);
        } else {
            budget.check(tuple_budget(m, k, n)?)?;
        }
        match ps_covering_number(m, k, lambda, n, budget) {
            Ok(c) => row.covering = Some(c),
            Err(e) if e.is_budget() => {}
            Err(e) => return Err(e),
        }
        row.count = match (row.covering, row.lower_certificate) {
            (Some(c), _) => c as f64,
            (None, Some(l)) => l,
            (None, None) => 0.0,
        };
        row.s = (row.count > 0.0).then(|| row.count.log2() / n as f64);
        rows.push(row);
    }
    Ok(PsDimReport { m, k, lambda, rows, lower_line, upper_line })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn lambda_parsing_and_thresholds() {
        let l: Lambda = "2/12".parse().unwrap();
        assert_eq!(l, Lambda::ONE_SIXTH);
        assert_eq!(l.to_string(), "1/6");
        assert!(l.admits_dehn());
        assert!(!"1/5".parse::<Lambda>().unwrap().admits_dehn());
        assert!("0/3".parse::<Lambda>().is_err());
        assert!("x".parse::<Lambda>().is_err());
        // pieces must be shorter than 18/6 = 3
        assert!(l.allows_piece(2, 18));
        assert!(!l.allows_piece(3, 18));
        assert_eq!(l.forbidden_piece_len(18), 3);
        assert_eq!(l.forbidden_piece_len(19), 4);
        assert_eq!(l.greendlinger_fraction(), (3, 6));
    }

    #[test]
    fn max_piece_examples() {
        assert_eq!(max_piece(&w("abab"), &w("abab")).unwrap(), 3);
        assert_eq!(max_piece(&w("aab"), &w("abb")).unwrap(), 2);
        assert_eq!(max_piece(&w("ab"), &w("ab")).unwrap(), 0);
        assert_eq!(max_piece(&w("ab"), &w("ba")).unwrap(), 0);
        assert!(max_piece(&w("abA"), &w("ab")).is_err());
    }

    #[test]
    fn c_prime_examples() {
        let r = check_c_prime(&[w("abab")], Lambda::ONE_SIXTH).unwrap();
        assert!(!r.holds);
        assert_eq!(r.witness().unwrap().word, w("aba"));
        assert!(check_c_prime(&[w("ab")], Lambda::ONE_SIXTH).unwrap().holds);
        assert!(check_c_prime(&[w("a")], Lambda::ONE_SIXTH).unwrap().holds);
        assert_eq!(check_c_prime(&[], Lambda::ONE_SIXTH), Err(Error::EmptyRelators));
        assert!(check_c_prime(&[w("abA")], Lambda::ONE_SIXTH).is_err());
    }

    #[test]
    fn fast_check_agrees_with_report() {
        let b = Budget::default();
        for n in 1..=6 {
            for r in enumerate_cyc(2, n, &b).unwrap() {
                for l in ["1/6", "1/3", "1/2", "2/3"] {
                    let l: Lambda = l.parse().unwrap();
                    let rs = [r.clone()];
                    assert_eq!(
                        satisfies_c_prime(&rs, l),
                        check_c_prime(&rs, l).unwrap().holds,
                        "{r} {l}"
                    );
                }
            }
        }
    }

    #[test]
    fn ps_small_cases() {
        let b = Budget::default();
        let l = Lambda::ONE_SIXTH;
        // only words without repeated letters have no pieces at all
        let counts: Vec<u128> =
            (1..=6).map(|n| enumerate_ps(2, 1, l, n, &b, false).unwrap().count).collect();
        assert_eq!(counts, [4, 8, 0, 0, 0, 0]);
        let e = enumerate_ps(2, 0, l, 5, &b, true).unwrap();
        assert_eq!(e.count, 1);
        assert_eq!(e.tuples.unwrap(), vec![Vec::<Word>::new()]);
        assert!(enumerate_ps(2, 1, l, 12, &Budget::new(1000), false).is_err());
    }

    #[test]
    fn presentation_requires_c_prime() {
        let err = Presentation::small_cancellation(2, vec![w("abab")], Lambda::ONE_SIXTH);
        assert!(matches!(err, Err(Error::CPrimeViolated { .. })));
        let err = Presentation::small_cancellation(2, vec![w("ab")], "1/5".parse().unwrap());
        assert!(matches!(err, Err(Error::LambdaOutOfRange(_))));
    }

    #[test]
    fn dehn_on_a_found_relator() {
        let r = find_c_prime_relator(2, 30, Lambda::ONE_SIXTH, 7, 2_000_000)
            .unwrap()
            .expect("relator of length 30");
        let p = Presentation::small_cancellation(2, vec![r.clone()], Lambda::ONE_SIXTH).unwrap();
        assert!(dehn_member(&r, &p).unwrap().accepted());
        assert!(!dehn_member(&w("a"), &p).unwrap().accepted());
        for g in ["a", "ab", "Ba"] {
            let g = w(g);
            let x = &(&(&g * &r) * &g.inverse()) * &r.inverse();
            let red = dehn_member(&x, &p).unwrap();
            assert!(red.accepted(), "{x}");
            assert_eq!(p.engine().replay(&x, &red.steps).unwrap(), Word::identity());
        }
        let one = Presentation::one_relator(2, w("ab"), 2).unwrap();
        assert!(matches!(dehn_member(&r, &one), Err(Error::ModeMismatch { .. })));
    }

    #[test]
    fn closure_fingerprint_of_long_relator_is_trivial() {
        let r = find_c_prime_relator(2, 30, Lambda::ONE_SIXTH, 3, 2_000_000).unwrap().unwrap();
        let p = Presentation::small_cancellation(2, vec![r], Lambda::ONE_SIXTH).unwrap();
        let f = closure_fingerprint(&p, 5, &Budget::default()).unwrap();
        assert_eq!(f.ones().collect::<Vec<_>>(), [0]);
        let f0 = closure_fingerprint(&p, 0, &Budget::default()).unwrap();
        assert_eq!(f0.len(), 1);
        assert!(f0.get(0));
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = sample_ps(2, 1, "1/2".parse().unwrap(), 6, 2000, 42).unwrap();
        let b = sample_ps(2, 1, "1/2".parse().unwrap(), 6, 2000, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.hits > 0 && a.hits < a.samples);
    }

    #[test]
    fn ps_dim_bound_lines() {
        let b = Budget::default();
        let r = ps_dimension_experiment(2, 1, Lambda::ONE_SIXTH, 1..=4, &b, Default::default())
            .unwrap();
        assert!((r.lower_line - 1.5849625).abs() < 1e-6);
        assert!((r.upper_line - 2.0 * 1.5849625).abs() < 1e-6);
        let ps: Vec<Option<u128>> = r.rows.iter().map(|row| row.ps_count).collect();
        assert_eq!(ps, [Some(4), Some(8), Some(0), Some(0)]);
        // {1}, <<a>>, <<b>> at radius 1; add <<ab>> and <<aB>> at radius 2
        assert_eq!(r.rows[0].covering, Some(3));
        assert_eq!(r.rows[1].covering, Some(5));
        assert_eq!(r.rows[0].fingerprint_count, Some(2));
        let r2 = ps_dimension_experiment(2, 2, Lambda::ONE_SIXTH, 1..=1, &b, Default::default())
            .unwrap();
        assert!((r2.lower_line - 2.0 * 1.5849625).abs() < 1e-6);
    }
}
