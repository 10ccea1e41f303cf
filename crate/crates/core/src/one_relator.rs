//! One-relator groups with torsion `<S | r^q>`, `q >= 2`: membership in the
//! normal closure by Dehn's algorithm with threshold `(q-1)|r|`, cyclic
//! classes of roots, and the UR counting experiment.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::budget::Budget;
use crate::dehn::{patterns_for, DehnEngine, Reduction};
use crate::error::{Error, Result};
use crate::metric::BallFingerprint;
use crate::word::{ball_count, cyc_count_dp, cyclic_conjugates, cyclic_reduce, enumerate_ball, enumerate_cyc, Ball, FreeAlphabet, Word};

/// The relator `root^q`.
#[derive(Clone, Debug)]
pub struct PowerRelator {
    root: Word,
    q: u32,
    engine: DehnEngine,
}

impl PowerRelator {
    pub fn new(root: Word, q: u32) -> Result<Self> {
        if q < 2 {
            return Err(Error::ExponentTooSmall(q));
        }
        if root.is_empty() {
            return Err(Error::EmptyRelator);
        }
        if !root.is_cyclically_reduced() {
            return Err(Error::NotCyclicallyReduced(root.to_string()));
        }
        // a subword of a conjugate of r^q qualifies when longer than (q-1)|r|
        let engine = DehnEngine::new(patterns_for(&[root.pow(q)]), (q - 1) as u64, q as u64)?;
        Ok(PowerRelator { root, q, engine })
    }

    pub fn root(&self) -> &Word {
        &self.root
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn relator(&self) -> Word {
        self.root.pow(self.q)
    }

    /// Replacements must exceed this many letters.
    pub fn threshold(&self) -> usize {
        (self.q as usize - 1) * self.root.len()
    }

    pub fn engine(&self) -> &DehnEngine {
        &self.engine
    }
}

/// Membership of `w` in the normal closure of `r^q`, with its trace.
pub fn newman_member(w: &Word, pr: &PowerRelator) -> Reduction {
    pr.engine.reduce(w)
}

/// Minimal element of the class of `w` under rotation and inversion.
pub fn class_representative(w: &Word) -> Word {
    let w = cyclic_reduce(w);
    cyclic_conjugates(&w, true)
        .expect("cyclically reduced")
        .into_iter()
        .next()
        .unwrap_or_default()
}

/// Partition of the (cyclically reduced) input under rotation and inversion.
/// Classes are sorted internally and listed by representative.
pub fn cyclic_classes(words: &[Word]) -> Result<Vec<Vec<Word>>> {
    let mut classes: BTreeMap<Word, Vec<Word>> = BTreeMap::new();
    for w in words {
        if !w.is_cyclically_reduced() {
            return Err(Error::NotCyclicallyReduced(w.to_string()));
        }
        classes.entry(class_representative(w)).or_default().push(w.clone());
    }
    Ok(classes
        .into_values()
        .map(|mut c| {
            c.sort();
            c.dedup();
            c
        })
        .collect())
}

fn closure_fingerprint(ball: &Ball, root: &Word, q: u32) -> BallFingerprint {
    let pr = PowerRelator::new(root.clone(), q).expect("validated root");
    BallFingerprint::from_predicate(ball, |w| pr.engine.accepts(w))
}

/// Class representatives of roots of length `1..=j`.
fn root_classes(m: usize, j: u32, budget: &Budget) -> Result<Vec<Word>> {
    let mut reps = Vec::new();
    for i in 1..=j {
        for c in cyclic_classes(&enumerate_cyc(m, i, budget)?)? {
            reps.push(c[0].clone());
        }
    }
    Ok(reps)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UrDistinguishability {
    pub classes: usize,
    pub distinct_fingerprints: usize,
    /// Pairs of distinct root classes with equal fingerprints.
    pub collisions: Vec<(Word, Word)>,
}

impl UrDistinguishability {
    pub fn ok(&self) -> bool {
        self.collisions.is_empty()
    }
}

/// Compares radius-`n` closure fingerprints of the root classes in cyc(j),
/// `j <= n/q`.
pub fn ur_distinguishability(m: usize, q: u32, n: u32, budget: &Budget) -> Result<UrDistinguishability> {
    FreeAlphabet::new(m)?;
    if q < 2 {
        return Err(Error::ExponentTooSmall(q));
    }
    let reps = root_classes(m, n / q, budget)?;
    let ball = enumerate_ball(m, n, budget)?;
    budget.check(reps.len() as u128 * ball.len() as u128)?;
    let fps: Vec<BallFingerprint> = reps.par_iter().map(|r| closure_fingerprint(&ball, r, q)).collect();
    let mut seen: HashMap<&BallFingerprint, &Word> = HashMap::new();
    let mut collisions = Vec::new();
    for (r, f) in reps.iter().zip(&fps) {
        match seen.get(f) {
            Some(other) => collisions.push(((*other).clone(), r.clone())),
            None => {
                seen.insert(f, r);
            }
        }
    }
    Ok(UrDistinguishability { classes: reps.len(), distinct_fingerprints: seen.len(), collisions })
}

/// Exact `N(UR, 2^-n)`: closures of roots longer than `n/(q-1)` meet the
/// ball of radius `n` only in the identity, so the distinct fingerprints of
/// shorter root classes plus the trivial one are all there is.
pub fn ur_covering_number(m: usize, q: u32, n: u32, budget: &Budget) -> Result<usize> {
    FreeAlphabet::new(m)?;
    if q < 2 {
        return Err(Error::ExponentTooSmall(q));
    }
    let j = n / (q - 1);
    let ball = enumerate_ball(m, n, budget)?;
    let roots: u128 = (1..=j).map(|i| cyc_count_dp(m, i)).sum();
    budget.check(roots.saturating_mul(ball.len() as u128))?;
    let reps = root_classes(m, j, budget)?;
    let mut fps: Vec<BallFingerprint> = reps.par_iter().map(|r| closure_fingerprint(&ball, r, q)).collect();
    let mut trivial = BallFingerprint::empty(crate::metric::Geometry::Free { m }, n);
    trivial.set(0);
    fps.push(trivial);
    fps.sort_by_key(BallFingerprint::to_hex);
    fps.dedup();
    Ok(fps.len())
}

/// One row of the UR experiment; all fields but `n` are empty when
/// `floor(n/q) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct UrDimRow {
    pub n: u32,
    pub root_len: u32,
    /// `|cyc(floor(n/q))|`.
    pub cyc_count: Option<u128>,
    /// `|cyc(j)| / (2j)`, the rotation-only fiber bound.
    pub lower_bound: Option<f64>,
    /// Exact number of classes of roots in cyc(j) under rotation and inversion.
    pub class_count: Option<usize>,
    /// Exact `N(UR, 2^-n)` when affordable.
    pub covering: Option<usize>,
    pub count: Option<f64>,
    pub s: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UrDimReport {
    pub m: usize,
    pub q: u32,
    pub rows: Vec<UrDimRow>,
    /// `log2(2m-1) / q`.
    pub lower_line: f64,
    /// `log2(2m-1) / (q-1)`.
    pub upper_line: f64,
}

pub fn ur_dimension_experiment(
    m: usize,
    q: u32,
    ns: impl IntoIterator<Item = u32>,
    budget: &Budget,
) -> Result<UrDimReport> {
    FreeAlphabet::new(m)?;
    if m < 2 {
        return Err(Error::InvalidArgument("the UR experiment needs m >= 2".into()));
    }
    if q < 2 {
        return Err(Error::ExponentTooSmall(q));
    }
    let log_branch = ((2 * m - 1) as f64).log2();
    let mut rows = Vec::new();
    for n in ns {
        let j = n / q;
        let mut row = UrDimRow {
            n,
            root_len: j,
            cyc_count: None,
            lower_bound: None,
            class_count: None,
            covering: None,
            count: None,
            s: None,
        };
        if j > 0 {
            let cyc = cyc_count_dp(m, j);
            row.cyc_count = Some(cyc);
            row.lower_bound = Some(cyc as f64 / (2 * j) as f64);
            if budget.check(cyc).is_ok() {
                row.class_count = Some(cyclic_classes(&enumerate_cyc(m, j, budget)?)?.len());
            }
            let jj = n / (q - 1);
            let roots: u128 = (1..=jj).map(|i| cyc_count_dp(m, i)).sum();
            let affordable = ball_count(m, n)
                .and_then(|b| b.checked_mul(roots))
                .is_some_and(|t| budget.check(t).is_ok());
            if affordable {
                row.covering = Some(ur_covering_number(m, q, n, budget)?);
            }
            let count = row.covering.map(|c| c as f64).or(row.lower_bound).unwrap();
            row.count = Some(count);
            row.s = (n > 0 && count > 0.0).then(|| count.log2() / n as f64);
        }
        rows.push(row);
    }
    Ok(UrDimReport {
        m,
        q,
        rows,
        lower_line: log_branch / q as f64,
        upper_line: log_branch / (q - 1) as f64,
    })
}
