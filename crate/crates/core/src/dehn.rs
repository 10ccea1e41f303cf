//! Dehn's algorithm over a family of cyclic patterns.
//!
//! A step finds a subword `s` of the current word that is also a subword of
//! a cyclic conjugate `c = s t` of some pattern, with `|s|` above a fixed
//! fraction of `|c|`, and replaces `s` by `t^-1`. When the fraction is at
//! least one half every step shortens the word. Small-cancellation
//! presentations and one-relator groups with torsion use the same engine
//! with different patterns and thresholds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::word::{Letter, Word};

/// A relator `r` (or `r^-1`) read cyclically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicPattern {
    pub letters: Vec<Letter>,
    /// Index of the relator this pattern came from.
    pub relator: usize,
    /// Whether the pattern is the inverse of that relator.
    pub inverse: bool,
}

impl CyclicPattern {
    #[inline]
    fn at(&self, i: usize) -> Letter {
        self.letters[i % self.letters.len()]
    }

    /// Length of the common prefix of `w[pos..]` and the pattern read from
    /// `offset`, capped at the pattern length.
    fn match_len(&self, w: &[Letter], pos: usize, offset: usize) -> usize {
        let cap = self.letters.len().min(w.len() - pos);
        (0..cap).take_while(|&k| w[pos + k] == self.at(offset + k)).count()
    }

    /// `t^-1` where `s t` is the conjugate starting at `offset` and `|s| = len`.
    fn complement_inverse(&self, offset: usize, len: usize) -> Vec<Letter> {
        let n = self.letters.len();
        (len..n).rev().map(|k| -self.at(offset + k)).collect()
    }
}

/// Patterns and threshold from a list of relators: `r_1, r_1^-1, r_2, ...`.
pub fn patterns_for(relators: &[Word]) -> Vec<CyclicPattern> {
    relators
        .iter()
        .enumerate()
        .flat_map(|(i, r)| {
            [
                CyclicPattern { letters: r.letters().to_vec(), relator: i, inverse: false },
                CyclicPattern { letters: r.inverse().letters().to_vec(), relator: i, inverse: true },
            ]
        })
        .collect()
}

/// One replacement, enough to replay the reduction without searching.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    /// Start of the replaced subword in the word before this step.
    pub position: usize,
    pub relator: usize,
    /// Whether the subword was read from the inverse relator.
    pub inverse: bool,
    /// Rotation of the (possibly inverted) relator the subword starts at.
    pub offset: usize,
    /// Length of the replaced subword.
    pub length: usize,
}

/// Outcome of running Dehn's algorithm to a fixed point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub input: Word,
    pub output: Word,
    pub steps: Vec<TraceStep>,
}

impl Reduction {
    pub fn accepted(&self) -> bool {
        self.output.is_empty()
    }
}

/// Replacement is allowed for `|s| * den > num * |c|`.
#[derive(Clone, Debug)]
pub struct DehnEngine {
    patterns: Vec<CyclicPattern>,
    num: u64,
    den: u64,
}

impl DehnEngine {
    /// `num / den` is the fraction of the pattern length a subword must
    /// exceed; it must be at least one half so that steps shorten words.
    pub fn new(patterns: Vec<CyclicPattern>, num: u64, den: u64) -> Result<Self> {
        if den == 0 || 2 * num < den {
            return Err(Error::InvalidArgument(format!(
                "Dehn threshold {num}/{den} is below one half"
            )));
        }
        if patterns.iter().any(|p| p.letters.is_empty()) {
            return Err(Error::EmptyRelator);
        }
        Ok(DehnEngine { patterns, num, den })
    }

    pub fn patterns(&self) -> &[CyclicPattern] {
        &self.patterns
    }

    #[inline]
    pub fn qualifies(&self, len: usize, pattern_len: usize) -> bool {
        len as u64 * self.den > self.num * pattern_len as u64
    }

    /// The longest qualifying subword; leftmost on ties, then first pattern,
    /// then smallest offset.
    fn find_step(&self, w: &[Letter]) -> Option<(TraceStep, usize)> {
        let mut best: Option<(TraceStep, usize)> = None;
        for pos in 0..w.len() {
            for (pi, p) in self.patterns.iter().enumerate() {
                let n = p.letters.len();
                for offset in 0..n {
                    let len = p.match_len(w, pos, offset);
                    if len == 0 || !self.qualifies(len, n) {
                        continue;
                    }
                    if best.is_none_or(|(b, _)| len > b.length) {
                        let step = TraceStep {
                            position: pos,
                            relator: p.relator,
                            inverse: p.inverse,
                            offset,
                            length: len,
                        };
                        best = Some((step, pi));
                    }
                }
            }
        }
        best
    }

    pub fn reduce(&self, w: &Word) -> Reduction {
        let mut cur = w.letters().to_vec();
        let mut steps = Vec::new();
        while let Some((step, pi)) = self.find_step(&cur) {
            let p = &self.patterns[pi];
            let mut next = cur[..step.position].to_vec();
            next.extend(p.complement_inverse(step.offset, step.length));
            next.extend_from_slice(&cur[step.position + step.length..]);
            let reduced = Word::new(next);
            debug_assert!(reduced.len() < cur.len());
            cur = reduced.letters().to_vec();
            steps.push(step);
        }
        Reduction { input: w.clone(), output: Word::new(cur), steps }
    }

    /// Boolean membership without keeping a trace.
    pub fn accepts(&self, w: &Word) -> bool {
        self.reduce(w).accepted()
    }

    /// Checks a trace step by step against the relators, without searching.
    /// Returns the final word.
    pub fn replay(&self, w: &Word, steps: &[TraceStep]) -> Result<Word> {
        let mut cur = w.clone();
        for (i, s) in steps.iter().enumerate() {
            let bad = |why: &str| Error::InvalidArgument(format!("trace step {i}: {why}"));
            let p = self
                .patterns
                .iter()
                .find(|p| p.relator == s.relator && p.inverse == s.inverse)
                .ok_or_else(|| bad("unknown relator"))?;
            let n = p.letters.len();
            if s.offset >= n || s.length > n || s.position + s.length > cur.len() {
                return Err(bad("out of range"));
            }
            if !self.qualifies(s.length, n) {
                return Err(bad("replaced subword too short"));
            }
            let conj: Vec<Letter> = (0..n).map(|k| p.letters[(s.offset + k) % n]).collect();
            let (sub, rest) = conj.split_at(s.length);
            if &cur.letters()[s.position..s.position + s.length] != sub {
                return Err(bad("subword does not match the relator"));
            }
            let before = Word::new(cur.letters()[..s.position].iter().copied());
            let after = Word::new(cur.letters()[s.position + s.length..].iter().copied());
            let repl = Word::new(rest.iter().copied()).inverse();
            cur = &(&before * &repl) * &after;
        }
        Ok(cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn threshold_must_shorten() {
        assert!(DehnEngine::new(patterns_for(&[w("ab")]), 1, 3).is_err());
        assert!(DehnEngine::new(patterns_for(&[w("ab")]), 1, 2).is_ok());
    }

    #[test]
    fn reduces_relator_and_replays() {
        let r = w("abaBBAbabAB");
        let e = DehnEngine::new(patterns_for(std::slice::from_ref(&r)), 1, 2).unwrap();
        let red = e.reduce(&r);
        assert!(red.accepted());
        assert_eq!(red.steps[0].length, r.len());
        assert_eq!(e.replay(&r, &red.steps).unwrap(), Word::identity());
    }

    #[test]
    fn replay_rejects_forged_steps() {
        let r = w("aabab");
        let e = DehnEngine::new(patterns_for(std::slice::from_ref(&r)), 1, 2).unwrap();
        let forged = TraceStep { position: 0, relator: 0, inverse: false, offset: 1, length: 5 };
        assert!(e.replay(&r, &[forged]).is_err());
        let short = TraceStep { position: 0, relator: 0, inverse: false, offset: 0, length: 2 };
        assert!(e.replay(&r, &[short]).is_err());
    }

    #[test]
    fn trace_json_fields() {
        let s = TraceStep { position: 3, relator: 1, inverse: true, offset: 2, length: 7 };
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(
            j,
            r#"{"position":3,"relator":1,"inverse":true,"offset":2,"length":7}"#
        );
    }
}
