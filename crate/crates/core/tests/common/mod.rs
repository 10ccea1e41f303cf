//! Independent oracles shared by the integration tests. They use nothing
//! from the library beyond the `Word` type and its free reduction.

#![allow(dead_code)]

use std::collections::BTreeSet;

use mgl_core::Word;

pub fn w(s: &str) -> Word {
    s.parse().expect("word literal")
}

/// Reduced words of length at most `n` over `m` generators, built by
/// extending words letter by letter and sorted by length, then by the
/// letter order `a < A < b < B < ...`.
pub fn naive_ball(m: usize, n: u32) -> Vec<Vec<i8>> {
    let letters: Vec<i8> = (1..=m as i8).flat_map(|g| [g, -g]).collect();
    let mut all = vec![vec![]];
    let mut layer: Vec<Vec<i8>> = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for u in &layer {
            for &l in &letters {
                if u.last() != Some(&-l) {
                    let mut v = u.clone();
                    v.push(l);
                    next.push(v);
                }
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    let key = |u: &Vec<i8>| (u.len(), u.iter().map(|&l| 2 * (l.unsigned_abs() as usize - 1) + usize::from(l < 0)).collect::<Vec<_>>());
    all.sort_by_key(key);
    all
}

/// Members of the normal closure of `relators` that are products of at most
/// `factors` conjugates `g r^{+-1} g^-1` with `|g| <= conj_len`, keeping
/// those of reduced length at most `max_len`. The identity is always kept.
pub fn bfs_closure(relators: &[Word], m: usize, factors: usize, conj_len: u32, max_len: usize) -> BTreeSet<Word> {
    let conjugators: Vec<Word> = naive_ball(m, conj_len).into_iter().map(Word::new).collect();
    let mut singles = Vec::new();
    for r in relators {
        for s in [r.clone(), r.inverse()] {
            for g in &conjugators {
                singles.push(&(g * &s) * &g.inverse());
            }
        }
    }
    let mut out = BTreeSet::new();
    out.insert(Word::identity());
    let mut products = vec![Word::identity()];
    for _ in 0..factors {
        let mut next = Vec::with_capacity(products.len() * singles.len());
        for p in &products {
            for s in &singles {
                next.push(p * s);
            }
        }
        out.extend(next.iter().filter(|x| x.len() <= max_len).cloned());
        products = next;
    }
    out
}

/// Every product of at most `factors` conjugates regardless of length.
pub fn closure_products(relators: &[Word], m: usize, factors: usize, conj_len: u32) -> Vec<Word> {
    let conjugators: Vec<Word> = naive_ball(m, conj_len).into_iter().map(Word::new).collect();
    let mut singles = Vec::new();
    for r in relators {
        for s in [r.clone(), r.inverse()] {
            for g in &conjugators {
                singles.push(&(g * &s) * &g.inverse());
            }
        }
    }
    let mut out = vec![];
    let mut products = vec![Word::identity()];
    for _ in 0..factors {
        products = products.iter().flat_map(|p| singles.iter().map(move |s| p * s)).collect();
        out.extend(products.iter().cloned());
    }
    out
}

/// Images of `(b, c, d)` under an oracle symbol: `true` means the letter
/// acts as `a` on the subtree, `false` as the identity.
pub fn symbol_images(s: u8) -> [bool; 3] {
    match s {
        0 => [true, true, false],
        1 => [true, false, true],
        2 => [false, true, true],
        _ => panic!("symbol {s}"),
    }
}

/// Action of one generator of the group with oracle `omega` on a binary
/// vertex. Generators: 1 = a, 2 = b, 3 = c, 4 = d (signs ignored, all are
/// involutions). `b, c, d` act on `0x` by their image at the current depth
/// and on `1x` recursively one level deeper.
fn act(letter: i8, vertex: &mut [u8], omega: &dyn Fn(usize) -> u8) {
    let g = letter.unsigned_abs();
    if vertex.is_empty() {
        return;
    }
    if g == 1 {
        vertex[0] ^= 1;
        return;
    }
    let mut depth = 0;
    while depth < vertex.len() {
        if vertex[depth] == 0 {
            if symbol_images(omega(depth))[(g - 2) as usize] && depth + 1 < vertex.len() {
                vertex[depth + 1] ^= 1;
            }
            return;
        }
        depth += 1;
    }
}

/// Whether the word acts trivially on every vertex of the given level.
pub fn acts_trivially(word: &[i8], omega: &dyn Fn(usize) -> u8, level: usize) -> bool {
    (0..1u32 << level).all(|code| {
        let v0: Vec<u8> = (0..level).map(|i| ((code >> i) & 1) as u8).collect();
        let mut v = v0.clone();
        for &l in word.iter().rev() {
            act(l, &mut v, omega);
        }
        v == v0
    })
}
