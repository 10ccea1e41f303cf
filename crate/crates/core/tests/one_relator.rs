mod common;

use common::{closure_products, naive_ball, w};
use mgl_core::one_relator::{cyclic_classes, newman_member, ur_covering_number, ur_distinguishability, PowerRelator};
use mgl_core::word::enumerate_cyc;
use mgl_core::{Budget, Word};
use proptest::prelude::*;

fn budget() -> Budget {
    Budget::new(Budget::DEFAULT_LIMIT)
}

#[test]
fn four_classes_of_length_two() {
    let classes = cyclic_classes(&enumerate_cyc(2, 2, &budget()).unwrap()).unwrap();
    assert_eq!(classes.len(), 4);
    let total: usize = classes.iter().map(Vec::len).sum();
    assert_eq!(total, 12);
}

#[test]
fn classes_partition_the_input() {
    for n in 1..=5 {
        let cyc = enumerate_cyc(2, n, &budget()).unwrap();
        let classes = cyclic_classes(&cyc).unwrap();
        let mut all: Vec<Word> = classes.concat();
        all.sort();
        assert_eq!(all, cyc);
        for c in &classes {
            for u in c {
                let rotations: Vec<Word> = (0..u.len()).flat_map(|k| [u.rotate(k), u.rotate(k).inverse()]).collect();
                assert!(c.iter().all(|v| rotations.contains(v)), "{u}");
            }
        }
    }
}

#[test]
fn short_words_are_rejected_below_threshold() {
    for len in 1..=3 {
        for root in enumerate_cyc(2, len, &budget()).unwrap() {
            for q in 2..=3 {
                let pr = PowerRelator::new(root.clone(), q).unwrap();
                let t = pr.threshold();
                assert_eq!(t, (q as usize - 1) * len as usize);
                for u in naive_ball(2, t as u32).into_iter().map(Word::new).filter(|u| !u.is_empty()) {
                    assert!(!newman_member(&u, &pr).accepted(), "{u} for {root}^{q}");
                }
            }
        }
    }
}

#[test]
fn closure_members_are_accepted() {
    for (root, q) in [("ab", 2), ("aab", 2), ("abAB", 2), ("ab", 3), ("aBB", 3)] {
        let pr = PowerRelator::new(w(root), q).unwrap();
        for u in closure_products(&[pr.relator()], 2, 2, 2) {
            let red = newman_member(&u, &pr);
            assert!(red.accepted(), "{u} for {root}^{q}");
            assert!(pr.engine().replay(&u, &red.steps).unwrap().is_empty());
        }
    }
}

#[test]
fn distinct_root_classes_are_distinguishable() {
    let d = ur_distinguishability(2, 2, 6, &budget()).unwrap();
    assert!(d.ok(), "{:?}", d.collisions);
    assert_eq!(d.classes, d.distinct_fingerprints);
    assert!(ur_covering_number(2, 2, 6, &budget()).unwrap() >= 2);
}

#[test]
fn invalid_roots_are_refused() {
    assert!(PowerRelator::new(w("ab"), 1).is_err());
    assert!(PowerRelator::new(w("abA"), 2).is_err());
    assert!(PowerRelator::new(Word::identity(), 2).is_err());
}

proptest! {
    #[test]
    fn rejected_words_keep_their_reduction(v in prop::collection::vec(prop::sample::select(vec![1i8, -1, 2, -2]), 0..30)) {
        let pr = PowerRelator::new(w("aab"), 2).unwrap();
        let u = Word::new(v);
        let red = newman_member(&u, &pr);
        prop_assert_eq!(pr.engine().replay(&u, &red.steps).unwrap(), red.output.clone());
        prop_assert!(red.steps.iter().all(|s| s.length > pr.threshold()));
    }
}
