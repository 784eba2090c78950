mod common;

use common::arb_tree;
use proptest::prelude::*;
use rnng::evaluation::{brackets, f1};
use rnng::transition::{execute, oracle, Mode};
use rnng::treebank::Tree;

/// Same yield as `t`, different bracketing: alternately flatten and nest.
fn rebracket(t: &Tree, flip: bool) -> Tree {
    let leaves: Vec<Tree> = t.leaves().into_iter().map(Tree::leaf).collect();
    if flip || leaves.len() < 2 {
        Tree::node("S", leaves)
    } else {
        let (head, tail) = leaves.split_at(1);
        Tree::node("S", vec![Tree::node("NP", head.to_vec()), Tree::node("VP", tail.to_vec())])
    }
}

proptest! {
    #[test]
    fn brackets_survive_oracle_round_trip(t in arb_tree()) {
        let back = execute::<&str>(&oracle(&t, Mode::Generate).unwrap(), Mode::Generate, None).unwrap();
        prop_assert_eq!(brackets(&back), brackets(&t));
        let n = t.leaf_count();
        for b in brackets(&t) {
            prop_assert!(b.start < b.end && b.end <= n);
        }
        prop_assert_eq!(brackets(&t).len(), t.internal_count());
    }

    #[test]
    fn f1_symmetry_and_bounds(golds in prop::collection::vec(arb_tree(), 1..6), flip in any::<bool>()) {
        let preds: Vec<Tree> = golds.iter().map(|t| rebracket(t, flip)).collect();
        let a = f1(&golds, &preds).unwrap();
        let b = f1(&preds, &golds).unwrap();
        prop_assert_eq!(a.total.precision(), b.total.recall());
        prop_assert_eq!(a.total.recall(), b.total.precision());
        prop_assert_eq!(a.total.f1(), b.total.f1());
        for v in [a.precision(), a.recall(), a.f1()] {
            prop_assert!((0.0..=100.0).contains(&v));
        }
        prop_assert_eq!(a.total.f1() == 0.0, a.total.matched == 0);
    }
}
