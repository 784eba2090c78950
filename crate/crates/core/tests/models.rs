mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rnng::inference::exact::{generation_mass, parse_distribution};
use rnng::models::{
    DiscriminativeModel, GenerativeModel, LstmLm, ModelConfig, ModelError, Trainable, MOVE, NT_OFFSET, REDUCE,
};
use rnng::neural::{grad_check, Dropout, Graph, Precision};
use rnng::transition::{oracle, Action, Mode};
use rnng::treebank::{WordClasses, SingletonPolicy, Vocab};

fn step_log_probs(gen: &GenerativeModel<f64>, actions: &[Action]) -> Vec<f64> {
    let mut g = gen.graph();
    let mut st = gen.start(&mut g);
    let mut out = Vec::new();
    for a in actions {
        let sc = gen.scores(&mut g, &st, &mut Dropout::Off).unwrap();
        let idx = match a {
            Action::Reduce => REDUCE,
            Action::Gen(_) | Action::Shift => MOVE,
            Action::Nt(x) => NT_OFFSET + gen.vocab().nonterminal_index(x).unwrap(),
        };
        let mut lp = sc.log_prob(&g, idx);
        if let Action::Gen(w) = a {
            let n = gen.word_log_prob(&mut g, sc.u, w).unwrap();
            lp += g.scalar(n);
        }
        out.push(lp);
        st = gen.advance(&mut g, &st, a, &mut Dropout::Off).unwrap();
    }
    out
}

#[test]
fn zero_parameters_give_uniform_actions() {
    let mut gen = gen_model(&["a"], &["X"], 3, 100, 1);
    zero(gen.store_mut());
    // (X a): NT is the only valid action, then {GEN, NT}, then {REDUCE, GEN, NT}
    let lp = gen.sequence_log_prob(&["a"], &tree("(X a)")).unwrap();
    assert!((lp + 6f64.ln()).abs() < 1e-12, "{lp}");
    let steps = step_log_probs(&gen, &oracle(&tree("(X a)"), Mode::Generate).unwrap());
    assert_eq!(steps[0], 0.0);
    assert!((steps[1] + 2f64.ln()).abs() < 1e-12);
    assert!((steps[2] + 3f64.ln()).abs() < 1e-12);
}

#[test]
fn zero_combiner_gives_zero_state_embedding() {
    let mut gen = gen_model(&["a", "b"], &["X", "Y"], 4, 100, 2);
    for name in ["state.w", "state.c"] {
        let id = gen.store().id(name).unwrap();
        gen.store_mut().param_mut(id).data.iter_mut().for_each(|v| *v = 0.0);
    }
    let mut g = gen.graph();
    let mut st = gen.start(&mut g);
    for a in oracle(&tree("(X (Y a b) a)"), Mode::Generate).unwrap() {
        let sc = gen.scores(&mut g, &st, &mut Dropout::Off).unwrap();
        assert!(g.value(sc.u).iter().all(|&v| v == 0.0));
        st = gen.advance(&mut g, &st, &a, &mut Dropout::Off).unwrap();
    }
}

#[test]
fn chosen_action_product_matches_sequence_log_prob() {
    let gen = gen_model(&["The", "hungry", "cat", "meows", "."], &["S", "NP", "VP"], 5, 100, 3);
    let t = tree(HUNGRY_CAT);
    let steps = step_log_probs(&gen, &oracle(&t, Mode::Generate).unwrap());
    let direct = gen.sequence_log_prob(&t.leaves(), &t).unwrap();
    let product: f64 = steps.iter().map(|l| l.exp()).product();
    assert!((product - direct.exp()).abs() < 1e-9);
    assert_eq!(steps.len(), 11);
}

#[test]
fn scoring_is_pure() {
    let gen = gen_model(&["a", "b"], &["X", "Y"], 4, 100, 4);
    let trees = ["(X a b)", "(Y (X a) b)", "(X (Y b) (X a a))"].map(tree);
    let forward: Vec<f64> = trees.iter().map(|t| gen.tree_log_prob(t).unwrap()).collect();
    let backward: Vec<f64> = trees.iter().rev().map(|t| gen.tree_log_prob(t).unwrap()).collect();
    assert_eq!(forward, backward.into_iter().rev().collect::<Vec<_>>());
}

#[test]
fn yield_mismatch_and_unknown_symbols() {
    let gen = gen_model(&["a", "b"], &["X"], 3, 100, 5);
    assert!(matches!(
        gen.sequence_log_prob(&["a"], &tree("(X b)")),
        Err(ModelError::YieldMismatch(_))
    ));
    assert!(matches!(gen.tree_log_prob(&tree("(Z a)")), Err(ModelError::UnknownLabel(_))));
    let mut g = gen.graph();
    let st = gen.start(&mut g);
    let sc = gen.scores(&mut g, &st, &mut Dropout::Off).unwrap();
    assert!(matches!(gen.word_log_prob(&mut g, sc.u, "zzz"), Err(ModelError::UnknownWord(_))));
}

#[test]
fn single_valid_action_has_log_prob_zero() {
    let gen = gen_model(&["a"], &["X"], 3, 100, 6);
    let mut g = gen.graph();
    let st = gen.start(&mut g);
    let sc = gen.scores(&mut g, &st, &mut Dropout::Off).unwrap();
    assert_eq!(sc.log_prob(&g, NT_OFFSET), 0.0);
    let disc = disc_model(&["a"], &["X"], 3, 1, 6);
    // with cap 1 after NT(X) on "a", only SHIFT remains; then only REDUCE
    let mut g = disc.graph();
    let st = disc.start(&mut g, &["a"], &mut Dropout::Off).unwrap();
    let st = disc.advance(&mut g, &st, &Action::nt("X"), &mut Dropout::Off).unwrap();
    let sc = disc.scores(&mut g, &st, &mut Dropout::Off).unwrap();
    assert_eq!(sc.log_prob(&g, MOVE), 0.0);
}

#[test]
fn terminal_state_has_no_distribution() {
    let gen = gen_model(&["a"], &["X"], 3, 100, 7);
    let mut g = gen.graph();
    let mut st = gen.start(&mut g);
    for a in oracle(&tree("(X a)"), Mode::Generate).unwrap() {
        st = gen.advance(&mut g, &st, &a, &mut Dropout::Off).unwrap();
    }
    assert!(gen.scores(&mut g, &st, &mut Dropout::Off).is_err());
}

#[test]
fn stack_embedding_after_seven_actions() {
    let gen = gen_model(&["The", "hungry", "cat", "meows", "."], &["S", "NP", "VP"], 4, 100, 8);
    let actions = oracle(&tree(HUNGRY_CAT), Mode::Generate).unwrap();
    let mut g = gen.graph();
    let mut st = gen.start(&mut g);
    for a in &actions[..7] {
        st = gen.advance(&mut g, &st, a, &mut Dropout::Off).unwrap();
    }
    // stack: open S, completed NP, open VP
    let stack = st.algo().stack();
    assert_eq!(stack.len(), 3);
    assert!(stack[0].is_open_nt() && stack[2].is_open_nt());
    let items = st.item_embeddings().to_vec();
    let emb = gen.store().id("emb.nonterminal").unwrap();
    let s_row = gen.store().param(emb).row(0).to_vec();
    let vp_row = gen.store().param(emb).row(2).to_vec();
    assert_eq!(g.value(items[0]), &s_row[..]);
    assert_eq!(g.value(items[2]), &vp_row[..]);
    // the NP item is the composition of its label and words
    let t_emb = gen.store().id("emb.terminal").unwrap();
    let word_rows: Vec<Vec<f64>> = (0..3).map(|i| gen.store().param(t_emb).row(i).to_vec()).collect();
    let mut g2 = gen.graph();
    let mut st2 = gen.start(&mut g2);
    for a in &actions[..6] {
        st2 = gen.advance(&mut g2, &st2, a, &mut Dropout::Off).unwrap();
    }
    assert_eq!(g.value(items[1]), g2.value(st2.item_embeddings()[1]));
    assert_ne!(g.value(items[1]), &word_rows[0][..]);
    // s_t after seven actions equals a fresh stack LSTM run over the three items
    let replay_actions = [Action::nt("S"), Action::nt("NP"), Action::gen("The"), Action::gen("hungry"), Action::gen("cat"), Action::Reduce, Action::nt("VP")];
    let mut g3 = gen.graph();
    let mut st3 = gen.start(&mut g3);
    for a in &replay_actions {
        st3 = gen.advance(&mut g3, &st3, a, &mut Dropout::Off).unwrap();
    }
    assert_eq!(g.value(st.stack_embedding()), g3.value(st3.stack_embedding()));
}

#[test]
fn state_embedding_gradient_check() {
    let mut gen = gen_model(&["a", "b"], &["X", "Y"], 3, 100, 9);
    let t = tree("(X (Y a) b)");
    let actions = oracle(&t, Mode::Generate).unwrap();
    let model = gen.clone();
    let err = grad_check(gen.store_mut(), 1e-6, |g: &mut Graph<'_, f64>| {
        let mut st = model.start(g);
        for a in &actions[..4] {
            st = model.advance(g, &st, a, &mut Dropout::Off).map_err(|e| match e {
                ModelError::Neural(n) => n,
                e => panic!("{e}"),
            })?;
        }
        let sc = model.scores(g, &st, &mut Dropout::Off).unwrap();
        let parts: Vec<_> = (0..3).map(|i| g.pick(sc.u, i).unwrap()).collect();
        g.sum(&parts)
    })
    .unwrap();
    assert!(err < 1e-4, "{err}");
}

fn neural(e: ModelError) -> rnng::neural::NeuralError {
    match e {
        ModelError::Neural(n) => n,
        e => panic!("{e}"),
    }
}

#[test]
fn full_loss_gradient_checks() {
    let mut gen = gen_model(&["a", "b"], &["X", "Y"], 3, 100, 10);
    let t = tree("(X (Y a) b)");
    let model = gen.clone();
    let err = grad_check(gen.store_mut(), 1e-6, |g| model.loss(g, &t, &mut Dropout::Off).map(|l| l.node).map_err(neural)).unwrap();
    assert!(err < 1e-4, "generative {err}");

    let mut disc = disc_model(&["a", "b"], &["X", "Y"], 3, 100, 11);
    let model = disc.clone();
    let err = grad_check(disc.store_mut(), 1e-6, |g| model.loss(g, &t, &mut Dropout::Off).map(|l| l.node).map_err(neural)).unwrap();
    assert!(err < 1e-4, "discriminative {err}");

    let mut lm = lm_model(&["a", "b"], 3, 12);
    let model = lm.clone();
    let s = words("a b a");
    let err = grad_check(lm.store_mut(), 1e-6, |g| model.loss(g, &s, &mut Dropout::Off).map(|l| l.node).map_err(neural)).unwrap();
    assert!(err < 1e-4, "lm {err}");
}

#[test]
fn generator_mass_is_bounded_and_grows() {
    let gen = gen_model(&["a", "b"], &["X"], 3, 2, 13);
    let mut prev = 0.0;
    for len in [3, 5, 7, 9, 11] {
        let m = generation_mass(&gen, len).unwrap();
        assert!(m.total <= 1.0 + 1e-9, "{len}: {}", m.total);
        assert!(m.total >= prev);
        prev = m.total;
    }
    assert!(prev > 0.0);
}

#[test]
fn tiny_generator_mass_approaches_one() {
    // vocab {a}, one NT, cap 1: derivations are (X a^k) with tail mass
    // decaying geometrically
    let mut gen = gen_model(&["a"], &["X"], 2, 1, 14);
    zero(gen.store_mut());
    let m = generation_mass(&gen, 40).unwrap();
    // zero parameters: after the first GEN each step is REDUCE or GEN with
    // probability 1/2, so the mass of (X a^k) is 2^-k
    let want: f64 = (1..=38).map(|k| 0.5f64.powi(k)).sum();
    assert!((m.total - want).abs() < 1e-12, "{} vs {want}", m.total);
}

#[test]
fn parser_distribution_normalizes() {
    let disc = disc_model(&["a", "b"], &["X"], 4, 2, 15);
    let dist = parse_distribution(&disc, &["a", "b"]).unwrap();
    let total: f64 = dist.iter().map(|(_, l)| l.exp()).sum();
    assert!((total - 1.0).abs() < 1e-6, "{total}");
    for (t, lq) in &dist {
        let direct = disc.sequence_log_prob(&t.leaves(), t).unwrap();
        assert!((direct - lq).abs() < 1e-9);
    }
}

#[test]
fn single_parse_has_probability_one() {
    let disc = disc_model(&["a", "b"], &["X"], 4, 1, 16);
    let dist = parse_distribution(&disc, &["a", "b"]).unwrap();
    assert_eq!(dist.len(), 1);
    assert!(dist[0].1.abs() < 1e-12);
    assert!(disc.sequence_log_prob(&["a", "b"], &tree("(X a b)")).unwrap().abs() < 1e-12);
}

#[test]
fn zero_parameter_parser_symmetry() {
    let mut disc = disc_model(&["a", "b"], &["X", "Y"], 3, 1, 17);
    zero(disc.store_mut());
    // with cap 1 every parse is (L a b) for a label L: same length, same
    // valid-set sizes along the way
    let dist = parse_distribution(&disc, &["a", "b"]).unwrap();
    assert_eq!(dist.len(), 2);
    assert!((dist[0].1 - dist[1].1).abs() < 1e-15);
    assert!((dist[0].1 - 0.5f64.ln()).abs() < 1e-12);
}

#[test]
fn lm_zero_parameters_and_chain_rule() {
    let mut lm = lm_model(&["a"], 3, 18);
    zero(lm.store_mut());
    let lp = lm.log_prob(&["a"]).unwrap();
    assert!((lp - 0.25f64.ln()).abs() < 1e-12);
    assert!((lm.log_prob(&[] as &[&str]).unwrap() - 0.5f64.ln()).abs() < 1e-12);

    let lm = lm_model(&["a", "b", "c"], 4, 19);
    let s = words("a c b b a");
    let whole = lm.log_prob(&s).unwrap();
    let mut g = lm.graph();
    let mut st = lm.start(&mut g);
    let mut sum = 0.0;
    for w in &s {
        let i = lm.vocab().terminal_index(w).unwrap();
        let d = lm.next_distribution(&mut g, &st).unwrap();
        assert!((d.iter().map(|l| l.exp()).sum::<f64>() - 1.0).abs() < 1e-9);
        sum += d[i];
        st = lm.advance(&mut g, &st, i, &mut Dropout::Off).unwrap();
    }
    sum += lm.next_distribution(&mut g, &st).unwrap()[lm.stop()];
    assert!((sum - whole).abs() < 1e-9);
}

#[test]
fn checkpoint_round_trips() {
    let gen = gen_model(&["a", "b"], &["X", "Y"], 4, 3, 20);
    let t = tree("(X (Y a) b)");
    let back = GenerativeModel::<f64>::load(&gen.save()).unwrap();
    assert_eq!(gen.tree_log_prob(&t).unwrap(), back.tree_log_prob(&t).unwrap());
    assert_eq!(back.config(), gen.config());
    assert!(DiscriminativeModel::<f64>::load(&gen.save()).is_err());

    let disc = disc_model(&["a", "b"], &["X", "Y"], 4, 3, 21);
    let back = DiscriminativeModel::<f64>::load(&disc.save()).unwrap();
    assert_eq!(disc.sequence_log_prob(&["a", "b"], &t).unwrap(), back.sequence_log_prob(&["a", "b"], &t).unwrap());

    let lm = lm_model(&["a", "b"], 4, 22);
    let back = LstmLm::<f64>::load(&lm.save()).unwrap();
    assert_eq!(lm.log_prob(&["a", "b"]).unwrap(), back.log_prob(&["a", "b"]).unwrap());

    // 64-bit checkpoint read at 32 bits and back
    let narrow = GenerativeModel::<f32>::load(&gen.save()).unwrap();
    assert_eq!(narrow.store().params()[0].data.len(), gen.store().params()[0].data.len());
    let a = gen.tree_log_prob(&t).unwrap();
    let b = narrow.tree_log_prob(&t).unwrap();
    assert!((a - b).abs() < 1e-4);
    assert_eq!(rnng::neural::Precision::F32.to_string(), "f32");
    let _ = Precision::F64;
}

#[test]
fn unknown_words_map_through_unk() {
    let corpus: Vec<_> = ["(S (NP the cat) (VP runs))", "(S (NP the dog) (VP runs))", "(S (NP a cat) (VP sleeps))"]
        .into_iter()
        .map(tree)
        .collect();
    let vocab = rnng::treebank::build_vocab(&corpus, SingletonPolicy::BerkeleyRules).unwrap();
    let classes = WordClasses::single(vocab.terminals.len());
    let gen = GenerativeModel::<f64>::new(ModelConfig::tiny(3), vocab.clone(), classes).unwrap();
    let lp = gen.tree_log_prob(&tree("(S (NP the bird) (VP runs))")).unwrap();
    assert!(lp.is_finite() && lp < 0.0);
    let disc = DiscriminativeModel::<f64>::new(ModelConfig::tiny(3), vocab).unwrap();
    let lq = disc.sequence_log_prob(&["the", "bird", "runs"], &tree("(S (NP the bird) (VP runs))")).unwrap();
    assert!(lq.is_finite() && lq < 0.0);
    let _ = Vocab::closed(&corpus, SingletonPolicy::SingleUnk).unwrap();
}

fn random_walk_checks(seed: u64) {
    let gen = gen_model(&["a", "b", "c"], &["X", "Y"], 4, 3, seed);
    let disc = disc_model(&["a", "b", "c"], &["X", "Y"], 4, 3, seed + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut g = gen.graph();
    let mut st = gen.start(&mut g);
    for _ in 0..30 {
        if st.is_terminal() {
            break;
        }
        let sc = gen.scores(&mut g, &st, &mut Dropout::Off).unwrap();
        let lps = g.value(sc.log_probs).to_vec();
        let total: f64 = lps.iter().map(|l| l.exp()).sum();
        assert!((total - 1.0).abs() < 1e-9);
        let words = gen.word_softmax().all_log_probs(&mut g, sc.u).unwrap();
        assert!((words.iter().map(|l| l.exp()).sum::<f64>() - 1.0).abs() < 1e-9);
        let valid: Vec<usize> = (0..lps.len()).filter(|&i| lps[i].is_finite()).collect();
        let i = valid[rng.gen_range(0..valid.len())];
        let a = match i {
            REDUCE => Action::Reduce,
            MOVE => Action::gen(["a", "b", "c"][rng.gen_range(0..3)]),
            n => Action::nt(["X", "Y"][n - NT_OFFSET]),
        };
        st = gen.advance(&mut g, &st, &a, &mut Dropout::Off).unwrap();
    }

    let sentence: Vec<&str> = (0..rng.gen_range(1..5)).map(|_| ["a", "b", "c"][rng.gen_range(0..3)]).collect();
    let mut g = disc.graph();
    let mut st = disc.start(&mut g, &sentence, &mut Dropout::Off).unwrap();
    while !st.is_terminal() {
        let sc = disc.scores(&mut g, &st, &mut Dropout::Off).unwrap();
        let lps = g.value(sc.log_probs).to_vec();
        assert!((lps.iter().map(|l| l.exp()).sum::<f64>() - 1.0).abs() < 1e-9);
        let valid: Vec<usize> = (0..lps.len()).filter(|&i| lps[i].is_finite()).collect();
        let i = valid[rng.gen_range(0..valid.len())];
        let a = match i {
            REDUCE => Action::Reduce,
            MOVE => Action::Shift,
            n => Action::nt(["X", "Y"][n - NT_OFFSET]),
        };
        st = disc.advance(&mut g, &st, &a, &mut Dropout::Off).unwrap();
    }
    assert_eq!(st.algo().clone().into_tree().unwrap().leaves(), sentence);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]
    #[test]
    fn local_normalization_on_random_states(seed in 0u64..10_000) {
        random_walk_checks(seed);
    }
}

#[test]
fn dropout_changes_training_loss_only() {
    let mut cfg = config(4, 100);
    cfg.dropout = 0.5;
    let vocab = toy_vocab(&["a", "b"], &["X"]);
    let gen = GenerativeModel::<f64>::new(cfg, vocab.clone(), WordClasses::single(2)).unwrap();
    let t = tree("(X a b)");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut g = gen.graph();
    let on = gen.loss(&mut g, &t, &mut Dropout::On { rate: 0.5, rng: &mut rng }).unwrap();
    let mut g2 = gen.graph();
    let off = gen.loss(&mut g2, &t, &mut Dropout::Off).unwrap();
    assert_ne!(g.scalar(on.node), g2.scalar(off.node));
    assert_eq!(-g2.scalar(off.node), gen.tree_log_prob(&t).unwrap());
    assert_eq!(off.events, 4);
}
