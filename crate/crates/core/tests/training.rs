mod common;

use common::*;
use rnng::evaluation::f1;
use rnng::inference::greedy_parse;
use rnng::models::{DiscriminativeModel, GenerativeModel, LstmLm, ModelConfig, Trainable};
use rnng::training::{dev_loss, train_discriminative, train_generative, train_lstm_lm, TrainConfig, TrainError};
use rnng::treebank::{assign_word_classes, build_vocab, parse_bracketed, SingletonPolicy, Tree, Vocab, WordClasses};

fn toy_corpus() -> Vec<Tree> {
    parse_bracketed(include_str!("data/toy500.trees")).unwrap()
}

fn gen_for(corpus: &[Tree], dim: usize) -> GenerativeModel<f64> {
    let vocab = build_vocab(corpus, SingletonPolicy::BerkeleyRules).unwrap();
    let classes = assign_word_classes(&vocab, None).unwrap();
    GenerativeModel::new(ModelConfig::tiny(dim), vocab, classes).unwrap()
}

fn disc_for(corpus: &[Tree], dim: usize) -> DiscriminativeModel<f64> {
    let vocab = build_vocab(corpus, SingletonPolicy::BerkeleyRules).unwrap();
    DiscriminativeModel::new(ModelConfig::tiny(dim), vocab).unwrap()
}

fn lm_for(sentences: &[Vec<String>], dim: usize) -> LstmLm<f64> {
    let trees: Vec<Tree> = sentences.iter().map(|s| Tree::node("X", s.iter().map(Tree::leaf).collect())).collect();
    let vocab = Vocab::closed(&trees, SingletonPolicy::SingleUnk).unwrap();
    let classes = WordClasses::single(vocab.terminals.len());
    LstmLm::new(ModelConfig::tiny(dim), vocab, classes).unwrap()
}

fn sentences(trees: &[Tree]) -> Vec<Vec<String>> {
    trees.iter().map(|t| t.leaves().into_iter().map(String::from).collect()).collect()
}

fn cfg(epochs: usize) -> TrainConfig {
    TrainConfig {
        epochs,
        ..Default::default()
    }
}

#[test]
fn zero_learning_rate_changes_nothing() {
    let corpus = toy_corpus()[..10].to_vec();
    let mut gen = gen_for(&corpus, 8);
    let before = gen.store().clone();
    let c = TrainConfig {
        learning_rate: 0.0,
        dropout: 0.3,
        ..cfg(2)
    };
    train_generative(&mut gen, &corpus, &corpus[..2], &c).unwrap();
    for (a, b) in before.params().iter().zip(gen.store().params()) {
        assert_eq!(a.data, b.data, "{}", a.name);
    }
    let mut disc = disc_for(&corpus, 8);
    let before = disc.store().clone();
    train_discriminative(&mut disc, &corpus, &corpus[..2], &c).unwrap();
    for (a, b) in before.params().iter().zip(disc.store().params()) {
        assert_eq!(a.data, b.data, "{}", a.name);
    }
}

#[test]
fn training_is_deterministic() {
    let corpus = toy_corpus()[..15].to_vec();
    let run = || {
        let mut gen = gen_for(&corpus, 8);
        let c = TrainConfig {
            dropout: 0.2,
            eval_every: Some(4),
            ..cfg(3)
        };
        let r = train_generative(&mut gen, &corpus[..12], &corpus[12..], &c).unwrap();
        (r.format_log(), r.checkpoint)
    };
    let (a, ca) = run();
    let (b, cb) = run();
    assert_eq!(a, b);
    assert_eq!(ca, cb);
    assert_eq!(a.lines().count(), 9);
}

#[test]
fn single_tree_generative_overfit() {
    let t = tree(HUNGRY_CAT);
    let corpus = vec![t.clone(), t.clone()];
    let mut gen = gen_for(&corpus, 16);
    let r = train_generative(&mut gen, &corpus[..1], &corpus[1..], &cfg(300)).unwrap();
    let per_action = (-gen.tree_log_prob(&t).unwrap() / 11.0).exp();
    assert!(per_action < 1.05, "per-action perplexity {per_action}");
    // the first epochs' training loss does not increase
    let losses: Vec<f64> = r.log.iter().map(|l| l.loss).collect();
    for w in losses[..10].windows(2) {
        assert!(w[1] <= w[0], "{losses:?}");
    }
}

#[test]
fn discriminative_overfit_parses_training_trees() {
    let corpus = toy_corpus()[..20].to_vec();
    let mut disc = disc_for(&corpus, 24);
    train_discriminative(&mut disc, &corpus, &corpus, &cfg(200)).unwrap();
    let parsed: Vec<Tree> = corpus.iter().map(|t| greedy_parse(&disc, &t.leaves()).unwrap()).collect();
    let scores = f1(&corpus, &parsed).unwrap();
    assert_eq!(scores.f1(), 100.0);
}

#[test]
fn skewed_unigram_lm() {
    // 90% of tokens are "the"
    let mut data = Vec::new();
    for i in 0..40 {
        let mut s = vec!["the".to_string(); 9];
        s.insert(i % 10, ["cat", "dog"][i % 2].to_string());
        data.push(s);
    }
    let mut lm = lm_for(&data, 8);
    train_lstm_lm(&mut lm, &data, &data[..5], &cfg(3)).unwrap();
    let mut g = lm.graph();
    let st = lm.start(&mut g);
    let d = lm.next_distribution(&mut g, &st).unwrap();
    let the = lm.vocab().terminal_index("the").unwrap();
    assert!(d[the].exp() > 0.5, "{}", d[the].exp());
}

#[test]
fn lm_dev_perplexity_improves() {
    let s = sentences(&toy_corpus());
    let mut lm = lm_for(&s, 16);
    let r = train_lstm_lm(&mut lm, &s[..450], &s[450..], &cfg(3)).unwrap();
    assert!(r.best_dev < r.initial_dev, "{} vs {}", r.best_dev, r.initial_dev);
    // selection keeps the minimum logged dev loss
    let min = r.log.iter().filter_map(|l| l.dev_loss).fold(f64::INFINITY, f64::min);
    assert_eq!(r.best_dev, min.min(r.initial_dev));
    assert_eq!(dev_loss(&lm, &s[450..]).unwrap(), r.best_dev);
    let back = LstmLm::<f64>::load(&r.checkpoint).unwrap();
    assert_eq!(dev_loss(&back, &s[450..]).unwrap(), r.best_dev);
}

#[test]
fn single_sentence_lm_overfit() {
    let s = vec![words("the hungry cat meows .")];
    let mut lm = lm_for(&s, 16);
    train_lstm_lm(&mut lm, &s, &s, &cfg(500)).unwrap();
    let ppl = (-lm.log_prob(&s[0]).unwrap() / 5.0).exp();
    assert!(ppl < 1.1, "{ppl}");
}

#[test]
fn empty_dev_is_an_error() {
    let s = vec![words("a b")];
    let mut lm = lm_for(&s, 4);
    assert!(matches!(train_lstm_lm(&mut lm, &s, &[], &cfg(1)), Err(TrainError::EmptyDev)));
}

#[test]
fn trees_over_the_cap_are_skipped() {
    let corpus = vec![tree("(X a b)"), tree("(X (X (X a)) b)"), tree("(X b a)")];
    let vocab = build_vocab(&[corpus[0].clone(), corpus[0].clone()], SingletonPolicy::SingleUnk).unwrap();
    let mut gen = GenerativeModel::<f64>::new(config(4, 2), vocab, WordClasses::single(2)).unwrap();
    let r = train_generative(&mut gen, &corpus, &corpus, &cfg(1)).unwrap();
    assert_eq!((r.skipped_train, r.skipped_dev), (1, 1));
    let over = vec![tree("(X (X (X a)) b)")];
    assert!(matches!(
        train_generative(&mut gen, &over, &corpus, &cfg(1)),
        Err(TrainError::NothingToTrain(1))
    ));
}

#[test]
fn initial_losses_are_finite() {
    let corpus = toy_corpus();
    let gen = gen_for(&corpus, 8);
    let disc = disc_for(&corpus, 8);
    let mut g = gen.graph();
    for t in &corpus[..50] {
        let mark = g.len();
        let l = gen.loss(&mut g, t, &mut rnng::neural::Dropout::Off).unwrap();
        assert!(g.scalar(l.node).is_finite());
        g.truncate(mark);
    }
    assert!(dev_loss(&disc, &corpus[..50]).unwrap().is_finite());
}

#[test]
fn patience_stops_early() {
    let corpus = toy_corpus()[..6].to_vec();
    let mut gen = gen_for(&corpus, 4);
    // a huge rate makes dev loss worse quickly
    let c = TrainConfig {
        learning_rate: 5.0,
        patience: Some(1),
        clip: Some(1.0),
        ..cfg(20)
    };
    let r = train_generative(&mut gen, &corpus[..3], &corpus[3..], &c).unwrap();
    assert!(r.epochs_run < 20);
}
