use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rnng::inference::{
    estimate_marginal, generate, greedy_parse, map_parse, perplexity, sample_parse, sentence_seed, InferenceError,
};
use rnng::models::{peek_kind, DiscriminativeModel, GenerativeModel, LstmLm, ModelKind};
use rnng::neural::Real;

use crate::{read_bytes, read_sentences, Globals, Output, Prec};

const DEFAULT_SEED: u64 = 1;

fn rng_for(globals: &Globals, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sentence_seed(globals.seed.unwrap_or(DEFAULT_SEED), index as u64))
}

fn load_kind(path: &Path) -> Result<(Vec<u8>, ModelKind)> {
    let bytes = read_bytes(path)?;
    let kind = peek_kind(&bytes).with_context(|| format!("reading checkpoint {}", path.display()))?;
    Ok((bytes, kind))
}

fn expect_kind(path: &Path, found: ModelKind, want: ModelKind) -> Result<()> {
    if found != want {
        bail!("{} holds a {found:?} model; expected {want:?}", path.display());
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct ParseArgs {
    /// Discriminative parser checkpoint.
    #[arg(long)]
    model: PathBuf,
    /// Generative model for sample-and-rerank parsing; greedy parsing
    /// without it.
    #[arg(long)]
    gen_model: Option<PathBuf>,
    /// Proposal samples per sentence when reranking.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Flattening exponent for the proposal when reranking.
    #[arg(long, default_value_t = 0.8)]
    alpha: f64,
    /// Sentences, one per line (tokens or bracketed trees).
    #[arg(long = "in")]
    input: PathBuf,
    /// Floating-point precision for model arithmetic.
    #[arg(long, value_enum, default_value_t = Prec::F64)]
    precision: Prec,
    #[command(flatten)]
    out: Output,
}

pub fn parse(a: ParseArgs, globals: &Globals) -> Result<()> {
    match a.precision {
        Prec::F32 => parse_with::<f32>(&a, globals),
        Prec::F64 => parse_with::<f64>(&a, globals),
    }
}

fn parse_with<T: Real>(a: &ParseArgs, globals: &Globals) -> Result<()> {
    let (bytes, kind) = load_kind(&a.model)?;
    expect_kind(&a.model, kind, ModelKind::Discriminative)?;
    let disc = DiscriminativeModel::<T>::load(&bytes)?;
    let gen = match &a.gen_model {
        Some(p) => {
            let (bytes, kind) = load_kind(p)?;
            expect_kind(p, kind, ModelKind::Generative)?;
            if a.samples == 0 {
                bail!("--samples must be at least 1");
            }
            Some(GenerativeModel::<T>::load(&bytes)?)
        }
        None => None,
    };
    let sentences = read_sentences(&a.input)?;
    let trees: Vec<String> = sentences
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let t = match &gen {
                Some(gen) => map_parse(gen, &disc, x, a.samples, a.alpha, &mut rng_for(globals, i)),
                None => greedy_parse(&disc, x),
            };
            t.map(|t| t.to_string()).with_context(|| format!("sentence {}", i + 1))
        })
        .collect::<Result<_>>()?;
    a.out.write(&trees.iter().map(|t| format!("{t}\n")).collect::<String>())
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// Generative model (samples sentences with trees) or parser (samples
    /// parses of `--in` sentences).
    #[arg(long)]
    model: PathBuf,
    /// Number of (sentence, tree) samples from a generative model.
    #[arg(long, default_value_t = 10)]
    count: usize,
    /// Action budget per generated derivation.
    #[arg(long, default_value_t = 1000)]
    max_steps: usize,
    /// Sentences to parse when sampling from a parser.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Parses per sentence when sampling from a parser.
    #[arg(long, default_value_t = 1)]
    samples: usize,
    /// Flattening exponent for parser samples.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Floating-point precision for model arithmetic.
    #[arg(long, value_enum, default_value_t = Prec::F64)]
    precision: Prec,
    #[command(flatten)]
    out: Output,
}

pub fn sample(a: SampleArgs, globals: &Globals) -> Result<()> {
    match a.precision {
        Prec::F32 => sample_with::<f32>(&a, globals),
        Prec::F64 => sample_with::<f64>(&a, globals),
    }
}

fn sample_with<T: Real>(a: &SampleArgs, globals: &Globals) -> Result<()> {
    let (bytes, kind) = load_kind(&a.model)?;
    match kind {
        ModelKind::Generative => {
            let gen = GenerativeModel::<T>::load(&bytes)?;
            let draws: Vec<Option<String>> = (0..a.count)
                .into_par_iter()
                .map(|i| match generate(&gen, &mut rng_for(globals, i), a.max_steps) {
                    Ok((_, t)) => Ok(Some(t.to_string())),
                    Err(InferenceError::StepBudget { .. }) => Ok(None),
                    Err(e) => Err(e),
                })
                .collect::<Result<_, _>>()?;
            let over = draws.iter().filter(|d| d.is_none()).count();
            if over > 0 {
                log::warn!("{over} samples exceeded {} actions and were dropped", a.max_steps);
            }
            a.out.write(&draws.into_iter().flatten().map(|t| format!("{t}\n")).collect::<String>())
        }
        ModelKind::Discriminative => {
            let Some(input) = &a.input else {
                bail!("sampling from a parser needs --in");
            };
            let disc = DiscriminativeModel::<T>::load(&bytes)?;
            let sentences = read_sentences(input)?;
            let blocks: Vec<String> = sentences
                .par_iter()
                .enumerate()
                .map(|(i, x)| {
                    let mut rng = rng_for(globals, i);
                    let mut block = String::new();
                    for _ in 0..a.samples {
                        let s = sample_parse(&disc, x, a.alpha, &mut rng)?;
                        block.push_str(&format!("{}\t{:.6}\t{}\n", i + 1, s.log_q, s.tree));
                    }
                    Ok(block)
                })
                .collect::<Result<_, InferenceError>>()?;
            a.out.write(&blocks.concat())
        }
        ModelKind::LstmLm => bail!("sampling from the sequential LM is not supported"),
    }
}

#[derive(Args, Debug)]
pub struct LmEvalArgs {
    /// Generative model or sequential LM checkpoint.
    #[arg(long)]
    model: PathBuf,
    /// Discriminative proposal (required for a generative model).
    #[arg(long)]
    proposal: Option<PathBuf>,
    /// Importance samples per sentence.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Flattening exponent of the proposal.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Sentences, one per line (tokens or bracketed trees).
    #[arg(long = "in")]
    input: PathBuf,
    /// Floating-point precision for model arithmetic.
    #[arg(long, value_enum, default_value_t = Prec::F64)]
    precision: Prec,
    #[command(flatten)]
    out: Output,
}

pub fn lm_eval(a: LmEvalArgs, globals: &Globals) -> Result<()> {
    match a.precision {
        Prec::F32 => lm_eval_with::<f32>(&a, globals),
        Prec::F64 => lm_eval_with::<f64>(&a, globals),
    }
}

fn lm_eval_with<T: Real>(a: &LmEvalArgs, globals: &Globals) -> Result<()> {
    let (bytes, kind) = load_kind(&a.model)?;
    let sentences = read_sentences(&a.input)?;
    // (log p, standard error of log p)
    let scored: Vec<(f64, f64)> = match kind {
        ModelKind::Generative => {
            let Some(proposal) = &a.proposal else {
                bail!("a generative model needs --proposal");
            };
            if a.samples == 0 {
                bail!("--samples must be at least 1");
            }
            let gen = GenerativeModel::<T>::load(&bytes)?;
            let (pbytes, pkind) = load_kind(proposal)?;
            expect_kind(proposal, pkind, ModelKind::Discriminative)?;
            let disc = DiscriminativeModel::<T>::load(&pbytes)?;
            sentences
                .par_iter()
                .enumerate()
                .map(|(i, x)| {
                    let e = estimate_marginal(&gen, &disc, x, a.samples, a.alpha, &mut rng_for(globals, i))
                        .with_context(|| format!("sentence {}", i + 1))?;
                    Ok((e.log_p, e.se_log))
                })
                .collect::<Result<_>>()?
        }
        ModelKind::LstmLm => {
            let lm = LstmLm::<T>::load(&bytes)?;
            sentences
                .par_iter()
                .map(|x| Ok((lm.log_prob(x)?, 0.0)))
                .collect::<Result<_>>()?
        }
        ModelKind::Discriminative => bail!("{} is a parser, not a language model", a.model.display()),
    };
    let mut text = String::new();
    for (i, (x, (lp, se))) in sentences.iter().zip(&scored).enumerate() {
        text.push_str(&format!("{} {} {lp:.6} {se:.6}\n", i + 1, x.len()));
    }
    let lps: Vec<f64> = scored.iter().map(|s| s.0).collect();
    let counts: Vec<usize> = sentences.iter().map(Vec::len).collect();
    let ppl = perplexity(&lps, &counts)?;
    let words: usize = counts.iter().sum();
    text.push_str(&format!("# perplexity {ppl:.4} over {words} words in {} sentences\n", sentences.len()));
    a.out.write(&text)
}
