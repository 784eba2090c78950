use std::collections::HashMap;

use rand::Rng;

use crate::models::{DiscriminativeModel, GenerativeModel};
use crate::neural::{Dropout, Real};
use crate::treebank::Tree;

use super::sample::sample_from;
use super::{InferenceError, WeightedSample};

/// An importance-sampled estimate of log p(x).
#[derive(Debug, Clone)]
pub struct Estimate {
    pub log_p: f64,
    /// Jackknife standard error of `log_p` (NaN with fewer than 2 samples).
    pub se_log: f64,
    /// Jackknife standard error of exp(`log_p`) (NaN with fewer than 2
    /// samples).
    pub se: f64,
    pub samples: Vec<WeightedSample>,
}

impl Estimate {
    pub fn distinct_trees(&self) -> usize {
        let mut seen: Vec<String> = self.samples.iter().map(|s| s.tree.to_string()).collect();
        seen.sort();
        seen.dedup();
        seen.len()
    }
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn lse2(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        m
    } else {
        m + ((a - m).exp() + (b - m).exp()).ln()
    }
}

/// Jackknife standard errors of log(mean(w)) and of mean(w), from log
/// weights. Leave-one-out sums are built from prefix and suffix
/// log-sum-exps, so no subtraction of large terms occurs.
pub fn jackknife(log_w: &[f64]) -> (f64, f64) {
    let n = log_w.len();
    if n < 2 {
        return (f64::NAN, f64::NAN);
    }
    let mut prefix = vec![f64::NEG_INFINITY; n + 1];
    for i in 0..n {
        prefix[i + 1] = lse2(prefix[i], log_w[i]);
    }
    let mut suffix = vec![f64::NEG_INFINITY; n + 1];
    for i in (0..n).rev() {
        suffix[i] = lse2(suffix[i + 1], log_w[i]);
    }
    let ln_rest = ((n - 1) as f64).ln();
    let theta: Vec<f64> = (0..n).map(|i| lse2(prefix[i], suffix[i + 1]) - ln_rest).collect();
    let mean = theta.iter().sum::<f64>() / n as f64;
    let ss: f64 = theta.iter().map(|t| (t - mean).powi(2)).sum();
    let se_log = ((n - 1) as f64 / n as f64 * ss).sqrt();

    let m = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|l| (l - m).exp()).collect();
    let wm = w.iter().sum::<f64>() / n as f64;
    let var = w.iter().map(|x| (x - wm).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = m.exp() * (var / n as f64).sqrt();
    (se_log, se)
}

/// Draws `n` proposal samples and scores each distinct tree once under the
/// generative model.
fn scored_samples<T: Real, U: Real, S: AsRef<str>>(
    gen: &GenerativeModel<T>,
    disc: &DiscriminativeModel<U>,
    sentence: &[S],
    n: usize,
    alpha: f64,
    rng: &mut impl Rng,
) -> Result<Vec<WeightedSample>, InferenceError> {
    if n == 0 {
        return Err(InferenceError::NoSamples);
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(InferenceError::Alpha(alpha));
    }
    let mut g = disc.graph();
    let start = disc.start(&mut g, sentence, &mut Dropout::Off)?;
    let mut cache: HashMap<String, f64> = HashMap::new();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut s = sample_from(disc, &mut g, &start, alpha, rng)?;
        let key = s.tree.to_string();
        let lp = match cache.get(&key) {
            Some(&lp) => lp,
            None => {
                let lp = gen.tree_log_prob(&s.tree)?;
                cache.insert(key, lp);
                lp
            }
        };
        s.log_p = Some(lp);
        out.push(s);
    }
    Ok(out)
}

/// Importance-sampling estimate of log p(x) = log E_q[p(x, y) / q(y | x)]
/// with `n` samples from the proposal flattened by `alpha`.
pub fn estimate_marginal<T: Real, U: Real, S: AsRef<str>>(
    gen: &GenerativeModel<T>,
    disc: &DiscriminativeModel<U>,
    sentence: &[S],
    n: usize,
    alpha: f64,
    rng: &mut impl Rng,
) -> Result<Estimate, InferenceError> {
    let samples = scored_samples(gen, disc, sentence, n, alpha, rng)?;
    let lw: Vec<f64> = samples.iter().map(|s| s.log_w().expect("scored")).collect();
    let log_p = log_sum_exp(&lw) - (n as f64).ln();
    let (se_log, se) = jackknife(&lw);
    Ok(Estimate {
        log_p,
        se_log,
        se,
        samples,
    })
}

/// The sampled tree with the highest log p(x, y); ties go to the
/// lexicographically smallest serialization.
pub fn map_parse<T: Real, U: Real, S: AsRef<str>>(
    gen: &GenerativeModel<T>,
    disc: &DiscriminativeModel<U>,
    sentence: &[S],
    n: usize,
    alpha: f64,
    rng: &mut impl Rng,
) -> Result<Tree, InferenceError> {
    let samples = scored_samples(gen, disc, sentence, n, alpha, rng)?;
    let mut best: Option<(f64, String, &Tree)> = None;
    for s in &samples {
        let lp = s.log_p.expect("scored");
        let key = s.tree.to_string();
        let better = match &best {
            None => true,
            Some((b, bk, _)) => lp > *b || (lp == *b && key < *bk),
        };
        if better {
            best = Some((lp, key, &s.tree));
        }
    }
    Ok(best.expect("n >= 1").2.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lse_is_order_independent() {
        let xs = [-1000.0, -3.2, -2.5, 0.7, -20.0, 5.1];
        let mut sorted = xs;
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((log_sum_exp(&xs) - log_sum_exp(&sorted)).abs() < 1e-9);
        let direct = xs.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&xs) - direct).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }

    #[test]
    fn jackknife_matches_definitions() {
        let lw = [0.1f64, -0.4, 0.3, -1.2, 0.0];
        let n = lw.len() as f64;
        let w: Vec<f64> = lw.iter().map(|l| l.exp()).collect();
        let mean = w.iter().sum::<f64>() / n;
        let sd = (w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let (se_log, se) = jackknife(&lw);
        assert!((se - sd / n.sqrt()).abs() < 1e-12);
        let theta: Vec<f64> = (0..5)
            .map(|i| ((w.iter().sum::<f64>() - w[i]) / (n - 1.0)).ln())
            .collect();
        let tm = theta.iter().sum::<f64>() / n;
        let want = ((n - 1.0) / n * theta.iter().map(|t| (t - tm).powi(2)).sum::<f64>()).sqrt();
        assert!((se_log - want).abs() < 1e-12);
        assert!(jackknife(&[0.5]).0.is_nan());
        assert_eq!(jackknife(&[0.5, 0.5]), (0.0, 0.0));
    }
}
