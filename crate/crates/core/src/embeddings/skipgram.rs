//! Skip-gram with negative sampling, word or subword (hashed n-gram) inputs.
//!
//! Single worker, plain SGD with a fixed learning rate. Given the seed the
//! output is bit-reproducible.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::subword::{bucket_of, subword_ngrams};
use super::{EmbeddingSpace, Mode, SubwordTable, Vocabulary};
use crate::corpus::TokenizedCorpus;
use crate::linalg::Matrix;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub dim: usize,
    /// Maximum distance between center and context word.
    pub window: usize,
    /// Words occurring `min_count` times or fewer are dropped.
    pub min_count: u64,
    /// Frequent-word down-sampling threshold; 0 disables down-sampling.
    pub subsample_threshold: f64,
    pub negatives_per_positive: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub mode: Mode,
    pub n_min: usize,
    pub n_max: usize,
    pub bucket_count: u32,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 200,
            window: 5,
            min_count: 3,
            subsample_threshold: 1e-5,
            negatives_per_positive: 5,
            learning_rate: 0.05,
            epochs: 20,
            mode: Mode::Word,
            n_min: 3,
            n_max: 6,
            bucket_count: 2_000_000,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.dim == 0 {
            return fail("dim must be positive");
        }
        if self.window == 0 {
            return fail("window must be positive");
        }
        if self.epochs == 0 {
            return fail("epochs must be positive");
        }
        if self.negatives_per_positive == 0 {
            return fail("negatives_per_positive must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be positive");
        }
        if !(0.0..1.0).contains(&self.subsample_threshold) {
            return fail("subsample_threshold must be in [0, 1)");
        }
        if self.mode == Mode::Subword {
            if self.n_min == 0 || self.n_min > self.n_max {
                return fail("need 1 <= n_min <= n_max");
            }
            if self.bucket_count == 0 {
                return fail("bucket_count must be positive");
            }
        }
        Ok(())
    }
}

/// Machine-readable progress record, one per epoch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    /// (center, context) pairs processed.
    pub examples: u64,
    pub mean_loss: f64,
    pub learning_rate: f64,
}

#[derive(Clone, Debug)]
pub struct Trained {
    pub space: EmbeddingSpace,
    pub log: Vec<EpochLog>,
}

/// ln(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Negative-sampling loss of one center representation `h` against output
/// vectors with labels (true = observed context, false = noise):
/// `Σ −log σ(±u·h)`.
pub fn pair_loss(h: &[f64], outputs: &[&[f64]], labels: &[bool]) -> f64 {
    outputs
        .iter()
        .zip(labels)
        .map(|(u, &pos)| {
            let s = dot(u, h);
            if pos {
                softplus(-s)
            } else {
                softplus(s)
            }
        })
        .sum()
}

/// ∂loss/∂(u·h) for one output.
fn score_gradient(score: f64, positive: bool) -> f64 {
    sigmoid(score) - if positive { 1.0 } else { 0.0 }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairGradients {
    pub loss: f64,
    pub h: Vec<f64>,
    pub outputs: Vec<Vec<f64>>,
}

/// Analytic gradients of [`pair_loss`].
pub fn pair_gradients(h: &[f64], outputs: &[&[f64]], labels: &[bool]) -> PairGradients {
    let mut grad_h = vec![0.0; h.len()];
    let mut grad_out = Vec::with_capacity(outputs.len());
    for (u, &pos) in outputs.iter().zip(labels) {
        let g = score_gradient(dot(u, h), pos);
        for (gh, ui) in grad_h.iter_mut().zip(u.iter()) {
            *gh += g * ui;
        }
        grad_out.push(h.iter().map(|hi| g * hi).collect());
    }
    PairGradients {
        loss: pair_loss(h, outputs, labels),
        h: grad_h,
        outputs: grad_out,
    }
}

/// One SGD step on an output vector; accumulates the input-side step into
/// `step_h` and returns the loss term.
fn sgd_output(h: &[f64], out: &mut [f64], positive: bool, lr: f64, step_h: &mut [f64]) -> f64 {
    let s = dot(out, h);
    let g = score_gradient(s, positive);
    for ((sh, o), hi) in step_h.iter_mut().zip(out.iter_mut()).zip(h) {
        *sh -= lr * g * *o;
        *o -= lr * g * hi;
    }
    if positive {
        softplus(-s)
    } else {
        softplus(s)
    }
}

/// Unigram^(3/4) noise distribution sampled by inverse CDF.
struct NoiseSampler {
    cumulative: Vec<f64>,
}

impl NoiseSampler {
    fn new(counts: &[u64]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c.max(1) as f64).powf(0.75);
                acc
            })
            .collect();
        NoiseSampler { cumulative }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty vocabulary");
        let x = rng.random::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= x)
            .min(self.cumulative.len() - 1)
    }
}

/// Probability of keeping each word under frequent-word down-sampling.
fn keep_probabilities(vocab: &Vocabulary, threshold: f64) -> Vec<f64> {
    let total = vocab.total_tokens().max(1) as f64;
    vocab
        .counts()
        .iter()
        .map(|&c| {
            if threshold <= 0.0 || c == 0 {
                return 1.0;
            }
            let f = c as f64 / total;
            (((f / threshold).sqrt() + 1.0) * threshold / f).min(1.0)
        })
        .collect()
}

pub fn train_skipgram(corpus: &TokenizedCorpus, config: &TrainConfig) -> Result<Trained> {
    train_skipgram_with(corpus, config, |_| {})
}

/// As [`train_skipgram`], calling `on_epoch` after every epoch.
pub fn train_skipgram_with(
    corpus: &TokenizedCorpus,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<Trained> {
    config.validate()?;
    let vocab = Vocabulary::build(corpus, config.min_count)?;
    let n = vocab.len();
    let d = config.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let bound = 0.5 / d as f64;

    let mut input: Vec<f64> = (0..n * d).map(|_| rng.random_range(-bound..bound)).collect();
    let mut output = vec![0.0; n * d];

    // n-gram buckets actually used by the vocabulary, numbered in vocabulary order
    let mut slots: HashMap<u32, usize> = HashMap::new();
    let mut word_slots: Vec<Vec<usize>> = vec![Vec::new(); n];
    if config.mode == Mode::Subword {
        for (i, w) in vocab.words().iter().enumerate() {
            for g in subword_ngrams(w, config.n_min, config.n_max) {
                let b = bucket_of(&g, config.bucket_count);
                let next = slots.len();
                word_slots[i].push(*slots.entry(b).or_insert(next));
            }
        }
    }
    let mut buckets: Vec<f64> = (0..slots.len() * d)
        .map(|_| rng.random_range(-bound..bound))
        .collect();

    let sentences: Vec<Vec<usize>> = corpus
        .sentences
        .iter()
        .map(|s| s.iter().filter_map(|t| vocab.get(t)).collect::<Vec<_>>())
        .filter(|s| s.len() >= 2)
        .collect();
    if sentences.is_empty() {
        return Err(Error::InvalidInput(
            "corpus shorter than one window: no sentence has two in-vocabulary tokens".into(),
        ));
    }

    let noise = NoiseSampler::new(vocab.counts());
    let keep = keep_probabilities(&vocab, config.subsample_threshold);
    let lr = config.learning_rate;
    let mut h = vec![0.0; d];
    let mut step_h = vec![0.0; d];
    let mut kept = Vec::new();
    let mut log = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        let mut loss_sum = 0.0;
        let mut examples: u64 = 0;
        for sentence in &sentences {
            kept.clear();
            kept.extend(
                sentence
                    .iter()
                    .copied()
                    .filter(|&w| keep[w] >= 1.0 || rng.random::<f64>() < keep[w]),
            );
            for i in 0..kept.len() {
                let center = kept[i];
                let reach = rng.random_range(1..=config.window);
                let lo = i.saturating_sub(reach);
                let hi = (i + reach).min(kept.len() - 1);
                let parts = 1 + word_slots[center].len();
                for (j, &context) in kept.iter().enumerate().take(hi + 1).skip(lo) {
                    if j == i {
                        continue;
                    }
                    // center representation: word row plus its n-gram rows
                    h.copy_from_slice(&input[center * d..(center + 1) * d]);
                    for &s in &word_slots[center] {
                        for (hk, bk) in h.iter_mut().zip(&buckets[s * d..(s + 1) * d]) {
                            *hk += bk;
                        }
                    }
                    step_h.iter_mut().for_each(|x| *x = 0.0);
                    loss_sum += sgd_output(
                        &h,
                        &mut output[context * d..(context + 1) * d],
                        true,
                        lr,
                        &mut step_h,
                    );
                    for _ in 0..config.negatives_per_positive {
                        let t = noise.sample(&mut rng);
                        if t == context {
                            continue;
                        }
                        loss_sum +=
                            sgd_output(&h, &mut output[t * d..(t + 1) * d], false, lr, &mut step_h);
                    }
                    // the input step is shared among the summed parts
                    let scale = 1.0 / parts as f64;
                    for (x, s) in input[center * d..(center + 1) * d].iter_mut().zip(&step_h) {
                        *x += scale * s;
                    }
                    for &slot in &word_slots[center] {
                        for (x, s) in buckets[slot * d..(slot + 1) * d].iter_mut().zip(&step_h) {
                            *x += scale * s;
                        }
                    }
                    examples += 1;
                }
            }
        }
        if !loss_sum.is_finite() {
            return Err(Error::Numerical(format!(
                "training diverged in epoch {epoch} after {examples} examples (lr {lr})"
            )));
        }
        let entry = EpochLog {
            epoch,
            examples,
            mean_loss: if examples > 0 { loss_sum / examples as f64 } else { 0.0 },
            learning_rate: lr,
        };
        on_epoch(&entry);
        log.push(entry);
    }

    let vectors = Matrix::from_vec(d, n, input);
    let space = match config.mode {
        Mode::Word => EmbeddingSpace::new(vocab, vectors)?,
        Mode::Subword => {
            let used = slots.len();
            let table = SubwordTable::new(
                config.n_min,
                config.n_max,
                config.bucket_count,
                slots,
                Matrix::from_vec(d, used, buckets),
            );
            EmbeddingSpace::with_subwords(vocab, vectors, table)?
        }
    };
    Ok(Trained { space, log })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softplus_and_sigmoid_are_stable() {
        assert_eq!(softplus(1000.0), 1000.0);
        assert!(softplus(-1000.0) >= 0.0);
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }

    #[test]
    fn noise_sampler_follows_power_law() {
        let s = NoiseSampler::new(&[16, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let draws = 200_000;
        let zeros = (0..draws).filter(|_| s.sample(&mut rng) == 0).count();
        // 16^0.75 = 8, so p(0) = 8/9
        let p = zeros as f64 / draws as f64;
        assert!((p - 8.0 / 9.0).abs() < 0.005, "{p}");
    }

    #[test]
    fn keep_probability_formula() {
        let v = Vocabulary::with_counts(vec!["a".into(), "b".into()], vec![999, 1], 1000).unwrap();
        let k = keep_probabilities(&v, 1e-3);
        let f: f64 = 0.999;
        assert!((k[0] - ((f / 1e-3).sqrt() + 1.0) * 1e-3 / f).abs() < 1e-15);
        assert_eq!(k[1], 1.0);
        assert_eq!(keep_probabilities(&v, 0.0), [1.0, 1.0]);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = TrainConfig {
            window: 0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainConfig {
            subsample_threshold: 1.0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn short_corpus_rejected() {
        let c = TokenizedCorpus::from_sentences(vec![vec!["a".into()]; 10], String::new());
        let cfg = TrainConfig {
            min_count: 0,
            ..TrainConfig::default()
        };
        assert!(matches!(train_skipgram(&c, &cfg), Err(Error::InvalidInput(_))));
    }
}
