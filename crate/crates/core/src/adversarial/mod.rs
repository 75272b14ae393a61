//! Anchor-free alignment: a linear generator `W` is trained to fool a
//! discriminator telling mapped source vectors from target vectors, then the
//! result seeds iterative Procrustes refinement.

mod discriminator;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use discriminator::{
    discriminator_forward, discriminator_loss, discriminator_loss_and_grad, discriminator_loss_and_grad_into,
    generator_loss, generator_loss_and_grad, generator_loss_and_grad_into, DiscriminatorGrads, DiscriminatorParams,
    Scratch, P_FLOOR,
};

use crate::alignment::{
    build_dictionary_csls, iterative_procrustes, AlignStatus, AlignmentMatrix, PreparedSpace,
    DEFAULT_REFINE_ITERATIONS, DEFAULT_VOCAB_CAP,
};
use crate::linalg::{chunks, normalize_columns, par_map, Matrix};
use crate::metrics::{neighborhood_means, DEFAULT_CSLS_K};
use crate::{Error, Result};

/// `W ← (1 + β) W − β (W Wᵀ) W`, pulling `W` towards the orthogonal matrices.
pub fn orthogonalize(w: &Matrix, beta: f64) -> Matrix {
    if beta == 0.0 {
        return w.clone();
    }
    let wwt_w = (w * w.transpose()) * w;
    w * (1.0 + beta) - wwt_w * beta
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdvConfig {
    pub lr_discriminator: f64,
    pub lr_generator: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub steps_per_epoch: usize,
    pub discriminator_steps: usize,
    pub orthogonalization_beta: f64,
    /// Label smoothing on the discriminator targets (0 = plain objective).
    pub smoothing: f64,
    pub hidden: usize,
    pub dropout_rate: f64,
    pub leaky_slope: f64,
    /// Batches are drawn uniformly from this many most frequent words.
    pub vocab_cap: usize,
    /// CSLS neighbourhood for the model-selection score.
    pub csls_k: usize,
    pub seed: u64,
}

impl Default for AdvConfig {
    fn default() -> Self {
        AdvConfig {
            lr_discriminator: 1e-3,
            lr_generator: 1e-3,
            batch_size: 32,
            epochs: 10,
            steps_per_epoch: 1000,
            discriminator_steps: 1,
            orthogonalization_beta: 0.01,
            smoothing: 0.1,
            hidden: 2048,
            dropout_rate: 0.1,
            leaky_slope: 0.2,
            vocab_cap: DEFAULT_VOCAB_CAP,
            csls_k: DEFAULT_CSLS_K,
            seed: 0,
        }
    }
}

impl AdvConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lr_discriminator", self.lr_discriminator),
            ("lr_generator", self.lr_generator),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        let counts = [
            ("batch_size", self.batch_size),
            ("steps_per_epoch", self.steps_per_epoch),
            ("discriminator_steps", self.discriminator_steps),
            ("hidden", self.hidden),
            ("vocab_cap", self.vocab_cap),
            ("csls_k", self.csls_k),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if !(0.0..=0.5).contains(&self.orthogonalization_beta) {
            return Err(Error::Config("orthogonalization_beta must be in [0, 0.5]".into()));
        }
        if !(0.0..1.0).contains(&self.smoothing) {
            return Err(Error::Config("smoothing must be in [0, 1)".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::Config("dropout_rate must be in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdvEpochLog {
    pub epoch: usize,
    #[serde(rename = "L_D")]
    pub loss_discriminator: f64,
    #[serde(rename = "L_W")]
    pub loss_generator: f64,
    pub orth_error: f64,
    pub selection_score: f64,
}

#[derive(Clone, Debug)]
pub struct AdversarialResult {
    /// Best checkpoint by selection score.
    pub alignment: AlignmentMatrix,
    pub best_epoch: Option<usize>,
    pub log: Vec<AdvEpochLog>,
    pub discriminator: DiscriminatorParams,
}

/// Unsupervised model-selection score: the mean CSLS of each of the
/// `vocab_cap` most frequent source words to its CSLS-nearest target among
/// the `vocab_cap` most frequent target words.
pub fn selection_score(
    w: &Matrix,
    src: &PreparedSpace<'_>,
    tgt: &PreparedSpace<'_>,
    vocab_cap: usize,
    csls_k: usize,
) -> f64 {
    let mut mapped = w * src.head(vocab_cap);
    normalize_columns(&mut mapped);
    let mut targets = tgt.head(vocab_cap).into_owned();
    normalize_columns(&mut targets);
    let (ns, nt) = (mapped.ncols(), targets.ncols());
    if ns == 0 || nt == 0 {
        return f64::NAN;
    }
    let k = csls_k.max(1);
    let r_s = neighborhood_means(&targets, &mapped, k.min(ns));
    let blocks = chunks(ns, 256);
    let sums = par_map(blocks.len(), |b| {
        let r = blocks[b].clone();
        let sims = targets.tr_mul(&mapped.columns(r.start, r.len()));
        sims.column_iter()
            .map(|col| {
                let r_t = crate::linalg::mean_of_top_k(col.as_slice(), k.min(nt));
                col.iter()
                    .zip(&r_s)
                    .map(|(c, rs)| 2.0 * c - r_t - rs)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .sum::<f64>()
    });
    sums.iter().sum::<f64>() / ns as f64
}

fn batch(prepared: &PreparedSpace<'_>, pool: usize, size: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let m = prepared.matrix();
    let mut out = Matrix::zeros(m.nrows(), size);
    for j in 0..size {
        out.set_column(j, &m.column(rng.random_range(0..pool)));
    }
    out
}

/// Alternate `discriminator_steps` discriminator updates with one generator
/// update per step, orthogonalising `W` after every generator update. `W`
/// starts at the identity. After each epoch the selection score is computed
/// and the best-scoring `W` is kept. A non-finite loss stops training and
/// returns the best checkpoint so far with status `Degraded`.
pub fn adversarial_align(src: &PreparedSpace<'_>, tgt: &PreparedSpace<'_>, config: &AdvConfig) -> Result<AdversarialResult> {
    config.validate()?;
    if src.dim() != tgt.dim() {
        return Err(Error::InvalidInput("source and target dimensions differ".into()));
    }
    if src.is_empty() || tgt.is_empty() {
        return Err(Error::EmptyVocabulary("both spaces need words".into()));
    }
    let d = src.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut disc = DiscriminatorParams::new(d, config.hidden, config.dropout_rate, config.leaky_slope, &mut rng);
    let mut w = Matrix::identity(d, d);
    let (pool_s, pool_t) = (config.vocab_cap.min(src.len()), config.vocab_cap.min(tgt.len()));
    let mut log = Vec::with_capacity(config.epochs);
    let mut best = (f64::NEG_INFINITY, None, w.clone());
    let mut degraded = false;
    let mut scratch = Scratch::new();

    'epochs: for epoch in 0..config.epochs {
        let (mut sum_d, mut sum_w) = (0.0, 0.0);
        for _ in 0..config.steps_per_epoch {
            for _ in 0..config.discriminator_steps {
                let xs = batch(src, pool_s, config.batch_size, &mut rng);
                let yt = batch(tgt, pool_t, config.batch_size, &mut rng);
                let loss = discriminator_loss_and_grad_into(
                    &disc,
                    &(&w * xs),
                    &yt,
                    config.smoothing,
                    Some(&mut rng),
                    &mut scratch,
                )?;
                if !loss.is_finite() {
                    degraded = true;
                    break 'epochs;
                }
                disc.sgd_step(scratch.grads().expect("gradients written"), config.lr_discriminator);
                sum_d += loss / config.discriminator_steps as f64;
            }
            let xs = batch(src, pool_s, config.batch_size, &mut rng);
            let yt = batch(tgt, pool_t, config.batch_size, &mut rng);
            let (loss, g) =
                generator_loss_and_grad_into(&disc, &w, &xs, &yt, config.smoothing, Some(&mut rng), &mut scratch)?;
            if !loss.is_finite() || g.iter().any(|x| !x.is_finite()) {
                degraded = true;
                break 'epochs;
            }
            w -= g * config.lr_generator;
            w = orthogonalize(&w, config.orthogonalization_beta);
            sum_w += loss;
        }
        let steps = config.steps_per_epoch as f64;
        let score = selection_score(&w, src, tgt, config.vocab_cap, config.csls_k);
        let entry = AdvEpochLog {
            epoch,
            loss_discriminator: sum_d / steps,
            loss_generator: sum_w / steps,
            orth_error: crate::linalg::orthogonality_error(&w),
            selection_score: score,
        };
        log::info!("{}", serde_json::to_string(&entry).expect("json"));
        log.push(entry);
        if score > best.0 {
            best = (score, Some(epoch), w.clone());
        }
    }
    if degraded {
        log::warn!("non-finite adversarial loss; returning the best finite checkpoint");
    }
    let mut alignment = AlignmentMatrix::from_matrix(best.2)?;
    alignment.iterations_used = log.len();
    if degraded {
        alignment.status = AlignStatus::Degraded;
    }
    Ok(AdversarialResult {
        alignment,
        best_epoch: best.1,
        log,
        discriminator: disc,
    })
}

/// Seed iterative Procrustes with the mutual-CSLS dictionary induced by `w`.
/// When that dictionary is empty, `w` is returned unchanged with status
/// `Unrefined`.
pub fn refine_from(
    w: &AlignmentMatrix,
    src: &PreparedSpace<'_>,
    tgt: &PreparedSpace<'_>,
    iterations: usize,
    vocab_cap: usize,
    csls_k: usize,
) -> Result<AlignmentMatrix> {
    let seed = build_dictionary_csls(w, src, tgt, vocab_cap, true, csls_k)?;
    if seed.is_empty() {
        log::warn!("adversarial map induces an empty dictionary; refinement skipped");
        let mut out = w.clone();
        out.status = AlignStatus::Unrefined;
        return Ok(out);
    }
    iterative_procrustes(src, tgt, &seed, iterations, vocab_cap, csls_k)
}

#[derive(Clone, Debug)]
pub struct AdversarialRefined {
    pub refined: AlignmentMatrix,
    pub adversarial: AdversarialResult,
}

pub fn adversarial_then_refine(
    src: &PreparedSpace<'_>,
    tgt: &PreparedSpace<'_>,
    config: &AdvConfig,
    refine_iterations: usize,
    vocab_cap: usize,
) -> Result<AdversarialRefined> {
    let adversarial = adversarial_align(src, tgt, config)?;
    let iterations = if refine_iterations == 0 { DEFAULT_REFINE_ITERATIONS } else { refine_iterations };
    let refined = refine_from(&adversarial.alignment, src, tgt, iterations, vocab_cap, config.csls_k)?;
    Ok(AdversarialRefined { refined, adversarial })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{orthogonality_error, random_orthogonal};

    #[test]
    fn orthogonal_is_a_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = random_orthogonal(6, &mut rng);
        assert!((orthogonalize(&q, 0.01) - &q).norm() < 1e-14);
        let junk = Matrix::from_fn(3, 3, |i, j| (i * 3 + j) as f64);
        assert_eq!(orthogonalize(&junk, 0.0), junk);
    }

    #[test]
    fn repeated_updates_converge() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // perturbation of Frobenius norm 1e-2; the deviation shrinks by
        // about 1 - 2β per application
        let e = Matrix::from_fn(5, 5, |_, _| rng.random_range(-1.0..1.0));
        let mut w = random_orthogonal(5, &mut rng) + &e * (1e-2 / e.norm());
        for _ in 0..500 {
            w = orthogonalize(&w, 0.01);
        }
        assert!(orthogonality_error(&w) < 1e-6);
    }

    #[test]
    fn config_validation() {
        assert!(AdvConfig::default().validate().is_ok());
        let bad = AdvConfig {
            batch_size: 0,
            ..AdvConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
