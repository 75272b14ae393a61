//! Planted space pairs with known ground truth.
//!
//! The target space is an exact (optionally noisy) rotation of the source:
//! `c_w = Q p_w + ε`. A chosen fraction of words keeps the same string on both
//! sides and so becomes an identical-string anchor; the rest are renamed
//! `s_…` / `t_…` so only the planted bijection links them.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::embeddings::{EmbeddingSpace, Vocabulary};
use crate::evaluation::GoldDictionary;
use crate::linalg::{normalize_columns, random_rotation, Matrix};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct SyntheticPair {
    pub src: EmbeddingSpace,
    pub tgt: EmbeddingSpace,
    pub true_map: Matrix,
    /// The full planted bijection, one acceptable target per source word.
    pub gold: GoldDictionary,
    pub noise_sigma: f64,
    pub anchor_fraction: f64,
    /// Indices of words whose string is shared by both vocabularies.
    pub anchors: BTreeSet<usize>,
}

impl SyntheticPair {
    /// Gold pairs whose source word is not an identical-string anchor.
    pub fn held_out_gold(&self) -> GoldDictionary {
        let entries = self
            .gold
            .entries()
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.anchors.contains(i))
            .map(|(_, e)| e.clone())
            .collect();
        GoldDictionary::new(entries).expect("subset of a valid dictionary")
    }
}

fn word_name(i: usize, width: usize) -> String {
    format!("{i:0width$}")
}

/// `n_words` unit Gaussian source vectors in `d` dimensions, a Haar-random
/// proper rotation `Q` (det +1), and targets `Q p + N(0, noise_sigma²)` per coordinate.
///
/// Word `i` has count `n_words − i` on both sides, so both vocabularies list
/// the words in planted order.
pub fn make_rotation_pair(
    n_words: usize,
    d: usize,
    noise_sigma: f64,
    anchor_fraction: f64,
    seed: u64,
) -> Result<SyntheticPair> {
    if d < 2 || n_words <= d {
        return Err(Error::Config(format!("need n_words > d >= 2, got n_words={n_words}, d={d}")));
    }
    if !(0.0..=1.0).contains(&anchor_fraction) {
        return Err(Error::Config(format!("anchor_fraction {anchor_fraction} outside [0, 1]")));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::Config(format!("noise_sigma {noise_sigma} must be finite and >= 0")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut src = Matrix::from_fn(d, n_words, |_, _| StandardNormal.sample(&mut rng));
    normalize_columns(&mut src);
    let q = random_rotation(d, &mut rng);
    let mut tgt = &q * &src;
    if noise_sigma > 0.0 {
        let noise = Normal::new(0.0, noise_sigma).expect("valid sigma");
        tgt.iter_mut().for_each(|x| *x += noise.sample(&mut rng));
    }
    let n_anchors = (anchor_fraction * n_words as f64).round() as usize;
    let anchors: BTreeSet<usize> = sample(&mut rng, n_words, n_anchors).into_iter().collect();

    let width = (n_words - 1).to_string().len();
    let mut src_words = Vec::with_capacity(n_words);
    let mut tgt_words = Vec::with_capacity(n_words);
    for i in 0..n_words {
        let base = word_name(i, width);
        if anchors.contains(&i) {
            src_words.push(format!("w_{base}"));
            tgt_words.push(format!("w_{base}"));
        } else {
            src_words.push(format!("s_{base}"));
            tgt_words.push(format!("t_{base}"));
        }
    }
    let counts: Vec<u64> = (0..n_words).map(|i| (n_words - i) as u64).collect();
    let total = counts.iter().sum();
    let gold = GoldDictionary::new(
        src_words
            .iter()
            .zip(&tgt_words)
            .map(|(s, t)| (s.clone(), vec![t.clone()]))
            .collect(),
    )?;
    Ok(SyntheticPair {
        src: EmbeddingSpace::new(Vocabulary::with_counts(src_words, counts.clone(), total)?, src)?,
        tgt: EmbeddingSpace::new(Vocabulary::with_counts(tgt_words, counts, total)?, tgt)?,
        true_map: q,
        gold,
        noise_sigma,
        anchor_fraction,
        anchors,
    })
}

/// `n_words` independent unit Gaussian vectors named `{prefix}{i}`.
pub fn random_space(n_words: usize, d: usize, prefix: &str, seed: u64) -> Result<EmbeddingSpace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Matrix::from_fn(d, n_words, |_, _| StandardNormal.sample(&mut rng));
    normalize_columns(&mut m);
    let words = (0..n_words).map(|i| format!("{prefix}{i}")).collect();
    EmbeddingSpace::new(Vocabulary::from_words(words)?, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_truth_is_consistent() {
        let p = make_rotation_pair(60, 5, 0.0, 0.25, 1).unwrap();
        assert_eq!(p.anchors.len(), 15);
        assert_eq!(p.held_out_gold().len(), 45);
        let mapped = &p.true_map * p.src.word_rows();
        for j in 0..60 {
            let a = mapped.column(j);
            let b = p.tgt.word_rows().column(j);
            assert!((a.dot(&b) / (a.norm() * b.norm()) - 1.0).abs() < 1e-12);
        }
        let q = make_rotation_pair(60, 5, 0.0, 0.25, 1).unwrap();
        assert_eq!(p.tgt.word_rows(), q.tgt.word_rows());
        assert_eq!(p.anchors, q.anchors);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(make_rotation_pair(5, 5, 0.0, 0.1, 0).is_err());
        assert!(make_rotation_pair(10, 1, 0.0, 0.1, 0).is_err());
        assert!(make_rotation_pair(10, 2, 0.0, 1.5, 0).is_err());
    }
}
