//! Dictionary induction by CSLS nearest neighbours and iterative Procrustes.

use std::cmp::Ordering;

use super::{
    align_with_anchors, AlignStatus, AlignmentMatrix, AnchorDictionary, IterationRecord, PreparedSpace, Provenance,
};
use crate::linalg::{chunks, mean_of_top_k, normalize_columns, par_map, Matrix};
use crate::metrics::neighborhood_means;
use crate::{Error, Result};

pub const DEFAULT_REFINE_ITERATIONS: usize = 20;
/// Most frequent words per side considered when inducing a dictionary.
pub const DEFAULT_VOCAB_CAP: usize = 10_000;

const BLOCK: usize = 256;

/// Index of the best value in `scores`; ties go to the lexicographically
/// smallest word.
fn best(scores: impl Iterator<Item = f64>, words: &[String]) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, s) in scores.enumerate() {
        let better = match s.partial_cmp(&best_score) {
            Some(Ordering::Greater) => true,
            Some(Ordering::Equal) => words[i] < words[best],
            _ => false,
        };
        if better {
            best = i;
            best_score = s;
        }
    }
    best
}

/// Pair each of the `vocab_cap` most frequent source words with its
/// CSLS-nearest target among the `vocab_cap` most frequent target words. With
/// `mutual`, keep a pair only when the source word is also the target's
/// CSLS-nearest mapped source. `csls_k` is clamped to the candidate counts.
pub fn build_dictionary_csls(
    w: &AlignmentMatrix,
    src: &PreparedSpace<'_>,
    tgt: &PreparedSpace<'_>,
    vocab_cap: usize,
    mutual: bool,
    csls_k: usize,
) -> Result<AnchorDictionary> {
    if w.dim() != src.dim() || src.dim() != tgt.dim() {
        return Err(Error::InvalidInput("alignment and space dimensions differ".into()));
    }
    let mut mapped: Matrix = &w.w * src.head(vocab_cap);
    normalize_columns(&mut mapped);
    let mut targets: Matrix = tgt.head(vocab_cap).into_owned();
    normalize_columns(&mut targets);
    let (ns, nt) = (mapped.ncols(), targets.ncols());
    if ns == 0 || nt == 0 {
        return Ok(AnchorDictionary::empty(Provenance::Refined));
    }
    let src_words = &src.words()[..ns];
    let tgt_words = &tgt.words()[..nt];
    let k = csls_k.max(1);

    // r_S(t): targets against mapped sources
    let r_s = neighborhood_means(&targets, &mapped, k.min(ns));

    // r_T(s) and forward argmax over targets of 2cos − r_S(t)
    let src_blocks = chunks(ns, BLOCK);
    let forward: Vec<(f64, usize)> = par_map(src_blocks.len(), |b| {
        let r = src_blocks[b].clone();
        let sims = targets.tr_mul(&mapped.columns(r.start, r.len()));
        sims.column_iter()
            .map(|col| {
                let r_t = mean_of_top_k(col.as_slice(), k.min(nt));
                let t = best(col.iter().zip(&r_s).map(|(c, rs)| 2.0 * c - rs), tgt_words);
                (r_t, t)
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    let r_t: Vec<f64> = forward.iter().map(|f| f.0).collect();

    let backward: Option<Vec<usize>> = mutual.then(|| {
        let tgt_blocks = chunks(nt, BLOCK);
        par_map(tgt_blocks.len(), |b| {
            let r = tgt_blocks[b].clone();
            let sims = mapped.tr_mul(&targets.columns(r.start, r.len()));
            sims.column_iter()
                .map(|col| best(col.iter().zip(&r_t).map(|(c, rt)| 2.0 * c - rt), src_words))
                .collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect()
    });

    let pairs = forward.iter().enumerate().filter_map(|(s, &(_, t))| {
        let keep = backward.as_ref().is_none_or(|back| back[t] == s);
        keep.then(|| (src_words[s].clone(), tgt_words[t].clone()))
    });
    Ok(AnchorDictionary::new(pairs, Provenance::Refined))
}

/// Alternate Procrustes on the current dictionary with mutual-CSLS dictionary
/// induction, for at most `iterations` Procrustes solves. Stops early at a
/// dictionary fixed point (status `Converged`); if an induced dictionary is
/// empty the last map is returned with status `Degraded`.
pub fn iterative_procrustes(
    src: &PreparedSpace<'_>,
    tgt: &PreparedSpace<'_>,
    seed: &AnchorDictionary,
    iterations: usize,
    vocab_cap: usize,
    csls_k: usize,
) -> Result<AlignmentMatrix> {
    if seed.is_empty() {
        return Err(Error::NoAnchors("seed dictionary is empty".into()));
    }
    if iterations == 0 {
        return Err(Error::Config("iterations must be at least 1".into()));
    }
    let mut dict = seed.clone();
    let mut history = Vec::new();
    for it in 1..=iterations {
        let mut w = align_with_anchors(src, tgt, &dict)?;
        history.push(IterationRecord {
            iteration: it,
            dictionary_size: dict.len(),
            residual: w.residual,
        });
        log::debug!("refinement iteration {it}: {} pairs, residual {:.6}", dict.len(), w.residual);
        let finish = |mut w: AlignmentMatrix, status, history| {
            w.iterations_used = it;
            w.status = status;
            w.history = history;
            w
        };
        if it == iterations {
            return Ok(finish(w, AlignStatus::Ok, history));
        }
        let next = build_dictionary_csls(&w, src, tgt, vocab_cap, true, csls_k)?;
        if next.is_empty() {
            log::warn!("induced dictionary is empty at iteration {it}");
            return Ok(finish(w, AlignStatus::Degraded, history));
        }
        if next.same_pairs(&dict) {
            w.status = AlignStatus::Converged;
            return Ok(finish(w, AlignStatus::Converged, history));
        }
        dict = next;
    }
    unreachable!("loop returns on the last iteration")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::NormalizePolicy;
    use crate::embeddings::{EmbeddingSpace, Vocabulary};

    fn space(words: &[&str], cols: &[[f64; 2]]) -> EmbeddingSpace {
        let v = Vocabulary::from_words(words.iter().map(|s| s.to_string()).collect()).unwrap();
        let flat: Vec<f64> = cols.iter().flatten().copied().collect();
        EmbeddingSpace::new(v, Matrix::from_column_slice(2, cols.len(), &flat)).unwrap()
    }

    #[test]
    fn best_breaks_ties_lexicographically() {
        let words: Vec<String> = ["b", "a", "c"].iter().map(|s| s.to_string()).collect();
        assert_eq!(best([1.0, 1.0, 0.5].into_iter(), &words), 1);
        assert_eq!(best([0.0, 1.0, 2.0].into_iter(), &words), 2);
    }

    #[test]
    fn identity_alignment_maps_words_to_themselves() {
        let s = space(&["a", "b", "c", "d"], &[[1.0, 0.0], [0.0, 1.0], [-1.0, 0.1], [0.3, -1.0]]);
        let p = PreparedSpace::new(&s, NormalizePolicy::Unit);
        let d = build_dictionary_csls(&AlignmentMatrix::identity(2), &p, &p, 10, true, 1).unwrap();
        assert_eq!(d.len(), 4);
        assert!(d.pairs().iter().all(|(a, b)| a == b));
    }

    #[test]
    fn single_iteration_equals_plain_procrustes() {
        let s = space(&["a", "b", "c"], &[[1.0, 0.2], [0.1, 1.0], [-0.7, 0.4]]);
        let t = space(&["a", "b", "c"], &[[0.2, 1.0], [-1.0, 0.1], [-0.4, -0.7]]);
        let (ps, pt) = (PreparedSpace::new(&s, NormalizePolicy::Unit), PreparedSpace::new(&t, NormalizePolicy::Unit));
        let seed = AnchorDictionary::new(vec![("a".into(), "a".into()), ("b".into(), "b".into())], Provenance::Gold);
        let one = iterative_procrustes(&ps, &pt, &seed, 1, 10, 1).unwrap();
        let plain = align_with_anchors(&ps, &pt, &seed).unwrap();
        assert_eq!(one.w, plain.w);
        assert_eq!(one.iterations_used, 1);
    }

    #[test]
    fn empty_seed_is_an_error() {
        let s = space(&["a"], &[[1.0, 0.0]]);
        let p = PreparedSpace::new(&s, NormalizePolicy::Unit);
        let e = iterative_procrustes(&p, &p, &AnchorDictionary::empty(Provenance::Gold), 3, 10, 1);
        assert!(matches!(e, Err(Error::NoAnchors(_))));
    }
}
