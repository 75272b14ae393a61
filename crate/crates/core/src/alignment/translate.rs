use super::{AlignmentMatrix, PreparedSpace};
use crate::linalg::{normalize_columns, Vector};
use crate::metrics::{CslsIndex, Metric, NeighborResult, Scoring, TargetIndex};
use crate::{Error, Result};

/// Maps source words through `W` and ranks target words against them.
///
/// Candidates are the whole target vocabulary. For CSLS, the `r_S` penalty of
/// each target is computed against the `vocab_cap` most frequent mapped source
/// words, with `csls_k` clamped to the population sizes.
pub struct Translator<'a> {
    w: &'a AlignmentMatrix,
    src: &'a PreparedSpace<'a>,
    targets: TargetIndex,
    csls: Option<CslsIndex>,
}

impl<'a> Translator<'a> {
    pub fn new(
        w: &'a AlignmentMatrix,
        src: &'a PreparedSpace<'a>,
        tgt: &PreparedSpace<'_>,
        metric: Metric,
        csls_k: usize,
        vocab_cap: usize,
    ) -> Result<Self> {
        if w.dim() != src.dim() || src.dim() != tgt.dim() {
            return Err(Error::InvalidInput("alignment and space dimensions differ".into()));
        }
        if tgt.is_empty() {
            return Err(Error::EmptyVocabulary("target space has no words".into()));
        }
        let targets = TargetIndex::new(tgt.words().to_vec(), tgt.matrix())?;
        let csls = match metric {
            Metric::Cosine => None,
            Metric::Csls => {
                let mut mapped = &w.w * src.head(vocab_cap);
                normalize_columns(&mut mapped);
                let k = csls_k.max(1).min(mapped.ncols()).min(targets.len());
                if k == 0 {
                    return Err(Error::EmptyVocabulary("source space has no words".into()));
                }
                Some(CslsIndex::new(targets.unit_vectors(), &mapped, k)?)
            }
        };
        Ok(Translator { w, src, targets, csls })
    }

    pub fn metric(&self) -> Metric {
        self.scoring().metric()
    }

    fn scoring(&self) -> Scoring<'_> {
        match &self.csls {
            Some(index) => Scoring::Csls(index),
            None => Scoring::Cosine,
        }
    }

    /// `W·p_word` for a resolvable source word.
    pub fn map_word(&self, word: &str) -> Option<Vector> {
        self.src.vector(word).map(|v| &self.w.w * v)
    }

    /// Top-k target words for `word`; `None` when the word cannot be resolved
    /// in the source space (or resolves to a zero vector).
    pub fn translate(&self, word: &str, k: usize) -> Result<Option<NeighborResult>> {
        match self.map_word(word) {
            Some(v) if v.norm() > 0.0 => self.translate_vector(word, &v, k).map(Some),
            _ => Ok(None),
        }
    }

    /// Rank targets against an already mapped vector.
    pub fn translate_vector(&self, label: &str, mapped: &Vector, k: usize) -> Result<NeighborResult> {
        self.targets.top_k(label, mapped.as_slice(), k, self.scoring())
    }

    pub fn targets(&self) -> &TargetIndex {
        &self.targets
    }
}
