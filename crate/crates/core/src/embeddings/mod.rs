//! Word and subword skip-gram embeddings.

mod io;
mod skipgram;
mod subword;
mod vocab;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use io::{load_binary, load_text, load_vectors, save_binary, save_text};
pub use skipgram::{
    pair_gradients, pair_loss, train_skipgram, train_skipgram_with, EpochLog, PairGradients,
    TrainConfig, Trained,
};
pub use subword::{bucket_of, fnv1a, special_token, subword_ngrams};
pub use vocab::Vocabulary;

use crate::linalg::{Matrix, Vector};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Word,
    Subword,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word" => Ok(Mode::Word),
            "subword" => Ok(Mode::Subword),
            _ => Err(Error::Config(format!("unknown mode {s:?} (word|subword)"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Word => "word",
            Mode::Subword => "subword",
        })
    }
}

/// Hashed n-gram vectors. Only buckets touched by the training vocabulary are
/// stored; every other bucket is the zero vector.
#[derive(Clone, Debug, PartialEq)]
pub struct SubwordTable {
    pub n_min: usize,
    pub n_max: usize,
    pub bucket_count: u32,
    /// bucket id -> column of `vectors`
    slots: HashMap<u32, usize>,
    /// `d × used_buckets`
    vectors: Matrix,
}

impl SubwordTable {
    pub fn new(n_min: usize, n_max: usize, bucket_count: u32, slots: HashMap<u32, usize>, vectors: Matrix) -> Self {
        SubwordTable {
            n_min,
            n_max,
            bucket_count,
            slots,
            vectors,
        }
    }

    /// Buckets of a word's n-grams, with repetition.
    pub fn buckets(&self, word: &str) -> Vec<u32> {
        subword_ngrams(word, self.n_min, self.n_max)
            .iter()
            .map(|g| bucket_of(g, self.bucket_count))
            .collect()
    }

    pub fn bucket_vector(&self, bucket: u32) -> Option<nalgebra::DVectorView<'_, f64>> {
        self.slots.get(&bucket).map(|&s| self.vectors.column(s))
    }

    pub fn used_buckets(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &HashMap<u32, usize> {
        &self.slots
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn vectors_mut(&mut self) -> &mut Matrix {
        &mut self.vectors
    }
}

/// A vocabulary with one `d`-vector per word (stored as the columns of a
/// `d × n` matrix) and, in subword mode, a table of n-gram vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingSpace {
    vocab: Vocabulary,
    vectors: Matrix,
    subwords: Option<SubwordTable>,
}

/// Result of [`EmbeddingSpace::word_vector`].
#[derive(Clone, Debug, PartialEq)]
pub struct WordVector {
    pub vector: Vector,
    pub in_vocab: bool,
    /// The vector is exactly zero (e.g. an OOV word whose buckets were never
    /// trained).
    pub degenerate: bool,
}

impl EmbeddingSpace {
    pub fn new(vocab: Vocabulary, vectors: Matrix) -> Result<Self> {
        Self::build(vocab, vectors, None)
    }

    pub fn with_subwords(vocab: Vocabulary, vectors: Matrix, table: SubwordTable) -> Result<Self> {
        if table.vectors.nrows() != vectors.nrows() {
            return Err(Error::InvalidInput("subword table dimension mismatch".into()));
        }
        Self::build(vocab, vectors, Some(table))
    }

    fn build(vocab: Vocabulary, vectors: Matrix, subwords: Option<SubwordTable>) -> Result<Self> {
        if vectors.nrows() == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if vectors.ncols() != vocab.len() {
            return Err(Error::InvalidInput(format!(
                "{} vectors for {} words",
                vectors.ncols(),
                vocab.len()
            )));
        }
        if vectors.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical("non-finite vector entry".into()));
        }
        Ok(EmbeddingSpace {
            vocab,
            vectors,
            subwords,
        })
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn mode(&self) -> Mode {
        if self.subwords.is_some() {
            Mode::Subword
        } else {
            Mode::Word
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Stored word rows (without n-gram contributions).
    pub fn word_rows(&self) -> &Matrix {
        &self.vectors
    }

    pub fn subwords(&self) -> Option<&SubwordTable> {
        self.subwords.as_ref()
    }

    /// Word mode: the stored vector of an in-vocabulary word. Subword mode:
    /// the word's own vector (if in vocabulary) plus its n-gram bucket
    /// vectors; absent only when the word is OOV and has no n-grams.
    pub fn word_vector(&self, word: &str) -> Option<WordVector> {
        let row = self.vocab.get(word);
        let vector = match (&self.subwords, row) {
            (None, None) => return None,
            (None, Some(i)) => self.vectors.column(i).into_owned(),
            (Some(table), row) => {
                let buckets = table.buckets(word);
                if row.is_none() && buckets.is_empty() {
                    return None;
                }
                let mut v = match row {
                    Some(i) => self.vectors.column(i).into_owned(),
                    None => Vector::zeros(self.dim()),
                };
                for b in buckets {
                    if let Some(bv) = table.bucket_vector(b) {
                        v += bv;
                    }
                }
                v
            }
        };
        let degenerate = vector.iter().all(|&x| x == 0.0);
        Some(WordVector {
            vector,
            in_vocab: row.is_some(),
            degenerate,
        })
    }

    /// `d × n` matrix of `word_vector` for every vocabulary word, in order.
    pub fn composed_vectors(&self) -> Matrix {
        match &self.subwords {
            None => self.vectors.clone(),
            Some(_) => {
                let mut m = self.vectors.clone();
                for (i, w) in self.vocab.words().iter().enumerate() {
                    let v = self.word_vector(w).expect("in vocabulary").vector;
                    m.set_column(i, &v);
                }
                m
            }
        }
    }

    /// Word-mode copy holding the composed vectors.
    pub fn flatten(&self) -> EmbeddingSpace {
        EmbeddingSpace {
            vocab: self.vocab.clone(),
            vectors: self.composed_vectors(),
            subwords: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab(words: &[&str]) -> Vocabulary {
        Vocabulary::from_words(words.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    #[test]
    fn word_mode_lookup() {
        let m = Matrix::from_column_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let s = EmbeddingSpace::new(vocab(&["a", "b"]), m).unwrap();
        assert_eq!(s.word_vector("b").unwrap().vector.as_slice(), &[3.0, 4.0]);
        assert!(s.word_vector("zzz").is_none());
    }

    #[test]
    fn subword_oov_with_zero_buckets_is_degenerate() {
        let table = SubwordTable::new(3, 3, 1000, HashMap::new(), Matrix::zeros(2, 0));
        let s = EmbeddingSpace::with_subwords(vocab(&["ab"]), Matrix::from_element(2, 1, 1.0), table).unwrap();
        let v = s.word_vector("xyz").unwrap();
        assert!(!v.in_vocab);
        assert!(v.degenerate);
        assert_eq!(v.vector, Vector::zeros(2));
        // no n-grams at all
        let table = SubwordTable::new(5, 6, 1000, HashMap::new(), Matrix::zeros(2, 0));
        let s = EmbeddingSpace::with_subwords(vocab(&["ab"]), Matrix::from_element(2, 1, 1.0), table).unwrap();
        assert!(s.word_vector("a").is_none());
    }

    #[test]
    fn subword_sum() {
        let buckets: Vec<u32> = subword_ngrams("her", 3, 3).iter().map(|g| bucket_of(g, 50)).collect();
        let mut slots = HashMap::new();
        for b in &buckets {
            let n = slots.len();
            slots.entry(*b).or_insert(n);
        }
        let mut bv = Matrix::zeros(1, slots.len());
        for (&b, &s) in &slots {
            bv[(0, s)] = b as f64;
        }
        let table = SubwordTable::new(3, 3, 50, slots, bv);
        let s = EmbeddingSpace::with_subwords(vocab(&["her"]), Matrix::from_element(1, 1, 0.5), table).unwrap();
        let expect = 0.5 + buckets.iter().map(|&b| b as f64).sum::<f64>();
        assert_eq!(s.word_vector("her").unwrap().vector[0], expect);
        assert_eq!(s.composed_vectors()[(0, 0)], expect);
    }

    #[test]
    fn rejects_non_finite() {
        let m = Matrix::from_element(2, 1, f64::NAN);
        assert!(EmbeddingSpace::new(vocab(&["a"]), m).is_err());
    }
}
