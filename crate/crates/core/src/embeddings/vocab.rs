use std::collections::HashMap;

use crate::corpus::TokenizedCorpus;
use crate::{Error, Result};

/// Words ordered by descending count, ties broken lexicographically.
///
/// Spaces loaded from vector files keep the file order and have zero counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    total_tokens: u64,
}

impl Vocabulary {
    /// Keep words occurring strictly more than `min_count` times.
    pub fn build(corpus: &TokenizedCorpus, min_count: u64) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyVocabulary("corpus has no sentences".into()));
        }
        let mut entries: Vec<(&String, u64)> = corpus
            .token_counts
            .iter()
            .filter(|&(_, &c)| c > min_count)
            .map(|(w, &c)| (w, c))
            .collect();
        if entries.is_empty() {
            return Err(Error::EmptyVocabulary(format!(
                "no word occurs more than {min_count} times"
            )));
        }
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let (words, counts): (Vec<String>, Vec<u64>) =
            entries.into_iter().map(|(w, c)| (w.clone(), c)).unzip();
        Self::with_counts(words, counts, corpus.total_tokens())
    }

    /// Vocabulary in the given order without counts.
    pub fn from_words(words: Vec<String>) -> Result<Self> {
        let counts = vec![0; words.len()];
        Self::with_counts(words, counts, 0)
    }

    pub fn with_counts(words: Vec<String>, counts: Vec<u64>, total_tokens: u64) -> Result<Self> {
        if words.len() != counts.len() {
            return Err(Error::InvalidInput("words and counts differ in length".into()));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if w.is_empty() || w.chars().any(char::is_whitespace) {
                return Err(Error::InvalidInput(format!("invalid word {w:?}")));
            }
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate word {w:?}")));
            }
        }
        Ok(Vocabulary {
            words,
            counts,
            index,
            total_tokens,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    pub fn count(&self, i: usize) -> u64 {
        self.counts[i]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(sents: &[&str]) -> TokenizedCorpus {
        TokenizedCorpus::from_sentences(
            sents
                .iter()
                .map(|s| s.split_whitespace().map(String::from).collect())
                .collect(),
            String::new(),
        )
    }

    #[test]
    fn more_than_min_count() {
        let c = corpus(&["hepatic qd", "hepatic qd", "hepatic qd", "hepatic"]);
        let v = Vocabulary::build(&c, 3).unwrap();
        assert!(v.contains("hepatic"));
        assert!(!v.contains("qd"));
    }

    #[test]
    fn repeated_sentence() {
        let c = corpus(&["b a c"; 10]);
        let v = Vocabulary::build(&c, 3).unwrap();
        assert_eq!(v.words(), ["a", "b", "c"]);
        assert_eq!(v.total_tokens(), 30);
    }

    #[test]
    fn ordering_by_count_then_word() {
        let c = corpus(&["z z z y y x x w"]);
        let v = Vocabulary::build(&c, 0).unwrap();
        assert_eq!(v.words(), ["z", "x", "y", "w"]);
    }

    #[test]
    fn empty_after_filter_is_error() {
        let c = corpus(&["a b"]);
        assert!(matches!(Vocabulary::build(&c, 3), Err(Error::EmptyVocabulary(_))));
    }

    #[test]
    fn duplicates_rejected() {
        assert!(Vocabulary::from_words(vec!["a".into(), "a".into()]).is_err());
    }
}
