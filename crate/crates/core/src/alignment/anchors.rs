use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embeddings::EmbeddingSpace;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    IdenticalStrings,
    Refined,
    Gold,
    Synthetic,
    File,
}

/// Ordered (source word, target word) pairs without duplicates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnchorDictionary {
    pairs: Vec<(String, String)>,
    pub provenance: Provenance,
}

impl AnchorDictionary {
    /// Duplicate pairs are dropped, keeping the first occurrence.
    pub fn new(pairs: impl IntoIterator<Item = (String, String)>, provenance: Provenance) -> Self {
        let mut seen = HashSet::new();
        let pairs = pairs
            .into_iter()
            .filter(|p| seen.insert(p.clone()))
            .collect();
        AnchorDictionary { pairs, provenance }
    }

    pub fn empty(provenance: Provenance) -> Self {
        AnchorDictionary {
            pairs: Vec::new(),
            provenance,
        }
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Same set of pairs, ignoring order and provenance.
    pub fn same_pairs(&self, other: &AnchorDictionary) -> bool {
        self.len() == other.len()
            && self.pairs.iter().collect::<BTreeSet<_>>() == other.pairs.iter().collect::<BTreeSet<_>>()
    }

    /// Every source word is in the source vocabulary and every target word
    /// in the target vocabulary.
    pub fn check_vocabularies(&self, src: &EmbeddingSpace, tgt: &EmbeddingSpace) -> Result<()> {
        for (s, t) in &self.pairs {
            if !src.vocab().contains(s) {
                return Err(Error::InvalidInput(format!("anchor source {s:?} not in source vocabulary")));
            }
            if !tgt.vocab().contains(t) {
                return Err(Error::InvalidInput(format!("anchor target {t:?} not in target vocabulary")));
            }
        }
        Ok(())
    }

    /// TSV: `source<TAB>target` per line, `#` comments and blank lines ignored.
    pub fn read_tsv(path: &Path, provenance: Provenance) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut f = line.split('\t');
            match (f.next(), f.next(), f.next()) {
                (Some(s), Some(t), None) if !s.trim().is_empty() && !t.trim().is_empty() => {
                    pairs.push((s.trim().to_string(), t.trim().to_string()))
                }
                _ => {
                    return Err(Error::parse(
                        path.display(),
                        i + 1,
                        "expected \"source<TAB>target\"",
                    ))
                }
            }
        }
        Ok(Self::new(pairs, provenance))
    }

    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        writeln!(out, "# provenance: {}", serde_json::to_string(&self.provenance).expect("json"))
            .expect("vec write");
        for (s, t) in &self.pairs {
            writeln!(out, "{s}\t{t}").expect("vec write");
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Words spelled identically in both vocabularies, each paired with itself,
/// in source vocabulary order (most frequent first). An empty result is
/// returned as-is with a logged warning.
pub fn extract_anchors(
    src: &EmbeddingSpace,
    tgt: &EmbeddingSpace,
    max_pairs: Option<usize>,
) -> AnchorDictionary {
    let limit = max_pairs.unwrap_or(usize::MAX);
    let pairs: Vec<(String, String)> = src
        .vocab()
        .words()
        .iter()
        .filter(|w| tgt.vocab().contains(w))
        .take(limit)
        .map(|w| (w.clone(), w.clone()))
        .collect();
    if pairs.is_empty() {
        log::warn!("no identical strings shared by the two vocabularies");
    }
    AnchorDictionary::new(pairs, Provenance::IdenticalStrings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::Vocabulary;
    use crate::linalg::Matrix;

    fn space(words: &[&str], counts: &[u64]) -> EmbeddingSpace {
        let v = Vocabulary::with_counts(words.iter().map(|s| s.to_string()).collect(), counts.to_vec(), 0).unwrap();
        EmbeddingSpace::new(v, Matrix::from_element(2, words.len(), 1.0)).unwrap()
    }

    #[test]
    fn intersection_in_frequency_order() {
        let src = space(&["c", "b", "a"], &[9, 5, 1]);
        let tgt = space(&["b", "c", "d"], &[3, 2, 1]);
        let d = extract_anchors(&src, &tgt, None);
        assert_eq!(d.pairs(), [("c".to_string(), "c".to_string()), ("b".into(), "b".into())]);
        assert_eq!(extract_anchors(&src, &tgt, Some(1)).len(), 1);
    }

    #[test]
    fn identical_and_disjoint() {
        let a = space(&["x", "y", "z"], &[3, 2, 1]);
        assert_eq!(extract_anchors(&a, &a, None).len(), 3);
        let b = space(&["p", "q"], &[1, 1]);
        assert!(extract_anchors(&a, &b, None).is_empty());
    }

    #[test]
    fn tsv_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.tsv");
        let d = AnchorDictionary::new(
            vec![("a".into(), "b".into()), ("a".into(), "b".into()), ("c".into(), "d".into())],
            Provenance::Gold,
        );
        assert_eq!(d.len(), 2);
        d.write_tsv(&p).unwrap();
        let back = AnchorDictionary::read_tsv(&p, Provenance::File).unwrap();
        assert!(back.same_pairs(&d));
        fs::write(&p, "a\tb\nbroken line\n").unwrap();
        let err = AnchorDictionary::read_tsv(&p, Provenance::File).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }
}
