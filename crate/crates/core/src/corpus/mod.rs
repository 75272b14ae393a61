//! Raw notes to tokenized sentence streams.

mod porter;
mod preprocess;
mod sections;
mod stopwords;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use porter::porter_stem;
pub use preprocess::{preprocess, split_sentences, tokenize, NewlineBoundary, PreprocessConfig};
pub use sections::{segment_sections, HeaderSet, RawDocument, Section, SectionedDocument, PREAMBLE};
pub use stopwords::StopwordSet;

use crate::{Error, Result};

/// Delimiter line separating documents in a single multi-note file.
pub const DEFAULT_DOCUMENT_DELIMITER: &str = "<<<END-OF-NOTE>>>";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedCorpus {
    pub sentences: Vec<Vec<String>>,
    pub token_counts: BTreeMap<String, u64>,
    /// SHA-256 of the preprocessing configuration, hex encoded.
    pub config_fingerprint: String,
}

impl TokenizedCorpus {
    pub fn from_sentences(sentences: Vec<Vec<String>>, config_fingerprint: String) -> Self {
        let mut token_counts = BTreeMap::new();
        for tok in sentences.iter().flatten() {
            *token_counts.entry(tok.clone()).or_insert(0) += 1;
        }
        TokenizedCorpus {
            sentences,
            token_counts,
            config_fingerprint,
        }
    }

    pub fn total_tokens(&self) -> u64 {
        self.token_counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Corpus file: one sentence per line, tokens separated by single spaces.
    pub fn write_text(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for s in &self.sentences {
            writeln!(w, "{}", s.join(" ")).map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Read a corpus file. Tokens are whatever whitespace separates; empty
    /// lines are skipped.
    pub fn read_text(path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut sentences = Vec::new();
        let mut hasher = Sha256::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| match e.kind() {
                std::io::ErrorKind::InvalidData => {
                    Error::parse(path.display(), i + 1, "invalid UTF-8")
                }
                _ => Error::io(path, e),
            })?;
            hasher.update(line.as_bytes());
            hasher.update(b"\n");
            let toks: Vec<String> = line.split_whitespace().map(str::to_string).collect();
            if !toks.is_empty() {
                sentences.push(toks);
            }
        }
        Ok(Self::from_sentences(sentences, hex(&hasher.finalize())))
    }

    /// Companion metadata: configuration, counts and fingerprint.
    pub fn metadata(&self, config: serde_json::Value) -> serde_json::Value {
        serde_json::json!({
            "config": config,
            "config_fingerprint": self.config_fingerprint,
            "sentences": self.sentences.len(),
            "tokens": self.total_tokens(),
            "token_counts": self.token_counts,
        })
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn fingerprint(config: &PreprocessConfig) -> String {
    let canonical = serde_json::to_vec(&config.describe()).expect("json");
    hex(&Sha256::digest(canonical))
}

/// Preprocess a list of texts into one corpus.
pub fn build_corpus<'a>(
    texts: impl IntoIterator<Item = &'a str>,
    config: &PreprocessConfig,
) -> TokenizedCorpus {
    let sentences = texts
        .into_iter()
        .flat_map(|t| preprocess(t, config))
        .collect();
    TokenizedCorpus::from_sentences(sentences, fingerprint(config))
}

/// Build one corpus per group of canonical section names. A group's text is
/// the bodies of its sections, document by document, in document order.
pub fn build_section_corpora(
    docs: &[RawDocument],
    headers: &HeaderSet,
    groups: &[Vec<String>],
    config: &PreprocessConfig,
) -> Vec<TokenizedCorpus> {
    let segmented: Vec<SectionedDocument> =
        docs.iter().map(|d| segment_sections(d, headers)).collect();
    groups
        .iter()
        .map(|group| {
            let texts = segmented.iter().flat_map(|doc| {
                doc.sections
                    .iter()
                    .filter(|s| group.iter().any(|g| s.name.eq_ignore_ascii_case(g)))
                    .map(|s| s.body.as_str())
            });
            build_corpus(texts, config)
        })
        .collect()
}

fn read_utf8(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    String::from_utf8(bytes).map_err(|e| {
        let line = 1 + e.as_bytes()[..e.utf8_error().valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count();
        Error::parse(path.display(), line, "invalid UTF-8")
    })
}

/// Read notes from a directory (one note per file, sorted by file name, id =
/// file name) or from a single file whose notes are separated by `delimiter`
/// lines (ids are `<file name>#<index>`).
pub fn read_documents(path: &Path, delimiter: &str) -> Result<Vec<RawDocument>> {
    let meta = fs::metadata(path).map_err(|e| Error::io(path, e))?;
    let docs = if meta.is_dir() {
        let mut entries: Vec<_> = fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.is_file())
            .collect();
        entries.sort();
        entries
            .iter()
            .map(|p| {
                Ok(RawDocument {
                    id: p.file_name().unwrap_or_default().to_string_lossy().into_owned(),
                    text: read_utf8(p)?,
                })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        let text = read_utf8(path)?;
        let name = path.file_name().unwrap_or_default().to_string_lossy();
        split_documents(&text, delimiter)
            .into_iter()
            .enumerate()
            .map(|(i, t)| RawDocument {
                id: format!("{name}#{i}"),
                text: t,
            })
            .collect()
    };
    let mut seen = HashSet::new();
    for d in &docs {
        if d.id.is_empty() || !seen.insert(d.id.as_str()) {
            return Err(Error::InvalidInput(format!("duplicate or empty document id {:?}", d.id)));
        }
    }
    Ok(docs)
}

fn split_documents(text: &str, delimiter: &str) -> Vec<String> {
    let mut docs = vec![String::new()];
    for line in text.split_inclusive('\n') {
        if line.trim_end_matches(['\n', '\r']) == delimiter {
            docs.push(String::new());
        } else {
            docs.last_mut().expect("non-empty").push_str(line);
        }
    }
    docs.retain(|d| !d.trim().is_empty());
    docs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_instances() {
        let c = build_corpus(["Fever. Fever and cough!"], &PreprocessConfig::default());
        assert_eq!(c.total_tokens(), c.sentences.iter().map(Vec::len).sum::<usize>() as u64);
        assert_eq!(c.token_counts["fever"], 2);
    }

    #[test]
    fn deterministic_fingerprint() {
        let a = fingerprint(&PreprocessConfig::default());
        let b = fingerprint(&PreprocessConfig::default());
        assert_eq!(a, b);
        assert_ne!(a, fingerprint(&PreprocessConfig::verbatim()));
    }

    #[test]
    fn delimiter_split() {
        let docs = split_documents("a\nb\n<<<END-OF-NOTE>>>\nc\n<<<END-OF-NOTE>>>\n", DEFAULT_DOCUMENT_DELIMITER);
        assert_eq!(docs, ["a\nb\n", "c\n"]);
    }

    #[test]
    fn rejects_bad_utf8() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("n.txt");
        fs::write(&p, b"ok\n\xff\xfe").unwrap();
        let err = read_documents(&p, DEFAULT_DOCUMENT_DELIMITER).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn section_groups() {
        let docs = vec![RawDocument {
            id: "1".into(),
            text: "HPI: chest pain.\nDischarge Instructions:\nTake your medicine.\n".into(),
        }];
        let groups = vec![
            vec!["History of present illness".to_string()],
            vec!["Discharge instruction".to_string()],
            vec!["Nonexistent".to_string()],
        ];
        let c = build_section_corpora(&docs, &HeaderSet::discharge_summary(), &groups, &PreprocessConfig::default());
        assert_eq!(c[0].sentences, vec![vec!["chest", "pain"]]);
        assert_eq!(c[1].sentences, vec![vec!["take", "medicin"]]);
        assert!(c[2].is_empty());
    }
}
