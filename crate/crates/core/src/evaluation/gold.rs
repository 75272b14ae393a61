use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::PreprocessConfig;
use crate::{Error, Result};

/// Source terms with one or more acceptable target terms.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldDictionary {
    entries: Vec<(String, Vec<String>)>,
}

impl GoldDictionary {
    /// Source terms must be unique and every term non-empty. Repeated targets
    /// within an entry are dropped.
    pub fn new(entries: Vec<(String, Vec<String>)>) -> Result<Self> {
        let mut seen = HashMap::new();
        let mut out = Vec::with_capacity(entries.len());
        for (i, (src, targets)) in entries.into_iter().enumerate() {
            if src.is_empty() || targets.is_empty() || targets.iter().any(String::is_empty) {
                return Err(Error::InvalidInput(format!("gold entry {} has an empty term", i + 1)));
            }
            if seen.insert(src.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate gold source term {src:?}")));
            }
            let mut uniq: Vec<String> = Vec::with_capacity(targets.len());
            for t in targets {
                if !uniq.contains(&t) {
                    uniq.push(t);
                }
            }
            out.push((src, uniq));
        }
        Ok(GoldDictionary { entries: out })
    }

    /// TSV lines `source<TAB>target1|target2|...`; blank lines and `#`
    /// comments are skipped.
    pub fn read_tsv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => Error::parse(path.display(), 0, "invalid UTF-8"),
            _ => Error::io(path, e),
        })?;
        let name = path.display();
        let mut entries = Vec::new();
        let mut lines_of: HashMap<String, usize> = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((src, rest)) = line.split_once('\t') else {
                return Err(Error::parse(&name, lineno, "expected \"source<TAB>target[|target...]\""));
            };
            let src = src.trim();
            let targets: Vec<String> = rest.split('|').map(|t| t.trim().to_string()).collect();
            if src.is_empty() || rest.contains('\t') || targets.iter().any(String::is_empty) {
                return Err(Error::parse(&name, lineno, "empty term or extra column"));
            }
            if let Some(prev) = lines_of.insert(src.to_string(), lineno) {
                return Err(Error::parse(&name, lineno, format!("source term {src:?} already on line {prev}")));
            }
            entries.push((src.to_string(), targets));
        }
        Self::new(entries)
    }

    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for (s, ts) in &self.entries {
            out.push_str(s);
            out.push('\t');
            out.push_str(&ts.join("|"));
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Apply corpus normalisation (lowercasing, stemming) to every term.
    /// Entries whose source terms collide after normalisation are merged.
    pub fn normalized(&self, config: &PreprocessConfig) -> Self {
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut entries: Vec<(String, Vec<String>)> = Vec::new();
        for (s, ts) in &self.entries {
            let s = config.normalize_term(s);
            let slot = *index.entry(s.clone()).or_insert_with(|| {
                entries.push((s, Vec::new()));
                entries.len() - 1
            });
            for t in ts {
                let t = config.normalize_term(t);
                if !entries[slot].1.contains(&t) {
                    entries[slot].1.push(t);
                }
            }
        }
        GoldDictionary { entries }
    }

    pub fn entries(&self) -> &[(String, Vec<String>)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_alternatives_and_reports_bad_lines() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("gold.tsv");
        fs::write(&p, "# comment\nepistaxis\tnosebleed|nose bleed\n\nemesis\tvomiting\n").unwrap();
        let g = GoldDictionary::read_tsv(&p).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.entries()[0].1, ["nosebleed", "nose bleed"]);

        fs::write(&p, "a\tb\nno tab here\n").unwrap();
        assert!(matches!(GoldDictionary::read_tsv(&p), Err(Error::Parse { line: 2, .. })));
        fs::write(&p, "a\tb\na\tc\n").unwrap();
        assert!(matches!(GoldDictionary::read_tsv(&p), Err(Error::Parse { line: 2, .. })));
        fs::write(&p, "a\tb||c\n").unwrap();
        assert!(GoldDictionary::read_tsv(&p).is_err());
    }

    #[test]
    fn normalization_matches_corpus() {
        let g = GoldDictionary::new(vec![
            ("hematemesis".into(), vec!["vomiting".into()]),
            ("hematemesis".into(), vec!["vomited".into()]),
        ])
        .unwrap_err();
        assert!(matches!(g, Error::InvalidInput(_)));
        let g = GoldDictionary::new(vec![
            ("Running".into(), vec!["Walks".into()]),
            ("runs".into(), vec!["walking".into()]),
        ])
        .unwrap();
        let n = g.normalized(&PreprocessConfig::default());
        assert_eq!(n.entries(), [("run".to_string(), vec!["walk".to_string()])]);
    }
}
