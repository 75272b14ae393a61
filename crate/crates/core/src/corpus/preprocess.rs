//! Sentence splitting, tokenization, stopword removal and stemming.

use serde::{Deserialize, Serialize};

use super::porter::porter_stem;
use super::stopwords::StopwordSet;

/// Where sentences end besides `.`, `?` and `!` followed by whitespace.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NewlineBoundary {
    /// Every line break ends a sentence.
    #[default]
    Every,
    /// Only blank lines end a sentence; single line breaks are whitespace.
    Blank,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreprocessConfig {
    pub lowercase: bool,
    pub stem: bool,
    pub stopwords: StopwordSet,
    pub newline: NewlineBoundary,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            lowercase: true,
            stem: true,
            stopwords: StopwordSet::english(),
            newline: NewlineBoundary::Every,
        }
    }
}

impl PreprocessConfig {
    /// No lowercasing, stemming or stopwords.
    pub fn verbatim() -> Self {
        PreprocessConfig {
            lowercase: false,
            stem: false,
            stopwords: StopwordSet::empty(),
            newline: NewlineBoundary::Every,
        }
    }

    /// Serializable description, used for fingerprints and provenance.
    pub fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "lowercase": self.lowercase,
            "stem": self.stem,
            "newline": self.newline,
            "stopwords": self.stopwords.iter().collect::<Vec<_>>(),
        })
    }

    /// Normalize a single term (e.g. a gold dictionary entry) the way corpus
    /// tokens are normalized. Stopword filtering is not applied.
    pub fn normalize_term(&self, term: &str) -> String {
        let t = if self.lowercase {
            term.to_lowercase()
        } else {
            term.to_string()
        };
        if self.stem {
            stem_token(&t)
        } else {
            t
        }
    }
}

fn stem_token(token: &str) -> String {
    if token.bytes().all(|c| c.is_ascii_alphabetic()) {
        porter_stem(token)
    } else {
        token.to_string()
    }
}

/// Characters that always separate tokens.
fn is_hard_separator(c: char) -> bool {
    c.is_whitespace()
        || matches!(
            c,
            ',' | ';' | '(' | ')' | '[' | ']' | '{' | '}' | '"' | '!' | '?' | '<' | '>' | '=' | '*' | '`'
        )
}

/// Split text into sentences. Terminal punctuation stays attached and is
/// stripped later by the tokenizer.
pub fn split_sentences(text: &str, newline: NewlineBoundary) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        let next = chars.peek().map(|&(_, n)| n);
        let end = match c {
            '.' | '?' | '!' => next.is_none_or(char::is_whitespace),
            '\n' => match newline {
                NewlineBoundary::Every => true,
                NewlineBoundary::Blank => text[i + 1..]
                    .chars()
                    .take_while(|&n| n != '\n')
                    .all(char::is_whitespace)
                    && text[i + 1..].contains('\n'),
            },
            _ => false,
        };
        if end {
            let stop = i + c.len_utf8();
            out.push(&text[start..stop]);
            start = stop;
        }
    }
    out.push(&text[start..]);
    out.retain(|s| !s.trim().is_empty());
    out
}

/// Split a sentence into raw tokens. Internal symbols (`40mg`, `c/w`,
/// `3.125`, `coffee-ground`) are kept; leading and trailing punctuation is
/// stripped.
pub fn tokenize(sentence: &str) -> Vec<&str> {
    sentence
        .split(is_hard_separator)
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|t| !t.is_empty())
        .collect()
}

/// Full pipeline for one text: sentences of surviving tokens, in order.
/// Sentences left empty after filtering are dropped.
pub fn preprocess(text: &str, config: &PreprocessConfig) -> Vec<Vec<String>> {
    split_sentences(text, config.newline)
        .into_iter()
        .filter_map(|sentence| {
            let tokens: Vec<String> = tokenize(sentence)
                .into_iter()
                .filter_map(|raw| {
                    let t = if config.lowercase {
                        raw.to_lowercase()
                    } else {
                        raw.to_string()
                    };
                    if config.stopwords.contains(&t) {
                        return None;
                    }
                    let t = if config.stem { stem_token(&t) } else { t };
                    // stemming can land on a stopword ("ones" -> "on")
                    (!t.is_empty() && !config.stopwords.contains(&t)).then_some(t)
                })
                .collect();
            (!tokens.is_empty()).then_some(tokens)
        })
        .collect()
}
