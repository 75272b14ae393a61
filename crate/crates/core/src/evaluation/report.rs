use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::GoldDictionary;
use crate::alignment::Translator;
use crate::linalg::par_map;
use crate::metrics::Metric;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryOutcome {
    pub source: String,
    pub retrieved: Vec<(String, f64)>,
    /// 1-based rank of the first acceptable target, if retrieved.
    pub hit_rank: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metric: Metric,
    pub ks: Vec<usize>,
    /// Hits over evaluated (resolvable) queries.
    pub precision_at: BTreeMap<usize, f64>,
    /// Hits over the whole gold dictionary, unresolvable queries counted as
    /// misses.
    pub precision_at_all_gold: BTreeMap<usize, f64>,
    pub gold_size: usize,
    pub evaluated: usize,
    pub per_query: Vec<QueryOutcome>,
    /// Source terms that could not be resolved in the source space.
    pub skipped: Vec<String>,
    pub config: serde_json::Value,
}

impl EvalReport {
    /// `P@1 0.270 P@5 0.570 P@10 0.780`
    pub fn summary_line(&self) -> String {
        self.precision_at
            .iter()
            .map(|(k, p)| format!("P@{k} {p:.3}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Translate every gold source term and count a hit at `k` when any
/// acceptable target appears among the top `k` retrieved words.
///
/// Terms are looked up as given; normalise the dictionary first (see
/// [`GoldDictionary::normalized`]) when the spaces were trained on
/// preprocessed text.
pub fn precision_at_k(
    translator: &Translator<'_>,
    gold: &GoldDictionary,
    ks: &[usize],
    config: serde_json::Value,
) -> Result<EvalReport> {
    if gold.is_empty() {
        return Err(Error::InvalidInput("gold dictionary is empty".into()));
    }
    if ks.is_empty() || ks.contains(&0) {
        return Err(Error::Config("ks must be non-empty and each at least 1".into()));
    }
    let mut ks = ks.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let depth = *ks.last().expect("non-empty");

    let entries = gold.entries();
    let results = par_map(entries.len(), |i| translator.translate(&entries[i].0, depth));
    let mut per_query = Vec::new();
    let mut skipped = Vec::new();
    for ((src, targets), result) in entries.iter().zip(results) {
        match result? {
            None => skipped.push(src.clone()),
            Some(r) => {
                let hit_rank = r
                    .neighbors
                    .iter()
                    .position(|(w, _)| targets.contains(w))
                    .map(|p| p + 1);
                per_query.push(QueryOutcome {
                    source: src.clone(),
                    retrieved: r.neighbors,
                    hit_rank,
                });
            }
        }
    }
    if !skipped.is_empty() {
        log::warn!("{} of {} gold queries not found in the source space", skipped.len(), gold.len());
    }
    let evaluated = per_query.len();
    let mut precision_at = BTreeMap::new();
    let mut precision_at_all_gold = BTreeMap::new();
    for &k in &ks {
        let hits = per_query.iter().filter(|q| q.hit_rank.is_some_and(|r| r <= k)).count() as f64;
        precision_at.insert(k, if evaluated == 0 { 0.0 } else { hits / evaluated as f64 });
        precision_at_all_gold.insert(k, hits / gold.len() as f64);
    }
    Ok(EvalReport {
        metric: translator.metric(),
        ks,
        precision_at,
        precision_at_all_gold,
        gold_size: gold.len(),
        evaluated,
        per_query,
        skipped,
        config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::{AlignmentMatrix, NormalizePolicy, PreparedSpace};
    use crate::embeddings::{EmbeddingSpace, Vocabulary};
    use crate::linalg::Matrix;

    #[test]
    fn self_retrieval_is_perfect_and_skips_are_counted() {
        let words: Vec<String> = (0..12).map(|i| format!("w{i}")).collect();
        let v = Vocabulary::from_words(words.clone()).unwrap();
        let m = Matrix::from_fn(4, 12, |r, c| ((r * 7 + c * 3) as f64).sin() + if r == c % 4 { 2.0 } else { 0.0 });
        let s = EmbeddingSpace::new(v, m).unwrap();
        let p = PreparedSpace::new(&s, NormalizePolicy::Unit);
        let w = AlignmentMatrix::identity(4);
        let t = Translator::new(&w, &p, &p, Metric::Csls, 3, 100).unwrap();
        let mut entries: Vec<(String, Vec<String>)> = words.iter().map(|w| (w.clone(), vec![w.clone()])).collect();
        entries.push(("missing".into(), vec!["w1".into()]));
        let gold = GoldDictionary::new(entries).unwrap();
        let r = precision_at_k(&t, &gold, &[10, 1, 5], serde_json::Value::Null).unwrap();
        assert_eq!(r.ks, [1, 5, 10]);
        assert!(r.precision_at.values().all(|&p| p == 1.0));
        assert_eq!(r.evaluated + r.skipped.len(), gold.len());
        assert_eq!(r.skipped, ["missing"]);
        assert!((r.precision_at_all_gold[&1] - 12.0 / 13.0).abs() < 1e-15);
        assert_eq!(r.summary_line(), "P@1 1.000 P@5 1.000 P@10 1.000");
    }
}
