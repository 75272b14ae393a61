//! Cosine, CSLS, exact k-nearest-neighbour search and hubness diagnostics.
//!
//! CSLS (cross-domain similarity local scaling) between a mapped source
//! vector `x` and a target vector `y` is
//!
//! ```text
//! CSLS(x, y) = 2 cos(x, y) − r_T(x) − r_S(y)
//! ```
//!
//! where `r_T(x)` is the mean cosine of `x` to its `K` nearest targets and
//! `r_S(y)` the mean cosine of `y` to its `K` nearest mapped sources. Points
//! sitting in dense regions (hubs) are penalised.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::embeddings::EmbeddingSpace;
use crate::linalg::{self, chunks, mean_of_top_k, normalize_columns, par_map, Matrix};
use crate::{Error, Result};

/// Default CSLS neighbourhood size.
pub const DEFAULT_CSLS_K: usize = 10;

const BLOCK: usize = 256;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Cosine,
    #[default]
    Csls,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(Metric::Cosine),
            "csls" => Ok(Metric::Csls),
            _ => Err(Error::Config(format!("unknown metric {s:?} (cosine|csls)"))),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Metric::Cosine => "cosine",
            Metric::Csls => "csls",
        })
    }
}

/// Cosine similarity, clamped to [−1, 1].
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector("cosine of a zero vector".into()));
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

/// Copy of `m` with unit-length columns (zero columns stay zero).
pub fn unit_columns(m: &Matrix) -> Matrix {
    let mut u = m.clone();
    normalize_columns(&mut u);
    u
}

/// For every column of `queries`, the mean of its `k` largest cosines to the
/// columns of `pool`. Both matrices must already have unit columns.
pub fn neighborhood_means(queries: &Matrix, pool: &Matrix, k: usize) -> Vec<f64> {
    let ranges = chunks(queries.ncols(), BLOCK);
    par_map(ranges.len(), |c| {
        let r = ranges[c].clone();
        let sims = pool.tr_mul(&queries.columns(r.start, r.len()));
        sims.column_iter()
            .map(|col| mean_of_top_k(col.as_slice(), k))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// CSLS scores of one query against every candidate (columns of
/// `candidates`), with `sources` the mapped source population defining
/// `r_S`. Precomputed `r_T(query)` / `r_S` may be supplied.
pub fn csls(
    query: &[f64],
    candidates: &Matrix,
    sources: &Matrix,
    k: usize,
    r_t: Option<f64>,
    r_s: Option<&[f64]>,
) -> Result<Vec<f64>> {
    check_k(k, candidates.ncols(), "candidates")?;
    check_k(k, sources.ncols(), "sources")?;
    let cand = unit_columns(candidates);
    let q = unit_query(query)?;
    let cos: Vec<f64> = cand.tr_mul(&q).iter().map(|c| c.clamp(-1.0, 1.0)).collect();
    let r_t = r_t.unwrap_or_else(|| mean_of_top_k(&cos, k));
    let owned;
    let r_s = match r_s {
        Some(r) => r,
        None => {
            owned = neighborhood_means(&cand, &unit_columns(sources), k);
            &owned
        }
    };
    if r_s.len() != cand.ncols() {
        return Err(Error::InvalidInput("r_S length differs from candidate count".into()));
    }
    Ok(cos.iter().zip(r_s).map(|(c, rs)| 2.0 * c - r_t - rs).collect())
}

fn check_k(k: usize, available: usize, what: &str) -> Result<()> {
    if k == 0 || k > available {
        return Err(Error::InvalidInput(format!(
            "CSLS neighbourhood K={k} must be in 1..={available} ({what})"
        )));
    }
    Ok(())
}

fn unit_query(query: &[f64]) -> Result<nalgebra::DVector<f64>> {
    let q = nalgebra::DVector::from_column_slice(query);
    let n = q.norm();
    if n == 0.0 {
        return Err(Error::ZeroVector("query vector is zero".into()));
    }
    Ok(q / n)
}

/// Write-once CSLS state for repeated queries against one target set:
/// unit target vectors and their `r_S` penalties.
#[derive(Clone, Debug)]
pub struct CslsIndex {
    k: usize,
    r_s: Vec<f64>,
}

impl CslsIndex {
    /// `targets` and `mapped_sources` must have unit columns.
    pub fn new(targets: &Matrix, mapped_sources: &Matrix, k: usize) -> Result<Self> {
        check_k(k, targets.ncols(), "targets")?;
        check_k(k, mapped_sources.ncols(), "sources")?;
        Ok(CslsIndex {
            k,
            r_s: neighborhood_means(targets, mapped_sources, k),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r_s(&self) -> &[f64] {
        &self.r_s
    }
}

/// How candidates are scored against a query.
#[derive(Clone, Copy, Debug)]
pub enum Scoring<'a> {
    Cosine,
    Csls(&'a CslsIndex),
}

impl Scoring<'_> {
    pub fn metric(&self) -> Metric {
        match self {
            Scoring::Cosine => Metric::Cosine,
            Scoring::Csls(_) => Metric::Csls,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborResult {
    pub query: String,
    pub metric: Metric,
    pub k: usize,
    /// Descending score; equal scores in lexicographic word order.
    pub neighbors: Vec<(String, f64)>,
    /// `k` exceeded the number of candidates; the full ranking is returned.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub truncated: bool,
}

impl NeighborResult {
    /// One JSON line: `{"query": .., "metric": .., "neighbors": [[word, score], ..]}`.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({
            "query": self.query,
            "metric": self.metric,
            "neighbors": self.neighbors,
        })
        .to_string()
    }
}

/// Unit-normalised candidate vectors with their words; exact top-k search.
#[derive(Clone, Debug)]
pub struct TargetIndex {
    words: Vec<String>,
    unit: Matrix,
}

impl TargetIndex {
    pub fn new(words: Vec<String>, vectors: &Matrix) -> Result<Self> {
        if words.len() != vectors.ncols() {
            return Err(Error::InvalidInput("word count differs from vector count".into()));
        }
        Ok(TargetIndex {
            words,
            unit: unit_columns(vectors),
        })
    }

    pub fn from_space(space: &EmbeddingSpace) -> Self {
        TargetIndex {
            words: space.vocab().words().to_vec(),
            unit: unit_columns(&space.composed_vectors()),
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn unit_vectors(&self) -> &Matrix {
        &self.unit
    }

    /// Scores of `query` against every candidate, in candidate order.
    pub fn scores(&self, query: &[f64], scoring: Scoring<'_>) -> Result<Vec<f64>> {
        if query.len() != self.unit.nrows() {
            return Err(Error::InvalidInput("query dimension mismatch".into()));
        }
        let q = unit_query(query)?;
        let cos: Vec<f64> = self.unit.tr_mul(&q).iter().map(|c| c.clamp(-1.0, 1.0)).collect();
        Ok(match scoring {
            Scoring::Cosine => cos,
            Scoring::Csls(index) => {
                if index.r_s.len() != cos.len() {
                    return Err(Error::InvalidInput("CSLS index built for another target set".into()));
                }
                let r_t = mean_of_top_k(&cos, index.k);
                cos.iter().zip(&index.r_s).map(|(c, rs)| 2.0 * c - r_t - rs).collect()
            }
        })
    }

    /// Exact top-k; ties broken lexicographically on the word.
    pub fn top_k(&self, query_word: &str, query: &[f64], k: usize, scoring: Scoring<'_>) -> Result<NeighborResult> {
        if k == 0 {
            return Err(Error::InvalidInput("k must be at least 1".into()));
        }
        let scores = self.scores(query, scoring)?;
        let top = linalg::top_k_by(&scores, k, |a, b| self.words[a].cmp(&self.words[b]));
        Ok(NeighborResult {
            query: query_word.to_string(),
            metric: scoring.metric(),
            k,
            neighbors: top.into_iter().map(|i| (self.words[i].clone(), scores[i])).collect(),
            truncated: k > self.len(),
        })
    }
}

/// Exact nearest neighbours of a query vector within one space.
pub fn nearest_neighbors(
    query_word: &str,
    query: &[f64],
    space: &EmbeddingSpace,
    k: usize,
    scoring: Scoring<'_>,
) -> Result<NeighborResult> {
    TargetIndex::from_space(space).top_k(query_word, query, k, scoring)
}

/// How often each target appears in the top-k lists of a query set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HubnessReport {
    pub k: usize,
    pub metric: Metric,
    /// Occurrence count per target, in target order.
    pub counts: Vec<usize>,
    pub max: usize,
    pub argmax: Option<String>,
    pub mean: f64,
    pub skewness: f64,
}

/// Query vectors are the columns of `queries` (any norm).
pub fn hubness_report(
    queries: &Matrix,
    targets: &TargetIndex,
    k: usize,
    scoring: Scoring<'_>,
) -> Result<HubnessReport> {
    let lists = par_map(queries.ncols(), |j| {
        let q = queries.column(j);
        targets
            .scores(q.as_slice(), scoring)
            .map(|s| linalg::top_k_by(&s, k, |a, b| targets.words[a].cmp(&targets.words[b])))
    });
    let mut counts = vec![0usize; targets.len()];
    for list in lists {
        for i in list? {
            counts[i] += 1;
        }
    }
    let n = counts.len().max(1) as f64;
    let mean = counts.iter().sum::<usize>() as f64 / n;
    let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / n;
    let third = counts.iter().map(|&c| (c as f64 - mean).powi(3)).sum::<f64>() / n;
    let skewness = if var > 0.0 { third / var.powf(1.5) } else { 0.0 };
    let (argmax, max) = counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(&a.0)))
        .map(|(i, &c)| (Some(targets.words[i].clone()), c))
        .unwrap_or((None, 0));
    Ok(HubnessReport {
        k,
        metric: scoring.metric(),
        counts,
        max,
        argmax,
        mean,
        skewness,
    })
}

/// Total order used for rankings: score descending, then word ascending.
pub fn ranking_order(a: &(String, f64), b: &(String, f64)) -> Ordering {
    b.1.partial_cmp(&a.1)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.0.cmp(&b.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_examples() {
        assert!((cosine(&[3.0, 4.0], &[3.0, 4.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let c = cosine(&[1.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(matches!(cosine(&[0.0, 0.0], &[1.0, 1.0]), Err(Error::ZeroVector(_))));
    }

    #[test]
    fn csls_single_candidate() {
        // one target y, two sources; K = 1
        let y = Matrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let sources = Matrix::from_column_slice(2, 2, &[0.6, 0.8, 0.0, 1.0]);
        let x = [1.0, 1.0];
        let s = csls(&x, &y, &sources, 1, None, None).unwrap();
        let cxy = std::f64::consts::FRAC_1_SQRT_2;
        // r_T(x) = cos(x, y); r_S(y) = max(0.6, 0.0)
        assert!((s[0] - (2.0 * cxy - cxy - 0.6)).abs() < 1e-15);
    }

    #[test]
    fn csls_k_bounds() {
        let m = Matrix::identity(2, 2);
        assert!(csls(&[1.0, 0.0], &m, &m, 3, None, None).is_err());
        assert!(csls(&[1.0, 0.0], &m, &m, 0, None, None).is_err());
    }

    #[test]
    fn precomputed_terms_agree() {
        let t = Matrix::from_fn(3, 5, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.5);
        let s = Matrix::from_fn(3, 4, |i, j| ((i * 2 + j * 5) % 7) as f64 - 2.5);
        let q = [0.3, -0.2, 0.9];
        let plain = csls(&q, &t, &s, 2, None, None).unwrap();
        let index = CslsIndex::new(&unit_columns(&t), &unit_columns(&s), 2).unwrap();
        let ti = TargetIndex::new((0..5).map(|i| i.to_string()).collect(), &t).unwrap();
        let cached = ti.scores(&q, Scoring::Csls(&index)).unwrap();
        for (a, b) in plain.iter().zip(&cached) {
            assert!((a - b).abs() < 1e-12);
        }
        let r_t = mean_of_top_k(&ti.scores(&q, Scoring::Cosine).unwrap(), 2);
        let with_r = csls(&q, &t, &s, 2, Some(r_t), Some(index.r_s())).unwrap();
        for (a, b) in plain.iter().zip(&with_r) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn knn_boundaries() {
        let words: Vec<String> = ["c", "a", "b"].iter().map(|s| s.to_string()).collect();
        let m = Matrix::from_column_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let ti = TargetIndex::new(words, &m).unwrap();
        let r = ti.top_k("q", &[1.0, 0.0], 5, Scoring::Cosine).unwrap();
        assert!(r.truncated);
        // "a" and "c" tie at 1.0: lexicographic
        let order: Vec<_> = r.neighbors.iter().map(|(w, _)| w.as_str()).collect();
        assert_eq!(order, ["a", "c", "b"]);
        assert!(ti.top_k("q", &[0.0, 0.0], 1, Scoring::Cosine).is_err());
        assert!(ti.top_k("q", &[1.0, 0.0], 0, Scoring::Cosine).is_err());
    }

    #[test]
    fn orthonormal_basis_hubness() {
        let d = 6;
        let basis = Matrix::identity(d, d);
        let ti = TargetIndex::new((0..d).map(|i| format!("w{i}")).collect(), &basis).unwrap();
        let h = hubness_report(&basis, &ti, 1, Scoring::Cosine).unwrap();
        assert!(h.counts.iter().all(|&c| c == 1));
        assert_eq!(h.skewness, 0.0);
    }

    #[test]
    fn json_line_shape() {
        let r = NeighborResult {
            query: "epistaxis".into(),
            metric: Metric::Csls,
            k: 1,
            neighbors: vec![("nosebleed".into(), 0.5)],
            truncated: false,
        };
        assert_eq!(
            r.to_json_line(),
            r#"{"metric":"csls","neighbors":[["nosebleed",0.5]],"query":"epistaxis"}"#
        );
    }
}
