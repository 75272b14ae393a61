//! Browser demo: three small alignment experiments that run entirely in the
//! page. Each export takes plain numbers and returns a JSON string the page
//! draws on a canvas.
//!
//! The `*_json` functions are ordinary Rust and are what the tests call; the
//! `#[wasm_bindgen]` wrappers only convert errors into JS exceptions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use wasm_bindgen::prelude::*;

use termalign::alignment::{
    extract_anchors, iterative_procrustes, procrustes, NormalizePolicy, PreparedSpace, Translator,
};
use termalign::evaluation::precision_at_k;
use termalign::linalg::Matrix;
use termalign::metrics::{hubness_report, CslsIndex, Metric, Scoring, TargetIndex};
use termalign::synthetic::{make_rotation_pair, random_space};

const MAX_WORDS: usize = 5_000;
const MAX_DIM: usize = 100;

fn check(n: usize, d: usize) -> Result<(), String> {
    if n > MAX_WORDS || d > MAX_DIM {
        return Err(format!("demo limits: at most {MAX_WORDS} words and {MAX_DIM} dimensions"));
    }
    Ok(())
}

#[derive(Serialize)]
struct Recovery {
    anchors: usize,
    held_out: usize,
    p_at_1: f64,
    p_at_5: f64,
    distance_to_truth: f64,
    orthogonality_error: f64,
    /// Residual after each Procrustes solve.
    residuals: Vec<f64>,
    dictionary_sizes: Vec<usize>,
}

/// Plant a rotation, seed Procrustes with the identical-string anchors,
/// refine, and score the held-out words.
pub fn rotation_recovery_json(
    n_words: usize,
    dim: usize,
    noise: f64,
    anchor_fraction: f64,
    refine_iters: usize,
    seed: u64,
) -> Result<String, String> {
    check(n_words, dim)?;
    let pair = make_rotation_pair(n_words, dim, noise, anchor_fraction, seed).map_err(|e| e.to_string())?;
    let src = PreparedSpace::new(&pair.src, NormalizePolicy::Unit);
    let tgt = PreparedSpace::new(&pair.tgt, NormalizePolicy::Unit);
    let anchors = extract_anchors(&pair.src, &pair.tgt, None);
    let w = iterative_procrustes(&src, &tgt, &anchors, refine_iters.max(1), n_words, 10).map_err(|e| e.to_string())?;
    let translator = Translator::new(&w, &src, &tgt, Metric::Csls, 10, n_words).map_err(|e| e.to_string())?;
    let held_out = pair.held_out_gold();
    let report = precision_at_k(&translator, &held_out, &[1, 5], serde_json::Value::Null).map_err(|e| e.to_string())?;
    let out = Recovery {
        anchors: anchors.len(),
        held_out: held_out.len(),
        p_at_1: report.precision_at[&1],
        p_at_5: report.precision_at[&5],
        distance_to_truth: (&w.w - &pair.true_map).norm(),
        orthogonality_error: w.orthogonality_error(),
        residuals: w.history.iter().map(|h| h.residual).collect(),
        dictionary_sizes: w.history.iter().map(|h| h.dictionary_size).collect(),
    };
    Ok(serde_json::to_string(&out).expect("json"))
}

#[derive(Serialize)]
struct Plane {
    source: Vec<[f64; 2]>,
    target: Vec<[f64; 2]>,
    mapped: Vec<[f64; 2]>,
    /// Recovered rotation angle in degrees (of the rotation part when `W`
    /// is a reflection).
    angle: f64,
    reflection: bool,
    residual: f64,
}

fn points(m: &Matrix) -> Vec<[f64; 2]> {
    m.column_iter().map(|c| [c[0], c[1]]).collect()
}

/// A 2-D cloud, its image under a rotation by `angle_deg` (optionally
/// composed with a reflection) plus Gaussian noise, and the Procrustes fit.
pub fn procrustes_2d_json(n: usize, angle_deg: f64, noise: f64, reflect: bool, seed: u64) -> Result<String, String> {
    if !(2..=MAX_WORDS).contains(&n) {
        return Err(format!("need between 2 and {MAX_WORDS} points"));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err("noise must be finite and non-negative".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("valid");
    let x = Matrix::from_fn(2, n, |_, _| unit.sample(&mut rng));
    let (s, c) = angle_deg.to_radians().sin_cos();
    let mut q = Matrix::from_row_slice(2, 2, &[c, -s, s, c]);
    if reflect {
        q.column_mut(1).neg_mut();
    }
    let jitter = Normal::new(0.0, noise.max(f64::MIN_POSITIVE)).expect("valid");
    let y = &q * &x + Matrix::from_fn(2, n, |_, _| if noise > 0.0 { jitter.sample(&mut rng) } else { 0.0 });
    let w = procrustes(&x, &y).map_err(|e| e.to_string())?;
    let reflection = w.w.determinant() < 0.0;
    let out = Plane {
        source: points(&x),
        target: points(&y),
        mapped: points(&(&w.w * &x)),
        angle: w.w[(1, 0)].atan2(w.w[(0, 0)]).to_degrees(),
        reflection,
        residual: w.residual,
    };
    Ok(serde_json::to_string(&out).expect("json"))
}

#[derive(Serialize)]
struct Hubness {
    k: usize,
    cosine_max: usize,
    csls_max: usize,
    cosine_never_retrieved: usize,
    csls_never_retrieved: usize,
    cosine_skewness: f64,
    csls_skewness: f64,
    /// Histogram of k-occurrence counts, index = count.
    cosine_histogram: Vec<usize>,
    csls_histogram: Vec<usize>,
}

fn histogram(counts: &[usize]) -> Vec<usize> {
    let mut h = vec![0; counts.iter().copied().max().unwrap_or(0) + 1];
    for &c in counts {
        h[c] += 1;
    }
    h
}

/// How unevenly targets show up in the top-k lists of unrelated queries,
/// under plain cosine and under CSLS.
pub fn hubness_json(n_words: usize, dim: usize, k: usize, seed: u64) -> Result<String, String> {
    check(n_words, dim)?;
    if k == 0 || k > n_words {
        return Err("k must be between 1 and the number of words".into());
    }
    let queries = random_space(n_words, dim, "q", seed).map_err(|e| e.to_string())?;
    let targets = random_space(n_words, dim, "t", seed.wrapping_add(1)).map_err(|e| e.to_string())?;
    let index = TargetIndex::from_space(&targets);
    let q = queries.word_rows();
    let csls_index = CslsIndex::new(index.unit_vectors(), q, 10.min(n_words)).map_err(|e| e.to_string())?;
    let cos = hubness_report(q, &index, k, Scoring::Cosine).map_err(|e| e.to_string())?;
    let csls = hubness_report(q, &index, k, Scoring::Csls(&csls_index)).map_err(|e| e.to_string())?;
    let never = |c: &[usize]| c.iter().filter(|&&x| x == 0).count();
    let out = Hubness {
        k,
        cosine_max: cos.max,
        csls_max: csls.max,
        cosine_never_retrieved: never(&cos.counts),
        csls_never_retrieved: never(&csls.counts),
        cosine_skewness: cos.skewness,
        csls_skewness: csls.skewness,
        cosine_histogram: histogram(&cos.counts),
        csls_histogram: histogram(&csls.counts),
    };
    Ok(serde_json::to_string(&out).expect("json"))
}

#[wasm_bindgen]
pub fn rotation_recovery(
    n_words: usize,
    dim: usize,
    noise: f64,
    anchor_fraction: f64,
    refine_iters: usize,
    seed: u32,
) -> Result<String, JsError> {
    rotation_recovery_json(n_words, dim, noise, anchor_fraction, refine_iters, seed.into()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn procrustes_2d(n: usize, angle_deg: f64, noise: f64, reflect: bool, seed: u32) -> Result<String, JsError> {
    procrustes_2d_json(n, angle_deg, noise, reflect, seed.into()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn hubness(n_words: usize, dim: usize, k: usize, seed: u32) -> Result<String, JsError> {
    hubness_json(n_words, dim, k, seed.into()).map_err(|e| JsError::new(&e))
}
