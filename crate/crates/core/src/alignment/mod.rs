//! Linear maps between two embedding spaces.
//!
//! A source space is mapped onto a target space by an orthogonal `W`
//! minimising `‖WX − Y‖_F` over anchor pairs (columns of `X` and `Y`). Anchors
//! start as identical strings present in both vocabularies and are refined by
//! re-inducing the dictionary from CSLS mutual nearest neighbours.

mod anchors;
mod files;
mod procrustes;
mod refine;
mod translate;

use serde::{Deserialize, Serialize};

pub use anchors::{extract_anchors, AnchorDictionary, Provenance};
pub use files::{load_alignment, save_alignment, save_alignment_binary, AlignmentFile};
pub use procrustes::{align_with_anchors, procrustes};
pub use refine::{build_dictionary_csls, iterative_procrustes, DEFAULT_REFINE_ITERATIONS, DEFAULT_VOCAB_CAP};
pub use translate::Translator;

use crate::embeddings::EmbeddingSpace;
use crate::linalg::{column_mean, normalize_columns, orthogonality_error, Matrix, Vector};
use crate::{Error, Result};

/// Tolerance on ‖WᵀW − I‖_F for a map to count as orthogonal.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-6;

/// Vector normalisation applied to both spaces before alignment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizePolicy {
    Raw,
    #[default]
    Unit,
    /// Subtract the space mean, then scale to unit length.
    CenterUnit,
}

impl std::str::FromStr for NormalizePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(NormalizePolicy::Raw),
            "unit" => Ok(NormalizePolicy::Unit),
            "center-unit" => Ok(NormalizePolicy::CenterUnit),
            _ => Err(Error::Config(format!("unknown normalization {s:?} (raw|unit|center-unit)"))),
        }
    }
}

impl std::fmt::Display for NormalizePolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NormalizePolicy::Raw => "raw",
            NormalizePolicy::Unit => "unit",
            NormalizePolicy::CenterUnit => "center-unit",
        })
    }
}

/// An embedding space with its vocabulary vectors normalised once.
#[derive(Clone, Debug)]
pub struct PreparedSpace<'a> {
    space: &'a EmbeddingSpace,
    policy: NormalizePolicy,
    mean: Option<Vector>,
    matrix: Matrix,
}

impl<'a> PreparedSpace<'a> {
    pub fn new(space: &'a EmbeddingSpace, policy: NormalizePolicy) -> Self {
        let mut matrix = space.composed_vectors();
        let mean = match policy {
            NormalizePolicy::Raw => None,
            NormalizePolicy::Unit => {
                normalize_columns(&mut matrix);
                None
            }
            NormalizePolicy::CenterUnit => {
                let mean = column_mean(&matrix);
                for mut col in matrix.column_iter_mut() {
                    col -= &mean;
                }
                normalize_columns(&mut matrix);
                Some(mean)
            }
        };
        PreparedSpace {
            space,
            policy,
            mean,
            matrix,
        }
    }

    pub fn space(&self) -> &'a EmbeddingSpace {
        self.space
    }

    pub fn policy(&self) -> NormalizePolicy {
        self.policy
    }

    /// Normalised vocabulary vectors, `d × n`.
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn len(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.ncols() == 0
    }

    pub fn words(&self) -> &'a [String] {
        self.space.vocab().words()
    }

    /// Normalise an arbitrary vector the way vocabulary vectors were.
    pub fn normalize(&self, v: &Vector) -> Vector {
        let mut v = match &self.mean {
            Some(m) => v - m,
            None => v.clone(),
        };
        if self.policy != NormalizePolicy::Raw {
            let n = v.norm();
            if n > 0.0 {
                v /= n;
            }
        }
        v
    }

    /// Normalised vector of any resolvable word (OOV words resolve in
    /// subword spaces).
    pub fn vector(&self, word: &str) -> Option<Vector> {
        match self.space.vocab().get(word) {
            Some(i) => Some(self.matrix.column(i).into_owned()),
            None => self.space.word_vector(word).map(|wv| self.normalize(&wv.vector)),
        }
    }

    /// First `cap` columns (the most frequent words).
    pub fn head(&self, cap: usize) -> nalgebra::DMatrixView<'_, f64> {
        let n = cap.min(self.len());
        self.matrix.columns(0, n)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlignStatus {
    #[default]
    Ok,
    /// Refinement stopped because the dictionary reached a fixed point.
    Converged,
    /// A later stage failed (e.g. the induced dictionary collapsed); `w` is
    /// the last valid map.
    Degraded,
    /// Adversarial map whose refinement could not start.
    Unrefined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub dictionary_size: usize,
    pub residual: f64,
}

/// A `d × d` map with diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignmentMatrix {
    pub w: Matrix,
    /// ‖WᵀW − I‖_F ≤ [`ORTHOGONALITY_TOLERANCE`].
    pub orthogonal: bool,
    /// ‖WX − Y‖_F on the anchors it was fitted to (0 when not fitted).
    pub residual: f64,
    pub iterations_used: usize,
    /// The fitted optimum is not unique (singular `YXᵀ`).
    pub ambiguous: bool,
    pub status: AlignStatus,
    pub history: Vec<IterationRecord>,
}

impl AlignmentMatrix {
    pub fn from_matrix(w: Matrix) -> Result<Self> {
        if !w.is_square() || w.nrows() == 0 {
            return Err(Error::InvalidInput(format!(
                "alignment must be square and non-empty, got {}x{}",
                w.nrows(),
                w.ncols()
            )));
        }
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical("non-finite alignment entry".into()));
        }
        let orthogonal = orthogonality_error(&w) <= ORTHOGONALITY_TOLERANCE;
        Ok(AlignmentMatrix {
            w,
            orthogonal,
            residual: 0.0,
            iterations_used: 0,
            ambiguous: false,
            status: AlignStatus::Ok,
            history: Vec::new(),
        })
    }

    pub fn identity(d: usize) -> Self {
        Self::from_matrix(Matrix::identity(d, d)).expect("identity is valid")
    }

    pub fn dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn orthogonality_error(&self) -> f64 {
        orthogonality_error(&self.w)
    }

    /// Map every column of `m`.
    pub fn apply(&self, m: &Matrix) -> Matrix {
        &self.w * m
    }
}
