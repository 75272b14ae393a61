//! The reference configuration for the clinical professional → consumer
//! experiment, and the scores it reached on MIMIC-III discharge summaries.
//!
//! The notes require credentialed access, so these numbers are not checked in
//! CI. `termalign pipeline` runs the whole configuration in one command for
//! anyone who has the data.

use serde::{Deserialize, Serialize};

use crate::alignment::{NormalizePolicy, DEFAULT_REFINE_ITERATIONS, DEFAULT_VOCAB_CAP};
use crate::embeddings::{Mode, TrainConfig};
use crate::metrics::{Metric, DEFAULT_CSLS_K};

/// Sections pooled into the professional corpus.
pub const PROFESSIONAL_SECTIONS: [&str; 2] = ["History of present illness", "Brief hospital course"];
/// Sections pooled into the consumer corpus.
pub const CONSUMER_SECTIONS: [&str; 2] = ["Discharge instruction", "Followup instruction"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceProfile {
    pub name: String,
    pub professional_sections: Vec<String>,
    pub consumer_sections: Vec<String>,
    pub train: TrainConfig,
    pub normalize: NormalizePolicy,
    pub refine_iterations: usize,
    pub vocab_cap: usize,
    pub metric: Metric,
    pub csls_k: usize,
    pub ks: Vec<usize>,
    /// Reported precision at 1, 5 and 10.
    pub expected: [f64; 3],
}

/// Subword skip-gram, window 3 on both sides, 200 dimensions, 20 epochs at a
/// fixed learning rate of 0.05, identical-string anchors refined by CSLS.
pub fn mimic_subword_window3() -> ReferenceProfile {
    ReferenceProfile {
        name: "mimic-subword-w3".into(),
        professional_sections: PROFESSIONAL_SECTIONS.iter().map(|s| s.to_string()).collect(),
        consumer_sections: CONSUMER_SECTIONS.iter().map(|s| s.to_string()).collect(),
        train: TrainConfig {
            mode: Mode::Subword,
            window: 3,
            dim: 200,
            epochs: 20,
            learning_rate: 0.05,
            ..TrainConfig::default()
        },
        normalize: NormalizePolicy::Unit,
        refine_iterations: DEFAULT_REFINE_ITERATIONS,
        vocab_cap: DEFAULT_VOCAB_CAP,
        metric: Metric::Csls,
        csls_k: DEFAULT_CSLS_K,
        ks: vec![1, 5, 10],
        expected: [0.27, 0.57, 0.78],
    }
}
