//! Learn word embeddings on two unpaired corpora, align the two spaces with a
//! linear map and evaluate the alignment by cross-space translation retrieval.
//!
//! The pipeline is split into independent stages that communicate through
//! plain data types and documented file formats:
//!
//! * [`corpus`] turns note text into tokenized, stemmed sentence streams.
//! * [`embeddings`] trains word- or subword-level skip-gram vectors.
//! * [`alignment`] fits an orthogonal map from identical-string anchors and
//!   refines it with CSLS mutual nearest neighbours.
//! * [`adversarial`] fits the map without anchors.
//! * [`metrics`] and [`evaluation`] score the result.
//! * [`synthetic`] plants rotated space pairs with known ground truth.

pub mod adversarial;
pub mod alignment;
pub mod corpus;
pub mod embeddings;
mod error;
pub mod evaluation;
pub mod linalg;
pub mod metrics;
pub mod profile;
pub mod synthetic;

pub use error::{Error, Result};
