//! Two-stage feature selection and voting classification for
//! high-dimensional, low-sample gene-expression data.
//!
//! Stage one runs five filter scorers and a forest-driven recursive feature
//! eliminator; their selections are pooled and a binary particle swarm
//! searches the pool for a compact, accurate subset. A hard or weighted vote
//! over boosted trees, a random forest and logistic regression classifies on
//! the chosen genes.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the common double-precision case.

pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod filters;
pub mod learners;
pub mod pipeline;
pub mod pool;
pub mod pso;
pub mod rfe;
pub mod scalar;
pub mod seed;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Dataset64 = dataset::Dataset<f64>;
pub type Dataset32 = dataset::Dataset<f32>;
pub type PipelineResult = pipeline::PipelineResult;
pub type FittedPipeline64 = pipeline::FittedPipeline<f64>;
pub type VotingEnsemble64 = learners::VotingEnsemble<f64>;
pub type FilterReport64 = filters::FilterReport<f64>;
