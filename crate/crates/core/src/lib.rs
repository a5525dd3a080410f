//! Analytics engine for AR task-guidance session recordings.
//!
//! Sessions bundle procedure/error/phase interval tracks, classified
//! cognitive-workload states and IMU/gaze sensor series on a shared
//! seconds-from-start timeline. On top of that this crate provides:
//!
//! - [`ingest`]: bundle parsing, validation and data-quality reports
//! - [`embed`]: shapelet transform of session streams and a 2D PCA projection
//! - [`analytics`]: state proportions, error contribution and partial correlations
//! - [`query`]: timeline assembly, brushing and decimated sensor slices
//! - [`synthgen`]: seeded synthetic datasets with planted effects
//!
//! Numeric kernels are generic over [`Scalar`] (`f32`/`f64`); the session
//! model itself is `f64` seconds.

pub mod analytics;
pub mod embed;
pub mod error;
pub mod ingest;
pub mod model;
pub mod query;
pub mod scalar;
pub mod stats;
pub mod synthgen;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Seconds from session start.
pub type Seconds = f64;

pub type Shapelet64 = embed::Shapelet<f64>;
pub type Shapelet32 = embed::Shapelet<f32>;
pub type FeatureChannelSet64 = embed::FeatureChannelSet<f64>;
pub type FeatureChannelSet32 = embed::FeatureChannelSet<f32>;
pub type Embedding2D64 = embed::Embedding2D<f64>;
pub type Embedding2D32 = embed::Embedding2D<f32>;
