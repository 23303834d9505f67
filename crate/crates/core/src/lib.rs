//! Prototype discovery for trajectory datasets.
//!
//! The pipeline normalizes each sample ([`normalize`]), aligns all of them
//! to one learned prototype through a regressed similarity transform
//! ([`align`]), clusters the aligned samples with regularized learning
//! vector quantization and prunes the result to a compact prototype set
//! ([`quantize`]). The number and support of the surviving prototypes
//! summarize how varied the dataset is ([`report`]).
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases below fix the scalar to `f64`, which is what the command-line
//! tool and the persistence format use.

pub mod align;
pub mod datagen;
pub mod error;
pub mod geometry;
pub mod ingest;
pub mod normalize;
pub mod persist;
pub mod quantize;
pub mod report;
pub mod scalar;
pub mod svg;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Point2 = geometry::Point2<f64>;
pub type Trajectory = geometry::Trajectory<f64>;
pub type Dataset = geometry::Dataset<f64>;
pub type SimilarityTransform = geometry::SimilarityTransform<f64>;
pub type NormalizedTrajectory = normalize::NormalizedTrajectory<f64>;
pub type AlignmentModel = align::AlignmentModel<f64>;
pub type RegressorParams = align::RegressorParams<f64>;
pub type PrototypeSet = quantize::PrototypeSet<f64>;
pub type QuantizationResult = quantize::QuantizationResult<f64>;
pub type RawTrack = ingest::RawTrack<f64>;

pub type Point2F32 = geometry::Point2<f32>;
pub type TrajectoryF32 = geometry::Trajectory<f32>;
pub type AlignmentModelF32 = align::AlignmentModel<f32>;
pub type PrototypeSetF32 = quantize::PrototypeSet<f32>;
