//! Action quality assessment for long sports videos.
//!
//! Two feature streams per video — motion features of video segments
//! (dynamic, 1024-d) and posture features of the detected athlete in
//! sampled frames (static, 2048-d) — pass through identical but
//! unshared branches: a two-layer embedding, a graph-convolutional
//! context unit over an exponential-kernel instance graph, and an
//! attention unit that pools the fused local-context features into one
//! 512-d stream feature. The concatenated stream features regress a
//! score in (0, 1). Training is plain SGD with momentum, per-group
//! learning rates, and step decay; evaluation is Spearman's rank
//! correlation against judge scores.
//!
//! Everything runs on a small self-contained reverse-mode autodiff
//! engine over dense f64 matrices ([`autodiff`], [`tensor`]); no ML
//! framework is involved.

pub mod attention;
pub mod autodiff;
pub mod checkpoint;
pub mod data;
pub mod error;
pub mod metrics;
pub mod model;
pub mod reference;
pub mod rng;
pub mod synth;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
pub use tensor::Tensor2D;
