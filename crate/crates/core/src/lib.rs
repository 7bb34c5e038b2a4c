//! Network usable information scoring for attributed graphs, plus the
//! linear link-prediction and node-classification models it predicts.

pub mod act;
pub mod compat;
pub mod embed;
pub mod error;
pub mod graph;
pub mod io;
pub mod kmeans;
pub mod linalg;
pub mod lsqr;
pub mod rng;
pub mod scaling;
pub mod score;
pub mod sparse;
pub mod synth;

pub use compat::{CoefficientMask, CompatKind, CompatMatrix, EdgeSample};
pub use embed::{Component, EmbedConfig, EmbeddingSet};
pub use error::{Error, Result};
pub use graph::{Edge, EdgeSplit, NodeSplit, SparseGraph};
pub use score::{JointCounts, ScoreReport};
