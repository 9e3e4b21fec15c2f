//! Node-differentially-private estimation for random-graph models.
//!
//! Numeric code is generic over [`Scalar`], which covers `f32`, `f64` and
//! exact rationals; the aliases below fix the common choices.

mod error;
pub mod block;
pub mod density;
pub mod experiment;
pub mod graph;
pub mod graphon;
pub mod mech;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use graph::{LabeledGraph, VertexSet};
pub use scalar::Scalar;

/// Exact rational arithmetic.
pub type Rational = num_rational::BigRational;

pub type BlockMatrixF64 = graphon::BlockMatrix<f64>;
pub type ExactBlockMatrix = graphon::BlockMatrix<Rational>;
pub type StepGraphonF64 = graphon::StepGraphon<f64>;
