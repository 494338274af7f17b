//! Heat-kernel embeddings, pull-back metrics and map energies on discretized
//! metric-measure spaces.

pub mod embed;
pub mod error;
pub mod experiment;
pub mod harmonic;
pub mod ks;
pub mod linalg;
pub mod maps;
pub mod space;
pub mod tensor;

pub use error::{Error, Result};
pub use space::{build_from_mesh, build_model_space, Ball, Mesh, ModelKind, SpectralSpace};
