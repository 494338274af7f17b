//! JSON cache format for spectral spaces. Distances are not stored; the
//! backend is rebuilt from the embedded description without re-solving.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mesh::MeshOperators;
use super::model::ModelSpace;
use super::{Backend, Mesh, ModelKind, SpectralSpace};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// How to rebuild the sampling backend of an exported space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "snake_case")]
pub enum SpaceSource {
    Model { model: ModelKind, samples: usize },
    Mesh { mesh: Mesh },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceDocument {
    pub schema_version: u32,
    pub id: String,
    pub dim: usize,
    pub source: SpaceSource,
    pub masses: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    /// Row-major `(L+1) x P`.
    pub eigenfunctions: Vec<f64>,
    /// Row-major `(L+1) x P x m`.
    pub gradients: Vec<f64>,
    /// Row-major `P x m x ambient`.
    pub frame: Vec<f64>,
    #[serde(default)]
    pub solver_iterations: usize,
    #[serde(default)]
    pub solver_residual: f64,
}

impl SpectralSpace {
    pub fn to_document(&self) -> SpaceDocument {
        let source = match &self.backend {
            Backend::Model(m) => SpaceSource::Model {
                model: m.kind.clone(),
                samples: self.sample_count(),
            },
            Backend::Mesh { mesh, .. } => SpaceSource::Mesh { mesh: mesh.clone() },
        };
        SpaceDocument {
            schema_version: SCHEMA_VERSION,
            id: self.id.clone(),
            dim: self.dim,
            source,
            masses: self.mass.clone(),
            eigenvalues: self.eigenvalues.clone(),
            eigenfunctions: self.phi.clone(),
            gradients: self.grad.clone(),
            frame: (0..self.sample_count()).flat_map(|p| self.frame(p)).collect(),
            solver_iterations: self.solver_iterations,
            solver_residual: self.solver_residual,
        }
    }

    pub fn from_document(doc: SpaceDocument) -> Result<Self> {
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        let p = doc.masses.len();
        let count = doc.eigenvalues.len();
        if count < 2 || doc.eigenfunctions.len() != count * p || doc.gradients.len() != count * p * doc.dim {
            return Err(Error::Parse("array lengths do not match masses and eigenvalues".into()));
        }
        match doc.source {
            SpaceSource::Model { model, samples } => {
                if model.intrinsic_dim() != doc.dim {
                    return Err(Error::Parse("dim does not match the model kind".into()));
                }
                let ms = ModelSpace::new(model.clone(), samples, count - 1)?;
                if ms.sample_count() != p {
                    return Err(Error::Parse("sample count does not match the model grid".into()));
                }
                let coords = (0..p).map(|q| ms.sample(q).0).collect();
                Ok(SpectralSpace {
                    id: doc.id,
                    dim: doc.dim,
                    spacing: ms.spacing(),
                    diameter: model.diameter(),
                    total_measure: doc.masses.iter().sum(),
                    backend: Backend::Model(ms),
                    mass: doc.masses,
                    coords,
                    eigenvalues: doc.eigenvalues,
                    phi: doc.eigenfunctions,
                    grad: doc.gradients,
                    solver_iterations: doc.solver_iterations,
                    solver_residual: doc.solver_residual,
                })
            }
            SpaceSource::Mesh { mesh } => {
                mesh.validate()?;
                if mesh.vertex_count() != p || doc.dim != 2 {
                    return Err(Error::Parse("mesh does not match the stored arrays".into()));
                }
                let ops = MeshOperators::assemble(&mesh);
                let mut space = SpectralSpace::from_mesh_parts(
                    mesh,
                    ops,
                    doc.id,
                    doc.eigenvalues,
                    doc.eigenfunctions,
                    doc.gradients,
                    doc.solver_iterations,
                    doc.solver_residual,
                );
                space.mass = doc.masses;
                Ok(space)
            }
        }
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string(&self.to_document())?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_document(serde_json::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{build_from_mesh, build_model_space};
    use super::*;

    #[test]
    fn model_round_trip() {
        let s = build_model_space(ModelKind::interval(), 65, 10).unwrap();
        let text = serde_json::to_string(&s.to_document()).unwrap();
        let back = SpectralSpace::from_document(serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.eigenvalues(), s.eigenvalues());
        assert_eq!(back.eigenfunction(4), s.eigenfunction(4));
        assert_eq!(back.distance(3, 50), s.distance(3, 50));
    }

    #[test]
    fn mesh_round_trip() {
        let s = build_from_mesh(Mesh::icosphere(1), 5).unwrap();
        let doc = s.to_document();
        assert_eq!(doc.frame.len(), 42 * 2 * 3);
        let back = SpectralSpace::from_document(doc).unwrap();
        assert_eq!(back.eigengradient(2, 7), s.eigengradient(2, 7));
        assert_eq!(back.distance(0, 41), s.distance(0, 41));
    }

    #[test]
    fn rejects_wrong_schema() {
        let s = build_model_space(ModelKind::circle(), 32, 4).unwrap();
        let mut doc = s.to_document();
        doc.schema_version = 99;
        assert!(SpectralSpace::from_document(doc).is_err());
    }
}
