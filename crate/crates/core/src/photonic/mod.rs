//! Complex transfer-matrix model of MZI meshes.

mod matrix;
mod mesh;
mod mzi;

pub use matrix::ComplexMatrix;
pub use mesh::{build_mesh, mesh_transfer_matrix, propagate, pyramid_mzi_count, IntensityVector, MeshLayout, MziSlot};
pub use mzi::{ideal_mzi_sine_cosine, mzi_unitary, CouplerPair, MziSettings};
