//! Meshes, P1 assembly, banded solves and the cosine eigenbasis.

mod assembly;
mod banded;
mod mesh;
mod spectral;

pub use assembly::{
    assemble_elasticity, assemble_scalar, body_load, boundary_weights, cell_strain,
    consistent_mass, divergence_load, elasticity_matrix, internal_force, lumped_mass,
    nodal_divergence, robin_load, robin_matrix, stiffness, ElasticForms, ScalarForms,
};
pub use banded::{BandLu, BandMatrix};
pub use mesh::{build_mesh, BoundaryFacet, Mesh};
pub use spectral::SpectralBasis1D;
