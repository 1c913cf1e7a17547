//! Complex matrix algebra and quantum-state primitives shared by the rest of
//! the crate: density matrices, Bloch vectors, affine maps, entropies and
//! trace norms.

pub mod cmatrix;
pub mod eigen;
mod ops;

pub use cmatrix::{c, ci, cone, czero, CMatrix};
pub use eigen::{eigh, eigvalsh, EigenDecomposition};
pub use ops::{
    bell_state, bloch_to_density, density_to_bloch, mutual_information, partial_trace,
    trace_distance, trace_norm, von_neumann_entropy, AffineMap, BlochVector, DensityMatrix, Keep,
};
