//! Finite element building blocks: bases, quadrature, numbering, sparse
//! storage and assembly.

pub mod assembly;
pub mod basis;
pub mod dirichlet;
pub mod dofmap;
pub mod field;
pub mod quadrature;
pub mod sparse;

pub use assembly::*;
pub use basis::{edge_basis, Degree, ReferenceBasis, MAX_NODES};
pub use dirichlet::{apply_dirichlet, DirichletElimination};
pub use dofmap::{DofMap, Field};
pub use field::{FeField, InterfacePoint, QuadPoint, TestFlux};
pub use quadrature::{EdgeRule, QuadratureRule};
pub use sparse::{SparseMatrix, Triplets};
