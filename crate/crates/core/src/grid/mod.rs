//! Structured grids, field containers, discrete operators, norms, boundary
//! conditions and snapshot I/O.

pub mod bc;
pub mod domain;
pub mod fd;
pub mod field;
pub mod norms;
pub mod ops;
pub mod snapshot;
pub mod spectral;

pub use bc::apply_bcs;
pub use domain::{BoundaryKind, DomainSpec};
pub use field::{
    mat_slot, Field, MatrixField, QTensorField, ScalarField, VectorField, VelocityField,
};
pub use norms::{derivative_norm, lp_norm, sobolev_monitor};
pub use ops::{div_mat, div_vec, grad, grad_q, grad_vec, laplacian, partial};
