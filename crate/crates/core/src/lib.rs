//! Simulation of the incompressible flow of nematic liquid crystals in the
//! Landau–de Gennes Q-tensor description, with zero rotational coupling.
//!
//! The crate is organised bottom-up: [`tensor`] holds pointwise algebra,
//! [`grid`] discretisations and fields, [`fluid`] and [`qtensor`] the two
//! sub-steps, [`coupled`] the full step and the Picard scheme, and
//! [`diagnostics`] the observables.

pub mod coupled;
pub mod diagnostics;
pub mod error;
pub mod fluid;
pub mod grid;
pub mod linsolve;
pub mod qtensor;
pub mod runner;
pub mod state;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{BoundaryKind, DomainSpec, QTensorField, ScalarField, VelocityField};
pub use state::SimState;
pub use tensor::{ModelParams, QTensor};

// The guide under book/ is compiled as doc-tests so its snippets cannot rot.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/tensors.md")]
    mod tensors {}
    #[doc = include_str!("../../../book/src/grids.md")]
    mod grids {}
    #[doc = include_str!("../../../book/src/stepping.md")]
    mod stepping {}
    #[doc = include_str!("../../../book/src/picard.md")]
    mod picard {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/running.md")]
    mod running {}
}
