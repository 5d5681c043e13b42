use crate::error::Result;
use crate::grid::{DomainSpec, QTensorField, ScalarField, VelocityField};

/// The discrete solution `(u, Q, p)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub u: VelocityField,
    pub q: QTensorField,
    pub p: ScalarField,
    pub t: f64,
}

impl SimState {
    /// The quiescent isotropic state.
    pub fn zero(domain: DomainSpec) -> Self {
        SimState {
            u: VelocityField::zeros(domain),
            q: QTensorField::zeros(domain),
            p: ScalarField::zeros(domain),
            t: 0.0,
        }
    }

    pub fn new(u: VelocityField, q: QTensorField, t: f64) -> Result<Self> {
        u.domain().same_grid(q.domain())?;
        let p = ScalarField::zeros(*u.domain());
        Ok(SimState { u, q, p, t })
    }

    pub fn domain(&self) -> &DomainSpec {
        self.u.domain()
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.q.is_finite() && self.p.is_finite()
    }
}
