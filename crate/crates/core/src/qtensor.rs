//! Semi-implicit step of the Q-tensor equation
//! `(∂_t + u·∇) Q = Γ (L ΔQ + bulk(Q))`.
//!
//! Diffusion is backward Euler, advection and the bulk polynomial are
//! explicit. Each of the five stored components evolves by the same linear
//! operator, so the result stays symmetric and trace-free exactly.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fluid::{advective_dt_limit, check_dt, CFL_VELOCITY_FLOOR};
use crate::grid::field::{QTensorField, VelocityField};
use crate::grid::ops::grad_q;
use crate::grid::spectral::Spectral;
use crate::linsolve;
use crate::tensor::{bulk_molecular_field, ModelParams};

/// `-(u·∇)Q` from precomputed `∂_a Q`.
pub fn advection_from_grads(u: &VelocityField, grads: &[QTensorField; 3]) -> Result<QTensorField> {
    u.domain().same_grid(grads[0].domain())?;
    let mut out = QTensorField::zeros(*u.domain());
    for c in 0..5 {
        let dst = out.comp_mut(c);
        for (a, g) in grads.iter().enumerate() {
            let (ua, ga) = (u.comp(a), g.comp(c));
            for i in 0..dst.len() {
                dst[i] -= ua[i] * ga[i];
            }
        }
    }
    Ok(out)
}

/// `-(u·∇)Q`.
pub fn advect_q(q: &QTensorField, u: &VelocityField) -> Result<QTensorField> {
    q.domain().same_grid(u.domain())?;
    advection_from_grads(u, &grad_q(q))
}

/// Pointwise bulk molecular field of a whole Q field.
pub fn bulk_field(q: &QTensorField, params: &ModelParams) -> QTensorField {
    let mut out = QTensorField::zeros(*q.domain());
    for i in 0..q.len() {
        out.set_q(i, bulk_molecular_field(&q.q_at(i), params));
    }
    out
}

/// `0.2 / (Γ (|a| + |b| |Q|_∞ + c |Q|_∞²) + 1e-8)`.
pub fn bulk_dt_limit(q: &QTensorField, params: &ModelParams) -> f64 {
    let m = q.max_magnitude();
    0.2 / (params.gamma * (params.a.abs() + params.b.abs() * m + params.c * m * m)
        + CFL_VELOCITY_FLOOR)
}

/// Solves `(Q' - Q)/dt = Γ L ΔQ' + rhs` (Neumann walls on box grids).
pub fn parabolic_step(
    q: &QTensorField,
    explicit_rhs: &QTensorField,
    dt: f64,
    params: &ModelParams,
) -> Result<QTensorField> {
    check_dt("time step", dt, f64::INFINITY)?;
    let domain = *q.domain();
    let rhs = q.lincomb(1.0, dt, explicit_rhs)?;
    if !rhs.is_finite() {
        return Err(Error::domain("non-finite Q right-hand side"));
    }
    let coef = params.gamma * params.l * dt;
    if domain.is_periodic() {
        let sp = Spectral::for_domain(&domain);
        let refs: Vec<&[f64]> = rhs.comps().iter().map(|c| c.as_slice()).collect();
        let spectra = sp
            .forward_many(&refs)
            .iter()
            .map(|h| {
                sp.apply(h, |ke, _| {
                    Complex64::new(1.0 / (1.0 + coef * Spectral::k2_even(ke)), 0.0)
                })
            })
            .collect();
        let mut it = sp.inverse_many(spectra).into_iter();
        Ok(QTensorField::from_components(
            domain,
            std::array::from_fn(|_| it.next().unwrap()),
        ))
    } else {
        let mut out = QTensorField::zeros(domain);
        for c in 0..5 {
            let (x, _) = linsolve::helmholtz_neumann(rhs.comp(c), coef, &domain)?;
            out.comp_mut(c).copy_from_slice(&x);
        }
        Ok(out)
    }
}

/// Full Q right-hand side `-(u·∇)Q + Γ bulk(Q)` from precomputed gradients.
pub fn explicit_q_rhs(
    q: &QTensorField,
    u: &VelocityField,
    grads: &[QTensorField; 3],
    params: &ModelParams,
) -> Result<QTensorField> {
    let mut rhs = advection_from_grads(u, grads)?;
    rhs.axpy(params.gamma, &bulk_field(q, params))?;
    Ok(rhs)
}

pub(crate) fn check_q_dt(q: &QTensorField, u: &VelocityField, dt: f64, params: &ModelParams) -> Result<()> {
    check_dt("advective CFL", dt, advective_dt_limit(u))?;
    check_dt("bulk source", dt, bulk_dt_limit(q, params))
}

/// Advances Q by one step with the velocity `u` held fixed.
pub fn q_step(q: &QTensorField, u: &VelocityField, dt: f64, params: &ModelParams) -> Result<QTensorField> {
    q.domain().same_grid(u.domain())?;
    check_q_dt(q, u, dt, params)?;
    let rhs = explicit_q_rhs(q, u, &grad_q(q), params)?;
    parabolic_step(q, &rhs, dt, params)
}
