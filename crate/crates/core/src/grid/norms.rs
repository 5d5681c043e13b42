use crate::error::{Error, Result};
use crate::grid::field::{Field, QTensorField, VelocityField};
use crate::grid::ops::{multi_indices, partials};
use crate::tensor::ModelParams;

/// Discrete `L^p` norm `(Σ |f|^p w)^{1/p}` with quadrature weights `w`;
/// `p = f64::INFINITY` gives the largest pointwise magnitude.
pub fn lp_norm<const C: usize>(f: &Field<C>, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::domain(format!("norm exponent must be >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(f.max_magnitude());
    }
    let w = f.domain().weights();
    let half_p = 0.5 * p;
    // Scale out the maximum so large exponents cannot overflow.
    let max = f.max_magnitude();
    if max == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = (0..f.len())
        .map(|i| w[i] * (f.magnitude_sq(i) / (max * max)).powf(half_p))
        .sum();
    Ok(max * sum.powf(1.0 / p))
}

/// `L^p` norm of the full order-`s` derivative tensor `∇^s f`, whose pointwise
/// magnitude sums every ordered index tuple.
pub fn derivative_norm<const C: usize>(f: &Field<C>, s: u8, p: f64) -> Result<f64> {
    if s == 0 {
        return lp_norm(f, p);
    }
    let idx = multi_indices(s);
    let orders: Vec<[u8; 3]> = idx.iter().map(|(o, _)| *o).collect();
    let derivs = partials(f, &orders);
    let mut mag: Field<1> = Field::zeros(*f.domain());
    let data = mag.comp_mut(0);
    for (d, (_, mult)) in derivs.iter().zip(&idx) {
        for (i, m) in data.iter_mut().enumerate() {
            *m += mult * d.magnitude_sq(i);
        }
    }
    data.iter_mut().for_each(|v| *v = v.sqrt());
    lp_norm(&mag, p)
}

/// Integer-order Sobolev surrogate for the global-existence monitor:
/// `Σ_{s≤2} ‖∇^s u‖_{L^q} + Σ_{s≤3} ‖∇^s Q‖_{L^r}` with `q = q_exp`, `r = r_exp`.
pub fn sobolev_monitor(u: &VelocityField, q: &QTensorField, params: &ModelParams) -> Result<f64> {
    u.domain().same_grid(q.domain())?;
    let mut total = 0.0;
    for s in 0..=2 {
        total += derivative_norm(u, s, params.q_exp)?;
    }
    for s in 0..=3 {
        total += derivative_norm(q, s, params.r_exp)?;
    }
    Ok(total)
}
