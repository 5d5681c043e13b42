//! Semi-implicit momentum step with pressure projection.
//!
//! Diffusion is backward Euler, advection and forcing are explicit, and the
//! result is projected onto discretely divergence-free fields. On periodic
//! grids both the Helmholtz solve and the projection are exact in Fourier
//! space. On box grids the velocity lives on interior nodes (walls are fixed
//! at zero), the Helmholtz solve is CG on the seven-point Laplacian, and the
//! projection uses the centered interior divergence together with its
//! negative adjoint as gradient, so the projected field has zero discrete
//! divergence up to the CG tolerance.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::bc::zero_wall_velocity;
use crate::grid::domain::DomainSpec;
use crate::grid::field::{ScalarField, VelocityField};
use crate::grid::ops::{convective, div_vec, grad_vec};
use crate::grid::spectral::Spectral;
use crate::grid::fd;
use crate::linsolve;
use crate::tensor::ModelParams;

/// Velocity floor in the advective CFL rule.
pub const CFL_VELOCITY_FLOOR: f64 = 1e-8;
pub const CFL_NUMBER: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidStepReport {
    /// Largest discrete divergence after projection.
    pub div_residual: f64,
    pub poisson_iters: usize,
    pub dt_used: f64,
}

/// Largest `|div u|`, over interior nodes on box grids.
pub fn divergence_residual(u: &VelocityField) -> f64 {
    let domain = *u.domain();
    let div = div_vec(u);
    div.data()
        .iter()
        .enumerate()
        .filter(|(i, _)| !domain.on_wall(*i))
        .fold(0.0_f64, |m, (_, v)| m.max(v.abs()))
}

/// `0.4 h / max(|u|_∞, 1e-8)`.
pub fn advective_dt_limit(u: &VelocityField) -> f64 {
    CFL_NUMBER * u.domain().h_min() / u.max_magnitude().max(CFL_VELOCITY_FLOOR)
}

pub(crate) fn check_dt(rule: &'static str, dt: f64, limit: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::domain(format!("time step must be positive, got {dt}")));
    }
    if dt > limit {
        return Err(Error::StepRejected { rule, dt, limit });
    }
    Ok(())
}

/// Output of a projection: `u = velocity + ∇potential`.
#[derive(Debug, Clone)]
pub struct Projection {
    pub velocity: VelocityField,
    /// Zero-mean scalar potential.
    pub potential: ScalarField,
    pub iterations: usize,
}

/// Splits `u` into its divergence-free part and a zero-mean potential.
pub fn leray_project(u: &VelocityField) -> Result<(VelocityField, ScalarField)> {
    let p = project(u)?;
    Ok((p.velocity, p.potential))
}

pub fn project(u: &VelocityField) -> Result<Projection> {
    if !u.is_finite() {
        return Err(Error::domain("cannot project a non-finite velocity"));
    }
    if u.domain().is_periodic() {
        Ok(spectral_solve(u, 0.0))
    } else {
        box_project(u.clone())
    }
}

/// Periodic `(I - coef Δ)⁻¹` followed by the Fourier projection.
fn spectral_solve(rhs: &VelocityField, coef: f64) -> Projection {
    let domain = *rhs.domain();
    let sp = Spectral::for_domain(&domain);
    let hats = sp.forward_many(&[rhs.comp(0), rhs.comp(1), rhs.comp(2)]);
    let [nx, ny, nz] = sp.shape();
    let n = domain.len();
    let mut out: [Vec<Complex64>; 3] = std::array::from_fn(|_| vec![Complex64::default(); n]);
    let mut phi = vec![Complex64::default(); n];
    let mut idx = 0;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let ke = [sp.k_even(0)[i], sp.k_even(1)[j], sp.k_even(2)[k]];
                let ko = [sp.k_odd(0)[i], sp.k_odd(1)[j], sp.k_odd(2)[k]];
                let damp = 1.0 / (1.0 + coef * Spectral::k2_even(ke));
                let v = [hats[0][idx] * damp, hats[1][idx] * damp, hats[2][idx] * damp];
                let ko2 = ko[0] * ko[0] + ko[1] * ko[1] + ko[2] * ko[2];
                if ko2 > 0.0 {
                    let kv = v[0] * ko[0] + v[1] * ko[1] + v[2] * ko[2];
                    for a in 0..3 {
                        out[a][idx] = v[a] - kv * (ko[a] / ko2);
                    }
                    phi[idx] = kv * Complex64::new(0.0, -1.0 / ko2);
                } else {
                    for a in 0..3 {
                        out[a][idx] = v[a];
                    }
                }
                idx += 1;
            }
        }
    }
    let [o0, o1, o2] = out;
    let mut reals = sp.inverse_many(vec![o0, o1, o2, phi]).into_iter();
    let comps = std::array::from_fn(|_| reals.next().unwrap());
    let velocity = VelocityField::from_components(domain, comps);
    let potential = ScalarField::from_data(domain, reals.next().unwrap());
    Projection {
        velocity,
        potential,
        iterations: 0,
    }
}

fn box_project(mut u: VelocityField) -> Result<Projection> {
    let domain = *u.domain();
    zero_wall_velocity(&mut u);
    let div = fd::div_interior([u.comp(0), u.comp(1), u.comp(2)], &domain);
    let floor = 1e-13 * u.max_abs() / domain.h_min();
    let (phi, outcome) = linsolve::projection_potential(&div, &domain, floor)?;
    let g = fd::grad_interior(&phi, &domain);
    for a in 0..3 {
        u.comp_mut(a).iter_mut().zip(&g[a]).for_each(|(v, gv)| *v -= gv);
    }
    let mut potential = ScalarField::from_data(domain, fill_walls(phi, &domain));
    potential.remove_mean();
    Ok(Projection {
        velocity: u,
        potential,
        iterations: outcome.iterations,
    })
}

/// Copies the nearest interior value onto wall nodes.
fn fill_walls(mut data: Vec<f64>, domain: &DomainSpec) -> Vec<f64> {
    let [sx, sy, sz] = domain.shape();
    for idx in 0..data.len() {
        if domain.on_wall(idx) {
            let [i, j, k] = domain.unindex(idx);
            let src = domain.index(i.clamp(1, sx - 2), j.clamp(1, sy - 2), k.clamp(1, sz - 2));
            data[idx] = data[src];
        }
    }
    data
}

/// One implicit-diffusion plus projection step with a given explicit
/// right-hand side: solves `(u' - u)/dt = ν Δu' + ∇p + rhs`, `div u' = 0`.
pub fn stokes_step(
    u: &VelocityField,
    explicit_rhs: &VelocityField,
    dt: f64,
    params: &ModelParams,
) -> Result<(VelocityField, ScalarField, FluidStepReport)> {
    check_dt("time step", dt, f64::INFINITY)?;
    let domain = *u.domain();
    let rhs = u.lincomb(1.0, dt, explicit_rhs)?;
    if !rhs.is_finite() {
        return Err(Error::domain("non-finite momentum right-hand side"));
    }
    let coef = params.nu * dt;
    let proj = if domain.is_periodic() {
        spectral_solve(&rhs, coef)
    } else {
        let mut star = VelocityField::zeros(domain);
        for a in 0..3 {
            let (x, _) = linsolve::helmholtz_dirichlet(rhs.comp(a), coef, &domain)?;
            star.comp_mut(a).copy_from_slice(&x);
        }
        box_project(star)?
    };
    let mut pressure = proj.potential;
    pressure.scale(-1.0 / dt);
    let report = FluidStepReport {
        div_residual: divergence_residual(&proj.velocity),
        poisson_iters: proj.iterations,
        dt_used: dt,
    };
    Ok((proj.velocity, pressure, report))
}

/// `-(u·∇)u + force`.
pub fn explicit_momentum_rhs(u: &VelocityField, force: &VelocityField) -> Result<VelocityField> {
    let adv = convective(u, &grad_vec(u))?;
    force.lincomb(1.0, -1.0, &adv)
}

/// Advances `∂_t u + (u·∇)u = ν Δu + ∇p + force`, `div u = 0` by one step.
pub fn momentum_step(
    u: &VelocityField,
    force: &VelocityField,
    dt: f64,
    params: &ModelParams,
) -> Result<(VelocityField, ScalarField, FluidStepReport)> {
    u.domain().same_grid(force.domain())?;
    check_dt("advective CFL", dt, advective_dt_limit(u))?;
    let rhs = explicit_momentum_rhs(u, force)?;
    stokes_step(u, &rhs, dt, params)
}

pub fn kinetic_energy(u: &VelocityField) -> f64 {
    let w = u.domain().weights();
    0.5 * (0..u.len()).map(|i| w[i] * u.magnitude_sq(i)).sum::<f64>()
}
