//! Coupled flow/Q-tensor evolution and the iterative approximation scheme.
//!
//! A direct step advances `(u, Q)` by first-order splitting: the momentum
//! equation is driven by the elastic stresses of `Qⁿ`, and `Q` is advanced
//! with the pre-step velocity `uⁿ`. The Picard scheme freezes the whole
//! right-hand side at the previous iterate over a time window and solves the
//! linear Stokes and parabolic problems on that window; its fixed point is
//! exactly the direct-step trajectory.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{record, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::fluid::{advective_dt_limit, explicit_momentum_rhs, stokes_step};
use crate::grid::field::{mat_slot, MatrixField, QTensorField, VelocityField};
use crate::grid::norms::{lp_norm, sobolev_monitor};
use crate::grid::ops::{div_mat, grad_q, laplacian};
use crate::qtensor::{bulk_dt_limit, check_q_dt, explicit_q_rhs, parabolic_step};
use crate::state::SimState;
use crate::tensor::{commutator_stress, ModelParams};

pub const MAX_PICARD_WINDOW_STEPS: usize = 256;

/// Elastic stress `T = -L ∇Q⊙∇Q + L (QΔQ - ΔQQ)` from precomputed derivatives.
pub fn elastic_stress(
    q: &QTensorField,
    grads: &[QTensorField; 3],
    lap: &QTensorField,
    params: &ModelParams,
) -> MatrixField {
    let mut t = MatrixField::zeros(*q.domain());
    for i in 0..q.len() {
        let g = [grads[0].q_at(i), grads[1].q_at(i), grads[2].q_at(i)];
        let sigma = commutator_stress(&q.q_at(i), &lap.q_at(i));
        for a in 0..3 {
            for b in 0..3 {
                let s = g[a].dot(&g[b]);
                t.comp_mut(mat_slot(a, b))[i] = params.l * (sigma[a][b] - s);
            }
        }
    }
    t
}

/// Momentum forcing `f_α = -L ∂_β(∂_αQ : ∂_βQ) + L ∂_β(QΔQ - ΔQQ)_αβ`, in
/// divergence form.
pub fn assemble_elastic_force(q: &QTensorField, params: &ModelParams) -> VelocityField {
    div_mat(&elastic_stress(q, &grad_q(q), &laplacian(q), params))
}

/// Largest stable step for the state under both the advective and the bulk rule.
pub fn dt_limit(state: &SimState, params: &ModelParams) -> f64 {
    advective_dt_limit(&state.u).min(bulk_dt_limit(&state.q, params))
}

struct Frozen {
    momentum_rhs: VelocityField,
    q_rhs: QTensorField,
}

/// Explicit right-hand sides of both equations evaluated at one state.
fn frozen_rhs(state: &SimState, params: &ModelParams) -> Result<Frozen> {
    let grads = grad_q(&state.q);
    let lap = laplacian(&state.q);
    let force = div_mat(&elastic_stress(&state.q, &grads, &lap, params));
    Ok(Frozen {
        momentum_rhs: explicit_momentum_rhs(&state.u, &force)?,
        q_rhs: explicit_q_rhs(&state.q, &state.u, &grads, params)?,
    })
}

/// Advances the state by `dt` and returns the record of the new state
/// (without the Sobolev monitor).
pub fn step(state: &SimState, dt: f64, params: &ModelParams) -> Result<(SimState, DiagnosticsRecord)> {
    check_q_dt(&state.q, &state.u, dt, params)?;
    let rhs = frozen_rhs(state, params)?;
    let (u, p, report) = stokes_step(&state.u, &rhs.momentum_rhs, dt, params)?;
    let q = parabolic_step(&state.q, &rhs.q_rhs, dt, params)?;
    let next = SimState {
        u,
        q,
        p,
        t: state.t + dt,
    };
    if !next.is_finite() {
        return Err(Error::domain(format!("non-finite state at t = {}", next.t)));
    }
    let rec = record(&next, params, Some(report.div_residual), false)?;
    Ok((next, rec))
}

/// Distance used for successive Picard iterates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PicardMetric {
    /// `‖δu‖_{L²} + ‖δQ‖_{L²}`.
    #[default]
    L2,
    /// The Sobolev surrogate monitor of the difference.
    Monitor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardReport {
    pub iters: usize,
    /// `δⁿ`, the largest distance over the window between iterates `n` and `n-1`.
    pub deltas: Vec<f64>,
    pub converged: bool,
    /// `δⁿ / δⁿ⁻¹`.
    pub ratios: Vec<f64>,
}

impl PicardReport {
    pub fn final_delta(&self) -> f64 {
        self.deltas.last().copied().unwrap_or(0.0)
    }

    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }
}

fn window_steps(t_window: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(t_window > 0.0) {
        return Err(Error::domain("window and dt must be positive"));
    }
    let k = (t_window / dt).round();
    if k < 1.0 || (k * dt - t_window).abs() > 1e-9 * t_window {
        return Err(Error::domain(format!(
            "window {t_window} is not a whole number of steps of {dt}"
        )));
    }
    let k = k as usize;
    if k > MAX_PICARD_WINDOW_STEPS {
        return Err(Error::domain(format!(
            "window of {k} steps exceeds the limit of {MAX_PICARD_WINDOW_STEPS}"
        )));
    }
    Ok(k)
}

fn distance(a: &SimState, b: &SimState, params: &ModelParams, metric: PicardMetric) -> Result<f64> {
    let du = a.u.lincomb(1.0, -1.0, &b.u)?;
    let dq = a.q.lincomb(1.0, -1.0, &b.q)?;
    match metric {
        PicardMetric::L2 => Ok(lp_norm(&du, 2.0)? + lp_norm(&dq, 2.0)?),
        PicardMetric::Monitor => sobolev_monitor(&du, &dq, params),
    }
}

/// Picard iteration over `[t0, t0 + t_window]` with the L² metric.
pub fn picard_solve(
    state0: &SimState,
    t_window: f64,
    dt: f64,
    params: &ModelParams,
    tol: f64,
    max_iters: usize,
) -> Result<(Vec<SimState>, PicardReport)> {
    picard_solve_with(state0, t_window, dt, params, tol, max_iters, PicardMetric::L2)
}

/// Picard iteration: iterate 0 is `state0` held constant in time; iterate
/// `n + 1` solves the linear Stokes and parabolic problems whose right-hand
/// sides are frozen at iterate `n`. Returns the last iterate's trajectory
/// (`k + 1` states including the initial one).
pub fn picard_solve_with(
    state0: &SimState,
    t_window: f64,
    dt: f64,
    params: &ModelParams,
    tol: f64,
    max_iters: usize,
    metric: PicardMetric,
) -> Result<(Vec<SimState>, PicardReport)> {
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    let k = window_steps(t_window, dt)?;
    let mut prev: Vec<SimState> = (0..=k)
        .map(|j| SimState {
            t: state0.t + j as f64 * dt,
            ..state0.clone()
        })
        .collect();
    let mut report = PicardReport {
        iters: 0,
        deltas: Vec::new(),
        converged: false,
        ratios: Vec::new(),
    };
    for n in 1..=max_iters {
        let mut next = Vec::with_capacity(k + 1);
        next.push(state0.clone());
        let mut delta: f64 = 0.0;
        for j in 0..k {
            check_q_dt(&prev[j].q, &prev[j].u, dt, params)?;
            let rhs = frozen_rhs(&prev[j], params)?;
            let cur = &next[j];
            let (u, p, _) = stokes_step(&cur.u, &rhs.momentum_rhs, dt, params)?;
            let q = parabolic_step(&cur.q, &rhs.q_rhs, dt, params)?;
            let s = SimState {
                u,
                q,
                p,
                t: cur.t + dt,
            };
            if !s.is_finite() {
                return Err(Error::domain(format!("Picard iterate {n} diverged at step {j}")));
            }
            delta = delta.max(distance(&s, &prev[j + 1], params, metric)?);
            next.push(s);
        }
        if let Some(&last) = report.deltas.last() {
            if last > 0.0 {
                report.ratios.push(delta / last);
            }
        }
        report.deltas.push(delta);
        report.iters = n;
        prev = next;
        if delta <= tol {
            report.converged = true;
            break;
        }
    }
    Ok((prev, report))
}
