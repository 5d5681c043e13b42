//! Conjugate-gradient solves for the implicit and projection steps on box grids.

use crate::error::{Error, Result};
use crate::grid::domain::DomainSpec;
use crate::grid::fd;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    /// Max-norm of the true residual at exit.
    pub residual: f64,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Conjugate gradients for `A x = b` with `A` self-adjoint and positive
/// (semi-)definite under the inner product weighted by `weights`.
///
/// Stops when the max-norm of the residual drops to `atol`. The recursive
/// residual is re-checked against the true one, restarting if they drifted.
pub fn conjugate_gradient(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    weights: &[f64],
    atol: f64,
    max_iters: usize,
    solver: &'static str,
) -> Result<CgOutcome> {
    let n = b.len();
    let dot = |a: &[f64], c: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            s += weights[i] * a[i] * c[i];
        }
        s
    };
    let mut ap = vec![0.0; n];
    let mut r = vec![0.0; n];
    let mut iterations = 0;

    for _restart in 0..4 {
        apply(x, &mut ap);
        for i in 0..n {
            r[i] = b[i] - ap[i];
        }
        let res = max_abs(&r);
        if res <= atol {
            return Ok(CgOutcome {
                iterations,
                residual: res,
            });
        }
        let mut p = r.clone();
        let mut rr = dot(&r, &r);
        while iterations < max_iters {
            apply(&p, &mut ap);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                break;
            }
            let alpha = rr / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            iterations += 1;
            if max_abs(&r) <= atol {
                break;
            }
            let rr_new = dot(&r, &r);
            let beta = rr_new / rr;
            rr = rr_new;
            for i in 0..n {
                p[i] = r[i] + beta * p[i];
            }
        }
        if iterations >= max_iters {
            break;
        }
    }
    apply(x, &mut ap);
    let residual = (0..n).map(|i| (b[i] - ap[i]).abs()).fold(0.0, f64::max);
    if residual <= atol {
        Ok(CgOutcome {
            iterations,
            residual,
        })
    } else {
        Err(Error::SolverDivergence {
            solver,
            iterations,
            residual,
        })
    }
}

const MAX_ITERS: usize = 20_000;

/// Solves `(I - coef Δ) u = rhs` at interior nodes with zero wall values.
pub fn helmholtz_dirichlet(rhs: &[f64], coef: f64, domain: &DomainSpec) -> Result<(Vec<f64>, CgOutcome)> {
    let interior: Vec<f64> = (0..rhs.len())
        .map(|i| if domain.on_wall(i) { 0.0 } else { 1.0 })
        .collect();
    let b: Vec<f64> = rhs.iter().zip(&interior).map(|(v, m)| v * m).collect();
    let mut x = b.clone();
    let atol = 1e-13 * max_abs(&b).max(1e-300);
    let out = conjugate_gradient(
        |v, out| {
            let lap = fd::laplacian_dirichlet(v, domain);
            for i in 0..v.len() {
                out[i] = interior[i] * (v[i] - coef * lap[i]);
            }
        },
        &b,
        &mut x,
        &interior,
        atol,
        MAX_ITERS,
        "Dirichlet Helmholtz CG",
    )?;
    Ok((x, out))
}

/// Solves `(I - coef Δ_N) q = rhs` on all nodes with mirrored-ghost Neumann walls.
pub fn helmholtz_neumann(rhs: &[f64], coef: f64, domain: &DomainSpec) -> Result<(Vec<f64>, CgOutcome)> {
    let weights = domain.weights();
    let mut x = rhs.to_vec();
    let atol = 1e-13 * max_abs(rhs).max(1e-300);
    let out = conjugate_gradient(
        |v, out| {
            let lap = fd::laplacian_neumann(v, domain);
            for i in 0..v.len() {
                out[i] = v[i] - coef * lap[i];
            }
        },
        rhs,
        &mut x,
        &weights,
        atol,
        MAX_ITERS,
        "Neumann Helmholtz CG",
    )?;
    Ok((x, out))
}

/// Finds `φ` on interior nodes with `div(u - ∇φ) = 0` for the centered
/// interior divergence and its negative-adjoint gradient
/// ([`fd::div_interior`], [`fd::grad_interior`]). `div_u` is that divergence
/// of `u`; `floor` is the residual below which `u` already counts as
/// solenoidal (it should scale like `|u|/h` times machine precision).
pub fn projection_potential(div_u: &[f64], domain: &DomainSpec, floor: f64) -> Result<(Vec<f64>, CgOutcome)> {
    let interior: Vec<f64> = (0..div_u.len())
        .map(|i| if domain.on_wall(i) { 0.0 } else { 1.0 })
        .collect();
    // -D G is positive semi-definite; solve (-D G) φ = -div u.
    let mut b: Vec<f64> = div_u.iter().zip(&interior).map(|(v, m)| -v * m).collect();
    // With an even node spacing count on every axis the centered gradient
    // annihilates the indicator of the all-odd sublattice. Exact data is
    // orthogonal to it; remove the rounding-level component so CG cannot
    // wander along the null direction.
    if domain.cells().iter().all(|n| n % 2 == 0) {
        let odd: Vec<bool> = (0..b.len())
            .map(|i| interior[i] > 0.0 && domain.unindex(i).iter().all(|c| c % 2 == 1))
            .collect();
        let count = odd.iter().filter(|&&o| o).count() as f64;
        let mean = b.iter().zip(&odd).filter(|(_, &o)| o).map(|(v, _)| v).sum::<f64>() / count;
        b.iter_mut().zip(&odd).filter(|(_, &o)| o).for_each(|(v, _)| *v -= mean);
    }
    let mut phi = vec![0.0; b.len()];
    let bmax = max_abs(&b);
    if bmax <= floor {
        return Ok((
            phi,
            CgOutcome {
                iterations: 0,
                residual: bmax,
            },
        ));
    }
    let atol = (1e-10 * bmax).min(5e-11).max(floor);
    let out = conjugate_gradient(
        |v, out| {
            let g = fd::grad_interior(v, domain);
            let d = fd::div_interior([&g[0], &g[1], &g[2]], domain);
            for i in 0..v.len() {
                out[i] = -d[i] * interior[i];
            }
        },
        &b,
        &mut phi,
        &interior,
        atol,
        MAX_ITERS,
        "pressure Poisson CG",
    )?;
    Ok((phi, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cg_solves_small_spd_system() {
        let a = [[4.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]];
        let b = [1.0, 2.0, 3.0];
        let mut x = [0.0; 3];
        let out = conjugate_gradient(
            |v, o| {
                for i in 0..3 {
                    o[i] = (0..3).map(|j| a[i][j] * v[j]).sum();
                }
            },
            &b,
            &mut x,
            &[1.0; 3],
            1e-14,
            100,
            "test",
        )
        .unwrap();
        assert!(out.iterations <= 4);
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[i][j] * x[j]).sum::<f64>() - b[i];
            assert!(r.abs() < 1e-13);
        }
    }

    #[test]
    fn neumann_helmholtz_preserves_cosine_mode() {
        use std::f64::consts::PI;
        let d = DomainSpec::boxed(16, 1.0);
        let rhs: Vec<f64> = (0..d.len()).map(|i| (PI * d.coords(i)[0]).cos()).collect();
        let coef = 0.01;
        let (x, _) = helmholtz_neumann(&rhs, coef, &d).unwrap();
        let h = d.spacing()[0];
        let lam = (2.0 - 2.0 * (PI * h).cos()) / (h * h);
        for i in 0..d.len() {
            assert!((x[i] - rhs[i] / (1.0 + coef * lam)).abs() < 1e-11);
        }
    }
}
