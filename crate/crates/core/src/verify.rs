//! Self-contained property suites behind the `verify` command: the cubic
//! trace inequality, the rotational cancellation, and a handful of discrete
//! operator identities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::Result;
use crate::fluid::{divergence_residual, leray_project};
use crate::grid::domain::DomainSpec;
use crate::grid::fd;
use crate::grid::field::{QTensorField, ScalarField, VelocityField};
use crate::grid::ops::{gradient_energy, laplacian, partial};
use crate::tensor::{cubic_trace_bound_check, mat_mul, rotation_cancellation, Mat3, QTensor};

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    /// Worst observed value of the checked quantity, relative to its tolerance
    /// (`<= 1` passes).
    pub worst: f64,
}

impl CheckOutcome {
    fn new(name: &str, cases: usize, worst: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: worst <= 1.0,
            cases,
            worst,
        }
    }
}

const SEED: u64 = 0x5154_4621;

/// Random trace-free symmetric tensor with components of magnitude up to `scale`.
pub fn random_qtensor<R: Rng>(rng: &mut R, scale: f64) -> QTensor {
    QTensor::from_components(std::array::from_fn(|_| scale * rng.random_range(-1.0..1.0)))
}

/// Random antisymmetric matrix with entries in `[-scale, scale]`.
pub fn random_antisymmetric<R: Rng>(rng: &mut R, scale: f64) -> Mat3 {
    let [x, y, z]: [f64; 3] = std::array::from_fn(|_| scale * rng.random_range(-1.0..1.0));
    [[0.0, x, y], [-x, 0.0, z], [-y, -z, 0.0]]
}

/// Log-spaced values from `lo` to `hi`, both included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `tr(Q³) <= (3ε/8) tr²(Q²) + (3/(2ε)) tr(Q²)` over `samples` random
/// tensors (component scale log-uniform in `[1e-3, 1e3]`) and 13 values of ε.
pub fn check_cubic_trace_bound(samples: usize) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let eps_grid = log_grid(1e-3, 1e3, 13);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let scale = 10f64.powf(rng.random_range(-3.0..3.0));
        let q = random_qtensor(&mut rng, scale);
        for &eps in &eps_grid {
            let b = cubic_trace_bound_check(&q, eps)?;
            // Violation measured against the relative tolerance.
            let excess = (b.lhs - b.rhs) / (1e-12 * b.rhs.abs().max(1.0));
            worst = worst.max(excess);
            if !b.holds {
                worst = worst.max(1.0 + f64::EPSILON);
            }
        }
    }
    Ok(CheckOutcome::new(
        "cubic trace inequality",
        samples * eps_grid.len(),
        worst.max(0.0),
    ))
}

/// `|(ΩQ - QΩ):Q| <= 1e-13 |Ω| |Q|²` over `samples` random pairs.
pub fn check_rotation_cancellation(samples: usize) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 1);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let qs = 10f64.powf(rng.random_range(-3.0..3.0));
        let os = 10f64.powf(rng.random_range(-3.0..3.0));
        let q = random_qtensor(&mut rng, qs);
        let omega = random_antisymmetric(&mut rng, os);
        let on = omega.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
        let bound = 1e-13 * on * q.norm().powi(2);
        let v = rotation_cancellation(&omega, &q)?;
        if bound > 0.0 {
            worst = worst.max(v.abs() / bound);
        }
    }
    Ok(CheckOutcome::new("rotational cancellation", samples, worst))
}

/// `tr(Q³)`, evaluated as `3 det Q`, against the trace of the explicit cube.
pub fn check_cubic_determinant(samples: usize) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 2);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let q = random_qtensor(&mut rng, 10.0);
        let m = q.to_matrix();
        let cube = mat_mul(&mat_mul(&m, &m), &m);
        let trace = cube[0][0] + cube[1][1] + cube[2][2];
        let tol = 1e-12 * q.norm().powi(3).max(1.0);
        worst = worst.max((q.trace_cub() - trace).abs() / tol);
    }
    CheckOutcome::new("tr(Q^3) = 3 det Q", samples, worst)
}

/// Periodic identities: spectral differentiation of a trigonometric
/// polynomial, the Leray projection (divergence-free and idempotent), and
/// the summation-by-parts identity `∫ Q:ΔQ = -∫ |∇Q|²`.
pub fn check_periodic_operators() -> Result<Vec<CheckOutcome>> {
    let d = DomainSpec::periodic(16, 2.0 * PI);
    let f = ScalarField::from_fn(d, |x| [(2.0 * x[0]).sin() * (x[1] + x[2]).cos()]);
    let dxy = partial(&f, [1, 1, 0]);
    let want = ScalarField::from_fn(d, |x| [-2.0 * (2.0 * x[0]).cos() * (x[1] + x[2]).sin()]);
    let deriv_err = dxy.lincomb(1.0, -1.0, &want)?.max_abs();

    let u = VelocityField::from_fn(d, |x| {
        [
            x[1].sin() + (x[0] + x[2]).cos(),
            (2.0 * x[2]).cos() * x[0].sin(),
            (x[0] - x[1]).sin(),
        ]
    });
    let (v, _) = leray_project(&u)?;
    let (vv, _) = leray_project(&v)?;
    let div = divergence_residual(&v);
    let idem = vv.lincomb(1.0, -1.0, &v)?.max_abs();

    let q = QTensorField::from_fn(d, |x| {
        [
            x[0].sin(),
            (x[1] + x[2]).cos(),
            0.5 * (2.0 * x[2]).sin(),
            x[0].cos() * x[1].sin(),
            0.3,
        ]
    });
    let lap = laplacian(&q);
    let w = d.weights();
    let inner: f64 = (0..q.len()).map(|i| w[i] * q.q_at(i).dot(&lap.q_at(i))).sum();
    let ge = gradient_energy(&q);
    let parts = (inner + ge).abs() / (1e-12 * ge.max(1.0));

    Ok(vec![
        CheckOutcome::new("spectral mixed derivative", d.len(), deriv_err / 1e-12),
        CheckOutcome::new("Leray projection divergence", d.len(), div / 1e-12),
        CheckOutcome::new("Leray projection idempotent", d.len(), idem / 1e-12),
        CheckOutcome::new("summation by parts", d.len(), parts),
    ])
}

/// Box identity: the interior gradient is minus the adjoint of the interior
/// divergence, `<D u, φ> = -<u, G φ>`.
pub fn check_box_adjointness() -> CheckOutcome {
    let d = DomainSpec::boxed(10, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 3);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mut u: [Vec<f64>; 3] = std::array::from_fn(|_| (0..d.len()).map(|_| rng.random_range(-1.0..1.0)).collect());
        let phi: Vec<f64> = (0..d.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        for c in u.iter_mut() {
            for (i, v) in c.iter_mut().enumerate() {
                if d.on_wall(i) {
                    *v = 0.0;
                }
            }
        }
        let du = fd::div_interior([&u[0], &u[1], &u[2]], &d);
        let g = fd::grad_interior(&phi, &d);
        let lhs: f64 = du.iter().zip(&phi).map(|(a, b)| a * b).sum();
        let rhs: f64 = (0..3)
            .map(|a| u[a].iter().zip(&g[a]).map(|(x, y)| x * y).sum::<f64>())
            .sum();
        worst = worst.max((lhs + rhs).abs() / (1e-12 * lhs.abs().max(1.0)));
    }
    CheckOutcome::new("box divergence/gradient adjointness", 20, worst)
}

/// Every suite, at full size.
pub fn run_all() -> Result<Vec<CheckOutcome>> {
    let mut out = vec![
        check_cubic_trace_bound(100_000)?,
        check_rotation_cancellation(10_000)?,
        check_cubic_determinant(10_000),
    ];
    out.extend(check_periodic_operators()?);
    out.push(check_box_adjointness());
    Ok(out)
}
