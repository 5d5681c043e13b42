//! Pointwise algebra on 3×3 symmetric trace-free tensors.
//!
//! A [`QTensor`] stores the five independent entries `(q11, q12, q13, q22, q23)`
//! and reconstructs `q33 = -q11 - q22`, so symmetry and trace-freeness hold by
//! construction rather than up to a tolerance. All norms are Frobenius norms of
//! the full 3×3 matrix.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense 3×3 matrix, row-major.
pub type Mat3 = [[f64; 3]; 3];

/// Symmetric trace-free 3×3 tensor (the nematic order parameter at one point).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QTensor {
    pub q11: f64,
    pub q12: f64,
    pub q13: f64,
    pub q22: f64,
    pub q23: f64,
}

impl QTensor {
    pub const ZERO: QTensor = QTensor {
        q11: 0.0,
        q12: 0.0,
        q13: 0.0,
        q22: 0.0,
        q23: 0.0,
    };

    pub const fn new(q11: f64, q12: f64, q13: f64, q22: f64, q23: f64) -> Self {
        QTensor {
            q11,
            q12,
            q13,
            q22,
            q23,
        }
    }

    /// Diagonal tensor `diag(d1, d2, -d1-d2)`.
    pub const fn diag(d1: f64, d2: f64) -> Self {
        QTensor::new(d1, 0.0, 0.0, d2, 0.0)
    }

    pub fn from_components(c: [f64; 5]) -> Self {
        QTensor::new(c[0], c[1], c[2], c[3], c[4])
    }

    pub fn components(&self) -> [f64; 5] {
        [self.q11, self.q12, self.q13, self.q22, self.q23]
    }

    #[inline]
    pub fn q33(&self) -> f64 {
        -self.q11 - self.q22
    }

    pub fn to_matrix(&self) -> Mat3 {
        [
            [self.q11, self.q12, self.q13],
            [self.q12, self.q22, self.q23],
            [self.q13, self.q23, self.q33()],
        ]
    }

    /// `tr(Q²)`, equal to the squared Frobenius norm.
    #[inline]
    pub fn trace_sq(&self) -> f64 {
        frobenius_sq5(&self.components())
    }

    /// `tr(Q³)`. For trace-free matrices this equals `3 det Q`.
    #[inline]
    pub fn trace_cub(&self) -> f64 {
        let (a, b, c, d, e, f) = (self.q11, self.q12, self.q13, self.q22, self.q23, self.q33());
        3.0 * (a * (d * f - e * e) - b * (b * f - e * c) + c * (b * e - d * c))
    }

    pub fn norm(&self) -> f64 {
        self.trace_sq().sqrt()
    }

    /// `Q²` as a full matrix (symmetric, trace `tr(Q²)`).
    pub fn square(&self) -> Mat3 {
        mat_mul(&self.to_matrix(), &self.to_matrix())
    }

    /// Frobenius inner product `Q : P`.
    pub fn dot(&self, other: &QTensor) -> f64 {
        let (p, q) = (self, other);
        p.q11 * q.q11
            + p.q22 * q.q22
            + p.q33() * q.q33()
            + 2.0 * (p.q12 * q.q12 + p.q13 * q.q13 + p.q23 * q.q23)
    }
}

/// Squared Frobenius norm of a tensor given by its five stored components.
#[inline]
pub fn frobenius_sq5(c: &[f64; 5]) -> f64 {
    let q33 = -c[0] - c[3];
    c[0] * c[0] + c[3] * c[3] + q33 * q33 + 2.0 * (c[1] * c[1] + c[2] * c[2] + c[4] * c[4])
}

impl Add for QTensor {
    type Output = QTensor;
    fn add(self, o: QTensor) -> QTensor {
        QTensor::new(
            self.q11 + o.q11,
            self.q12 + o.q12,
            self.q13 + o.q13,
            self.q22 + o.q22,
            self.q23 + o.q23,
        )
    }
}

impl AddAssign for QTensor {
    fn add_assign(&mut self, o: QTensor) {
        *self = *self + o;
    }
}

impl Sub for QTensor {
    type Output = QTensor;
    fn sub(self, o: QTensor) -> QTensor {
        self + (-o)
    }
}

impl Neg for QTensor {
    type Output = QTensor;
    fn neg(self) -> QTensor {
        self * -1.0
    }
}

impl Mul<f64> for QTensor {
    type Output = QTensor;
    fn mul(self, s: f64) -> QTensor {
        QTensor::new(
            self.q11 * s,
            self.q12 * s,
            self.q13 * s,
            self.q22 * s,
            self.q23 * s,
        )
    }
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub fn mat_frobenius(m: &Mat3) -> f64 {
    m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

/// Projects an arbitrary matrix onto the symmetric trace-free tensors:
/// `(M + Mᵀ)/2 - (tr M / 3) I`.
pub fn sym_traceless_project(m: &Mat3) -> QTensor {
    let third_trace = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    QTensor::new(
        m[0][0] - third_trace,
        0.5 * (m[0][1] + m[1][0]),
        0.5 * (m[0][2] + m[2][0]),
        m[1][1] - third_trace,
        0.5 * (m[1][2] + m[2][1]),
    )
}

/// Bulk part of the molecular field,
/// `-a Q + b (Q² - tr(Q²) I/3) - c Q tr(Q²)`.
///
/// Adding `L ΔQ` gives the full molecular field.
pub fn bulk_molecular_field(q: &QTensor, params: &ModelParams) -> QTensor {
    let tr2 = q.trace_sq();
    let q2 = sym_traceless_project(&q.square());
    *q * (-params.a - params.c * tr2) + q2 * params.b
}

/// Antisymmetric stress `Q·D - D·Q` with `D` the Laplacian of `Q` at the same point.
pub fn commutator_stress(q: &QTensor, dq: &QTensor) -> Mat3 {
    let (qm, dm) = (q.to_matrix(), dq.to_matrix());
    let qd = mat_mul(&qm, &dm);
    // D·Q = (Q·D)ᵀ for symmetric Q and D.
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = qd[i][j] - qd[j][i];
        }
    }
    out
}

/// Both sides of the cubic trace inequality
/// `tr(Q³) <= (3ε/8) tr²(Q²) + (3/(2ε)) tr(Q²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceBound {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl TraceBound {
    /// `rhs - lhs`; non-negative whenever the bound holds exactly.
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

pub fn cubic_trace_bound_check(q: &QTensor, eps: f64) -> Result<TraceBound> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::domain(format!("eps must be positive and finite, got {eps}")));
    }
    let tr2 = q.trace_sq();
    let lhs = q.trace_cub();
    let rhs = 3.0 * eps / 8.0 * tr2 * tr2 + 3.0 / (2.0 * eps) * tr2;
    let tol = 1e-12 * rhs.abs().max(1.0);
    Ok(TraceBound {
        lhs,
        rhs,
        holds: lhs <= rhs + tol,
    })
}

/// `(Ω Q - Q Ω) : Q`, which vanishes for antisymmetric `Ω` and symmetric `Q`.
pub fn rotation_cancellation(omega: &Mat3, q: &QTensor) -> Result<f64> {
    let scale = omega.iter().flatten().fold(1.0_f64, |m, v| m.max(v.abs()));
    for i in 0..3 {
        for j in i..3 {
            if (omega[i][j] + omega[j][i]).abs() > 1e-14 * scale {
                return Err(Error::domain(format!(
                    "omega is not antisymmetric at ({i}, {j})"
                )));
            }
        }
    }
    let qm = q.to_matrix();
    let oq = mat_mul(omega, &qm);
    let qo = mat_mul(&qm, omega);
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += (oq[i][j] - qo[i][j]) * qm[i][j];
        }
    }
    Ok(acc)
}

/// Material and numerical parameters of the flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Elastic constant.
    #[serde(rename = "L")]
    pub l: f64,
    /// Viscosity.
    pub nu: f64,
    /// Relaxation constant.
    pub gamma: f64,
    /// Flow-alignment ratio; only 0 is supported.
    pub xi: f64,
    pub p_exp: f64,
    /// Exponent of the velocity norms in the Sobolev monitor.
    pub q_exp: f64,
    /// Exponent of the Q-tensor norms in the Sobolev monitor.
    pub r_exp: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            a: 1.0,
            b: 0.5,
            c: 1.0,
            l: 1.0,
            nu: 1.0,
            gamma: 1.0,
            xi: 0.0,
            p_exp: 16.0 / 15.0,
            q_exp: 4.0,
            r_exp: 15.0,
        }
    }
}

impl ModelParams {
    pub fn with_bulk(a: f64, b: f64, c: f64) -> Self {
        ModelParams {
            a,
            b,
            c,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.a, self.b, self.c, self.l, self.nu, self.gamma, self.xi, self.p_exp, self.q_exp,
            self.r_exp,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("model parameters must be finite".into()));
        }
        for (name, v) in [("c", self.c), ("L", self.l), ("nu", self.nu), ("gamma", self.gamma)] {
            if v <= 0.0 {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.xi != 0.0 {
            return Err(Error::Config(format!(
                "xi = {} is unsupported; only xi = 0 is implemented",
                self.xi
            )));
        }
        for (name, v) in [("p_exp", self.p_exp), ("q_exp", self.q_exp), ("r_exp", self.r_exp)] {
            if v < 1.0 {
                return Err(Error::Config(format!("{name} must be >= 1, got {v}")));
            }
        }
        Ok(())
    }
}
