use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary treatment of the computational box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    /// Triply periodic; operators are spectral.
    #[default]
    Periodic,
    /// Closed box: no-slip velocity, homogeneous Neumann Q. Operators are
    /// second-order finite differences on the nodes `x_i = i h`, `i = 0..=n`.
    Box,
}

fn two_pi() -> f64 {
    2.0 * PI
}

/// A structured 3-D grid.
///
/// A periodic axis with `n` cells carries `n` samples; a box axis carries the
/// `n + 1` nodes including both walls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    #[serde(default = "two_pi")]
    pub lx: f64,
    #[serde(default = "two_pi")]
    pub ly: f64,
    #[serde(default = "two_pi")]
    pub lz: f64,
    #[serde(default, rename = "bc")]
    pub bc_kind: BoundaryKind,
}

impl DomainSpec {
    pub fn periodic(n: usize, l: f64) -> Self {
        DomainSpec {
            nx: n,
            ny: n,
            nz: n,
            lx: l,
            ly: l,
            lz: l,
            bc_kind: BoundaryKind::Periodic,
        }
    }

    pub fn boxed(n: usize, l: f64) -> Self {
        DomainSpec {
            bc_kind: BoundaryKind::Box,
            ..DomainSpec::periodic(n, l)
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("nx", self.nx), ("ny", self.ny), ("nz", self.nz)] {
            if n < 8 {
                return Err(Error::Config(format!("{name} must be at least 8, got {n}")));
            }
            if self.is_periodic() && n % 2 != 0 {
                return Err(Error::Config(format!(
                    "{name} must be even on a periodic domain, got {n}"
                )));
            }
        }
        for (name, l) in [("lx", self.lx), ("ly", self.ly), ("lz", self.lz)] {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {l}")));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn is_periodic(&self) -> bool {
        self.bc_kind == BoundaryKind::Periodic
    }

    pub fn cells(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn lengths(&self) -> [f64; 3] {
        [self.lx, self.ly, self.lz]
    }

    /// Number of stored samples along each axis.
    pub fn shape(&self) -> [usize; 3] {
        let extra = usize::from(!self.is_periodic());
        [self.nx + extra, self.ny + extra, self.nz + extra]
    }

    pub fn len(&self) -> usize {
        let [a, b, c] = self.shape();
        a * b * c
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> [f64; 3] {
        [
            self.lx / self.nx as f64,
            self.ly / self.ny as f64,
            self.lz / self.nz as f64,
        ]
    }

    pub fn h_min(&self) -> f64 {
        let [a, b, c] = self.spacing();
        a.min(b).min(c)
    }

    pub fn volume(&self) -> f64 {
        self.lx * self.ly * self.lz
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        let [sx, sy, _] = self.shape();
        i + sx * (j + sy * k)
    }

    #[inline]
    pub fn unindex(&self, idx: usize) -> [usize; 3] {
        let [sx, sy, _] = self.shape();
        [idx % sx, (idx / sx) % sy, idx / (sx * sy)]
    }

    /// Physical coordinates of the sample at flat index `idx`.
    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.unindex(idx);
        let h = self.spacing();
        [i as f64 * h[0], j as f64 * h[1], k as f64 * h[2]]
    }

    /// Quadrature weights per axis: `h` everywhere on periodic axes, the
    /// trapezoid rule on box axes.
    pub fn axis_weights(&self, axis: usize) -> Vec<f64> {
        let n = self.shape()[axis];
        let h = self.spacing()[axis];
        let mut w = vec![h; n];
        if !self.is_periodic() {
            w[0] *= 0.5;
            w[n - 1] *= 0.5;
        }
        w
    }

    /// Per-sample quadrature weights; they sum to the box volume.
    pub fn weights(&self) -> Vec<f64> {
        let [wx, wy, wz] = [0, 1, 2].map(|a| self.axis_weights(a));
        let mut out = Vec::with_capacity(self.len());
        for &z in &wz {
            for &y in &wy {
                for &x in &wx {
                    out.push(x * y * z);
                }
            }
        }
        out
    }

    /// True when the sample lies on a wall of a box domain.
    #[inline]
    pub fn on_wall(&self, idx: usize) -> bool {
        if self.is_periodic() {
            return false;
        }
        let [i, j, k] = self.unindex(idx);
        let [sx, sy, sz] = self.shape();
        i == 0 || j == 0 || k == 0 || i == sx - 1 || j == sy - 1 || k == sz - 1
    }

    pub(crate) fn same_grid(&self, other: &DomainSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::DomainMismatch)
        }
    }
}
