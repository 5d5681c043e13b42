use crate::error::Result;
use crate::grid::domain::DomainSpec;
use crate::tensor::{frobenius_sq5, QTensor};

/// A grid-sampled field with `C` real components, stored component-major with
/// x varying fastest inside each component.
///
/// Five-component fields are Q-tensors in the `(q11, q12, q13, q22, q23)`
/// encoding; their pointwise magnitude is the Frobenius norm of the full
/// matrix. Nine-component fields are general 3×3 matrices stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<const C: usize> {
    domain: DomainSpec,
    comps: [Vec<f64>; C],
}

pub type ScalarField = Field<1>;
pub type VectorField = Field<3>;
pub type VelocityField = VectorField;
pub type QTensorField = Field<5>;
pub type MatrixField = Field<9>;

impl<const C: usize> Field<C> {
    pub fn zeros(domain: DomainSpec) -> Self {
        let n = domain.len();
        Field {
            domain,
            comps: std::array::from_fn(|_| vec![0.0; n]),
        }
    }

    /// Panics if a component has the wrong length.
    pub fn from_components(domain: DomainSpec, comps: [Vec<f64>; C]) -> Self {
        for c in &comps {
            assert_eq!(c.len(), domain.len(), "component length does not match the grid");
        }
        Field { domain, comps }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(domain: DomainSpec, f: impl Fn([f64; 3]) -> [f64; C]) -> Self {
        let mut out = Field::zeros(domain);
        for idx in 0..domain.len() {
            let v = f(domain.coords(idx));
            for c in 0..C {
                out.comps[c][idx] = v[c];
            }
        }
        out
    }

    #[inline]
    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    #[inline]
    pub fn comp(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    #[inline]
    pub fn comp_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.comps[c]
    }

    pub fn comps(&self) -> &[Vec<f64>; C] {
        &self.comps
    }

    pub fn into_components(self) -> [Vec<f64>; C] {
        self.comps
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [f64; C] {
        std::array::from_fn(|c| self.comps[c][idx])
    }

    #[inline]
    pub fn set(&mut self, idx: usize, v: [f64; C]) {
        for c in 0..C {
            self.comps[c][idx] = v[c];
        }
    }

    /// Squared pointwise magnitude.
    #[inline]
    pub fn magnitude_sq(&self, idx: usize) -> f64 {
        magnitude_sq(&self.at(idx))
    }

    pub fn scale(&mut self, s: f64) {
        for c in self.comps.iter_mut() {
            c.iter_mut().for_each(|v| *v *= s);
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    /// `self += alpha * x`.
    pub fn axpy(&mut self, alpha: f64, x: &Field<C>) -> Result<()> {
        self.domain.same_grid(&x.domain)?;
        for (dst, src) in self.comps.iter_mut().zip(&x.comps) {
            dst.iter_mut().zip(src).for_each(|(d, s)| *d += alpha * s);
        }
        Ok(())
    }

    /// `alpha * self + beta * other`.
    pub fn lincomb(&self, alpha: f64, beta: f64, other: &Field<C>) -> Result<Self> {
        let mut out = self.scaled(alpha);
        out.axpy(beta, other)?;
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest pointwise magnitude.
    pub fn max_magnitude(&self) -> f64 {
        (0..self.len())
            .map(|i| self.magnitude_sq(i))
            .fold(0.0_f64, f64::max)
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().flatten().all(|v| v.is_finite())
    }
}

/// Squared magnitude of one sample: Frobenius for Q-tensors, Euclidean otherwise.
#[inline]
pub fn magnitude_sq<const C: usize>(v: &[f64; C]) -> f64 {
    if C == 5 {
        frobenius_sq5(&[v[0], v[1], v[2], v[3], v[4]])
    } else {
        v.iter().map(|x| x * x).sum()
    }
}

impl ScalarField {
    pub fn data(&self) -> &[f64] {
        self.comp(0)
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        self.comp_mut(0)
    }

    pub fn from_data(domain: DomainSpec, data: Vec<f64>) -> Self {
        Field::from_components(domain, [data])
    }

    /// Quadrature of the field over the domain.
    pub fn integral(&self) -> f64 {
        self.domain
            .weights()
            .iter()
            .zip(self.data())
            .map(|(w, v)| w * v)
            .sum()
    }

    /// Subtracts the volume average so the field integrates to zero.
    pub fn remove_mean(&mut self) {
        let mean = self.integral() / self.domain.volume();
        self.data_mut().iter_mut().for_each(|v| *v -= mean);
    }
}

impl QTensorField {
    pub fn uniform(domain: DomainSpec, q: QTensor) -> Self {
        let c = q.components();
        Field::from_fn(domain, |_| c)
    }

    #[inline]
    pub fn q_at(&self, idx: usize) -> QTensor {
        QTensor::from_components(self.at(idx))
    }

    #[inline]
    pub fn set_q(&mut self, idx: usize, q: QTensor) {
        self.set(idx, q.components());
    }

    /// Largest `|q11 + q22 + q33|` over the grid; zero by construction.
    pub fn trace_residual(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                let q = self.q_at(i);
                (q.q11 + q.q22 + q.q33()).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Row-major slot of entry `(i, j)` in a [`MatrixField`].
#[inline]
pub const fn mat_slot(i: usize, j: usize) -> usize {
    3 * i + j
}
