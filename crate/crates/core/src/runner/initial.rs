//! Construction of initial states.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;

use crate::error::Result;
use crate::fluid::project;
use crate::grid::domain::DomainSpec;
use crate::grid::field::{Field, QTensorField, VelocityField};
use crate::grid::spectral::Spectral;
use crate::runner::config::InitialCondition;
use crate::state::SimState;
use crate::tensor::QTensor;

/// Unit-norm uniaxial direction `diag(1, 1, -2)/√6`.
pub fn uniaxial_unit() -> QTensor {
    QTensor::diag(1.0, 1.0) * (1.0 / 6f64.sqrt())
}

pub fn build_initial_state(domain: DomainSpec, ic: &InitialCondition) -> Result<SimState> {
    match *ic {
        InitialCondition::Zero => Ok(SimState::zero(domain)),
        InitialCondition::SineMode { k, amplitude, axis } => {
            let qhat = uniaxial_unit() * amplitude;
            let l = domain.lengths()[axis];
            let periodic = domain.is_periodic();
            let q = QTensorField::from_fn(domain, |x| {
                let s = if periodic {
                    (2.0 * PI * k as f64 * x[axis] / l).sin()
                } else {
                    (PI * k as f64 * x[axis] / l).cos()
                };
                (qhat * s).components()
            });
            SimState::new(VelocityField::zeros(domain), q, 0.0)
        }
        InitialCondition::RandomSmooth {
            seed,
            amplitude,
            cutoff_mode,
            velocity_amplitude,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q: QTensorField = smooth_noise(domain, cutoff_mode, &mut rng);
            let q = rescale(q, amplitude);
            let u_amp = velocity_amplitude.unwrap_or(amplitude);
            let raw: VelocityField = smooth_noise(domain, cutoff_mode, &mut rng);
            let u = if u_amp > 0.0 {
                rescale(solenoidal(raw)?, u_amp)
            } else {
                VelocityField::zeros(domain)
            };
            SimState::new(u, q, 0.0)
        }
    }
}

/// Scales to the requested sup norm of the pointwise magnitude.
fn rescale<const C: usize>(mut f: Field<C>, amplitude: f64) -> Field<C> {
    let m = f.max_magnitude();
    if m > 0.0 {
        f.scale(amplitude / m);
    }
    f
}

fn solenoidal(mut u: VelocityField) -> Result<VelocityField> {
    let domain = *u.domain();
    if !domain.is_periodic() {
        // Taper towards the walls before projecting so the no-slip field
        // stays smooth.
        let lens = domain.lengths();
        for i in 0..domain.len() {
            let x = domain.coords(i);
            let w: f64 = (0..3).map(|a| (PI * x[a] / lens[a]).sin().powi(2)).product();
            let mut v = u.at(i);
            v.iter_mut().for_each(|c| *c *= w);
            u.set(i, v);
        }
    }
    Ok(project(&u)?.velocity)
}

/// White Gaussian noise restricted to modes with `|n| <= cutoff`: a Fourier
/// filter on periodic grids, a random cosine series (zero normal derivative
/// at every wall) on box grids.
pub fn smooth_noise<const C: usize>(domain: DomainSpec, cutoff: u32, rng: &mut ChaCha8Rng) -> Field<C> {
    if domain.is_periodic() {
        let sp = Spectral::for_domain(&domain);
        let lens = domain.lengths();
        let cut2 = (cutoff * cutoff) as f64;
        let noise: Vec<Vec<f64>> = (0..C)
            .map(|_| (0..domain.len()).map(|_| StandardNormal.sample(rng)).collect())
            .collect();
        let refs: Vec<&[f64]> = noise.iter().map(|v| v.as_slice()).collect();
        let filtered: Vec<_> = sp
            .forward_many(&refs)
            .iter()
            .map(|h| {
                sp.apply(h, |ke, _| {
                    let n2: f64 = (0..3).map(|a| (ke[a] * lens[a] / (2.0 * PI)).powi(2)).sum();
                    let keep = n2 > 0.0 && n2 <= cut2 + 1e-9;
                    Complex64::new(if keep { 1.0 } else { 0.0 }, 0.0)
                })
            })
            .collect();
        let mut it = sp.inverse_many(filtered).into_iter();
        Field::from_components(domain, std::array::from_fn(|_| it.next().unwrap()))
    } else {
        let shape = domain.shape();
        let lens = domain.lengths();
        let cut = cutoff as usize;
        // cos(n π x / L) sampled on each axis.
        let tables: Vec<Vec<Vec<f64>>> = (0..3)
            .map(|a| {
                let h = lens[a] / (shape[a] - 1) as f64;
                (0..=cut)
                    .map(|n| (0..shape[a]).map(|i| (PI * n as f64 * i as f64 * h / lens[a]).cos()).collect())
                    .collect()
            })
            .collect();
        let mut comps: [Vec<f64>; C] = std::array::from_fn(|_| vec![0.0; domain.len()]);
        for comp in comps.iter_mut() {
            for nz in 0..=cut {
                for ny in 0..=cut {
                    for nx in 0..=cut {
                        let n2 = nx * nx + ny * ny + nz * nz;
                        if n2 == 0 || n2 > cut * cut {
                            continue;
                        }
                        let coef: f64 = StandardNormal.sample(rng);
                        for k in 0..shape[2] {
                            let cz = coef * tables[2][nz][k];
                            for j in 0..shape[1] {
                                let cyz = cz * tables[1][ny][j];
                                let base = shape[0] * (j + shape[1] * k);
                                for i in 0..shape[0] {
                                    comp[base + i] += cyz * tables[0][nx][i];
                                }
                            }
                        }
                    }
                }
            }
        }
        Field::from_components(domain, comps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluid::divergence_residual;

    fn random(domain: DomainSpec, amp: f64, u_amp: Option<f64>) -> SimState {
        let ic = InitialCondition::RandomSmooth {
            seed: 7,
            amplitude: amp,
            cutoff_mode: 3,
            velocity_amplitude: u_amp,
        };
        build_initial_state(domain, &ic).unwrap()
    }

    #[test]
    fn random_smooth_is_scaled_and_solenoidal() {
        for d in [DomainSpec::periodic(16, 2.0 * PI), DomainSpec::boxed(12, 1.0)] {
            let s = random(d, 0.1, None);
            assert!((s.q.max_magnitude() - 0.1).abs() < 1e-14);
            assert!((s.u.max_magnitude() - 0.1).abs() < 1e-14);
            assert!(divergence_residual(&s.u) < 1e-10);
            assert_eq!(s.q.trace_residual(), 0.0);
        }
    }

    #[test]
    fn random_smooth_is_reproducible() {
        let d = DomainSpec::periodic(8, 2.0 * PI);
        assert_eq!(random(d, 0.1, None), random(d, 0.1, None));
        let still = random(d, 0.1, Some(0.0));
        assert_eq!(still.u.max_abs(), 0.0);
    }

    #[test]
    fn sine_mode_profile() {
        let d = DomainSpec::periodic(8, 2.0 * PI);
        let s = build_initial_state(d, &InitialCondition::SineMode { k: 1, amplitude: 2.0, axis: 1 }).unwrap();
        assert!((s.q.max_magnitude() - 2.0).abs() < 1e-12);
        let i = d.index(0, 2, 0);
        assert!((s.q.q_at(i).norm() - 2.0).abs() < 1e-12);
    }
}
