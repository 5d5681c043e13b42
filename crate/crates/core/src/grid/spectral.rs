//! Fourier machinery for periodic grids.
//!
//! Transforms are unnormalized forward / `1/N` inverse. First-order (odd)
//! derivatives drop the Nyquist mode so that real fields stay real; even-order
//! derivatives keep it.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::domain::DomainSpec;

pub type Spectrum = Vec<Complex64>;

pub struct Spectral {
    shape: [usize; 3],
    fwd: [Arc<dyn Fft<f64>>; 3],
    inv: [Arc<dyn Fft<f64>>; 3],
    /// Wavenumbers, Nyquist kept.
    k_even: [Vec<f64>; 3],
    /// Wavenumbers, Nyquist zeroed.
    k_odd: [Vec<f64>; 3],
}

type CacheKey = ([usize; 3], [u64; 3]);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<Spectral>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<Spectral>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl Spectral {
    /// Shared transform plans for a periodic domain.
    pub fn for_domain(domain: &DomainSpec) -> Arc<Spectral> {
        let key = (domain.shape(), domain.lengths().map(f64::to_bits));
        let mut guard = cache().lock().expect("spectral cache poisoned");
        guard
            .entry(key)
            .or_insert_with(|| Arc::new(Spectral::new(domain.shape(), domain.lengths())))
            .clone()
    }

    fn new(shape: [usize; 3], lengths: [f64; 3]) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = shape.map(|n| planner.plan_fft_forward(n));
        let inv = shape.map(|n| planner.plan_fft_inverse(n));
        let mut k_even: [Vec<f64>; 3] = Default::default();
        let mut k_odd: [Vec<f64>; 3] = Default::default();
        for a in 0..3 {
            let n = shape[a];
            let base = 2.0 * PI / lengths[a];
            for m in 0..n {
                let signed = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
                let k = base * signed;
                k_even[a].push(k);
                k_odd[a].push(if n % 2 == 0 && m == n / 2 { 0.0 } else { k });
            }
        }
        Spectral {
            shape,
            fwd,
            inv,
            k_even,
            k_odd,
        }
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn k_even(&self, axis: usize) -> &[f64] {
        &self.k_even[axis]
    }

    pub fn k_odd(&self, axis: usize) -> &[f64] {
        &self.k_odd[axis]
    }

    fn fft3(&self, buf: &mut [Complex64], inverse: bool) {
        let [nx, ny, nz] = self.shape;
        let plans = if inverse { &self.inv } else { &self.fwd };
        let scratch_len = plans.iter().map(|p| p.get_inplace_scratch_len()).max().unwrap_or(0);
        let mut scratch = vec![Complex64::default(); scratch_len];

        plans[0].process_with_scratch(buf, &mut scratch);

        let mut plane = vec![Complex64::default(); nx * ny];
        for k in 0..nz {
            let slab = &mut buf[k * nx * ny..(k + 1) * nx * ny];
            for j in 0..ny {
                for i in 0..nx {
                    plane[i * ny + j] = slab[i + nx * j];
                }
            }
            plans[1].process_with_scratch(&mut plane, &mut scratch);
            for j in 0..ny {
                for i in 0..nx {
                    slab[i + nx * j] = plane[i * ny + j];
                }
            }
        }

        let mut pencil = vec![Complex64::default(); nx * nz];
        for j in 0..ny {
            for k in 0..nz {
                let row = &buf[nx * (j + ny * k)..nx * (j + ny * k) + nx];
                for i in 0..nx {
                    pencil[i * nz + k] = row[i];
                }
            }
            plans[2].process_with_scratch(&mut pencil, &mut scratch);
            for k in 0..nz {
                let row = &mut buf[nx * (j + ny * k)..nx * (j + ny * k) + nx];
                for i in 0..nx {
                    row[i] = pencil[i * nz + k];
                }
            }
        }
    }

    pub fn forward(&self, f: &[f64]) -> Spectrum {
        let mut buf: Spectrum = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft3(&mut buf, false);
        buf
    }

    /// Forward transforms of several real fields, two per complex FFT.
    pub fn forward_many(&self, fields: &[&[f64]]) -> Vec<Spectrum> {
        let mut out = Vec::with_capacity(fields.len());
        for pair in fields.chunks(2) {
            if pair.len() == 1 {
                out.push(self.forward(pair[0]));
                continue;
            }
            let mut z: Spectrum = pair[0]
                .iter()
                .zip(pair[1])
                .map(|(&a, &b)| Complex64::new(a, b))
                .collect();
            self.fft3(&mut z, false);
            let [nx, ny, nz] = self.shape;
            let mut fa = vec![Complex64::default(); z.len()];
            let mut fb = vec![Complex64::default(); z.len()];
            for k in 0..nz {
                let km = (nz - k) % nz;
                for j in 0..ny {
                    let jm = (ny - j) % ny;
                    for i in 0..nx {
                        let im = (nx - i) % nx;
                        let idx = i + nx * (j + ny * k);
                        let zm = z[im + nx * (jm + ny * km)].conj();
                        let zp = z[idx];
                        fa[idx] = (zp + zm) * 0.5;
                        fb[idx] = (zp - zm) * Complex64::new(0.0, -0.5);
                    }
                }
            }
            out.push(fa);
            out.push(fb);
        }
        out
    }

    /// Inverse transform; the imaginary part is discarded.
    pub fn inverse(&self, mut hat: Spectrum) -> Vec<f64> {
        self.fft3(&mut hat, true);
        let norm = 1.0 / hat.len() as f64;
        hat.into_iter().map(|c| c.re * norm).collect()
    }

    /// Inverse transforms of spectra of real fields, two per complex FFT.
    pub fn inverse_many(&self, spectra: Vec<Spectrum>) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(spectra.len());
        let mut it = spectra.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                None => out.push(self.inverse(a)),
                Some(b) => {
                    let mut z: Spectrum = a
                        .iter()
                        .zip(&b)
                        .map(|(x, y)| x + Complex64::new(-y.im, y.re))
                        .collect();
                    self.fft3(&mut z, true);
                    let norm = 1.0 / z.len() as f64;
                    out.push(z.iter().map(|c| c.re * norm).collect());
                    out.push(z.iter().map(|c| c.im * norm).collect());
                }
            }
        }
        out
    }

    /// Applies a pointwise multiplier `m(k_even, k_odd)` to a spectrum.
    pub fn apply(
        &self,
        hat: &[Complex64],
        m: impl Fn([f64; 3], [f64; 3]) -> Complex64,
    ) -> Spectrum {
        let [nx, ny, nz] = self.shape;
        let mut out = Vec::with_capacity(hat.len());
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let ke = [self.k_even[0][i], self.k_even[1][j], self.k_even[2][k]];
                    let ko = [self.k_odd[0][i], self.k_odd[1][j], self.k_odd[2][k]];
                    out.push(hat[out.len()] * m(ke, ko));
                }
            }
        }
        out
    }

    /// Multiplier of the mixed partial derivative with the given orders.
    pub fn derivative_symbol(orders: [u8; 3], ke: [f64; 3], ko: [f64; 3]) -> Complex64 {
        let mut s = Complex64::new(1.0, 0.0);
        for a in 0..3 {
            let o = orders[a];
            let k = if o % 2 == 1 { ko[a] } else { ke[a] };
            s *= ik_pow(k, o);
        }
        s
    }

    pub fn derivative(&self, hat: &[Complex64], orders: [u8; 3]) -> Spectrum {
        self.apply(hat, |ke, ko| Spectral::derivative_symbol(orders, ke, ko))
    }

    /// `|k|²` with Nyquist kept (the symbol of `-Δ`).
    #[inline]
    pub fn k2_even(ke: [f64; 3]) -> f64 {
        ke[0] * ke[0] + ke[1] * ke[1] + ke[2] * ke[2]
    }

    /// Sum over modes of `w(k) |hat|²`, scaled by `1/N` (discrete Parseval).
    pub fn weighted_power(&self, hat: &[Complex64], w: impl Fn([f64; 3], [f64; 3]) -> f64) -> f64 {
        let [nx, ny, nz] = self.shape;
        let mut acc = 0.0;
        let mut idx = 0;
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let ke = [self.k_even[0][i], self.k_even[1][j], self.k_even[2][k]];
                    let ko = [self.k_odd[0][i], self.k_odd[1][j], self.k_odd[2][k]];
                    acc += w(ke, ko) * hat[idx].norm_sqr();
                    idx += 1;
                }
            }
        }
        acc / hat.len() as f64
    }
}

#[inline]
fn ik_pow(k: f64, order: u8) -> Complex64 {
    match order % 4 {
        _ if order == 0 => Complex64::new(1.0, 0.0),
        0 => Complex64::new(k.powi(order as i32), 0.0),
        1 => Complex64::new(0.0, k.powi(order as i32)),
        2 => Complex64::new(-k.powi(order as i32), 0.0),
        _ => Complex64::new(0.0, -k.powi(order as i32)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_pairs() {
        let d = DomainSpec {
            nx: 8,
            ny: 10,
            nz: 12,
            lx: 1.0,
            ly: 2.0,
            lz: 3.0,
            bc_kind: Default::default(),
        };
        let s = Spectral::for_domain(&d);
        let f: Vec<f64> = (0..d.len()).map(|i| ((i * 37 % 101) as f64).sin()).collect();
        let g: Vec<f64> = (0..d.len()).map(|i| ((i * 17 % 89) as f64).cos()).collect();
        let single = [s.forward(&f), s.forward(&g)];
        let pair = s.forward_many(&[&f, &g]);
        for (a, b) in single.iter().zip(&pair) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).norm() < 1e-11);
            }
        }
        let back = s.inverse_many(pair);
        for (x, y) in back[0].iter().zip(&f) {
            assert!((x - y).abs() < 1e-13);
        }
        for (x, y) in back[1].iter().zip(&g) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn ik_powers() {
        assert_eq!(ik_pow(2.0, 0), Complex64::new(1.0, 0.0));
        assert_eq!(ik_pow(2.0, 1), Complex64::new(0.0, 2.0));
        assert_eq!(ik_pow(2.0, 2), Complex64::new(-4.0, 0.0));
        assert_eq!(ik_pow(2.0, 3), Complex64::new(0.0, -8.0));
        assert_eq!(ik_pow(2.0, 4), Complex64::new(16.0, 0.0));
    }
}
