//! Second-order finite differences on box (node-based) grids.

use crate::grid::domain::DomainSpec;

/// Calls `f(base, stride, n)` for every grid line along `axis`.
pub(crate) fn for_each_line(domain: &DomainSpec, axis: usize, mut f: impl FnMut(usize, usize, usize)) {
    let [sx, sy, sz] = domain.shape();
    let strides = [1, sx, sx * sy];
    let n = [sx, sy, sz][axis];
    let (o1, o2) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let shape = [sx, sy, sz];
    for b in 0..shape[o2] {
        for a in 0..shape[o1] {
            let base = a * strides[o1] + b * strides[o2];
            f(base, strides[axis], n);
        }
    }
}

/// First derivative: centered inside, one-sided second order at the walls.
pub fn d1(data: &[f64], domain: &DomainSpec, axis: usize) -> Vec<f64> {
    let h = domain.spacing()[axis];
    let inv2h = 0.5 / h;
    let mut out = vec![0.0; data.len()];
    for_each_line(domain, axis, |base, s, n| {
        let at = |i: usize| data[base + i * s];
        out[base] = (-3.0 * at(0) + 4.0 * at(1) - at(2)) * inv2h;
        for i in 1..n - 1 {
            out[base + i * s] = (at(i + 1) - at(i - 1)) * inv2h;
        }
        out[base + (n - 1) * s] = (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) * inv2h;
    });
    out
}

/// Second derivative: three-point inside, four-point one-sided at the walls.
pub fn d2(data: &[f64], domain: &DomainSpec, axis: usize) -> Vec<f64> {
    let h = domain.spacing()[axis];
    let inv_h2 = 1.0 / (h * h);
    let mut out = vec![0.0; data.len()];
    for_each_line(domain, axis, |base, s, n| {
        let at = |i: usize| data[base + i * s];
        out[base] = (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) * inv_h2;
        for i in 1..n - 1 {
            out[base + i * s] = (at(i + 1) - 2.0 * at(i) + at(i - 1)) * inv_h2;
        }
        out[base + (n - 1) * s] =
            (2.0 * at(n - 1) - 5.0 * at(n - 2) + 4.0 * at(n - 3) - at(n - 4)) * inv_h2;
    });
    out
}

/// Second derivative with mirrored ghost nodes (`f[-1] = f[1]`), i.e. a
/// homogeneous Neumann condition at both walls.
pub fn d2_neumann(data: &[f64], domain: &DomainSpec, axis: usize, out: &mut [f64]) {
    let h = domain.spacing()[axis];
    let inv_h2 = 1.0 / (h * h);
    for_each_line(domain, axis, |base, s, n| {
        let at = |i: usize| data[base + i * s];
        out[base] += 2.0 * (at(1) - at(0)) * inv_h2;
        for i in 1..n - 1 {
            out[base + i * s] += (at(i + 1) - 2.0 * at(i) + at(i - 1)) * inv_h2;
        }
        out[base + (n - 1) * s] += 2.0 * (at(n - 2) - at(n - 1)) * inv_h2;
    });
}

/// Neumann Laplacian (mirrored ghosts on every wall).
pub fn laplacian_neumann(data: &[f64], domain: &DomainSpec) -> Vec<f64> {
    let mut out = vec![0.0; data.len()];
    for axis in 0..3 {
        d2_neumann(data, domain, axis, &mut out);
    }
    out
}

/// Seven-point Laplacian at interior nodes, treating wall values as given
/// Dirichlet data. Wall entries of the result are zero.
pub fn laplacian_dirichlet(data: &[f64], domain: &DomainSpec) -> Vec<f64> {
    let [sx, sy, sz] = domain.shape();
    let h = domain.spacing();
    let c = h.map(|v| 1.0 / (v * v));
    let strides = [1, sx, sx * sy];
    let mut out = vec![0.0; data.len()];
    for k in 1..sz - 1 {
        for j in 1..sy - 1 {
            for i in 1..sx - 1 {
                let idx = i + sx * (j + sy * k);
                let mut acc = 0.0;
                for a in 0..3 {
                    let s = strides[a];
                    acc += (data[idx + s] - 2.0 * data[idx] + data[idx - s]) * c[a];
                }
                out[idx] = acc;
            }
        }
    }
    out
}

/// Centered divergence at interior nodes; wall entries are zero.
pub fn div_interior(u: [&[f64]; 3], domain: &DomainSpec) -> Vec<f64> {
    let [sx, sy, sz] = domain.shape();
    let h = domain.spacing();
    let strides = [1, sx, sx * sy];
    let mut out = vec![0.0; u[0].len()];
    for k in 1..sz - 1 {
        for j in 1..sy - 1 {
            for i in 1..sx - 1 {
                let idx = i + sx * (j + sy * k);
                let mut acc = 0.0;
                for a in 0..3 {
                    let s = strides[a];
                    acc += (u[a][idx + s] - u[a][idx - s]) * (0.5 / h[a]);
                }
                out[idx] = acc;
            }
        }
    }
    out
}

/// Centered gradient at interior nodes of a potential that is extended by
/// zero outside the interior. This is minus the adjoint of [`div_interior`].
pub fn grad_interior(phi: &[f64], domain: &DomainSpec) -> [Vec<f64>; 3] {
    let [sx, sy, sz] = domain.shape();
    let h = domain.spacing();
    let strides = [1, sx, sx * sy];
    let shape = [sx, sy, sz];
    let mut out: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; phi.len()]);
    for k in 1..sz - 1 {
        for j in 1..sy - 1 {
            for i in 1..sx - 1 {
                let idx = i + sx * (j + sy * k);
                let pos = [i, j, k];
                for a in 0..3 {
                    let s = strides[a];
                    let hi = if pos[a] + 1 < shape[a] - 1 { phi[idx + s] } else { 0.0 };
                    let lo = if pos[a] > 1 { phi[idx - s] } else { 0.0 };
                    out[a][idx] = (hi - lo) * (0.5 / h[a]);
                }
            }
        }
    }
    out
}
