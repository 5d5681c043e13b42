use crate::grid::domain::DomainSpec;
use crate::grid::fd::for_each_line;
use crate::grid::field::{QTensorField, VelocityField};
use crate::state::SimState;

/// Zeroes the velocity on every wall of a box domain.
pub fn zero_wall_velocity(u: &mut VelocityField) {
    let domain = *u.domain();
    if domain.is_periodic() {
        return;
    }
    for c in 0..3 {
        let data = u.comp_mut(c);
        for (idx, v) in data.iter_mut().enumerate() {
            if domain.on_wall(idx) {
                *v = 0.0;
            }
        }
    }
}

/// Resets wall values so the one-sided second-order normal derivative
/// vanishes: `f_0 = (4 f_1 - f_2) / 3` on every face.
///
/// The face updates along different axes commute, so the result does not
/// depend on axis order and a second application changes nothing.
pub fn neumann_fix(q: &mut QTensorField) {
    let domain: DomainSpec = *q.domain();
    if domain.is_periodic() {
        return;
    }
    for c in 0..5 {
        let data = q.comp_mut(c);
        for axis in 0..3 {
            for_each_line(&domain, axis, |base, s, n| {
                data[base] = (4.0 * data[base + s] - data[base + 2 * s]) / 3.0;
                let last = base + (n - 1) * s;
                data[last] = (4.0 * data[last - s] - data[last - 2 * s]) / 3.0;
            });
        }
    }
}

/// No-slip velocity and homogeneous Neumann Q on box domains; identity on
/// periodic ones.
pub fn apply_bcs(mut state: SimState) -> SimState {
    zero_wall_velocity(&mut state.u);
    neumann_fix(&mut state.q);
    state
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::fd;

    #[test]
    fn walls_zeroed_and_idempotent() {
        let d = DomainSpec::boxed(8, 1.0);
        let u = VelocityField::from_fn(d, |x| [1.0 + x[0], x[1], 2.0]);
        let q = QTensorField::from_fn(d, |x| [x[0], x[0] * x[1], 0.0, x[2] * x[2], 1.0]);
        let s = apply_bcs(SimState::new(u, q, 0.0).unwrap());
        for i in 0..d.len() {
            if d.on_wall(i) {
                assert_eq!(s.u.at(i), [0.0; 3]);
            }
        }
        let again = apply_bcs(s.clone());
        for c in 0..5 {
            for (a, b) in again.q.comp(c).iter().zip(s.q.comp(c)) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn linear_profile_gets_zero_normal_derivative() {
        let d = DomainSpec::boxed(16, 1.0);
        let mut q = QTensorField::from_fn(d, |x| [x[0], 0.0, 0.0, 0.0, 0.0]);
        neumann_fix(&mut q);
        let g = fd::d1(q.comp(0), &d, 0);
        let [sx, _, _] = d.shape();
        let h = d.spacing()[0];
        for idx in 0..d.len() {
            let i = d.unindex(idx)[0];
            if i == 0 || i == sx - 1 {
                assert!(g[idx].abs() <= h * h, "{}", g[idx]);
            }
        }
    }

    #[test]
    fn periodic_is_noop() {
        let d = DomainSpec::periodic(8, 1.0);
        let u = VelocityField::from_fn(d, |x| [x[0], 1.0, 0.0]);
        let s = SimState::new(u.clone(), QTensorField::zeros(d), 0.0).unwrap();
        assert_eq!(apply_bcs(s).u, u);
    }
}
