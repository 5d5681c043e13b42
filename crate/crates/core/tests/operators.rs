//! Grid operators, norms, boundary conditions and snapshots against
//! analytic derivatives and refinement studies.

use std::f64::consts::PI;

use proptest::prelude::*;
use qtf_core::grid::bc::apply_bcs;
use qtf_core::grid::field::{mat_slot, MatrixField};
use qtf_core::grid::ops::{div_mat, div_vec, grad, grad_q, laplacian, partial};
use qtf_core::grid::snapshot::{load_snapshot, read_field, save_snapshot, write_snapshot};
use qtf_core::grid::{derivative_norm, lp_norm, sobolev_monitor};
use qtf_core::*;

fn max_err(a: &ScalarField, f: impl Fn([f64; 3]) -> f64) -> f64 {
    let d = a.domain();
    (0..a.len()).map(|i| (a.data()[i] - f(d.coords(i))).abs()).fold(0.0, f64::max)
}

#[test]
fn spectral_gradient_of_sine_is_exact() {
    let lx = 3.0;
    let mut d = DomainSpec::periodic(16, 2.0);
    d.lx = lx;
    let f = ScalarField::from_fn(d, |x| [(2.0 * PI * x[0] / lx).sin()]);
    let g = grad(&f);
    let gx = ScalarField::from_data(d, g.comp(0).to_vec());
    assert!(max_err(&gx, |x| 2.0 * PI / lx * (2.0 * PI * x[0] / lx).cos()) < 1e-13);
    assert!(g.comp(1).iter().chain(g.comp(2)).all(|v| v.abs() < 1e-13));
}

fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

#[test]
fn box_gradient_of_quadratic_and_smooth_profile() {
    // x² is reproduced exactly by the second-order stencils.
    let d = DomainSpec::boxed(8, 1.0);
    let f = ScalarField::from_fn(d, |x| [x[0] * x[0]]);
    let gx = ScalarField::from_data(d, grad(&f).comp(0).to_vec());
    assert!(max_err(&gx, |x| 2.0 * x[0]) < 1e-12);

    // A non-polynomial profile exposes the truncation order.
    let err = |n: usize| {
        let d = DomainSpec::boxed(n, 1.0);
        let f = ScalarField::from_fn(d, |x| [(2.0 * x[0]).exp() * x[1].sin()]);
        let g = grad(&f);
        let gx = ScalarField::from_data(d, g.comp(0).to_vec());
        let gy = ScalarField::from_data(d, g.comp(1).to_vec());
        max_err(&gx, |x| 2.0 * (2.0 * x[0]).exp() * x[1].sin())
            .max(max_err(&gy, |x| (2.0 * x[0]).exp() * x[1].cos()))
    };
    let (e16, e32) = (err(16), err(32));
    assert!(observed_order(e16, e32) >= 1.9, "{e16} {e32}");
}

#[test]
fn divergence_and_laplacian_examples() {
    let d = DomainSpec::periodic(16, 2.0 * PI);
    let c = VelocityField::from_fn(d, |_| [1.0, -2.0, 0.5]);
    assert!(div_vec(&c).max_abs() < 1e-13);
    let k = 3.0;
    let u = VelocityField::from_fn(d, |x| [(k * x[0]).sin(), 0.0, 0.0]);
    assert!(max_err(&div_vec(&u), |x| k * (k * x[0]).cos()) < 1e-12);
    let f = ScalarField::from_fn(d, |x| [(k * x[0]).sin()]);
    assert!(max_err(&laplacian(&f), |x| -k * k * (k * x[0]).sin()) < 1e-12);
}

#[test]
fn div_mat_contracts_second_index() {
    let d = DomainSpec::periodic(16, 2.0 * PI);
    // T_{αβ} = δ_{α0} sin(x_β): (div T)_0 = Σ_β cos(x_β), others zero.
    let mut t = MatrixField::zeros(d);
    for i in 0..d.len() {
        let x = d.coords(i);
        for b in 0..3 {
            t.comp_mut(mat_slot(0, b))[i] = x[b].sin();
        }
    }
    let f = div_mat(&t);
    let f0 = ScalarField::from_data(d, f.comp(0).to_vec());
    assert!(max_err(&f0, |x| x[0].cos() + x[1].cos() + x[2].cos()) < 1e-12);
    assert!(f.comp(1).iter().chain(f.comp(2)).all(|v| v.abs() < 1e-12));
}

#[test]
fn periodic_div_grad_is_laplacian_per_mode() {
    let d = DomainSpec::periodic(16, 2.0 * PI);
    for (kx, ky, kz) in [(1.0, 0.0, 0.0), (2.0, 3.0, 0.0), (1.0, 5.0, 7.0), (4.0, 4.0, 4.0)] {
        let f = ScalarField::from_fn(d, |x| [(kx * x[0] + ky * x[1] + kz * x[2]).cos()]);
        let dg = div_vec(&grad(&f));
        let lap = laplacian(&f);
        let err = dg.lincomb(1.0, -1.0, &lap).unwrap().max_abs();
        assert!(err <= 1e-12 * lap.max_abs().max(1.0), "mode ({kx},{ky},{kz}): {err}");
    }
}

#[test]
fn box_summation_by_parts_is_second_order() {
    // g has zero normal component on the walls, so the continuous boundary
    // term vanishes and the discrete defect must be O(h²).
    let defect = |n: usize| {
        let d = DomainSpec::boxed(n, 1.0);
        let f = ScalarField::from_fn(d, |x| [(x[0] + 2.0 * x[1]).cos() + x[2]]);
        let g = VelocityField::from_fn(d, |x| {
            let s = |t: f64| (PI * t).sin();
            [s(x[0]) * x[1], s(x[1]) * (x[2] + x[0]).cos(), s(x[2]) * x[0].exp()]
        });
        let w = d.weights();
        let gf = grad(&f);
        let dg = div_vec(&g);
        let a: f64 = (0..d.len())
            .map(|i| w[i] * (0..3).map(|c| gf.comp(c)[i] * g.comp(c)[i]).sum::<f64>())
            .sum();
        let b: f64 = (0..d.len()).map(|i| w[i] * f.data()[i] * dg.data()[i]).sum();
        (a + b).abs()
    };
    let (e8, e16, e32) = (defect(8), defect(16), defect(32));
    assert!(e32 < e16 && e16 < e8);
    assert!(observed_order(e16, e32) >= 1.8, "{e8} {e16} {e32}");
}

#[test]
fn box_laplacian_converges_at_second_order() {
    let err = |n: usize| {
        let d = DomainSpec::boxed(n, 1.0);
        let f = ScalarField::from_fn(d, |x| [(x[0] * 2.0).sin() * (x[1] + x[2]).cos()]);
        max_err(&laplacian(&f), |x| -6.0 * (x[0] * 2.0).sin() * (x[1] + x[2]).cos())
    };
    let (e16, e32) = (err(16), err(32));
    assert!(observed_order(e16, e32) >= 1.9, "{e16} {e32}");
}

#[test]
fn norm_examples() {
    let d = DomainSpec::periodic(8, 1.0);
    let q = QTensorField::uniform(d, QTensor::diag(1.0, 1.0));
    assert!((lp_norm(&q, 2.0).unwrap() - 6f64.sqrt()).abs() < 1e-14);
    assert!((lp_norm(&q, f64::INFINITY).unwrap() - 6f64.sqrt()).abs() < 1e-14);
    assert!(lp_norm(&q, 0.5).is_err());

    let mut p = ModelParams::default();
    p.r_exp = 2.0;
    let m = sobolev_monitor(&VelocityField::zeros(d), &q, &p).unwrap();
    assert!((m - 6f64.sqrt()).abs() < 1e-13);
}

#[test]
fn monitor_of_sine_mode_matches_analytic_norms() {
    // Q = A sin(x) Q̂ with |Q̂| = 1 on [0, 2π]³: every ‖∂ˣˢQ‖_{L²} equals
    // A (4π³)^{1/2}, and only pure x-derivatives survive.
    let d = DomainSpec::periodic(16, 2.0 * PI);
    let amp = 0.3;
    let qhat = QTensor::new(0.2, -0.4, 0.1, 0.5, 0.3);
    let qhat = qhat * (1.0 / qhat.norm());
    let q = QTensorField::from_fn(d, |x| (qhat * (amp * x[0].sin())).components());
    let mut p = ModelParams::default();
    p.q_exp = 2.0;
    p.r_exp = 2.0;
    let each = amp * (4.0 * PI.powi(3)).sqrt();
    for s in 0..=3 {
        assert!((derivative_norm(&q, s, 2.0).unwrap() - each).abs() < 1e-8 * each);
    }
    let m = sobolev_monitor(&VelocityField::zeros(d), &q, &p).unwrap();
    assert!((m - 4.0 * each).abs() < 1e-8);

    // Velocity sin(y) e_x: ‖u‖ = ‖∇u‖ = ‖∇²u‖ = (4π³)^{1/2}.
    let u = VelocityField::from_fn(d, |x| [x[1].sin(), 0.0, 0.0]);
    let m = sobolev_monitor(&u, &QTensorField::zeros(d), &p).unwrap();
    assert!((m - 3.0 * (4.0 * PI.powi(3)).sqrt()).abs() < 1e-8);
}

#[test]
fn bcs_zero_walls_and_flatten_linear_profiles() {
    let d = DomainSpec::boxed(16, 1.0);
    let u = VelocityField::from_fn(d, |x| [1.0 + x[0], x[1] * x[2], 2.0]);
    let q = QTensorField::from_fn(d, |x| (QTensor::diag(1.0, -0.5) * (1.0 + x[0])).components());
    let s = apply_bcs(SimState::new(u, q, 0.0).unwrap());
    for i in 0..d.len() {
        if d.on_wall(i) {
            assert_eq!(s.u.at(i), [0.0; 3]);
        }
    }
    // One-sided second-order normal derivative at the x faces vanishes.
    let h = d.spacing()[0];
    let [sx, _, _] = d.shape();
    for (j, k) in [(3, 4), (8, 8), (15, 1)] {
        let v = |i: usize| s.q.comp(0)[d.index(i, j, k)];
        let lo = (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * h);
        let hi = (3.0 * v(sx - 1) - 4.0 * v(sx - 2) + v(sx - 3)) / (2.0 * h);
        assert!(lo.abs() < 1e-12 && hi.abs() < 1e-12);
    }
    let again = apply_bcs(s.clone());
    assert_eq!(again, s);
}

#[test]
fn snapshots_round_trip_bit_exactly() {
    let d = DomainSpec::boxed(8, 1.3);
    let q = QTensorField::from_fn(d, |x| [x[0].sin(), 1e-300, -x[1], f64::MIN_POSITIVE, 1.0 / 3.0]);
    let mut buf = Vec::new();
    write_snapshot(&mut buf, "Q", &q, 0.125).unwrap();
    let (header, back) = read_field::<_, 5>(&buf[..]).unwrap();
    assert_eq!(header.time, 0.125);
    assert_eq!(header.field, "Q");
    for c in 0..5 {
        let a: Vec<u64> = q.comp(c).iter().map(|v| v.to_bits()).collect();
        let b: Vec<u64> = back.comp(c).iter().map(|v| v.to_bits()).collect();
        assert_eq!(a, b);
    }
    // Truncated and padded payloads are rejected.
    assert!(read_field::<_, 5>(&buf[..buf.len() - 1]).is_err());
    let mut long = buf.clone();
    long.push(0);
    assert!(read_field::<_, 5>(&long[..]).is_err());
    assert!(read_field::<_, 3>(&buf[..]).is_err());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.bin");
    save_snapshot(&path, "Q", &q, 0.5).unwrap();
    let (_, loaded) = load_snapshot::<5>(&path).unwrap();
    assert_eq!(loaded, q);
}

#[test]
fn q_gradient_components_are_trace_free() {
    let d = DomainSpec::periodic(8, 2.0 * PI);
    let q = QTensorField::from_fn(d, |x| [x[0].sin(), x[1].cos(), 0.0, (x[2] + x[0]).sin(), 0.2]);
    for g in grad_q(&q) {
        assert_eq!(g.trace_residual(), 0.0);
    }
}

fn smooth_scalar(d: DomainSpec, c: [f64; 4]) -> ScalarField {
    ScalarField::from_fn(d, move |x| {
        [c[0] * x[0].sin() + c[1] * (x[1] + x[2]).cos() + c[2] * (2.0 * x[2]).sin() * x[0].cos() + c[3]]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn operators_are_linear(
        a in -3.0f64..3.0, b in -3.0f64..3.0,
        cf in prop::array::uniform4(-1.0f64..1.0), cg in prop::array::uniform4(-1.0f64..1.0),
        periodic in any::<bool>(),
    ) {
        let d = if periodic { DomainSpec::periodic(8, 2.0 * PI) } else { DomainSpec::boxed(8, 2.0) };
        let (f, g) = (smooth_scalar(d, cf), smooth_scalar(d, cg));
        let comb = f.lincomb(a, b, &g).unwrap();
        for orders in [[1, 0, 0], [0, 2, 0], [1, 1, 1], [0, 0, 3]] {
            let lhs = partial(&comb, orders);
            let rhs = partial(&f, orders).lincomb(a, b, &partial(&g, orders)).unwrap();
            let scale = lhs.max_abs().max(1.0);
            prop_assert!(lhs.lincomb(1.0, -1.0, &rhs).unwrap().max_abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn lp_norm_is_homogeneous_and_monotone(
        cf in prop::array::uniform4(-1.0f64..1.0), s in -10.0f64..10.0, p in 1.0f64..8.0,
    ) {
        let d = DomainSpec::periodic(8, 2.0 * PI);
        let f = smooth_scalar(d, cf);
        let n = lp_norm(&f, p).unwrap();
        prop_assert!((lp_norm(&f.scaled(s), p).unwrap() - s.abs() * n).abs() <= 1e-12 * n.max(1e-300) * s.abs().max(1.0));
        // |f| <= |f| + 1 pointwise.
        let bigger = ScalarField::from_data(d, f.data().iter().map(|v| v.abs() + 1.0).collect());
        prop_assert!(lp_norm(&bigger, p).unwrap() >= n);
    }
}
