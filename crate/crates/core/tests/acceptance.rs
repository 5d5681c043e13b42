//! Acceptance criteria, one line of output each. Runs as a plain binary so
//! that every criterion reports even when an earlier one fails.

use std::f64::consts::PI;
use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use serde_json::json;

use qtf_core::coupled::{self, picard_solve};
use qtf_core::fluid::{divergence_residual, momentum_step};
use qtf_core::grid::lp_norm;
use qtf_core::qtensor::q_step;
use qtf_core::runner::initial::build_initial_state;
use qtf_core::runner::*;
use qtf_core::verify;
use qtf_core::*;

struct Report {
    lines: Vec<(u32, bool, String)>,
    /// Largest divergence residual seen per boundary kind, over every
    /// accepted step of every run below.
    div_periodic: f64,
    div_box: f64,
}

impl Report {
    fn line(&mut self, n: u32, ok: bool, detail: String) {
        self.lines.push((n, ok, detail));
    }

    fn note_div(&mut self, d: &DomainSpec, residual: f64) {
        let slot = if d.is_periodic() { &mut self.div_periodic } else { &mut self.div_box };
        *slot = slot.max(residual);
    }

    fn run(&mut self, config: &RunConfig) -> RunOutput {
        let out = run_in_memory(config).expect("acceptance run failed");
        self.note_div(&config.domain, out.summary.max_div_residual);
        out
    }
}

fn random_smooth(amplitude: f64, velocity: f64, seed: u64) -> InitialCondition {
    InitialCondition::RandomSmooth {
        seed,
        amplitude,
        cutoff_mode: 4,
        velocity_amplitude: Some(velocity),
    }
}

fn lemma_suite(r: &mut Report) {
    let start = Instant::now();
    let c = verify::check_cubic_trace_bound(100_000).unwrap();
    let secs = start.elapsed().as_secs_f64();
    r.line(
        1,
        c.passed && secs < 10.0,
        format!("{} cases, worst excess/tol {:.2e}, {secs:.2} s", c.cases, c.worst),
    );
}

fn decay_rate(r: &mut Report) {
    let mut c = RunConfig::new(DomainSpec::periodic(32, 2.0 * PI), 1e-3, 5.0);
    c.params = ModelParams::with_bulk(1.0, 0.5, 1.0);
    c.initial_condition = random_smooth(0.1, 0.0, 2024);
    c.monitor_stride = 0;
    let out = r.run(&c);
    let floor = diagnostics::damping_rate_floor(&c.params) * 0.95;
    let rate = out.summary.decay_rate.unwrap_or(f64::NAN);
    let mut monotone = true;
    for w in out.records.windows(2) {
        for p in diagnostics::Q_NORM_EXPONENTS {
            monotone &= w[1].q_norm(p) <= w[0].q_norm(p) * (1.0 + 1e-12);
        }
    }
    r.line(
        2,
        rate >= floor && monotone && out.summary.complete,
        format!("rate {rate:.4} >= {floor:.4}, L^p non-increasing every step: {monotone}"),
    );
}

fn cancellation(r: &mut Report) {
    let start = Instant::now();
    let c = verify::check_rotation_cancellation(10_000).unwrap();
    let secs = start.elapsed().as_secs_f64();
    r.line(
        3,
        c.passed && secs < 1.0,
        format!("{} pairs, worst |value|/bound {:.2e}, {secs:.3} s", c.cases, c.worst),
    );
}

fn energy(r: &mut Report) {
    let dt = 1e-3;
    let mut c = RunConfig::new(DomainSpec::periodic(24, 2.0 * PI), dt, 1.0);
    c.params = ModelParams::with_bulk(1.0, 0.5, 1.0);
    c.initial_condition = random_smooth(0.05, 0.05, 7);
    c.monitor_stride = 0;
    let out = r.run(&c);
    let e0 = out.records[0].total_energy();
    let tol = 5.0 * dt * dt * (1.0 + e0);
    let inc = out.summary.max_energy_increase;
    r.line(
        4,
        inc <= tol && out.records.len() == 1001,
        format!("largest per-step increase {inc:.3e} <= {tol:.3e} (E0 = {e0:.4e})"),
    );
}

fn box_run(r: &mut Report) {
    let mut c = RunConfig::new(DomainSpec::boxed(16, 1.0), 1e-3, 0.1);
    c.initial_condition = random_smooth(0.2, 0.2, 11);
    c.monitor_stride = 0;
    r.run(&c);
}

fn incompressibility(r: &mut Report) {
    let ok = r.div_periodic <= 1e-12 && r.div_box <= 1e-10;
    r.line(
        5,
        ok,
        format!(
            "max residual periodic {:.2e} <= 1e-12, box {:.2e} <= 1e-10",
            r.div_periodic, r.div_box
        ),
    );
}

/// Steady no-slip vortex on `[0, π]³`, `u = curl(0, 0, sin²x sin²y sin²z)`,
/// held in place by the forcing `(u·∇)u - νΔu`.
fn vortex_du(i: usize, o: [u8; 3], x: [f64; 3]) -> f64 {
    let s2 = |t: f64, n: u8| match n {
        0 => t.sin().powi(2),
        1 => (2.0 * t).sin(),
        _ => 2.0 * (2.0 * t).cos(),
    };
    let s1 = |t: f64, n: u8| match n {
        0 => (2.0 * t).sin(),
        1 => 2.0 * (2.0 * t).cos(),
        _ => -4.0 * (2.0 * t).sin(),
    };
    match i {
        0 => s2(x[0], o[0]) * s1(x[1], o[1]) * s2(x[2], o[2]),
        1 => -s1(x[0], o[0]) * s2(x[1], o[1]) * s2(x[2], o[2]),
        _ => 0.0,
    }
}

fn vortex_forcing(x: [f64; 3], nu: f64) -> [f64; 3] {
    let unit = |a: usize, k: u8| {
        let mut o = [0u8; 3];
        o[a] = k;
        o
    };
    std::array::from_fn(|i| {
        (0..3)
            .map(|j| vortex_du(j, [0; 3], x) * vortex_du(i, unit(j, 1), x) - nu * vortex_du(i, unit(j, 2), x))
            .sum()
    })
}

fn order(r: &mut Report) {
    let params = ModelParams::default();
    let dt = 1e-3;

    // Periodic Taylor–Green: exactly 1/(1 + 2ν dt) per step.
    let mut tg_err: f64 = 0.0;
    for n in [16, 32] {
        let d = DomainSpec::periodic(n, 2.0 * PI);
        let u0 = VelocityField::from_fn(d, |x| [x[0].sin() * x[1].cos(), -x[0].cos() * x[1].sin(), 0.0]);
        let mut u = u0.clone();
        for _ in 0..20 {
            let (next, _, rep) = momentum_step(&u, &VelocityField::zeros(d), dt, &params).unwrap();
            r.note_div(&d, rep.div_residual);
            u = next;
        }
        let factor = (1.0 + 2.0 * dt).powi(-20);
        tg_err = tg_err.max(u.lincomb(1.0, -factor, &u0).unwrap().max_abs());
    }

    // Box momentum: manufactured vortex.
    let vortex_err = |n: usize, r: &mut Report| {
        let d = DomainSpec::boxed(n, PI);
        let exact = VelocityField::from_fn(d, |x| [vortex_du(0, [0; 3], x), vortex_du(1, [0; 3], x), 0.0]);
        let force = VelocityField::from_fn(d, |x| vortex_forcing(x, params.nu));
        let mut u = exact.clone();
        for _ in 0..20 {
            let (next, _, rep) = momentum_step(&u, &force, 0.01, &params).unwrap();
            r.note_div(&d, rep.div_residual);
            u = next;
        }
        u.lincomb(1.0, -1.0, &exact).unwrap().max_abs()
    };
    let (m16, m32) = (vortex_err(16, r), vortex_err(32, r));
    let momentum_order = (m16 / m32).log2();

    // Q diffusion: periodic against the implicit recurrence, box Neumann by refinement.
    let mut diff = ModelParams::with_bulk(0.0, 0.0, 1.0);
    diff.c = 0.0;
    let qhat = QTensor::new(0.5, -0.2, 0.1, 0.3, 0.7);
    let mut qp_err: f64 = 0.0;
    for n in [16, 32] {
        let d = DomainSpec::periodic(n, 2.0 * PI);
        let q0 = QTensorField::from_fn(d, |x| (qhat * ((2.0 * x[0]).sin() * x[2].cos())).components());
        let mut q = q0.clone();
        for _ in 0..10 {
            q = q_step(&q, &VelocityField::zeros(d), 0.01, &diff).unwrap();
        }
        let factor = (1.0 + 5.0 * 0.01f64).powi(-10);
        qp_err = qp_err.max(q.lincomb(1.0, -factor, &q0).unwrap().max_abs());
    }
    let qbox_err = |n: usize| {
        let d = DomainSpec::boxed(n, 1.0);
        let q0 = QTensorField::from_fn(d, |x| (qhat * ((PI * x[0]).cos() * (PI * x[1]).cos())).components());
        let mut q = q0.clone();
        for _ in 0..10 {
            q = q_step(&q, &VelocityField::zeros(d), 0.005, &diff).unwrap();
        }
        let factor = (1.0 + 2.0 * PI * PI * 0.005).powi(-10);
        q.lincomb(1.0, -factor, &q0).unwrap().max_abs()
    };
    let q_order = (qbox_err(16) / qbox_err(32)).log2();

    let ok = tg_err <= 1e-10 && qp_err <= 1e-10 && momentum_order >= 1.9 && q_order >= 1.9;
    r.line(
        6,
        ok,
        format!(
            "periodic errors TG {tg_err:.1e}, Q {qp_err:.1e}; box orders momentum {momentum_order:.2}, Q {q_order:.2}"
        ),
    );
}

fn distance(a: &SimState, b: &SimState) -> f64 {
    lp_norm(&a.u.lincomb(1.0, -1.0, &b.u).unwrap(), 2.0).unwrap()
        + lp_norm(&a.q.lincomb(1.0, -1.0, &b.q).unwrap(), 2.0).unwrap()
}

fn picard(r: &mut Report) {
    let d = DomainSpec::periodic(16, 2.0 * PI);
    let params = ModelParams::default();
    let s0 = build_initial_state(d, &random_smooth(0.1, 0.1, 5)).unwrap();
    let (dt, tol) = (1e-3, 1e-10);
    let (traj, rep) = picard_solve(&s0, 32.0 * dt, dt, &params, tol, 20).unwrap();
    for s in &traj {
        r.note_div(&d, divergence_residual(&s.u));
    }
    let (_, half) = picard_solve(&s0, 16.0 * dt, dt, &params, tol, 20).unwrap();

    let mut direct = s0.clone();
    for _ in 0..32 {
        let (next, rec) = coupled::step(&direct, dt, &params).unwrap();
        r.note_div(&d, rec.div_residual);
        direct = next;
    }
    let gap = distance(traj.last().unwrap(), &direct);
    let contracting = rep.ratios.iter().skip(1).all(|&q| q < 1.0);
    let shrinks = half.max_ratio() < rep.max_ratio();
    let ok = contracting && rep.converged && gap <= tol.max(2.0 * dt) && shrinks;
    r.line(
        7,
        ok,
        format!(
            "{} iterates, max ratio {:.3} (half window {:.3}), endpoint gap {gap:.1e}",
            rep.iters,
            rep.max_ratio(),
            half.max_ratio()
        ),
    );
}

fn boundedness(r: &mut Report) {
    let d = DomainSpec::periodic(16, 2.0 * PI);
    let mut c = RunConfig::new(d, 5e-3, 20.0);
    c.params = ModelParams::with_bulk(1.0, 0.5, 1.0);
    c.initial_condition = random_smooth(0.01, 0.01, 13);
    c.record_stride = 10;
    c.monitor_stride = 50;
    let out = r.run(&c);
    let (m0, mmax) = (out.summary.initial_monitor.unwrap(), out.summary.max_monitor.unwrap());
    let bounded = mmax < 2.0 * m0;

    let tmp = tempfile::tempdir().unwrap();
    let mut base = RunConfig::new(d, 1e-3, 0.1);
    base.params = c.params;
    // Velocity amplitude follows the Q amplitude.
    base.initial_condition = InitialCondition::RandomSmooth {
        seed: 13,
        amplitude: 0.01,
        cutoff_mode: 4,
        velocity_amplitude: None,
    };
    base.monitor_stride = 5;
    base.output_dir = tmp.path().to_path_buf();
    let sweep = SweepManifest {
        base,
        axes: vec![SweepAxis {
            path: "initial_condition.amplitude".into(),
            values: vec![json!(0.01), json!(0.1), json!(1.0), json!(10.0)],
        }],
        results: vec![],
    };
    let done = run_sweep(&sweep, 1).unwrap();
    let maxima: Vec<f64> = done
        .results
        .iter()
        .map(|res| {
            let s = res.summary.as_ref().expect("sweep run failed");
            r.note_div(&d, s.max_div_residual);
            s.max_monitor.unwrap()
        })
        .collect();
    let monotone = maxima.windows(2).all(|w| w[1] > w[0]);
    r.line(
        8,
        bounded && monotone,
        format!("monitor max/initial {:.3} < 2; sweep maxima {maxima:?}", mmax / m0),
    );
}

fn determinism(r: &mut Report) {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = RunConfig::new(DomainSpec::periodic(16, 2.0 * PI), 1e-3, 0.05);
    c.initial_condition = random_smooth(0.5, 0.5, 99);
    c.monitor_stride = 10;
    let csv = |name: &str| {
        let dir = tmp.path().join(name);
        let s = run_to_dir(&c, &dir).unwrap();
        fs::read(dir.join("diagnostics.csv")).map(|b| (b, s.max_div_residual)).unwrap()
    };
    let (a, div) = csv("a");
    let (b, _) = csv("b");
    r.note_div(&c.domain, div);
    r.line(9, a == b && !a.is_empty(), format!("{} bytes, identical: {}", a.len(), a == b));
}

fn main() -> ExitCode {
    let mut r = Report {
        lines: Vec::new(),
        div_periodic: 0.0,
        div_box: 0.0,
    };
    lemma_suite(&mut r);
    decay_rate(&mut r);
    cancellation(&mut r);
    energy(&mut r);
    box_run(&mut r);
    order(&mut r);
    picard(&mut r);
    boundedness(&mut r);
    determinism(&mut r);
    incompressibility(&mut r);
    r.lines.sort_by_key(|l| l.0);
    for (n, ok, detail) in &r.lines {
        println!("[{}] criterion {n}: {detail}", if *ok { "PASS" } else { "FAIL" });
    }
    let failures = r.lines.iter().filter(|l| !l.1).count();
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
