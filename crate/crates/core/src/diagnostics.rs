//! Scalar observables: Landau–de Gennes energy, norms, decay-rate fitting,
//! the damping gate and energy bookkeeping.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluid::{divergence_residual, kinetic_energy};
use crate::grid::field::QTensorField;
use crate::grid::norms::{lp_norm, sobolev_monitor};
use crate::grid::ops::gradient_energy;
use crate::state::SimState;
use crate::tensor::{ModelParams, QTensor};

/// Exponents of the Q norms carried by every record.
pub const Q_NORM_EXPONENTS: [u32; 3] = [2, 4, 6];

pub const CSV_HEADER: &str = "t,kinetic,lg_energy,q_l2,q_l4,q_l6,div_residual,monitor";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// `½ ‖u‖²_{L²}`.
    pub kinetic: f64,
    /// `∫ F_LG`.
    pub lg_energy: f64,
    /// `p -> ‖Q‖_{L^p}`.
    pub q_lp_norms: BTreeMap<u32, f64>,
    pub div_residual: f64,
    /// Sobolev surrogate monitor; only evaluated when requested.
    pub monitor: Option<f64>,
    /// Largest `|tr Q|`; zero by construction.
    pub trace_residual: f64,
}

impl DiagnosticsRecord {
    pub fn total_energy(&self) -> f64 {
        self.kinetic + self.lg_energy
    }

    pub fn q_norm(&self, p: u32) -> f64 {
        self.q_lp_norms.get(&p).copied().unwrap_or(f64::NAN)
    }

    pub fn csv_row(&self) -> String {
        let f = |v: f64| format!("{v:.16e}");
        format!(
            "{},{},{},{},{},{},{},{}",
            f(self.t),
            f(self.kinetic),
            f(self.lg_energy),
            f(self.q_norm(2)),
            f(self.q_norm(4)),
            f(self.q_norm(6)),
            f(self.div_residual),
            self.monitor.map(f).unwrap_or_default(),
        )
    }
}

/// Bulk free-energy density `(a/2) tr Q² - (b/3) tr Q³ + (c/4) (tr Q²)²`.
pub fn bulk_energy_density(q: &QTensor, params: &ModelParams) -> f64 {
    let tr2 = q.trace_sq();
    0.5 * params.a * tr2 - params.b / 3.0 * q.trace_cub() + 0.25 * params.c * tr2 * tr2
}

/// `∫ (L/2)|∇Q|² + bulk density`.
pub fn landau_de_gennes_energy(q: &QTensorField, params: &ModelParams) -> f64 {
    let w = q.domain().weights();
    let bulk: f64 = (0..q.len())
        .map(|i| w[i] * bulk_energy_density(&q.q_at(i), params))
        .sum();
    0.5 * params.l * gradient_energy(q) + bulk
}

/// `a c >= 9 b² / 16` with `a > 0` and `c > 0`.
pub fn damping_condition_check(params: &ModelParams) -> bool {
    params.a > 0.0 && params.c > 0.0 && params.a * params.c >= 9.0 / 16.0 * params.b * params.b
}

/// Decay rate `a - 9b²/(16c)` guaranteed for `‖Q‖_{L^p}` under the damping
/// condition.
pub fn damping_rate_floor(params: &ModelParams) -> f64 {
    params.a - 9.0 * params.b * params.b / (16.0 * params.c)
}

/// Least-squares slope of `-ln(value)` against `t`.
pub fn decay_rate_fit(series: &[(f64, f64)]) -> Result<f64> {
    if series.len() < 8 {
        return Err(Error::domain(format!(
            "decay fit needs at least 8 samples, got {}",
            series.len()
        )));
    }
    if series.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::domain("decay fit needs strictly increasing times"));
    }
    if series.iter().any(|&(_, v)| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::domain("decay fit needs positive finite values"));
    }
    let n = series.len() as f64;
    let tm = series.iter().map(|s| s.0).sum::<f64>() / n;
    let ym = series.iter().map(|s| -s.1.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(t, v) in series {
        sxy += (t - tm) * (-v.ln() - ym);
        sxx += (t - tm) * (t - tm);
    }
    Ok(sxy / sxx)
}

/// [`decay_rate_fit`] over the trailing `fraction` of the series.
pub fn decay_rate_fit_tail(series: &[(f64, f64)], fraction: f64) -> Result<f64> {
    let keep = ((series.len() as f64 * fraction).ceil() as usize).clamp(1, series.len());
    decay_rate_fit(&series[series.len() - keep..])
}

/// `(E_next - E_prev) / dt` with `E = kinetic + lg_energy`.
pub fn energy_budget(prev: &DiagnosticsRecord, next: &DiagnosticsRecord, dt: f64) -> f64 {
    (next.total_energy() - prev.total_energy()) / dt
}

/// Builds the record for a state. `div_residual` defaults to a fresh
/// measurement when `None`.
pub fn record(
    state: &SimState,
    params: &ModelParams,
    div_residual: Option<f64>,
    with_monitor: bool,
) -> Result<DiagnosticsRecord> {
    let mut q_lp_norms = BTreeMap::new();
    for p in Q_NORM_EXPONENTS {
        q_lp_norms.insert(p, lp_norm(&state.q, p as f64)?);
    }
    let monitor = if with_monitor {
        Some(sobolev_monitor(&state.u, &state.q, params)?)
    } else {
        None
    };
    Ok(DiagnosticsRecord {
        t: state.t,
        kinetic: kinetic_energy(&state.u),
        lg_energy: landau_de_gennes_energy(&state.q, params),
        q_lp_norms,
        div_residual: div_residual.unwrap_or_else(|| divergence_residual(&state.u)),
        monitor,
        trace_residual: state.q.trace_residual(),
    })
}

pub fn write_csv<W: Write>(mut w: W, records: &[DiagnosticsRecord]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}
