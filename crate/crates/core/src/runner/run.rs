//! Single-run driver: stepping loop, diagnostics stream, snapshots and the
//! run manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::coupled::{self, picard_solve_with};
use crate::diagnostics::{decay_rate_fit_tail, record, DiagnosticsRecord, CSV_HEADER};
use crate::error::{Error, Result};
use crate::fluid::divergence_residual;
use crate::grid::norms::sobolev_monitor;
use crate::grid::snapshot::save_snapshot;
use crate::runner::config::{RunConfig, RunMode};
use crate::runner::initial::build_initial_state;
use crate::state::SimState;
use crate::tensor::ModelParams;

/// Deepest recursive halving attempted when a step is rejected.
const MAX_HALVINGS: u32 = 12;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PicardStats {
    pub windows: usize,
    pub total_iters: usize,
    pub max_iters_used: usize,
    pub all_converged: bool,
    pub max_ratio: f64,
    pub max_final_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config_hash: String,
    pub complete: bool,
    pub steps: usize,
    pub t_final: f64,
    pub final_record: Option<DiagnosticsRecord>,
    /// Fitted decay rate of `‖Q‖_{L²}` over the second half of the run,
    /// when the norm stays positive.
    pub decay_rate: Option<f64>,
    pub initial_monitor: Option<f64>,
    pub max_monitor: Option<f64>,
    pub max_div_residual: f64,
    /// Largest increase of `kinetic + lg_energy` between consecutive rows.
    pub max_energy_increase: f64,
    /// Number of step rejections resolved by halving `dt`.
    pub dt_halvings: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub picard: Option<PicardStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: SimState,
    pub summary: RunSummary,
}

/// Contents of `manifest.json` in a run directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub config_hash: String,
    pub complete: bool,
    pub wall_time_s: f64,
    pub summary: RunSummary,
    pub version: String,
}

trait Sink {
    fn record(&mut self, rec: &DiagnosticsRecord) -> Result<()>;
    fn snapshot(&mut self, step: usize, state: &SimState) -> Result<()>;
}

struct NullSink;

impl Sink for NullSink {
    fn record(&mut self, _: &DiagnosticsRecord) -> Result<()> {
        Ok(())
    }
    fn snapshot(&mut self, _: usize, _: &SimState) -> Result<()> {
        Ok(())
    }
}

struct FileSink {
    csv: BufWriter<File>,
    snap_dir: PathBuf,
}

impl FileSink {
    fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let mut csv = BufWriter::new(File::create(dir.join("diagnostics.csv"))?);
        writeln!(csv, "{CSV_HEADER}")?;
        Ok(FileSink {
            csv,
            snap_dir: dir.join("snapshots"),
        })
    }
}

impl Sink for FileSink {
    fn record(&mut self, rec: &DiagnosticsRecord) -> Result<()> {
        writeln!(self.csv, "{}", rec.csv_row())?;
        Ok(())
    }

    fn snapshot(&mut self, step: usize, s: &SimState) -> Result<()> {
        fs::create_dir_all(&self.snap_dir)?;
        let path = |f: &str| self.snap_dir.join(format!("step_{step:06}_{f}.bin"));
        save_snapshot(&path("u"), "u", &s.u, s.t)?;
        save_snapshot(&path("Q"), "Q", &s.q, s.t)?;
        save_snapshot(&path("p"), "p", &s.p, s.t)
    }
}

/// Advances by `dt`, splitting the step in halves (recursively) whenever a
/// stability rule rejects it.
fn advance(
    state: &SimState,
    dt: f64,
    params: &ModelParams,
    depth: u32,
    halvings: &mut usize,
) -> Result<(SimState, DiagnosticsRecord)> {
    match coupled::step(state, dt, params) {
        Err(e) if e.is_step_rejection() && depth < MAX_HALVINGS => {
            *halvings += 1;
            log::debug!("{e}; halving to {}", dt / 2.0);
            let (mid, _) = advance(state, dt / 2.0, params, depth + 1, halvings)?;
            advance(&mid, dt / 2.0, params, depth + 1, halvings)
        }
        other => other,
    }
}

struct Driver<'a> {
    config: &'a RunConfig,
    steps: usize,
    records: Vec<DiagnosticsRecord>,
}

impl Driver<'_> {
    fn wants_monitor(&self, n: usize) -> bool {
        let m = self.config.monitor_stride;
        m > 0 && (n % m == 0 || n == self.steps)
    }

    fn emit(&mut self, n: usize, state: &SimState, mut rec: DiagnosticsRecord, sink: &mut dyn Sink) -> Result<()> {
        if n % self.config.record_stride == 0 || n == self.steps {
            if self.wants_monitor(n) {
                rec.monitor = Some(sobolev_monitor(&state.u, &state.q, &self.config.params)?);
            }
            sink.record(&rec)?;
            self.records.push(rec);
        }
        let s = self.config.snapshot_stride;
        if s > 0 && (n % s == 0 || n == self.steps) {
            sink.snapshot(n, state)?;
        }
        Ok(())
    }
}

fn drive(config: &RunConfig, sink: &mut dyn Sink) -> (RunOutput, Option<Error>) {
    let params = config.params;
    let steps = config.steps();
    let mut driver = Driver {
        config,
        steps,
        records: Vec::new(),
    };
    let mut halvings = 0;
    let mut picard_stats = None;
    let mut done = 0;
    let mut state = SimState::zero(config.domain);

    let result = (|| -> Result<()> {
        state = build_initial_state(config.domain, &config.initial_condition)?;
        let rec0 = record(&state, &params, None, false)?;
        driver.emit(0, &state, rec0, sink)?;
        match config.mode {
            RunMode::Direct => {
                while done < steps {
                    let t_next = if done + 1 == steps {
                        config.t_end
                    } else {
                        (done + 1) as f64 * config.dt
                    };
                    let (mut next, mut rec) = advance(&state, t_next - state.t, &params, 0, &mut halvings)
                        .map_err(|e| Error::Step {
                            step: done + 1,
                            source: Box::new(e),
                        })?;
                    next.t = t_next;
                    rec.t = t_next;
                    done += 1;
                    driver.emit(done, &next, rec, sink)?;
                    state = next;
                }
            }
            RunMode::Picard => {
                let p = config.picard.expect("validated");
                let per_window = (p.window / config.dt).round() as usize;
                let mut stats = PicardStats {
                    all_converged: true,
                    ..Default::default()
                };
                while done < steps {
                    let k = per_window.min(steps - done);
                    let (traj, report) =
                        picard_solve_with(&state, k as f64 * config.dt, config.dt, &params, p.tol, p.max_iters, p.metric)
                            .map_err(|e| Error::Step {
                                step: done + 1,
                                source: Box::new(e),
                            })?;
                    if !report.converged {
                        log::warn!(
                            "Picard window at t = {} stopped after {} iterates with delta {:e}",
                            state.t,
                            report.iters,
                            report.final_delta()
                        );
                    }
                    stats.windows += 1;
                    stats.total_iters += report.iters;
                    stats.max_iters_used = stats.max_iters_used.max(report.iters);
                    stats.all_converged &= report.converged;
                    stats.max_ratio = stats.max_ratio.max(report.max_ratio());
                    stats.max_final_delta = stats.max_final_delta.max(report.final_delta());
                    for s in traj.into_iter().skip(1) {
                        done += 1;
                        let rec = record(&s, &params, Some(divergence_residual(&s.u)), false)?;
                        driver.emit(done, &s, rec, sink)?;
                        state = s;
                    }
                }
                picard_stats = Some(stats);
            }
        }
        Ok(())
    })();

    let error = result.err();
    let records = driver.records;
    let summary = summarize(config, &records, done, halvings, picard_stats, error.as_ref());
    (
        RunOutput {
            records,
            final_state: state,
            summary,
        },
        error,
    )
}

fn summarize(
    config: &RunConfig,
    records: &[DiagnosticsRecord],
    steps: usize,
    dt_halvings: usize,
    picard: Option<PicardStats>,
    error: Option<&Error>,
) -> RunSummary {
    let series: Vec<(f64, f64)> = records.iter().map(|r| (r.t, r.q_norm(2))).collect();
    let decay_rate = if series.len() >= 16 && series.iter().all(|s| s.1 > 0.0) {
        decay_rate_fit_tail(&series, 0.5).ok()
    } else {
        None
    };
    let monitors: Vec<f64> = records.iter().filter_map(|r| r.monitor).collect();
    let max_energy_increase = records
        .windows(2)
        .map(|w| w[1].total_energy() - w[0].total_energy())
        .fold(f64::NEG_INFINITY, f64::max);
    RunSummary {
        config_hash: config.config_hash(),
        complete: error.is_none(),
        steps,
        t_final: records.last().map_or(0.0, |r| r.t),
        final_record: records.last().cloned(),
        decay_rate,
        initial_monitor: monitors.first().copied(),
        max_monitor: monitors.iter().copied().reduce(f64::max),
        max_div_residual: records.iter().map(|r| r.div_residual).fold(0.0, f64::max),
        max_energy_increase: if records.len() > 1 { max_energy_increase } else { 0.0 },
        dt_halvings,
        picard,
        error: error.map(|e| e.to_string()),
    }
}

/// Runs a validated configuration without touching the file system.
pub fn run_in_memory(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    match drive(config, &mut NullSink) {
        (out, None) => Ok(out),
        (_, Some(e)) => Err(e),
    }
}

/// Runs a configuration, writing `diagnostics.csv`, snapshots and
/// `manifest.json` into `dir`. On failure the partial outputs are kept and
/// the manifest is marked incomplete.
pub fn run_to_dir(config: &RunConfig, dir: &Path) -> Result<RunSummary> {
    config.validate()?;
    let start = Instant::now();
    let mut sink = FileSink::create(dir)?;
    let (out, error) = drive(config, &mut sink);
    sink.csv.flush()?;
    let manifest = RunManifest {
        config: config.clone(),
        config_hash: out.summary.config_hash.clone(),
        complete: error.is_none(),
        wall_time_s: start.elapsed().as_secs_f64(),
        summary: out.summary.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let file = BufWriter::new(File::create(dir.join("manifest.json"))?);
    serde_json::to_writer_pretty(file, &manifest)?;
    match error {
        None => Ok(out.summary),
        Some(e) => Err(e),
    }
}

/// [`run_to_dir`] into the configured output directory.
pub fn run_single(config: &RunConfig) -> Result<RunSummary> {
    run_to_dir(config, &config.output_dir)
}

pub fn load_manifest(dir: &Path) -> Result<RunManifest> {
    Ok(serde_json::from_reader(std::io::BufReader::new(File::open(
        dir.join("manifest.json"),
    )?))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::domain::DomainSpec;
    use crate::runner::config::InitialCondition;

    #[test]
    fn zero_run_is_all_zero() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = RunConfig::new(DomainSpec::periodic(8, 1.0), 0.01, 0.05);
        c.snapshot_stride = 2;
        let s = run_to_dir(&c, dir.path()).unwrap();
        assert!(s.complete);
        assert_eq!(s.steps, 5);
        let f = s.final_record.unwrap();
        assert_eq!((f.kinetic, f.lg_energy, f.q_norm(2)), (0.0, 0.0, 0.0));
        assert!((f.t - 0.05).abs() < 1e-15);
        let csv = fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
        assert_eq!(csv.lines().count(), 7);
        assert!(dir.path().join("snapshots/step_000004_Q.bin").exists());
        assert!(dir.path().join("snapshots/step_000005_p.bin").exists());
        let m = load_manifest(dir.path()).unwrap();
        assert!(m.complete);
        assert_eq!(m.config, c);
    }

    #[test]
    fn rejected_steps_are_halved() {
        let mut c = RunConfig::new(DomainSpec::periodic(8, 2.0 * std::f64::consts::PI), 0.5, 1.0);
        c.initial_condition = InitialCondition::SineMode {
            k: 1,
            amplitude: 0.5,
            axis: 0,
        };
        let out = run_in_memory(&c).unwrap();
        assert!(out.summary.dt_halvings > 0);
        assert_eq!(out.records.len(), 3);
        assert!((out.final_state.t - 1.0).abs() < 1e-15);
    }

    #[test]
    fn failure_marks_manifest_incomplete() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = RunConfig::new(DomainSpec::periodic(8, 2.0 * std::f64::consts::PI), 0.1, 0.3);
        // The bulk rule needs more halvings than the driver attempts.
        c.params = ModelParams::with_bulk(-1e6, 0.0, 1.0);
        c.initial_condition = InitialCondition::SineMode {
            k: 1,
            amplitude: 1.0,
            axis: 0,
        };
        let err = run_to_dir(&c, dir.path()).unwrap_err();
        assert!(matches!(err, Error::Step { .. }), "{err}");
        let m = load_manifest(dir.path()).unwrap();
        assert!(!m.complete);
        assert!(m.summary.error.is_some());
    }
}
