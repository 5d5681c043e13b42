//! Run configuration: the JSON schema accepted by `simulate`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coupled::PicardMetric;
use crate::diagnostics::damping_condition_check;
use crate::error::{Error, Result};
use crate::grid::domain::DomainSpec;
use crate::tensor::ModelParams;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    #[default]
    Direct,
    Picard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardSettings {
    /// Window length in time units; a whole number of steps.
    pub window: f64,
    #[serde(default = "default_picard_tol")]
    pub tol: f64,
    #[serde(default = "default_picard_iters")]
    pub max_iters: usize,
    #[serde(default)]
    pub metric: PicardMetric,
}

fn default_picard_tol() -> f64 {
    1e-10
}

fn default_picard_iters() -> usize {
    20
}

/// Initial `(u, Q)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    #[default]
    Zero,
    /// `Q = amplitude · Q̂ · sin(2π k x_axis / L)` on periodic grids and
    /// `cos(π k x_axis / L)` on box grids, with `Q̂ = diag(1, 1, -2)/√6`; `u = 0`.
    SineMode { k: u32, amplitude: f64, axis: usize },
    /// Low-pass filtered noise scaled to the given sup-norm amplitude.
    RandomSmooth {
        seed: u64,
        amplitude: f64,
        cutoff_mode: u32,
        /// Sup norm of the initial velocity; defaults to `amplitude`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        velocity_amplitude: Option<f64>,
    },
}

fn default_stride() -> usize {
    1
}

fn default_monitor_stride() -> usize {
    10
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("qtf-out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSpec,
    #[serde(default)]
    pub params: ModelParams,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub mode: RunMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub picard: Option<PicardSettings>,
    #[serde(default)]
    pub initial_condition: InitialCondition,
    /// Steps between field snapshots; 0 disables them.
    #[serde(default)]
    pub snapshot_stride: usize,
    /// Steps between diagnostics rows.
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    /// Steps between evaluations of the Sobolev monitor (it is costly); 0
    /// disables it. The first and last rows always carry it when enabled.
    #[serde(default = "default_monitor_stride")]
    pub monitor_stride: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl RunConfig {
    /// A direct run with default parameters, zero data and no output files.
    pub fn new(domain: DomainSpec, dt: f64, t_end: f64) -> Self {
        RunConfig {
            domain,
            params: ModelParams::default(),
            dt,
            t_end,
            mode: RunMode::Direct,
            picard: None,
            initial_condition: InitialCondition::Zero,
            snapshot_stride: 0,
            record_stride: 1,
            monitor_stride: default_monitor_stride(),
            output_dir: default_output_dir(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        self.params.validate()?;
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= self.dt) || !self.t_end.is_finite() {
            return Err(Error::Config(format!(
                "t_end = {} must be at least dt = {}",
                self.t_end, self.dt
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::Config("record_stride must be at least 1".into()));
        }
        match self.initial_condition {
            InitialCondition::Zero => {}
            InitialCondition::SineMode { amplitude, axis, .. } => {
                if axis > 2 {
                    return Err(Error::Config(format!("axis must be 0, 1 or 2, got {axis}")));
                }
                if !amplitude.is_finite() {
                    return Err(Error::Config("amplitude must be finite".into()));
                }
            }
            InitialCondition::RandomSmooth {
                amplitude,
                cutoff_mode,
                velocity_amplitude,
                ..
            } => {
                for (name, v) in [("amplitude", Some(amplitude)), ("velocity_amplitude", velocity_amplitude)] {
                    if let Some(v) = v {
                        if !(v >= 0.0) || !v.is_finite() {
                            return Err(Error::Config(format!("{name} must be non-negative, got {v}")));
                        }
                    }
                }
                if cutoff_mode == 0 {
                    return Err(Error::Config("cutoff_mode must be at least 1".into()));
                }
            }
        }
        match (self.mode, &self.picard) {
            (RunMode::Picard, None) => {
                return Err(Error::Config("mode \"picard\" needs a \"picard\" section".into()))
            }
            (RunMode::Picard, Some(p)) => {
                let k = (p.window / self.dt).round();
                if !(p.window > 0.0) || k < 1.0 || (k * self.dt - p.window).abs() > 1e-9 * p.window {
                    return Err(Error::Config(format!(
                        "picard.window = {} must be a positive multiple of dt",
                        p.window
                    )));
                }
                if !(p.tol > 0.0) || p.max_iters == 0 {
                    return Err(Error::Config("picard.tol and picard.max_iters must be positive".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Number of steps to reach `t_end`; the last one may be shorter than `dt`.
    pub fn steps(&self) -> usize {
        ((self.t_end / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    /// SHA-256 of the canonical JSON of the resolved configuration, with the
    /// output directory left out so that relocating a run keeps its identity.
    pub fn config_hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let json = serde_json::to_string(&c).expect("configs always serialize");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// Parses and validates a JSON configuration. Parameters violating the
/// damping condition are accepted with a warning.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig =
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    config.validate()?;
    if !damping_condition_check(&config.params) {
        log::warn!(
            "damping condition a c >= 9 b^2 / 16 (a, c > 0) fails for a = {}, b = {}, c = {}",
            config.params.a,
            config.params.b,
            config.params.c
        );
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_gets_defaults() {
        let c = parse_config(r#"{"domain": {"nx": 8, "ny": 8, "nz": 8}, "dt": 0.01, "t_end": 0.1}"#).unwrap();
        assert_eq!(c.mode, RunMode::Direct);
        assert_eq!(c.params, ModelParams::default());
        assert_eq!((c.params.nu, c.params.gamma, c.params.l, c.params.xi), (1.0, 1.0, 1.0, 0.0));
        assert_eq!(c.initial_condition, InitialCondition::Zero);
        assert_eq!(c.steps(), 10);
    }

    #[test]
    fn rejects_xi_and_unknown_keys() {
        let xi = r#"{"domain": {"nx": 8, "ny": 8, "nz": 8}, "dt": 0.01, "t_end": 0.1, "params": {"xi": 0.1}}"#;
        assert!(matches!(parse_config(xi), Err(Error::Config(m)) if m.contains("xi")));
        let typo = r#"{"domain": {"nx": 8, "ny": 8, "nz": 8}, "dt": 0.01, "t_end": 0.1, "dtt": 1}"#;
        assert!(matches!(parse_config(typo), Err(Error::Config(m)) if m.contains("dtt")));
    }

    #[test]
    fn non_damping_params_parse() {
        let doc = r#"{"domain": {"nx": 8, "ny": 8, "nz": 8}, "dt": 0.01, "t_end": 0.1,
                      "params": {"a": 0.1, "b": 1, "c": 1}}"#;
        let c = parse_config(doc).unwrap();
        assert!(!damping_condition_check(&c.params));
    }

    #[test]
    fn hash_ignores_output_dir_only() {
        let mut c = RunConfig::new(DomainSpec::periodic(8, 1.0), 0.01, 0.1);
        let h = c.config_hash();
        c.output_dir = PathBuf::from("elsewhere");
        assert_eq!(c.config_hash(), h);
        c.dt = 0.02;
        assert_ne!(c.config_hash(), h);
    }
}
