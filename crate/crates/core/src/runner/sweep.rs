//! Parameter sweeps over the Cartesian product of configuration axes.

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::runner::config::RunConfig;
use crate::runner::run::{run_to_dir, RunSummary};

pub const MAX_SWEEP_RUNS: usize = 10_000;

/// One swept field, addressed by a dotted path into the configuration
/// document, e.g. `"initial_condition.amplitude"` or `"params.a"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub path: String,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Complete,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config_hash: String,
    pub overrides: BTreeMap<String, Value>,
    pub status: RunStatus,
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<RunSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepManifest {
    pub base: RunConfig,
    pub axes: Vec<SweepAxis>,
    #[serde(default)]
    pub results: Vec<SweepResult>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepStats {
    pub executed: usize,
    pub skipped: usize,
}

/// A resolved sweep point.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub overrides: BTreeMap<String, Value>,
    pub config: RunConfig,
    pub hash: String,
}

fn set_path(doc: &mut Value, path: &str, value: Value) -> Result<()> {
    let mut cur = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("sweep path {path:?}: {part:?} is not inside an object")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cur = obj
            .get_mut(*part)
            .ok_or_else(|| Error::Config(format!("sweep path {path:?}: no key {part:?}")))?;
    }
    Err(Error::Config("empty sweep path".into()))
}

impl SweepManifest {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Resolves every point of the Cartesian product, last axis fastest.
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        let total = self
            .axes
            .iter()
            .try_fold(1usize, |acc, a| acc.checked_mul(a.values.len()))
            .unwrap_or(usize::MAX);
        if total > MAX_SWEEP_RUNS {
            return Err(Error::Config(format!(
                "sweep expands to {total} runs, more than {MAX_SWEEP_RUNS}"
            )));
        }
        let base = serde_json::to_value(&self.base)?;
        let mut out = Vec::with_capacity(total);
        for idx in 0..total {
            let mut doc = base.clone();
            let mut overrides = BTreeMap::new();
            let mut rem = idx;
            for axis in self.axes.iter().rev() {
                let v = axis.values[rem % axis.values.len()].clone();
                rem /= axis.values.len();
                set_path(&mut doc, &axis.path, v.clone())?;
                overrides.insert(axis.path.clone(), v);
            }
            let mut config: RunConfig =
                serde_json::from_value(doc).map_err(|e| Error::Config(e.to_string()))?;
            config.validate()?;
            let hash = config.config_hash();
            config.output_dir = self.base.output_dir.join("runs").join(&hash[..16]);
            out.push(SweepPoint {
                overrides,
                config,
                hash,
            });
        }
        Ok(out)
    }
}

fn execute(p: &SweepPoint) -> SweepResult {
    let (status, summary, error) = match run_to_dir(&p.config, &p.config.output_dir) {
        Ok(s) => (RunStatus::Complete, Some(s), None),
        Err(e) => {
            log::warn!("sweep run {} failed: {e}", &p.hash[..16]);
            (RunStatus::Failed, None, Some(e.to_string()))
        }
    };
    SweepResult {
        config_hash: p.hash.clone(),
        overrides: p.overrides.clone(),
        status,
        output_dir: p.config.output_dir.clone(),
        summary,
        error,
    }
}

/// Runs every point not already recorded as complete in `manifest.results`,
/// with at most `parallelism` concurrent runs. Results come back in point
/// order regardless of parallelism; a failing run does not stop the sweep.
pub fn run_sweep_with_stats(manifest: &SweepManifest, parallelism: usize) -> Result<(SweepManifest, SweepStats)> {
    if parallelism == 0 {
        return Err(Error::Config("parallelism must be at least 1".into()));
    }
    let points = manifest.points()?;
    let done: HashMap<&str, &SweepResult> = manifest
        .results
        .iter()
        .filter(|r| r.status == RunStatus::Complete)
        .map(|r| (r.config_hash.as_str(), r))
        .collect();
    let todo: Vec<&SweepPoint> = points.iter().filter(|p| !done.contains_key(p.hash.as_str())).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let fresh: HashMap<String, SweepResult> = pool.install(|| {
        todo.par_iter()
            .map(|p| (p.hash.clone(), execute(p)))
            .collect()
    });
    let results = points
        .iter()
        .map(|p| match done.get(p.hash.as_str()) {
            Some(r) => (*r).clone(),
            None => fresh[&p.hash].clone(),
        })
        .collect();
    let stats = SweepStats {
        executed: todo.len(),
        skipped: points.len() - todo.len(),
    };
    Ok((
        SweepManifest {
            base: manifest.base.clone(),
            axes: manifest.axes.clone(),
            results,
        },
        stats,
    ))
}

pub fn run_sweep(manifest: &SweepManifest, parallelism: usize) -> Result<SweepManifest> {
    Ok(run_sweep_with_stats(manifest, parallelism)?.0)
}
