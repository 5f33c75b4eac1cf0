//! Configuration-driven experiments that tie the numerical modules together
//! and emit a JSON report plus CSV tables.

mod analyze;
mod config;
mod critical;
mod degree_check;
mod embedding;
mod report;
mod weights;

use std::path::{Path, PathBuf};

pub use config::{DegreeField, Scenario, ScenarioConfig, SignalSpec};
pub use report::{Check, Metric, Provenance, Report};

use crate::error::{Error, Result};

/// Where a run reads relative inputs from and writes its outputs to.
pub struct RunContext {
    pub out_dir: PathBuf,
    pub base_dir: PathBuf,
}

impl RunContext {
    pub(crate) fn output(&self, report: &mut Report, name: &str) -> PathBuf {
        report.outputs.push(name.to_string());
        self.out_dir.join(name)
    }
}

/// Runs `scenario` (or the one named in the config) and writes `report.json`
/// plus the scenario's tables into the output directory.
///
/// The output directory is `out_dir`, else the config's `output_dir`, else `out`.
/// `seed` overrides the config's seed.
pub fn run(
    mut cfg: ScenarioConfig,
    scenario: Option<Scenario>,
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
    base_dir: &Path,
) -> Result<Report> {
    let scenario = match (scenario, cfg.scenario) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::InvalidArgument(format!(
                "command line asks for {} but the config describes {}",
                a.name(),
                b.name()
            )))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => {
            return Err(Error::InvalidArgument("no scenario given".into()));
        }
    };
    cfg.scenario = Some(scenario);
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let out_dir = out_dir
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out_dir)?;
    let ctx = RunContext {
        out_dir,
        base_dir: base_dir.to_path_buf(),
    };
    let mut report = Report::new(scenario.name(), serde_json::to_value(&cfg)?, cfg.seed);
    match scenario {
        Scenario::Analyze => analyze::run(&cfg, &ctx, &mut report)?,
        Scenario::SweepCritical => critical::run(&cfg, &ctx, &mut report)?,
        Scenario::SweepEmbedding => embedding::run(&cfg, &ctx, &mut report)?,
        Scenario::WeightTable => weights::run(&cfg, &ctx, &mut report)?,
        Scenario::DegreeCheck => degree_check::run(&cfg, &ctx, &mut report)?,
    }
    if !cfg.assertions {
        report.passed = true;
    }
    report.write(&ctx.out_dir)?;
    Ok(report)
}
