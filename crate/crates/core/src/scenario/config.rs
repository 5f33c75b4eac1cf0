use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::read_signal_csv;
use crate::signal::{make_signal, SampledSignal, SignalKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Analyze,
    SweepCritical,
    SweepEmbedding,
    WeightTable,
    DegreeCheck,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Analyze => "analyze",
            Scenario::SweepCritical => "sweep-critical",
            Scenario::SweepEmbedding => "sweep-embedding",
            Scenario::WeightTable => "weight-table",
            Scenario::DegreeCheck => "degree-check",
        }
    }
}

/// Generator description as it appears in config files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalSpec {
    Box,
    Hat,
    Bspline { order: u32 },
    Gaussian,
    SmoothedBox { transition: f64 },
    /// A `t,re,im` CSV file; relative paths resolve against the config file.
    File { path: PathBuf },
}

impl SignalSpec {
    pub fn family(&self) -> &'static str {
        match self {
            SignalSpec::Box => "box",
            SignalSpec::Hat => "hat",
            SignalSpec::Bspline { .. } => "bspline",
            SignalSpec::Gaussian => "gaussian",
            SignalSpec::SmoothedBox { .. } => "smoothed_box",
            SignalSpec::File { .. } => "file",
        }
    }

    pub fn param(&self) -> String {
        match self {
            SignalSpec::Bspline { order } => order.to_string(),
            SignalSpec::SmoothedBox { transition } => transition.to_string(),
            SignalSpec::File { path } => path.display().to_string(),
            _ => String::new(),
        }
    }

    pub fn label(&self) -> String {
        match self.param().as_str() {
            "" => self.family().to_string(),
            p => format!("{}({p})", self.family()),
        }
    }

    /// Samples the generator at `step`, zero-padding by `pad` units per side.
    pub fn build(&self, step: f64, pad: f64, base_dir: &Path) -> Result<SampledSignal> {
        let kind = match self {
            SignalSpec::Box => SignalKind::Box,
            SignalSpec::Hat => SignalKind::Hat,
            SignalSpec::Bspline { order } => SignalKind::Bspline { order: *order },
            SignalSpec::Gaussian => SignalKind::Gaussian,
            SignalSpec::SmoothedBox { transition } => SignalKind::SmoothedBox {
                transition: *transition,
            },
            SignalSpec::File { path } => {
                let f = read_signal_csv(base_dir.join(path))?;
                if (f.step() - step).abs() > 1e-12 * step {
                    return Err(Error::StepMismatch(f.step(), step));
                }
                SignalKind::Custom {
                    start: f.start(),
                    samples: f.samples().to_vec(),
                }
            }
        };
        make_signal(&kind, step, pad)
    }
}

/// Fields examined by the degree check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DegreeField {
    /// Zak transform of a generator, extended quasi-periodically.
    Zak { signal: SignalSpec },
    /// The constant 1 extended periodically in both directions.
    PeriodicConstant,
    /// Zak transforms of the hat plus a seeded random finite Gabor sum, drawn
    /// until `count` fields have a path modulus above the defect tolerance.
    RandomGabor {
        count: usize,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
}

fn default_amplitude() -> f64 {
    0.3
}

fn default_resolution() -> usize {
    256
}

fn default_planar() -> Vec<usize> {
    vec![32, 64]
}

fn default_eps() -> Vec<f64> {
    crate::degree::DEFAULT_EPS.to_vec()
}

fn default_k0() -> (i32, i32) {
    (0, 12)
}

fn default_count() -> usize {
    100
}

fn default_refine_tol() -> f64 {
    1e-10
}

fn default_points() -> usize {
    64
}

fn default_true() -> bool {
    true
}

fn default_signal() -> SignalSpec {
    SignalSpec::Hat
}

/// One experiment, read from a JSON document. Every field except `scenario`
/// has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub scenario: Option<Scenario>,
    /// Generator for `analyze`.
    #[serde(default = "default_signal")]
    pub signal: SignalSpec,
    /// Generator families for `sweep-critical`; empty means the built-in list.
    #[serde(default)]
    pub families: Vec<SignalSpec>,
    /// Zak grid size `nx = ny`.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    /// Planar grid sizes for `sweep-embedding`; consecutive entries should double.
    #[serde(default = "default_planar")]
    pub planar_resolutions: Vec<usize>,
    /// Exponents `p`; empty means the scenario's default grid.
    #[serde(default)]
    pub p_values: Vec<f64>,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    #[serde(default = "default_k0")]
    pub k0_range: (i32, i32),
    /// Number of random fields in `sweep-embedding`.
    #[serde(default = "default_count")]
    pub count: usize,
    /// Fields for `degree-check`; empty means hat, gaussian, the periodic constant
    /// and 20 random Gabor fields.
    #[serde(default)]
    pub fields: Vec<DegreeField>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_refine_tol")]
    pub refine_tol: f64,
    #[serde(default = "default_points")]
    pub points_per_side: usize,
    /// When false, failed checks are reported but do not fail the run.
    #[serde(default = "default_true")]
    pub assertions: bool,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario) -> Self {
        let mut cfg: Self = serde_json::from_str("{}").expect("all fields have defaults");
        cfg.scenario = Some(scenario);
        cfg
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Checks the invariants shared by all scenarios.
    pub fn validate(&self) -> Result<()> {
        let pow2 = |n: usize| n >= 8 && n.is_power_of_two();
        if !pow2(self.resolution) {
            return Err(Error::InvalidArgument(format!(
                "resolution {} must be a power of two >= 8",
                self.resolution
            )));
        }
        if let Some(&n) = self.planar_resolutions.iter().find(|&&n| !pow2(n)) {
            return Err(Error::InvalidArgument(format!(
                "planar resolution {n} must be a power of two >= 8"
            )));
        }
        if self.eps.windows(2).any(|w| w[1] >= w[0]) || self.eps.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::InvalidArgument("eps list must be positive and decreasing".into()));
        }
        if self.k0_range.0 > self.k0_range.1 {
            return Err(Error::InvalidArgument("empty k0 range".into()));
        }
        if let Some(p) = self.p_values.iter().find(|&&p| !(p > 1.0 && p.is_finite())) {
            return Err(Error::InvalidArgument(format!("exponent {p} must lie in (1, ∞)")));
        }
        if self.points_per_side == 0 {
            return Err(Error::InvalidArgument("points_per_side must be positive".into()));
        }
        Ok(())
    }
}
