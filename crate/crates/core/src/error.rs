use thiserror::Error;

/// Errors raised by the numerical kernels and the scenario runner.
#[derive(Debug, Error)]
pub enum Error {
    /// A signal or field is not aligned with the lattice it must live on.
    #[error("grid-compatibility error: {0}")]
    Grid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sampling steps differ: {0} vs {1}")]
    StepMismatch(f64, f64),

    #[error("point ({x}, {y}) is not on the sampling grid")]
    OffGrid { x: f64, y: f64 },

    #[error("outside the field domain: {0}")]
    OutsideDomain(String),

    #[error("zero too close to path: min modulus {min_modulus:.3e} is below {threshold:.3e}")]
    ZeroNearPath { min_modulus: f64, threshold: f64 },

    #[error("path refinement did not converge: {0}")]
    Refinement(String),

    #[error("degree is unstable across the mollification scales: {0}")]
    DegreeInstability(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wraps the error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &str) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}
