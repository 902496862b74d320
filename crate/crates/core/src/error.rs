use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("malformed form at `{path}`: {message}")]
    Malformed { path: String, message: String },

    #[error("infeasible point: psi_p = {psi:e} is below threshold {threshold:e}")]
    Infeasible { psi: f64, threshold: f64 },

    #[error("all {attempts} sampled starts were infeasible")]
    AllStartsInfeasible { attempts: usize },

    #[error("degenerate geometry at parameter {at:?}: {message}")]
    DegenerateGeometry { at: Vec<f64>, message: String },

    #[error("deficit dipped to {value:e} at parameter {at:?}")]
    NegativeDeficit { at: Vec<f64>, value: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures caused by the numbers rather than by the request.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite(_)
                | Error::Infeasible { .. }
                | Error::AllStartsInfeasible { .. }
                | Error::DegenerateGeometry { .. }
                | Error::NegativeDeficit { .. }
        )
    }
}
