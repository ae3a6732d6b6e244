use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated a documented precondition (dimension mismatch,
    /// out-of-limit configuration, non-unit quaternion, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Rejection sampling ran out of attempts without finding a
    /// collision-free configuration.
    #[error("no collision-free sample found after {tries} attempts")]
    NoFreeSample { tries: usize },

    /// The joint-space planner exhausted its extension budget without
    /// connecting start and goal.
    #[error("planning failed: no connection after {extensions} tree extensions")]
    PlanningFailure { extensions: usize },

    /// No solver candidate converged to the target pose. Carries the best
    /// infeasible candidate for diagnostics.
    #[error(
        "no solution: best infeasible candidate has position error {position_error:.6} m, \
         orientation error {orientation_error:.6} rad"
    )]
    NoSolution {
        position_error: f64,
        orientation_error: f64,
        best_infeasible: Vec<f64>,
    },

    /// Training produced a non-finite loss.
    #[error("training diverged at epoch {epoch}")]
    Divergence { epoch: usize },

    /// A scene/model description file failed validation.
    #[error("model file: {0}")]
    ModelFile(String),

    /// A binary dataset or network file is malformed or has the wrong version.
    #[error("file format: {0}")]
    Format(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
