//! Error taxonomy shared across the crate.

use thiserror::Error;

/// Failure modes of the numeric layers.
///
/// `Input` covers rejected arguments (non-finite samples, inconsistent grids,
/// too-short grids). `OutOfRange` marks arguments outside a declared validity
/// range. `SingularSolution` is raised when a particular solution that must
/// stay away from zero vanishes on the grid. `Convergence` reports an
/// iteration that hit its cap without meeting its tolerance.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("out of declared range: {0}")]
    OutOfRange(String),
    #[error("singular particular solution: {0}")]
    SingularSolution(String),
    #[error("no convergence: {0}")]
    Convergence(String),
}

pub type Result<V> = std::result::Result<V, Error>;
