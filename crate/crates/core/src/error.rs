use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid control: {0}")]
    InvalidControl(String),

    /// The starting point of an event search already lies on the switching
    /// curve `H1 = 0`; the caller decides between switching and singular capture.
    #[error("state (r={r}, psi={psi}) lies on the switching curve")]
    AtSwitchingCurve { r: f64, psi: f64 },

    #[error("synthesis failed: {reason}; scanned (terminal_r, R(0)) = {scanned:?}")]
    SynthesisFailure {
        reason: String,
        scanned: Vec<(f64, f64)>,
    },

    #[error("control structure {0} is not one of the optimal forms")]
    StructureViolation(String),

    #[error("dynamic programming transition left the state grid: {0}")]
    OffGrid(String),
}
