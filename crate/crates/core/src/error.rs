use thiserror::Error;

use crate::fxp::FxError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Fx(#[from] FxError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("row {row} of the channel matrix is all zero")]
    DegenerateRow { row: usize },
    /// `block` is the 1-based index `j` of the failing diagonal block `D_jj`.
    #[error("singular block D_{block}{block} (det = {delta:e}){}", cycle.map(|c| format!(" at cycle {c}")).unwrap_or_default())]
    SingularBlock {
        block: usize,
        delta: f64,
        cycle: Option<u64>,
    },
    #[error("matrix is numerically singular")]
    SingularMatrix,
    #[error("zero diagonal entry at index {0}")]
    ZeroDiagonal(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("cannot place {users} users {min_sep_deg}° apart within ±{half_span_deg}°")]
    Placement {
        users: usize,
        min_sep_deg: f64,
        half_span_deg: f64,
    },
    #[error("architecture hazard: {0}")]
    Hazard(String),
    #[error("{singular} of {trials} trials failed with a singular block")]
    TooManySingular { singular: usize, trials: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
