use thiserror::Error;

use crate::ncpoly::MatrixTuple;

#[derive(Debug, Error)]
pub enum NcError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("resolvent near-singular: condition estimate {condition:e}, operator norm {norm}")]
    NearSingular { condition: f64, norm: f64 },

    #[error("degree {degree} exceeds the degree cap {cap}")]
    DegreeCap { degree: usize, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("polynomial matrix delta has a nonzero constant term")]
    DeltaNotVanishing,

    #[error("point outside B_delta: ||delta(x)|| = {0}")]
    OutsideDomain(f64),

    #[error("unreachable target norm {target}: best attained {best} after {iterations} iterations")]
    UnreachableTarget { target: f64, best: f64, iterations: usize },

    #[error("colligation is not unitary: residual {residual:e} exceeds {tol:e}")]
    NotUnitary { residual: f64, tol: f64 },

    #[error("colligation is not regular (D != 0)")]
    NotRegular,

    #[error("no admissible t found after {0} halvings")]
    NoAdmissibleT(usize),

    #[error("block structure violation: lower-left block has norm {0:e}")]
    BlockStructure(f64),

    #[error("PSD violation at step {step}: margin {margin:e}")]
    PsdViolation {
        step: usize,
        margin: f64,
        point: Box<MatrixTuple>,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl NcError {
    /// Short machine-readable tag, used in CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            NcError::DimensionMismatch(_) => "dimension_mismatch",
            NcError::Shape(_) => "shape_mismatch",
            NcError::NonFinite => "non_finite",
            NcError::NotSquare { .. } => "not_square",
            NcError::NearSingular { .. } => "near_singular",
            NcError::DegreeCap { .. } => "degree_cap",
            NcError::InvalidParameter(_) => "invalid_parameter",
            NcError::DeltaNotVanishing => "delta_not_vanishing",
            NcError::OutsideDomain(_) => "outside_domain",
            NcError::UnreachableTarget { .. } => "unreachable_target",
            NcError::NotUnitary { .. } => "not_unitary",
            NcError::NotRegular => "not_regular",
            NcError::NoAdmissibleT(_) => "no_admissible_t",
            NcError::BlockStructure(_) => "block_structure",
            NcError::PsdViolation { .. } => "psd_violation",
            NcError::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, NcError>;
