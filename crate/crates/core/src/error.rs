use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    DimensionMismatch { op: &'static str, detail: String },

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("Jacobi SVD did not converge after {sweeps} sweeps (off-diagonal measure {off_norm:e})")]
    SvdNoConvergence { sweeps: usize, off_norm: f64 },

    #[error("zero matrix has no condition number")]
    ZeroMatrix,

    #[error("matrix is not GP")]
    NotGroupMatrix,

    #[error("zero start vector")]
    ZeroStartVector,

    #[error("Arnoldi process already broke down at step {step}")]
    ArnoldiFinished { step: usize },

    /// `A r0` vanished to working precision, so the range-restricted Krylov
    /// space is empty. Carries `||A^T r0|| / ||A^T b||` of the unchanged iterate.
    #[error("RR-GMRES start vector annihilated (||A^T r0||/||A^T b|| = {normal_residual_rel:e})")]
    StartVectorAnnihilated { normal_residual_rel: f64 },

    #[error(
        "EP tests disagree: projector distance {projector_distance:e} vs smallest cosine {min_cosine}"
    )]
    InconsistentClassification {
        projector_distance: f64,
        min_cosine: f64,
    },

    #[error("inputs were computed for different problems")]
    FingerprintMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{problem}: reference {quantity} = {expected:e} but computed {computed:e}")]
    ReferenceMismatch {
        problem: String,
        quantity: &'static str,
        expected: f64,
        computed: f64,
    },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn dim_err(op: &'static str, detail: impl Into<String>) -> Error {
    Error::DimensionMismatch {
        op,
        detail: detail.into(),
    }
}
