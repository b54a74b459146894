use alloc::string::String;

use crate::spectral::ModelId;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{name} must be positive")]
    ZeroCount { name: &'static str },

    #[error("grid of {grid} points is too small, at least {required} are needed")]
    GridTooSmall { grid: usize, required: usize },

    #[error("twist parameter h = {0} must be positive and different from 1")]
    InvalidTwist(f64),

    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("operands belong to different spectral systems")]
    SystemMismatch,

    #[error("{op} is not supported on the {model} model")]
    UnsupportedModel { op: &'static str, model: ModelId },

    #[error("eigenfunction of mode {label} has modulus {modulus:e} at node {node}")]
    NearZeroEigenfunction { label: i64, node: usize, modulus: f64 },

    #[error("Sobolev pairing has negative real part {0:e}")]
    SobolevBreakdown(f64),

    #[error("counting function vanishes at lambda = {0}")]
    EmptyCount(f64),

    #[error("{what}: found {found} sample points, need at least {required}")]
    TooFewPoints {
        what: &'static str,
        found: usize,
        required: usize,
    },

    #[error("invalid window [{lo}, {hi}]: {reason}")]
    InvalidWindow {
        lo: f64,
        hi: f64,
        reason: &'static str,
    },

    #[error("{what} must be strictly positive, found {value:e}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("symbol vanishes at label {label}, node {node}")]
    VanishingSymbol { label: i64, node: usize },

    #[error("least-squares basis is ill-conditioned (condition estimate {0:e})")]
    IllConditioned(f64),

    #[error("measured class {measured} contradicts declared order {declared_order} (expected {expected})")]
    OrderMismatch {
        measured: &'static str,
        expected: &'static str,
        declared_order: f64,
    },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is not Hermitian positive definite")]
    NotPositiveDefinite,
}
