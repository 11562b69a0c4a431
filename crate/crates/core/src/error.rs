use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatError {
    #[error("dimension mismatch: {left}x{left} vs {right}x{right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("row {row} has {found} entries, expected {expected}")]
    NotSquare {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not anti-Hermitian: ‖M + M†‖_F = {defect:e} > {tol:e}")]
    NotAntiHermitian { defect: f64, tol: f64 },
    #[error("matrix is not unitary: ‖U†U − I‖_F = {defect:e} > {tol:e}")]
    NotUnitary { defect: f64, tol: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LoopError {
    #[error("{context}: expected {expected} coordinates for a {system} loop, found {found}")]
    DimensionMismatch {
        context: String,
        system: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{context}: coordinate {index} is not finite")]
    NonFinite { context: String, index: usize },
    #[error("loops differ in {0}")]
    Incompatible(&'static str),
    #[error("holonomy requested with a {field} connection on a {path} loop")]
    SystemMismatch {
        field: &'static str,
        path: &'static str,
    },
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed loop file: {0}")]
    Parse(String),
    #[error("unsupported format version {found:?} (expected {expected:?})")]
    Version {
        found: String,
        expected: &'static str,
    },
    #[error("unknown system tag {0:?} (expected \"one-qubit\" or \"two-qubit\")")]
    SystemTag(String),
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error("matrix file line {line}: {msg}")]
    Matrix { line: usize, msg: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GateError {
    #[error(transparent)]
    Matrix(#[from] MatError),
    #[error("no analytic loop construction for {0}")]
    NoAnalyticLoop(String),
    #[error("unknown gate name {0:?}")]
    UnknownGate(String),
    #[error("gate {gate} acts on {found} dimensions but the loop system has {expected}")]
    WrongSystem {
        gate: String,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimError {
    #[error("parameter vector has {found} entries, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid synthesis configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error(transparent)]
    Matrix(#[from] MatError),
}
