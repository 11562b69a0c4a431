//! Holonomic quantum computation in the three-state model: connection,
//! holonomies of polygonal loops, a gate library, and loop synthesis.

pub mod connection;
pub mod error;
pub mod gatelib;
pub mod holonomy;
pub mod loops;
pub mod matcore;
pub mod model;
pub mod optimizer;

pub use connection::{AnalyticConnection, ConnectionField, FiniteDifferenceConnection};
pub use error::{FormatError, GateError, LoopError, MatError, OptimError};
pub use gatelib::{analytic_loop, gate_matrix, GateSpec};
pub use holonomy::{concat, holonomy, HolonomyConfig, HolonomyWorkspace};
pub use loops::{
    load_loop, make_loop, reverse, save_loop, EvaluationRule, LoopMetadata, PolygonalLoop,
};
pub use matcore::{frob_dist, kron, mat_exp_antihermitian, ComplexMatrix, GateMatrix};
pub use model::{ModelEnergy, OneQubitPoint, System, TwoQubitPoint};
pub use num_complex::Complex64;
pub use optimizer::{objective, synthesize, SynthesisConfig, SynthesisResult};
