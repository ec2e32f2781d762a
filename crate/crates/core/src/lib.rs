//! Nonclassicality witnesses relative to a chosen classical basis, and
//! controlled-displacement conversion of nonclassicality into entanglement.

pub mod bases;
pub mod error;
pub mod io;
pub mod linalg;
pub mod multipartite;
pub mod optimize;
pub mod potential;
pub mod random;
pub mod reproduce;
pub mod spin;
pub mod state;
pub mod witness;

pub use bases::{lambda_max, ClassicalFamily, ClassicalParams, LambdaMethod, LambdaResult, LambdaSolver};
pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, Operator};
pub use spin::{Spin, SpinOperators};
pub use state::{DensityMatrix, PureState, QuantumState, State, TruncationConfig};
pub use witness::{build_witness, witness_expectation, DetectionReport, Verdict, Witness};
