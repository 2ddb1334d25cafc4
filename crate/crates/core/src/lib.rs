//! Correlation tensors, anti-states and genuine multipartite entanglement
//! tools for small qubit registers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annealer;
pub mod antistate;
pub mod bell;
pub mod correlations;
pub mod error;
pub mod gme;
pub mod linalg;
pub mod state;
pub mod statelib;

pub use error::{Error, Result};
pub use state::{DensityMatrix, HermitianOperator, Partition, PureState, C64};
