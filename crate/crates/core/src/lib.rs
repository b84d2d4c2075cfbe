//! State-feedback synthesis with maximal actuator degradation under an H2 or
//! H-infinity performance bound.

// links the system BLAS/LAPACK used by the SDP backend
use openblas_src as _;

pub mod cli;
pub mod degradation;
pub mod error;
pub mod f16;
pub mod lti;
pub mod model;
pub mod report;
pub mod rows;
pub mod sim;
pub mod synthesis;

pub use error::{Error, Result};
