//! X₂ exceptional Laguerre polynomials built from weighted moments.

pub mod basis;
pub mod cli;
pub mod classical;
pub mod determinantal;
pub mod error;
pub mod linalg;
pub mod moments;
pub mod numerics;
pub mod poly;
pub mod verify;

pub use classical::ParameterContext;
pub use error::{Error, Result};
pub use numerics::Real;
