//! Numerical laboratory for the explicit self-similar blow-up solutions of
//! the Born-Infeld equation, the radial membrane equation and the spacelike
//! vanishing-mean-curvature equation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod closedform;
pub mod config;
pub mod conserved;
pub mod error;
pub mod evolution;
pub mod jet;
pub mod numerics;
pub mod profile;
pub mod residual;
pub mod scalar;
pub mod similarity;
pub mod stability;

pub use error::{LabError, Result};
pub use jet::Jet2;
