//! Shared numerical substrate: uniform grids, finite-difference stencils,
//! explicit integrators, quadrature and log-log fits.

mod fit;
mod grid;
mod ode;
mod quadrature;
mod stencil;

pub use fit::{log_log_fit, FitResult};
pub use grid::Grid1D;
pub use ode::{rk4_adaptive, rk4_step, AdaptiveOutcome, AdaptiveStep};
pub use quadrature::{trapezoid, trapezoid_quadrature};
pub use stencil::{
    central_diff_1d, central_diff_jet2, diff_1d, BoundaryMode, Diff1, SampledField2,
};
