use crate::error::{LabError, Result};

use super::Grid1D;

/// Composite trapezoid rule for `sum f_i * weight(x_i)` on a uniform grid.
pub fn trapezoid_quadrature(
    grid: &Grid1D,
    samples: &[f64],
    weight: impl Fn(f64) -> f64,
) -> Result<f64> {
    if samples.len() != grid.len() {
        return Err(LabError::invalid(format!(
            "{} samples for a grid with {} nodes",
            samples.len(),
            grid.len()
        )));
    }
    trapezoid(grid.spacing(), grid.lo(), samples, weight)
}

/// Trapezoid rule on nodes `x0 + i h`. Used directly on excised sub-ranges.
pub fn trapezoid(h: f64, x0: f64, samples: &[f64], weight: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.len() < 2 {
        return Err(LabError::Arity {
            needed: 2,
            got: samples.len(),
        });
    }
    let last = samples.len() - 1;
    let mut acc = 0.0;
    for (i, &f) in samples.iter().enumerate() {
        let g = f * weight(x0 + i as f64 * h);
        if !g.is_finite() {
            return Err(LabError::NonFinite {
                location: format!("quadrature node {i}"),
            });
        }
        acc += if i == 0 || i == last { 0.5 * g } else { g };
    }
    Ok(acc * h)
}
