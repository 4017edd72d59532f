use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Uniform grid with `n` cells and `n + 1` nodes on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    lo: f64,
    hi: f64,
    n: usize,
}

impl Grid1D {
    pub const MIN_CELLS: usize = 8;

    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(LabError::invalid("grid bounds must be finite"));
        }
        if lo >= hi {
            return Err(LabError::invalid(format!(
                "grid needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        if n < Self::MIN_CELLS {
            return Err(LabError::invalid(format!(
                "grid needs at least {} cells, got {n}",
                Self::MIN_CELLS
            )));
        }
        Ok(Grid1D { lo, hi, n })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Cell count.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.node(i)).collect()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..=self.n).map(|i| f(self.node(i))).collect()
    }

    /// Index of the node nearest to `x`, clamped to the grid.
    pub fn nearest(&self, x: f64) -> usize {
        let s = ((x - self.lo) / self.spacing()).round();
        s.clamp(0.0, self.n as f64) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_and_spacing() {
        let g = Grid1D::new(-1.0, 1.0, 10).unwrap();
        assert_eq!(g.len(), 11);
        assert!((g.spacing() - 0.2).abs() < 1e-15);
        assert_eq!(g.node(0), -1.0);
        assert!((g.node(10) - 1.0).abs() < 1e-15);
        assert_eq!(g.nearest(0.01), 5);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid1D::new(1.0, 0.0, 10).is_err());
        assert!(Grid1D::new(0.0, 1.0, 7).is_err());
        assert!(Grid1D::new(0.0, f64::NAN, 10).is_err());
    }
}
