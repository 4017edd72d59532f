use crate::error::{LabError, Result};
use crate::jet::Jet2;

use super::Grid1D;

/// What to do when a stencil would leave the sampled range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryMode {
    #[default]
    Error,
    /// Second-order one-sided stencils at the ends.
    OneSided,
}

/// Value, first and second derivative of a 1D sampled function at a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diff1 {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

pub fn central_diff_1d(values: &[f64], h: f64, i: usize) -> Result<Diff1> {
    diff_1d(values, h, i, BoundaryMode::Error)
}

pub fn diff_1d(values: &[f64], h: f64, i: usize, mode: BoundaryMode) -> Result<Diff1> {
    let n = values.len();
    if i >= n {
        return Err(LabError::Boundary {
            index: i,
            needed: 0,
            available: 0,
        });
    }
    let f = values;
    if i >= 1 && i + 1 < n {
        return Ok(Diff1 {
            value: f[i],
            d1: (f[i + 1] - f[i - 1]) / (2.0 * h),
            d2: (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h),
        });
    }
    match mode {
        BoundaryMode::Error => Err(LabError::Boundary {
            index: i,
            needed: 1,
            available: if i == 0 { 0 } else { n - 1 - i },
        }),
        BoundaryMode::OneSided => {
            if n < 4 {
                return Err(LabError::Arity { needed: 4, got: n });
            }
            if i == 0 {
                Ok(Diff1 {
                    value: f[0],
                    d1: (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h),
                    d2: (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h),
                })
            } else {
                let m = n - 1;
                Ok(Diff1 {
                    value: f[m],
                    d1: (3.0 * f[m] - 4.0 * f[m - 1] + f[m - 2]) / (2.0 * h),
                    d2: (2.0 * f[m] - 5.0 * f[m - 1] + 4.0 * f[m - 2] - f[m - 3]) / (h * h),
                })
            }
        }
    }
}

/// Scalar field sampled on a uniform space grid at equally spaced time levels.
#[derive(Debug, Clone)]
pub struct SampledField2 {
    pub grid: Grid1D,
    pub t0: f64,
    pub dt: f64,
    /// `levels[l][i]` is the value at `t0 + l * dt`, node `i`.
    pub levels: Vec<Vec<f64>>,
}

impl SampledField2 {
    pub fn new(grid: Grid1D, t0: f64, dt: f64, levels: Vec<Vec<f64>>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(LabError::invalid("time spacing must be positive"));
        }
        if let Some(bad) = levels.iter().position(|l| l.len() != grid.len()) {
            return Err(LabError::invalid(format!(
                "time level {bad} has {} samples, grid has {}",
                levels[bad].len(),
                grid.len()
            )));
        }
        Ok(SampledField2 {
            grid,
            t0,
            dt,
            levels,
        })
    }

    /// Sample `f(t, x)` on `n_levels` levels starting at `t0`.
    pub fn from_fn(
        grid: Grid1D,
        t0: f64,
        dt: f64,
        n_levels: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let levels = (0..n_levels)
            .map(|l| {
                let t = t0 + l as f64 * dt;
                grid.sample(|x| f(t, x))
            })
            .collect();
        Self::new(grid, t0, dt, levels)
    }

    pub fn time(&self, level: usize) -> f64 {
        self.t0 + level as f64 * self.dt
    }

    fn check(&self, i: usize, level: usize, width: usize) -> Result<()> {
        let nl = self.levels.len();
        if level < width || level + width >= nl {
            return Err(LabError::Boundary {
                index: level,
                needed: width,
                available: level.min(nl.saturating_sub(level + 1)),
            });
        }
        let nx = self.grid.len();
        if i < width || i + width >= nx {
            return Err(LabError::Boundary {
                index: i,
                needed: width,
                available: i.min(nx.saturating_sub(i + 1)),
            });
        }
        Ok(())
    }

    pub(crate) fn check_width(&self, i: usize, level: usize, width: usize) -> Result<()> {
        self.check(i, level, width)
    }

    pub(crate) fn at(&self, level: usize, i: usize) -> f64 {
        self.levels[level][i]
    }
}

/// Second-order central 2-jet of a sampled `(t, x)` field at node `i`, time
/// level `level`. Returns a jet in `(a, b) = (t, x)`.
pub fn central_diff_jet2(field: &SampledField2, i: usize, level: usize) -> Result<Jet2> {
    field.check(i, level, 1)?;
    let h = field.grid.spacing();
    let k = field.dt;
    let f = |l: usize, j: usize| field.levels[l][j];
    let (l, j) = (level, i);
    Ok(Jet2 {
        value: f(l, j),
        da: (f(l + 1, j) - f(l - 1, j)) / (2.0 * k),
        db: (f(l, j + 1) - f(l, j - 1)) / (2.0 * h),
        daa: (f(l + 1, j) - 2.0 * f(l, j) + f(l - 1, j)) / (k * k),
        dab: (f(l + 1, j + 1) - f(l + 1, j - 1) - f(l - 1, j + 1) + f(l - 1, j - 1))
            / (4.0 * k * h),
        dbb: (f(l, j + 1) - 2.0 * f(l, j) + f(l, j - 1)) / (h * h),
    })
}
