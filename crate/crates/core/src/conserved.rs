//! Momentum density, quadratic energies and the empirical scaling exponent
//! of the energy under `u -> u_lambda(t, x) = u(lambda t, lambda x) / lambda`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::evolution::EvolutionState;
use crate::numerics::{log_log_fit, trapezoid, trapezoid_quadrature, FitResult, Grid1D};

/// `p / sqrt(1 - p^2 + q^2)`.
pub fn momentum_density(p: f64, q: f64) -> Result<f64> {
    let d = 1.0 - p * p + q * q;
    if !(d > 0.0) {
        return Err(LabError::Degeneracy {
            what: "discriminant 1 - p^2 + q^2".into(),
            value: d,
            floor: 0.0,
        });
    }
    Ok(p / d.sqrt())
}

/// Trapezoid integral of the momentum density over the active nodes.
pub fn momentum_integral(state: &EvolutionState) -> Result<f64> {
    let (lo, hi) = state.active;
    let dens = (lo..=hi)
        .map(|i| momentum_density(state.p[i], state.q[i]))
        .collect::<Result<Vec<_>>>()?;
    trapezoid(state.grid.spacing(), state.grid.node(lo), &dens, |_| 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    XWeight,
    RWeight,
    Unweighted,
}

impl WeightKind {
    pub fn weight(self, x: f64) -> f64 {
        match self {
            WeightKind::XWeight | WeightKind::RWeight => x,
            WeightKind::Unweighted => 1.0,
        }
    }
}

/// `int (u_t^2 + u_x^2) / 2 * weight`.
pub fn quadratic_energy(
    grid: &Grid1D,
    u_t: &[f64],
    u_x: &[f64],
    weight: WeightKind,
) -> Result<f64> {
    if u_t.len() != u_x.len() {
        return Err(LabError::invalid("u_t and u_x sample counts differ"));
    }
    let dens: Vec<f64> = u_t
        .iter()
        .zip(u_x)
        .map(|(a, b)| 0.5 * (a * a + b * b))
        .collect();
    trapezoid_quadrature(grid, &dens, |x| weight.weight(x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub quadratic_part: f64,
    /// `int sqrt(1 - u_t^2 + u_x^2) * weight`; absent when the
    /// discriminant is negative somewhere.
    pub geometric_action_density_integral: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub action_unavailable_reason: Option<String>,
    pub weight_kind: WeightKind,
}

pub fn energy_report(
    grid: &Grid1D,
    u_t: &[f64],
    u_x: &[f64],
    weight: WeightKind,
) -> Result<EnergyReport> {
    let quadratic_part = quadratic_energy(grid, u_t, u_x, weight)?;
    let disc: Vec<f64> = u_t
        .iter()
        .zip(u_x)
        .map(|(a, b)| 1.0 - a * a + b * b)
        .collect();
    let (action, reason) = match disc.iter().position(|d| *d < 0.0) {
        Some(i) => (
            None,
            Some(format!(
                "discriminant {} < 0 at x = {}",
                disc[i],
                grid.node(i)
            )),
        ),
        None => {
            let dens: Vec<f64> = disc.iter().map(|d| d.sqrt()).collect();
            (
                Some(trapezoid_quadrature(grid, &dens, |x| weight.weight(x))?),
                None,
            )
        }
    };
    Ok(EnergyReport {
        quadratic_part,
        geometric_action_density_integral: action,
        action_unavailable_reason: reason,
        weight_kind: weight,
    })
}

/// Claimed exponent in `E(u_lambda) = lambda^e E(u)`.
pub const CLAIMED_SCALING_EXPONENT: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingMeasurement {
    pub lambda_values: Vec<f64>,
    pub energies: Vec<f64>,
    pub measured_exponent: f64,
    pub fit: FitResult,
    pub paper_claim: f64,
    pub weight_kind: WeightKind,
}

/// Energy of `u_lambda` at time `t` on the covariant domain
/// `[lo / lambda, hi / lambda]` for each `lambda`, then a log-log fit.
/// `derivs(t, x)` returns `(u_t, u_x)` of the base field.
pub fn measure_scaling_exponent(
    derivs: &dyn Fn(f64, f64) -> (f64, f64),
    (lo, hi): (f64, f64),
    t: f64,
    n: usize,
    lambdas: &[f64],
    weight: WeightKind,
) -> Result<ScalingMeasurement> {
    let mut distinct = lambdas.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 || distinct.len() != lambdas.len() {
        return Err(LabError::Arity {
            needed: 3,
            got: distinct.len(),
        });
    }
    if let Some(bad) = lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(LabError::domain(format!(
            "scaling factors must be positive, got {bad}"
        )));
    }
    let mut energies = Vec::with_capacity(lambdas.len());
    for &lam in lambdas {
        let grid = Grid1D::new(lo / lam, hi / lam, n)?;
        // u_lambda has (u_t, u_x)(lambda t, lambda x)
        let (ut, ux): (Vec<f64>, Vec<f64>) = grid
            .nodes()
            .iter()
            .map(|x| derivs(lam * t, lam * x))
            .unzip();
        energies.push(quadratic_energy(&grid, &ut, &ux, weight)?);
    }
    let fit = log_log_fit(lambdas, &energies)?;
    Ok(ScalingMeasurement {
        lambda_values: lambdas.to_vec(),
        energies,
        measured_exponent: fit.slope,
        fit,
        paper_claim: CLAIMED_SCALING_EXPONENT,
        weight_kind: weight,
    })
}
