//! Self-similar membrane profiles `u = (T - t) phi(r / (T - t))`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::numerics::{rk4_adaptive, AdaptiveOutcome};
use crate::residual::{ReportBuilder, ResidualReport};

/// Termination threshold on the gap `1 - rho^2 - phi^2`.
pub const EPS_PROFILE_DEG: f64 = 1e-8;
pub const PROFILE_STEP_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileState {
    pub rho: f64,
    pub phi: f64,
    pub dphi: f64,
}

impl ProfileState {
    pub fn gap(&self) -> f64 {
        1.0 - self.rho * self.rho - self.phi * self.phi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    ReachedEnd,
    DegeneracyHit,
    NonFinite,
    StepFloor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSolveResult {
    pub samples: Vec<ProfileState>,
    pub termination: Termination,
    pub degeneracy_location: Option<f64>,
}

/// Six-term form, summed as written.
pub fn profile_residual(s: ProfileState, d2phi: f64) -> f64 {
    let (r, f, g) = (s.rho, s.phi, s.dphi);
    r * (1.0 - r * r) * d2phi + g - g * f * f + 2.0 * r * f * g * g - r * d2phi * f * f
        + (1.0 - r * r) * g * g * g
}

/// Same equation with the `phi''` terms collected under the gap factor.
pub fn profile_residual_grouped(s: ProfileState, d2phi: f64) -> f64 {
    let (r, f, g) = (s.rho, s.phi, s.dphi);
    r * s.gap() * d2phi + first_order_branch_residual(r, f, g)
}

/// What is left of the profile equation once the gap factor vanishes.
pub fn first_order_branch_residual(rho: f64, phi: f64, dphi: f64) -> f64 {
    dphi - dphi * phi * phi + 2.0 * rho * phi * dphi * dphi + (1.0 - rho * rho) * dphi * dphi * dphi
}

/// `phi''` solved from the profile equation. Infinite or NaN on the
/// constraint manifold and at `rho = 0`.
pub fn profile_second_derivative(rho: f64, phi: f64, dphi: f64) -> f64 {
    let gap = 1.0 - rho * rho - phi * phi;
    -first_order_branch_residual(rho, phi, dphi) / (rho * gap)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootOptions {
    /// Nominal step; each step starts here and is halved as needed.
    pub drho: f64,
    /// Absolute step-doubling tolerance.
    pub tolerance: f64,
}

/// Integrates from an arbitrary state up to `rho_end`.
pub fn integrate_profile(
    start: ProfileState,
    rho_end: f64,
    opts: ShootOptions,
) -> Result<ProfileSolveResult> {
    if !(opts.drho > 0.0) || !(opts.tolerance > 0.0) {
        return Err(LabError::invalid("drho and tolerance must be > 0"));
    }
    if !(start.rho > 0.0) {
        return Err(LabError::Singular(
            "profile integration must start at rho > 0".into(),
        ));
    }
    if !(rho_end > start.rho && rho_end < 1.0) {
        return Err(LabError::domain(format!(
            "need rho_start < rho_end < 1, got {} and {rho_end}",
            start.rho
        )));
    }
    if start.gap() <= EPS_PROFILE_DEG {
        return Err(LabError::Degeneracy {
            what: "profile start gap 1 - rho^2 - phi^2".into(),
            value: start.gap(),
            floor: EPS_PROFILE_DEG,
        });
    }
    let rhs = |r: f64, y: &[f64]| -> Result<Vec<f64>> {
        Ok(vec![y[1], profile_second_derivative(r, y[0], y[1])])
    };
    let mut samples = vec![start];
    let mut cur = start;
    let mut h = opts.drho;
    let finish = |samples, termination, loc| ProfileSolveResult {
        samples,
        termination,
        degeneracy_location: loc,
    };
    while rho_end - cur.rho > 1e-13 {
        let remaining = rho_end - cur.rho;
        let dt = if remaining <= h * (1.0 + 1e-9) {
            remaining
        } else {
            h
        };
        let out = rk4_adaptive(
            &[cur.phi, cur.dphi],
            rhs,
            cur.rho,
            dt,
            opts.tolerance,
            PROFILE_STEP_FLOOR,
        )?;
        let step = match out {
            AdaptiveOutcome::Accepted(s) => s,
            AdaptiveOutcome::StepFloor { .. } => {
                return Ok(finish(samples, Termination::StepFloor, None))
            }
        };
        let next = ProfileState {
            rho: if dt == remaining && step.dt == dt {
                rho_end
            } else {
                step.t
            },
            phi: step.y[0],
            dphi: step.y[1],
        };
        if !(next.phi.is_finite() && next.dphi.is_finite()) {
            return Ok(finish(samples, Termination::NonFinite, None));
        }
        let gap = next.gap();
        if gap < 0.0 {
            // stepped across the constraint manifold: retry shorter
            h = 0.5 * step.dt;
            if h < PROFILE_STEP_FLOOR {
                return Ok(finish(samples, Termination::StepFloor, None));
            }
            continue;
        }
        samples.push(next);
        cur = next;
        if gap <= EPS_PROFILE_DEG {
            return Ok(finish(samples, Termination::DegeneracyHit, Some(next.rho)));
        }
        h = opts.drho;
    }
    Ok(finish(samples, Termination::ReachedEnd, None))
}

/// Regular shot from `phi(0) = a`, `phi'(0) = 0`. The state is carried
/// unchanged to `rho = 10 drho` (every Taylor correction vanishes there)
/// and integrated onward.
pub fn shoot_profile(a: f64, rho_max: f64, opts: ShootOptions) -> Result<ProfileSolveResult> {
    if !a.is_finite() {
        return Err(LabError::invalid("phi(0) must be finite"));
    }
    let rho0 = 10.0 * opts.drho;
    let start = ProfileState {
        rho: rho0,
        phi: a,
        dphi: 0.0,
    };
    if start.gap() <= EPS_PROFILE_DEG {
        return Err(LabError::Degeneracy {
            what: format!("regular start with phi(0) = {a} lies on or beyond the constraint manifold; use verify_branch"),
            value: start.gap(),
            floor: EPS_PROFILE_DEG,
        });
    }
    let mut res = integrate_profile(start, rho_max, opts)?;
    res.samples.insert(
        0,
        ProfileState {
            rho: 0.0,
            phi: a,
            dphi: 0.0,
        },
    );
    Ok(res)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchSign {
    Plus,
    Minus,
}

/// `(phi, phi', phi'')` on `phi = +-sqrt(1 - rho^2)`.
pub fn branch_values(sign: BranchSign, rho: f64) -> (f64, f64, f64) {
    let s = match sign {
        BranchSign::Plus => 1.0,
        BranchSign::Minus => -1.0,
    };
    let w = (1.0 - rho * rho).sqrt();
    (s * w, -s * rho / w, -s / (w * w * w))
}

/// Samples both the full and the first-order residual on the explicit
/// branch; each point contributes the larger of the two in magnitude.
pub fn verify_branch(
    sign: BranchSign,
    n_samples: usize,
    range: (f64, f64),
) -> Result<ResidualReport> {
    let (lo, hi) = range;
    if !(0.0 < lo && lo < hi && hi < 1.0) {
        return Err(LabError::domain(format!(
            "branch range must lie inside (0, 1), got [{lo}, {hi}]"
        )));
    }
    if n_samples < 2 {
        return Err(LabError::Arity {
            needed: 2,
            got: n_samples,
        });
    }
    let label = match sign {
        BranchSign::Plus => "profile-branch-plus",
        BranchSign::Minus => "profile-branch-minus",
    };
    let mut b = ReportBuilder::new(label, false);
    for i in 0..n_samples {
        let rho = lo + (hi - lo) * i as f64 / (n_samples - 1) as f64;
        let (phi, dphi, d2phi) = branch_values(sign, rho);
        let full = profile_residual(ProfileState { rho, phi, dphi }, d2phi);
        let first = first_order_branch_residual(rho, phi, dphi);
        b.push(
            (rho, phi),
            if full.abs() >= first.abs() {
                full
            } else {
                first
            },
        );
    }
    Ok(b.finish())
}

impl ProfileSolveResult {
    /// CSV: `rho,phi,dphi,gap`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "rho,phi,dphi,gap")?;
        for s in &self.samples {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e},{:.17e}",
                s.rho,
                s.phi,
                s.dphi,
                s.gap()
            )?;
        }
        Ok(())
    }
}
