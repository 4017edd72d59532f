//! Similarity coordinates `tau = -ln(T - a)`, `rho = b / (T - a)`, the
//! reduced steady ODEs and the transformed evolution equations.
//!
//! Two field scalings are in play and every call names one explicitly:
//! `Unscaled` (`u(a, b) = v(tau, rho)`) and `Linear`
//! (`u = (T - a) v~`, i.e. `v~ = e^tau u`).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::jet::Jet2;
use crate::numerics::rk4_step;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// `(t, x) -> (-ln(T - t), x / (T - t))`
    TimeBased,
    /// `(x, y) -> (-ln(T - x), y / (T - x))`
    SpaceBased,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMap {
    pub blowup_time: f64,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldScaling {
    Unscaled,
    Linear,
}

impl SimilarityMap {
    pub fn new(blowup_time: f64, orientation: Orientation) -> Result<Self> {
        if !(blowup_time > 0.0 && blowup_time.is_finite()) {
            return Err(LabError::invalid("blow-up time must be > 0"));
        }
        Ok(SimilarityMap {
            blowup_time,
            orientation,
        })
    }

    pub fn to_similarity(&self, (a, b): (f64, f64)) -> Result<(f64, f64)> {
        let s = self.blowup_time - a;
        if !(s > 0.0) {
            let name = match self.orientation {
                Orientation::TimeBased => "t",
                Orientation::SpaceBased => "x",
            };
            return Err(LabError::domain(format!(
                "similarity map needs {name} < T, got {name} = {a}, T = {}",
                self.blowup_time
            )));
        }
        Ok((-s.ln(), b / s))
    }

    pub fn from_similarity(&self, (tau, rho): (f64, f64)) -> (f64, f64) {
        let s = (-tau).exp();
        (self.blowup_time - s, rho * s)
    }
}

/// Physical 2-jet at `point` to the similarity-frame jet in `(tau, rho)`.
///
/// Inverts `u_a = e^tau (v_tau + rho v_rho)`, `u_b = e^tau v_rho`,
/// `u_bb = e^2tau v_rhorho`, `u_ab = e^2tau (v_taurho + v_rho + rho v_rhorho)`,
/// `u_aa = e^2tau (v_tautau + v_tau + 2 rho v_rho + 2 rho v_taurho + rho^2 v_rhorho)`.
pub fn transform_field_jet(
    map: &SimilarityMap,
    point: (f64, f64),
    jet: &Jet2,
    scaling: FieldScaling,
) -> Result<Jet2> {
    let (tau, rho) = map.to_similarity(point)?;
    let s = map.blowup_time - point.0; // e^-tau
    let s2 = s * s;
    let v = jet.value;
    let vr = s * jet.db;
    let vt = s * jet.da - rho * vr;
    let vrr = s2 * jet.dbb;
    let vtr = s2 * jet.dab - vr - rho * vrr;
    let vtt = s2 * jet.daa - vt - 2.0 * rho * vr - 2.0 * rho * vtr - rho * rho * vrr;
    let unscaled = Jet2 {
        value: v,
        da: vt,
        db: vr,
        daa: vtt,
        dab: vtr,
        dbb: vrr,
    };
    Ok(match scaling {
        FieldScaling::Unscaled => unscaled,
        FieldScaling::Linear => scale_up(&unscaled, tau),
    })
}

/// Similarity-frame jet back to the physical jet (the forward chain rule).
pub fn jet_to_physical(
    map: &SimilarityMap,
    sim_point: (f64, f64),
    sim_jet: &Jet2,
    scaling: FieldScaling,
) -> Jet2 {
    let (tau, rho) = sim_point;
    let v = match scaling {
        FieldScaling::Unscaled => *sim_jet,
        FieldScaling::Linear => scale_down(sim_jet, tau),
    };
    let e = tau.exp();
    let e2 = e * e;
    let _ = map;
    Jet2 {
        value: v.value,
        da: e * (v.da + rho * v.db),
        db: e * v.db,
        daa: e2 * (v.daa + v.da + 2.0 * rho * v.db + 2.0 * rho * v.dab + rho * rho * v.dbb),
        dab: e2 * (v.dab + v.db + rho * v.dbb),
        dbb: e2 * v.dbb,
    }
}

/// `v~ = e^tau v`.
fn scale_up(v: &Jet2, tau: f64) -> Jet2 {
    let e = tau.exp();
    Jet2 {
        value: e * v.value,
        da: e * (v.value + v.da),
        db: e * v.db,
        daa: e * (v.value + 2.0 * v.da + v.daa),
        dab: e * (v.db + v.dab),
        dbb: e * v.dbb,
    }
}

/// `v = e^-tau v~`.
fn scale_down(w: &Jet2, tau: f64) -> Jet2 {
    let e = (-tau).exp();
    Jet2 {
        value: e * w.value,
        da: e * (w.da - w.value),
        db: e * w.db,
        daa: e * (w.daa - 2.0 * w.da + w.value),
        dab: e * (w.dab - w.db),
        dbb: e * w.dbb,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SteadyOde {
    /// `(rho^2 - 1) v'' + 2 rho v' = 0`
    BornInfeld,
    /// `(rho^2 + 1) v'' + 2 rho v' = 0`
    Spacelike,
    /// tau-independent part of the similarity membrane equation
    Membrane,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SteadyClosedForm {
    Single {
        value: f64,
    },
    /// Printed family `k asinh(rho)` next to the actual solution `k arctan(rho)`.
    ClaimedCorrected {
        claimed: f64,
        corrected: f64,
    },
}

pub fn steady_ode_closed_form(id: SteadyOde, k: f64, rho: f64) -> Result<SteadyClosedForm> {
    match id {
        SteadyOde::BornInfeld => {
            if !(rho.abs() < 1.0) {
                return Err(LabError::domain(format!("|rho| < 1 required, got {rho}")));
            }
            Ok(SteadyClosedForm::Single {
                value: k * (2.0 * rho / (1.0 - rho)).ln_1p(),
            })
        }
        SteadyOde::Spacelike => Ok(SteadyClosedForm::ClaimedCorrected {
            claimed: k * rho.asinh(),
            corrected: k * rho.atan(),
        }),
        SteadyOde::Membrane => Err(LabError::invalid(
            "the membrane steady equation has no one-parameter closed form here; see profile::verify_branch",
        )),
    }
}

/// Membrane steady residual with `v~ = phi(rho)`:
/// `-(1 - rho^2) phi'' - phi'/rho - 2 phi phi'^2 + phi'' phi^2 + phi' phi^2 / rho + (rho^2 - 1) phi'^3 / rho`.
pub(crate) fn membrane_steady(v: f64, dv: f64, d2v: f64, rho: f64) -> f64 {
    -(1.0 - rho * rho) * d2v - dv / rho - 2.0 * v * dv * dv
        + d2v * v * v
        + dv * v * v / rho
        + (rho * rho - 1.0) * dv * dv * dv / rho
}

pub fn steady_ode_residual(id: SteadyOde, v: f64, dv: f64, d2v: f64, rho: f64) -> Result<f64> {
    if ![v, dv, d2v, rho].iter().all(|x| x.is_finite()) {
        return Err(LabError::NonFinite {
            location: format!("steady residual inputs at rho = {rho}"),
        });
    }
    match id {
        SteadyOde::BornInfeld => Ok((rho * rho - 1.0) * d2v + 2.0 * rho * dv),
        SteadyOde::Spacelike => Ok((rho * rho + 1.0) * d2v + 2.0 * rho * dv),
        SteadyOde::Membrane => {
            if rho == 0.0 {
                return Err(LabError::Singular(
                    "membrane steady residual at rho = 0".into(),
                ));
            }
            Ok(membrane_steady(v, dv, d2v, rho))
        }
    }
}

/// Second derivative solved from the selected steady ODE.
fn steady_second_derivative(id: SteadyOde, rho: f64, v: f64, dv: f64) -> Result<f64> {
    match id {
        SteadyOde::BornInfeld => Ok(2.0 * rho * dv / (1.0 - rho * rho)),
        SteadyOde::Spacelike => Ok(-2.0 * rho * dv / (1.0 + rho * rho)),
        SteadyOde::Membrane => {
            if rho == 0.0 {
                return Err(LabError::Singular("membrane steady ODE at rho = 0".into()));
            }
            Ok(crate::profile::profile_second_derivative(rho, v, dv))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadySolution {
    pub id: SteadyOde,
    pub rho: Vec<f64>,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
}

/// RK4 integration of a steady ODE from `(v, v')` at `rho_start` to `rho_end`.
pub fn steady_ode_integrate(
    id: SteadyOde,
    initial: (f64, f64),
    rho_start: f64,
    rho_end: f64,
    drho: f64,
) -> Result<SteadySolution> {
    if !(drho > 0.0) {
        return Err(LabError::invalid("drho must be > 0"));
    }
    if !(rho_end > rho_start) {
        return Err(LabError::invalid("rho_end must exceed rho_start"));
    }
    if id == SteadyOde::BornInfeld {
        let reach = rho_start.abs().max(rho_end.abs());
        if reach > 1.0 - 10.0 * drho {
            return Err(LabError::domain(format!(
                "range reaches |rho| = {reach}; must stay below 1 - 10 drho = {}",
                1.0 - 10.0 * drho
            )));
        }
    }
    if id == SteadyOde::Membrane && rho_start <= 0.0 {
        return Err(LabError::Singular(
            "membrane steady ODE needs rho > 0".into(),
        ));
    }
    let n = ((rho_end - rho_start) / drho).round().max(1.0) as usize;
    let h = (rho_end - rho_start) / n as f64;
    let mut out = SteadySolution {
        id,
        rho: Vec::with_capacity(n + 1),
        v: Vec::with_capacity(n + 1),
        dv: Vec::with_capacity(n + 1),
    };
    let mut y = vec![initial.0, initial.1];
    out.rho.push(rho_start);
    out.v.push(y[0]);
    out.dv.push(y[1]);
    let rhs = |r: f64, y: &[f64]| -> Result<Vec<f64>> {
        Ok(vec![y[1], steady_second_derivative(id, r, y[0], y[1])?])
    };
    for i in 0..n {
        let r = rho_start + i as f64 * h;
        y = rk4_step(&y, rhs, r, h)?;
        out.rho.push(rho_start + (i + 1) as f64 * h);
        out.v.push(y[0]);
        out.dv.push(y[1]);
    }
    Ok(out)
}

impl SteadySolution {
    /// CSV: `rho,v_numeric,v_closed_claimed,v_closed_corrected`. For the
    /// Born-Infeld equation both closed-form columns carry the same family.
    pub fn write_csv<W: Write>(&self, k: f64, mut w: W) -> Result<()> {
        writeln!(w, "rho,v_numeric,v_closed_claimed,v_closed_corrected")?;
        for (r, v) in self.rho.iter().zip(&self.v) {
            let (c, d) = match steady_ode_closed_form(self.id, k, *r) {
                Ok(SteadyClosedForm::Single { value }) => (Some(value), Some(value)),
                Ok(SteadyClosedForm::ClaimedCorrected { claimed, corrected }) => {
                    (Some(claimed), Some(corrected))
                }
                Err(_) => (None, None),
            };
            let cell = |x: Option<f64>| x.map(|x| format!("{x:.17e}")).unwrap_or_default();
            writeln!(w, "{:.17e},{:.17e},{},{}", r, v, cell(c), cell(d))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformedEq {
    /// Born-Infeld in `(tau, rho)`, unscaled `v`.
    SimilarityBornInfeld,
    /// Radial membrane in `(tau, rho)`, linearly scaled `v~`.
    SimilarityMembrane,
    /// Spacelike equation in `(tau, rho)` with space-based similarity, unscaled `v`.
    SimilaritySpacelike,
}

/// Residual of a transformed equation, evaluated term by term in its
/// printed form (including the `e^2tau` factors).
pub fn transformed_equation_residual(
    eq: TransformedEq,
    jet: &Jet2,
    (tau, rho): (f64, f64),
) -> Result<f64> {
    if !jet.is_finite() {
        return Err(LabError::NonFinite {
            location: format!("similarity jet at ({tau}, {rho})"),
        });
    }
    let (v, vt, vr, vtt, vtr, vrr) = (jet.value, jet.da, jet.db, jet.daa, jet.dab, jet.dbb);
    let e2 = (2.0 * tau).exp();
    // shared pieces: u_aa / e^2tau, u_a / e^tau, u_ab / e^2tau
    let a = vtt + vt + 2.0 * rho * vr + 2.0 * rho * vtr + rho * rho * vrr;
    let g = vt + rho * vr;
    let m = vr + rho * vrr + vtr;
    Ok(match eq {
        TransformedEq::SimilarityBornInfeld => {
            vtt - (1.0 - rho * rho) * vrr
                + vt
                + 2.0 * rho * vr
                + 2.0 * rho * vtr
                + e2 * vr * vr * a
                + e2 * g * g * vrr
                - 2.0 * e2 * vr * g * m
        }
        TransformedEq::SimilaritySpacelike => {
            vtt + (1.0 + rho * rho) * vrr + vt + 2.0 * rho * vr + 2.0 * rho * vtr
                - e2 * vr * vr * a
                - e2 * g * g * vrr
                + 2.0 * e2 * vr * g * m
        }
        TransformedEq::SimilarityMembrane => {
            if rho == 0.0 {
                return Err(LabError::Singular(
                    "similarity membrane residual at rho = 0".into(),
                ));
            }
            vtt - vt - (1.0 - rho * rho) * vrr - vr / rho
                + 2.0 * rho * vtr
                + vr * vr * (vtt + vt - 2.0 * v)
                + vrr * (v - vt) * (v - vt)
                - 2.0 * vr * vtr * (vt - v)
                + vr * (vt - v) * (vt - v) / rho
                + (rho * rho - 1.0) * vr * vr * vr / rho
        }
    })
}
