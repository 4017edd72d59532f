//! Pointwise PDE residuals (left-hand side minus right-hand side) for the
//! three graph equations, the divergence form and the eikonal identity.

use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::closedform::ClosedFormSolution;
use crate::error::{LabError, Result};
use crate::jet::Jet2;
use crate::numerics::{central_diff_jet2, SampledField2};
use crate::scalar::Scalar;

/// Floor on `1 - u_t^2 + |grad u|^2` below which the divergence form is refused.
pub const EPS_DEG: f64 = 1e-10;

/// Largest `|u_r|` accepted at the axis.
pub const AXIS_REGULARITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquationId {
    /// `u_tt (1 + u_x^2) - u_xx (1 - u_t^2) - 2 u_t u_x u_tx`
    BornInfeld,
    /// Seven-term radial membrane operator in `(t, r)`.
    RadialMembrane,
    /// `u_xx (1 - u_y^2) + u_yy (1 - u_x^2) + 2 u_x u_y u_xy`
    SpacelikeZmc,
    /// `d_t(u_t / S) - d_x(u_x / S)`, `S = sqrt(1 - u_t^2 + u_x^2)`
    DivergenceForm,
    /// `1 - u_t^2 + u_x^2`
    Eikonal,
}

impl EquationId {
    pub fn label(self) -> &'static str {
        match self {
            EquationId::BornInfeld => "born-infeld",
            EquationId::RadialMembrane => "radial-membrane",
            EquationId::SpacelikeZmc => "spacelike-zmc",
            EquationId::DivergenceForm => "divergence-form",
            EquationId::Eikonal => "eikonal",
        }
    }
}

impl std::fmt::Display for EquationId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

fn born_infeld<S: Scalar>(j: &Jet2<S>) -> S {
    let one = S::one();
    j.daa * (one + j.db.sq()) - j.dbb * (one - j.da.sq()) - S::of(2.0) * j.da * j.db * j.dab
}

fn radial_membrane<S: Scalar>(j: &Jet2<S>, r: S) -> S {
    let (ut, ur, utt, utr, urr) = (j.da, j.db, j.daa, j.dab, j.dbb);
    utt - urr - ur / r + utt * ur.sq() + urr * ut.sq() - S::of(2.0) * ut * ur * utr
        + ur * ut.sq() / r
        - ur * ur.sq() / r
}

fn spacelike<S: Scalar>(j: &Jet2<S>) -> S {
    let one = S::one();
    j.daa * (one - j.db.sq()) + j.dbb * (one - j.da.sq()) + S::of(2.0) * j.da * j.db * j.dab
}

fn eikonal<S: Scalar>(j: &Jet2<S>) -> S {
    S::one() - j.da.sq() + j.db.sq()
}

/// Chain-rule expansion of `d_t(p/S) - d_x(q/S)` with `p = u_t`, `q = u_x`.
fn divergence_form<S: Scalar>(j: &Jet2<S>) -> Result<S> {
    let (p, q) = (j.da, j.db);
    let d = eikonal(j);
    if !(d.to_f64() > EPS_DEG) {
        return Err(LabError::Degeneracy {
            what: "1 - u_t^2 + u_x^2".into(),
            value: d.to_f64(),
            floor: EPS_DEG,
        });
    }
    let s = d.sqrt();
    let s3 = d * s;
    let two = S::of(2.0);
    let d_t = two * (q * j.dab - p * j.daa);
    let d_x = two * (q * j.dbb - p * j.dab);
    let flux_t = j.daa / s - p * d_t / (two * s3);
    let flux_x = j.dbb / s - q * d_x / (two * s3);
    Ok(flux_t - flux_x)
}

fn residual_generic<S: Scalar>(eq: EquationId, jet: &Jet2<S>, b: f64) -> Result<S> {
    match eq {
        EquationId::BornInfeld => Ok(born_infeld(jet)),
        EquationId::RadialMembrane => {
            if b == 0.0 {
                return Err(LabError::Singular(
                    "radial membrane residual at r = 0; use residual_at_axis".into(),
                ));
            }
            Ok(radial_membrane(jet, S::of(b)))
        }
        EquationId::SpacelikeZmc => Ok(spacelike(jet)),
        EquationId::DivergenceForm => divergence_form(jet),
        EquationId::Eikonal => Ok(eikonal(jet)),
    }
}

/// Residual of `eq` at `point` from a 2-jet in the equation's coordinates.
pub fn residual_at(eq: EquationId, jet: &Jet2, point: (f64, f64)) -> Result<f64> {
    if !jet.is_finite() {
        return Err(LabError::NonFinite {
            location: format!("jet at ({}, {})", point.0, point.1),
        });
    }
    residual_generic(eq, jet, point.1)
}

/// Double-double version of [`residual_at`].
pub fn residual_at_hp(eq: EquationId, jet: &Jet2<TwoFloat>, point: (f64, f64)) -> Result<f64> {
    residual_generic(eq, jet, point.1).map(|r| r.to_f64())
}

fn axis_generic<S: Scalar>(jet: &Jet2<S>) -> Result<S> {
    if jet.db.to_f64().abs() > AXIS_REGULARITY_TOL {
        return Err(LabError::Regularity(format!(
            "u_r = {:e} at the axis; field is not even in r",
            jet.db.to_f64()
        )));
    }
    // r -> 0 with u_r ~ r u_rr: u_r/r -> u_rr, u_r u_t^2 / r -> u_rr u_t^2, u_r^3/r -> 0
    Ok(jet.daa - S::of(2.0) * jet.dbb * (S::one() - jet.da.sq()))
}

/// Radial membrane residual at `r = 0` via the even-extension limit
/// `u_tt - 2 u_rr (1 - u_t^2)`.
pub fn residual_at_axis(jet: &Jet2) -> Result<f64> {
    axis_generic(jet)
}

pub fn residual_at_axis_hp(jet: &Jet2<TwoFloat>) -> Result<f64> {
    axis_generic(jet).map(|r| r.to_f64())
}

/// Residual of a sampled `(t, x)` field from its central-difference jet.
pub fn discrete_residual(
    eq: EquationId,
    field: &SampledField2,
    i: usize,
    level: usize,
) -> Result<f64> {
    let jet = central_diff_jet2(field, i, level)?;
    let point = (field.time(level), field.grid.node(i));
    if eq == EquationId::RadialMembrane && point.1 == 0.0 {
        return residual_at_axis(&jet);
    }
    residual_at(eq, &jet, point)
}

/// Divergence-form residual of a sampled field: the fluxes `u_t/S`, `u_x/S`
/// are formed at the four neighbours from central differences and then
/// differenced again (so the stencil reaches two nodes/levels out).
pub fn divergence_form_residual(field: &SampledField2, i: usize, level: usize) -> Result<f64> {
    field.check_width(i, level, 2)?;
    let h = field.grid.spacing();
    let k = field.dt;
    let f = |l: usize, j: usize| field.at(l, j);
    let flux = |l: usize, j: usize| -> Result<(f64, f64)> {
        let p = (f(l + 1, j) - f(l - 1, j)) / (2.0 * k);
        let q = (f(l, j + 1) - f(l, j - 1)) / (2.0 * h);
        let d = 1.0 - p * p + q * q;
        if !(d > EPS_DEG) {
            return Err(LabError::Degeneracy {
                what: "1 - u_t^2 + u_x^2".into(),
                value: d,
                floor: EPS_DEG,
            });
        }
        let s = d.sqrt();
        Ok((p / s, q / s))
    };
    let (ft_up, _) = flux(level + 1, i)?;
    let (ft_dn, _) = flux(level - 1, i)?;
    let (_, fx_rt) = flux(level, i + 1)?;
    let (_, fx_lt) = flux(level, i - 1)?;
    flux(level, i)?;
    Ok((ft_up - ft_dn) / (2.0 * k) - (fx_rt - fx_lt) / (2.0 * h))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub equation: String,
    pub n_points: usize,
    pub max_abs: f64,
    pub rms: f64,
    pub worst_point: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_point: Option<Vec<([f64; 2], f64)>>,
}

/// Streaming max / root-mean-square accumulator.
#[derive(Debug, Clone)]
pub struct ReportBuilder {
    equation: String,
    n: usize,
    max_abs: f64,
    sum_sq: f64,
    worst: [f64; 2],
    per_point: Option<Vec<([f64; 2], f64)>>,
}

impl ReportBuilder {
    pub fn new(equation: impl Into<String>, keep_points: bool) -> Self {
        ReportBuilder {
            equation: equation.into(),
            n: 0,
            max_abs: 0.0,
            sum_sq: 0.0,
            worst: [f64::NAN, f64::NAN],
            per_point: keep_points.then(Vec::new),
        }
    }

    pub fn push(&mut self, point: (f64, f64), residual: f64) {
        let a = residual.abs();
        if self.n == 0 || a > self.max_abs || a.is_nan() {
            self.max_abs = a;
            self.worst = [point.0, point.1];
        }
        self.n += 1;
        self.sum_sq += residual * residual;
        if let Some(v) = self.per_point.as_mut() {
            v.push(([point.0, point.1], residual));
        }
    }

    pub fn finish(self) -> ResidualReport {
        let rms = if self.n == 0 {
            0.0
        } else {
            (self.sum_sq / self.n as f64).sqrt()
        };
        ResidualReport {
            equation: self.equation,
            n_points: self.n,
            max_abs: self.max_abs,
            // rms <= max_abs holds exactly; clamp rounding
            rms: rms.min(self.max_abs),
            worst_point: self.worst,
            per_point: self.per_point,
        }
    }
}

/// Deterministic tensor-product sample sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Sampler {
    /// `t` on `[0, T - 2 margin]`, `x` on `[-(T - t - margin), T - t - margin]`.
    Lightcone {
        n_time: usize,
        n_space: usize,
        margin: f64,
    },
    /// `t` on `[t_lo, t_hi]`, second coordinate `rho (T - t)` with `rho` on `[rho_lo, rho_hi]`.
    Similarity {
        n_time: usize,
        n_rho: usize,
        t_lo: f64,
        t_hi: f64,
        rho_lo: f64,
        rho_hi: f64,
    },
    Rectangle {
        a_lo: f64,
        a_hi: f64,
        b_lo: f64,
        b_hi: f64,
        n_a: usize,
        n_b: usize,
    },
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

impl Sampler {
    pub fn points(&self, blowup_time: f64) -> Result<Vec<(f64, f64)>> {
        let tt = blowup_time;
        let mut out = Vec::new();
        match *self {
            Sampler::Lightcone {
                n_time,
                n_space,
                margin,
            } => {
                if !(margin > 0.0 && 2.0 * margin < tt) {
                    return Err(LabError::invalid(format!(
                        "lightcone margin {margin} invalid for T = {tt}"
                    )));
                }
                for t in linspace(0.0, tt - 2.0 * margin, n_time) {
                    let half = tt - t - margin;
                    for x in linspace(-half, half, n_space) {
                        out.push((t, x));
                    }
                }
            }
            Sampler::Similarity {
                n_time,
                n_rho,
                t_lo,
                t_hi,
                rho_lo,
                rho_hi,
            } => {
                if !(t_lo <= t_hi && t_hi < tt) {
                    return Err(LabError::invalid(
                        "similarity sampler needs t_lo <= t_hi < T",
                    ));
                }
                for t in linspace(t_lo, t_hi, n_time) {
                    for rho in linspace(rho_lo, rho_hi, n_rho) {
                        out.push((t, rho * (tt - t)));
                    }
                }
            }
            Sampler::Rectangle {
                a_lo,
                a_hi,
                b_lo,
                b_hi,
                n_a,
                n_b,
            } => {
                for a in linspace(a_lo, a_hi, n_a) {
                    for b in linspace(b_lo, b_hi, n_b) {
                        out.push((a, b));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Evaluate `eq` on a closed-form solution at every sample (in double-double)
/// and aggregate. Radial membrane samples on the axis use the limit formula.
pub fn sweep_residual(
    eq: EquationId,
    sol: &ClosedFormSolution,
    sampler: &Sampler,
) -> Result<ResidualReport> {
    sweep(eq, sol, sampler, false)
}

pub fn sweep_residual_detailed(
    eq: EquationId,
    sol: &ClosedFormSolution,
    sampler: &Sampler,
) -> Result<ResidualReport> {
    sweep(eq, sol, sampler, true)
}

fn sweep(
    eq: EquationId,
    sol: &ClosedFormSolution,
    sampler: &Sampler,
    keep: bool,
) -> Result<ResidualReport> {
    let mut rb = ReportBuilder::new(eq.label(), keep);
    for p in sampler.points(sol.blowup_time())? {
        let jet = sol.evaluate_jet_hp(p)?;
        let r = if eq == EquationId::RadialMembrane && p.1 == 0.0 {
            residual_at_axis_hp(&jet)?
        } else {
            residual_at_hp(eq, &jet, p)?
        };
        rb.push(p, r);
    }
    Ok(rb.finish())
}
