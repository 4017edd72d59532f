//! Fixed list of quantitative claims about the explicit blow-up solutions,
//! each recomputed and given a verdict against a hard-coded expectation.

use serde::{Deserialize, Serialize};

use crate::closedform::{ClosedFormSolution, Family};
use crate::conserved::{measure_scaling_exponent, WeightKind};
use crate::error::Result;
use crate::evolution::{
    evolve, fit_blowup_rate, BoundaryTreatment, Equation, EvolutionConfig, EvolutionState,
};
use crate::numerics::Grid1D;
use crate::profile::{branch_values, BranchSign};
use crate::residual::{residual_at, sweep_residual, EquationId, Sampler};
use crate::similarity::{steady_ode_integrate, SteadyOde};
use crate::stability::{bump_direction, directional_linearization_check, solve_mode_quadratic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Match,
    Mismatch,
    QualitativeMatch,
    MeasuredNoClaim,
}

/// Verdict on one aspect of a claim, next to the headline verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub aspect: String,
    pub verdict: Verdict,
}

/// Named number; `null` plus a reason when it could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl Metric {
    fn of(name: &str, r: Result<f64>) -> Self {
        match r {
            Ok(v) if v.is_finite() => Metric {
                name: name.into(),
                value: Some(v),
                reason: None,
            },
            Ok(v) => Metric {
                name: name.into(),
                value: None,
                reason: Some(format!("value {v} is not finite")),
            },
            Err(e) => Metric {
                name: name.into(),
                value: None,
                reason: Some(e.to_string()),
            },
        }
    }

    fn value(name: &str, v: f64) -> Self {
        Self::of(name, Ok(v))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditClaim {
    pub id: String,
    pub description: String,
    pub paper_location: String,
    pub claimed: String,
    pub computed: String,
    pub verdict: Verdict,
    pub expected_verdict: Verdict,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub findings: Vec<Finding>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub metrics: Vec<Metric>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub claims: Vec<AuditClaim>,
    /// Numbers reported without a pass/fail threshold.
    pub measurements: Vec<Metric>,
    /// Every claim reproduced its expected verdict.
    pub all_expected: bool,
}

impl AuditReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("audit report serialises")
    }

    pub fn claim(&self, id: &str) -> Option<&AuditClaim> {
        self.claims.iter().find(|c| c.id == id)
    }
}

const RESIDUAL_TOL: f64 = 1e-9;
const EIKONAL_TOL: f64 = 1e-12;

fn e(x: f64) -> String {
    format!("{x:.6e}")
}

fn pick(ok: bool, yes: Verdict, no: Verdict) -> Verdict {
    if ok {
        yes
    } else {
        no
    }
}

fn lightcone_samples() -> Sampler {
    Sampler::Lightcone {
        n_time: 100,
        n_space: 100,
        margin: 0.02,
    }
}

fn sphere_samples() -> Sampler {
    Sampler::Similarity {
        n_time: 100,
        n_rho: 100,
        t_lo: 0.0,
        t_hi: 0.98,
        rho_lo: 0.0,
        rho_hi: 0.95,
    }
}

fn born_infeld_solution() -> Result<AuditClaim> {
    let mut metrics = Vec::new();
    let mut worst: f64 = 0.0;
    for k in [0.2, 1.0, -3.0] {
        let sol = ClosedFormSolution::born_infeld(k, 1.0)?;
        let r = sweep_residual(EquationId::BornInfeld, &sol, &lightcone_samples())?;
        worst = worst.max(r.max_abs);
        metrics.push(Metric::value(&format!("max_abs_residual_k={k}"), r.max_abs));
    }
    Ok(AuditClaim {
        id: "1".into(),
        description: "k ln((T-t+x)/(T-t-x)) solves the Born-Infeld equation in the light cone"
            .into(),
        paper_location: "main theorem, first family".into(),
        claimed: "residual 0".into(),
        computed: format!(
            "max |residual| {} over 3 x 10^4 interior samples, k in {{0.2, 1, -3}}",
            e(worst)
        ),
        verdict: pick(worst <= RESIDUAL_TOL, Verdict::Match, Verdict::Mismatch),
        expected_verdict: Verdict::Match,
        findings: vec![],
        metrics,
    })
}

fn membrane_solution() -> Result<AuditClaim> {
    let mut metrics = Vec::new();
    let mut worst: f64 = 0.0;
    for plus in [true, false] {
        let sol = ClosedFormSolution::sphere(plus, 1.0)?;
        let r = sweep_residual(EquationId::RadialMembrane, &sol, &sphere_samples())?;
        worst = worst.max(r.max_abs);
        metrics.push(Metric::value(
            &format!("max_abs_residual_{}", sol.family()),
            r.max_abs,
        ));
    }
    Ok(AuditClaim {
        id: "2".into(),
        description: "u_+- = +-sqrt((T-t)^2 - r^2) solve the radial membrane equation".into(),
        paper_location: "main theorem, second family".into(),
        claimed: "residual 0".into(),
        computed: format!(
            "max |residual| {} over 2 x 10^4 samples with rho <= 0.95",
            e(worst)
        ),
        verdict: pick(worst <= RESIDUAL_TOL, Verdict::Match, Verdict::Mismatch),
        expected_verdict: Verdict::Match,
        findings: vec![],
        metrics,
    })
}

fn spacelike_solution() -> Result<AuditClaim> {
    let (k, tt, x, y) = (1.0, 1.0, 0.0, 0.5);
    let claimed = ClosedFormSolution::new(Family::SpacelikeLogClaimed, tt, k)?;
    let at = residual_at(
        EquationId::SpacelikeZmc,
        &claimed.evaluate_jet((x, y))?,
        (x, y),
    )?;
    let formula = k * y / ((tt - x) * (tt - x) * ((tt - x) * (tt - x) + y * y).sqrt());
    let corrected = ClosedFormSolution::new(Family::SpacelikeArctanCorrected, tt, k)?;
    let square = Sampler::Rectangle {
        a_lo: 0.0,
        a_hi: 0.5,
        b_lo: 0.0,
        b_hi: 0.5,
        n_a: 100,
        n_b: 100,
    };
    let fixed = sweep_residual(EquationId::SpacelikeZmc, &corrected, &square)?;
    let log_fails = at.abs() >= 0.1 && (at - formula).abs() <= 1e-6;
    let arctan_ok = fixed.max_abs <= RESIDUAL_TOL;
    Ok(AuditClaim {
        id: "3".into(),
        description: "k ln|y/(T-x) + sqrt(1 + y^2/(T-x)^2)| solves the spacelike zero mean curvature equation".into(),
        paper_location: "main theorem, third family".into(),
        claimed: "residual 0".into(),
        computed: format!(
            "residual {} at (x, y) = (0, 0.5), T = k = 1 (predicted k y / ((T-x)^2 sqrt((T-x)^2 + y^2)) = {}); \
             k arctan(y/(T-x)) has max |residual| {} on [0, 0.5]^2",
            e(at),
            e(formula),
            e(fixed.max_abs)
        ),
        verdict: pick(log_fails, Verdict::Mismatch, Verdict::Match),
        expected_verdict: Verdict::Mismatch,
        findings: vec![
            Finding {
                aspect: "printed log family".into(),
                verdict: pick(log_fails, Verdict::Mismatch, Verdict::Match),
            },
            Finding {
                aspect: "arctan family".into(),
                verdict: pick(arctan_ok, Verdict::Match, Verdict::Mismatch),
            },
        ],
        metrics: vec![
            Metric::value("log_claimed_residual", at),
            Metric::value("predicted_residual", formula),
            Metric::value("arctan_max_abs_residual", fixed.max_abs),
        ],
    })
}

fn gradient_amplitude() -> Result<AuditClaim> {
    let (k, tt) = (0.2, 1.0);
    let sol = ClosedFormSolution::born_infeld(k, tt)?;
    let exact = sol.derivative_blowup_amplitude(0.5)? * (tt - 0.5);
    let grid = Grid1D::new(-0.5, 0.5, 800)?;
    let mut cfg = EvolutionConfig::new(Equation::BornInfeld, 0.95);
    cfg.dissipation = 0.0;
    cfg.boundary = BoundaryTreatment::ExactData { solution: sol };
    let run = evolve(EvolutionState::from_closed_form(&sol, grid, 0.0)?, &cfg)?;
    let (ts, gs) = run.origin_series();
    let fit = fit_blowup_rate(&ts, &gs, tt, (0.5, 0.95));
    let (amp, rate) = match &fit {
        Ok(f) => (f.fitted_amplitude, f.fitted_exponent),
        Err(_) => (f64::NAN, f64::NAN),
    };
    let amplitude_agrees = (exact - k).abs() <= 0.02 * k.abs() && (amp - k).abs() <= 0.1 * k.abs();
    let rate_agrees = (rate - 1.0).abs() <= 0.05;
    Ok(AuditClaim {
        id: "4".into(),
        description: "growth of the Born-Infeld gradient at the blow-up point".into(),
        paper_location: "Born-Infeld subsection of the proof, blow-up statement".into(),
        claimed: format!("u_x(t, 0) = k/(T-t), i.e. amplitude {k} for k = {k}"),
        computed: format!(
            "closed form (T-t) u_x(t, 0) = {} (= 2k); evolution (n = 800, exact edge data) fit {} (T-t)^-{}",
            e(exact),
            e(amp),
            e(rate)
        ),
        verdict: pick(amplitude_agrees, Verdict::Match, Verdict::Mismatch),
        expected_verdict: Verdict::Mismatch,
        findings: vec![
            Finding {
                aspect: "amplitude".into(),
                verdict: pick(amplitude_agrees, Verdict::Match, Verdict::Mismatch),
            },
            Finding {
                aspect: "(T-t)^-1 rate".into(),
                verdict: pick(rate_agrees, Verdict::QualitativeMatch, Verdict::Mismatch),
            },
        ],
        metrics: vec![
            Metric::value("closed_form_amplitude", exact),
            Metric::of("fitted_amplitude", fit.as_ref().map(|f| f.fitted_amplitude).map_err(Clone::clone)),
            Metric::of("fitted_exponent", fit.map(|f| f.fitted_exponent)),
        ],
    })
}

fn axis_curvature() -> Result<AuditClaim> {
    let (tt, t) = (1.0, 0.5);
    let plus = ClosedFormSolution::sphere(true, tt)?.derivative_blowup_amplitude(t)? * (tt - t);
    let minus = ClosedFormSolution::sphere(false, tt)?.derivative_blowup_amplitude(t)? * (tt - t);
    let sign_agrees = plus > 0.0 && minus < 0.0;
    let magnitude_agrees = (plus.abs() - 1.0).abs() <= 1e-12 && (minus.abs() - 1.0).abs() <= 1e-12;
    Ok(AuditClaim {
        id: "5".into(),
        description: "curvature u_rr of u_+- at the axis".into(),
        paper_location: "membrane subsection of the proof, after the sphere solutions".into(),
        claimed: "u_rr(t, 0) = +-1/(T-t) for u_+-".into(),
        computed: format!(
            "(T-t) u_rr(t, 0) = {} for u_+ and {} for u_-, i.e. -+1/(T-t)",
            e(plus),
            e(minus)
        ),
        verdict: pick(
            sign_agrees && magnitude_agrees,
            Verdict::Match,
            Verdict::Mismatch,
        ),
        expected_verdict: Verdict::Mismatch,
        findings: vec![
            Finding {
                aspect: "sign".into(),
                verdict: pick(sign_agrees, Verdict::Match, Verdict::Mismatch),
            },
            Finding {
                aspect: "magnitude 1/(T-t)".into(),
                verdict: pick(magnitude_agrees, Verdict::Match, Verdict::Mismatch),
            },
        ],
        metrics: vec![
            Metric::value("scaled_u_rr_plus", plus),
            Metric::value("scaled_u_rr_minus", minus),
        ],
    })
}

fn mode_eigenvalues() -> AuditClaim {
    let m = solve_mode_quadratic();
    AuditClaim {
        id: "6".into(),
        description: "mode eigenvalues of the linearised similarity membrane equation".into(),
        paper_location: "main theorem, final sentence; mode stability subsection".into(),
        claimed: format!(
            "nu in {{{}, {}}}",
            m.paper_claimed_roots[0], m.paper_claimed_roots[1]
        ),
        computed: format!(
            "nu^2 + 3 nu - 4 = 0 gives nu in {{{}, {}}} ({:?}, {:?})",
            m.roots[0], m.roots[1], m.classification[0].class, m.classification[1].class
        ),
        verdict: pick(m.match_verdict, Verdict::Match, Verdict::Mismatch),
        expected_verdict: Verdict::Mismatch,
        findings: vec![Finding {
            aspect: "one unstable and one stable mode".into(),
            verdict: pick(
                m.qualitative_match,
                Verdict::QualitativeMatch,
                Verdict::Mismatch,
            ),
        }],
        metrics: vec![
            Metric::value("root_1", m.roots[0]),
            Metric::value("root_2", m.roots[1]),
        ],
    }
}

fn lightlike_spheres() -> Result<AuditClaim> {
    let mut worst: f64 = 0.0;
    for plus in [true, false] {
        let sol = ClosedFormSolution::sphere(plus, 1.0)?;
        worst = worst.max(sweep_residual(EquationId::Eikonal, &sol, &sphere_samples())?.max_abs);
    }
    Ok(AuditClaim {
        id: "7".into(),
        description: "u_+- are lightlike: 1 - u_t^2 + u_r^2 = 0".into(),
        paper_location: "membrane subsection of the proof, backward light cone discussion".into(),
        claimed: "1 - u_t^2 + u_r^2 = 0".into(),
        computed: format!(
            "max |1 - u_t^2 + u_r^2| = {} over 2 x 10^4 samples",
            e(worst)
        ),
        verdict: pick(worst <= EIKONAL_TOL, Verdict::Match, Verdict::Mismatch),
        expected_verdict: Verdict::Match,
        findings: vec![],
        metrics: vec![Metric::value("max_abs_eikonal", worst)],
    })
}

fn steady_families() -> Result<AuditClaim> {
    let k = 1.0;
    let bi = steady_ode_integrate(SteadyOde::BornInfeld, (0.0, 2.0 * k), 0.0, 0.9, 1e-3)?;
    let bi_err = bi
        .rho
        .iter()
        .zip(&bi.v)
        .map(|(r, v)| (v - k * ((1.0 + r) / (1.0 - r)).ln()).abs())
        .fold(0.0, f64::max);
    let sl = steady_ode_integrate(SteadyOde::Spacelike, (0.0, k), 0.0, 2.0, 1e-3)?;
    let atan_err = sl
        .rho
        .iter()
        .zip(&sl.v)
        .map(|(r, v)| (v - k * r.atan()).abs())
        .fold(0.0, f64::max);
    let end = *sl.v.last().expect("integration has samples");
    let asinh_gap = (end - k * 2f64.asinh()).abs();
    let bi_ok = bi_err <= 1e-8;
    let asinh_ok = asinh_gap < 1e-8;
    Ok(AuditClaim {
        id: "8".into(),
        description: "closed forms of the steady similarity ODEs".into(),
        paper_location: "Born-Infeld and spacelike subsections of the proof".into(),
        claimed: "Born-Infeld: k ln((1+rho)/(1-rho)); spacelike: k ln(rho + sqrt(1+rho^2))".into(),
        computed: format!(
            "RK4 vs k ln((1+rho)/(1-rho)) sup error {} on [0, 0.9]; spacelike RK4 vs k arctan(rho) sup error {} \
             on [0, 2], and |v(2) - k asinh(2)| = {}",
            e(bi_err),
            e(atan_err),
            e(asinh_gap)
        ),
        verdict: pick(bi_ok && asinh_ok, Verdict::Match, Verdict::Mismatch),
        expected_verdict: Verdict::Mismatch,
        findings: vec![
            Finding {
                aspect: "Born-Infeld steady family".into(),
                verdict: pick(bi_ok, Verdict::Match, Verdict::Mismatch),
            },
            Finding {
                aspect: "spacelike steady family".into(),
                verdict: pick(asinh_ok, Verdict::Match, Verdict::Mismatch),
            },
            Finding {
                aspect: "spacelike arctan replacement".into(),
                verdict: pick(atan_err <= 1e-8, Verdict::Match, Verdict::Mismatch),
            },
        ],
        metrics: vec![
            Metric::value("born_infeld_sup_error", bi_err),
            Metric::value("spacelike_arctan_sup_error", atan_err),
            Metric::value("spacelike_asinh_gap_at_2", asinh_gap),
        ],
    })
}

fn energy_scaling() -> Result<AuditClaim> {
    let lambdas = [0.5, 1.0, 2.0, 4.0];
    let bi = ClosedFormSolution::born_infeld(0.2, 1.0)?;
    let bi_derivs = |t: f64, x: f64| {
        bi.evaluate_jet((t, x))
            .map(|j| (j.da, j.db))
            .unwrap_or((f64::NAN, f64::NAN))
    };
    let line = measure_scaling_exponent(
        &bi_derivs,
        (-0.5, 0.5),
        0.0,
        400,
        &lambdas,
        WeightKind::Unweighted,
    )?;
    let sphere = ClosedFormSolution::sphere(true, 1.0)?;
    let membrane_derivs = |t: f64, r: f64| {
        sphere
            .evaluate_jet((t, r))
            .map(|j| (j.da, j.db))
            .unwrap_or((f64::NAN, f64::NAN))
    };
    let radial = measure_scaling_exponent(
        &membrane_derivs,
        (0.0, 0.5),
        0.0,
        400,
        &lambdas,
        WeightKind::RWeight,
    )?;
    Ok(AuditClaim {
        id: "9".into(),
        description: "scaling of the conserved energy under u(t, x) -> u(lambda t, lambda x)/lambda".into(),
        paper_location: "introduction, scaling invariance paragraph".into(),
        claimed: "E(u_lambda) = lambda E(u)".into(),
        computed: format!(
            "quadratic energy int (u_t^2 + u_x^2)/2 on covariant domains: exponent {} (1-d, unweighted), {} \
             (radial, r-weighted); the functionals in the claim are not defined precisely enough to evaluate",
            e(line.measured_exponent),
            e(radial.measured_exponent)
        ),
        verdict: Verdict::MeasuredNoClaim,
        expected_verdict: Verdict::MeasuredNoClaim,
        findings: vec![],
        metrics: vec![
            Metric::value("exponent_unweighted", line.measured_exponent),
            Metric::value("exponent_r_weighted", radial.measured_exponent),
        ],
    })
}

fn linearisation_measurements() -> Result<Vec<Metric>> {
    let rhos: Vec<f64> = (1..=17).map(|i| 0.05 * i as f64).collect();
    let zero = |_: f64| (0.0, 0.0, 0.0);
    let branch = |rho: f64| branch_values(BranchSign::Plus, rho);
    let still = bump_direction(0.1, 0.9, 0.0);
    let grow = bump_direction(0.1, 0.9, 1.0);
    let check = |base: &dyn Fn(f64) -> (f64, f64, f64), dir: &dyn Fn(f64) -> crate::Jet2| {
        directional_linearization_check(base, dir, 1e-6, &rhos).map(|c| c.max_relative_mismatch)
    };
    Ok(vec![
        Metric::of("linearisation_mismatch_zero_profile", check(&zero, &grow)),
        Metric::of(
            "linearisation_mismatch_branch_steady_direction",
            check(&branch, &still),
        ),
        Metric::of(
            "linearisation_mismatch_branch_growing_direction",
            check(&branch, &grow),
        ),
    ])
}

/// Runs every claim. Deterministic: fixed grids, no random sampling.
pub fn run_audit() -> Result<AuditReport> {
    let claims = vec![
        born_infeld_solution()?,
        membrane_solution()?,
        spacelike_solution()?,
        gradient_amplitude()?,
        axis_curvature()?,
        mode_eigenvalues(),
        lightlike_spheres()?,
        steady_families()?,
        energy_scaling()?,
    ];
    let all_expected = claims.iter().all(|c| c.verdict == c.expected_verdict);
    Ok(AuditReport {
        claims,
        measurements: linearisation_measurements()?,
        all_expected,
    })
}
