//! Linearisation of the similarity membrane equation about a profile and
//! the mode quadratic `nu^2 + 3 nu - 4 = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::jet::Jet2;
use crate::similarity::{transformed_equation_residual, TransformedEq};

/// Printed linear coefficients at one `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearizedCoefficients {
    pub rho: f64,
    pub v_tautau: f64,
    pub v_taurho: f64,
    pub v_rhorho: f64,
    pub v_tau: f64,
    pub v_rho: f64,
    pub v: f64,
}

impl LinearizedCoefficients {
    /// Applies the operator to the jet of `w` in `(tau, rho)`.
    pub fn apply(&self, w: &Jet2) -> f64 {
        self.v_tautau * w.daa
            + self.v_taurho * w.dab
            + self.v_rhorho * w.dbb
            + self.v_tau * w.da
            + self.v_rho * w.db
            + self.v * w.value
    }
}

pub fn linearized_coefficients(
    phi: f64,
    dphi: f64,
    d2phi: f64,
    rho: f64,
) -> Result<LinearizedCoefficients> {
    if rho == 0.0 {
        return Err(LabError::Singular(
            "linearised coefficients at rho = 0".into(),
        ));
    }
    let (f, g, h, r) = (phi, dphi, d2phi, rho);
    Ok(LinearizedCoefficients {
        rho,
        v_tautau: 1.0 + g * g,
        v_taurho: 2.0 * (f * g + r),
        v_rhorho: -(1.0 - r * r - f * f),
        v_tau: -(1.0 - g * g + 2.0 * h * f + 2.0 * g / r),
        v_rho: -(1.0 + 4.0 * r * g * f - 3.0 * (r * r - 1.0) * g * g - f * f) / r,
        v: (-2.0 * r * g * g + 2.0 * r * h * f + 2.0 * g * f) / r,
    })
}

/// Base profile data `(phi, phi', phi'')` at `rho`.
pub type ProfileFn<'a> = &'a dyn Fn(f64) -> (f64, f64, f64);
/// Similarity-frame jet of a perturbation direction at `rho` (at `tau = 0`).
pub type DirectionFn<'a> = &'a dyn Fn(f64) -> Jet2;

/// `w = e^{nu tau} b(rho)` with `b = ((rho - lo)(hi - rho))^3` inside
/// `[lo, hi]` and zero outside, jet taken at `tau = 0`.
pub fn bump_direction(lo: f64, hi: f64, nu: f64) -> impl Fn(f64) -> Jet2 {
    move |rho| {
        if rho <= lo || rho >= hi {
            return Jet2::zero();
        }
        let s = (rho - lo) * (hi - rho);
        let ds = hi + lo - 2.0 * rho;
        let b = s * s * s;
        let db = 3.0 * s * s * ds;
        let d2b = 6.0 * s * ds * ds - 6.0 * s * s;
        Jet2 {
            value: b,
            da: nu * b,
            db,
            daa: nu * nu * b,
            dab: nu * db,
            dbb: d2b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionalCheck {
    pub max_relative_mismatch: f64,
    pub worst_rho: Option<f64>,
    pub n_points: usize,
}

/// Printed operator applied to `w` against the centred difference of the
/// full similarity membrane residual along `phi +- eps w`.
pub fn directional_linearization_check(
    base: ProfileFn,
    direction: DirectionFn,
    eps: f64,
    samples: &[f64],
) -> Result<DirectionalCheck> {
    if !(1e-8..=1e-4).contains(&eps) {
        return Err(LabError::invalid(format!(
            "eps must lie in [1e-8, 1e-4], got {eps}"
        )));
    }
    let mut out = DirectionalCheck {
        max_relative_mismatch: 0.0,
        worst_rho: None,
        n_points: samples.len(),
    };
    for &rho in samples {
        let (f, g, h) = base(rho);
        let w = direction(rho);
        let shifted = |s: f64| Jet2 {
            value: f + s * w.value,
            da: s * w.da,
            db: g + s * w.db,
            daa: s * w.daa,
            dab: s * w.dab,
            dbb: h + s * w.dbb,
        };
        let plus = transformed_equation_residual(
            TransformedEq::SimilarityMembrane,
            &shifted(eps),
            (0.0, rho),
        )?;
        let minus = transformed_equation_residual(
            TransformedEq::SimilarityMembrane,
            &shifted(-eps),
            (0.0, rho),
        )?;
        let fd = (plus - minus) / (2.0 * eps);
        let lin = linearized_coefficients(f, g, h, rho)?.apply(&w);
        let scale = fd.abs().max(lin.abs());
        let rel = if scale < 1e-14 {
            0.0
        } else {
            (fd - lin).abs() / scale
        };
        if !rel.is_finite() {
            return Err(LabError::NonFinite {
                location: format!("directional check at rho = {rho}"),
            });
        }
        if rel > out.max_relative_mismatch || out.worst_rho.is_none() {
            out.max_relative_mismatch = out.max_relative_mismatch.max(rel);
            out.worst_rho = Some(rho);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeClass {
    Stable,
    Unstable,
}

/// `Re nu >= 0` is unstable.
pub fn classify(nu: f64) -> ModeClass {
    if nu < 0.0 {
        ModeClass::Stable
    } else {
        ModeClass::Unstable
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedRoot {
    pub nu: f64,
    pub class: ModeClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub quadratic_coeffs: [i64; 3],
    pub roots: [f64; 2],
    pub classification: [ClassifiedRoot; 2],
    pub paper_claimed_roots: [f64; 2],
    pub match_verdict: bool,
    /// One unstable and one stable root on both sides.
    pub qualitative_match: bool,
}

pub const MODE_QUADRATIC: [i64; 3] = [1, 3, -4];
pub const CLAIMED_MODE_ROOTS: [f64; 2] = [4.0, -1.0];

fn isqrt_exact(n: i64) -> Option<i64> {
    if n < 0 {
        return None;
    }
    let r = (n as f64).sqrt().round() as i64;
    (r - 1..=r + 1).find(|c| *c >= 0 && c * c == n)
}

/// Integer quadratic with a perfect-square discriminant, solved exactly.
/// Roots are returned larger first.
pub fn integer_quadratic_roots([a, b, c]: [i64; 3]) -> Result<[f64; 2]> {
    if a == 0 {
        return Err(LabError::invalid("leading coefficient is zero"));
    }
    let disc = b * b - 4 * a * c;
    let s = isqrt_exact(disc)
        .ok_or_else(|| LabError::invalid(format!("discriminant {disc} is not a perfect square")))?;
    let mut r = [
        (-b + s) as f64 / (2 * a) as f64,
        (-b - s) as f64 / (2 * a) as f64,
    ];
    if r[0] < r[1] {
        r.swap(0, 1);
    }
    Ok(r)
}

pub fn solve_mode_quadratic() -> ModeReport {
    let roots =
        integer_quadratic_roots(MODE_QUADRATIC).expect("fixed quadratic has roots 1 and -4");
    let classification = roots.map(|nu| ClassifiedRoot {
        nu,
        class: classify(nu),
    });
    let sorted = |mut r: [f64; 2]| {
        r.sort_by(|a, b| b.total_cmp(a));
        r
    };
    let count = |r: &[f64; 2], c: ModeClass| r.iter().filter(|nu| classify(**nu) == c).count();
    ModeReport {
        quadratic_coeffs: MODE_QUADRATIC,
        roots,
        classification,
        paper_claimed_roots: CLAIMED_MODE_ROOTS,
        match_verdict: sorted(roots) == sorted(CLAIMED_MODE_ROOTS),
        qualitative_match: count(&roots, ModeClass::Unstable)
            == count(&CLAIMED_MODE_ROOTS, ModeClass::Unstable)
            && count(&roots, ModeClass::Stable) == count(&CLAIMED_MODE_ROOTS, ModeClass::Stable),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeProbe {
    pub nu: f64,
    pub tau: Vec<f64>,
    pub v: Vec<f64>,
    /// `v'' + 3 v' - 4 v` at each sample.
    pub residual: Vec<f64>,
    pub max_abs_residual: f64,
}

/// Samples `v = e^{nu tau} u_nu` on `n` points of `[tau_lo, tau_hi]` and
/// evaluates the mode ODE on it.
pub fn mode_growth_probe(
    nu: f64,
    (tau_lo, tau_hi): (f64, f64),
    n: usize,
    u_nu: f64,
) -> Result<ModeProbe> {
    if ![nu, tau_lo, tau_hi, u_nu].iter().all(|x| x.is_finite()) {
        return Err(LabError::invalid("mode probe inputs must be finite"));
    }
    if n < 2 || !(tau_hi > tau_lo) {
        return Err(LabError::invalid("need n >= 2 and tau_hi > tau_lo"));
    }
    let mut p = ModeProbe {
        nu,
        tau: Vec::with_capacity(n),
        v: Vec::with_capacity(n),
        residual: Vec::with_capacity(n),
        max_abs_residual: 0.0,
    };
    for i in 0..n {
        let tau = tau_lo + (tau_hi - tau_lo) * i as f64 / (n - 1) as f64;
        let v = (nu * tau).exp() * u_nu;
        let r = (nu * nu + 3.0 * nu - 4.0) * v;
        p.tau.push(tau);
        p.v.push(v);
        p.residual.push(r);
        p.max_abs_residual = p.max_abs_residual.max(r.abs());
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{branch_values, BranchSign};

    #[test]
    fn branch_degeneracy() {
        for i in 1..100 {
            let rho = i as f64 / 100.0;
            for sign in [BranchSign::Plus, BranchSign::Minus] {
                let (f, g, h) = branch_values(sign, rho);
                let c = linearized_coefficients(f, g, h, rho).unwrap();
                assert!(
                    c.v_rhorho.abs() <= 1e-12 && c.v_taurho.abs() <= 1e-12,
                    "rho {rho}"
                );
            }
        }
    }

    #[test]
    fn zero_and_constant_profiles() {
        let c = linearized_coefficients(0.0, 0.0, 0.0, 0.4).unwrap();
        assert_eq!(
            (c.v_tautau, c.v_tau, c.v_taurho, c.v),
            (1.0, -1.0, 0.8, 0.0)
        );
        assert!((c.v_rhorho + 0.84).abs() < 1e-15 && (c.v_rho + 2.5).abs() < 1e-15);
        let c = linearized_coefficients(0.3, 0.0, 0.0, 0.5).unwrap();
        assert!((c.v_rhorho + (1.0 - 0.25 - 0.09)).abs() < 1e-15);
        assert!(linearized_coefficients(0.3, 0.0, 0.0, 0.0).is_err());
    }

    fn rhos() -> Vec<f64> {
        (1..=17).map(|i| 0.05 * i as f64).collect()
    }

    #[test]
    fn directional_check_zero_base() {
        let base = |_: f64| (0.0, 0.0, 0.0);
        let w = bump_direction(0.1, 0.9, 1.0);
        let r = directional_linearization_check(&base, &w, 1e-6, &rhos()).unwrap();
        assert!(r.max_relative_mismatch <= 1e-5, "{r:?}");
        let zero = |_: f64| Jet2::zero();
        let r = directional_linearization_check(&base, &zero, 1e-6, &rhos()).unwrap();
        assert_eq!(r.max_relative_mismatch, 0.0);
        assert!(directional_linearization_check(&base, &zero, 1e-2, &rhos()).is_err());
    }

    #[test]
    fn directional_check_on_branch() {
        let base = |rho: f64| branch_values(BranchSign::Plus, rho);
        // tau-independent direction: only the v_tau coefficient differs, so it agrees
        let still = bump_direction(0.1, 0.9, 0.0);
        let r = directional_linearization_check(&base, &still, 1e-6, &rhos()).unwrap();
        assert!(r.max_relative_mismatch <= 1e-5, "{r:?}");
        // growing direction exposes the v_tau coefficient
        let grow = bump_direction(0.1, 0.9, 1.0);
        let r = directional_linearization_check(&base, &grow, 1e-6, &rhos()).unwrap();
        assert!(r.max_relative_mismatch > 1e-3, "{r:?}");
    }

    #[test]
    fn mode_roots() {
        let m = solve_mode_quadratic();
        assert_eq!(m.roots, [1.0, -4.0]);
        for nu in m.roots {
            assert!((nu * nu + 3.0 * nu - 4.0).abs() <= 1e-12);
        }
        assert_eq!(m.classification[0].class, ModeClass::Unstable);
        assert_eq!(m.classification[1].class, ModeClass::Stable);
        assert!(!m.match_verdict);
        assert!(m.qualitative_match);
        assert_eq!(classify(0.0), ModeClass::Unstable);
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains("\"paper_claimed_roots\":[4.0,-1.0]"));
    }

    #[test]
    fn probe_annihilation() {
        for nu in [1.0, -4.0] {
            let p = mode_growth_probe(nu, (0.0, 3.0), 31, 1.0).unwrap();
            assert!(p.max_abs_residual <= 1e-12 * p.v.iter().fold(1.0f64, |m, v| m.max(v.abs())));
        }
        let p = mode_growth_probe(2.0, (0.0, 1.0), 11, 1.0).unwrap();
        for (t, r) in p.tau.iter().zip(&p.residual) {
            assert!((r - 6.0 * (2.0 * t).exp()).abs() < 1e-10);
        }
        let roots = solve_mode_quadratic().roots;
        for nu in -10..=10 {
            let nu = nu as f64;
            let p = mode_growth_probe(nu, (0.0, 1.0), 5, 1.0).unwrap();
            assert_eq!(p.max_abs_residual == 0.0, roots.contains(&nu), "nu {nu}");
        }
    }
}
