//! Explicit self-similar solution families with hand-derived 2-jets.
//!
//! Coordinates are `(t, x)` for the Born-Infeld log family, `(t, r)` for the
//! membrane spheres and the constant profile, `(x, y)` for the spacelike
//! families.

use std::fmt;

use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{LabError, Result};
use crate::jet::Jet2;
use crate::scalar::Scalar;

/// Minimum distance from the edge of a validity domain for evaluation.
pub const EPS_BND: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `k ln((T - t + x) / (T - t - x))`
    BornInfeldLog,
    /// `+(T - t) sqrt(1 - (r / (T - t))^2)`
    MembraneSpherePlus,
    /// `-(T - t) sqrt(1 - (r / (T - t))^2)`
    MembraneSphereMinus,
    /// `k asinh(y / (T - x))`, the printed spacelike family.
    SpacelikeLogClaimed,
    /// `k arctan(y / (T - x))`, the solution of the spacelike steady ODE.
    SpacelikeArctanCorrected,
    /// `c (T - t)`
    ConstantProfile,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::BornInfeldLog,
        Family::MembraneSpherePlus,
        Family::MembraneSphereMinus,
        Family::SpacelikeLogClaimed,
        Family::SpacelikeArctanCorrected,
        Family::ConstantProfile,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::BornInfeldLog => "born-infeld-log",
            Family::MembraneSpherePlus => "sphere-plus",
            Family::MembraneSphereMinus => "sphere-minus",
            Family::SpacelikeLogClaimed => "log-claimed",
            Family::SpacelikeArctanCorrected => "arctan-corrected",
            Family::ConstantProfile => "constant",
        }
    }

    fn needs_nonzero_k(self) -> bool {
        matches!(
            self,
            Family::BornInfeldLog | Family::SpacelikeLogClaimed | Family::SpacelikeArctanCorrected
        )
    }

    pub fn is_membrane(self) -> bool {
        matches!(
            self,
            Family::MembraneSpherePlus | Family::MembraneSphereMinus | Family::ConstantProfile
        )
    }

    pub fn is_spacelike(self) -> bool {
        matches!(
            self,
            Family::SpacelikeLogClaimed | Family::SpacelikeArctanCorrected
        )
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One member of an explicit solution family. Immutable once built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormSolution {
    family: Family,
    blowup_time: f64,
    /// `k` for the log/arctan families, `c` for the constant profile; unused by the spheres.
    k: f64,
}

impl ClosedFormSolution {
    pub fn new(family: Family, blowup_time: f64, k: f64) -> Result<Self> {
        if !(blowup_time > 0.0 && blowup_time.is_finite()) {
            return Err(LabError::invalid(format!(
                "blow-up time must be > 0, got {blowup_time}"
            )));
        }
        if !k.is_finite() {
            return Err(LabError::invalid("k must be finite"));
        }
        if family.needs_nonzero_k() && k == 0.0 {
            return Err(LabError::invalid(format!("{family} needs k != 0")));
        }
        Ok(ClosedFormSolution {
            family,
            blowup_time,
            k,
        })
    }

    pub fn born_infeld(k: f64, blowup_time: f64) -> Result<Self> {
        Self::new(Family::BornInfeldLog, blowup_time, k)
    }

    pub fn sphere(plus: bool, blowup_time: f64) -> Result<Self> {
        let fam = if plus {
            Family::MembraneSpherePlus
        } else {
            Family::MembraneSphereMinus
        };
        Self::new(fam, blowup_time, 0.0)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn blowup_time(&self) -> f64 {
        self.blowup_time
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Signed distance of `(a, b)` to the edge of the family's open
    /// validity domain; positive inside.
    pub fn domain_gap(&self, (a, b): (f64, f64)) -> f64 {
        let tt = self.blowup_time;
        match self.family {
            Family::BornInfeldLog | Family::MembraneSpherePlus | Family::MembraneSphereMinus => {
                tt - a - b.abs()
            }
            Family::SpacelikeLogClaimed | Family::SpacelikeArctanCorrected => tt - a,
            Family::ConstantProfile => tt - a,
        }
    }

    pub fn check_domain(&self, point: (f64, f64)) -> Result<()> {
        let (a, b) = point;
        if !(a.is_finite() && b.is_finite()) {
            return Err(LabError::domain(format!("non-finite point ({a}, {b})")));
        }
        let gap = self.domain_gap(point);
        if gap >= EPS_BND {
            return Ok(());
        }
        let tt = self.blowup_time;
        let what = match self.family {
            Family::BornInfeldLog => format!("|x| < T - t violated: |{b}| vs {}", tt - a),
            Family::MembraneSpherePlus | Family::MembraneSphereMinus => {
                format!("|r| < T - t violated: |{b}| vs {}", tt - a)
            }
            Family::SpacelikeLogClaimed | Family::SpacelikeArctanCorrected => {
                format!("x < T violated: x = {a}, T = {tt}")
            }
            Family::ConstantProfile => format!("t < T violated: t = {a}, T = {tt}"),
        };
        Err(LabError::domain(format!(
            "{} at ({a}, {b}): {what} (gap {gap:e}, need >= {EPS_BND:e})",
            self.family
        )))
    }

    /// Exact value at a point of the open validity domain.
    pub fn value(&self, point: (f64, f64)) -> Result<f64> {
        self.check_domain(point)?;
        Ok(self.value_unchecked(point))
    }

    fn value_unchecked(&self, (a, b): (f64, f64)) -> f64 {
        let tt = self.blowup_time;
        let k = self.k;
        match self.family {
            Family::BornInfeldLog => {
                let s = tt - a;
                // ln((s + x)/(s - x)) = ln1p(2x/(s - x)) keeps accuracy near x = 0
                k * (2.0 * b / (s - b)).ln_1p()
            }
            Family::MembraneSpherePlus | Family::MembraneSphereMinus => {
                let s = tt - a;
                self.sign() * ((s - b) * (s + b)).sqrt()
            }
            Family::SpacelikeLogClaimed => k * (b / (tt - a)).asinh(),
            Family::SpacelikeArctanCorrected => k * (b / (tt - a)).atan(),
            Family::ConstantProfile => k * (tt - a),
        }
    }

    fn sign(&self) -> f64 {
        if self.family == Family::MembraneSphereMinus {
            -1.0
        } else {
            1.0
        }
    }

    /// Exact value and first/second partials at a point strictly inside the
    /// validity domain.
    pub fn evaluate_jet(&self, point: (f64, f64)) -> Result<Jet2> {
        self.check_domain(point)?;
        let mut jet: Jet2<f64> = self.derivatives(point.0, point.1);
        jet.value = self.value_unchecked(point);
        Ok(jet)
    }

    /// Same as [`evaluate_jet`](Self::evaluate_jet) with every derivative
    /// carried in double-double. The value itself is only `f64`-accurate.
    pub fn evaluate_jet_hp(&self, point: (f64, f64)) -> Result<Jet2<TwoFloat>> {
        self.check_domain(point)?;
        let mut jet: Jet2<TwoFloat> =
            self.derivatives(TwoFloat::of(point.0), TwoFloat::of(point.1));
        jet.value = TwoFloat::of(self.value_unchecked(point));
        Ok(jet)
    }

    /// Derivative entries; `value` is left for the caller (it needs
    /// transcendental functions not available generically).
    fn derivatives<S: Scalar>(&self, a: S, b: S) -> Jet2<S> {
        let tt = S::of(self.blowup_time);
        let k = S::of(self.k);
        let z = S::zero();
        let two = S::of(2.0);
        match self.family {
            Family::BornInfeldLog => {
                // s = T - t, P = 1/(s + x), M = 1/(s - x)
                let s = tt - a;
                let p = S::one() / (s + b);
                let m = S::one() / (s - b);
                Jet2 {
                    value: z,
                    da: k * (m - p),
                    db: k * (p + m),
                    daa: k * (m * m - p * p),
                    dab: k * (p * p + m * m),
                    dbb: k * (m * m - p * p),
                }
            }
            Family::MembraneSpherePlus | Family::MembraneSphereMinus => {
                // B = s^2 - r^2
                let sg = S::of(self.sign());
                let s = tt - a;
                let bb = (s - b) * (s + b);
                let rb = bb.sqrt();
                let b32 = bb * rb;
                Jet2 {
                    value: z,
                    da: -sg * s / rb,
                    db: -sg * b / rb,
                    daa: -sg * b * b / b32,
                    dab: -sg * b * s / b32,
                    dbb: -sg * s * s / b32,
                }
            }
            Family::SpacelikeLogClaimed => {
                // w = T - x, D = w^2 + y^2
                let w = tt - a;
                let d = w * w + b * b;
                let rd = d.sqrt();
                let d32 = d * rd;
                Jet2 {
                    value: z,
                    da: k * b / (w * rd),
                    db: k / rd,
                    daa: k * b * (S::one() / (w * w * rd) + S::one() / d32),
                    dab: k * w / d32,
                    dbb: -k * b / d32,
                }
            }
            Family::SpacelikeArctanCorrected => {
                let w = tt - a;
                let d = w * w + b * b;
                let d2 = d * d;
                Jet2 {
                    value: z,
                    da: k * b / d,
                    db: k * w / d,
                    daa: two * k * w * b / d2,
                    dab: k * (w * w - b * b) / d2,
                    dbb: -two * k * w * b / d2,
                }
            }
            Family::ConstantProfile => Jet2 {
                value: z,
                da: -k,
                db: z,
                daa: z,
                dab: z,
                dbb: z,
            },
        }
    }

    /// `d_x u(t, 0)` for the Born-Infeld family, `d_rr u(t, 0)` for the
    /// membrane families, from the analytic jet.
    pub fn derivative_blowup_amplitude(&self, t: f64) -> Result<f64> {
        if !(t < self.blowup_time) {
            return Err(LabError::domain(format!(
                "amplitude needs t < T, got t = {t}, T = {}",
                self.blowup_time
            )));
        }
        match self.family {
            Family::BornInfeldLog => Ok(self.evaluate_jet((t, 0.0))?.db),
            Family::MembraneSpherePlus | Family::MembraneSphereMinus | Family::ConstantProfile => {
                Ok(self.evaluate_jet((t, 0.0))?.dbb)
            }
            other => Err(LabError::invalid(format!(
                "blow-up amplitude is defined for the Born-Infeld and membrane families, not {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    /// `{ |x| < T - t, 0 <= t < T }`
    InteriorLightcone,
    /// `{ 0 <= r <= T - t, 0 < t < T }`
    BackwardLightcone,
    /// `{ first coordinate < T }`
    HalfPlane,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LightconeDomain {
    pub kind: DomainKind,
    pub blowup_time: f64,
}

impl LightconeDomain {
    pub fn new(kind: DomainKind, blowup_time: f64) -> Result<Self> {
        if !(blowup_time > 0.0) {
            return Err(LabError::invalid("blow-up time must be > 0"));
        }
        Ok(LightconeDomain { kind, blowup_time })
    }

    pub fn contains(&self, (a, b): (f64, f64)) -> bool {
        let tt = self.blowup_time;
        match self.kind {
            DomainKind::InteriorLightcone => (0.0..tt).contains(&a) && b.abs() < tt - a,
            DomainKind::BackwardLightcone => a > 0.0 && a < tt && b >= 0.0 && b <= tt - a,
            DomainKind::HalfPlane => a < tt,
        }
    }
}

pub fn domain_contains(domain: &LightconeDomain, point: (f64, f64)) -> bool {
    domain.contains(point)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(k: f64) -> ClosedFormSolution {
        ClosedFormSolution::born_infeld(k, 1.0).unwrap()
    }

    #[test]
    fn born_infeld_values() {
        assert_eq!(bi(1.0).evaluate_jet((0.0, 0.0)).unwrap().value, 0.0);
        let v = bi(1.0).value((0.5, 0.25)).unwrap();
        assert!((v - 1.098_612_288_668_109_8).abs() < 1e-14);
    }

    #[test]
    fn sphere_at_origin() {
        let j = ClosedFormSolution::sphere(true, 1.0)
            .unwrap()
            .evaluate_jet((0.0, 0.0))
            .unwrap();
        assert_eq!(j.value, 1.0);
        assert_eq!(j.db, 0.0);
        assert_eq!(j.da, -1.0);
    }

    #[test]
    fn arctan_at_origin() {
        let s = ClosedFormSolution::new(Family::SpacelikeArctanCorrected, 1.0, 1.0).unwrap();
        assert_eq!(s.evaluate_jet((0.0, 0.0)).unwrap().value, 0.0);
    }

    #[test]
    fn boundary_is_rejected() {
        let e = bi(1.0).evaluate_jet((0.5, 0.5)).unwrap_err();
        assert!(matches!(e, LabError::Domain(ref m) if m.contains("|x| < T - t")));
        assert!(bi(1.0).evaluate_jet((1.0, 0.0)).is_err());
        let s = ClosedFormSolution::new(Family::SpacelikeLogClaimed, 1.0, 1.0).unwrap();
        assert!(s.evaluate_jet((1.0, 0.3)).is_err());
        assert!(s.evaluate_jet((-3.0, 7.0)).is_ok());
    }

    #[test]
    fn construction_guards() {
        assert!(ClosedFormSolution::born_infeld(0.0, 1.0).is_err());
        assert!(ClosedFormSolution::born_infeld(1.0, 0.0).is_err());
        assert!(ClosedFormSolution::new(Family::ConstantProfile, 1.0, 0.0).is_ok());
    }

    #[test]
    fn lightcone_membership() {
        let l = LightconeDomain::new(DomainKind::InteriorLightcone, 1.0).unwrap();
        assert!(domain_contains(&l, (0.5, 0.4)));
        assert!(!domain_contains(&l, (0.5, 0.5)));
        let b = LightconeDomain::new(DomainKind::BackwardLightcone, 1.0).unwrap();
        assert!(!domain_contains(&b, (0.9, 0.2)));
        assert!(domain_contains(&b, (0.5, 0.5)));
        assert!(!domain_contains(&b, (0.0, 0.1)));
        let h = LightconeDomain::new(DomainKind::HalfPlane, 1.0).unwrap();
        assert!(domain_contains(&h, (0.99, 100.0)) && !domain_contains(&h, (1.0, 0.0)));
    }

    #[test]
    fn amplitudes() {
        let a = bi(1.0).derivative_blowup_amplitude(0.5).unwrap();
        assert!((a - 4.0).abs() < 1e-14);
        let m = ClosedFormSolution::sphere(true, 1.0).unwrap();
        assert!((m.derivative_blowup_amplitude(0.5).unwrap() + 2.0).abs() < 1e-14);
        assert!(bi(1.0).derivative_blowup_amplitude(1.0).is_err());
        let s = ClosedFormSolution::new(Family::SpacelikeLogClaimed, 1.0, 1.0).unwrap();
        assert!(s.derivative_blowup_amplitude(0.5).is_err());
        // rate (T - t)^-1: doubling when T - t halves
        let r = bi(0.3).derivative_blowup_amplitude(0.99).unwrap()
            / bi(0.3).derivative_blowup_amplitude(0.98).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hp_jet_matches_f64() {
        for fam in Family::ALL {
            let s = ClosedFormSolution::new(fam, 1.3, 0.7).unwrap();
            let p = (0.2, 0.35);
            let a = s.evaluate_jet(p).unwrap();
            let b = s.evaluate_jet_hp(p).unwrap().to_f64();
            for (x, y) in a.entries().iter().zip(b.entries()) {
                assert!(
                    (x - y).abs() <= 1e-14 * (1.0 + x.abs()),
                    "{fam}: {x} vs {y}"
                );
            }
        }
    }
}
