//! Flat `key=value` run configuration for evolution runs.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::closedform::{ClosedFormSolution, Family};
use crate::error::{LabError, Result};
use crate::evolution::{BoundaryTreatment, Equation, EvolutionConfig, EvolutionState};
use crate::numerics::Grid1D;

pub const KNOWN_KEYS: &[&str] = &[
    "equation",
    "initial",
    "family",
    "k",
    "T",
    "lo",
    "hi",
    "n",
    "t0",
    "t_end",
    "cfl_safety",
    "dissipation",
    "max_gradient",
    "min_discriminant_floor",
    "dt_floor",
    "max_steps",
    "boundary",
    "snapshot_every",
    "fit",
    "fit_lo",
    "fit_hi",
    "out_dir",
    "diagnostics",
    "snapshot_prefix",
];

/// Parsed pairs with the line each came from (0 for overrides).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    entries: BTreeMap<String, (String, usize)>,
}

impl RunConfig {
    /// Blank lines and lines starting with `#` are skipped. Keys must be known
    /// and may appear once.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let (k, v) = s.split_once('=').ok_or_else(|| LabError::Config {
                line,
                message: format!("expected key=value, got {s:?}"),
            })?;
            let (k, v) = (k.trim(), v.trim());
            if !KNOWN_KEYS.contains(&k) {
                return Err(LabError::Config {
                    line,
                    message: format!("unknown key {k:?}"),
                });
            }
            if v.is_empty() {
                return Err(LabError::Config {
                    line,
                    message: format!("empty value for {k}"),
                });
            }
            if cfg.entries.contains_key(k) {
                return Err(LabError::Config {
                    line,
                    message: format!("duplicate key {k}"),
                });
            }
            cfg.entries.insert(k.to_string(), (v.to_string(), line));
        }
        Ok(cfg)
    }

    /// Replaces or adds a value; overrides carry line 0.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(LabError::Config {
                line: 0,
                message: format!("unknown override key {key:?}"),
            });
        }
        self.entries
            .insert(key.to_string(), (value.trim().to_string(), 0));
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn line(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |(_, l)| *l)
    }

    fn bad(&self, key: &str, msg: impl std::fmt::Display) -> LabError {
        LabError::Config {
            line: self.line(key),
            message: format!("{key}: {msg}"),
        }
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| LabError::Config {
            line: 0,
            message: format!("missing required key {key}"),
        })
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(self.bad(key, format!("not a finite number: {v:?}"))),
            },
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| self.bad(key, format!("not a non-negative integer: {v:?}"))),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true" | "yes" | "1") => Ok(true),
            Some("false" | "no" | "0") => Ok(false),
            Some(v) => Err(self.bad(key, format!("not a boolean: {v:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialData {
    ClosedForm,
    Zero,
}

/// Everything an evolution run needs, validated.
#[derive(Debug, Clone)]
pub struct EvolveSetup {
    pub initial: EvolutionState,
    pub config: EvolutionConfig,
    /// The closed form the data came from, when it did.
    pub reference: Option<ClosedFormSolution>,
    pub fit_window: Option<(f64, f64)>,
    pub out_dir: Option<PathBuf>,
    pub diagnostics_name: String,
    pub snapshot_prefix: String,
}

fn family_for(eq: Equation, name: &str) -> Option<Family> {
    match (eq, name) {
        (Equation::BornInfeld, "log" | "born-infeld-log") => Some(Family::BornInfeldLog),
        (Equation::RadialMembrane, "sphere-plus") => Some(Family::MembraneSpherePlus),
        (Equation::RadialMembrane, "sphere-minus") => Some(Family::MembraneSphereMinus),
        (Equation::RadialMembrane, "constant") => Some(Family::ConstantProfile),
        _ => None,
    }
}

impl EvolveSetup {
    pub fn from_config(c: &RunConfig) -> Result<Self> {
        let equation = match c.require("equation")? {
            "born-infeld" => Equation::BornInfeld,
            "radial-membrane" | "membrane" => Equation::RadialMembrane,
            other => return Err(c.bad("equation", format!("unknown equation {other:?}"))),
        };
        let initial_kind = match c.get("initial").unwrap_or("closed-form") {
            "closed-form" => InitialData::ClosedForm,
            "zero" => InitialData::Zero,
            other => {
                return Err(c.bad(
                    "initial",
                    format!("expected closed-form or zero, got {other:?}"),
                ))
            }
        };
        let default_family = match equation {
            Equation::BornInfeld => "log",
            Equation::RadialMembrane => "constant",
        };
        let family_name = c.get("family").unwrap_or(default_family);
        let family = family_for(equation, family_name).ok_or_else(|| {
            c.bad(
                "family",
                format!("{family_name:?} does not belong to {equation:?}"),
            )
        })?;
        let k = c.f64_or("k", 0.2)?;
        let blowup_time = c.f64_or("T", 1.0)?;
        let default_lo = match equation {
            Equation::BornInfeld => -0.5,
            Equation::RadialMembrane => 0.0,
        };
        let lo = c.f64_or("lo", default_lo)?;
        let hi = c.f64_or("hi", 0.5)?;
        let n = c.usize_or("n", 400)?;
        let t0 = c.f64_or("t0", 0.0)?;
        let t_end = c.f64_or("t_end", 0.8)?;
        if !(t_end > t0) {
            return Err(c.bad("t_end", format!("must exceed t0 = {t0}")));
        }
        let grid = Grid1D::new(lo, hi, n).map_err(|e| c.bad("n", e))?;
        let solution =
            ClosedFormSolution::new(family, blowup_time, k).map_err(|e| c.bad("family", e))?;
        let (initial, reference) = match initial_kind {
            InitialData::ClosedForm => (
                EvolutionState::from_closed_form(&solution, grid, t0)
                    .map_err(|e| c.bad("lo", e))?,
                Some(solution),
            ),
            InitialData::Zero => (EvolutionState::zero(grid, t0), None),
        };

        let mut config = EvolutionConfig::new(equation, t_end);
        config.blowup_time_hint = reference.map(|s| s.blowup_time());
        config.cfl_safety = c.f64_or("cfl_safety", config.cfl_safety)?;
        config.dissipation = c.f64_or("dissipation", config.dissipation)?;
        config.max_gradient = c.f64_or("max_gradient", config.max_gradient)?;
        config.min_discriminant_floor =
            c.f64_or("min_discriminant_floor", config.min_discriminant_floor)?;
        config.dt_floor = c.f64_or("dt_floor", config.dt_floor)?;
        config.max_steps = c.usize_or("max_steps", config.max_steps)?;
        config.snapshot_every = c.usize_or("snapshot_every", 0)?;
        config.boundary = match c.get("boundary").unwrap_or("excision") {
            "excision" => BoundaryTreatment::Excision,
            "exact" | "exact-data" => match reference {
                Some(solution) => BoundaryTreatment::ExactData { solution },
                None => {
                    return Err(c.bad("boundary", "exact edge data needs closed-form initial data"))
                }
            },
            other => {
                return Err(c.bad(
                    "boundary",
                    format!("expected excision or exact, got {other:?}"),
                ))
            }
        };
        config.validate().map_err(|e| c.bad("equation", e))?;

        let fit_window = if c.bool_or("fit", false)? {
            let lo = c.f64_or("fit_lo", 0.5)?;
            let hi = c.f64_or("fit_hi", t_end)?;
            if !(hi > lo) {
                return Err(c.bad("fit_hi", "fit window is empty"));
            }
            Some((lo, hi))
        } else {
            None
        };
        Ok(EvolveSetup {
            initial,
            config,
            reference,
            fit_window,
            out_dir: c.get("out_dir").map(PathBuf::from),
            diagnostics_name: c
                .get("diagnostics")
                .unwrap_or("diagnostics.csv")
                .to_string(),
            snapshot_prefix: c.get("snapshot_prefix").unwrap_or("snapshot").to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_comments_and_reports_lines() {
        let c = RunConfig::parse("# run\nequation = born-infeld\n\nk=0.2\n").unwrap();
        assert_eq!(c.get("equation"), Some("born-infeld"));
        assert_eq!(c.f64_or("k", 0.0).unwrap(), 0.2);
        match RunConfig::parse("equation=born-infeld\nn 400\n") {
            Err(LabError::Config { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match RunConfig::parse("k=1\nbogus=2\n") {
            Err(LabError::Config { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(RunConfig::parse("k=1\nk=2\n").is_err());
    }

    #[test]
    fn bad_values_point_at_their_line() {
        let c = RunConfig::parse("equation=born-infeld\nn=abc\n").unwrap();
        match EvolveSetup::from_config(&c) {
            Err(LabError::Config { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_equation() {
        let c = RunConfig::parse("k=0.2\n").unwrap();
        assert!(matches!(
            EvolveSetup::from_config(&c),
            Err(LabError::Config { .. })
        ));
    }

    #[test]
    fn overrides_win() {
        let mut c = RunConfig::parse("equation=born-infeld\nn=100\nboundary=excision\n").unwrap();
        c.set("n", "50").unwrap();
        c.set("boundary", "exact").unwrap();
        let s = EvolveSetup::from_config(&c).unwrap();
        assert_eq!(s.initial.grid.n(), 50);
        assert!(matches!(
            s.config.boundary,
            BoundaryTreatment::ExactData { .. }
        ));
        assert!(c.set("nope", "1").is_err());
    }

    #[test]
    fn family_must_match_equation() {
        let c = RunConfig::parse("equation=born-infeld\nfamily=sphere-plus\n").unwrap();
        assert!(EvolveSetup::from_config(&c).is_err());
        let c =
            RunConfig::parse("equation=radial-membrane\nfamily=constant\nk=0.3\nhi=0.5\n").unwrap();
        let s = EvolveSetup::from_config(&c).unwrap();
        assert_eq!(s.initial.grid.lo(), 0.0);
    }

    #[test]
    fn zero_data_rejects_exact_edges() {
        let c = RunConfig::parse("equation=born-infeld\ninitial=zero\nboundary=exact\n").unwrap();
        assert!(EvolveSetup::from_config(&c).is_err());
    }
}
