use crate::error::{LabError, Result};

fn finite_or_err(v: &[f64], stage: usize, t: f64) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        None => Ok(()),
        Some(c) => Err(LabError::NonFinite {
            location: format!("rk4 stage {stage}, t = {t}, component {c}"),
        }),
    }
}

/// One classical fourth-order Runge-Kutta step of `y' = f(t, y)`.
pub fn rk4_step<F>(y: &[f64], f: F, t: f64, dt: f64) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    if !(dt > 0.0) {
        return Err(LabError::invalid(format!(
            "rk4 step needs dt > 0, got {dt}"
        )));
    }
    let n = y.len();
    let shift = |k: &[f64], s: f64| -> Vec<f64> { (0..n).map(|i| y[i] + s * k[i]).collect() };

    let k1 = f(t, y)?;
    finite_or_err(&k1, 1, t)?;
    let k2 = f(t + 0.5 * dt, &shift(&k1, 0.5 * dt))?;
    finite_or_err(&k2, 2, t + 0.5 * dt)?;
    let k3 = f(t + 0.5 * dt, &shift(&k2, 0.5 * dt))?;
    finite_or_err(&k3, 3, t + 0.5 * dt)?;
    let k4 = f(t + dt, &shift(&k3, dt))?;
    finite_or_err(&k4, 4, t + dt)?;

    Ok((0..n)
        .map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveStep {
    pub t: f64,
    pub y: Vec<f64>,
    /// Step size actually taken.
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AdaptiveOutcome {
    Accepted(AdaptiveStep),
    /// Halving reached `dt_min` without meeting the tolerance.
    StepFloor {
        t: f64,
        dt: f64,
    },
}

/// Step-halving RK4: compares one full step against two half steps and
/// halves until the difference is below `abs_tol` (or `dt_min` is reached).
/// The two-half-step result is returned.
pub fn rk4_adaptive<F>(
    y: &[f64],
    f: F,
    t: f64,
    dt: f64,
    abs_tol: f64,
    dt_min: f64,
) -> Result<AdaptiveOutcome>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    let mut h = dt;
    loop {
        if h < dt_min {
            return Ok(AdaptiveOutcome::StepFloor { t, dt: h });
        }
        let attempt = (|| -> Result<(Vec<f64>, Vec<f64>)> {
            let full = rk4_step(y, &f, t, h)?;
            let half = rk4_step(y, &f, t, 0.5 * h)?;
            let two = rk4_step(&half, &f, t + 0.5 * h, 0.5 * h)?;
            Ok((full, two))
        })();
        match attempt {
            Ok((full, two)) => {
                let err = full
                    .iter()
                    .zip(&two)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                if err <= abs_tol {
                    return Ok(AdaptiveOutcome::Accepted(AdaptiveStep {
                        t: t + h,
                        y: two,
                        dt: h,
                    }));
                }
            }
            Err(LabError::NonFinite { .. }) => {}
            Err(e) => return Err(e),
        }
        h *= 0.5;
    }
}
