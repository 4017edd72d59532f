use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Ordinary least squares of `ln b` against `ln a`.
pub fn log_log_fit(abscissae: &[f64], ordinates: &[f64]) -> Result<FitResult> {
    if abscissae.len() != ordinates.len() {
        return Err(LabError::invalid(format!(
            "{} abscissae but {} ordinates",
            abscissae.len(),
            ordinates.len()
        )));
    }
    let n = abscissae.len();
    if n < 2 {
        return Err(LabError::Arity { needed: 2, got: n });
    }
    if let Some(i) = abscissae
        .iter()
        .chain(ordinates)
        .position(|v| !(*v > 0.0) || !v.is_finite())
    {
        return Err(LabError::domain(format!(
            "log-log fit needs strictly positive finite data (entry {i})"
        )));
    }
    let xs: Vec<f64> = abscissae.iter().map(|a| a.ln()).collect();
    let ys: Vec<f64> = ordinates.iter().map(|b| b.ln()).collect();
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(LabError::domain(
            "log-log fit needs at least two distinct abscissae",
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(FitResult {
        slope,
        intercept,
        r_squared,
        n_points: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_square_law() {
        let a: Vec<f64> = (1..=20).map(|i| i as f64 * 0.37).collect();
        let b: Vec<f64> = a.iter().map(|x| x * x).collect();
        let f = log_log_fit(&a, &b).unwrap();
        assert!((f.slope - 2.0).abs() <= 1e-12);
        assert!((f.r_squared - 1.0).abs() <= 1e-12);
        assert_eq!(f.n_points, 20);
    }

    #[test]
    fn proportional_law() {
        let a: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let b: Vec<f64> = a.iter().map(|x| 3.0 * x).collect();
        let f = log_log_fit(&a, &b).unwrap();
        assert!((f.slope - 1.0).abs() <= 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() <= 1e-12);
    }

    #[test]
    fn noisy_power_law_recovered() {
        // deterministic perturbation with |delta| <= 1e-3
        let a: Vec<f64> = (0..50).map(|i| 0.1 + i as f64 * 0.2).collect();
        let b: Vec<f64> = a
            .iter()
            .enumerate()
            .map(|(i, x)| x.powf(1.5) * (1.0 + 1e-3 * ((i * 7919 % 101) as f64 / 50.0 - 1.0)))
            .collect();
        let f = log_log_fit(&a, &b).unwrap();
        assert!((f.slope - 1.5).abs() <= 5e-3);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            log_log_fit(&[1.0], &[1.0]),
            Err(LabError::Arity { .. })
        ));
        assert!(matches!(
            log_log_fit(&[1.0, -2.0], &[1.0, 1.0]),
            Err(LabError::Domain(_))
        ));
        assert!(matches!(
            log_log_fit(&[1.0, 2.0], &[0.0, 1.0]),
            Err(LabError::Domain(_))
        ));
    }
}
