//! Least-squares fits of decay laws.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Model for how an estimate y depends on a scale x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecayModel {
    /// ln y = slope * ln x + intercept: power laws y ~ x^slope.
    LogLog,
    /// y = slope * ln x + intercept: logarithmic growth or decay. A
    /// quantity affine in a generation index n is log-linear in x = q^n.
    LogLinear,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub model: DecayModel,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

/// Ordinary least squares under the chosen model. `xs` must be positive;
/// `ys` must be positive for the log-log model. Fewer than three points or
/// a degenerate design (all x equal after the log transform) is an error:
/// two points always fit exactly, so such a "fit" would carry no evidence.
pub fn fit_decay(xs: &[f64], ys: &[f64], model: DecayModel) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(Error::invalid(format!(
            "{} x values against {} y values",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::invalid("a fit needs at least three points"));
    }
    let mut us = Vec::with_capacity(xs.len());
    let mut vs = Vec::with_capacity(ys.len());
    for (&x, &y) in xs.iter().zip(ys) {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::invalid(format!("scale {x} must be positive")));
        }
        if !y.is_finite() {
            return Err(Error::invalid(format!("estimate {y} is not finite")));
        }
        us.push(x.ln());
        match model {
            DecayModel::LogLog => {
                if !(y > 0.0) {
                    return Err(Error::invalid(format!(
                        "estimate {y} must be positive for a power-law fit"
                    )));
                }
                vs.push(y.ln());
            }
            DecayModel::LogLinear => vs.push(y),
        }
    }
    let n = us.len() as f64;
    let mu = us.iter().sum::<f64>() / n;
    let mv = vs.iter().sum::<f64>() / n;
    let suu: f64 = us.iter().map(|u| (u - mu) * (u - mu)).sum();
    if suu <= 0.0 || !suu.is_finite() {
        return Err(Error::invalid("degenerate design: all scales coincide"));
    }
    let suv: f64 = us.iter().zip(&vs).map(|(u, v)| (u - mu) * (v - mv)).sum();
    let slope = suv / suu;
    let intercept = mv - slope * mu;
    let ss_tot: f64 = vs.iter().map(|v| (v - mv) * (v - mv)).sum();
    let ss_res: f64 = us
        .iter()
        .zip(&vs)
        .map(|(u, v)| {
            let e = v - (slope * u + intercept);
            e * e
        })
        .sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok(FitResult {
        model,
        slope,
        intercept,
        r2,
        points: xs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_power_law_recovers_slope_and_intercept() {
        // y = 3 x^{-1/2}: hand oracle ln y = -0.5 ln x + ln 3.
        let xs = [1.0f64, 0.25, 0.0625, 0.015625];
        let ys: Vec<f64> = xs.iter().map(|&x| 3.0 * x.powf(-0.5)).collect();
        let fit = fit_decay(&xs, &ys, DecayModel::LogLog).unwrap();
        assert_relative_eq!(fit.slope, -0.5, epsilon = 1e-12);
        assert_relative_eq!(fit.intercept, 3f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(fit.r2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn log_linear_fits_quantities_affine_in_the_generation() {
        // y = 2 + n with x = 4^{-n}: y = 2 - ln x / ln 4.
        let xs: Vec<f64> = (0..5).map(|n| 0.25f64.powi(n)).collect();
        let ys: Vec<f64> = (0..5).map(|n| 2.0 + n as f64).collect();
        let fit = fit_decay(&xs, &ys, DecayModel::LogLinear).unwrap();
        assert_relative_eq!(fit.slope, -1.0 / 4f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(fit.intercept, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn two_points_are_not_enough_evidence_for_a_fit() {
        assert!(fit_decay(&[1.0, 2.0], &[3.0, 5.0], DecayModel::LogLinear).is_err());
    }

    #[test]
    fn slowly_varying_logarithmic_decay_fits_with_a_small_slope() {
        // y = 1 / ln(1/r): the log-log slope is 1 / ln(1/r), between 0.12
        // and 0.37 over r = 4^-2 .. 4^-6, so the fitted slope is small and
        // positive and the power-law fit quality is visibly imperfect.
        let xs: Vec<f64> = (2..=6).map(|k| 0.25f64.powi(k)).collect();
        let ys: Vec<f64> = xs.iter().map(|&r| 1.0 / (1.0 / r).ln()).collect();
        let loglog = fit_decay(&xs, &ys, DecayModel::LogLog).unwrap();
        assert!(
            loglog.slope > 0.05 && loglog.slope < 0.5,
            "slope {}",
            loglog.slope
        );
        // The affine-in-log model reports its own fit quality for the same
        // data; both are recorded, neither is perfect.
        let loglin = fit_decay(&xs, &ys, DecayModel::LogLinear).unwrap();
        assert!(loglin.r2 > 0.9 && loglin.r2 < 1.0 - 1e-9);
        assert!(loglog.r2 > 0.9 && loglog.r2 < 1.0 - 1e-9);
    }

    #[test]
    fn hand_computed_least_squares_on_three_points() {
        // u = ln x at x = 1, e, e^2 gives u = 0, 1, 2; v = 1, 2, 4:
        // slope = cov/var = ((0-1)(1-7/3) + 0 + (2-1)(4-7/3)) / 2 = 1.5.
        let e = std::f64::consts::E;
        let fit = fit_decay(&[1.0, e, e * e], &[1.0, 2.0, 4.0], DecayModel::LogLinear).unwrap();
        assert_relative_eq!(fit.slope, 1.5, epsilon = 1e-12);
        assert_relative_eq!(fit.intercept, 7.0 / 3.0 - 1.5, epsilon = 1e-12);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(fit_decay(&[1.0], &[1.0], DecayModel::LogLog).is_err());
        assert!(fit_decay(&[1.0, 1.0], &[1.0, 2.0], DecayModel::LogLog).is_err());
        assert!(fit_decay(&[1.0, 2.0], &[0.0, 1.0], DecayModel::LogLog).is_err());
        assert!(fit_decay(&[-1.0, 2.0], &[1.0, 1.0], DecayModel::LogLinear).is_err());
        assert!(fit_decay(&[1.0, 2.0], &[1.0], DecayModel::LogLog).is_err());
    }

    #[test]
    fn constant_series_fits_with_zero_slope() {
        let fit = fit_decay(&[1.0, 2.0, 4.0], &[5.0, 5.0, 5.0], DecayModel::LogLinear).unwrap();
        assert_relative_eq!(fit.slope, 0.0, epsilon = 1e-12);
        assert_relative_eq!(fit.r2, 1.0, epsilon = 1e-12);
    }
}
