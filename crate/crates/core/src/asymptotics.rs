//! Closed-form first-passage predictors.
//!
//! All logarithms are natural. Predictions are only defined for `x > 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jump_models::JumpModel;
use crate::offspring::{BranchingMode, OffspringLaw};
use crate::rate_function::{RateFunction, SpeedConstants};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `A(x)`, spherically symmetric jumps.
    Symmetric,
    /// `Â(x)`, general jumps through `ĉ1` and `∂_{x1} I(ĉ1, 0)`.
    NonSymmetric,
    /// `Ã(x)`, delayed branching.
    Delayed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticPrediction {
    pub x: f64,
    pub leading: f64,
    pub log_correction: f64,
    pub total: f64,
    pub variant: Variant,
}

fn log_form(x: f64, speed: f64, tilt: f64, d: usize, variant: Variant) -> Result<AsymptoticPrediction> {
    if x.is_nan() || x <= 1.0 {
        return Err(Error::DomainError { x });
    }
    if !(speed > 0.0 && tilt > 0.0) {
        return Err(Error::ConfigError(format!(
            "speed and tilt constants must be positive, got {speed} and {tilt}"
        )));
    }
    let leading = x / speed;
    let log_correction = (d as f64 + 2.0) / (2.0 * tilt * speed) * x.ln();
    Ok(AsymptoticPrediction {
        x,
        leading,
        log_correction,
        total: leading + log_correction,
        variant,
    })
}

/// `A(x) = x/c1 + (d+2)/(2 c2 c1) · log x`.
pub fn predict_a(x: f64, c1: f64, c2: f64, d: usize) -> Result<AsymptoticPrediction> {
    log_form(x, c1, c2, d, Variant::Symmetric)
}

/// `Â(x) = x/ĉ1 + (d+2)/(2 ĉ1 ∂_{x1}I(ĉ1,0)) · log x`.
pub fn predict_a_hat(x: f64, constants: &SpeedConstants, d: usize) -> Result<AsymptoticPrediction> {
    log_form(x, constants.c1_hat, constants.c2_first(), d, Variant::NonSymmetric)
}

/// Growth rate of the delayed-branching model: the positive root of
/// `z² − (p1 + p3) z − 2 p3 (1 − p0)`.
pub fn delayed_rho(p0: f64, p1: f64, p3: f64) -> Result<f64> {
    for (name, p) in [("p0", p0), ("p1", p1), ("p3", p3)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidLaw(format!("{name} = {p} is not a probability")));
        }
    }
    if (p0 + p1 + p3 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidLaw(format!(
            "probabilities sum to {}, expected 1",
            p0 + p1 + p3
        )));
    }
    let s = 1.0 - p0;
    Ok(s / 2.0 + (s * s / 4.0 + 2.0 * p3 * s).sqrt())
}

/// Delayed-branching constants `(c̃1, c̃2)` from the marginal rate function.
pub fn delayed_constants(model: &JumpModel, offspring: &OffspringLaw) -> Result<(f64, f64)> {
    if offspring.mode() != BranchingMode::Delayed {
        return Err(Error::InvalidLaw("expected a delayed-branching law".into()));
    }
    let rho = offspring.rho();
    if rho <= 1.0 {
        return Err(Error::InvalidLaw(format!(
            "delayed growth rate {rho} is not supercritical"
        )));
    }
    let rf = RateFunction::marginal(model);
    let c1 = rf.solve_c1(rho)?;
    let c2 = rf.grad_i(&[c1])?[0];
    Ok((c1, c2))
}

/// `Ã(x)`: the `A` form with constants taken at the delayed growth rate.
pub fn predict_a_tilde(x: f64, model: &JumpModel, offspring: &OffspringLaw, d: usize) -> Result<AsymptoticPrediction> {
    let (c1, c2) = delayed_constants(model, offspring)?;
    log_form(x, c1, c2, d, Variant::Delayed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn a_at_e() {
        let p = predict_a(E, 1.0, 1.0, 3).unwrap();
        assert!((p.total - (E + 2.5)).abs() < 1e-14);
        assert_eq!(p.total, p.leading + p.log_correction);
    }

    #[test]
    fn a_at_hundred() {
        let p = predict_a(100.0, 1.0, 1.0, 3).unwrap();
        assert!((p.total - 111.512_925_46).abs() < 1e-7);
    }

    #[test]
    fn gaussian_rho_two_at_twenty() {
        let c = (2.0 * 2f64.ln()).sqrt();
        let p = predict_a(20.0, c, c, 3).unwrap();
        // 20/1.17741 + 5/(2·1.38629)·ln 20
        assert!((p.leading - 16.9864).abs() < 1e-4);
        assert!((p.log_correction - 5.40241).abs() < 1e-5);
        assert!((p.total - 22.389).abs() < 1e-3);
    }

    #[test]
    fn small_x_rejected() {
        assert!(matches!(predict_a(1.0, 1.0, 1.0, 3), Err(Error::DomainError { .. })));
        assert!(matches!(predict_a(0.5, 1.0, 1.0, 3), Err(Error::DomainError { .. })));
    }

    #[test]
    fn delayed_rho_edges() {
        assert_eq!(delayed_rho(0.0, 1.0, 0.0).unwrap(), 1.0);
        assert_eq!(delayed_rho(1.0, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(delayed_rho(0.0, 0.0, 1.0).unwrap(), 2.0);
        assert!(delayed_rho(0.5, 0.6, 0.0).is_err());
    }

    #[test]
    fn delayed_rho_is_ratio_limit_of_recursion() {
        // N_{n+1} = N_n + 2 N_{n-1}
        let (mut prev, mut cur) = (1.0f64, 1.0f64);
        for _ in 0..60 {
            let next = cur + 2.0 * prev;
            prev = cur;
            cur = next;
        }
        assert!((cur / prev - delayed_rho(0.0, 0.0, 1.0).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn delay_slows_growth() {
        for l in 1..=19 {
            let p3 = 0.05 * l as f64;
            let tilde = delayed_rho(0.0, 1.0 - p3, p3).unwrap();
            assert!(tilde < 1.0 + 2.0 * p3, "p3={p3}");
        }
    }

    #[test]
    fn subcritical_delayed_law_rejected() {
        let m = JumpModel::standard_gaussian(1).unwrap();
        let law = OffspringLaw::delayed(0.5, 0.5, 0.0).unwrap();
        assert!(matches!(predict_a_tilde(10.0, &m, &law, 1), Err(Error::InvalidLaw(_))));
    }
}
