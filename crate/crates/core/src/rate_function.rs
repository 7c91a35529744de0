//! Large-deviation rate functions as numerical Legendre transforms.
//!
//! `I(x) = sup_λ (λ·x − Λ(λ))` is evaluated by damped Newton iteration on the
//! convex dual `λ ↦ Λ(λ) − λ·x`. The maximizer doubles as `∇I(x)`, which gives
//! the tilt constants and the purge direction without differentiating `I`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::jump_models::JumpModel;

/// Numerical knobs. The defaults are the values the test suite pins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Newton stops when `‖∇Λ(λ) − x‖ ≤ newton_tol · (1 + ‖x‖)`.
    pub newton_tol: f64,
    pub max_newton_iterations: usize,
    pub max_halvings: usize,
    /// Relative step for the finite-difference Hessian.
    pub hessian_step: f64,
    /// Root solves stop when `|I(c) − log ρ| ≤ root_tol`.
    pub root_tol: f64,
    pub bracket_start: f64,
    pub bracket_cap: f64,
    pub max_root_iterations: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            max_newton_iterations: 200,
            max_halvings: 60,
            hessian_step: 1e-5,
            root_tol: 1e-12,
            bracket_start: 1e-4,
            bracket_cap: 1e3,
            max_root_iterations: 300,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMode {
    /// One-dimensional rate function of the first coordinate.
    Marginal,
    /// Full d-dimensional rate function.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegendrePoint {
    pub value: f64,
    pub maximizer: Vec<f64>,
}

/// Speed and tilt constants of a branching random walk with growth rate `rho`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpeedConstants {
    pub rho: f64,
    /// Root of `I(c, 0, …, 0) = log ρ`.
    pub c1_hat: f64,
    /// `∇I(ĉ1, 0, …, 0)`.
    pub c2_vec: Vec<f64>,
    /// Root of `I₁(c) = log ρ` for the first-coordinate rate function.
    pub c1_marginal: f64,
    /// `I₁′(c1_marginal)`.
    pub c2_marginal: f64,
}

impl SpeedConstants {
    /// `∂_{x1} I(ĉ1, 0)`.
    pub fn c2_first(&self) -> f64 {
        self.c2_vec[0]
    }
}

#[derive(Debug, Clone)]
pub struct RateFunction<'a> {
    model: &'a JumpModel,
    mode: RateMode,
    tol: Tolerances,
}

impl<'a> RateFunction<'a> {
    pub fn new(model: &'a JumpModel, mode: RateMode) -> Self {
        Self {
            model,
            mode,
            tol: Tolerances::default(),
        }
    }

    pub fn marginal(model: &'a JumpModel) -> Self {
        Self::new(model, RateMode::Marginal)
    }

    pub fn full(model: &'a JumpModel) -> Self {
        Self::new(model, RateMode::Full)
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn model(&self) -> &JumpModel {
        self.model
    }

    pub fn mode(&self) -> RateMode {
        self.mode
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    /// Dimension of the argument `x`.
    pub fn dim(&self) -> usize {
        match self.mode {
            RateMode::Marginal => 1,
            RateMode::Full => self.model.dim(),
        }
    }

    fn lmgf(&self, lambda: &[f64]) -> Result<f64> {
        match self.mode {
            RateMode::Marginal => self.model.marginal_log_mgf(lambda[0]),
            RateMode::Full => self.model.log_mgf(lambda),
        }
    }

    fn lmgf_grad(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        match self.mode {
            RateMode::Marginal => Ok(vec![self.model.marginal_log_mgf_derivative(lambda[0])?]),
            RateMode::Full => self.model.log_mgf_grad(lambda),
        }
    }

    /// Symmetrized central-difference Hessian of `Λ`.
    fn hessian(&self, lambda: &[f64]) -> Result<DMatrix<f64>> {
        let n = lambda.len();
        let mut h = DMatrix::zeros(n, n);
        let mut probe = lambda.to_vec();
        for j in 0..n {
            let step = self.tol.hessian_step * lambda[j].abs().max(1.0);
            probe[j] = lambda[j] + step;
            let up = self.lmgf_grad(&probe)?;
            probe[j] = lambda[j] - step;
            let down = self.lmgf_grad(&probe)?;
            probe[j] = lambda[j];
            for i in 0..n {
                h[(i, j)] = (up[i] - down[i]) / (2.0 * step);
            }
        }
        Ok((&h + h.transpose()) * 0.5)
    }

    /// Returns `I(x)` and the maximizer `λ*` with `∇Λ(λ*) = x`.
    ///
    /// Fails with [`Error::NoConvergence`] when `x` lies outside the interior
    /// of the range of `∇Λ`.
    pub fn legendre_transform(&self, x: &[f64]) -> Result<LegendrePoint> {
        if x.len() != self.dim() {
            return Err(Error::InvalidModel(format!(
                "rate function argument has length {}, expected {}",
                x.len(),
                self.dim()
            )));
        }
        let xv = DVector::from_column_slice(x);
        let target = self.tol.newton_tol * (1.0 + xv.norm());
        let dual = |l: &[f64]| -> Result<f64> { Ok(self.lmgf(l)? - l.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()) };

        let mut lambda = vec![0.0; x.len()];
        let mut objective = dual(&lambda)?;
        let mut residual = DVector::from_vec(self.lmgf_grad(&lambda)?) - &xv;
        for _ in 0..self.tol.max_newton_iterations {
            let res_norm = residual.norm();
            if res_norm <= target {
                return Ok(LegendrePoint {
                    value: -objective,
                    maximizer: lambda,
                });
            }
            let hess = self.hessian(&lambda)?;
            let step = match hess.clone().cholesky() {
                Some(ch) => -ch.solve(&residual),
                None => match hess.lu().solve(&residual) {
                    Some(s) if s.iter().all(|v| v.is_finite()) => -s,
                    _ => -residual.clone(),
                },
            };

            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..=self.tol.max_halvings {
                let cand: Vec<f64> = lambda.iter().zip(step.iter()).map(|(l, s)| l + t * s).collect();
                if let Ok(obj) = dual(&cand) {
                    if obj.is_finite() {
                        let cand_res = DVector::from_vec(self.lmgf_grad(&cand)?) - &xv;
                        let decreased = obj <= objective + 1e-15 * objective.abs().max(1.0);
                        if decreased || cand_res.norm() < res_norm {
                            lambda = cand;
                            objective = obj;
                            residual = cand_res;
                            accepted = true;
                            break;
                        }
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                return Err(Error::NoConvergence {
                    iterations: self.tol.max_newton_iterations,
                    residual: res_norm,
                });
            }
        }
        let res_norm = residual.norm();
        if res_norm <= target {
            return Ok(LegendrePoint {
                value: -objective,
                maximizer: lambda,
            });
        }
        Err(Error::NoConvergence {
            iterations: self.tol.max_newton_iterations,
            residual: res_norm,
        })
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.legendre_transform(x).map(|p| p.value)
    }

    /// `∇I(x)`, which by duality is the Legendre maximizer.
    pub fn grad_i(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.legendre_transform(x).map(|p| p.maximizer)
    }

    /// Evaluates `I` and `∂_{x1} I` along the first axis.
    fn along_axis(&self, c: f64) -> Result<(f64, f64)> {
        let mut x = vec![0.0; self.dim()];
        x[0] = c;
        let p = self.legendre_transform(&x)?;
        Ok((p.value, p.maximizer[0]))
    }

    /// Positive root of `c ↦ I(c, 0, …, 0) = log ρ`.
    fn solve_axis_root(&self, rho: f64) -> Result<f64> {
        let target = rho.ln();
        if !(target.is_finite() && target > 0.0) {
            return Err(Error::RangeExceeded {
                target,
                cap: self.tol.bracket_cap,
            });
        }
        let range_exceeded = || Error::RangeExceeded {
            target,
            cap: self.tol.bracket_cap,
        };
        // A failed Legendre solve means c is past the domain boundary,
        // where I is +∞ for the purpose of bracketing.
        let eval = |c: f64| -> Result<Option<(f64, f64)>> {
            match self.along_axis(c) {
                Ok((v, d)) => Ok(Some((v - target, d))),
                Err(Error::NoConvergence { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        };

        let mut lo = 0.0;
        let mut hi = self.tol.bracket_start;
        let mut hi_val = eval(hi)?;
        loop {
            match hi_val {
                Some((v, _)) if v < 0.0 => {
                    lo = hi;
                    hi *= 2.0;
                    if hi > self.tol.bracket_cap {
                        return Err(range_exceeded());
                    }
                    hi_val = eval(hi)?;
                }
                _ => break,
            }
        }
        if let Some((v, _)) = hi_val {
            if v.abs() <= self.tol.root_tol {
                return Ok(hi);
            }
        }

        // safeguarded Newton inside [lo, hi]
        let mut c = 0.5 * (lo + hi);
        for _ in 0..self.tol.max_root_iterations {
            match eval(c)? {
                Some((v, d)) => {
                    if v.abs() <= self.tol.root_tol {
                        return Ok(c);
                    }
                    if v < 0.0 {
                        lo = c;
                    } else {
                        hi = c;
                    }
                    let newton = c - v / d;
                    c = if d > 0.0 && newton > lo && newton < hi {
                        newton
                    } else {
                        0.5 * (lo + hi)
                    };
                }
                None => {
                    hi = c;
                    c = 0.5 * (lo + hi);
                }
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        match eval(c)? {
            Some((v, _)) if v.abs() <= self.tol.root_tol => Ok(c),
            _ => Err(range_exceeded()),
        }
    }

    /// `c1` with `I(c1) = log ρ` for the first-coordinate rate function.
    pub fn solve_c1(&self, rho: f64) -> Result<f64> {
        if self.mode != RateMode::Marginal {
            return Err(Error::ConfigError("solve_c1 needs a marginal rate function".into()));
        }
        self.solve_axis_root(rho)
    }

    /// `ĉ1` with `I(ĉ1, 0) = log ρ`, plus the tilt vector and the marginal
    /// constants.
    pub fn solve_c1_hat(&self, rho: f64) -> Result<SpeedConstants> {
        if self.mode != RateMode::Full {
            return Err(Error::ConfigError("solve_c1_hat needs a full rate function".into()));
        }
        let c1_hat = self.solve_axis_root(rho)?;
        let mut x = vec![0.0; self.dim()];
        x[0] = c1_hat;
        let c2_vec = self.grad_i(&x)?;

        let marginal = RateFunction::marginal(self.model).with_tolerances(self.tol);
        let c1_marginal = marginal.solve_c1(rho)?;
        let c2_marginal = marginal.grad_i(&[c1_marginal])?[0];
        Ok(SpeedConstants {
            rho,
            c1_hat,
            c2_vec,
            c1_marginal,
            c2_marginal,
        })
    }

    /// Unit vector along `∇I(ĉ1, 0)`.
    pub fn purge_normal(&self, rho: f64) -> Result<Vec<f64>> {
        let constants = self.solve_c1_hat(rho)?;
        Ok(unit(&constants.c2_vec))
    }
}

/// Normalizes to unit Euclidean length.
pub fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jump_models::JumpModel;

    #[test]
    fn gaussian_transform_is_half_square() {
        let m = JumpModel::standard_gaussian(3).unwrap();
        let p = RateFunction::full(&m).legendre_transform(&[1.0, 0.0, 0.0]).unwrap();
        assert!((p.value - 0.5).abs() < 1e-12);
        assert!((p.maximizer[0] - 1.0).abs() < 1e-10);
        assert!(p.maximizer[1].abs() < 1e-10 && p.maximizer[2].abs() < 1e-10);
    }

    #[test]
    fn origin_maps_to_zero() {
        let m = JumpModel::uniform_sphere(3).unwrap();
        let p = RateFunction::full(&m).legendre_transform(&[0.0; 3]).unwrap();
        assert_eq!(p.value, 0.0);
        assert!(p.maximizer.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn outside_range_does_not_converge() {
        let m = JumpModel::uniform_sphere(3).unwrap();
        let err = RateFunction::marginal(&m).legendre_transform(&[1.5]).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }));
    }

    #[test]
    fn gaussian_c1() {
        let m = JumpModel::standard_gaussian(3).unwrap();
        let rf = RateFunction::marginal(&m);
        assert!((rf.solve_c1(0.5f64.exp()).unwrap() - 1.0).abs() < 1e-11);
        let expect = (2.0 * 2f64.ln()).sqrt();
        assert!((rf.solve_c1(2.0).unwrap() - expect).abs() < 1e-11);
        assert!((expect - 1.177_410_0).abs() < 1e-7);
    }

    #[test]
    fn standard_gaussian_speed_constants() {
        let m = JumpModel::standard_gaussian(3).unwrap();
        let k = RateFunction::full(&m).solve_c1_hat(0.5f64.exp()).unwrap();
        assert!((k.c1_hat - 1.0).abs() < 1e-10);
        assert!((k.c2_vec[0] - 1.0).abs() < 1e-9);
        assert!(k.c2_vec[1].abs() < 1e-9 && k.c2_vec[2].abs() < 1e-9);
        assert!((k.c1_marginal - 1.0).abs() < 1e-10);
    }

    #[test]
    fn subcritical_growth_has_no_root() {
        let m = JumpModel::standard_gaussian(1).unwrap();
        let rf = RateFunction::marginal(&m);
        assert!(matches!(rf.solve_c1(1.0), Err(Error::RangeExceeded { .. })));
        assert!(matches!(rf.solve_c1(0.5), Err(Error::RangeExceeded { .. })));
    }

    #[test]
    fn two_point_law_saturates() {
        use crate::jump_models::Marginal;
        // I(1) = log 2 for ±1 steps, so ρ = 3 is out of range
        let m = JumpModel::product(vec![Marginal::TwoPoint { a: 1.0 }]).unwrap();
        let rf = RateFunction::marginal(&m);
        assert!(matches!(rf.solve_c1(3.0), Err(Error::RangeExceeded { .. })));
        assert!(rf.solve_c1(1.5).is_ok());
    }

    #[test]
    fn mode_mismatch() {
        let m = JumpModel::standard_gaussian(2).unwrap();
        assert!(RateFunction::full(&m).solve_c1(2.0).is_err());
        assert!(RateFunction::marginal(&m).solve_c1_hat(2.0).is_err());
    }

    #[test]
    fn spherical_normal_is_first_axis() {
        let m = JumpModel::uniform_sphere(3).unwrap();
        let n = RateFunction::full(&m).purge_normal(1.6).unwrap();
        assert!((n[0] - 1.0).abs() < 1e-12);
        assert!(n[1].abs() < 1e-9 && n[2].abs() < 1e-9);
    }
}
