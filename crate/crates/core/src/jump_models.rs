//! Catalog of centered d-dimensional jump laws.
//!
//! Every model exposes a sampler together with its log-moment-generating
//! function `Λ(λ) = log E[exp(λ·ξ)]` and the gradient `∇Λ`. Closed forms are
//! used where they exist; uniform laws on spheres of dimension other than 1
//! and 3 go through Gauss–Legendre quadrature of the first-coordinate
//! marginal.
//!
//! Only laws that are non-lattice in the strong sense (Cramér's condition)
//! are meant for first-passage experiments. The two-point marginal is the one
//! lattice exception and is kept for contrast experiments; nothing here
//! checks the condition at runtime.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_adaptive, GaussLegendre};

/// Relative tolerance for the quadrature-based sphere MGF.
pub const QUADRATURE_TOLERANCE: f64 = 1e-12;

const SMALL_ARGUMENT: f64 = 1e-3;
const LARGE_ARGUMENT: f64 = 20.0;

/// One-dimensional centered law used as a coordinate of a product model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marginal {
    /// Uniform on `[-half_width, half_width]`.
    Uniform {
        half_width: f64,
    },
    Gaussian {
        variance: f64,
    },
    /// `±a` with probability one half each.
    TwoPoint {
        a: f64,
    },
}

impl Marginal {
    fn validate(&self) -> Result<()> {
        let (name, v) = match *self {
            Marginal::Uniform { half_width } => ("uniform half_width", half_width),
            Marginal::Gaussian { variance } => ("gaussian variance", variance),
            Marginal::TwoPoint { a } => ("two_point a", a),
        };
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidModel(format!("{name} must be positive, got {v}")));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Marginal::Uniform { half_width } => half_width * (2.0 * rng.random::<f64>() - 1.0),
            Marginal::Gaussian { variance } => variance.sqrt() * rng.sample::<f64, _>(StandardNormal),
            Marginal::TwoPoint { a } => {
                if rng.random::<bool>() {
                    a
                } else {
                    -a
                }
            }
        }
    }

    pub fn log_mgf(&self, lambda: f64) -> f64 {
        match *self {
            Marginal::Uniform { half_width } => log_sinhc(half_width * lambda),
            Marginal::Gaussian { variance } => 0.5 * variance * lambda * lambda,
            Marginal::TwoPoint { a } => log_cosh(a * lambda),
        }
    }

    pub fn log_mgf_derivative(&self, lambda: f64) -> f64 {
        match *self {
            Marginal::Uniform { half_width } => half_width * dlog_sinhc(half_width * lambda),
            Marginal::Gaussian { variance } => variance * lambda,
            Marginal::TwoPoint { a } => a * (a * lambda).tanh(),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Marginal::Uniform { half_width } => half_width * half_width / 3.0,
            Marginal::Gaussian { variance } => variance,
            Marginal::TwoPoint { a } => a * a,
        }
    }
}

/// `log(sinh r / r)`, stable for small and large `|r|`.
pub fn log_sinhc(r: f64) -> f64 {
    let r = r.abs();
    if r < SMALL_ARGUMENT {
        let r2 = r * r;
        // sinh r / r through the r^8 term
        let series = r2 / 6.0 + r2 * r2 / 120.0 + r2.powi(3) / 5040.0 + r2.powi(4) / 362_880.0;
        series.ln_1p()
    } else if r > LARGE_ARGUMENT {
        r - LN_2 - r.ln() + (-(-2.0 * r).exp()).ln_1p()
    } else {
        (r.sinh() / r).ln()
    }
}

/// Derivative of [`log_sinhc`]: `coth r - 1/r`.
pub fn dlog_sinhc(r: f64) -> f64 {
    let a = r.abs();
    let v = if a < SMALL_ARGUMENT {
        let a2 = a * a;
        a / 3.0 - a * a2 / 45.0 + 2.0 * a * a2 * a2 / 945.0
    } else {
        1.0 / a.tanh() - 1.0 / a
    };
    v.copysign(r)
}

fn log_cosh(r: f64) -> f64 {
    let a = r.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

#[derive(Debug, Clone)]
pub enum JumpKind {
    /// Uniform law on the unit sphere `S^{d-1}`.
    UniformSphere {
        d: usize,
    },
    Gaussian {
        covariance: DMatrix<f64>,
        cholesky: DMatrix<f64>,
    },
    Product {
        marginals: Vec<Marginal>,
    },
    /// `T · ζ` with `ζ` drawn from a spherically symmetric base law.
    Elliptical {
        base: Box<JumpModel>,
        transform: DMatrix<f64>,
    },
}

/// A centered jump law on `R^d`. Immutable once built.
#[derive(Debug, Clone)]
pub struct JumpModel {
    kind: JumpKind,
    dim: usize,
}

impl JumpModel {
    pub fn uniform_sphere(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidModel("dimension must be at least 1".into()));
        }
        Ok(Self {
            kind: JumpKind::UniformSphere { d },
            dim: d,
        })
    }

    pub fn standard_gaussian(d: usize) -> Result<Self> {
        Self::gaussian(DMatrix::identity(d, d))
    }

    /// Centered Gaussian with the given covariance, which must be symmetric
    /// positive definite.
    pub fn gaussian(covariance: DMatrix<f64>) -> Result<Self> {
        let d = covariance.nrows();
        if d == 0 || covariance.ncols() != d {
            return Err(Error::InvalidModel(format!(
                "covariance must be a non-empty square matrix, got {}x{}",
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        if covariance.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("covariance has non-finite entries".into()));
        }
        let scale = covariance.amax().max(1.0);
        if (&covariance - covariance.transpose()).amax() > 1e-12 * scale {
            return Err(Error::InvalidModel("covariance is not symmetric".into()));
        }
        let cholesky = covariance
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidModel("covariance is not positive definite".into()))?
            .l();
        Ok(Self {
            kind: JumpKind::Gaussian { covariance, cholesky },
            dim: d,
        })
    }

    pub fn gaussian_row_major(d: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != d * d {
            return Err(Error::InvalidModel(format!(
                "covariance needs {} entries, got {}",
                d * d,
                entries.len()
            )));
        }
        Self::gaussian(DMatrix::from_row_slice(d, d, entries))
    }

    /// Independent coordinates, one marginal per dimension.
    pub fn product(marginals: Vec<Marginal>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::InvalidModel("product needs at least one marginal".into()));
        }
        for m in &marginals {
            m.validate()?;
        }
        let dim = marginals.len();
        Ok(Self {
            kind: JumpKind::Product { marginals },
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &JumpKind {
        &self.kind
    }

    /// True when the law is invariant under all rotations of `R^d`.
    pub fn is_spherically_symmetric(&self) -> bool {
        match &self.kind {
            JumpKind::UniformSphere { .. } => true,
            JumpKind::Gaussian { covariance, .. } => is_scaled_identity(covariance),
            JumpKind::Product { marginals } => {
                marginals.iter().all(|m| matches!(m, Marginal::Gaussian { .. }))
                    && marginals.windows(2).all(|w| w[0] == w[1])
            }
            JumpKind::Elliptical { base, transform } => {
                base.is_spherically_symmetric() && is_scaled_identity(&(transform * transform.transpose()))
            }
        }
    }

    /// Covariance matrix of one jump.
    pub fn covariance(&self) -> DMatrix<f64> {
        match &self.kind {
            JumpKind::UniformSphere { d } => DMatrix::identity(*d, *d) / *d as f64,
            JumpKind::Gaussian { covariance, .. } => covariance.clone(),
            JumpKind::Product { marginals } => DMatrix::from_diagonal(&DVector::from_iterator(
                marginals.len(),
                marginals.iter().map(Marginal::variance),
            )),
            JumpKind::Elliptical { base, transform } => transform * base.covariance() * transform.transpose(),
        }
    }

    /// Draws one jump into `out` (length `d`).
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        match &self.kind {
            JumpKind::UniformSphere { .. } => loop {
                let mut norm2 = 0.0;
                for v in out.iter_mut() {
                    *v = rng.sample(StandardNormal);
                    norm2 += *v * *v;
                }
                if norm2 > 0.0 {
                    let inv = norm2.sqrt().recip();
                    out.iter_mut().for_each(|v| *v *= inv);
                    break;
                }
            },
            JumpKind::Gaussian { cholesky, .. } => {
                for v in out.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                // in-place lower-triangular product, last row first
                for i in (0..self.dim).rev() {
                    let mut acc = 0.0;
                    for (j, z) in out.iter().enumerate().take(i + 1) {
                        acc += cholesky[(i, j)] * z;
                    }
                    out[i] = acc;
                }
            }
            JumpKind::Product { marginals } => {
                for (v, m) in out.iter_mut().zip(marginals) {
                    *v = m.sample(rng);
                }
            }
            JumpKind::Elliptical { base, transform } => {
                let mut buf = [0.0; 8];
                let mut heap;
                let z: &mut [f64] = if self.dim <= buf.len() {
                    &mut buf[..self.dim]
                } else {
                    heap = vec![0.0; self.dim];
                    &mut heap
                };
                base.sample_into(rng, z);
                for (i, v) in out.iter_mut().enumerate() {
                    *v = (0..self.dim).map(|j| transform[(i, j)] * z[j]).sum();
                }
            }
        }
    }

    pub fn sample_jump<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.sample_into(rng, &mut out);
        out
    }

    /// `Λ(λ) = log E[exp(λ·ξ)]`.
    pub fn log_mgf(&self, lambda: &[f64]) -> Result<f64> {
        self.check_len(lambda)?;
        match &self.kind {
            JumpKind::UniformSphere { d } => sphere_radial(*d, norm(lambda)).map(|(f, _)| f),
            JumpKind::Gaussian { covariance, .. } => {
                let l = DVector::from_column_slice(lambda);
                Ok(0.5 * l.dot(&(covariance * &l)))
            }
            JumpKind::Product { marginals } => Ok(marginals.iter().zip(lambda).map(|(m, &l)| m.log_mgf(l)).sum()),
            JumpKind::Elliptical { base, transform } => {
                let l = transform.transpose() * DVector::from_column_slice(lambda);
                base.log_mgf(l.as_slice())
            }
        }
    }

    /// `∇Λ(λ)`; every catalog entry has an exact (or quadrature-exact) form.
    pub fn log_mgf_grad(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        self.check_len(lambda)?;
        match &self.kind {
            JumpKind::UniformSphere { d } => {
                let r = norm(lambda);
                if r == 0.0 {
                    return Ok(vec![0.0; *d]);
                }
                let (_, df) = sphere_radial(*d, r)?;
                Ok(lambda.iter().map(|l| df * l / r).collect())
            }
            JumpKind::Gaussian { covariance, .. } => {
                let l = DVector::from_column_slice(lambda);
                Ok((covariance * l).as_slice().to_vec())
            }
            JumpKind::Product { marginals } => Ok(marginals
                .iter()
                .zip(lambda)
                .map(|(m, &l)| m.log_mgf_derivative(l))
                .collect()),
            JumpKind::Elliptical { base, transform } => {
                let l = transform.transpose() * DVector::from_column_slice(lambda);
                let g = DVector::from_vec(base.log_mgf_grad(l.as_slice())?);
                Ok((transform * g).as_slice().to_vec())
            }
        }
    }

    /// Log-MGF of the first coordinate, `Λ(λ₁, 0, …, 0)`.
    pub fn marginal_log_mgf(&self, lambda1: f64) -> Result<f64> {
        self.log_mgf(&self.first_axis(lambda1))
    }

    /// Derivative of [`marginal_log_mgf`](Self::marginal_log_mgf).
    pub fn marginal_log_mgf_derivative(&self, lambda1: f64) -> Result<f64> {
        Ok(self.log_mgf_grad(&self.first_axis(lambda1))?[0])
    }

    fn first_axis(&self, lambda1: f64) -> Vec<f64> {
        let mut l = vec![0.0; self.dim];
        l[0] = lambda1;
        l
    }

    fn check_len(&self, lambda: &[f64]) -> Result<()> {
        if lambda.len() != self.dim {
            return Err(Error::InvalidModel(format!(
                "argument has length {}, model dimension is {}",
                lambda.len(),
                self.dim
            )));
        }
        Ok(())
    }
}

/// Wraps a spherically symmetric `base` so that samples are `T · ζ`; the
/// resulting log-MGF is `Λ_base(Tᵀ λ)`.
pub fn apply_linear_transform(base: &JumpModel, transform: DMatrix<f64>) -> Result<JumpModel> {
    let d = base.dim();
    if transform.nrows() != d || transform.ncols() != d {
        return Err(Error::InvalidModel(format!(
            "transform must be {d}x{d}, got {}x{}",
            transform.nrows(),
            transform.ncols()
        )));
    }
    if !base.is_spherically_symmetric() {
        return Err(Error::InvalidModel(
            "elliptical base law must be spherically symmetric".into(),
        ));
    }
    let det = transform.determinant();
    let size = transform.norm();
    if !det.is_finite() || det.abs() < 1e-12 * size.powi(d as i32) || size == 0.0 {
        return Err(Error::SingularTransform { det });
    }
    Ok(JumpModel {
        kind: JumpKind::Elliptical {
            base: Box::new(base.clone()),
            transform,
        },
        dim: d,
    })
}

fn is_scaled_identity(m: &DMatrix<f64>) -> bool {
    let s = m[(0, 0)];
    let tol = 1e-12 * m.amax().max(1.0);
    m.iter().enumerate().all(|(k, &v)| {
        let (i, j) = (k % m.nrows(), k / m.nrows());
        let expect = if i == j { s } else { 0.0 };
        (v - expect).abs() <= tol
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Radial log-MGF `f(r)` of the uniform law on `S^{d-1}` and its derivative.
fn sphere_radial(d: usize, r: f64) -> Result<(f64, f64)> {
    match d {
        1 => Ok((log_cosh(r), r.tanh())),
        3 => Ok((log_sinhc(r), dlog_sinhc(r))),
        _ => sphere_radial_quadrature(d, r),
    }
}

/// Quadrature route for the sphere: the first coordinate has density
/// proportional to `(1 - t²)^{(d-3)/2}` on [-1, 1]. Substituting `t = cos θ`
/// gives the smooth weight `sin^{d-2} θ` on [0, π].
pub(crate) fn sphere_radial_quadrature(d: usize, r: f64) -> Result<(f64, f64)> {
    debug_assert!(d >= 2);
    let r = r.abs();
    let power = (d - 2) as i32;
    let [num, dnum, den] = integrate_adaptive(QUADRATURE_TOLERANCE, |rule: &GaussLegendre| {
        let mut acc = [0.0; 3];
        let num = rule.integrate(0.0, std::f64::consts::PI, |theta| {
            // shifted by e^{-r} so the integrand stays bounded
            theta.sin().powi(power) * (r * (theta.cos() - 1.0)).exp()
        });
        let dnum = rule.integrate(0.0, std::f64::consts::PI, |theta| {
            theta.cos() * theta.sin().powi(power) * (r * (theta.cos() - 1.0)).exp()
        });
        let den = rule.integrate(0.0, std::f64::consts::PI, |theta| theta.sin().powi(power));
        acc[0] = num;
        acc[1] = dnum;
        acc[2] = den;
        acc
    })?;
    Ok((r + (num / den).ln(), dnum / num))
}
