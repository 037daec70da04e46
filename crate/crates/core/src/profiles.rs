//! Index-of-refraction models `n²(x, z)` with analytic derivatives.
//!
//! Every model in scope depends on depth `z` only, so the horizontal gradient
//! component is identically zero. Perturbations compose additively on `n²`.

use crate::error::{Error, Result};
use crate::Point;

/// Rectangular evaluation domain. Evaluation outside it is an error rather
/// than an extrapolation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub x_min: f64,
    pub x_max: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl Domain {
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.z >= self.z_min && p.z <= self.z_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileKind {
    /// `n² = n0²`
    Constant { n0: f64 },
    /// `n² = n0² − a z`
    LinearSquared { n0: f64, a: f64 },
    /// `n² = n0² − α z²`
    QuadraticChannel { n0: f64, alpha: f64 },
    /// Canonical deep-water sound channel with axis at `z_c`.
    Munk { epsilon: f64, z_c: f64 },
    /// `n² = n0² − α u² − σ u² exp(−ρ u²)`, `u = z − z_axis`
    PerturbedChannel {
        n0: f64,
        alpha: f64,
        sigma: f64,
        rho: f64,
        z_axis: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationKind {
    /// `A (z − c)²`
    ZSquared,
    /// `A (z − c)`
    ZLinear,
    /// `A exp(−(z − c)² / w²)`
    GaussianBump,
    /// `A exp(1 − 1/(1 − t²))` for `|t| < 1`, `t = (z − c)/w`; exactly zero elsewhere.
    CompactSupport,
    /// `A (z − c)² exp(−(z − c)² / w²)`
    DampedZSquared,
    /// `A`
    Uniform,
}

/// Depth-dependent perturbation `Ω(z)` added to `n²` with some strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationField {
    pub kind: PerturbationKind,
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

impl PerturbationField {
    pub fn new(kind: PerturbationKind, center: f64, width: f64, amplitude: f64) -> Self {
        Self {
            kind,
            center,
            width,
            amplitude,
        }
    }

    pub fn z_squared() -> Self {
        Self::new(PerturbationKind::ZSquared, 0.0, 1.0, 1.0)
    }

    pub fn z_linear() -> Self {
        Self::new(PerturbationKind::ZLinear, 0.0, 1.0, 1.0)
    }

    pub fn compact(lo: f64, hi: f64, amplitude: f64) -> Self {
        Self::new(
            PerturbationKind::CompactSupport,
            0.5 * (lo + hi),
            0.5 * (hi - lo),
            amplitude,
        )
    }

    /// Closed support interval, when the field has one.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self.kind {
            PerturbationKind::CompactSupport => {
                Some((self.center - self.width, self.center + self.width))
            }
            _ => None,
        }
    }

    /// Value and first two `z`-derivatives.
    pub fn eval(&self, z: f64) -> (f64, f64, f64) {
        let a = self.amplitude;
        let u = z - self.center;
        let w = self.width;
        match self.kind {
            PerturbationKind::ZSquared => (a * u * u, 2.0 * a * u, 2.0 * a),
            PerturbationKind::ZLinear => (a * u, a, 0.0),
            PerturbationKind::Uniform => (a, 0.0, 0.0),
            PerturbationKind::GaussianBump => {
                let e = (-(u * u) / (w * w)).exp();
                let d1 = -2.0 * u / (w * w);
                (a * e, a * e * d1, a * e * (d1 * d1 - 2.0 / (w * w)))
            }
            PerturbationKind::DampedZSquared => {
                let r = 1.0 / (w * w);
                let e = (-r * u * u).exp();
                let v = u * u * e;
                let d1 = (2.0 * u - 2.0 * r * u.powi(3)) * e;
                let d2 = (2.0 - 10.0 * r * u * u + 4.0 * r * r * u.powi(4)) * e;
                (a * v, a * d1, a * d2)
            }
            PerturbationKind::CompactSupport => {
                let t = u / w;
                if t.abs() >= 1.0 {
                    return (0.0, 0.0, 0.0);
                }
                let q = 1.0 - t * t;
                let b = (1.0 - 1.0 / q).exp();
                let g1 = -2.0 * t / (q * q);
                let g2 = -2.0 / (q * q) - 8.0 * t * t / (q * q * q);
                (a * b, a * b * g1 / w, a * b * (g1 * g1 + g2) / (w * w))
            }
        }
    }

    pub fn value(&self, z: f64) -> f64 {
        self.eval(z).0
    }
}

/// Index-of-refraction model: base profile, additive perturbations and an
/// optional evaluation domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileModel {
    pub kind: ProfileKind,
    pub perturbations: Vec<(PerturbationField, f64)>,
    pub domain: Option<Domain>,
}

impl From<ProfileKind> for ProfileModel {
    fn from(kind: ProfileKind) -> Self {
        Self {
            kind,
            perturbations: Vec::new(),
            domain: None,
        }
    }
}

impl ProfileModel {
    pub fn constant(n0: f64) -> Self {
        ProfileKind::Constant { n0 }.into()
    }

    pub fn linear(n0: f64, a: f64) -> Self {
        ProfileKind::LinearSquared { n0, a }.into()
    }

    pub fn channel(n0: f64, alpha: f64) -> Self {
        ProfileKind::QuadraticChannel { n0, alpha }.into()
    }

    pub fn munk(epsilon: f64, z_c: f64) -> Self {
        ProfileKind::Munk { epsilon, z_c }.into()
    }

    pub fn perturbed_channel(n0: f64, alpha: f64, sigma: f64, rho: f64, z_axis: f64) -> Self {
        ProfileKind::PerturbedChannel {
            n0,
            alpha,
            sigma,
            rho,
            z_axis,
        }
        .into()
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = Some(domain);
        self
    }

    /// Characteristic vertical length of the model, used for scale-aware
    /// thresholds (divergence bounds, default tolerances).
    pub fn length_scale(&self) -> f64 {
        match self.kind {
            ProfileKind::Constant { .. } => 1.0,
            ProfileKind::LinearSquared { n0, a } => {
                if a == 0.0 {
                    1.0
                } else {
                    (n0 * n0 / a.abs()).max(1.0)
                }
            }
            ProfileKind::QuadraticChannel { n0, alpha } => (n0 / alpha.sqrt()).max(1e-300),
            ProfileKind::Munk { z_c, .. } => z_c,
            ProfileKind::PerturbedChannel { z_axis, rho, .. } => z_axis.abs().max(1.0 / rho.sqrt()),
        }
    }

    fn check(&self, p: Point) -> Result<()> {
        if let Some(d) = self.domain {
            if !d.contains(p) {
                return Err(Error::Domain(format!(
                    "point ({}, {}) outside evaluation domain",
                    p.x, p.z
                )));
            }
        }
        Ok(())
    }

    /// `n²` and its first two depth derivatives at `z`, without domain checks.
    fn base_z(&self, z: f64) -> (f64, f64, f64) {
        match self.kind {
            ProfileKind::Constant { n0 } => (n0 * n0, 0.0, 0.0),
            ProfileKind::LinearSquared { n0, a } => (n0 * n0 - a * z, -a, 0.0),
            ProfileKind::QuadraticChannel { n0, alpha } => {
                (n0 * n0 - alpha * z * z, -2.0 * alpha * z, -2.0 * alpha)
            }
            ProfileKind::Munk { epsilon, z_c } => {
                let eta = 2.0 * (z - z_c) / z_c;
                let e = (-eta).exp();
                let b = eta - 1.0 + e;
                let b1 = 2.0 / z_c * (1.0 - e);
                let b2 = 4.0 / (z_c * z_c) * e;
                let q = 1.0 + epsilon * b;
                let v = q.powi(-2);
                let d1 = -2.0 * epsilon * b1 * q.powi(-3);
                let d2 = 6.0 * epsilon * epsilon * b1 * b1 * q.powi(-4)
                    - 2.0 * epsilon * b2 * q.powi(-3);
                (v, d1, d2)
            }
            ProfileKind::PerturbedChannel {
                n0,
                alpha,
                sigma,
                rho,
                z_axis,
            } => {
                let u = z - z_axis;
                let e = (-rho * u * u).exp();
                let v = n0 * n0 - alpha * u * u - sigma * u * u * e;
                let d1 = -2.0 * alpha * u - sigma * (2.0 * u - 2.0 * rho * u.powi(3)) * e;
                let d2 = -2.0 * alpha
                    - sigma * e * (2.0 - 10.0 * rho * u * u + 4.0 * rho * rho * u.powi(4));
                (v, d1, d2)
            }
        }
    }

    /// `n²` with its first and second `z`-derivatives, perturbations included.
    pub fn eval_z(&self, p: Point) -> Result<(f64, f64, f64)> {
        self.check(p)?;
        let (mut v, mut d1, mut d2) = self.base_z(p.z);
        for (field, strength) in &self.perturbations {
            let (w, w1, w2) = field.eval(p.z);
            v += strength * w;
            d1 += strength * w1;
            d2 += strength * w2;
        }
        if !(v.is_finite() && d1.is_finite() && d2.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite index of refraction at ({}, {})",
                p.x, p.z
            )));
        }
        Ok((v, d1, d2))
    }

    pub fn eval_n_squared(&self, p: Point) -> Result<f64> {
        Ok(self.eval_z(p)?.0)
    }

    /// Analytic gradient `(∂x n², ∂z n²)`.
    pub fn eval_grad_n_squared(&self, p: Point) -> Result<[f64; 2]> {
        Ok([0.0, self.eval_z(p)?.1])
    }

    /// Second depth derivative of `n²` (the only non-zero Hessian entry).
    pub fn eval_d2z_n_squared(&self, p: Point) -> Result<f64> {
        Ok(self.eval_z(p)?.2)
    }

    /// Index of refraction `n = √(n²)`; negative `n²` is a domain error.
    pub fn eval_n(&self, p: Point) -> Result<f64> {
        let n2 = self.eval_n_squared(p)?;
        if n2 < 0.0 {
            return Err(Error::Domain(format!(
                "n² = {n2} < 0 at ({}, {})",
                p.x, p.z
            )));
        }
        Ok(n2.sqrt())
    }

    /// Profile evaluating to `self + strength · Ω` pointwise.
    pub fn perturbed(&self, omega: PerturbationField, strength: f64) -> Self {
        let mut out = self.clone();
        out.perturbations.push((omega, strength));
        out
    }
}
