//! First-order response of the einbein action to a perturbation `n² → n² + ρ Ω`.
//!
//! In the stationary-phase limit `∂𝕊/∂ρ = k0 Λ ⟨Ω⟩`, where `⟨Ω⟩` is the
//! proper-time average of `Ω` along the boundary-matched Euler–Lagrange path.
//! How `⟨Ω⟩` behaves as `Λ` approaches a ghost pole tells whether the pole
//! moves, the ghost source moves, or the perturbation is evaded.

use std::fmt;

use crate::dirichlet::solve_dirichlet;
use crate::numerics::bessel::{i0e, i1e};
use crate::numerics::{integrate_real, linear_fit, Dopri5, QuadOptions};
use crate::profiles::{PerturbationField, PerturbationKind, ProfileModel};
use crate::{Error, Point, Result};

/// Fixed depths at `τ = 0` and `τ = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundary {
    pub z_start: f64,
    pub z_end: f64,
}

impl Boundary {
    pub fn new(z_start: f64, z_end: f64) -> Self {
        Self { z_start, z_end }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseClass {
    PoleMotion,
    GhostSourceMotion,
    Immovable,
    EssentialSingularitySignature,
    Unclassified,
}

impl ResponseClass {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::PoleMotion => "pole-motion",
            Self::GhostSourceMotion => "ghost-source-motion",
            Self::Immovable => "immovable",
            Self::EssentialSingularitySignature => "essential-singularity-signature",
            Self::Unclassified => "unclassified",
        }
    }
}

impl fmt::Display for ResponseClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationResponse {
    pub lambda_p: f64,
    pub lambda_grid: Vec<f64>,
    pub omega_avg: Vec<f64>,
    /// Slope of `log|⟨Ω⟩|` against `log|Λ − Λp|`.
    pub fitted_exponent: f64,
    pub r_squared: f64,
    pub classification: ResponseClass,
}

/// `∂𝕊/∂ρ` in the stationary-phase limit.
pub fn action_sensitivity(k0: f64, lambda: f64, omega_avg: f64) -> f64 {
    k0 * lambda * omega_avg
}

const RTOL: f64 = 1e-12;
const MAX_CHUNK: f64 = 0.02;

/// Depth band outside which a localised field is negligible.
fn active_band(omega: &PerturbationField) -> Option<(f64, f64)> {
    match omega.kind {
        PerturbationKind::CompactSupport => omega.support(),
        PerturbationKind::GaussianBump | PerturbationKind::DampedZSquared => {
            let reach = 8.0 * omega.width.abs();
            Some((omega.center - reach, omega.center + reach))
        }
        _ => None,
    }
}

/// `∫₀¹ Ω(z(τ)) dτ` along the trajectory leaving `z0` with `ż(0) = v0`.
fn path_average(
    profile: &ProfileModel,
    omega: &PerturbationField,
    lambda: f64,
    z0: f64,
    v0: f64,
) -> Result<f64> {
    let k = 2.0 * lambda * lambda;
    let atol = 1e-14 * z0.abs().max(v0.abs()).max(1.0);
    let solver = Dopri5::new(RTOL, atol);
    let rhs = |_: f64, y: &[f64; 3]| {
        let (_, g, _) = profile.eval_z(Point::new(0.0, y[0]))?;
        Ok([y[1], k * g, omega.value(y[0])])
    };
    let Some((lo, hi)) = active_band(omega) else {
        return Ok(solver.solve(rhs, 0.0, [z0, v0, 0.0], 1.0)?[2]);
    };
    // A localised field can slip between the stages of one long step, so the
    // interval is cut into chunks no longer than a fraction of the crossing time.
    let width = 0.5 * (hi - lo);
    let mut t = 0.0;
    let mut y = [z0, v0, 0.0];
    while t < 1.0 {
        let gap = (lo - y[0]).max(y[0] - hi).max(0.0);
        let speed = y[1].abs().max(f64::MIN_POSITIVE);
        let dt = (0.25 * gap.max(0.1 * width) / speed)
            .min(MAX_CHUNK)
            .min(1.0 - t);
        let t_next = if 1.0 - t - dt < 1e-15 { 1.0 } else { t + dt };
        y = solver.solve(rhs, t, y, t_next)?;
        t = t_next;
    }
    Ok(y[2])
}

/// `⟨Ω⟩` and the initial velocity of the boundary-matched solution.
fn average_seeded(
    profile: &ProfileModel,
    omega: &PerturbationField,
    lambda: f64,
    bc: Boundary,
    v_guess: f64,
) -> Result<(f64, f64)> {
    let sol = solve_dirichlet(profile, lambda, bc.z_start, bc.z_end, v_guess)?;
    let avg = path_average(profile, omega, lambda, bc.z_start, sol.v0)?;
    if !avg.is_finite() {
        return Err(Error::Shooting {
            lambda,
            reason: "non-finite path average".into(),
        });
    }
    Ok((avg, sol.v0))
}

/// Proper-time average of `omega` along the Euler–Lagrange path joining the
/// boundary depths at einbein `lambda`. Fails with [`Error::Shooting`] where
/// the boundary-value problem has no solution.
pub fn omega_average(
    profile: &ProfileModel,
    omega: &PerturbationField,
    lambda: f64,
    bc: Boundary,
) -> Result<f64> {
    let guess = bc.z_end - bc.z_start;
    average_seeded(profile, omega, lambda, bc, guess).map(|(avg, _)| avg)
}

/// `⟨Ω⟩` over a grid approaching `lambda_p`, with a power-law fit and a
/// classification of the approach.
pub fn pole_response(
    profile: &ProfileModel,
    omega: &PerturbationField,
    lambda_p: f64,
    lambda_grid: &[f64],
    bc: Boundary,
) -> Result<PerturbationResponse> {
    if lambda_grid.len() < 3 {
        return Err(Error::InvalidInput(
            "a response fit needs at least 3 grid points".into(),
        ));
    }
    if lambda_grid.iter().any(|&l| l == lambda_p || !l.is_finite()) {
        return Err(Error::InvalidInput(
            "grid must be finite and exclude the pole itself".into(),
        ));
    }
    // continuation from the far end toward the pole
    let mut order: Vec<usize> = (0..lambda_grid.len()).collect();
    order.sort_by(|&a, &b| {
        let da = (lambda_grid[a] - lambda_p).abs();
        let db = (lambda_grid[b] - lambda_p).abs();
        db.total_cmp(&da)
    });
    let mut omega_avg = vec![0.0; lambda_grid.len()];
    let mut seed = bc.z_end - bc.z_start;
    for &i in &order {
        let (avg, v0) = average_seeded(profile, omega, lambda_grid[i], bc, seed)?;
        omega_avg[i] = avg;
        seed = v0;
    }
    let (fitted_exponent, r_squared, classification) = classify(lambda_p, lambda_grid, &omega_avg);
    Ok(PerturbationResponse {
        lambda_p,
        lambda_grid: lambda_grid.to_vec(),
        omega_avg,
        fitted_exponent,
        r_squared,
        classification,
    })
}

const EXPONENT_TOL: f64 = 0.25;
const MIN_R_SQUARED: f64 = 0.99;

/// `(slope, R², class)` for averages sampled at `lambdas`.
pub fn classify(lambda_p: f64, lambdas: &[f64], averages: &[f64]) -> (f64, f64, ResponseClass) {
    let mut pts: Vec<(f64, f64)> = lambdas
        .iter()
        .zip(averages)
        .map(|(&l, &a)| ((l - lambda_p).abs(), a.abs()))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let logs: Vec<(f64, f64)> = pts
        .iter()
        .filter(|(d, a)| *d > 0.0 && *a > 0.0 && a.is_finite())
        .map(|(d, a)| (d.ln(), a.ln()))
        .collect();
    if logs.len() < 3 {
        return (f64::NAN, 0.0, ResponseClass::Unclassified);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = logs.into_iter().unzip();
    let (slope, _, r2) = linear_fit(&xs, &ys);

    // growth toward the pole followed by suppression next to it
    let (peak, peak_val) = pts
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, p)| {
            if p.1 > acc.1 {
                (i, p.1)
            } else {
                acc
            }
        });
    let last = pts.len() - 1;
    if peak > 0 && peak < last && pts[0].1 < 0.5 * peak_val && pts[last].1 < 0.5 * peak_val {
        return (slope, r2, ResponseClass::EssentialSingularitySignature);
    }

    let class = if r2 < MIN_R_SQUARED {
        ResponseClass::Unclassified
    } else if (slope + 2.0).abs() <= EXPONENT_TOL {
        ResponseClass::PoleMotion
    } else if (slope + 1.0).abs() <= EXPONENT_TOL {
        ResponseClass::GhostSourceMotion
    } else if slope >= EXPONENT_TOL {
        ResponseClass::Immovable
    } else {
        ResponseClass::Unclassified
    };
    (slope, r2, class)
}

/// Closed form `½ e^{−β/2} [I₀(β/2) − I₁(β/2)]`.
pub fn bessel_closed_form(beta: f64) -> f64 {
    let x = 0.5 * beta;
    0.5 * (i0e(x) - i1e(x))
}

/// `∫₀¹ cos²(πmτ) e^{−β cos²(πmτ)} dτ` by adaptive quadrature, one panel per half-period.
pub fn bessel_quadrature(beta: f64, m: u32) -> f64 {
    let m = m.max(1);
    let f = |t: f64| {
        let c = (std::f64::consts::PI * m as f64 * t).cos().powi(2);
        c * (-beta * c).exp()
    };
    let opts = QuadOptions {
        abs_tol: 1e-16,
        rel_tol: 1e-14,
        ..QuadOptions::default()
    };
    let panels = 2 * m;
    (0..panels)
        .map(|j| {
            let a = j as f64 / panels as f64;
            let b = (j + 1) as f64 / panels as f64;
            integrate_real(|t| Ok(f(t)), a, b, opts)
                .map(|(v, _)| v)
                .unwrap_or(f64::NAN)
        })
        .sum()
}

/// Absolute mismatch between the quadrature and the Bessel closed form.
pub fn bessel_identity_residual(beta: f64, m: u32) -> f64 {
    (bessel_quadrature(beta, m) - bessel_closed_form(beta)).abs()
}
