//! Euler–Lagrange trajectories of the einbein Lagrangian
//! `L = Ẋ²/(4Λ) + Λ n²(X)` on `τ ∈ [0, 1]`, i.e. `Ẍ = 2Λ²∇n²(X)`.
//!
//! For fixed start point the map from initial velocity to endpoint degenerates
//! at special `Λ`. Complete collapse (every velocity lands on one endpoint)
//! marks a ghost pole and its ghost source. Partial collapse marks an
//! essential singularity.

use std::ops::ControlFlow;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{golden_section, Dopri5};
use crate::profiles::ProfileModel;
use crate::raytrace::{join_fold_orders, polyline_cusps, self_intersections, Fan, Launch};
use crate::Point;

const RTOL: f64 = 1e-12;

/// Trajectories are declared divergent beyond this multiple of the problem's
/// length scale.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

fn divergence_bound(profile: &ProfileModel, z0: f64) -> f64 {
    DIVERGENCE_FACTOR * z0.abs().max(profile.length_scale())
}

/// Endpoint of the depth component and its sensitivity to the initial
/// velocity, or `None` when the trajectory diverges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Endpoint {
    pub z: f64,
    pub velocity: f64,
    /// `∂z(1)/∂ż(0)`
    pub dz_dv0: f64,
    /// `∂ż(1)/∂ż(0)`
    pub dv_dv0: f64,
}

/// Integrate the depth equation with its variational companion. `observe`
/// sees `(τ, z)` after every accepted step.
fn integrate_depth<O>(
    profile: &ProfileModel,
    lambda: f64,
    z0: f64,
    v0: f64,
    mut observe: O,
) -> Result<Option<Endpoint>>
where
    O: FnMut(f64, f64),
{
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!(
            "Λ must be finite and non-zero, got {lambda}"
        )));
    }
    let bound = divergence_bound(profile, z0);
    let k = 2.0 * lambda * lambda;
    let atol = 1e-13 * z0.abs().max(v0.abs()).max(1.0);
    let mut diverged = false;
    let solver = Dopri5::new(RTOL, atol);
    let result = solver.solve_observed(
        |_, y: &[f64; 4]| {
            let (_, g, h) = profile.eval_z(Point::new(0.0, y[0]))?;
            Ok([y[1], k * g, y[3], k * h * y[2]])
        },
        0.0,
        [z0, v0, 0.0, 1.0],
        1.0,
        |t, y| {
            observe(t, y[0]);
            if y[0].abs() > bound || !y.iter().all(|v| v.is_finite()) {
                diverged = true;
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        },
    );
    match result {
        Ok(_) if diverged => Ok(None),
        Ok((_, y)) => Ok(Some(Endpoint {
            z: y[0],
            velocity: y[1],
            dz_dv0: y[2],
            dv_dv0: y[3],
        })),
        // overflowing profiles report non-finite values as domain errors
        Err(Error::Domain(_)) if profile.domain.is_none() => Ok(None),
        Err(Error::Integrator(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// `z(1)` and `∂z(1)/∂ż(0)` for start depth `z0` and initial velocity `v0`.
pub fn endpoint(profile: &ProfileModel, lambda: f64, z0: f64, v0: f64) -> Result<Option<Endpoint>> {
    integrate_depth(profile, lambda, z0, v0, |_, _| {})
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElTrajectory {
    pub lambda: f64,
    pub start: Point,
    pub velocity: [f64; 2],
    /// `(τ, X(τ))` at the accepted integrator steps.
    pub samples: Vec<(f64, Point)>,
    pub endpoint: Point,
    pub divergent: bool,
}

impl ElTrajectory {
    /// Largest excursion `max |z(τ)|`; for the channel this is the amplitude
    /// of `C cos(2√α Λ τ + Θ)` once a half period fits in `[0, 1]`.
    pub fn amplitude(&self) -> f64 {
        self.samples.iter().map(|s| s.1.z.abs()).fold(0.0, f64::max)
    }
}

/// Solve `Ẍ = 2Λ²∇n²` from `start` with initial velocity `velocity`. The
/// range component moves uniformly because every profile in scope depends on
/// depth only.
pub fn solve_el(
    profile: &ProfileModel,
    lambda: f64,
    start: Point,
    velocity: [f64; 2],
) -> Result<ElTrajectory> {
    let mut samples = vec![(0.0, start)];
    let end = integrate_depth(profile, lambda, start.z, velocity[1], |t, z| {
        samples.push((t, Point::new(start.x + velocity[0] * t, z)));
    })?;
    let (endpoint, divergent) = match end {
        Some(e) => (Point::new(start.x + velocity[0], e.z), false),
        None => (samples.last().expect("non-empty").1, true),
    };
    Ok(ElTrajectory {
        lambda,
        start,
        velocity,
        samples,
        endpoint,
        divergent,
    })
}

/// Boundary-value solution found by shooting on `ż(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirichletSolution {
    pub v0: f64,
    pub end: Endpoint,
}

/// Newton shooting for `z(0) = z_start`, `z(1) = z_end`, seeded at `v_guess`.
pub fn solve_dirichlet(
    profile: &ProfileModel,
    lambda: f64,
    z_start: f64,
    z_end: f64,
    v_guess: f64,
) -> Result<DirichletSolution> {
    let fail = |reason: String| Error::Shooting { lambda, reason };
    let scale = z_start.abs().max(z_end.abs()).max(profile.length_scale());
    let mut v = v_guess;
    for _ in 0..60 {
        let e = endpoint(profile, lambda, z_start, v)?
            .ok_or_else(|| fail(format!("trajectory with ż(0) = {v} diverges")))?;
        let miss = e.z - z_end;
        if miss.abs() <= 1e-11 * scale {
            return Ok(DirichletSolution { v0: v, end: e });
        }
        if e.dz_dv0 == 0.0 || !e.dz_dv0.is_finite() {
            return Err(fail("endpoint insensitive to the initial velocity".into()));
        }
        let step = miss / e.dz_dv0;
        v -= step;
        if step.abs() <= 1e-15 * v.abs().max(1.0) {
            return Ok(DirichletSolution { v0: v, end: e });
        }
    }
    Err(fail("Newton iteration did not converge".into()))
}

/// Every initial velocity in `v_grid`'s span whose trajectory ends at `z_end`,
/// bracketed by sign changes on the grid and polished by shooting.
pub fn dirichlet_solutions(
    profile: &ProfileModel,
    lambda: f64,
    z_start: f64,
    z_end: f64,
    v_grid: &[f64],
) -> Result<Vec<DirichletSolution>> {
    let misses = v_grid
        .par_iter()
        .map(|&v| Ok(endpoint(profile, lambda, z_start, v)?.map(|e| e.z - z_end)))
        .collect::<Result<Vec<_>>>()?;
    let mut out: Vec<DirichletSolution> = Vec::new();
    for i in 0..v_grid.len().saturating_sub(1) {
        let (Some(a), Some(b)) = (misses[i], misses[i + 1]) else {
            continue;
        };
        if a == 0.0 || a * b < 0.0 {
            let guess = if a == b {
                v_grid[i]
            } else {
                v_grid[i] - a * (v_grid[i + 1] - v_grid[i]) / (b - a)
            };
            if let Ok(sol) = solve_dirichlet(profile, lambda, z_start, z_end, guess) {
                let fresh = out
                    .iter()
                    .all(|o| (o.v0 - sol.v0).abs() > 1e-9 * sol.v0.abs().max(1.0));
                if fresh {
                    out.push(sol);
                }
            }
        }
    }
    Ok(out)
}

// --- spread scans ------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub z0: f64,
    pub v0_set: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    /// `max − min` of `z(1)` over the non-divergent velocities; `NaN` where all
    /// diverged.
    pub spread: Vec<f64>,
    pub n_divergent: Vec<usize>,
    /// Mean endpoint per grid value.
    pub z_common: Vec<Option<f64>>,
    /// `z(1)` for each velocity of `v0_set`, `None` where divergent.
    pub endpoints: Vec<Vec<Option<f64>>>,
}

struct SpreadRow {
    spread: f64,
    mean: Option<f64>,
    divergent: usize,
    endpoints: Vec<Option<f64>>,
}

fn spread_at(profile: &ProfileModel, lambda: f64, z0: f64, v0_set: &[f64]) -> Result<SpreadRow> {
    let endpoints = v0_set
        .iter()
        .map(|&v| Ok(endpoint(profile, lambda, z0, v)?.map(|e| e.z)))
        .collect::<Result<Vec<_>>>()?;
    let finite: Vec<f64> = endpoints.iter().flatten().copied().collect();
    let divergent = v0_set.len() - finite.len();
    if finite.is_empty() {
        return Ok(SpreadRow {
            spread: f64::NAN,
            mean: None,
            divergent,
            endpoints,
        });
    }
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = finite.iter().sum::<f64>() / finite.len() as f64;
    Ok(SpreadRow {
        spread: hi - lo,
        mean: Some(mean),
        divergent,
        endpoints,
    })
}

pub fn endpoint_spread_scan(
    profile: &ProfileModel,
    lambda_grid: &[f64],
    z0: f64,
    v0_set: &[f64],
) -> Result<ScanResult> {
    if v0_set.len() < 2 {
        return Err(Error::InvalidInput(
            "a spread scan needs at least two velocities".into(),
        ));
    }
    if lambda_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "Λ grid must be strictly increasing".into(),
        ));
    }
    let rows = lambda_grid
        .par_iter()
        .map(|&l| spread_at(profile, l, z0, v0_set))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanResult {
        z0,
        v0_set: v0_set.to_vec(),
        lambda_grid: lambda_grid.to_vec(),
        spread: rows.iter().map(|r| r.spread).collect(),
        z_common: rows.iter().map(|r| r.mean).collect(),
        n_divergent: rows.iter().map(|r| r.divergent).collect(),
        endpoints: rows.into_iter().map(|r| r.endpoints).collect(),
    })
}

impl ScanResult {
    /// Complete-collapse tolerance: `1e-6 · max |z(1)|` over the sweep.
    pub fn default_tolerance(&self) -> f64 {
        let zmax = self
            .z_common
            .iter()
            .flatten()
            .zip(&self.spread)
            .map(|(z, s)| z.abs() + s)
            .fold(self.z0.abs(), f64::max);
        1e-6 * zmax
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollapseType {
    Complete,
    Partial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhostPoleEstimate {
    pub lambda_p: f64,
    pub z_ghost: f64,
    pub spread: f64,
    /// Width of the final golden-section bracket.
    pub bracket: f64,
    pub collapse_type: CollapseType,
}

/// Refine every interior local minimum of the scan by golden-section search.
/// Minima whose refined spread is below `tol` are complete collapses; minima
/// at least a hundredfold deeper than the scan's median spread are partial.
pub fn find_ghost_poles(
    profile: &ProfileModel,
    scan: &ScanResult,
    tol: f64,
) -> Result<Vec<GhostPoleEstimate>> {
    let s = &scan.spread;
    let mut finite: Vec<f64> = s.iter().copied().filter(|v| v.is_finite()).collect();
    finite.sort_by(f64::total_cmp);
    let median = finite.get(finite.len() / 2).copied().unwrap_or(0.0);
    let mut out = Vec::new();
    for i in 1..s.len().saturating_sub(1) {
        if !(s[i] <= s[i - 1] && s[i] < s[i + 1]) {
            continue;
        }
        let (a, b) = (scan.lambda_grid[i - 1], scan.lambda_grid[i + 1]);
        let mut failure = None;
        let (l, _, width) = golden_section(
            |l| match spread_at(profile, l, scan.z0, &scan.v0_set) {
                Ok(r) if r.spread.is_finite() => r.spread,
                Ok(_) => f64::INFINITY,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::INFINITY
                }
            },
            a,
            b,
            1e-12 * b.abs(),
            200,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let row = spread_at(profile, l, scan.z0, &scan.v0_set)?;
        let spread = row.spread;
        let Some(z_ghost) = row.mean else { continue };
        let collapse_type = if spread < tol {
            CollapseType::Complete
        } else if spread < 1e-2 * median {
            CollapseType::Partial
        } else {
            continue;
        };
        out.push(GhostPoleEstimate {
            lambda_p: l,
            z_ghost,
            spread,
            bracket: width,
            collapse_type,
        });
    }
    Ok(out)
}

// --- degeneration patterns ---------------------------------------------------

/// Critical values of `ż(0) ↦ z(1)` in the `(Λ, z(1))` plane. Points use
/// `x = Λ`, `z = z(1)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DegenerationPattern {
    pub fold_points: Vec<Point>,
    pub envelopes: Vec<Vec<Point>>,
    pub cusps: Vec<Point>,
    pub self_intersections: Vec<Point>,
}

impl DegenerationPattern {
    /// Catastrophe suggested by the counts.
    pub fn classify(&self) -> &'static str {
        match (self.cusps.len(), self.self_intersections.len()) {
            (0, 0) if self.fold_points.is_empty() => "none",
            (0, _) => "fold",
            (1, 0) => "cusp",
            (2, 1) => "swallowtail",
            (3, 3) => "butterfly",
            _ => "other",
        }
    }
}

/// Zeros of `∂z(1)/∂ż(0)` along `Λ` for one velocity, bisected to round-off.
fn velocity_folds(profile: &ProfileModel, lambdas: &[f64], z0: f64, v0: f64) -> Result<Vec<Point>> {
    let ends = lambdas
        .iter()
        .map(|&l| endpoint(profile, l, z0, v0))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for i in 0..lambdas.len() - 1 {
        let (Some(a), Some(b)) = (ends[i], ends[i + 1]) else {
            continue;
        };
        if a.dz_dv0 * b.dz_dv0 > 0.0 || (a.dz_dv0 == 0.0 && i > 0) {
            continue;
        }
        let (mut lo, mut hi, mut flo) = (lambdas[i], lambdas[i + 1], a.dz_dv0);
        let mut best = if a.dz_dv0.abs() <= b.dz_dv0.abs() {
            (lo, a.z)
        } else {
            (hi, b.z)
        };
        for _ in 0..60 {
            if hi - lo <= 1e-13 * hi.abs() {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let Some(e) = endpoint(profile, mid, z0, v0)? else {
                break;
            };
            best = (mid, e.z);
            if e.dz_dv0 == 0.0 {
                break;
            }
            if e.dz_dv0 * flo < 0.0 {
                hi = mid;
            } else {
                lo = mid;
                flo = e.dz_dv0;
            }
        }
        out.push(Point::new(best.0, best.1));
    }
    Ok(out)
}

/// Envelope of the endpoint curves `Λ ↦ z(1; ż(0))` over `v0_grid` in the
/// window, with its cusps and self-intersections.
pub fn degeneration_pattern(
    profile: &ProfileModel,
    lambda_window: (f64, f64),
    lambda_samples: usize,
    z0: f64,
    v0_grid: &[f64],
) -> Result<DegenerationPattern> {
    if lambda_samples < 2 || !(lambda_window.1 > lambda_window.0) {
        return Err(Error::InvalidInput("degenerate Λ window".into()));
    }
    let lambdas = crate::raytrace::linspace(lambda_window.0, lambda_window.1, lambda_samples);
    let per_velocity = v0_grid
        .par_iter()
        .map(|&v| velocity_folds(profile, &lambdas, z0, v))
        .collect::<Result<Vec<_>>>()?;
    let envelopes = join_fold_orders(&per_velocity);
    let mut cusps = Vec::new();
    let mut crossings = Vec::new();
    for (i, c) in envelopes.iter().enumerate() {
        cusps.extend(polyline_cusps(c));
        crossings.extend(self_intersections(c));
        for d in &envelopes[i + 1..] {
            crossings.extend(curve_crossings(c, d));
        }
    }
    Ok(DegenerationPattern {
        fold_points: per_velocity.into_iter().flatten().collect(),
        envelopes,
        cusps,
        self_intersections: crossings,
    })
}

/// Crossings between two distinct polylines.
fn curve_crossings(a: &[Point], b: &[Point]) -> Vec<Point> {
    let mut joined = a.to_vec();
    let split = joined.len();
    joined.extend_from_slice(b);
    // reuse the self-intersection scan, keeping only a–b pairs
    let all = self_intersections(&joined);
    all.into_iter()
        .filter(|p| {
            let on_a = a.windows(2).any(|w| on_segment(*p, w[0], w[1]));
            let on_b = b.windows(2).any(|w| on_segment(*p, w[0], w[1]));
            let on_bridge = on_segment(*p, joined[split - 1], joined[split]);
            on_a && on_b && !on_bridge
        })
        .collect()
}

fn on_segment(p: Point, a: Point, b: Point) -> bool {
    let len = a.dist(b);
    (p.dist(a) + p.dist(b) - len).abs() <= 1e-9 * len.max(f64::MIN_POSITIVE)
}

// --- ray and Dirichlet surfaces ----------------------------------------------

/// Distance from a ray-fan cusp to the nearest Dirichlet degeneration point,
/// relative to the cusp's range from the source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaMatch {
    pub cusp: Point,
    pub nearest: Point,
    pub metric: f64,
}

/// Spatial image of a degeneration at `(Λ, z)`: the ray with the source's
/// horizontal momentum reaches range `2 n Λ` at the ghost depth.
pub fn degeneration_image(
    profile: &ProfileModel,
    source: Point,
    lambda: f64,
    z: f64,
) -> Result<Point> {
    let n = profile.eval_n(Point::new(source.x, z))?;
    Ok(Point::new(source.x + 2.0 * n * lambda, z))
}

/// Relative distance from `point` to the nearest of `images`, measured
/// against `point`'s range from `source`.
pub fn sigma_metric(point: Point, source: Point, images: &[Point]) -> Option<(Point, f64)> {
    let range = (point.x - source.x).abs().max(f64::MIN_POSITIVE);
    images
        .iter()
        .map(|&q| (q, q.dist(point) / range))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Compare the ray fan's cusps with the images of the Dirichlet degenerations
/// found by the spread scan. An empty list means the fan has no cusps.
pub fn sigma_surface_compare(
    profile: &ProfileModel,
    source: Point,
    fan: &Fan,
    scan: &ScanResult,
    tol: f64,
) -> Result<Vec<SigmaMatch>> {
    let caustics = crate::raytrace::extract_caustics(profile, fan)?;
    let poles = find_ghost_poles(profile, scan, tol)?;
    let images = poles
        .iter()
        .map(|g| degeneration_image(profile, source, g.lambda_p, g.z_ghost))
        .collect::<Result<Vec<_>>>()?;
    Ok(caustics
        .cusp_points
        .iter()
        .filter_map(|&c| {
            sigma_metric(c, source, &images).map(|(nearest, metric)| SigmaMatch {
                cusp: c,
                nearest,
                metric,
            })
        })
        .collect())
}

/// Initial Euler–Lagrange velocity equivalent to a ray launch: `Ẋ(0) = 2ΛP`.
pub fn velocity_for_launch(launch: &Launch, lambda: f64) -> [f64; 2] {
    [
        2.0 * lambda * launch.momentum[0],
        2.0 * lambda * launch.momentum[1],
    ]
}
