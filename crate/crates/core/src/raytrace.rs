//! Hamiltonian rays `X' = P`, `P' = ½∇n²` with their Jacobi fields.
//!
//! A ray family is parameterised by one launch parameter (an angle for a
//! point source, a position for a line source). The Jacobi field carries
//! `∂(X, P)/∂parameter` along each ray; the ray-tube Jacobian
//! `det[P, ∂X/∂parameter] / n` vanishes on caustics.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::Dopri5;
use crate::profiles::ProfileModel;
use crate::Point;

const RTOL: f64 = 1e-11;
const ATOL: f64 = 1e-13;
const BISECTION_STEPS: usize = 60;

/// Initial state of one ray and of its Jacobi field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Launch {
    pub parameter: f64,
    pub position: Point,
    pub momentum: [f64; 2],
    /// `∂X/∂parameter` at launch.
    pub d_position: [f64; 2],
    /// `∂P/∂parameter` at launch.
    pub d_momentum: [f64; 2],
}

impl Launch {
    /// Point source; `angle` is measured from the `+x` axis toward `+z`.
    pub fn point_source(profile: &ProfileModel, source: Point, angle: f64) -> Result<Self> {
        let n = profile.eval_n(source)?;
        let (s, c) = angle.sin_cos();
        Ok(Self {
            parameter: angle,
            position: source,
            momentum: [n * c, n * s],
            d_position: [0.0, 0.0],
            d_momentum: [-n * s, n * c],
        })
    }

    /// Line source along `z = 0` carrying the phase `exp(−i k0 x²/(4μ))` in a
    /// uniform medium `n0`. The ray leaving `x0` has horizontal momentum
    /// `−x0/(2μ)`; `|x0| < 2 n0 μ`.
    pub fn quadratic_phase_line(n0: f64, mu: f64, x0: f64) -> Result<Self> {
        let px = -x0 / (2.0 * mu);
        let pz2 = n0 * n0 - px * px;
        if !(pz2 > 0.0) || mu == 0.0 {
            return Err(Error::InvalidInput(format!(
                "launch point {x0} outside the radiating aperture |x0| < {}",
                2.0 * n0 * mu.abs()
            )));
        }
        let pz = pz2.sqrt();
        let dpx = -1.0 / (2.0 * mu);
        Ok(Self {
            parameter: x0,
            position: Point::new(x0, 0.0),
            momentum: [px, pz],
            d_position: [1.0, 0.0],
            d_momentum: [dpx, -px * dpx / pz],
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySample {
    pub s: f64,
    pub position: Point,
    pub momentum: [f64; 2],
    pub d_position: [f64; 2],
    pub d_momentum: [f64; 2],
    pub jacobian: f64,
}

impl RaySample {
    fn state(&self) -> [f64; 8] {
        [
            self.position.x,
            self.position.z,
            self.momentum[0],
            self.momentum[1],
            self.d_position[0],
            self.d_position[1],
            self.d_momentum[0],
            self.d_momentum[1],
        ]
    }

    fn from_state(profile: &ProfileModel, s: f64, y: &[f64; 8]) -> Result<Self> {
        let position = Point::new(y[0], y[1]);
        let n = profile.eval_n(position)?;
        Ok(Self {
            s,
            position,
            momentum: [y[2], y[3]],
            d_position: [y[4], y[5]],
            d_momentum: [y[6], y[7]],
            jacobian: (y[2] * y[5] - y[3] * y[4]) / n,
        })
    }

    /// `|P|² − n²` relative to `n²`.
    pub fn eikonal_defect(&self, profile: &ProfileModel) -> Result<f64> {
        let n2 = profile.eval_n_squared(self.position)?;
        Ok((self.momentum[0].powi(2) + self.momentum[1].powi(2) - n2) / n2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    pub launch: Launch,
    pub samples: Vec<RaySample>,
    /// The ray left the profile's domain before `s_max`.
    pub truncated: bool,
}

impl Ray {
    pub fn launch_angle(&self) -> f64 {
        self.launch.parameter
    }
}

fn rhs(profile: &ProfileModel, y: &[f64; 8]) -> Result<[f64; 8]> {
    let (_, g, h) = profile.eval_z(Point::new(y[0], y[1]))?;
    Ok([y[2], y[3], 0.0, 0.5 * g, y[6], y[7], 0.0, 0.5 * h * y[5]])
}

fn advance(profile: &ProfileModel, from: &RaySample, s1: f64) -> Result<RaySample> {
    let y = Dopri5::new(RTOL, ATOL).solve(|_, y| rhs(profile, y), from.s, from.state(), s1)?;
    RaySample::from_state(profile, s1, &y)
}

fn check_steps(s_max: f64, ds: f64) -> Result<()> {
    if !(s_max > 0.0 && ds > 0.0 && s_max.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "need s_max > 0 and ds > 0, got s_max = {s_max}, ds = {ds}"
        )));
    }
    Ok(())
}

/// Trace one ray, sampled every `ds` up to `s_max`. Leaving the domain ends
/// the ray early with `truncated` set.
pub fn trace_launch(profile: &ProfileModel, launch: Launch, s_max: f64, ds: f64) -> Result<Ray> {
    check_steps(s_max, ds)?;
    let y0 = [
        launch.position.x,
        launch.position.z,
        launch.momentum[0],
        launch.momentum[1],
        launch.d_position[0],
        launch.d_position[1],
        launch.d_momentum[0],
        launch.d_momentum[1],
    ];
    let mut samples = vec![RaySample::from_state(profile, 0.0, &y0)?];
    let steps = (s_max / ds).ceil() as usize;
    let mut truncated = false;
    for i in 1..=steps {
        let s1 = (i as f64 * ds).min(s_max);
        match advance(profile, samples.last().expect("non-empty"), s1) {
            Ok(next) => samples.push(next),
            Err(Error::Domain(_)) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Ray {
        launch,
        samples,
        truncated,
    })
}

pub fn trace_ray(
    profile: &ProfileModel,
    source: Point,
    angle: f64,
    s_max: f64,
    ds: f64,
) -> Result<Ray> {
    trace_launch(
        profile,
        Launch::point_source(profile, source, angle)?,
        s_max,
        ds,
    )
}

/// Rays ordered by launch parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Fan {
    pub rays: Vec<Ray>,
}

pub fn launch_fan(profile: &ProfileModel, launches: &[Launch], s_max: f64, ds: f64) -> Result<Fan> {
    if launches.len() < 2 {
        return Err(Error::InvalidInput("a fan needs at least two rays".into()));
    }
    let rays = launches
        .par_iter()
        .map(|&l| trace_launch(profile, l, s_max, ds))
        .collect::<Result<Vec<_>>>()?;
    Ok(Fan { rays })
}

pub fn ray_fan(
    profile: &ProfileModel,
    source: Point,
    angles: &[f64],
    s_max: f64,
    ds: f64,
) -> Result<Fan> {
    let launches = angles
        .iter()
        .map(|&a| Launch::point_source(profile, source, a))
        .collect::<Result<Vec<_>>>()?;
    launch_fan(profile, &launches, s_max, ds)
}

/// `count` launch parameters evenly spaced on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![0.5 * (lo + hi)],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

// --- caustics ----------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldPoint {
    pub position: Point,
    pub ray: usize,
    pub s: f64,
    /// 0 for the first caustic touch along the ray, 1 for the second, …
    pub order: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CausticSet {
    pub fold_points: Vec<FoldPoint>,
    /// Fold points of each order joined across neighbouring rays.
    pub fold_curves: Vec<Vec<Point>>,
    pub cusp_points: Vec<Point>,
    pub self_intersections: Vec<Point>,
}

/// Zeros of the Jacobian along one ray, located by bisection on re-traced
/// sub-intervals.
pub fn fold_points(profile: &ProfileModel, ray: &Ray, ray_index: usize) -> Result<Vec<FoldPoint>> {
    let mut out = Vec::new();
    for w in ray.samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        // the launch point itself is a zero for point sources
        if a.s == 0.0 || a.jacobian * b.jacobian >= 0.0 {
            if b.jacobian == 0.0 && b.s > 0.0 {
                out.push(FoldPoint {
                    position: b.position,
                    ray: ray_index,
                    s: b.s,
                    order: out.len(),
                });
            }
            continue;
        }
        let (mut lo, mut hi) = (*a, *b);
        for _ in 0..BISECTION_STEPS {
            if hi.s - lo.s <= 1e-12 * hi.s.max(1.0) {
                break;
            }
            let mid = advance(profile, &lo, 0.5 * (lo.s + hi.s))?;
            if mid.jacobian == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if mid.jacobian * lo.jacobian < 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let pick = if lo.jacobian.abs() <= hi.jacobian.abs() {
            lo
        } else {
            hi
        };
        out.push(FoldPoint {
            position: pick.position,
            ray: ray_index,
            s: pick.s,
            order: out.len(),
        });
    }
    Ok(out)
}

fn turn_angle(a: Point, b: Point, c: Point) -> f64 {
    let (ux, uz) = (b.x - a.x, b.z - a.z);
    let (vx, vz) = (c.x - b.x, c.z - b.z);
    let cross = ux * vz - uz * vx;
    let dot = ux * vx + uz * vz;
    cross.atan2(dot).abs()
}

/// Cusps of a fold polyline: vertices where the tangent turns by more than
/// a right angle. When the turn is split over two vertices (the tip falls
/// between rays) the shared segment's midpoint is reported.
pub fn polyline_cusps(curve: &[Point]) -> Vec<Point> {
    let mut out = Vec::new();
    let n = curve.len();
    if n < 3 {
        return out;
    }
    let single: Vec<bool> = (1..n - 1)
        .map(|i| turn_angle(curve[i - 1], curve[i], curve[i + 1]) > std::f64::consts::FRAC_PI_2)
        .collect();
    let mut i = 1;
    while i < n - 1 {
        if single[i - 1] {
            out.push(curve[i]);
            i += 2;
            continue;
        }
        if i + 2 < n && !single[i] {
            let (a, b) = (curve[i], curve[i + 1]);
            let u = (b.x - a.x, b.z - a.z);
            let before = (a.x - curve[i - 1].x, a.z - curve[i - 1].z);
            let after = (curve[i + 2].x - b.x, curve[i + 2].z - b.z);
            let dot = before.0 * after.0 + before.1 * after.1;
            let turned = dot < 0.0 && (u.0 * u.0 + u.1 * u.1) > 0.0;
            if turned {
                out.push(Point::new(0.5 * (a.x + b.x), 0.5 * (a.z + b.z)));
                i += 2;
                continue;
            }
        }
        i += 1;
    }
    out
}

fn segment_intersection(p: Point, q: Point, r: Point, s: Point) -> Option<Point> {
    let d1 = (q.x - p.x, q.z - p.z);
    let d2 = (s.x - r.x, s.z - r.z);
    let den = d1.0 * d2.1 - d1.1 * d2.0;
    if den == 0.0 {
        return None;
    }
    let w = (r.x - p.x, r.z - p.z);
    let t = (w.0 * d2.1 - w.1 * d2.0) / den;
    let u = (w.0 * d1.1 - w.1 * d1.0) / den;
    if (0.0..1.0).contains(&t) && (0.0..1.0).contains(&u) {
        Some(Point::new(p.x + t * d1.0, p.z + t * d1.1))
    } else {
        None
    }
}

/// Crossings of a polyline with itself (non-adjacent segments only).
pub fn self_intersections(curve: &[Point]) -> Vec<Point> {
    let mut out = Vec::new();
    for i in 0..curve.len().saturating_sub(1) {
        for j in i + 2..curve.len().saturating_sub(1) {
            if let Some(x) = segment_intersection(curve[i], curve[i + 1], curve[j], curve[j + 1]) {
                out.push(x);
            }
        }
    }
    out
}

/// Join fold points of equal order across consecutive family members into
/// polylines. A curve breaks where a member lacks that order.
pub fn join_fold_orders(per_member: &[Vec<Point>]) -> Vec<Vec<Point>> {
    let max_order = per_member.iter().map(Vec::len).max().unwrap_or(0);
    let mut curves = Vec::new();
    for k in 0..max_order {
        let mut current = Vec::new();
        for folds in per_member {
            match folds.get(k) {
                Some(&f) => current.push(f),
                None => {
                    if current.len() > 1 {
                        curves.push(std::mem::take(&mut current));
                    }
                    current.clear();
                }
            }
        }
        if current.len() > 1 {
            curves.push(current);
        }
    }
    curves
}

pub fn extract_caustics(profile: &ProfileModel, fan: &Fan) -> Result<CausticSet> {
    if fan.rays.len() < 3 {
        return Err(Error::InvalidInput(
            "caustic extraction needs at least three rays".into(),
        ));
    }
    let per_ray = fan
        .rays
        .par_iter()
        .enumerate()
        .map(|(i, r)| fold_points(profile, r, i))
        .collect::<Result<Vec<_>>>()?;
    let positions: Vec<Vec<Point>> = per_ray
        .iter()
        .map(|f| f.iter().map(|p| p.position).collect())
        .collect();
    let curves = join_fold_orders(&positions);
    let mut cusps = Vec::new();
    let mut crossings = Vec::new();
    for c in &curves {
        cusps.extend(polyline_cusps(c));
        crossings.extend(self_intersections(c));
    }
    Ok(CausticSet {
        fold_points: per_ray.into_iter().flatten().collect(),
        fold_curves: curves,
        cusp_points: cusps,
        self_intersections: crossings,
    })
}

// --- arrivals ----------------------------------------------------------------

/// Closest passes of a ray by `point`: interior local minima of the distance,
/// as (foot position, signed offset). The sign says on which side of the ray
/// the point lies.
fn passes(ray: &Ray, point: Point) -> Vec<(Point, f64)> {
    let d: Vec<f64> = ray.samples.iter().map(|s| s.position.dist(point)).collect();
    let mut out = Vec::new();
    for i in 1..d.len().saturating_sub(1) {
        if d[i] <= d[i - 1] && d[i] < d[i + 1] {
            let s = &ray.samples[i];
            let (px, pz) = (s.momentum[0], s.momentum[1]);
            let norm = px.hypot(pz);
            let (wx, wz) = (point.x - s.position.x, point.z - s.position.z);
            let along = (px * wx + pz * wz) / norm;
            let foot = Point::new(
                s.position.x + along * px / norm,
                s.position.z + along * pz / norm,
            );
            out.push((foot, (px * wz - pz * wx) / norm));
        }
    }
    out
}

/// Number of rays through `point`: each change of side between neighbouring
/// rays, on passes within `radius` of the point, is one eigenray.
pub fn count_arrivals(fan: &Fan, point: Point, radius: f64) -> usize {
    let all: Vec<Vec<(Point, f64)>> = fan.rays.par_iter().map(|r| passes(r, point)).collect();
    let mut count = 0;
    for w in all.windows(2) {
        for &(foot, side) in &w[0] {
            if side.abs() >= radius {
                continue;
            }
            let partner = w[1]
                .iter()
                .filter(|(f, o)| o.abs() < radius && f.dist(foot) < 2.0 * radius)
                .min_by(|a, b| a.0.dist(foot).total_cmp(&b.0.dist(foot)));
            if let Some(&(_, other)) = partner {
                if side == 0.0 || side * other < 0.0 {
                    count += 1;
                }
            }
        }
    }
    count
}
