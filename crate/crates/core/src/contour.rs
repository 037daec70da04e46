//! Steepest-descent contours in the complex einbein plane, contour-integrated
//! fields, and the Pearcey function.

use std::f64::consts::PI;
use std::ops::ControlFlow;

use num_complex::Complex64;

use crate::einbein::{ln_lower, CriticalPoint, EffectiveCuspAction, EinbeinAction, LogPrefactor};
use crate::error::{Error, Result};
use crate::numerics::{integrate, Dopri5, QuadOptions};
use crate::Point;

type C64 = Complex64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Descent is stopped once `|Ψ|` has fallen this many e-folds below its value at the saddle.
const DESCENT_DEPTH: f64 = 40.0;
/// Further flow, used only to classify where the path ends.
const CLASSIFY_DEPTH: f64 = 700.0;
const MAX_CANDIDATES: usize = 6;
pub const ASSEMBLY_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndTag {
    CriticalPoint(C64),
    Pole(C64),
    /// Left the bounding box; `arg` is the direction of escape.
    Infinity {
        arg: f64,
    },
    /// Stopped by the step budget before reaching a pole or infinity.
    Truncated,
}

/// One half of a descent path, traversed away from its critical point.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourSegment {
    /// `(Λ, h = i k0 S̄(Λ))` at each accepted flow step.
    pub samples: Vec<(C64, C64)>,
    pub start_tag: EndTag,
    pub end_tag: EndTag,
    pub orientation: i8,
    /// `∫ Ψ dΛ` along the segment in its natural direction (away from the saddle).
    pub integral: C64,
}

impl ContourSegment {
    pub fn oriented_integral(&self) -> C64 {
        self.integral * self.orientation as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldMethod {
    Contour,
    RealAxis,
    Pearcey,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub point: Point,
    pub value: C64,
    pub method: FieldMethod,
}

// --- logarithm continuation --------------------------------------------------

fn unwrap_near(l: C64, reference: C64) -> C64 {
    let k = ((reference.im - l.im) / (2.0 * PI)).round();
    C64::new(l.re, l.im + 2.0 * PI * k)
}

/// Per-factor logarithms of the prefactor, continued along a path.
#[derive(Debug, Clone)]
struct LogTrack<'a> {
    pre: &'a LogPrefactor,
    logs: Vec<C64>,
}

impl<'a> LogTrack<'a> {
    fn principal(pre: &'a LogPrefactor, lambda: C64) -> Self {
        let logs = pre
            .terms
            .iter()
            .map(|(_, q)| ln_lower(q.value(lambda)))
            .collect();
        Self { pre, logs }
    }

    fn continued(&self, lambda: C64) -> Self {
        let logs = self
            .pre
            .terms
            .iter()
            .zip(&self.logs)
            .map(|((_, q), &r)| unwrap_near(ln_lower(q.value(lambda)), r))
            .collect();
        Self {
            pre: self.pre,
            logs,
        }
    }

    fn value(&self) -> C64 {
        self.pre.constant
            + self
                .pre
                .terms
                .iter()
                .zip(&self.logs)
                .map(|((p, _), l)| l * *p)
                .sum::<C64>()
    }

    /// `f(λ)` continued from this track, without storing the result.
    fn value_at(&self, lambda: C64) -> C64 {
        let mut v = self.pre.constant;
        for ((p, q), &r) in self.pre.terms.iter().zip(&self.logs) {
            v += unwrap_near(ln_lower(q.value(lambda)), r) * *p;
        }
        v
    }
}

// --- path pieces --------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum Piece {
    Line(C64, C64),
    Arc {
        center: C64,
        radius: f64,
        from: f64,
        to: f64,
    },
}

impl Piece {
    fn at(&self, t: f64) -> (C64, C64) {
        match *self {
            Piece::Line(a, b) => (a + (b - a) * t, b - a),
            Piece::Arc {
                center,
                radius,
                from,
                to,
            } => {
                let th = from + (to - from) * t;
                let e = C64::from_polar(radius, th);
                (center + e, I * e * (to - from))
            }
        }
    }
}

fn quad_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-11,
        max_intervals: 20_000,
    }
}

/// Integrate `exp(i k0 S̄ + f − δΛ)` over one piece, continuing logs from `track`.
/// Returns the integral and the track continued to the piece end.
fn integrate_piece<'a>(
    action: &EinbeinAction,
    p: Point,
    k0: f64,
    damping: f64,
    piece: Piece,
    track: &LogTrack<'a>,
    segment: usize,
) -> Result<(C64, LogTrack<'a>)> {
    let anchor = track.continued(piece.at(0.5).0);
    let (v, _) = integrate(
        |t| {
            let (l, dl) = piece.at(t);
            let s = action.exact_action(l, p)?;
            Ok((I * k0 * s + anchor.value_at(l) - l * damping).exp() * dl)
        },
        0.0,
        1.0,
        quad_opts(),
    )
    .map_err(|e| match e {
        Error::Quadrature { .. } => Error::Quadrature { segment },
        other => other,
    })?;
    Ok((v, anchor.continued(piece.at(1.0).0)))
}

// --- real-axis oracle ---------------------------------------------------------

/// Positive real poles of `S̄` (and of the prefactor) below `limit`.
fn positive_poles(action: &EinbeinAction, limit: f64) -> Vec<f64> {
    match *action {
        EinbeinAction::QuadraticChannel { alpha, .. } => {
            let step = PI / (2.0 * alpha.sqrt());
            (1..)
                .map(|m| m as f64 * step)
                .take_while(|&l| l < limit)
                .collect()
        }
        EinbeinAction::SimpleCusp { mu, .. } => [mu].into_iter().filter(|&m| m > 0.0).collect(),
        EinbeinAction::EffectiveCusp(e) => [e.mu].into_iter().filter(|&m| m > 0.0).collect(),
        EinbeinAction::LinearProfile { .. } => vec![],
    }
}

/// Tail treatment: rotate onto a ray `T + s e^{iθ}` where the integrand decays,
/// or (`None`) run along the damped real axis to a cutoff.
fn tail_ray(action: &EinbeinAction, p: Point) -> Option<(f64, f64)> {
    let scale = action.scale();
    match *action {
        EinbeinAction::LinearProfile { n0, a, source } => {
            if a == 0.0 {
                Some((PI / 2.0, clear_of_poles(action, p, n0, 0.0)))
            } else {
                // rotate down once the cubic term controls the phase
                let lin = (n0 * n0 - 0.5 * a * (p.z + source.z)).abs();
                let t = (2.0 * (2.0 * lin).sqrt() / a.abs())
                    .max(scale)
                    .max(p.dist(source) / n0);
                Some((-PI / 6.0, t))
            }
        }
        EinbeinAction::SimpleCusp { n0, mu } => Some((PI / 2.0, clear_of_poles(action, p, n0, mu))),
        EinbeinAction::EffectiveCusp(e) => {
            Some((PI / 2.0, clear_of_poles(action, p, e.n_eff(p), e.mu)))
        }
        EinbeinAction::QuadraticChannel { .. } => None,
    }
}

/// Start of an upward tail ray on which `n²Λ` dominates every pole term, so
/// that `Im S̄` grows monotonically along it.
fn clear_of_poles(action: &EinbeinAction, p: Point, n: f64, mu: f64) -> f64 {
    let reach = action
        .poles_and_residues(p)
        .iter()
        .map(|q| q.location.re + 2.0 * q.residue.sqrt() / n)
        .fold(0.0, f64::max);
    reach.max(1.5 * mu.abs()) + 0.5 * action.scale()
}

/// Coefficient of the term linear in `Λ`, which sets the growth below the real axis.
fn linear_coefficient(action: &EinbeinAction, p: Point) -> f64 {
    match *action {
        EinbeinAction::LinearProfile { n0, a, source } => {
            (n0 * n0 - 0.5 * a * (p.z + source.z)).abs()
        }
        EinbeinAction::SimpleCusp { n0, .. } | EinbeinAction::QuadraticChannel { n0, .. } => {
            n0 * n0
        }
        EinbeinAction::EffectiveCusp(e) => e.n_eff(p).powi(2),
    }
}

fn real_axis_once(action: &EinbeinAction, p: Point, k0: f64, damping: f64) -> Result<C64> {
    let scale = action.scale();
    let pre = action.log_prefactor(k0);
    let tail = tail_ray(action, p);
    let cutoff = match tail {
        Some((_, t)) => t,
        None => 45.0 / damping,
    };
    let poles = positive_poles(action, cutoff);
    let first = poles.first().copied().unwrap_or(cutoff).min(cutoff);
    // keeps the growth of exp(i k0 c Λ) below the axis under e^10
    let growth = 40.0 / (k0 * linear_coefficient(action, p)).max(1e-300);
    let rho = 0.25 * first.min(scale).min(growth);

    let mut pieces = vec![
        Piece::Line(C64::new(0.0, 0.0), C64::new(0.5 * rho, -0.5 * rho)),
        Piece::Line(C64::new(0.5 * rho, -0.5 * rho), C64::new(rho, 0.0)),
    ];
    let mut at = rho;
    for (k, &mu) in poles.iter().enumerate() {
        let left = if k == 0 { mu } else { mu - poles[k - 1] };
        let right = poles
            .get(k + 1)
            .map_or(f64::INFINITY, |n| n - mu)
            .min(cutoff - mu);
        let r = 0.25 * left.min(right).min(scale).min(growth);
        pieces.push(Piece::Line(C64::new(at, 0.0), C64::new(mu - r, 0.0)));
        let center = C64::new(mu, 0.0);
        pieces.push(Piece::Arc {
            center,
            radius: r,
            from: PI,
            to: 1.5 * PI,
        });
        pieces.push(Piece::Arc {
            center,
            radius: r,
            from: 1.5 * PI,
            to: 2.0 * PI,
        });
        at = mu + r;
    }
    if at < cutoff {
        pieces.push(Piece::Line(C64::new(at, 0.0), C64::new(cutoff, 0.0)));
    }

    let mut track = LogTrack::principal(&pre, pieces[0].at(0.5).0);
    let mut total = C64::new(0.0, 0.0);
    for (k, piece) in pieces.into_iter().enumerate() {
        // long straight runs are split so log arguments move by well under π per piece
        let chunks = match piece {
            Piece::Line(a, b) => (((b - a).norm() / (0.5 * scale)).ceil() as usize).max(1),
            Piece::Arc { .. } => 1,
        };
        for c in 0..chunks {
            let sub = match piece {
                Piece::Line(a, b) => Piece::Line(
                    a + (b - a) * (c as f64 / chunks as f64),
                    a + (b - a) * ((c + 1) as f64 / chunks as f64),
                ),
                arc => arc,
            };
            let (v, next) = integrate_piece(action, p, k0, damping, sub, &track, k)?;
            total += v;
            track = next;
        }
    }

    if let Some((theta, start)) = tail {
        let dir = C64::from_polar(1.0, theta);
        let chunk = 0.5 * scale;
        let mut s = 0.0;
        for n in 0.. {
            let a = C64::new(start, 0.0) + dir * s;
            let b = a + dir * chunk;
            let (v, next) = integrate_piece(
                action,
                p,
                k0,
                damping,
                Piece::Line(a, b),
                &track,
                usize::MAX,
            )?;
            total += v;
            track = next;
            s += chunk;
            if n >= 4 && v.norm() <= 1e-15 * total.norm() {
                break;
            }
            if n > 100_000 {
                return Err(Error::Quadrature {
                    segment: usize::MAX,
                });
            }
        }
    }
    Ok(total)
}

/// Default damping (1/length) for [`integrate_real_axis`].
pub fn default_damping(action: &EinbeinAction) -> f64 {
    match action {
        EinbeinAction::QuadraticChannel { .. } => 0.2 / action.scale(),
        _ => 1e-3 / action.scale(),
    }
}

/// Regularised positive-real-axis integral `∫₀^∞ Ψ dΛ`.
///
/// The path leaves `Λ = 0` into the lower half plane, passes below every
/// positive real pole on small semicircles, and ends either on a ray where the
/// integrand decays or, for the channel, on the real axis at a cutoff set by the
/// damping. A factor `e^{−δΛ}` is applied for `δ ∈ {d, d/2, d/4}` and the
/// result is Richardson-extrapolated to `δ → 0`.
pub fn integrate_real_axis(action: &EinbeinAction, p: Point, k0: f64, damping: f64) -> Result<C64> {
    if !(k0 > 0.0 && k0.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "k0 must be positive, got {k0}"
        )));
    }
    if !(damping > 0.0 && damping.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "damping must be positive, got {damping}"
        )));
    }
    let v: Vec<C64> = [1.0, 0.5, 0.25]
        .iter()
        .map(|f| real_axis_once(action, p, k0, damping * f))
        .collect::<Result<_>>()?;
    let (d1, d2) = ((v[1] - v[0]).norm(), (v[2] - v[1]).norm());
    if d2 > 1.5 * d1 && d2 > 1e-12 * v[2].norm() && d2 > 1e-15 {
        return Err(Error::Extrapolation(format!(
            "successive damped values moved by {d1:e} then {d2:e}"
        )));
    }
    let r1 = v[1] * 2.0 - v[0];
    let r2 = v[2] * 2.0 - v[1];
    Ok((r2 * 4.0 - r1) / 3.0)
}

// --- descent tracing ----------------------------------------------------------

/// Nearest real pole; with `essential_only`, poles whose residue vanishes at `p`
/// (where `S̄` is regular) are skipped.
fn nearest_pole(
    action: &EinbeinAction,
    p: Point,
    lambda: C64,
    essential_only: bool,
) -> Option<(C64, f64)> {
    let candidates: Vec<(f64, f64)> = match *action {
        EinbeinAction::QuadraticChannel { alpha, source, .. } => {
            let step = PI / (2.0 * alpha.sqrt());
            let m = (lambda.re / step).round() as i64;
            let residue = match m {
                0 => 0.25 * p.dist(source).powi(2),
                _ if m % 2 == 0 => 0.25 * (p.z - source.z).powi(2),
                _ => 0.25 * (p.z + source.z).powi(2),
            };
            vec![(m as f64 * step, residue)]
        }
        _ => action
            .poles_and_residues(p)
            .into_iter()
            .map(|q| (q.location.re, q.residue))
            .collect(),
    };
    candidates
        .into_iter()
        .filter(|&(_, r)| !essential_only || r > 0.0)
        .map(|(m, _)| (C64::new(m, 0.0), (lambda - m).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Follow the descent flow from `start` and return the segment integral.
///
/// `initial` is the already-integrated stretch before `start` and `f_start`
/// the continued log prefactor there; both are relative to `exp(h_ref)`.
#[allow(clippy::too_many_arguments)]
fn descend(
    action: &EinbeinAction,
    p: Point,
    k0: f64,
    h_ref: C64,
    start: C64,
    f_start: C64,
    initial: C64,
    mut samples: Vec<(C64, C64)>,
    start_tag: EndTag,
    orientation: i8,
) -> Result<ContourSegment> {
    let scale = action.scale();
    let pre = action.log_prefactor(k0);
    let pole_radius = 1e-9 * scale;
    let bbox = 1e3 * scale + 10.0 * start.norm();
    let mut end_tag = EndTag::Truncated;

    let rhs = |_t: f64, y: &[f64; 6]| -> Result<[f64; 6]> {
        let l = C64::new(y[0], y[1]);
        let h1 = I * k0 * action.action_derivative(l, p, 1)?;
        if h1.norm() == 0.0 {
            return Err(Error::Integrator(format!(
                "descent flow met a second critical point at {l}"
            )));
        }
        let v = -h1.conj() / h1.norm();
        let h = I * k0 * action.exact_action(l, p)? - h_ref;
        let f = C64::new(y[4], y[5]);
        let w = (h + f).exp() * v;
        let df = pre.derivative(l) * v;
        Ok([v.re, v.im, w.re, w.im, df.re, df.im])
    };
    let solver = Dopri5::new(1e-10, 1e-13).with_h_max(0.05 * scale);
    let (_, y) = solver.solve_observed(
        rhs,
        0.0,
        [start.re, start.im, 0.0, 0.0, f_start.re, f_start.im],
        1e3 * bbox,
        |_t, y| {
            let l = C64::new(y[0], y[1]);
            let h = I * k0 * action.action_unchecked(l, p);
            samples.push((l, h));
            let drop = (h - h_ref).re;
            let (pole, dist) = nearest_pole(action, p, l, true)
                .unwrap_or((C64::new(f64::NAN, 0.0), f64::INFINITY));
            if dist < pole_radius {
                end_tag = EndTag::Pole(pole);
                return ControlFlow::Break(());
            }
            if l.norm() > bbox {
                end_tag = EndTag::Infinity { arg: l.arg() };
                return ControlFlow::Break(());
            }
            if drop < -CLASSIFY_DEPTH {
                end_tag = if dist < 0.05 * scale {
                    EndTag::Pole(pole)
                } else {
                    EndTag::Infinity { arg: l.arg() }
                };
                return ControlFlow::Break(());
            }
            ControlFlow::Continue(())
        },
    )?;
    let mut body = initial + C64::new(y[2], y[3]);
    if let EndTag::Pole(mu) = end_tag {
        let stop = C64::new(y[0], y[1]);
        let drop = (I * k0 * action.exact_action(stop, p)? - h_ref).re;
        if drop > -DESCENT_DEPTH {
            // weak residue: close the remaining gap, entering the pole from
            // below where exp(i k0 R/(Λ−μ)) decays
            let rho = (stop - mu).norm();
            let from = (stop - mu).arg();
            let mut sweep = -0.5 * PI - from;
            if sweep <= -PI {
                sweep += 2.0 * PI;
            } else if sweep > PI {
                sweep -= 2.0 * PI;
            }
            let track = LogTrack::principal(&pre, stop);
            let offset = C64::new(y[4], y[5]) - track.value();
            let arc = Piece::Arc {
                center: mu,
                radius: rho,
                from,
                to: from + sweep,
            };
            let (a, track) = integrate_piece(action, p, k0, 0.0, arc, &track, 0)?;
            let bottom = mu - I * rho;
            let track = track.continued(bottom);
            let (b, _) = integrate(
                |t| {
                    let l = bottom + (mu - bottom) * t;
                    let s = action.exact_action(l, p)?;
                    Ok((I * k0 * s - h_ref + track.value_at(l) + offset).exp() * (mu - bottom))
                },
                0.0,
                1.0,
                quad_opts(),
            )?;
            body += (a * (-h_ref + offset).exp()) + b;
        }
    }
    Ok(ContourSegment {
        samples,
        start_tag,
        end_tag,
        orientation,
        integral: body * h_ref.exp(),
    })
}

/// The two halves of the steepest-descent path through `cp`.
///
/// Each half starts on the descent eigen-direction of the quadratic form,
/// then follows `dΛ/dt = −conj(h')/|h'|` with `h = i k0 S̄`. The integral of
/// `Ψ` is accumulated alongside the flow.
pub fn trace_steepest_descent(
    action: &EinbeinAction,
    p: Point,
    cp: &CriticalPoint,
    k0: f64,
) -> Result<[ContourSegment; 2]> {
    if !(k0 > 0.0 && k0.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "k0 must be positive, got {k0}"
        )));
    }
    let scale = action.scale();
    let lc = cp.lambda;
    let s_cp = action.exact_action(lc, p)?;
    let s1 = action.action_derivative(lc, p, 1)?;
    let s2 = action.action_derivative(lc, p, 2)?;
    if s1.norm() * scale > 1e-8 * (s_cp.norm() + scale) {
        return Err(Error::InvalidInput(format!(
            "{lc} is not a critical point: |dS/dΛ| = {:e}",
            s1.norm()
        )));
    }
    if s2.norm() * scale * scale < 1e-8 * (s_cp.norm() + scale) {
        return Err(Error::DegenerateCriticalPoint(format!("{lc}")));
    }
    let h_cp = I * k0 * s_cp;
    let h2 = I * k0 * s2;
    let dir = C64::from_polar(1.0, 0.5 * (PI - h2.arg()));
    let pole_dist = nearest_pole(action, p, lc, false).map_or(f64::INFINITY, |q| q.1);
    let eps = (2e-4 / h2.norm())
        .sqrt()
        .min(0.01 * pole_dist)
        .min(0.01 * scale);
    let pre = action.log_prefactor(k0);
    let origin = LogTrack::principal(&pre, lc);

    let half = |sign: f64, tilt: f64| -> Result<ContourSegment> {
        let d = dir * sign * C64::from_polar(1.0, tilt);
        let (short, _) = integrate(
            |t| {
                let l = lc + d * t;
                Ok((I * k0 * action.exact_action(l, p)? - h_cp + origin.value_at(l)).exp() * d)
            },
            0.0,
            eps,
            quad_opts(),
        )?;
        let l0 = lc + d * eps;
        let samples = vec![(lc, h_cp), (l0, I * k0 * action.exact_action(l0, p)?)];
        descend(
            action,
            p,
            k0,
            h_cp,
            l0,
            origin.value_at(l0),
            short,
            samples,
            EndTag::CriticalPoint(lc),
            sign as i8,
        )
    };
    // On a Stokes line the flow runs into a second saddle and stalls there.
    // A slightly tilted start passes that saddle on one side; either side is a
    // valid contour, and the assembly coefficients absorb the difference.
    let traced = |sign: f64| -> Result<ContourSegment> {
        let mut last = None;
        for tilt in [0.0, 1e-3, -1e-3] {
            match half(sign, tilt) {
                Err(e @ Error::Integrator(_)) => last = Some(e),
                other => return other,
            }
        }
        Err(last.expect("at least one attempt"))
    };
    Ok([traced(1.0)?, traced(-1.0)?])
}

/// Real points where the prefactor branches but `S̄` is regular: poles whose
/// residue vanishes at `p`.
pub fn branch_points(action: &EinbeinAction, p: Point) -> Vec<C64> {
    match action {
        EinbeinAction::SimpleCusp { .. } | EinbeinAction::QuadraticChannel { .. } => action
            .poles_and_residues(p)
            .into_iter()
            .filter(|q| q.residue == 0.0 && q.location.re >= 0.0)
            .map(|q| q.location)
            .collect(),
        _ => vec![],
    }
}

/// Unit directions in which descent paths leave the branch point `at`.
///
/// Normally one, down the gradient. When a critical point sits on the branch
/// point there are two, along the descent axis of the quadratic form.
pub fn branch_directions(action: &EinbeinAction, p: Point, at: C64, k0: f64) -> Result<Vec<C64>> {
    let probe = at + 1e-6 * action.scale();
    let h1 = I * k0 * action.action_derivative(probe, p, 1)?;
    let h2 = I * k0 * action.action_derivative(probe, p, 2)?;
    if h1.norm() > 1e-4 * h2.norm() * action.scale() {
        return Ok(vec![-h1.conj() / h1.norm()]);
    }
    let dir = C64::from_polar(1.0, 0.5 * (PI - h2.arg()));
    Ok(vec![dir, -dir])
}

/// Descent path leaving a branch point of the prefactor in direction `dir`.
pub fn trace_from_branch_point(
    action: &EinbeinAction,
    p: Point,
    at: C64,
    dir: C64,
    k0: f64,
) -> Result<ContourSegment> {
    let eps = 1e-3 * action.scale();
    let l0 = at + dir * eps;
    let h_ref = I * k0 * action.exact_action(l0, p)?;
    let pre = action.log_prefactor(k0);
    let track = LogTrack::principal(&pre, at + dir * (0.5 * eps));
    // t = u² removes the inverse-square-root endpoint singularity; the
    // residue vanishes here, so S̄ is regular arbitrarily close to `at`.
    // Below u0 the integrand is flat but Λ − at loses digits to rounding.
    let integrand = |u: f64| {
        let l = at + dir * (u * u);
        (I * k0 * action.action_unchecked(l, p) - h_ref + track.value_at(l)).exp() * dir * (2.0 * u)
    };
    let u0 = 1e-4 * action.scale().sqrt();
    let (short, _) = integrate(
        |u| Ok(integrand(u)),
        u0,
        eps.sqrt(),
        QuadOptions {
            rel_tol: 1e-9,
            ..quad_opts()
        },
    )?;
    let short = short + integrand(u0) * u0;
    descend(
        action,
        p,
        k0,
        h_ref,
        l0,
        track.value_at(l0),
        short,
        vec![(l0, h_ref)],
        EndTag::Pole(at),
        1,
    )
}

// --- assembly -----------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct AssembledContour {
    pub segments: Vec<ContourSegment>,
    /// Coefficient in `{−1, 0, 1}` of each candidate descent path.
    pub coefficients: Vec<i8>,
    pub candidates: Vec<CriticalPoint>,
    /// Real-axis integral the signs were matched against, evaluated at `oracle_k0`.
    pub oracle: C64,
    pub oracle_k0: f64,
    pub relative_error: f64,
}

/// Largest wavenumber (times the action scale) at which the real-axis oracle is run.
const ORACLE_K_SCALE: f64 = 40.0;

/// Choose descent paths whose signed sum reproduces the real-axis integral.
///
/// The descent flow does not depend on the size of `k0`, so the signs are
/// matched at `min(k0, 40/scale)`, where the oracle is cheap, and applied to
/// paths traced at `k0`.
pub fn assemble_contour(action: &EinbeinAction, p: Point, k0: f64) -> Result<AssembledContour> {
    if !(k0 > 0.0 && k0.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "k0 must be positive, got {k0}"
        )));
    }
    let k_ref = k0.min(ORACLE_K_SCALE / action.scale());
    let oracle = integrate_real_axis(action, p, k_ref, default_damping(action))?;
    let bps = branch_points(action, p);
    let cps = action
        .find_critical_points(p, action.default_region(p))
        .points
        .into_iter()
        // a saddle on a branch point is covered by the branch paths
        .filter(|cp| {
            bps.iter()
                .all(|b| (cp.lambda - b).norm() > 1e-6 * action.scale())
        });
    let mut ranked: Vec<(CriticalPoint, f64)> = cps
        .map(|cp| {
            // saddle-point estimate of the path's weight
            let f = action.log_prefactor(k0).eval_lower(cp.lambda);
            let w =
                (I * k0 * cp.action_value + f).re - 0.5 * (k0 * cp.second_derivative.norm()).ln();
            (cp, w)
        })
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    ranked.truncate(MAX_CANDIDATES);

    let mut branches = Vec::new();
    for bp in bps {
        for d in branch_directions(action, p, bp, k_ref)? {
            branches.push((bp, d));
        }
    }
    let mut values = Vec::with_capacity(ranked.len() + branches.len());
    for (cp, _) in &ranked {
        let [a, b] = trace_steepest_descent(action, p, cp, k_ref)?;
        values.push(a.integral - b.integral);
    }
    for &(bp, d) in &branches {
        values.push(trace_from_branch_point(action, p, bp, d, k_ref)?.integral);
    }
    // saddle paths enter with ±1; a cut is traversed on both sheets, hence ±2
    let radix: Vec<i8> = (0..values.len())
        .map(|j| if j < ranked.len() { 1 } else { 2 })
        .collect();

    let k = values.len();
    let norm = oracle.norm().max(f64::MIN_POSITIVE);
    let mut best = (f64::INFINITY, vec![0i8; k]);
    let combos: usize = radix.iter().map(|&r| 2 * r as usize + 1).product();
    for code in 0..combos {
        let mut c = vec![0i8; k];
        let mut rest = code;
        for (cj, &r) in c.iter_mut().zip(&radix) {
            let base = 2 * r as usize + 1;
            *cj = (rest % base) as i8 - r;
            rest /= base;
        }
        let sum: C64 = c.iter().zip(&values).map(|(&cj, v)| v * cj as f64).sum();
        let err = (sum - oracle).norm() / norm;
        if err < best.0 {
            best = (err, c);
        }
    }
    if best.0 > ASSEMBLY_TOLERANCE {
        return Err(Error::Assembly {
            best_rel_err: best.0,
            best: best.1,
        });
    }
    let mut segments = Vec::new();
    for ((cp, _), &c) in ranked.iter().zip(&best.1) {
        if c != 0 {
            let [a, b] = trace_steepest_descent(action, p, cp, k0)?;
            segments.push(ContourSegment {
                orientation: c,
                ..a
            });
            segments.push(ContourSegment {
                orientation: -c,
                ..b
            });
        }
    }
    for (&(bp, d), &c) in branches.iter().zip(&best.1[ranked.len()..]) {
        if c != 0 {
            let seg = trace_from_branch_point(action, p, bp, d, k0)?;
            segments.push(ContourSegment {
                orientation: c,
                ..seg
            });
        }
    }
    Ok(AssembledContour {
        segments,
        coefficients: best.1,
        candidates: ranked.into_iter().map(|t| t.0).collect(),
        oracle,
        oracle_k0: k_ref,
        relative_error: best.0,
    })
}

/// Sum of the oriented segment integrals.
pub fn integrate_field(segments: &[ContourSegment]) -> C64 {
    segments.iter().map(ContourSegment::oriented_integral).sum()
}

/// Field at `p` by the chosen method.
pub fn field(
    action: &EinbeinAction,
    p: Point,
    k0: f64,
    method: FieldMethod,
) -> Result<FieldSample> {
    let value = match method {
        FieldMethod::Contour => integrate_field(&assemble_contour(action, p, k0)?.segments),
        FieldMethod::RealAxis => integrate_real_axis(action, p, k0, default_damping(action))?,
        FieldMethod::Pearcey => match *action {
            EinbeinAction::SimpleCusp { n0, mu } => simple_cusp_uniform(n0, mu, p, k0)?,
            _ => {
                return Err(Error::InvalidInput(
                    "the Pearcey representation is implemented for the line-source cusp".into(),
                ))
            }
        },
    };
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::Domain(format!(
            "non-finite field at ({}, {})",
            p.x, p.z
        )));
    }
    Ok(FieldSample {
        point: p,
        value,
        method,
    })
}

// --- Pearcey ------------------------------------------------------------------

/// `∫ exp(i(λ⁴ + ζ₂λ² + ζ₁λ)) dλ` over the real line, for `|ζ₂|, |ζ₁| ≤ 50`.
///
/// The central stretch `[−U, U]` is integrated on the real axis; beyond it the
/// path turns onto `±(U + e^{iπ/8}s)` where the integrand decays monotonically.
pub fn pearcey(zeta2: f64, zeta1: f64) -> Result<C64> {
    if !(zeta2.abs() <= 50.0 && zeta1.abs() <= 50.0) {
        return Err(Error::InvalidInput(format!(
            "Pearcey arguments ({zeta2}, {zeta1}) outside |ζ| ≤ 50"
        )));
    }
    let g = |l: C64| (I * (l.powi(4) + l * l * zeta2 + l * zeta1)).exp();
    let u = (zeta2.abs().sqrt() + zeta1.abs().cbrt() + 1.0).max(1.5);
    // the real segment cancels an O(1) integrand, so tolerances sit above roundoff
    let opts = QuadOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-11,
        max_intervals: 200_000,
    };
    let e = C64::from_polar(1.0, PI / 8.0);
    let (mid, _) = integrate(|x| Ok(g(C64::new(x, 0.0))), -u, u, opts)?;
    let (right, _) = integrate(|s| Ok(g(e * s + u) * e), 0.0, 6.0, opts)?;
    let (left, _) = integrate(|s| Ok(g(-(e * s + u)) * e), 0.0, 6.0, opts)?;
    Ok(mid + right + left)
}

/// Uniform field of the line-source cusp, `i C e^{i k0 n0 z} (s/n0) P̄(ζ₂, ζ₁)`.
///
/// The `(Λ−μ)^{-1/2}` factor is opened into a Gaussian over `ξ`, the `Λ`
/// integral is done by stationary phase, and the `ξ` phase
/// `xξ + z√(n0² − ξ²) + μξ²` is cut at quartic order. With `ξ = sλ`,
/// `s = (8n0³/(k0 z))^{1/4}`, that is the conjugate Pearcey integral at
/// `ζ₂ = k0 s² (z/(2n0) − μ)`, `ζ₁ = −k0 s x`.
pub fn simple_cusp_uniform(n0: f64, mu: f64, p: Point, k0: f64) -> Result<C64> {
    if !(p.z > 0.0 && n0 > 0.0 && mu > 0.0 && k0 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "uniform cusp field needs z, n0, μ, k0 > 0 (z = {})",
            p.z
        )));
    }
    let c0 = C64::new(0.0, mu / (4.0 * PI * k0)).sqrt();
    let s = (8.0 * n0.powi(3) / (k0 * p.z)).powf(0.25);
    let zeta2 = k0 * s * s * (p.z / (2.0 * n0) - mu);
    let zeta1 = -k0 * s * p.x;
    Ok(I * c0 * C64::from_polar(s / n0, k0 * n0 * p.z) * pearcey(zeta2, zeta1)?.conj())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PearceyArguments {
    pub zeta2: f64,
    pub zeta1: f64,
    /// Phase `Φ` of the uniform representation `φ ≈ A e^{Φ} P(ζ₂, ζ₁)`.
    pub phase: C64,
    /// Set when the point lies outside the cusp neighbourhood.
    pub outside_neighborhood: bool,
}

/// Map from cusp-adapted distances `(r1, r2)` to Pearcey arguments.
pub fn pearcey_map_coords(r1: f64, r2: f64, mu: f64, n_eff: f64, k0: f64) -> PearceyArguments {
    let omega = 2.0 * n_eff * mu;
    let r1t = r1 - omega;
    let gamma = r1t / omega;
    let chi = r2 / omega;
    PearceyArguments {
        zeta2: (k0 / mu).sqrt() * r1t,
        zeta1: (k0 / mu).powf(0.75) * omega.sqrt() * r2,
        phase: I * k0 * (omega * omega / mu) * (0.75 * chi.abs().powf(2.0 / 3.0) + 2.0 * gamma),
        outside_neighborhood: r1t.abs() > 0.25 * omega || r2.abs() > 0.25 * omega,
    }
}

pub fn pearcey_map(p: Point, eff: &EffectiveCuspAction, k0: f64) -> PearceyArguments {
    pearcey_map_coords(eff.r1(p), eff.r2(p), eff.mu, eff.n_eff(p), k0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free() -> EinbeinAction {
        EinbeinAction::LinearProfile {
            n0: 1.0,
            a: 0.0,
            source: Point::default(),
        }
    }

    #[test]
    fn pearcey_origin() {
        // 2 Γ(5/4) e^{iπ/8}
        let v = pearcey(0.0, 0.0).unwrap();
        let want = C64::from_polar(2.0 * 0.906_402_477_055_477, PI / 8.0);
        assert!((v - want).norm() < 1e-10, "{v}");
        assert!(pearcey(60.0, 0.0).is_err());
    }

    #[test]
    fn pearcey_map_examples() {
        let m = pearcey_map_coords(2.1, 0.05, 1.0, 1.0, 100.0);
        assert!((m.zeta2 - 1.0).abs() < 1e-12);
        assert!((m.zeta1 - 5f64.sqrt()).abs() < 1e-12);
        let m = pearcey_map_coords(2.0, 0.0, 1.0, 1.0, 100.0);
        assert_eq!((m.zeta2, m.zeta1), (0.0, 0.0));
        assert!(!m.outside_neighborhood);
        assert!(pearcey_map_coords(3.0, 0.0, 1.0, 1.0, 100.0).outside_neighborhood);
    }

    #[test]
    fn free_space_descent_ends() {
        let a = free();
        let p = Point::new(2.0, 0.0);
        let cps = a.find_critical_points(p, a.default_region(p));
        let [s1, s2] = trace_steepest_descent(&a, p, &cps.points[0], 5.0).unwrap();
        let tags = [s1.end_tag, s2.end_tag];
        assert!(
            tags.iter()
                .any(|t| matches!(t, EndTag::Pole(z) if z.norm() == 0.0)),
            "{tags:?}"
        );
        assert!(
            tags.iter().any(|t| matches!(t, EndTag::Infinity { .. })),
            "{tags:?}"
        );
        for s in [&s1, &s2] {
            let h0 = s.samples[0].1;
            for w in s.samples.windows(2) {
                assert!(
                    (w[1].1.im - h0.im).abs() < 1e-6 * h0.norm(),
                    "{} vs {}",
                    w[1].1,
                    h0
                );
                assert!(w[1].1.re <= w[0].1.re + 1e-9 * h0.norm());
            }
        }
    }

    #[test]
    fn real_axis_and_contour_agree_for_free_space() {
        let a = free();
        let p = Point::new(2.0, 0.0);
        let c = assemble_contour(&a, p, 10.0).unwrap();
        assert!(c.relative_error < 1e-6, "{}", c.relative_error);
        assert_eq!(c.coefficients.iter().filter(|&&x| x != 0).count(), 1);
    }

    #[test]
    fn zero_wavenumber_rejected() {
        assert!(integrate_real_axis(&free(), Point::new(1.0, 0.0), 0.0, 1e-3).is_err());
        assert!(integrate_real_axis(&free(), Point::new(1.0, 0.0), 1.0, 0.0).is_err());
    }

    #[test]
    fn cusp_tip_assembles_through_branch_paths() {
        // saddle and vanishing ghost residue coincide at Λ = μ
        let a = EinbeinAction::SimpleCusp { n0: 1.0, mu: 1.0 };
        let p = Point::new(0.0, 2.0);
        assert_eq!(branch_points(&a, p), vec![C64::new(1.0, 0.0)]);
        assert_eq!(
            branch_directions(&a, p, C64::new(1.0, 0.0), 40.0)
                .unwrap()
                .len(),
            2
        );
        let c = assemble_contour(&a, p, 100.0).unwrap();
        assert!(
            c.relative_error < ASSEMBLY_TOLERANCE,
            "{}",
            c.relative_error
        );
    }

    #[test]
    fn ghost_source_line_has_one_branch_direction() {
        let a = EinbeinAction::SimpleCusp { n0: 1.0, mu: 1.0 };
        let p = Point::new(0.0, 1.0);
        let bp = branch_points(&a, p);
        assert_eq!(bp.len(), 1);
        assert_eq!(branch_directions(&a, p, bp[0], 10.0).unwrap().len(), 1);
        let c = assemble_contour(&a, p, 10.0).unwrap();
        assert!(
            c.relative_error < ASSEMBLY_TOLERANCE,
            "{}",
            c.relative_error
        );
    }

    #[test]
    fn uniform_cusp_field_tracks_contour_field() {
        let act = EinbeinAction::SimpleCusp { n0: 1.0, mu: 1.0 };
        let k0 = 1e4;
        for p in [
            Point::new(0.0, 2.0),
            Point::new(1.5e-3, 2.01),
            Point::new(-1e-3, 1.99),
        ] {
            let direct = field(&act, p, k0, FieldMethod::Contour).unwrap().value;
            let uniform = field(&act, p, k0, FieldMethod::Pearcey).unwrap().value;
            assert!(
                (direct - uniform).norm() < 3e-2 * direct.norm(),
                "{p:?}: {direct} vs {uniform}"
            );
        }
    }
}
