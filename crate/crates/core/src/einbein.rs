//! Exact einbein actions for the soluble models.
//!
//! The action splits as `𝕊 = i k0 S̄(Λ) + f(Λ)`: `S̄` is meromorphic in the
//! einbein `Λ` (units of length) and `f` is a logarithmic prefactor. Poles of
//! `S̄` carry residues `R_j(x)` whose zero sets are sources or ghost sources.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{integrate_real, QuadOptions};
use crate::profiles::ProfileModel;
use crate::Point;

type C64 = Complex64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Single-ghost-pole effective action near one cusp:
/// `S̄ = r1²/(4Λ) + r2²/(4(Λ−μ)) + n_eff² Λ`.
///
/// `r1` is the distance to the source point and `r2 = z − ghost_z` the signed
/// distance to the ghost source. `n_eff = n_ghost − B (z − ghost_z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveCuspAction {
    pub source: Point,
    pub ghost_z: f64,
    pub mu: f64,
    pub n_ghost: f64,
    /// Asymmetry slope `B` (1/length); zero gives the symmetric astroid corner.
    pub slope_b: f64,
}

impl EffectiveCuspAction {
    pub fn r1(&self, p: Point) -> f64 {
        p.dist(self.source)
    }

    pub fn r2(&self, p: Point) -> f64 {
        p.z - self.ghost_z
    }

    pub fn n_eff(&self, p: Point) -> f64 {
        self.n_ghost - self.slope_b * (p.z - self.ghost_z)
    }

    /// Effective action for ghost pole `m` of the quadratic channel.
    pub fn for_channel(n0: f64, alpha: f64, source: Point, m: i32) -> Self {
        let ghost_z = if m % 2 == 0 { source.z } else { -source.z };
        Self {
            source,
            ghost_z,
            mu: PI * m as f64 / (2.0 * alpha.sqrt()),
            n_ghost: (n0 * n0 - alpha * ghost_z * ghost_z).sqrt(),
            slope_b: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EinbeinAction {
    /// Point source at `source` with `n² = n0² − a z` (`a = 0` is the uniform medium).
    LinearProfile {
        n0: f64,
        a: f64,
        source: Point,
    },
    /// Line source at `z = 0` with quadratic phase `exp(−i k0 x²/(4μ))`, uniform `n0`.
    SimpleCusp {
        n0: f64,
        mu: f64,
    },
    /// Point source in `n² = n0² − α z²`; `m_max` bounds the reported ghost poles.
    QuadraticChannel {
        n0: f64,
        alpha: f64,
        source: Point,
        m_max: i32,
    },
    EffectiveCusp(EffectiveCuspAction),
}

/// One factor of the logarithmic prefactor, `power · ln q(Λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogFactor {
    /// `q = Λ − shift`
    Shifted(f64),
    /// `q = sin(w Λ)`
    Sine(f64),
}

impl LogFactor {
    pub fn value(&self, lambda: C64) -> C64 {
        match *self {
            LogFactor::Shifted(s) => lambda - s,
            LogFactor::Sine(w) => (lambda * w).sin(),
        }
    }

    /// `q'(Λ)/q(Λ)`.
    pub fn log_derivative(&self, lambda: C64) -> C64 {
        match *self {
            LogFactor::Shifted(s) => (lambda - s).inv(),
            LogFactor::Sine(w) => {
                let x = lambda * w;
                x.cos() / x.sin() * w
            }
        }
    }
}

/// `f(Λ) = constant + Σ power_k ln q_k(Λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogPrefactor {
    pub constant: C64,
    pub terms: Vec<(f64, LogFactor)>,
}

impl LogPrefactor {
    /// Evaluate with each logarithm on the branch `arg ∈ [−π, π)`, i.e. the
    /// negative real axis is reached from below.
    pub fn eval_lower(&self, lambda: C64) -> C64 {
        let mut v = self.constant;
        for (p, q) in &self.terms {
            v += ln_lower(q.value(lambda)) * *p;
        }
        v
    }

    pub fn derivative(&self, lambda: C64) -> C64 {
        self.terms
            .iter()
            .map(|(p, q)| q.log_derivative(lambda) * *p)
            .sum()
    }
}

/// Complex logarithm with `arg ∈ [−π, π)`.
pub fn ln_lower(w: C64) -> C64 {
    let mut arg = w.im.atan2(w.re);
    if arg >= PI {
        arg -= 2.0 * PI;
    }
    C64::new(w.norm().ln(), arg)
}

/// Finite pole of `S̄` with its residue at a given position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    /// Ghost-pole order `m` (0 for the source pole); `SimpleCusp` uses 1 for `Λ = μ`.
    pub index: i32,
    pub location: C64,
    pub residue: f64,
}

/// Zero set of a residue field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Locus {
    /// `z = const`
    Horizontal(f64),
    /// `x = const`
    Vertical(f64),
    Point(Point),
}

impl Locus {
    /// Closest point of the locus to `p`.
    pub fn foot(&self, p: Point) -> Point {
        match *self {
            Locus::Horizontal(z) => Point::new(p.x, z),
            Locus::Vertical(x) => Point::new(x, p.z),
            Locus::Point(q) => q,
        }
    }

    /// Codimension of the locus in the plane.
    pub fn codim(&self) -> usize {
        match self {
            Locus::Point(_) => 2,
            _ => 1,
        }
    }

    /// Residue `R = dist²/4` attached to this locus.
    pub fn residue(&self, p: Point) -> f64 {
        0.25 * p.dist(self.foot(p)).powi(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhostSource {
    pub index: i32,
    pub pole: C64,
    pub locus: Locus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalKind {
    Real,
    ComplexPair,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub lambda: C64,
    pub action_value: C64,
    pub second_derivative: C64,
    pub classification: CriticalKind,
    /// `|dS̄/dΛ|` at `lambda` after polishing.
    pub residual: f64,
}

/// Rectangle in the complex `Λ` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoints {
    pub points: Vec<CriticalPoint>,
    /// Set when the count or reality pattern differs from the model's expectation.
    pub warning: Option<String>,
}

impl EinbeinAction {
    /// Characteristic `Λ` scale used for tolerances.
    pub fn scale(&self) -> f64 {
        match *self {
            EinbeinAction::LinearProfile { n0, a, .. } => {
                if a == 0.0 {
                    1.0
                } else {
                    (n0 * n0 / a.abs()).max(1e-3)
                }
            }
            EinbeinAction::SimpleCusp { mu, .. } => mu.abs(),
            EinbeinAction::QuadraticChannel { alpha, .. } => PI / (2.0 * alpha.sqrt()),
            EinbeinAction::EffectiveCusp(e) => e.mu.abs(),
        }
    }

    fn pole_locations(&self) -> Vec<f64> {
        match *self {
            EinbeinAction::LinearProfile { .. } => vec![0.0],
            EinbeinAction::SimpleCusp { mu, .. } => vec![0.0, mu],
            EinbeinAction::EffectiveCusp(e) => vec![0.0, e.mu],
            EinbeinAction::QuadraticChannel { alpha, m_max, .. } => {
                let w = 2.0 * alpha.sqrt();
                (-m_max..=m_max).map(|m| PI * m as f64 / w).collect()
            }
        }
    }

    fn check_pole(&self, lambda: C64) -> Result<()> {
        let tol = 1e-12 * self.scale();
        let hit = match *self {
            EinbeinAction::QuadraticChannel { alpha, .. } => {
                let w = 2.0 * alpha.sqrt();
                let m = (lambda.re * w / PI).round();
                Some(m * PI / w).filter(|&mu| (lambda - mu).norm() < tol)
            }
            _ => self
                .pole_locations()
                .into_iter()
                .find(|&mu| (lambda - mu).norm() < tol),
        };
        match hit {
            Some(mu) => Err(Error::Singular {
                lambda: format!("{lambda}"),
                pole: format!("{mu}"),
                distance: (lambda - mu).norm(),
            }),
            None => Ok(()),
        }
    }

    /// `S̄(Λ; x)`.
    pub fn exact_action(&self, lambda: C64, p: Point) -> Result<C64> {
        self.check_pole(lambda)?;
        Ok(self.action_unchecked(lambda, p))
    }

    pub(crate) fn action_unchecked(&self, l: C64, p: Point) -> C64 {
        match *self {
            EinbeinAction::LinearProfile { n0, a, source } => {
                let r2 = (p.x - source.x).powi(2) + (p.z - source.z).powi(2);
                l.inv() * (0.25 * r2) + l * (n0 * n0 - 0.5 * a * (p.z + source.z))
                    - l.powi(3) * (a * a / 12.0)
            }
            EinbeinAction::SimpleCusp { n0, mu } => {
                (l - mu).inv() * (0.25 * p.x * p.x) + l.inv() * (0.25 * p.z * p.z) + l * (n0 * n0)
            }
            EinbeinAction::QuadraticChannel {
                n0, alpha, source, ..
            } => {
                let sa = alpha.sqrt();
                let w = 2.0 * sa;
                let theta = l * w;
                let zs = source.z;
                // (q cos θ − 2 zs z)/sin θ, rearranged to avoid cancellation as θ → 0
                let trig = theta.cos() / theta.sin() * (zs - p.z).powi(2)
                    - (theta * 0.5).tan() * (2.0 * zs * p.z);
                l.inv() * (0.25 * (p.x - source.x).powi(2)) + l * (n0 * n0) + trig * (0.5 * sa)
            }
            EinbeinAction::EffectiveCusp(e) => {
                let (r1, r2, ne) = (e.r1(p), e.r2(p), e.n_eff(p));
                l.inv() * (0.25 * r1 * r1) + (l - e.mu).inv() * (0.25 * r2 * r2) + l * (ne * ne)
            }
        }
    }

    /// Analytic `d S̄/dΛ` (`order = 1`) or `d² S̄/dΛ²` (`order = 2`).
    pub fn action_derivative(&self, lambda: C64, p: Point, order: u8) -> Result<C64> {
        self.check_pole(lambda)?;
        match order {
            1 => Ok(self.d1(lambda, p)),
            2 => Ok(self.d2(lambda, p)),
            _ => Err(Error::InvalidInput(format!(
                "derivative order {order} not in {{1, 2}}"
            ))),
        }
    }

    fn d1(&self, l: C64, p: Point) -> C64 {
        match *self {
            EinbeinAction::LinearProfile { n0, a, source } => {
                let r2 = (p.x - source.x).powi(2) + (p.z - source.z).powi(2);
                -(l * l).inv() * (0.25 * r2) + (n0 * n0 - 0.5 * a * (p.z + source.z))
                    - l * l * (a * a / 4.0)
            }
            EinbeinAction::SimpleCusp { n0, mu } => {
                -((l - mu) * (l - mu)).inv() * (0.25 * p.x * p.x)
                    - (l * l).inv() * (0.25 * p.z * p.z)
                    + n0 * n0
            }
            EinbeinAction::QuadraticChannel {
                n0, alpha, source, ..
            } => {
                let sa = alpha.sqrt();
                let w = 2.0 * sa;
                let theta = l * w;
                let csc = theta.sin().inv();
                let sec_half = (theta * 0.5).cos().inv();
                let zs = source.z;
                -(l * l).inv() * (0.25 * (p.x - source.x).powi(2)) + n0 * n0
                    - (csc * csc * (zs - p.z).powi(2) + sec_half * sec_half * (zs * p.z))
                        * (0.5 * sa * w)
            }
            EinbeinAction::EffectiveCusp(e) => {
                let (r1, r2, ne) = (e.r1(p), e.r2(p), e.n_eff(p));
                -(l * l).inv() * (0.25 * r1 * r1)
                    - ((l - e.mu) * (l - e.mu)).inv() * (0.25 * r2 * r2)
                    + ne * ne
            }
        }
    }

    fn d2(&self, l: C64, p: Point) -> C64 {
        match *self {
            EinbeinAction::LinearProfile { a, source, .. } => {
                let r2 = (p.x - source.x).powi(2) + (p.z - source.z).powi(2);
                l.powi(3).inv() * (0.5 * r2) - l * (a * a / 2.0)
            }
            EinbeinAction::SimpleCusp { mu, .. } => {
                (l - mu).powi(3).inv() * (0.5 * p.x * p.x) + l.powi(3).inv() * (0.5 * p.z * p.z)
            }
            EinbeinAction::QuadraticChannel { alpha, source, .. } => {
                let sa = alpha.sqrt();
                let w = 2.0 * sa;
                let theta = l * w;
                let csc = theta.sin().inv();
                let cot = theta.cos() * csc;
                let sec_half = (theta * 0.5).cos().inv();
                let tan_half = (theta * 0.5).tan();
                let zs = source.z;
                l.powi(3).inv() * (0.5 * (p.x - source.x).powi(2))
                    + (csc * csc * cot * (2.0 * (zs - p.z).powi(2))
                        - sec_half * sec_half * tan_half * (zs * p.z))
                        * (0.5 * sa * w * w)
            }
            EinbeinAction::EffectiveCusp(e) => {
                let (r1, r2) = (e.r1(p), e.r2(p));
                l.powi(3).inv() * (0.5 * r1 * r1) + (l - e.mu).powi(3).inv() * (0.5 * r2 * r2)
            }
        }
    }

    /// Logarithmic prefactor `f(Λ)` of `Ψ = exp(i k0 S̄ + f)`.
    ///
    /// Point sources are normalised so that the uniform-medium field is
    /// `(i/4) H0⁽¹⁾(k0 n0 r)`. The effective cusp action carries none.
    pub fn log_prefactor(&self, k0: f64) -> LogPrefactor {
        let four_pi_ln = (4.0 * PI).ln();
        match *self {
            EinbeinAction::LinearProfile { .. } => LogPrefactor {
                constant: C64::new(-four_pi_ln, 0.0),
                terms: vec![(-1.0, LogFactor::Shifted(0.0))],
            },
            EinbeinAction::SimpleCusp { mu, .. } => LogPrefactor {
                constant: (I * mu / (4.0 * PI * k0)).ln() * 0.5,
                terms: vec![
                    (-0.5, LogFactor::Shifted(0.0)),
                    (-0.5, LogFactor::Shifted(mu)),
                ],
            },
            EinbeinAction::QuadraticChannel { alpha, .. } => {
                let w = 2.0 * alpha.sqrt();
                LogPrefactor {
                    constant: C64::new(-four_pi_ln + 0.5 * w.ln(), 0.0),
                    terms: vec![(-0.5, LogFactor::Shifted(0.0)), (-0.5, LogFactor::Sine(w))],
                }
            }
            EinbeinAction::EffectiveCusp(_) => LogPrefactor {
                constant: C64::new(0.0, 0.0),
                terms: vec![],
            },
        }
    }

    /// `Ψ = exp(i k0 S̄ + f)` with `f` on the lower branch.
    pub fn psi(&self, lambda: C64, p: Point, k0: f64) -> Result<C64> {
        let s = self.exact_action(lambda, p)?;
        Ok((I * k0 * s + self.log_prefactor(k0).eval_lower(lambda)).exp())
    }

    /// Finite poles and their residues at `p`.
    pub fn poles_and_residues(&self, p: Point) -> Vec<Pole> {
        match *self {
            EinbeinAction::LinearProfile { source, .. } => vec![Pole {
                index: 0,
                location: C64::new(0.0, 0.0),
                residue: Locus::Point(source).residue(p),
            }],
            EinbeinAction::SimpleCusp { mu, .. } => vec![
                Pole {
                    index: 0,
                    location: C64::new(0.0, 0.0),
                    residue: 0.25 * p.z * p.z,
                },
                Pole {
                    index: 1,
                    location: C64::new(mu, 0.0),
                    residue: 0.25 * p.x * p.x,
                },
            ],
            EinbeinAction::EffectiveCusp(e) => vec![
                Pole {
                    index: 0,
                    location: C64::new(0.0, 0.0),
                    residue: 0.25 * e.r1(p).powi(2),
                },
                Pole {
                    index: 1,
                    location: C64::new(e.mu, 0.0),
                    residue: 0.25 * e.r2(p).powi(2),
                },
            ],
            EinbeinAction::QuadraticChannel {
                alpha,
                source,
                m_max,
                ..
            } => {
                let w = 2.0 * alpha.sqrt();
                (-m_max..=m_max)
                    .map(|m| {
                        let residue = if m == 0 {
                            Locus::Point(source).residue(p)
                        } else {
                            let zg = if m % 2 == 0 { source.z } else { -source.z };
                            0.25 * (p.z - zg).powi(2)
                        };
                        Pole {
                            index: m,
                            location: C64::new(PI * m as f64 / w, 0.0),
                            residue,
                        }
                    })
                    .collect()
            }
        }
    }

    /// Loci of vanishing residue for the ghost poles (source pole excluded).
    pub fn ghost_sources(&self) -> Vec<GhostSource> {
        match *self {
            EinbeinAction::LinearProfile { .. } => vec![],
            EinbeinAction::SimpleCusp { mu, .. } => vec![GhostSource {
                index: 1,
                pole: C64::new(mu, 0.0),
                locus: Locus::Vertical(0.0),
            }],
            EinbeinAction::EffectiveCusp(e) => vec![GhostSource {
                index: 1,
                pole: C64::new(e.mu, 0.0),
                locus: Locus::Horizontal(e.ghost_z),
            }],
            EinbeinAction::QuadraticChannel {
                alpha,
                source,
                m_max,
                ..
            } => {
                let w = 2.0 * alpha.sqrt();
                (1..=m_max)
                    .map(|m| GhostSource {
                        index: m,
                        pole: C64::new(PI * m as f64 / w, 0.0),
                        locus: Locus::Horizontal(if m % 2 == 0 { source.z } else { -source.z }),
                    })
                    .collect()
            }
        }
    }

    /// Cusp positions predicted by the single-ghost-pole construction.
    pub fn predict_cusps(&self) -> Vec<Point> {
        match *self {
            EinbeinAction::LinearProfile { .. } => vec![],
            EinbeinAction::SimpleCusp { n0, mu } => {
                vec![
                    Point::new(0.0, 2.0 * n0 * mu),
                    Point::new(0.0, -2.0 * n0 * mu),
                ]
            }
            EinbeinAction::EffectiveCusp(e) => effective_cusps(&e),
            EinbeinAction::QuadraticChannel {
                n0,
                alpha,
                source,
                m_max,
            } => (1..=m_max)
                .flat_map(|m| {
                    effective_cusps(&EffectiveCuspAction::for_channel(n0, alpha, source, m))
                })
                .collect(),
        }
    }

    /// Number of critical points the model has in the whole `Λ` plane, when known.
    fn expected_critical_count(&self) -> Option<usize> {
        match self {
            EinbeinAction::SimpleCusp { .. } => Some(4),
            _ => None,
        }
    }

    /// A search rectangle containing the physically relevant critical points.
    pub fn default_region(&self, p: Point) -> Rect {
        match *self {
            EinbeinAction::LinearProfile { n0, a, source } => {
                let r = p.dist(source);
                let mut l = 2.0 * r / n0 + 1.0;
                if a != 0.0 {
                    l += 4.0 * n0 / a.abs();
                }
                Rect {
                    re_min: 1e-9 * l,
                    re_max: l,
                    im_min: -l,
                    im_max: l,
                }
            }
            EinbeinAction::SimpleCusp { n0, mu } => {
                let l = mu.abs() + (p.x.abs() + p.z.abs()) / n0 + 1.0;
                Rect {
                    re_min: -l,
                    re_max: mu.abs() + l,
                    im_min: -l,
                    im_max: l,
                }
            }
            EinbeinAction::EffectiveCusp(e) => {
                let l = e.mu.abs() + (e.r1(p) + e.r2(p).abs()) / e.n_ghost + 1.0;
                Rect {
                    re_min: -l,
                    re_max: e.mu.abs() + l,
                    im_min: -l,
                    im_max: l,
                }
            }
            EinbeinAction::QuadraticChannel { alpha, m_max, .. } => {
                let step = PI / (2.0 * alpha.sqrt());
                Rect {
                    re_min: 1e-9 * step,
                    re_max: step * m_max as f64,
                    im_min: -step,
                    im_max: step,
                }
            }
        }
    }

    /// All roots of `dS̄/dΛ` in `region`, by Newton iteration from a seed grid.
    pub fn find_critical_points(&self, p: Point, region: Rect) -> CriticalPoints {
        let scale = self.scale();
        let poles = self.pole_locations();
        let mut spacing = f64::INFINITY;
        for (i, a) in poles.iter().enumerate() {
            for b in &poles[i + 1..] {
                spacing = spacing.min((a - b).abs());
            }
        }
        let width = (region.re_max - region.re_min).max(region.im_max - region.im_min);
        let pitch = if spacing.is_finite() {
            (spacing / 8.0).min(width / 16.0)
        } else {
            width / 40.0
        };
        let nx = ((region.re_max - region.re_min) / pitch).ceil().max(1.0) as usize;
        let ny = ((region.im_max - region.im_min) / pitch).ceil().max(1.0) as usize;
        let near_pole = |l: C64| poles.iter().any(|&mu| (l - mu).norm() < 1e-6 * scale);

        let mut seeds = Vec::with_capacity((nx + 1) * (ny + 1));
        for i in 0..=nx {
            for j in 0..=ny {
                seeds.push(C64::new(
                    region.re_min + (i as f64 + 0.5) * pitch,
                    region.im_min + (j as f64 + 0.5) * pitch,
                ));
            }
        }
        // roots can crowd a pole far more closely than the grid pitch
        for &mu in &poles {
            let mut r = 1e-4 * scale;
            while r < 2.0 * pitch {
                for k in 0..12 {
                    seeds.push(C64::new(mu, 0.0) + C64::from_polar(r, (k as f64 + 0.5) * PI / 6.0));
                }
                r *= 2.0;
            }
        }

        let mut found: Vec<C64> = Vec::new();
        for seed in seeds {
            {
                if near_pole(seed) {
                    continue;
                }
                let Some(root) = self.newton(seed, p, 4.0 * pitch, &poles) else {
                    continue;
                };
                if !region.contains(root) || near_pole(root) {
                    continue;
                }
                if found
                    .iter()
                    .all(|r| (r - root).norm() > 1e-9 * scale.max(root.norm()))
                {
                    found.push(root);
                }
            }
        }
        found.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

        let points: Vec<CriticalPoint> = found
            .into_iter()
            .map(|l| {
                let real = l.im.abs() <= 1e-9 * scale.max(l.norm());
                let l = if real { C64::new(l.re, 0.0) } else { l };
                let l = if real { self.polish_real(l.re, p) } else { l };
                CriticalPoint {
                    lambda: l,
                    action_value: self.action_unchecked(l, p),
                    second_derivative: self.d2(l, p),
                    classification: if real {
                        CriticalKind::Real
                    } else {
                        CriticalKind::ComplexPair
                    },
                    residual: self.d1(l, p).norm(),
                }
            })
            .collect();

        let warning = self.expected_critical_count().and_then(|n| {
            (points.len() != n).then(|| {
                format!(
                    "found {} critical points, model has {n} in the full plane",
                    points.len()
                )
            })
        });
        CriticalPoints { points, warning }
    }

    fn newton(&self, seed: C64, p: Point, max_step: f64, poles: &[f64]) -> Option<C64> {
        let mut l = seed;
        for _ in 0..100 {
            let g = self.d1(l, p);
            let dg = self.d2(l, p);
            if !(g.re.is_finite() && g.im.is_finite()) || dg.norm() == 0.0 {
                return None;
            }
            let mut step = g / dg;
            let pole_gap = poles
                .iter()
                .map(|&mu| (l - mu).norm())
                .fold(f64::INFINITY, f64::min);
            let cap = max_step.min(0.5 * pole_gap);
            if step.norm() > cap {
                step *= cap / step.norm();
            }
            l -= step;
            if step.norm() <= 1e-15 * l.norm().max(self.scale()) {
                // one extra step to settle rounding
                let g = self.d1(l, p);
                let dg = self.d2(l, p);
                if dg.norm() > 0.0 {
                    l -= g / dg;
                }
                return Some(l);
            }
        }
        None
    }

    /// Newton on the real axis; keeps the root exactly real.
    fn polish_real(&self, x: f64, p: Point) -> C64 {
        let mut l = C64::new(x, 0.0);
        for _ in 0..5 {
            let g = self.d1(l, p);
            let dg = self.d2(l, p);
            if dg.norm() == 0.0 {
                break;
            }
            let next = C64::new(l.re - (g / dg).re, 0.0);
            if self.d1(next, p).norm() >= g.norm() {
                break;
            }
            l = next;
        }
        l
    }
}

fn effective_cusps(e: &EffectiveCuspAction) -> Vec<Point> {
    let d = 2.0 * e.n_ghost * e.mu.abs();
    let dz = e.ghost_z - e.source.z;
    if d <= dz.abs() {
        return vec![];
    }
    let dx = (d * d - dz * dz).sqrt();
    vec![
        Point::new(e.source.x + dx, e.ghost_z),
        Point::new(e.source.x - dx, e.ghost_z),
    ]
}

/// Sampled caustic of an effective cusp action in `(r1, r2)` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveCaustic {
    /// `(r1, r2)` pairs ordered by `r2`.
    pub points: Vec<(f64, f64)>,
    /// `r2` samples for which the curve has no solution.
    pub gaps: Vec<f64>,
}

impl EffectiveCaustic {
    /// Map the curve into the plane, taking the branch `x ≥ source.x`.
    pub fn to_plane(&self, e: &EffectiveCuspAction) -> Vec<Point> {
        self.points
            .iter()
            .filter_map(|&(r1, r2)| {
                let z = e.ghost_z + r2;
                let dz = z - e.source.z;
                (r1 >= dz.abs()).then(|| Point::new(e.source.x + (r1 * r1 - dz * dz).sqrt(), z))
            })
            .collect()
    }
}

/// Deformed astroid corner `r1^{2/3} + |r2|^{2/3} = (2 n_eff μ)^{2/3}`, with
/// `n_eff = n_ghost − B r2`, sampled uniformly in `r2 ∈ [−2 n_ghost μ, 2 n_ghost μ]`.
pub fn caustic_curve_from_effective(
    e: &EffectiveCuspAction,
    samples: usize,
) -> Result<EffectiveCaustic> {
    if samples < 2 {
        return Err(Error::InvalidInput(
            "caustic curve needs at least 2 samples".into(),
        ));
    }
    let omega0 = 2.0 * e.n_ghost * e.mu.abs();
    let mut points = Vec::with_capacity(samples);
    let mut gaps = Vec::new();
    for k in 0..samples {
        let r2 = -omega0 + 2.0 * omega0 * k as f64 / (samples - 1) as f64;
        let omega = 2.0 * (e.n_ghost - e.slope_b * r2) * e.mu.abs();
        let rhs = if omega > 0.0 {
            omega.powf(2.0 / 3.0) - r2.abs().powf(2.0 / 3.0)
        } else {
            -1.0
        };
        if rhs < 0.0 {
            gaps.push(r2);
        } else {
            points.push((rhs.powf(1.5), r2));
        }
    }
    Ok(EffectiveCaustic { points, gaps })
}

/// Linear-in-`Λ` Laurent coefficient `γ₁` at `p` for a ghost locus, with `γ₀`
/// constant: the average of `n²` along the segment from the locus foot-point.
pub fn laurent_gamma1(profile: &ProfileModel, locus: &Locus, p: Point) -> Result<C64> {
    let foot = locus.foot(p);
    let len = p.dist(foot);
    if len == 0.0 {
        return Err(Error::InvalidInput("point lies on the ghost locus".into()));
    }
    let (ux, uz) = ((p.x - foot.x) / len, (p.z - foot.z) / len);
    let (v, _) = integrate_real(
        |s| profile.eval_n_squared(Point::new(foot.x + s * ux, foot.z + s * uz)),
        0.0,
        len,
        QuadOptions {
            abs_tol: 1e-14,
            rel_tol: 1e-13,
            max_intervals: 5000,
        },
    )?;
    Ok(C64::new(v / len, 0.0))
}

/// Residuals `(|−(∇γ)² + γ|, |∇²γ − D/2|)` of the leading Laurent equations,
/// with derivatives from fourth-order central differences.
pub fn residue_pde_residuals<F>(residue: F, p: Point, codim: usize) -> (f64, f64)
where
    F: Fn(Point) -> f64,
{
    let h = 1e-3 * p.x.abs().max(p.z.abs()).max(1.0);
    let d1 =
        |f: &dyn Fn(f64) -> f64| (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h);
    let d2 = |f: &dyn Fn(f64) -> f64| {
        (-f(-2.0 * h) + 16.0 * f(-h) - 30.0 * f(0.0) + 16.0 * f(h) - f(2.0 * h)) / (12.0 * h * h)
    };
    let fx = |t: f64| residue(Point::new(p.x + t, p.z));
    let fz = |t: f64| residue(Point::new(p.x, p.z + t));
    let gx = d1(&fx);
    let gz = d1(&fz);
    let lap = d2(&fx) + d2(&fz);
    let g = residue(p);
    (
        (-(gx * gx + gz * gz) + g).abs(),
        (lap - codim as f64 / 2.0).abs(),
    )
}
