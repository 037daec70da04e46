//! Subcommand pipelines: config in, CSV files out.
//!
//! Every CSV starts with a `# schema=<name>/v1` line followed by the column
//! header. Numbers are written in Rust's shortest round-trip form, so the same
//! config always produces the same bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::config::{Config, ConfigError};
use crate::contour::{assemble_contour, field, pearcey, FieldMethod};
use crate::dirichlet::{
    degeneration_image, endpoint_spread_scan, find_ghost_poles, CollapseType, ScanResult,
};
use crate::einbein::EinbeinAction;
use crate::perturbation::{pole_response, Boundary};
use crate::profiles::{PerturbationField, PerturbationKind, ProfileKind, ProfileModel};
use crate::raytrace::{extract_caustics, launch_fan, linspace, Fan, Launch};
use crate::{Error, Point};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid config: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numerical(#[from] Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    /// Process exit status: 2 for bad input, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            _ => 1,
        }
    }
}

type RunResult<T> = std::result::Result<T, RunError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    RayFan,
    DirichletScan,
    GhostPoles,
    Field,
    Pearcey,
    CuspPredict,
    Perturb,
}

impl Subcommand {
    pub const ALL: [Subcommand; 7] = [
        Subcommand::RayFan,
        Subcommand::DirichletScan,
        Subcommand::GhostPoles,
        Subcommand::Field,
        Subcommand::Pearcey,
        Subcommand::CuspPredict,
        Subcommand::Perturb,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Subcommand::RayFan => "rayfan",
            Subcommand::DirichletScan => "dirichlet-scan",
            Subcommand::GhostPoles => "ghost-poles",
            Subcommand::Field => "field",
            Subcommand::Pearcey => "pearcey",
            Subcommand::CuspPredict => "cusp-predict",
            Subcommand::Perturb => "perturb",
        }
    }
}

impl FromStr for Subcommand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown subcommand `{s}`"))
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `[output] dir`.
    pub out_dir: Option<PathBuf>,
    /// `pearcey`: write the bare `|P|` grid instead of the cusp comparison.
    pub grid: bool,
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    /// Human-readable result lines.
    pub summary: Vec<String>,
}

// --- CSV ---------------------------------------------------------------------

struct Table {
    schema: &'static str,
    text: String,
}

impl Table {
    fn new(schema: &'static str, columns: &[&str]) -> Self {
        let mut text = format!("# schema={schema}/v1\n");
        text.push_str(&columns.join(","));
        text.push('\n');
        Self { schema, text }
    }

    fn row(&mut self, cells: &[Cell]) {
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            match c {
                Cell::Num(v) if v.is_nan() => self.text.push_str("nan"),
                Cell::Num(v) if *v == 0.0 || (1e-5..1e15).contains(&v.abs()) => {
                    write!(self.text, "{v}").unwrap()
                }
                Cell::Num(v) => write!(self.text, "{v:e}").unwrap(),
                Cell::Int(v) => write!(self.text, "{v}").unwrap(),
                Cell::Text(s) => self.text.push_str(s),
            }
        }
        self.text.push('\n');
    }
}

enum Cell<'a> {
    Num(f64),
    Int(i64),
    Text(&'a str),
}

use Cell::{Int, Num, Text};

struct Output {
    dir: PathBuf,
    svg: bool,
    report: RunReport,
}

impl Output {
    fn write(&mut self, name: &str, contents: &str) -> RunResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
        self.report.files.push(path);
        Ok(())
    }

    fn table(&mut self, table: Table) -> RunResult<()> {
        let name = format!("{}.csv", table.schema);
        self.write(&name, &table.text)
    }

    fn note(&mut self, line: String) {
        self.report.summary.push(line);
    }
}

// --- config sections -----------------------------------------------------------

const MODELS: [&str; 5] = ["constant", "linear", "channel", "munk", "perturbed-channel"];

fn profile_from(cfg: &Config) -> RunResult<ProfileModel> {
    let s = "profile";
    let model = cfg.choice(s, "model", &MODELS)?;
    let profile = match model.as_str() {
        "constant" => ProfileModel::constant(cfg.positive(s, "n0")?),
        "linear" => ProfileModel::linear(cfg.positive(s, "n0")?, cfg.require(s, "a")?),
        "channel" => ProfileModel::channel(cfg.positive(s, "n0")?, cfg.positive(s, "alpha")?),
        "munk" => ProfileModel::munk(cfg.positive(s, "epsilon")?, cfg.positive(s, "z_c")?),
        _ => ProfileModel::perturbed_channel(
            cfg.positive(s, "n0")?,
            cfg.positive(s, "alpha")?,
            cfg.require(s, "sigma")?,
            cfg.require(s, "rho")?,
            cfg.require(s, "z_axis")?,
        ),
    };
    Ok(profile)
}

#[derive(Debug, Clone, Copy)]
enum Source {
    Point(Point),
    /// Line source at `z = 0` with quadratic phase focusing at `2 n0 μ`.
    Line {
        mu: f64,
    },
}

fn source_from(cfg: &Config) -> RunResult<Source> {
    let s = "source";
    let kind = if cfg.has(s, "kind") {
        cfg.choice(s, "kind", &["point", "line"])?
    } else {
        "point".to_string()
    };
    if kind == "line" {
        return Ok(Source::Line {
            mu: cfg.positive(s, "mu")?,
        });
    }
    Ok(Source::Point(Point::new(
        cfg.or(s, "x", 0.0)?,
        cfg.require(s, "z")?,
    )))
}

fn point_source(cfg: &Config) -> RunResult<Point> {
    match source_from(cfg)? {
        Source::Point(p) => Ok(p),
        Source::Line { .. } => Err(cfg
            .error("source", "kind", "this subcommand needs a point source")
            .into()),
    }
}

fn base_n0(cfg: &Config, profile: &ProfileModel) -> RunResult<f64> {
    match profile.kind {
        ProfileKind::Constant { n0 } => Ok(n0),
        _ => Err(cfg
            .error("profile", "model", "a line source needs the constant model")
            .into()),
    }
}

/// Exact einbein action for the configured model and source.
fn action_from(cfg: &Config, profile: &ProfileModel, m_max: i32) -> RunResult<EinbeinAction> {
    let source = source_from(cfg)?;
    let action = match (source, profile.kind) {
        (Source::Line { mu }, _) => EinbeinAction::SimpleCusp {
            n0: base_n0(cfg, profile)?,
            mu,
        },
        (Source::Point(source), ProfileKind::Constant { n0 }) => {
            EinbeinAction::LinearProfile { n0, a: 0.0, source }
        }
        (Source::Point(source), ProfileKind::LinearSquared { n0, a }) => {
            EinbeinAction::LinearProfile { n0, a, source }
        }
        (Source::Point(source), ProfileKind::QuadraticChannel { n0, alpha }) => {
            EinbeinAction::QuadraticChannel {
                n0,
                alpha,
                source,
                m_max,
            }
        }
        _ => {
            return Err(cfg
                .error("profile", "model", "no exact einbein action for this model")
                .into())
        }
    };
    Ok(action)
}

fn scan_from(cfg: &Config, profile: &ProfileModel) -> RunResult<ScanResult> {
    let s = "scan";
    let (l_lo, l_hi) = cfg.range(s, "lambda")?;
    let lambdas = linspace(l_lo, l_hi, cfg.count(s, "lambda_count", 3)?);
    let (v_lo, v_hi) = cfg.range(s, "v0")?;
    let v0 = linspace(v_lo, v_hi, cfg.count(s, "v0_count", 2)?);
    let z0 = match cfg.optional(s, "z0")? {
        Some(z) => z,
        None => point_source(cfg)?.z,
    };
    Ok(endpoint_spread_scan(profile, &lambdas, z0, &v0)?)
}

// --- pipelines -------------------------------------------------------------------

fn svg_polylines(lines: &[Vec<Point>], marks: &[Point]) -> String {
    let all = lines.iter().flatten().chain(marks);
    let (mut x0, mut x1, mut z0, mut z1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for p in all {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        z0 = z0.min(p.z);
        z1 = z1.max(p.z);
    }
    let (w, h) = ((x1 - x0).max(1e-12), (z1 - z0).max(1e-12));
    let map = |p: &Point| (1000.0 * (p.x - x0) / w, 600.0 * (p.z - z0) / h);
    let mut out = String::from(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1000\" height=\"600\" viewBox=\"0 0 1000 600\">\n",
    );
    for line in lines {
        out.push_str("<polyline fill=\"none\" stroke=\"black\" stroke-width=\"0.3\" points=\"");
        for p in line {
            let (x, y) = map(p);
            write!(out, "{x:.2},{y:.2} ").unwrap();
        }
        out.push_str("\"/>\n");
    }
    for p in marks {
        let (x, y) = map(p);
        writeln!(
            out,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"red\"/>"
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

fn rayfan(cfg: &Config, out: &mut Output) -> RunResult<()> {
    let profile = profile_from(cfg)?;
    let s = "rays";
    let count = cfg.count(s, "count", 3)?;
    let s_max = cfg.positive(s, "s_max")?;
    let ds = cfg.positive(s, "ds")?;
    let launches = match source_from(cfg)? {
        Source::Point(src) => {
            let (lo, hi) = cfg.range(s, "angle")?;
            linspace(lo, hi, count)
                .into_iter()
                .map(|a| Launch::point_source(&profile, src, a))
                .collect::<crate::Result<Vec<_>>>()?
        }
        Source::Line { mu } => {
            let n0 = base_n0(cfg, &profile)?;
            let (lo, hi) = cfg.range(s, "x")?;
            linspace(lo, hi, count)
                .into_iter()
                .map(|x| Launch::quadratic_phase_line(n0, mu, x))
                .collect::<crate::Result<Vec<_>>>()?
        }
    };
    let fan: Fan = launch_fan(&profile, &launches, s_max, ds)?;
    let caustics = extract_caustics(&profile, &fan)?;

    let mut rays = Table::new("rays", &["ray_id", "s", "x", "z", "px", "pz", "jac"]);
    for (id, ray) in fan.rays.iter().enumerate() {
        for q in &ray.samples {
            rays.row(&[
                Int(id as i64),
                Num(q.s),
                Num(q.position.x),
                Num(q.position.z),
                Num(q.momentum[0]),
                Num(q.momentum[1]),
                Num(q.jacobian),
            ]);
        }
    }
    let mut table = Table::new("caustics", &["x", "z", "kind"]);
    for f in &caustics.fold_points {
        table.row(&[Num(f.position.x), Num(f.position.z), Text("fold")]);
    }
    for c in &caustics.cusp_points {
        table.row(&[Num(c.x), Num(c.z), Text("cusp")]);
    }
    for c in &caustics.self_intersections {
        table.row(&[Num(c.x), Num(c.z), Text("crossing")]);
    }
    out.table(rays)?;
    out.table(table)?;
    if out.svg {
        let mut lines: Vec<Vec<Point>> = fan
            .rays
            .iter()
            .map(|r| r.samples.iter().map(|q| q.position).collect())
            .collect();
        lines.extend(caustics.fold_curves.iter().cloned());
        out.write("rayfan.svg", &svg_polylines(&lines, &caustics.cusp_points))?;
    }
    out.note(format!(
        "{} rays, {} fold points, {} cusps, {} crossings",
        fan.rays.len(),
        caustics.fold_points.len(),
        caustics.cusp_points.len(),
        caustics.self_intersections.len()
    ));
    for c in &caustics.cusp_points {
        out.note(format!("cusp at x = {:.6}, z = {:.6}", c.x, c.z));
    }
    Ok(())
}

fn scan_table(scan: &ScanResult) -> Table {
    let mut t = Table::new("scan", &["lambda", "spread", "n_divergent", "z_common"]);
    for i in 0..scan.lambda_grid.len() {
        t.row(&[
            Num(scan.lambda_grid[i]),
            Num(scan.spread[i]),
            Int(scan.n_divergent[i] as i64),
            Num(scan.z_common[i].unwrap_or(f64::NAN)),
        ]);
    }
    t
}

/// One branch per launch velocity; divergent endpoints are skipped.
fn branches_table(scan: &ScanResult) -> Table {
    let mut t = Table::new("branches", &["lambda", "z_endpoint", "branch_id"]);
    for (l, row) in scan.lambda_grid.iter().zip(&scan.endpoints) {
        for (id, z) in row.iter().enumerate() {
            if let Some(z) = z {
                t.row(&[Num(*l), Num(*z), Int(id as i64)]);
            }
        }
    }
    t
}

fn dirichlet_scan(cfg: &Config, out: &mut Output) -> RunResult<()> {
    let profile = profile_from(cfg)?;
    let scan = scan_from(cfg, &profile)?;
    out.table(scan_table(&scan))?;
    out.table(branches_table(&scan))?;
    let (i, s) = scan
        .spread
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.is_nan())
        .fold(
            (0, f64::INFINITY),
            |a, (i, &s)| if s < a.1 { (i, s) } else { a },
        );
    out.note(format!(
        "{} grid points; smallest spread {s:e} at lambda = {}",
        scan.lambda_grid.len(),
        scan.lambda_grid[i]
    ));
    Ok(())
}

fn collapse_label(c: CollapseType) -> &'static str {
    match c {
        CollapseType::Complete => "complete",
        CollapseType::Partial => "partial",
    }
}

fn ghost_poles(cfg: &Config, out: &mut Output) -> RunResult<()> {
    let profile = profile_from(cfg)?;
    let scan = scan_from(cfg, &profile)?;
    let tol = cfg.or("scan", "tolerance", scan.default_tolerance())?;
    let poles = find_ghost_poles(&profile, &scan, tol)?;
    let mut t = Table::new("ghost_poles", &["lambda", "z_ghost", "spread", "collapse"]);
    for p in &poles {
        t.row(&[
            Num(p.lambda_p),
            Num(p.z_ghost),
            Num(p.spread),
            Text(collapse_label(p.collapse_type)),
        ]);
        out.note(format!(
            "{} collapse at lambda = {:.10}, z = {:.10} (spread {:e})",
            collapse_label(p.collapse_type),
            p.lambda_p,
            p.z_ghost,
            p.spread
        ));
    }
    out.table(scan_table(&scan))?;
    out.table(t)?;
    Ok(())
}

fn field_cmd(cfg: &Config, out: &mut Output) -> RunResult<()> {
    let profile = profile_from(cfg)?;
    let s = "field";
    let action = action_from(cfg, &profile, cfg.or(s, "m_max", 2)?)?;
    let k0 = cfg.positive(s, "k0")?;
    let method = match cfg.or(s, "method", "contour".to_string())?.as_str() {
        "contour" => FieldMethod::Contour,
        "real-axis" => FieldMethod::RealAxis,
        "pearcey" => FieldMethod::Pearcey,
        other => {
            return Err(cfg
                .error(
                    s,
                    "method",
                    format!("unknown value `{other}`; expected contour, real-axis or pearcey"),
                )
                .into())
        }
    };
    let (x_lo, x_hi) = cfg.range(s, "x")?;
    let (z_lo, z_hi) = cfg.range(s, "z")?;
    let xs = linspace(x_lo, x_hi, cfg.count(s, "nx", 1)?);
    let zs = linspace(z_lo, z_hi, cfg.count(s, "nz", 1)?);
    let points: Vec<Point> = zs
        .iter()
        .flat_map(|&z| xs.iter().map(move |&x| Point::new(x, z)))
        .collect();
    let values = points
        .par_iter()
        .map(|&p| field(&action, p, k0, method).map(|f| f.value))
        .collect::<crate::Result<Vec<_>>>()?;
    let mut t = Table::new("field", &["x", "z", "re", "im", "abs"]);
    for (p, v) in points.iter().zip(&values) {
        t.row(&[Num(p.x), Num(p.z), Num(v.re), Num(v.im), Num(v.norm())]);
    }
    out.table(t)?;
    out.note(format!("{} field points at k0 = {k0}", points.len()));

    if cfg.has(s, "probe_x") || cfg.has(s, "probe_z") {
        let probe = Point::new(cfg.require(s, "probe_x")?, cfg.require(s, "probe_z")?);
        let assembled = assemble_contour(&action, probe, k0)?;
        let mut c = Table::new(
            "contour",
            &["segment_id", "t", "re_lambda", "im_lambda", "re_S", "im_S"],
        );
        for (id, seg) in assembled.segments.iter().enumerate() {
            for (t_idx, (l, h)) in seg.samples.iter().enumerate() {
                // h = i k0 S̄
                let action_value = *h / num_complex::Complex64::new(0.0, k0);
                c.row(&[
                    Int(id as i64),
                    Int(t_idx as i64),
                    Num(l.re),
                    Num(l.im),
                    Num(action_value.re),
                    Num(action_value.im),
                ]);
            }
        }
        out.table(c)?;
        out.note(format!(
            "probe ({}, {}): {} segments, assembly error {:e}",
            probe.x,
            probe.z,
            assembled.segments.len(),
            assembled.relative_error
        ));
    }
    Ok(())
}

fn pearcey_cmd(cfg: &Config, grid: bool, out: &mut Output) -> RunResult<()> {
    let s = "pearcey";
    let count = cfg.count(s, "count", 2)?;
    if grid {
        let (a_lo, a_hi) = cfg.range(s, "zeta2")?;
        let (b_lo, b_hi) = cfg.range(s, "zeta1")?;
        let z2s = linspace(a_lo, a_hi, count);
        let z1s = linspace(b_lo, b_hi, count);
        let args: Vec<(f64, f64)> = z2s
            .iter()
            .flat_map(|&a| z1s.iter().map(move |&b| (a, b)))
            .collect();
        let values = args
            .par_iter()
            .map(|&(a, b)| pearcey(a, b))
            .collect::<crate::Result<Vec<_>>>()?;
        let mut t = Table::new("pearcey", &["zeta2", "zeta1", "re", "im", "abs"]);
        for ((a, b), v) in args.iter().zip(&values) {
            t.row(&[Num(*a), Num(*b), Num(v.re), Num(v.im), Num(v.norm())]);
        }
        out.table(t)?;
        out.note(format!("{} Pearcey values", args.len()));
        return Ok(());
    }
    // uniform against direct field around the line-source cusp
    let profile = profile_from(cfg)?;
    let action = action_from(cfg, &profile, 0)?;
    let EinbeinAction::SimpleCusp { n0, mu } = action else {
        return Err(cfg
            .error("source", "kind", "the cusp comparison needs a line source")
            .into());
    };
    let k0 = cfg.positive(s, "k0")?;
    let extent = cfg.positive(s, "extent")?;
    let zetas = linspace(-extent, extent, count);
    let omega = 2.0 * n0 * mu;
    let points: Vec<(f64, f64, Point)> = zetas
        .iter()
        .flat_map(|&a| {
            zetas.iter().map(move |&b| {
                let z = omega + a * (mu / k0).sqrt();
                let x = b / ((k0 / mu).powf(0.75) * omega.sqrt());
                (a, b, Point::new(x, z))
            })
        })
        .collect();
    let rows = points
        .par_iter()
        .map(|&(_, _, p)| {
            let u = field(&action, p, k0, FieldMethod::Pearcey)?.value;
            let d = field(&action, p, k0, FieldMethod::Contour)?.value;
            Ok((u, d))
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let mut t = Table::new(
        "pearcey_field",
        &["zeta2", "zeta1", "x", "z", "abs_uniform", "abs_contour"],
    );
    let peak = rows.iter().map(|r| r.1.norm()).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for ((a, b, p), (u, d)) in points.iter().zip(&rows) {
        t.row(&[
            Num(*a),
            Num(*b),
            Num(p.x),
            Num(p.z),
            Num(u.norm()),
            Num(d.norm()),
        ]);
        worst = worst.max((u.norm() - d.norm()).abs() / peak);
    }
    out.table(t)?;
    out.note(format!(
        "uniform vs contour amplitude: max deviation {worst:.3e} of peak"
    ));
    Ok(())
}

fn cusp_predict(cfg: &Config, out: &mut Output) -> RunResult<()> {
    let profile = profile_from(cfg)?;
    let mut t = Table::new("cusps", &["x", "z", "origin"]);
    let mut any = false;
    if matches!(
        profile.kind,
        ProfileKind::Constant { .. }
            | ProfileKind::LinearSquared { .. }
            | ProfileKind::QuadraticChannel { .. }
    ) {
        let m_max = cfg.or("predict", "m_max", 2)?;
        let action = action_from(cfg, &profile, m_max)?;
        for c in action.predict_cusps() {
            t.row(&[Num(c.x), Num(c.z), Text("effective-action")]);
            out.note(format!("effective-action cusp ({:.4}, {:.4})", c.x, c.z));
            any = true;
        }
    }
    if cfg.has_section("scan") {
        let source = point_source(cfg)?;
        let scan = scan_from(cfg, &profile)?;
        let tol = cfg.or("scan", "tolerance", scan.default_tolerance())?;
        for p in find_ghost_poles(&profile, &scan, tol)? {
            if p.collapse_type != CollapseType::Complete {
                continue;
            }
            let right = degeneration_image(&profile, source, p.lambda_p, p.z_ghost)?;
            let left = Point::new(2.0 * source.x - right.x, right.z);
            for c in [right, left] {
                t.row(&[Num(c.x), Num(c.z), Text("ghost-scan")]);
                out.note(format!("ghost-scan cusp ({:.4}, {:.4})", c.x, c.z));
            }
            any = true;
        }
    }
    if !any {
        out.note("no cusps predicted".into());
    }
    out.table(t)
}

const OMEGAS: [&str; 6] = [
    "z-squared",
    "z-linear",
    "compact",
    "gaussian",
    "damped",
    "uniform",
];

fn perturb(cfg: &Config, out: &mut Output) -> RunResult<()> {
    let profile = profile_from(cfg)?;
    let s = "perturb";
    let kind = match cfg.choice(s, "omega", &OMEGAS)?.as_str() {
        "z-squared" => PerturbationKind::ZSquared,
        "z-linear" => PerturbationKind::ZLinear,
        "compact" => PerturbationKind::CompactSupport,
        "gaussian" => PerturbationKind::GaussianBump,
        "damped" => PerturbationKind::DampedZSquared,
        _ => PerturbationKind::Uniform,
    };
    let omega = PerturbationField::new(
        kind,
        cfg.or(s, "center", 0.0)?,
        cfg.or(s, "width", 1.0)?,
        cfg.or(s, "amplitude", 1.0)?,
    );
    let lambda_p = match (cfg.optional::<f64>(s, "lambda_p")?, profile.kind) {
        (Some(l), _) => l,
        (None, ProfileKind::QuadraticChannel { alpha, .. }) => {
            let m: i32 = cfg.require(s, "m")?;
            std::f64::consts::PI * m as f64 / (2.0 * alpha.sqrt())
        }
        (None, _) => return Err(cfg.error(s, "lambda_p", "missing required key").into()),
    };
    let (d_lo, d_hi) = cfg.range(s, "delta")?;
    if d_lo <= 0.0 {
        return Err(cfg.error(s, "delta_min", "must be positive").into());
    }
    let count = cfg.count(s, "count", 3)?;
    let side = if cfg.has(s, "side") {
        cfg.choice(s, "side", &["above", "below"])?
    } else {
        "above".to_string()
    };
    let sign = if side == "above" { 1.0 } else { -1.0 };
    let grid: Vec<f64> = linspace(d_lo.ln(), d_hi.ln(), count)
        .into_iter()
        .map(|u| lambda_p + sign * u.exp())
        .collect();
    let bc = Boundary::new(cfg.require(s, "z_start")?, cfg.require(s, "z_end")?);
    let response = pole_response(&profile, &omega, lambda_p, &grid, bc)?;
    let class = response.classification.as_str();
    let mut t = Table::new("response", &["lambda", "omega_avg", "class"]);
    for (l, a) in response.lambda_grid.iter().zip(&response.omega_avg) {
        t.row(&[Num(*l), Num(*a), Text(class)]);
    }
    out.table(t)?;
    out.note(format!(
        "{class}: exponent {:.4} (R² {:.5}) toward lambda_p = {lambda_p}",
        response.fitted_exponent, response.r_squared
    ));
    Ok(())
}

/// Run one subcommand and write its files.
pub fn run(command: Subcommand, cfg: &Config, options: &RunOptions) -> RunResult<RunReport> {
    let dir = match &options.out_dir {
        Some(d) => d.clone(),
        None => PathBuf::from(cfg.or("output", "dir", "out".to_string())?),
    };
    let svg = match cfg.optional::<String>("output", "formats")? {
        None => false,
        Some(list) => {
            let mut svg = false;
            for f in list.split(',').map(|f| f.trim().to_ascii_lowercase()) {
                match f.as_str() {
                    "csv" => {}
                    "svg" => svg = true,
                    _ => {
                        return Err(cfg
                            .error("output", "formats", format!("unknown format `{f}`"))
                            .into())
                    }
                }
            }
            svg
        }
    };
    fs::create_dir_all(&dir).map_err(|source| RunError::Io {
        path: dir.clone(),
        source,
    })?;
    let mut out = Output {
        dir,
        svg,
        report: RunReport::default(),
    };
    match command {
        Subcommand::RayFan => rayfan(cfg, &mut out)?,
        Subcommand::DirichletScan => dirichlet_scan(cfg, &mut out)?,
        Subcommand::GhostPoles => ghost_poles(cfg, &mut out)?,
        Subcommand::Field => field_cmd(cfg, &mut out)?,
        Subcommand::Pearcey => pearcey_cmd(cfg, options.grid, &mut out)?,
        Subcommand::CuspPredict => cusp_predict(cfg, &mut out)?,
        Subcommand::Perturb => perturb(cfg, &mut out)?,
    }
    Ok(out.report)
}

/// Load `path` and run.
pub fn run_file(command: Subcommand, path: &Path, options: &RunOptions) -> RunResult<RunReport> {
    let cfg = Config::load(path)?;
    run(command, &cfg, options)
}
