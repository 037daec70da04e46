//! Model invariants checked over random inputs.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use caustica::contour::{assemble_contour, pearcey};
use caustica::dirichlet::{
    dirichlet_solutions, endpoint_spread_scan, find_ghost_poles, solve_dirichlet, CollapseType,
};
use caustica::einbein::{EffectiveCuspAction, EinbeinAction};
use caustica::numerics::linear_fit;
use caustica::profiles::ProfileModel;
use caustica::raytrace::{fold_points, linspace, ray_fan, Ray};
use caustica::Point;

/// Exact models with the refractive index they solve for.
fn exact_models() -> Vec<(EinbeinAction, fn(Point) -> f64)> {
    vec![
        (
            EinbeinAction::LinearProfile {
                n0: 1.0,
                a: 0.5,
                source: Point::new(0.2, -0.3),
            },
            |p| 1.0 - 0.5 * p.z,
        ),
        (
            EinbeinAction::LinearProfile {
                n0: 1.0,
                a: -0.8,
                source: Point::default(),
            },
            |p| 1.0 + 0.8 * p.z,
        ),
        (EinbeinAction::SimpleCusp { n0: 1.0, mu: 1.0 }, |_| 1.0),
        (
            EinbeinAction::QuadraticChannel {
                n0: 1.0,
                alpha: 0.01,
                source: Point::new(0.0, 3.0),
                m_max: 2,
            },
            |p| 1.0 - 0.01 * p.z * p.z,
        ),
    ]
}

fn all_models() -> Vec<EinbeinAction> {
    let mut models: Vec<_> = exact_models().into_iter().map(|m| m.0).collect();
    models.push(EinbeinAction::EffectiveCusp(
        EffectiveCuspAction::for_channel(1.0, 0.01, Point::new(0.0, 3.0), 1),
    ));
    models
}

/// Map unit-square coordinates to a model-sized neighbourhood.
fn place(action: &EinbeinAction, u: f64, v: f64) -> Point {
    match action {
        EinbeinAction::SimpleCusp { .. } => Point::new(2.0 * u - 1.0, 0.2 + 2.8 * v),
        EinbeinAction::QuadraticChannel { .. } => Point::new(40.0 * u - 20.0, 10.0 * v - 5.0),
        EinbeinAction::EffectiveCusp(_) => Point::new(20.0 + 20.0 * u, -6.0 + 6.0 * v),
        EinbeinAction::LinearProfile { .. } => Point::new(2.0 * u - 1.0, 2.0 * v - 1.0),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    // (i/k0) ∂Λ Ψ + (1/k0²) ∇²Ψ + n² Ψ = 0
    #[test]
    fn psi_solves_the_parabolic_equation(u in 0.0..1.0f64, v in 0.0..1.0f64, lr in 0.3..2.0f64, li in 0.2..0.6f64) {
        for (action, n2) in exact_models() {
            let scale = action.scale();
            let k0 = 1.0 / scale;
            let lambda = C64::new(lr, li) * scale;
            let p = place(&action, u, v);
            let psi = |l: C64, q: Point| action.psi(l, q, k0).unwrap();
            let c = psi(lambda, p);
            let hl = 1e-4 * scale;
            let d_lambda = (psi(lambda + hl, p) - psi(lambda - hl, p)) / (2.0 * hl);
            let h = 1e-3;
            let lap = (psi(lambda, Point::new(p.x + h, p.z)) + psi(lambda, Point::new(p.x - h, p.z))
                + psi(lambda, Point::new(p.x, p.z + h)) + psi(lambda, Point::new(p.x, p.z - h))
                - c * 4.0) / (h * h);
            let terms = [C64::i() / k0 * d_lambda, lap / (k0 * k0), c * n2(p)];
            let size = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
            let residual = (terms[0] + terms[1] + terms[2]).norm() / size;
            prop_assert!(residual < 1e-4, "{action:?} at {p:?}, Λ = {lambda}: {residual:e}");
        }
    }

    #[test]
    fn residues_are_non_negative_and_vanish_on_their_locus(u in 0.0..1.0f64, v in 0.0..1.0f64) {
        for action in all_models() {
            let p = place(&action, u, v);
            for pole in action.poles_and_residues(p) {
                prop_assert!(pole.residue >= 0.0, "{action:?} {pole:?}");
            }
            for ghost in action.ghost_sources() {
                let foot = ghost.locus.foot(p);
                let on_locus = action
                    .poles_and_residues(foot)
                    .into_iter()
                    .find(|q| q.index == ghost.index)
                    .expect("ghost pole listed");
                prop_assert_eq!(on_locus.residue, 0.0);
            }
        }
    }

    #[test]
    fn critical_points_are_roots(u in 0.0..1.0f64, v in 0.0..1.0f64) {
        for action in all_models() {
            let p = place(&action, u, v);
            for cp in action.find_critical_points(p, action.default_region(p)).points {
                let d = action.action_derivative(cp.lambda, p, 1).unwrap().norm();
                prop_assert!(d < 1e-12, "{action:?} at {p:?}: |S̄'({})| = {d:e}", cp.lambda);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // Descent paths keep Re S̄ fixed and raise Im S̄.
    #[test]
    fn descent_segments_hold_the_phase(u in 0.0..1.0f64, v in 0.0..1.0f64) {
        let models = [
            EinbeinAction::LinearProfile { n0: 1.0, a: 0.0, source: Point::default() },
            EinbeinAction::SimpleCusp { n0: 1.0, mu: 1.0 },
        ];
        for action in models {
            let mut p = place(&action, u, v);
            if p.dist(Point::default()) < 0.2 {
                p.x += 0.5;
            }
            let k0 = 40.0 / action.scale();
            let contour = assemble_contour(&action, p, k0).unwrap();
            for seg in &contour.segments {
                let s: Vec<C64> = seg.samples.iter().map(|(_, h)| h / (C64::i() * k0)).collect();
                let re0 = s[0].re;
                for w in s.windows(2) {
                    let size = w[1].norm().max(s[0].norm());
                    prop_assert!((w[1].re - re0).abs() < 1e-6 * size, "drift {} at |S̄| = {size}", w[1].re - re0);
                    prop_assert!(w[1].im >= w[0].im - 1e-12 * size, "Im S̄ fell from {} to {}", w[0].im, w[1].im);
                }
            }
        }
    }
}

#[test]
fn pearcey_is_brightest_along_the_fold() {
    // away from the cusp core, the band within one 0.5 cell of the fold
    // outshines everything beyond it on the shadow side
    let cell = 0.5;
    for k in 0..=10 {
        let zeta1 = 3.0 + 0.5 * k as f64;
        let fold = -(27.0 / 8.0 * zeta1 * zeta1).cbrt();
        let band_max = (0..=50)
            .map(|i| {
                pearcey(fold - cell + 0.02 * i as f64, zeta1)
                    .unwrap()
                    .norm()
            })
            .fold(0.0, f64::max);
        let shadow_max = (0..=300)
            .map(|i| {
                pearcey(fold + 4.0 * cell + 0.02 * i as f64, zeta1)
                    .unwrap()
                    .norm()
            })
            .fold(0.0, f64::max);
        assert!(
            band_max > 1.3 * shadow_max,
            "ζ1 = {zeta1}: band {band_max}, shadow {shadow_max}"
        );
    }
}

/// Shortest distance from `p` to the polyline of `ray`.
fn distance_to_ray(ray: &Ray, p: Point) -> f64 {
    ray.samples
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0].position, w[1].position);
            let (dx, dz) = (b.x - a.x, b.z - a.z);
            let len2 = dx * dx + dz * dz;
            let t = if len2 > 0.0 {
                (((p.x - a.x) * dx + (p.z - a.z) * dz) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            p.dist(Point::new(a.x + t * dx, a.z + t * dz))
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn folds_sit_on_ray_density_ridges() {
    let profile = ProfileModel::channel(1.0, 0.01);
    let angles = linspace(-PI / 3.0, PI / 3.0, 201);
    let d_angle = angles[1] - angles[0];
    let fan = ray_fan(&profile, Point::new(0.0, 3.0), &angles, 70.0, 0.1).unwrap();
    let mut checked = 0;
    for (i, ray) in fan.rays.iter().enumerate().skip(1).step_by(10) {
        for fold in fold_points(&profile, ray, i).unwrap() {
            // neighbour separation at equal s is the Jacobi vector times the angle step
            let near = ray
                .samples
                .iter()
                .min_by(|a, b| (a.s - fold.s).abs().total_cmp(&(b.s - fold.s).abs()))
                .unwrap();
            let spacing = near.d_position[0].hypot(near.d_position[1]) * d_angle;
            let lo = i.saturating_sub(10);
            let hi = (i + 10).min(fan.rays.len() - 1);
            let passing = (lo..=hi)
                .filter(|&j| distance_to_ray(&fan.rays[j], fold.position) <= spacing)
                .count();
            assert!(
                passing >= 2,
                "fold {fold:?}: {passing} rays within {spacing}"
            );
            checked += 1;
        }
    }
    assert!(checked > 10, "only {checked} folds");
}

#[test]
fn boundary_amplitude_diverges_as_inverse_distance_to_pole() {
    let (alpha, z0, z1) = (0.01f64, 3.0, 1.0);
    let profile = ProfileModel::channel(1.0, alpha);
    let lambda_p = PI / (2.0 * alpha.sqrt());
    let deltas: Vec<f64> = linspace(1e-4f64.ln(), 1e-2f64.ln(), 10)
        .into_iter()
        .map(f64::exp)
        .collect();
    let mut amps = vec![];
    for &d in &deltas {
        let lambda = lambda_p + d;
        let w = 2.0 * alpha.sqrt() * lambda;
        let seed = w * (z1 - z0 * w.cos()) / w.sin();
        let sol = solve_dirichlet(&profile, lambda, z0, z1, seed).unwrap();
        amps.push(z0.hypot(sol.v0 / w));
    }
    let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = amps.iter().map(|a| a.ln()).collect();
    let (slope, _, r2) = linear_fit(&xs, &ys);
    assert!(
        (slope + 1.0).abs() <= 0.05 && r2 > 0.99,
        "slope {slope}, R² {r2}"
    );
}

#[test]
fn partial_collapse_keeps_a_finite_branch() {
    let (z_c, z_s) = (1300.0, 1340.0);
    let profile = ProfileModel::munk(0.00737, z_c);
    let grid: Vec<f64> = (0..237).map(|i| 1000.0 + 250.0 * i as f64).collect();
    let scan = endpoint_spread_scan(&profile, &grid, z_s, &linspace(-50.0, 50.0, 9)).unwrap();
    let poles = find_ghost_poles(&profile, &scan, scan.default_tolerance()).unwrap();
    let partial: Vec<_> = poles
        .iter()
        .filter(|p| p.collapse_type == CollapseType::Partial)
        .collect();
    assert!(!partial.is_empty());
    for p in partial {
        // endpoints fold over at z_ghost, so generic targets sit on the reachable side
        let target = p.z_ghost + 40.0;
        let found = dirichlet_solutions(
            &profile,
            p.lambda_p,
            z_s,
            target,
            &linspace(-3000.0, 3000.0, 121),
        )
        .unwrap();
        assert!(!found.is_empty(), "no finite branch at Λ = {}", p.lambda_p);
    }
}
