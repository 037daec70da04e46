//! Helmholtz-equation fields and caustic geometry from the einbein
//! (Schwinger proper-time) action.
//!
//! * [`profiles`] – index-of-refraction models.
//! * [`einbein`] – exact actions, poles, ghost sources, critical points, cusp prediction.
//! * [`contour`] – steepest-descent contours, field integration, Pearcey function.
//! * [`raytrace`] – Hamiltonian rays with Jacobi fields, fold/cusp extraction.
//! * [`dirichlet`] – Euler–Lagrange shooting, endpoint-spread scans, ghost poles.
//! * [`perturbation`] – classical-path perturbation responses.
//! * [`config`] / [`run`] – flat config files and the reproducible CLI pipeline.

pub mod config;
pub mod contour;
pub mod dirichlet;
pub mod einbein;
pub mod error;
pub mod numerics;
pub mod perturbation;
pub mod profiles;
pub mod raytrace;
pub mod run;

pub use error::{Error, Result};

/// Position in the `(x, z)` plane; `x` is range, `z` is depth.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub z: f64,
}

impl Point {
    pub const fn new(x: f64, z: f64) -> Self {
        Self { x, z }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.z - other.z)
    }
}
