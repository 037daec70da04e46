//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.
//!
//! The right-hand side may fail (profile evaluated out of its domain); the
//! failure is propagated unchanged. An observer sees every accepted step and
//! may stop the integration early.

use std::ops::ControlFlow;

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Step-size controlled Dormand–Prince 5(4) pair.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 1_000_000,
        }
    }
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

impl Dopri5 {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    pub fn with_h_max(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }

    /// Integrate from `t0` to `t1` and return the final state.
    pub fn solve<const N: usize, F>(&self, f: F, t0: f64, y0: [f64; N], t1: f64) -> Result<[f64; N]>
    where
        F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    {
        let (_, y) = self.solve_observed(f, t0, y0, t1, |_, _| ControlFlow::Continue(()))?;
        Ok(y)
    }

    /// Integrate from `t0` toward `t1`, calling `observe` after each accepted
    /// step. Returns the time and state at which integration ended.
    pub fn solve_observed<const N: usize, F, O>(
        &self,
        mut f: F,
        t0: f64,
        y0: [f64; N],
        t1: f64,
        mut observe: O,
    ) -> Result<(f64, [f64; N])>
    where
        F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
        O: FnMut(f64, &[f64; N]) -> ControlFlow<()>,
    {
        let span = t1 - t0;
        if span == 0.0 {
            return Ok((t0, y0));
        }
        let dir = span.signum();
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y)?;

        // initial step from the derivative scale
        let scale = |y: &[f64; N], i: usize| self.atol + self.rtol * y[i].abs();
        let d0 = (0..N)
            .map(|i| (y[i] / scale(&y, i)).powi(2))
            .sum::<f64>()
            .sqrt();
        let d1 = (0..N)
            .map(|i| (k1[i] / scale(&y, i)).powi(2))
            .sum::<f64>()
            .sqrt();
        let mut h = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h = h.min(span.abs()).min(self.h_max);

        let mut steps = 0usize;
        while (t1 - t) * dir > 0.0 {
            steps += 1;
            if steps > self.max_steps {
                return Err(Error::Integrator(format!(
                    "step budget of {} exhausted at t = {t}",
                    self.max_steps
                )));
            }
            let last = (t + dir * h - t1) * dir >= 0.0;
            let hs = if last { t1 - t } else { dir * h };

            let k2 = f(t + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]))?;
            let k3 = f(t + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = f(
                t + C4 * hs,
                &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            )?;
            let k5 = f(
                t + C5 * hs,
                &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            )?;
            let k6 = f(
                t + hs,
                &axpy(
                    &y,
                    hs,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            )?;
            let y_new = axpy(
                &y,
                hs,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let k7 = f(t + hs, &y_new)?;

            let mut err = 0.0;
            for i in 0..N {
                let e = hs
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() {
                h *= 0.1;
                if h < 1e-300 {
                    return Err(Error::Integrator(format!("non-finite state at t = {t}")));
                }
                continue;
            }

            if err <= 1.0 {
                t = if last { t1 } else { t + hs };
                y = y_new;
                k1 = k7;
                if let ControlFlow::Break(()) = observe(t, &y) {
                    return Ok((t, y));
                }
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                h = (hs.abs() * fac).min(self.h_max);
            } else {
                let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                h = hs.abs() * fac;
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::Integrator(format!("step size underflow at t = {t}")));
                }
            }
        }
        Ok((t, y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_matches_closed_form() {
        let solver = Dopri5::new(1e-12, 1e-14);
        let y = solver
            .solve(|_, y: &[f64; 2]| Ok([y[1], -y[0]]), 0.0, [1.0, 0.0], 10.0)
            .unwrap();
        assert!((y[0] - 10f64.cos()).abs() < 1e-9);
        assert!((y[1] + 10f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn backward_integration() {
        let solver = Dopri5::new(1e-12, 1e-14);
        let y = solver
            .solve(|_, y: &[f64; 1]| Ok([y[0]]), 1.0, [1f64.exp()], 0.0)
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn observer_can_stop_early() {
        let solver = Dopri5::default();
        let (t, _) = solver
            .solve_observed(
                |_, _y: &[f64; 1]| Ok([1.0]),
                0.0,
                [0.0],
                100.0,
                |t, _| {
                    if t > 1.0 {
                        ControlFlow::Break(())
                    } else {
                        ControlFlow::Continue(())
                    }
                },
            )
            .unwrap();
        assert!(t > 1.0 && t < 100.0);
    }

    #[test]
    fn rhs_error_propagates() {
        let solver = Dopri5::default();
        let r = solver.solve(
            |t, _y: &[f64; 1]| {
                if t > 0.5 {
                    Err(Error::Domain("out".into()))
                } else {
                    Ok([1.0])
                }
            },
            0.0,
            [0.0],
            1.0,
        );
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
