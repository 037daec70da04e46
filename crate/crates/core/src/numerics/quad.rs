//! Globally adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and budget for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_intervals: 20_000,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

fn kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<Panel>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x)? + f(c + x)?;
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    let value = k * h;
    let error = ((k - g) * h).norm();
    Ok(Panel { a, b, value, error })
}

/// Integrate `f` over `[a, b]`. Returns the value and the error estimate.
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<(Complex64, f64)>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    if a == b {
        return Ok((Complex64::new(0.0, 0.0), 0.0));
    }
    let mut panels = vec![kronrod(&mut f, a, b)?];
    loop {
        let total: Complex64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::Quadrature { segment: 0 });
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.norm()) {
            return Ok((total, err));
        }
        if panels.len() >= opts.max_intervals {
            return Err(Error::Quadrature { segment: 0 });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a.min(p.b) || mid >= p.a.max(p.b) {
            // interval cannot be split further; accept what we have
            panels.push(p);
            let total: Complex64 = panels.iter().map(|p| p.value).sum();
            let err: f64 = panels.iter().map(|p| p.error).sum();
            return Ok((total, err));
        }
        panels.push(kronrod(&mut f, p.a, mid)?);
        panels.push(kronrod(&mut f, mid, p.b)?);
    }
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (v, e) = integrate(|x| f(x).map(|y| Complex64::new(y, 0.0)), a, b, opts)?;
    Ok((v.re, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let (v, _) = integrate_real(
            |x| Ok(x.powi(5) - 2.0 * x),
            0.0,
            2.0,
            QuadOptions::default(),
        )
        .unwrap();
        assert!((v - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_complex_exponential() {
        let k = 50.0;
        let (v, _) = integrate(
            |x| Ok(Complex64::new(0.0, k * x).exp()),
            0.0,
            3.0,
            QuadOptions::default(),
        )
        .unwrap();
        let exact = (Complex64::new(0.0, 3.0 * k).exp() - 1.0) / Complex64::new(0.0, k);
        assert!((v - exact).norm() < 1e-11);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let (v, _) = integrate_real(
            |x| Ok(1.0 / x.sqrt()),
            0.0,
            1.0,
            QuadOptions {
                rel_tol: 1e-9,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((v - 2.0).abs() < 1e-7);
    }
}
