//! Exponentially scaled modified Bessel functions `e^{-x} I_0(x)` and `e^{-x} I_1(x)`.

const SERIES_LIMIT: f64 = 30.0;

fn series(nu: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = (0.5 * x).powi(nu as i32);
    for j in 1..=nu {
        term /= j as f64;
    }
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + nu as f64));
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
        k += 1.0;
    }
    sum
}

fn asymptotic_scaled(nu: u32, x: f64) -> f64 {
    let mu = 4.0 * (nu * nu) as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..40 {
        let kf = k as f64;
        let next = -term * (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

/// `e^{-|x|} I_0(x)`.
pub fn i0e(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        series(0, ax) * (-ax).exp()
    } else {
        asymptotic_scaled(0, ax)
    }
}

/// `e^{-|x|} I_1(x)`.
pub fn i1e(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT {
        series(1, ax) * (-ax).exp()
    } else {
        asymptotic_scaled(1, ax)
    };
    v.copysign(x)
}

pub fn i0(x: f64) -> f64 {
    i0e(x) * x.abs().exp()
}

pub fn i1(x: f64) -> f64 {
    i1e(x) * x.abs().exp()
}
