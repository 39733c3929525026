use std::f64::consts::PI;

use crate::error::{Error, Result};

pub use statrs::function::gamma::ln_gamma;

/// Generalized Laguerre polynomial `L_n^c(s)` by upward three-term recurrence.
pub fn laguerre(n: usize, c: f64, s: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + c - s;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + c - s) * cur - (k + c) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Regularized incomplete beta function `I_x(p, q)`.
pub fn reg_inc_beta(p: f64, q: f64, x: f64) -> Result<f64> {
    if !(p > 0.0 && q > 0.0 && p.is_finite() && q.is_finite()) {
        return Err(Error::domain(
            "mathcore",
            format!("incomplete beta needs p, q > 0 (got p = {p}, q = {q})"),
        ));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(
            "mathcore",
            format!("incomplete beta needs x in [0, 1] (got {x})"),
        ));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front = p * x.ln() + q * (-x).ln_1p() - (ln_gamma(p) + ln_gamma(q) - ln_gamma(p + q));
    let front = ln_front.exp();
    // the continued fraction converges fast below the mean of the density
    if x < (p + 1.0) / (p + q + 2.0) {
        Ok(front * beta_cf(p, q, x) / p)
    } else {
        Ok(1.0 - front * beta_cf(q, p, 1.0 - x) / q)
    }
}

/// Continued fraction for the incomplete beta, modified Lentz evaluation.
fn beta_cf(p: f64, q: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = p + q;
    let qap = p + 1.0;
    let qam = p - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (q - m) * x / ((qam + m2) * (p + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(p + m) * (qab + m) * x / ((p + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Above this argument the Hankel asymptotic expansion is used.
const BESSEL_ASYMPTOTIC: f64 = 25.0;
/// Trapezoid nodes over one period of the Bessel integral representation.
const BESSEL_TRAPEZOID: usize = 64;

/// Bessel function of the first kind, order 0.
pub fn bessel_j0(z: f64) -> f64 {
    bessel_jn(0, z.abs())
}

/// Bessel function of the first kind, order 1.
pub fn bessel_j1(z: f64) -> f64 {
    if z < 0.0 {
        -bessel_jn(1, -z)
    } else {
        bessel_jn(1, z)
    }
}

fn bessel_jn(order: u32, z: f64) -> f64 {
    if z > BESSEL_ASYMPTOTIC {
        return bessel_asymptotic(order, z);
    }
    // J_n(z) = (1/2pi) int_0^{2pi} cos(n t - z sin t) dt; the integrand is
    // periodic and entire, so the trapezoid rule converges geometrically.
    let n = f64::from(order);
    let h = 2.0 * PI / BESSEL_TRAPEZOID as f64;
    let mut sum = 0.0;
    for k in 0..BESSEL_TRAPEZOID {
        let t = k as f64 * h;
        sum += (n * t - z * t.sin()).cos();
    }
    sum / BESSEL_TRAPEZOID as f64
}

/// Hankel expansion `J_n(z) ~ sqrt(2/(pi z)) [P cos(chi) - Q sin(chi)]`,
/// summed until the terms stop decreasing.
fn bessel_asymptotic(order: u32, z: f64) -> f64 {
    let mu = 4.0 * f64::from(order * order);
    let chi = z - (f64::from(order) / 2.0 + 0.25) * PI;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term: f64 = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60 {
        // term = a_k / z^k with a_k = prod_{j<=k} (mu - (2j-1)^2) / (j 8)
        if term.abs() > last || term.abs() < 1e-18 {
            break;
        }
        last = term.abs();
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        let j = (k + 1) as f64;
        term *= (mu - (2.0 * j - 1.0).powi(2)) / (j * 8.0 * z);
    }
    (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}
