//! Isotropic Morse wavelets, their Riesz companions and the concentration
//! eigenvalues of the radial localisation operator.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathcore::quad::adaptive_gk;
use crate::mathcore::special::{bessel_j0, bessel_j1, laguerre, ln_gamma, reg_inc_beta};

/// Default relative threshold for support bands.
pub const DEFAULT_BAND_EPS: f64 = 1e-6;
/// Relative threshold that truncates the Hankel integrals.
const HANKEL_BAND_EPS: f64 = 1e-8;
const FMAX_GRID: usize = 2048;
const BAND_GRID: usize = 8192;

/// A family of `count` isotropic Morse wavelets sharing the exponents `l`
/// (power at the origin) and `m` (decay).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MorseFamily {
    l: f64,
    m: f64,
    count: usize,
    norms: Vec<f64>,
    f_max: Vec<f64>,
    hankel_limit: Vec<f64>,
}

impl MorseFamily {
    pub fn new(l: f64, m: f64, count: usize) -> Result<Self> {
        if !(l >= 1.0 && l.is_finite()) {
            return Err(Error::domain(
                "wavelets",
                format!("l must be >= 1 (got {l})"),
            ));
        }
        if !(m >= 1.0 && m.is_finite()) {
            return Err(Error::domain(
                "wavelets",
                format!("m must be >= 1 (got {m})"),
            ));
        }
        if count == 0 {
            return Err(Error::domain(
                "wavelets",
                "family needs at least one wavelet",
            ));
        }
        let mut fam = MorseFamily {
            l,
            m,
            count,
            norms: vec![1.0; count],
            f_max: Vec::with_capacity(count),
            hankel_limit: Vec::with_capacity(count),
        };
        if fam.r() <= 1.0 {
            return Err(Error::domain(
                "wavelets",
                format!("r = {} must exceed 1", fam.r()),
            ));
        }
        fam.norms = (0..count).map(|n| fam.numeric_norm(n)).collect();
        for n in 0..count {
            let f = fam.locate_peak(n);
            fam.f_max.push(f);
        }
        for n in 0..count {
            let (_, hi) = fam.band(n, HANKEL_BAND_EPS);
            fam.hankel_limit.push(hi);
        }
        Ok(fam)
    }

    pub fn l(&self) -> f64 {
        self.l
    }
    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn count(&self) -> usize {
        self.count
    }
    pub fn beta(&self) -> f64 {
        self.l + 0.5
    }
    pub fn gamma(&self) -> f64 {
        self.m
    }
    pub fn r(&self) -> f64 {
        (2.0 * self.l + 2.0) / self.m
    }
    /// Laguerre order.
    pub fn c_prime(&self) -> f64 {
        self.r() - 1.0
    }

    fn check(&self, n: usize) -> Result<()> {
        if n >= self.count {
            Err(Error::Index {
                index: n,
                count: self.count,
            })
        } else {
            Ok(())
        }
    }

    /// Normalisation constant, fixed numerically so that each wavelet has
    /// unit energy over the plane.
    pub fn norm_const(&self, n: usize) -> Result<f64> {
        self.check(n)?;
        Ok(self.norms[n])
    }

    /// Closed-form value of the unit-energy constant.
    pub fn analytic_norm(&self, n: usize) -> f64 {
        let r = self.r();
        let ln = (2.0 * PI * PI * self.m).ln() + r * 2f64.ln() + ln_gamma(n as f64 + 1.0)
            - ln_gamma(n as f64 + r);
        (0.5 * ln).exp()
    }

    /// The constant as written in the (l, m) parameterisation,
    /// `sqrt(pi m 2^r n! / Gamma(n + r))`; smaller than the unit-energy
    /// value by `sqrt(2 pi)`.
    pub fn printed_norm(&self, n: usize) -> f64 {
        self.analytic_norm(n) / (2.0 * PI).sqrt()
    }

    /// `2pi f`-domain profile without the normalisation.
    fn shape(&self, n: usize, f: f64) -> f64 {
        if f <= 0.0 {
            return 0.0;
        }
        let u = 2.0 * PI * f;
        let um = u.powf(self.m);
        let env = (self.l * u.ln() - um).exp();
        if env == 0.0 {
            return 0.0;
        }
        env * laguerre(n, self.c_prime(), 2.0 * um)
    }

    /// Unchecked evaluation used by the transform hot loop.
    #[inline]
    pub(crate) fn eval(&self, n: usize, f: f64) -> f64 {
        self.norms[n] / PI.sqrt() * self.shape(n, f)
    }

    /// Fourier transform of the isotropic wavelet at radial frequency `f`
    /// (cycles per unit length).
    pub fn psi_e_hat(&self, f: f64, n: usize) -> Result<f64> {
        self.check(n)?;
        Ok(self.eval(n, f.abs()))
    }

    /// Riesz companions at `(f1, f2)`. Both are purely imaginary; the
    /// returned pair holds the coefficients of `j`, i.e. `-(f_s/f) Psi`.
    pub fn psi_riesz_hat(&self, f1: f64, f2: f64, n: usize) -> Result<(f64, f64)> {
        self.check(n)?;
        let f = f1.hypot(f2);
        if f == 0.0 {
            return Ok((0.0, 0.0));
        }
        let psi = self.eval(n, f);
        Ok((-f1 / f * psi, -f2 / f * psi))
    }

    /// Upper frequency beyond which the profile is below `e^-80` of any
    /// relevant scale.
    fn freq_ceiling(&self, n: usize) -> f64 {
        let s_hi = 4.0 * n as f64 + 2.0 * self.r() + 80.0;
        (s_hi / 2.0).powf(1.0 / self.m) / (2.0 * PI)
    }

    fn numeric_norm(&self, n: usize) -> f64 {
        // energy 2pi int (shape/sqrt(pi))^2 f df
        let hi = self.freq_ceiling(n);
        let g = |f: f64| {
            let s = self.shape(n, f);
            2.0 * s * s * f
        };
        let pts: Vec<f64> = (0..=64).map(|k| hi * k as f64 / 64.0).collect();
        let energy = adaptive_gk(&g, &pts, 0.0, 1e-14, 20_000).value;
        1.0 / energy.sqrt()
    }

    fn locate_peak(&self, n: usize) -> f64 {
        let hi = self.freq_ceiling(n);
        let h = hi / FMAX_GRID as f64;
        let obj = |f: f64| self.shape(n, f).powi(2);
        let mut best = 1;
        let mut best_val = obj(h);
        for k in 2..FMAX_GRID {
            let v = obj(k as f64 * h);
            if v > best_val {
                best_val = v;
                best = k;
            }
        }
        golden_max(&obj, (best - 1) as f64 * h, (best + 1) as f64 * h, 1e-13)
    }

    /// Radial frequency maximising the wavelet's energy density.
    pub fn f_max(&self, n: usize) -> Result<f64> {
        self.check(n)?;
        Ok(self.f_max[n])
    }

    fn band(&self, n: usize, eps: f64) -> (f64, f64) {
        let fm = self.f_max[n];
        let thr = eps * self.shape(n, fm).abs();
        let hi = self.freq_ceiling(n);
        let h = hi / BAND_GRID as f64;
        let above = |f: f64| self.shape(n, f).abs() >= thr;
        let first = (0..=BAND_GRID).find(|&k| above(k as f64 * h));
        let last = (0..=BAND_GRID).rev().find(|&k| above(k as f64 * h));
        let (first, last) = match (first, last) {
            (Some(a), Some(b)) => (a, b),
            _ => return (fm, fm),
        };
        let lower = if first == 0 {
            0.0
        } else {
            bisect(&above, (first - 1) as f64 * h, first as f64 * h)
        };
        let upper = if last == BAND_GRID {
            hi
        } else {
            bisect(&above, (last + 1) as f64 * h, last as f64 * h)
        };
        (lower.min(fm), upper.max(fm))
    }

    /// Lowest and highest radial frequencies at which `|Psi|` reaches
    /// `eps_rel` times its peak.
    pub fn support_band(&self, n: usize, eps_rel: f64) -> Result<(f64, f64)> {
        self.check(n)?;
        if !(eps_rel > 0.0 && eps_rel < 1.0) {
            return Err(Error::domain(
                "wavelets",
                format!("band threshold must lie in (0, 1) (got {eps_rel})"),
            ));
        }
        Ok(self.band(n, eps_rel))
    }

    fn hankel(&self, n: usize, x: f64, order: u32) -> f64 {
        let fhi = self.hankel_limit[n];
        let bessel = if order == 0 { bessel_j0 } else { bessel_j1 };
        let g = |f: f64| 2.0 * PI * self.eval(n, f) * bessel(2.0 * PI * f * x) * f;
        let mut pts: Vec<f64> = (0..=16).map(|k| fhi * k as f64 / 16.0).collect();
        if x > 0.0 {
            // split at the Bessel zeros (McMahon estimates)
            let shift = if order == 0 { 0.25 } else { -0.25 };
            for k in 1.. {
                let b = (k as f64 - shift) * PI;
                let z = b - (4.0 * f64::from(order * order) - 1.0) / (8.0 * b);
                let f = z / (2.0 * PI * x);
                if f >= fhi {
                    break;
                }
                pts.push(f);
            }
            pts.sort_by(f64::total_cmp);
            pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        }
        adaptive_gk(&g, &pts, 1e-12, 1e-12, 50_000).value
    }

    /// Spatial profile of the isotropic wavelet at radial distance `x`.
    pub fn psi_spatial(&self, x: f64, n: usize) -> Result<f64> {
        self.check(n)?;
        Ok(self.hankel(n, x.abs(), 0))
    }

    /// Radial factor of the spatial Riesz wavelets:
    /// `psi_s(x) = (x_s / |x|) * riesz_radial(|x|)`.
    pub fn psi_riesz_radial(&self, x: f64, n: usize) -> Result<f64> {
        self.check(n)?;
        Ok(self.hankel(n, x.abs(), 1))
    }

    /// Samples `(f, Psi_n(f))` at the given frequencies.
    pub fn table(&self, n: usize, freqs: &[f64]) -> Result<Vec<(f64, f64)>> {
        self.check(n)?;
        Ok(freqs.iter().map(|&f| (f, self.eval(n, f.abs()))).collect())
    }
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Bisect between `out` (predicate false) and `inside` (predicate true).
fn bisect<F: Fn(f64) -> bool>(pred: &F, mut out: f64, mut inside: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (out + inside);
        if pred(mid) {
            inside = mid;
        } else {
            out = mid;
        }
        if (inside - out).abs() < 1e-14 {
            break;
        }
    }
    inside
}

/// Concentration eigenvalue of wavelet `n` for the radial region with
/// parameter `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueResult {
    pub n: usize,
    pub r: f64,
    pub c: f64,
    pub lambda: f64,
    pub concentration: f64,
}

pub fn eigenvalue(n: usize, r: f64, c: f64) -> Result<EigenvalueResult> {
    if !(r > 1.0) {
        return Err(Error::domain(
            "wavelets",
            format!("eigenvalue needs r > 1 (got {r})"),
        ));
    }
    if !(c >= 1.0) {
        return Err(Error::domain(
            "wavelets",
            format!("eigenvalue needs C >= 1 (got {c})"),
        ));
    }
    let x0 = if c.is_infinite() {
        1.0
    } else {
        (c - 1.0) / (c + 1.0)
    };
    let lambda = reg_inc_beta(n as f64 + 1.0, r - 1.0, x0)?;
    Ok(EigenvalueResult {
        n,
        r,
        c,
        lambda,
        concentration: lambda * lambda,
    })
}
