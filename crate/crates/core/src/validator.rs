//! Numerical checks of the radial localisation operator: kernel, operator
//! application by quadrature, eigenrelation residuals and the
//! resolution-of-identity constant.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathcore::quad::GaussLegendre;
use crate::mathcore::special::{laguerre, ln_gamma};
use crate::wavelets::eigenvalue;

/// Largest tolerated relative change between the two quadrature levels.
pub const QUAD_TOL: f64 = 1e-4;
const PANEL_POINTS: usize = 16;

/// Exponents of the one-dimensional Morse profile `w^beta exp(-w^gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorseExponents {
    pub beta: f64,
    pub gamma: f64,
}

impl MorseExponents {
    pub fn new(beta: f64, gamma: f64) -> Result<Self> {
        if !(beta > 0.5 && beta.is_finite()) {
            return Err(Error::domain(
                "validator",
                format!("beta must exceed 1/2 (got {beta})"),
            ));
        }
        if !(gamma >= 1.0 && gamma.is_finite()) {
            return Err(Error::domain(
                "validator",
                format!("gamma must be >= 1 (got {gamma})"),
            ));
        }
        let e = MorseExponents { beta, gamma };
        if e.r() <= 1.0 {
            return Err(Error::domain(
                "validator",
                format!("r = {} must exceed 1", e.r()),
            ));
        }
        Ok(e)
    }

    pub fn r(&self) -> f64 {
        (2.0 * self.beta + 1.0) / self.gamma
    }

    fn v_const(&self) -> f64 {
        let r = self.r();
        ((r / 2.0 + 0.5) * 2f64.ln() + 0.5 * (PI * self.gamma).ln() - 0.5 * ln_gamma(r)).exp()
    }

    /// Unit-energy one-dimensional profile `V(w)`.
    pub fn v(&self, w: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        self.v_const() * (self.beta * w.ln() - w.powf(self.gamma)).exp()
    }

    /// Eigenfunction `n` of the radial operator, `Psi(w) / sqrt(w)` with
    /// `Psi(w) = w^beta exp(-w^gamma) L_n^{r-1}(2 w^gamma)`.
    pub fn eigenfunction(&self, n: usize, w: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        let t = w.powf(self.gamma);
        ((self.beta - 0.5) * w.ln() - t).exp() * laguerre(n, self.r() - 1.0, 2.0 * t)
    }
}

/// Normalising constant of the operator, `(r - 1) / (8 pi^2)`.
pub fn c_nought(exps: &MorseExponents) -> f64 {
    (exps.r() - 1.0) / (8.0 * PI * PI)
}

/// Kernel of the radial operator at scale `a` and translation `b`.
pub fn kappa2_kernel(w1: f64, w2: f64, a: f64, b: f64, beta: f64, gamma: f64) -> Result<f64> {
    let e = MorseExponents::new(beta, gamma)?;
    if !(w1 > 0.0 && w2 > 0.0 && a > 0.0) {
        return Err(Error::domain(
            "validator",
            "kernel needs positive frequencies and scale",
        ));
    }
    let s = a.powf(1.0 / gamma);
    Ok(2.0
        * s
        * e.v(s * w1)
        * (w2 / w1).sqrt()
        * e.v(s * w2)
        * ((w1.powf(gamma) - w2.powf(gamma)) * b).cos())
}

/// Region `a^2 + b^2 + 1 <= 2aC, b > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionParams {
    pub c: f64,
}

impl RegionParams {
    pub fn new(c: f64) -> Result<Self> {
        if !(c >= 1.0 && c.is_finite()) {
            return Err(Error::domain(
                "validator",
                format!("region needs C >= 1 (got {c})"),
            ));
        }
        Ok(RegionParams { c })
    }

    pub fn radius(&self) -> f64 {
        (self.c * self.c - 1.0).max(0.0).sqrt()
    }

    pub fn is_empty(&self) -> bool {
        self.c <= 1.0
    }

    /// Scale range covered by the region.
    pub fn scale_range(&self) -> (f64, f64) {
        let rho = self.radius();
        (self.c - rho, self.c + rho)
    }
}

/// Composite Gauss–Legendre grid on a radial frequency interval; the
/// inner product is `sum_i weight_i w_i f(w_i) g(w_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub panels: usize,
    pub lo: f64,
    pub hi: f64,
}

impl RadialGrid {
    pub fn new(lo: f64, hi: f64, panels: usize) -> Self {
        let gl = GaussLegendre::new(PANEL_POINTS);
        let (nodes, weights) = gl.composite_nodes(lo, hi, panels);
        RadialGrid {
            nodes,
            weights,
            panels,
            lo,
            hi,
        }
    }

    /// Grid covering the profiles of `exps` up to wavelet index `n_max`,
    /// 128 nodes by default.
    pub fn for_exponents(exps: &MorseExponents, n_max: usize) -> Self {
        let t_hi = 2.0 * exps.r() + 4.0 * n_max as f64 + 40.0;
        Self::new(1e-6, t_hi.powf(1.0 / exps.gamma), 8)
    }

    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .zip(f.iter().zip(g))
            .map(|((w, q), (a, b))| q * w * a * b)
            .sum()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&w| f(w)).collect()
    }

    /// Panel-wise Lagrange interpolation of grid samples.
    pub fn interpolate(&self, samples: &[f64], w: f64) -> f64 {
        if w < self.lo || w > self.hi {
            return 0.0;
        }
        let width = (self.hi - self.lo) / self.panels as f64;
        let p = (((w - self.lo) / width) as usize).min(self.panels - 1);
        let xs = &self.nodes[p * PANEL_POINTS..(p + 1) * PANEL_POINTS];
        let ys = &samples[p * PANEL_POINTS..(p + 1) * PANEL_POINTS];
        let mut sum = 0.0;
        for j in 0..PANEL_POINTS {
            let mut l = 1.0;
            for m in 0..PANEL_POINTS {
                if m != j {
                    l *= (w - xs[m]) / (xs[j] - xs[m]);
                }
            }
            sum += l * ys[j];
        }
        sum
    }
}

/// Quadrature resolution for `operator_apply`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorQuadrature {
    /// Multiplies the automatically chosen panel counts.
    pub refine: f64,
}

impl Default for OperatorQuadrature {
    fn default() -> Self {
        OperatorQuadrature { refine: 1.0 }
    }
}

/// Applies the operator once at fixed resolution; output on `grid`.
fn apply_level(
    g: &(dyn Fn(f64) -> f64 + Sync),
    grid: &RadialGrid,
    region: &RegionParams,
    exps: &MorseExponents,
    refine: f64,
) -> Vec<f64> {
    let rho = region.radius();
    if rho == 0.0 {
        return vec![0.0; grid.nodes.len()];
    }
    let gamma = exps.gamma;
    let gl = GaussLegendre::new(PANEL_POINTS);
    // integration in t = w^gamma; the b-integral contributes
    // sin(D b_max)/D with D = t1 - t2, oscillating with period 2pi/b_max
    let t_hi = grid.hi.powf(gamma);
    let t_panels = ((t_hi * rho / 4.0 * refine).ceil() as usize).max((16.0 * refine) as usize);
    let (ts, tw) = gl.composite_nodes(0.0, t_hi, t_panels);
    let w2: Vec<f64> = ts.iter().map(|t| t.powf(1.0 / gamma)).collect();
    // dw = t^(1/gamma - 1)/gamma dt, and the sqrt(w2) G(w2) factor
    let weight2: Vec<f64> = ts
        .iter()
        .zip(&tw)
        .zip(&w2)
        .map(|((&t, &q), &w)| q * t.powf(1.0 / gamma - 1.0) / gamma * w.sqrt() * g(w))
        .collect();
    // a = C - rho cos(s), b_max = rho sin(s), da = rho sin(s) ds
    let a_panels =
        ((2.0 * rho * t_hi / 24.0 * refine).ceil() as usize).max((4.0 * refine) as usize);
    let (ss, sw) = gl.composite_nodes(0.0, PI, a_panels);
    let c_o = c_nought(exps);
    let scale_nodes: Vec<(f64, f64, f64)> = ss
        .iter()
        .zip(&sw)
        .map(|(&s, &q)| {
            let a = region.c - rho * s.cos();
            (a, rho * s.sin(), q * rho * s.sin())
        })
        .filter(|&(a, _, da)| a > 0.0 && da > 0.0)
        .collect();

    // per scale node: V(a^(1/gamma) w2) with the quadrature weights folded
    // in, and the phases of sin(D b_max) = sin(t1 b) cos(t2 b) - cos(t1 b) sin(t2 b)
    #[allow(clippy::type_complexity)]
    let per_scale: Vec<(f64, f64, f64, Vec<f64>, Vec<f64>, Vec<f64>)> = scale_nodes
        .par_iter()
        .map(|&(a, bmax, da)| {
            let sa = a.powf(1.0 / gamma);
            let q: Vec<f64> = w2
                .iter()
                .zip(&weight2)
                .map(|(&w, &q)| q * exps.v(sa * w))
                .collect();
            let (sin, cos): (Vec<f64>, Vec<f64>) = ts.iter().map(|&t| (t * bmax).sin_cos()).unzip();
            (sa, bmax, 2.0 * sa / (a * a) * da, q, sin, cos)
        })
        .collect();

    grid.nodes
        .par_iter()
        .map(|&w1| {
            let t1 = w1.powf(gamma);
            let mut total = 0.0;
            for (sa, bmax, pref, q, sin2, cos2) in &per_scale {
                let v1 = exps.v(sa * w1);
                if v1 == 0.0 {
                    continue;
                }
                let (s1, c1) = (t1 * bmax).sin_cos();
                let mut inner = 0.0;
                for j in 0..ts.len() {
                    let d = t1 - ts[j];
                    let sinc = if (d * bmax).abs() < 1e-3 {
                        bmax * (1.0 - (d * bmax).powi(2) / 6.0)
                    } else {
                        (s1 * cos2[j] - c1 * sin2[j]) / d
                    };
                    inner += q[j] * sinc;
                }
                total += pref * v1 * inner;
            }
            c_o * total / w1.sqrt()
        })
        .collect()
}

/// Applies the localisation operator of `region` to the radial function
/// `g`, returning samples on `grid`.
pub fn operator_apply_fn(
    g: &(dyn Fn(f64) -> f64 + Sync),
    grid: &RadialGrid,
    region: &RegionParams,
    exps: &MorseExponents,
    quad: OperatorQuadrature,
) -> Result<Vec<f64>> {
    let fine = apply_level(g, grid, region, exps, quad.refine);
    let coarse = apply_level(g, grid, region, exps, quad.refine * 0.75);
    let diff: Vec<f64> = fine.iter().zip(&coarse).map(|(a, b)| a - b).collect();
    let norm = grid.inner(&fine, &fine).sqrt();
    let err = grid.inner(&diff, &diff).sqrt();
    let scale = norm.max(grid.inner(&grid.sample(g), &grid.sample(g)).sqrt());
    if scale > 0.0 && err > QUAD_TOL * scale {
        return Err(Error::QuadratureFailure {
            estimate: err,
            value: norm,
        });
    }
    Ok(fine)
}

/// Applies the operator to samples of a radial function given on `grid`.
pub fn operator_apply(
    samples: &[f64],
    grid: &RadialGrid,
    region: &RegionParams,
    exps: &MorseExponents,
) -> Result<Vec<f64>> {
    if samples.len() != grid.nodes.len() {
        return Err(Error::domain(
            "validator",
            "sample count does not match the radial grid",
        ));
    }
    let g = |w: f64| grid.interpolate(samples, w);
    operator_apply_fn(&g, grid, region, exps, OperatorQuadrature::default())
}

/// Eigenrelation check for wavelet `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorCheckReport {
    pub n: usize,
    pub c: f64,
    pub lambda_formula: f64,
    pub lambda_numeric: f64,
    pub residual: f64,
    pub c0_ratio: f64,
}

/// `|P G - lambda G| / |G|` for the eigenfunction `n`, with `lambda` from
/// the closed form.
pub fn eigenrelation_residual(
    n: usize,
    region: &RegionParams,
    exps: &MorseExponents,
) -> Result<OperatorCheckReport> {
    let mut report = eigenrelation_only(n, region, exps)?;
    report.c0_ratio = identity_constant_check(exps.beta, exps.gamma)?;
    Ok(report)
}

/// As `eigenrelation_residual` without the identity-constant check.
pub fn eigenrelation_only(
    n: usize,
    region: &RegionParams,
    exps: &MorseExponents,
) -> Result<OperatorCheckReport> {
    let grid = RadialGrid::for_exponents(exps, n);
    let g = |w: f64| exps.eigenfunction(n, w);
    let gs = grid.sample(g);
    let pg = operator_apply_fn(&g, &grid, region, exps, OperatorQuadrature::default())?;
    let lambda = eigenvalue(n, exps.r(), region.c)?.lambda;
    let gg = grid.inner(&gs, &gs);
    let lambda_numeric = grid.inner(&pg, &gs) / gg;
    let diff: Vec<f64> = pg.iter().zip(&gs).map(|(p, g)| p - lambda * g).collect();
    Ok(OperatorCheckReport {
        n,
        c: region.c,
        lambda_formula: lambda,
        lambda_numeric,
        residual: (grid.inner(&diff, &diff) / gg).sqrt(),
        c0_ratio: f64::NAN,
    })
}

/// Ratio of the unbounded-region operator output to the test spectrum,
/// divided by the expected `1 / C_o`, for each translation cut-off in
/// `b_max`; equals 1 when the normalising constant is right.
pub fn identity_constant_ratio(
    exps: &MorseExponents,
    g: &(dyn Fn(f64) -> f64 + Sync),
    w1: f64,
    b_max: &[f64],
) -> Vec<f64> {
    let gamma = exps.gamma;
    let r = exps.r();
    let gl = GaussLegendre::new(PANEL_POINTS);
    let t_hi = 60.0;
    let b_top = b_max.iter().copied().fold(0.0, f64::max);
    let panels = ((t_hi * b_top / 2.5).ceil() as usize).max(64);
    let (ts, tw) = gl.composite_nodes(0.0, t_hi, panels);
    let ga = GaussLegendre::new(64);
    let t1 = w1.powf(gamma);
    // smooth part of the integrand at each node
    let smooth: Vec<f64> = ts
        .par_iter()
        .zip(&tw)
        .map(|(&t, &q)| {
            if t == 0.0 {
                return 0.0;
            }
            let w2 = t.powf(1.0 / gamma);
            let jac = t.powf(1.0 / gamma - 1.0) / gamma;
            // the scale integrand decays like exp(-a (t1 + t2))
            let a_hi = (r + 60.0) / (t1 + t);
            let a_int = ga.integrate(
                |a: f64| {
                    let sa = a.powf(1.0 / gamma);
                    2.0 * sa / (a * a) * exps.v(sa * w1) * exps.v(sa * w2)
                },
                0.0,
                a_hi,
            );
            q * jac * a_int * (w2 / w1).sqrt() * g(w2)
        })
        .collect();
    let norm = g(w1) * 2.0 * (2.0 * PI).powi(2) / (r - 1.0);
    b_max
        .iter()
        .map(|&b| {
            let total: f64 = ts
                .iter()
                .zip(&smooth)
                .map(|(&t, &f)| {
                    let d = t1 - t;
                    let sinc = if d.abs() < 1e-14 {
                        b
                    } else {
                        (d * b).sin() / d
                    };
                    f * sinc
                })
                .sum();
            total / norm
        })
        .collect()
}

/// Checks the normalising constant on the eigenfunction `n = 0`; the tail
/// of the truncated translation integral is bounded by comparing two
/// truncations.
pub fn identity_constant_check(beta: f64, gamma: f64) -> Result<f64> {
    let exps = MorseExponents::new(beta, gamma)?;
    if exps.r() - 1.0 < 1e-6 {
        return Err(Error::domain(
            "validator",
            "r is too close to 1: C_o degenerates",
        ));
    }
    let w1 = 1.05 * (beta / gamma).powf(1.0 / gamma);
    let g = |w: f64| exps.eigenfunction(0, w);
    let ratios = identity_constant_ratio(&exps, &g, w1, &[100.0, 200.0]);
    let (r1, r2) = (ratios[0], ratios[1]);
    if (r1 - r2).abs() > 1e-4 {
        return Err(Error::QuadratureFailure {
            estimate: (r1 - r2).abs(),
            value: r2,
        });
    }
    Ok(r2)
}
