//! Multi-wavelet averaged estimates of local energy, orientation, phase and
//! amplitude, ridge extraction and delta-method variances.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathcore::quaternion::{fold_half_pi, quat_polar};
use crate::transform::{assemble_point, CoefficientSet, Xi};
use crate::wavelets::MorseFamily;

/// Riesz energy below this fraction of the total energy is treated as no
/// orientation.
pub const ORIENTATION_TOL: f64 = 1e-12;
/// Relative tolerance for the equal-magnitude branch of `theta_max_est`.
pub const EQUAL_TOL: f64 = 1e-9;
/// Default minimum wavelet gain, relative to its peak, for amplitude
/// estimates.
pub const DEFAULT_MIN_GAIN: f64 = 0.05;

/// Averaged planes for one scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AveragedPlanes {
    pub w_e: Vec<f64>,
    pub w_1: Vec<f64>,
    pub w_2: Vec<f64>,
    pub s_e: Vec<f64>,
    pub s_1: Vec<f64>,
    pub s_2: Vec<f64>,
    pub s_plus: Vec<f64>,
    pub c_12: Vec<f64>,
    /// The n = 0 triple, used by the phase estimate.
    pub first: [Vec<f64>; 3],
}

/// Wavelet-averaged coefficients, scalograms and covariations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AveragedCoefficients {
    pub count: usize,
    pub n1: usize,
    pub n2: usize,
    pub d1: f64,
    pub d2: f64,
    pub scales: Vec<f64>,
    pub planes: Vec<AveragedPlanes>,
    pub family: MorseFamily,
}

/// Averaged quantities at one point, rotated to the orientation of the
/// requested `Xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AveragedPoint {
    pub a: f64,
    pub w_e: f64,
    pub w_1: f64,
    pub w_2: f64,
    pub s_e: f64,
    pub s_1: f64,
    pub s_2: f64,
    pub s_plus: f64,
    pub c_12: f64,
    pub first: [f64; 3],
    pub count: usize,
}

pub fn average(coeffs: &CoefficientSet) -> AveragedCoefficients {
    average_first(coeffs, coeffs.family.count())
}

/// Averages over the first `count` wavelets only.
pub fn average_first(coeffs: &CoefficientSet, count: usize) -> AveragedCoefficients {
    let count = count.clamp(1, coeffs.family.count());
    let len = coeffs.n1 * coeffs.n2;
    let inv = 1.0 / count as f64;
    let planes = (0..coeffs.scales.len())
        .into_par_iter()
        .map(|k| {
            let mut p = AveragedPlanes {
                w_e: vec![0.0; len],
                w_1: vec![0.0; len],
                w_2: vec![0.0; len],
                s_e: vec![0.0; len],
                s_1: vec![0.0; len],
                s_2: vec![0.0; len],
                s_plus: vec![0.0; len],
                c_12: vec![0.0; len],
                first: [
                    coeffs.get(0, k).even.clone(),
                    coeffs.get(0, k).r1.clone(),
                    coeffs.get(0, k).r2.clone(),
                ],
            };
            for n in 0..count {
                let t = coeffs.get(n, k);
                for i in 0..len {
                    let (e, u, v) = (t.even[i], t.r1[i], t.r2[i]);
                    p.w_e[i] += e * inv;
                    p.w_1[i] += u * inv;
                    p.w_2[i] += v * inv;
                    p.s_e[i] += e * e * inv;
                    p.s_1[i] += u * u * inv;
                    p.s_2[i] += v * v * inv;
                    p.c_12[i] += u * v * inv;
                }
            }
            for i in 0..len {
                p.s_plus[i] = p.s_e[i] + p.s_1[i] + p.s_2[i];
            }
            p
        })
        .collect();
    AveragedCoefficients {
        count,
        n1: coeffs.n1,
        n2: coeffs.n2,
        d1: coeffs.d1,
        d2: coeffs.d2,
        scales: coeffs.scales.clone(),
        planes,
        family: coeffs.family.clone(),
    }
}

impl AveragedCoefficients {
    /// Scale index and flat grid index of `at`.
    pub fn locate(&self, at: &Xi) -> Result<(usize, usize)> {
        let k = self
            .scales
            .iter()
            .position(|&s| (s.ln() - at.a.ln()).abs() < 1e-9)
            .ok_or_else(|| {
                Error::domain("estimators", format!("scale {} is not on the ladder", at.a))
            })?;
        let i1 = (at.b1 / self.d1).round();
        let i2 = (at.b2 / self.d2).round();
        if !(i1 >= 0.0 && i2 >= 0.0 && (i1 as usize) < self.n1 && (i2 as usize) < self.n2) {
            return Err(Error::domain(
                "estimators",
                format!("translation ({}, {}) lies outside the grid", at.b1, at.b2),
            ));
        }
        Ok((k, i1 as usize * self.n2 + i2 as usize))
    }

    /// Averaged quantities at scale index `k`, grid index `i`, rotated to
    /// orientation `theta`.
    pub fn point_at(&self, k: usize, i: usize, theta: f64) -> AveragedPoint {
        let p = &self.planes[k];
        let (s, c) = theta.sin_cos();
        let (s1, s2, c12) = (p.s_1[i], p.s_2[i], p.c_12[i]);
        let (f1, f2) = (p.first[1][i], p.first[2][i]);
        AveragedPoint {
            a: self.scales[k],
            w_e: p.w_e[i],
            w_1: c * p.w_1[i] + s * p.w_2[i],
            w_2: -s * p.w_1[i] + c * p.w_2[i],
            s_e: p.s_e[i],
            s_1: c * c * s1 + 2.0 * c * s * c12 + s * s * s2,
            s_2: s * s * s1 - 2.0 * c * s * c12 + c * c * s2,
            s_plus: p.s_plus[i],
            c_12: c * s * (s2 - s1) + (c * c - s * s) * c12,
            first: [p.first[0][i], c * f1 + s * f2, -s * f1 + c * f2],
            count: self.count,
        }
    }

    pub fn point(&self, at: &Xi) -> Result<AveragedPoint> {
        let (k, i) = self.locate(at)?;
        Ok(self.point_at(k, i, at.theta))
    }
}

/// Orientation maximising `S_1(theta) - S_2(theta)`, the averaged energy
/// of the first Riesz response minus the second. For a line this is the
/// direction of its normal.
pub fn theta_max_at(p: &AveragedPoint) -> Result<f64> {
    let riesz = p.s_1 + p.s_2;
    if riesz <= 0.0 || riesz <= ORIENTATION_TOL * p.s_plus {
        return Err(Error::DegenerateOrientation(riesz));
    }
    let diff = p.s_1 - p.s_2;
    if diff.abs() <= EQUAL_TOL * riesz {
        // equal magnitudes: the maximiser is pi/4 for positively correlated
        // responses, otherwise the conventional 3pi/4
        if p.c_12 > EQUAL_TOL * riesz {
            return Ok(PI / 4.0);
        }
        return Ok(3.0 * PI / 4.0);
    }
    Ok(fold_half_pi(0.5 * (2.0 * p.c_12).atan2(diff)))
}

pub fn theta_max_est(avg: &AveragedCoefficients, at: &Xi) -> Result<f64> {
    theta_max_at(&avg.point(at)?)
}

/// Orientation from the averaged Riesz pair, in `(-pi/2, pi/2]`.
pub fn orientation_at(p: &AveragedPoint) -> Result<f64> {
    let riesz = p.s_1 + p.s_2;
    let mean_sq = p.w_1 * p.w_1 + p.w_2 * p.w_2;
    if riesz <= ORIENTATION_TOL * p.s_plus || mean_sq == 0.0 {
        return Err(Error::DegenerateOrientation(riesz));
    }
    if p.w_1 == 0.0 {
        return Ok(PI / 2.0);
    }
    Ok(fold_half_pi((p.w_2 / p.w_1).atan()))
}

pub fn orientation_est(avg: &AveragedCoefficients, at: &Xi) -> Result<f64> {
    orientation_at(&avg.point(at)?)
}

/// Phase of the first wavelet's assembled quaternion, in cycles.
pub fn phase_at(p: &AveragedPoint) -> Result<f64> {
    let [e, u, v] = p.first;
    match quat_polar(assemble_point(e, u, v)) {
        Ok(q) => Ok(q.phase),
        Err(_) => Err(Error::ZeroEnergy),
    }
}

pub fn phase_est(coeffs: &CoefficientSet, at: &Xi) -> Result<f64> {
    let avg = average_first(coeffs, 1);
    phase_at(&avg.point(at)?)
}

/// Mean squared wavelet gain `(1/N) sum_n Psi_n(f)^2`.
pub fn mean_gain_sq(family: &MorseFamily, count: usize, f: f64) -> f64 {
    (0..count).map(|n| family.eval(n, f).powi(2)).sum::<f64>() / count as f64
}

/// Peak of `mean_gain_sq` over frequency.
pub fn peak_gain_sq(family: &MorseFamily, count: usize) -> f64 {
    let hi = (0..count)
        .map(|n| family.f_max(n).unwrap_or(0.0))
        .fold(0.0, f64::max)
        * 4.0;
    (1..=4096)
        .map(|k| mean_gain_sq(family, count, hi * k as f64 / 4096.0))
        .fold(0.0, f64::max)
}

/// Amplitude from the averaged energy, for a local frequency
/// `local_freq` (cycles per unit length).
pub fn amplitude_at(
    family: &MorseFamily,
    p: &AveragedPoint,
    local_freq: f64,
    min_gain: f64,
) -> Result<f64> {
    let g2 = mean_gain_sq(family, p.count, p.a * local_freq);
    let rel = (g2 / peak_gain_sq(family, p.count)).sqrt();
    if !(rel >= min_gain) {
        return Err(Error::OffRidge(rel));
    }
    Ok((p.s_plus / (p.a * p.a * g2)).sqrt())
}

pub fn amplitude_est(avg: &AveragedCoefficients, at: &Xi, local_freq: f64) -> Result<f64> {
    amplitude_at(&avg.family, &avg.point(at)?, local_freq, DEFAULT_MIN_GAIN)
}

/// Local frequency (cycles per unit length) from a finite-difference
/// gradient of the first wavelet's phase; an alternative to `f_max / a`.
pub fn phase_gradient_freq(avg: &AveragedCoefficients, at: &Xi) -> Result<f64> {
    let (k, i) = avg.locate(at)?;
    let (i1, i2) = (i / avg.n2, i % avg.n2);
    let phase = |j1: usize, j2: usize| -> Result<(f64, Option<f64>)> {
        let p = avg.point_at(k, j1 * avg.n2 + j2, at.theta);
        let [e, u, v] = p.first;
        let q = quat_polar(assemble_point(e, u, v)).map_err(|_| Error::ZeroEnergy)?;
        Ok((q.phase, (!q.degenerate).then_some(q.eta)))
    };
    let wrap = |d: f64| d - d.round();
    let (ip, im) = ((i1 + 1) % avg.n1, (i1 + avg.n1 - 1) % avg.n1);
    let (jp, jm) = ((i2 + 1) % avg.n2, (i2 + avg.n2 - 1) % avg.n2);
    let g1 = wrap(phase(ip, i2)?.0 - phase(im, i2)?.0) / (2.0 * avg.d1);
    let g2 = wrap(phase(i1, jp)?.0 - phase(i1, jm)?.0) / (2.0 * avg.d2);
    Ok(g1.hypot(g2))
}

/// Sample on a ridge of the first wavelet's scalogram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidgeSample {
    pub b1: f64,
    pub b2: f64,
    /// Refined scale.
    pub a: f64,
    /// Ladder index of the sampled maximum.
    pub scale_index: usize,
    pub nu: Option<f64>,
    pub phase: f64,
    pub amplitude: f64,
    pub s_plus: f64,
    /// Connected ridge sheet this sample belongs to.
    pub sheet: usize,
}

/// Ridge extraction settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidgeOptions {
    /// Ridge maxima weaker than this fraction of the strongest one are
    /// discarded.
    pub min_rel_energy: f64,
    /// Energy ratio (dB) allowed between linked neighbours.
    pub link_db: f64,
}

impl Default for RidgeOptions {
    fn default() -> Self {
        RidgeOptions {
            min_rel_energy: 1e-3,
            link_db: 3.0,
        }
    }
}

/// Points where the first wavelet's energy, corrected by `1/a^2`, peaks
/// along scale. The corrected energy is `|g| Psi(a f)^2` for a single
/// component, so its maximum sits at `a f = f_max`.
pub fn ridge_extract(coeffs: &CoefficientSet, opts: &RidgeOptions) -> Vec<RidgeSample> {
    let avg = average(coeffs);
    ridge_extract_averaged(&avg, opts)
}

pub fn ridge_extract_averaged(avg: &AveragedCoefficients, opts: &RidgeOptions) -> Vec<RidgeSample> {
    let scales = &avg.scales;
    let nk = scales.len();
    if nk < 3 {
        return Vec::new();
    }
    let len = avg.n1 * avg.n2;
    let energy = |k: usize, i: usize| {
        let f = &avg.planes[k].first;
        (f[0][i].powi(2) + f[1][i].powi(2) + f[2][i].powi(2)) / (scales[k] * scales[k])
    };
    let peak = (0..nk)
        .flat_map(|k| (0..len).map(move |i| (k, i)))
        .map(|(k, i)| energy(k, i))
        .fold(0.0, f64::max);
    if peak <= 0.0 {
        return Vec::new();
    }
    let fmax0 = avg.family.f_max(0).unwrap_or(0.0);
    let mut samples: Vec<RidgeSample> = (0..len)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut out = Vec::new();
            for k in 1..nk - 1 {
                let (em, e0, ep) = (energy(k - 1, i), energy(k, i), energy(k + 1, i));
                if !(e0 > em && e0 >= ep && e0 >= opts.min_rel_energy * peak) {
                    continue;
                }
                // quadratic in log scale through the log energies
                let (xm, x0, xp) = (scales[k - 1].ln(), scales[k].ln(), scales[k + 1].ln());
                let (ym, y0, yp) = (em.ln(), e0.ln(), ep.ln());
                let a = refine_vertex(xm, x0, xp, ym, y0, yp).exp();
                let p = avg.point_at(k, i, 0.0);
                let amplitude = amplitude_at(&avg.family, &p, fmax0 / a, 0.0).unwrap_or(0.0);
                out.push(RidgeSample {
                    b1: (i / avg.n2) as f64 * avg.d1,
                    b2: (i % avg.n2) as f64 * avg.d2,
                    a,
                    scale_index: k,
                    nu: orientation_at(&p).ok(),
                    phase: phase_at(&p).unwrap_or(0.0),
                    amplitude,
                    s_plus: p.s_plus,
                    sheet: 0,
                });
            }
            out
        })
        .collect();
    link_sheets(&mut samples, avg, opts.link_db);
    samples
}

fn refine_vertex(xm: f64, x0: f64, xp: f64, ym: f64, y0: f64, yp: f64) -> f64 {
    let d1 = (y0 - ym) / (x0 - xm);
    let d2 = (yp - y0) / (xp - x0);
    let curv = (d2 - d1) / (0.5 * (xp - xm));
    if !(curv < 0.0) || !curv.is_finite() {
        return x0;
    }
    // vertex of the parabola through the three points
    let mid_l = 0.5 * (xm + x0);
    let x = mid_l - d1 / curv;
    x.clamp(xm, xp)
}

/// Union-find linking of ridge samples that are spatial neighbours, lie
/// within one ladder step of each other and differ by at most `link_db`
/// in energy. Sheets are numbered by decreasing size.
fn link_sheets(samples: &mut [RidgeSample], avg: &AveragedCoefficients, link_db: f64) {
    let n = samples.len();
    if n == 0 {
        return;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let n2 = avg.n2;
    let grid = |s: &RidgeSample| {
        (
            (s.b1 / avg.d1).round() as usize,
            (s.b2 / avg.d2).round() as usize,
        )
    };
    let mut by_pixel: std::collections::HashMap<usize, Vec<usize>> = Default::default();
    for (idx, s) in samples.iter().enumerate() {
        let (i1, i2) = grid(s);
        by_pixel.entry(i1 * n2 + i2).or_default().push(idx);
    }
    let ratio = 10f64.powf(link_db / 10.0);
    for idx in 0..n {
        let (i1, i2) = grid(&samples[idx]);
        for d1 in -1i64..=1 {
            for d2 in -1i64..=1 {
                let (j1, j2) = (i1 as i64 + d1, i2 as i64 + d2);
                if j1 < 0 || j2 < 0 || j1 >= avg.n1 as i64 || j2 >= avg.n2 as i64 {
                    continue;
                }
                let Some(list) = by_pixel.get(&(j1 as usize * n2 + j2 as usize)) else {
                    continue;
                };
                for &other in list {
                    if other == idx {
                        continue;
                    }
                    let (a, b) = (&samples[idx], &samples[other]);
                    let step = a.scale_index.abs_diff(b.scale_index);
                    let (ea, eb) = (a.s_plus, b.s_plus);
                    if step <= 1 && ea <= ratio * eb && eb <= ratio * ea {
                        let (ra, rb) = (find(&mut parent, idx), find(&mut parent, other));
                        if ra != rb {
                            parent[ra] = rb;
                        }
                    }
                }
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    let mut sizes: std::collections::HashMap<usize, usize> = Default::default();
    for &r in &roots {
        *sizes.entry(r).or_default() += 1;
    }
    let mut order: Vec<(usize, usize)> = sizes.into_iter().collect();
    order.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
    let label: std::collections::HashMap<usize, usize> = order
        .iter()
        .enumerate()
        .map(|(l, &(r, _))| (r, l))
        .collect();
    for (s, r) in samples.iter_mut().zip(roots) {
        s.sheet = label[&r];
    }
}

/// Number of samples in each sheet, largest first.
pub fn sheet_sizes(samples: &[RidgeSample]) -> Vec<usize> {
    let count = samples.iter().map(|s| s.sheet + 1).max().unwrap_or(0);
    let mut sizes = vec![0; count];
    for s in samples {
        sizes[s.sheet] += 1;
    }
    sizes
}

/// Delta-method variances of the estimators under white noise of standard
/// deviation `sigma_eps` (unit sample spacing).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariancePrediction {
    pub var_theta_max: f64,
    /// `sigma^2 / (2N)`: the orientation variance in units of the inverse
    /// averaged Riesz energy.
    pub var_nu: f64,
    /// Orientation variance at this point, `var_nu / (wbar_1^2 + wbar_2^2)`.
    pub var_nu_point: f64,
    pub var_phi: f64,
    pub sigma_eps: f64,
    pub count: usize,
}

pub fn predict_at(sigma_eps: f64, count: usize, p: &AveragedPoint) -> VariancePrediction {
    let s2 = sigma_eps * sigma_eps;
    let nf = count as f64;
    let den = (p.s_1 - p.s_2).powi(2) + 4.0 * p.c_12 * p.c_12;
    let var_theta_max = s2 / nf * 0.5 * (p.s_1 + p.s_2) / den;
    let var_nu = s2 / (2.0 * nf);
    let var_nu_point = var_nu / (p.w_1 * p.w_1 + p.w_2 * p.w_2);
    let [e, u, v] = p.first;
    let s_plus0 = e * e + u * u + v * v;
    let phi = phase_at(p).unwrap_or(0.0);
    let var_phi =
        s2 * (1.0 - 0.5 * (2.0 * PI * phi).cos().powi(2)) / ((2.0 * PI).powi(2) * s_plus0);
    VariancePrediction {
        var_theta_max,
        var_nu,
        var_nu_point,
        var_phi,
        sigma_eps,
        count,
    }
}

pub fn predict_variances(
    sigma_eps: f64,
    count: usize,
    avg: &AveragedCoefficients,
    at: &Xi,
) -> Result<VariancePrediction> {
    Ok(predict_at(sigma_eps, count, &avg.point(at)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::{forward_with, CoefficientTriple, ImageGrid, TransformOptions};
    use proptest::prelude::*;

    fn point(w1: f64, w2: f64) -> AveragedPoint {
        AveragedPoint {
            a: 1.0,
            w_e: 0.0,
            w_1: w1,
            w_2: w2,
            s_e: 0.0,
            s_1: w1 * w1,
            s_2: w2 * w2,
            s_plus: w1 * w1 + w2 * w2,
            c_12: w1 * w2,
            first: [0.0, w1, w2],
            count: 1,
        }
    }

    fn set_from(triples: Vec<CoefficientTriple>, count: usize) -> CoefficientSet {
        let family = MorseFamily::new(8.0, 3.0, count).unwrap();
        let len = triples[0].len();
        let side = (len as f64).sqrt() as usize;
        CoefficientSet {
            family,
            scales: vec![1.5],
            n1: side,
            n2: side,
            d1: 1.0,
            d2: 1.0,
            planes: triples,
            imag_residue: 0.0,
        }
    }

    fn random_triple(seed: u64, len: usize) -> CoefficientTriple {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut v = || {
            (0..len)
                .map(|_| rng.random_range(-1.0..1.0))
                .collect::<Vec<f64>>()
        };
        CoefficientTriple {
            even: v(),
            r1: v(),
            r2: v(),
        }
    }

    #[test]
    fn averaging_identities() {
        let t = random_triple(1, 64);
        let set = set_from(vec![t.clone()], 1);
        let avg = average(&set);
        let p = &avg.planes[0];
        assert_eq!(p.w_e, t.even);
        assert_eq!(p.w_1, t.r1);
        for i in 0..64 {
            assert_eq!(p.s_1[i], t.r1[i] * t.r1[i]);
            assert_eq!(p.c_12[i], t.r1[i] * t.r2[i]);
        }
        let set3 = set_from(
            vec![
                random_triple(2, 64),
                random_triple(3, 64),
                random_triple(4, 64),
            ],
            3,
        );
        let avg3 = average(&set3);
        let i = 17;
        let want: f64 = (0..3).map(|n| set3.get(n, 0).r2[i]).sum::<f64>() / 3.0;
        assert!((avg3.planes[0].w_2[i] - want).abs() < 1e-15);
    }

    #[test]
    fn rotated_point_matches_rotated_planes() {
        let set = set_from(vec![random_triple(5, 64), random_triple(6, 64)], 2);
        let avg = average(&set);
        let theta = 0.83;
        let rot: Vec<CoefficientTriple> = set
            .planes
            .iter()
            .map(|t| crate::transform::rotate_coeffs(t, theta))
            .collect();
        let avg_r = average(&set_from(rot, 2));
        for i in [0, 9, 40] {
            let p = avg.point_at(0, i, theta);
            let q = avg_r.point_at(0, i, 0.0);
            for (x, y) in [
                (p.w_1, q.w_1),
                (p.w_2, q.w_2),
                (p.s_1, q.s_1),
                (p.s_2, q.s_2),
                (p.c_12, q.c_12),
                (p.first[1], q.first[1]),
            ] {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn theta_max_branches() {
        // the maximiser of S1 - S2 follows the dominant response
        assert!((theta_max_at(&point(0.0, 2.0)).unwrap() - PI / 2.0).abs() < 1e-15);
        assert_eq!(theta_max_at(&point(2.0, 0.0)).unwrap(), 0.0);
        let t = theta_max_at(&point(1.0, 0.4)).unwrap();
        assert!(t > -PI / 4.0 && t < PI / 4.0);
        let t = theta_max_at(&point(0.3, -1.0)).unwrap();
        assert!(!(-PI / 4.0..=PI / 4.0).contains(&t));
        assert_eq!(theta_max_at(&point(1.0, -1.0)).unwrap(), 3.0 * PI / 4.0);
        assert!((theta_max_at(&point(1.0, 1.0)).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!(matches!(
            theta_max_at(&point(0.0, 0.0)),
            Err(Error::DegenerateOrientation(_))
        ));
    }

    proptest! {
        #[test]
        fn theta_max_maximises_objective(w1 in -3.0f64..3.0, w2 in -3.0f64..3.0) {
            prop_assume!(w1.abs() + w2.abs() > 1e-3);
            prop_assume!((w1.abs() - w2.abs()).abs() > 1e-6);
            let p = point(w1, w2);
            let t = theta_max_at(&p).unwrap();
            let obj = |th: f64| {
                let (s, c) = th.sin_cos();
                (c * w1 + s * w2).powi(2) - (-s * w1 + c * w2).powi(2)
            };
            for k in 0..180 {
                prop_assert!(obj(t) >= obj(k as f64 * PI / 180.0) - 1e-9);
            }
        }

        #[test]
        fn coherent_wavelets_share_theta_max(g in proptest::collection::vec(0.1f64..2.0, 3), ang in -1.5f64..1.5) {
            // responses proportional to a common direction
            let (c, s) = (ang.cos(), ang.sin());
            let n = g.len() as f64;
            let s1 = g.iter().map(|x| (x * c).powi(2)).sum::<f64>() / n;
            let s2 = g.iter().map(|x| (x * s).powi(2)).sum::<f64>() / n;
            let c12 = g.iter().map(|x| x * x * c * s).sum::<f64>() / n;
            let mut p = point(c, s);
            p.s_1 = s1; p.s_2 = s2; p.c_12 = c12; p.s_plus = s1 + s2; p.count = 3;
            let t = theta_max_at(&p).unwrap();
            let single = theta_max_at(&point(g[0] * c, g[0] * s)).unwrap();
            let d = (t - single).rem_euclid(PI);
            prop_assert!(d.min(PI - d) < 1e-9);
        }

        #[test]
        fn orientation_scale_invariant(w1 in -3.0f64..3.0, w2 in -3.0f64..3.0, k in 0.01f64..100.0) {
            prop_assume!(w1.abs() > 1e-3);
            let a = orientation_at(&point(w1, w2)).unwrap();
            let b = orientation_at(&point(k * w1, k * w2)).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn orientation_rules() {
        assert_eq!(orientation_at(&point(1.5, 0.0)).unwrap(), 0.0);
        assert!((orientation_at(&point(-1.0, 1.0)).unwrap() + PI / 4.0).abs() < 1e-15);
        assert!(orientation_at(&point(0.0, 0.0)).is_err());
        // rotating the frame shifts the estimate by -theta
        let set = set_from(vec![random_triple(7, 64)], 1);
        let avg = average(&set);
        for i in [3, 30] {
            let a0 = orientation_at(&avg.point_at(0, i, 0.0)).unwrap();
            let a1 = orientation_at(&avg.point_at(0, i, 0.4)).unwrap();
            let d = (a1 - (a0 - 0.4)).rem_euclid(PI);
            assert!(d.min(PI - d) < 1e-12);
        }
    }

    #[test]
    fn phase_rules() {
        let mut p = point(0.0, 0.0);
        p.first = [2.0, 0.0, 0.0];
        assert_eq!(phase_at(&p).unwrap(), 0.0);
        // odd response along the first Riesz axis: assembled i component
        // is -w1, so w1 < 0 is a quarter cycle
        p.first = [0.0, -1.0, 0.0];
        assert!((phase_at(&p).unwrap() - 0.25).abs() < 1e-15);
        // pure second-axis response: sign follows the j component -w2
        p.first = [0.0, 0.0, 1.0];
        assert!((phase_at(&p).unwrap() + 0.25).abs() < 1e-15);
        p.first = [0.0, 0.0, 0.0];
        assert_eq!(phase_at(&p), Err(Error::ZeroEnergy));
    }

    fn plane_wave_setup(count: usize, a: f64) -> (MorseFamily, CoefficientSet, f64, f64, f64) {
        let family = MorseFamily::new(8.0, 3.0, count).unwrap();
        let f0 = family.f_max(0).unwrap() / a;
        let eta = PI / 5.0;
        let (amp, th) = (1.2, 0.7);
        let g = ImageGrid::from_fn(128, 128, 1.0, 1.0, |x1, x2| {
            amp * (2.0 * PI * f0 * (x1 * eta.cos() + x2 * eta.sin()) + th).cos()
        })
        .unwrap();
        let c = forward_with(&g, &family, &[a], TransformOptions::default()).unwrap();
        (family, c, f0, eta, th)
    }

    #[test]
    fn plane_wave_estimates() {
        let a = 1.7;
        for count in [1, 3] {
            let (_, c, f0, eta, th) = plane_wave_setup(count, a);
            let avg = average(&c);
            for &(b1, b2) in &[(64.0, 64.0), (50.0, 70.0), (80.0, 40.0)] {
                let at = Xi {
                    a,
                    theta: 0.0,
                    b1,
                    b2,
                };
                let nu = orientation_est(&avg, &at).unwrap();
                assert!((nu - eta).abs() < 1e-3, "{nu}");
                let phi = phase_est(&c, &at).unwrap();
                let want =
                    (f0 * (b1 * eta.cos() + b2 * eta.sin()) + th / (2.0 * PI)).rem_euclid(1.0);
                let d = (phi - want).rem_euclid(1.0);
                assert!(d.min(1.0 - d) < 1e-3, "{phi} vs {want}");
                let amp = amplitude_est(&avg, &at, f0).unwrap();
                assert!((amp - 1.2).abs() < 0.012, "{amp}");
                // off by a factor two in scale
                assert!(matches!(
                    amplitude_est(&avg, &at, 2.0 * f0),
                    Err(Error::OffRidge(_))
                ));
                let g = phase_gradient_freq(&avg, &at).unwrap();
                assert!((g - f0).abs() < 2e-3 * f0, "{g} vs {f0}");
            }
        }
    }

    #[test]
    fn zero_image_amplitude_and_ridge() {
        let family = MorseFamily::new(8.0, 3.0, 1).unwrap();
        let g = ImageGrid::zeros(32, 32, 1.0, 1.0).unwrap();
        let c = forward_with(&g, &family, &[1.0, 1.5, 2.0], TransformOptions::default()).unwrap();
        let avg = average(&c);
        let at = Xi {
            a: 1.5,
            theta: 0.0,
            b1: 3.0,
            b2: 4.0,
        };
        let f = family.f_max(0).unwrap() / 1.5;
        assert_eq!(amplitude_est(&avg, &at, f).unwrap(), 0.0);
        assert!(ridge_extract(&c, &RidgeOptions::default()).is_empty());
        assert!(avg.locate(&Xi { a: 1.7, ..at }).is_err());
        assert!(avg.locate(&Xi { b1: 40.0, ..at }).is_err());
    }

    #[test]
    fn plane_wave_ridge() {
        let family = MorseFamily::new(8.0, 3.0, 1).unwrap();
        // bin-aligned: (6, 8) cycles over 64 samples
        let f0 = 10.0 / 64.0;
        let g = ImageGrid::from_fn(64, 64, 1.0, 1.0, |x1, x2| {
            (2.0 * PI * f0 * (0.6 * x1 + 0.8 * x2)).cos()
        })
        .unwrap();
        let scales: Vec<f64> = (0..16).map(|k| 1.0 * 1.08f64.powi(k)).collect();
        let c = forward_with(&g, &family, &scales, TransformOptions::default()).unwrap();
        let ridge = ridge_extract(&c, &RidgeOptions::default());
        assert_eq!(ridge.len(), 64 * 64);
        let want = family.f_max(0).unwrap() / f0;
        for r in &ridge {
            assert!((r.a / want - 1.0).abs() < 2e-3, "{} vs {want}", r.a);
            assert!((r.amplitude - 1.0).abs() < 1e-2);
            // the Riesz pair vanishes where the wave's phase is a multiple of
            // half a cycle
            if let Some(nu) = r.nu {
                assert!((nu - 0.8f64.atan2(0.6)).abs() < 1e-6);
            }
        }
        assert!(ridge.iter().filter(|r| r.nu.is_none()).count() < 64 * 64 / 8);
        assert_eq!(sheet_sizes(&ridge), vec![64 * 64]);
    }

    #[test]
    fn variance_formulas() {
        let mut p = point(0.6, 0.2);
        p.first = [0.0, 1.0, 0.0];
        let v1 = predict_at(0.1, 1, &p);
        let v3 = predict_at(0.1, 3, &p);
        assert!((v3.var_theta_max * 3.0 - v1.var_theta_max).abs() < 1e-18);
        assert!((v1.var_nu - 0.005).abs() < 1e-18);
        assert!((v3.var_nu - 0.01 / 6.0).abs() < 1e-18);
        // phase at a quarter cycle, cos(2 pi phi) = 0
        assert!((phase_at(&p).unwrap() + 0.25).abs() < 1e-15);
        let want = 0.01 / ((2.0 * PI).powi(2) * 1.0);
        assert!((v1.var_phi - want).abs() < 1e-18);
    }
}
