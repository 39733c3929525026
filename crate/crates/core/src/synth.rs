//! Test images, white-noise fields and the Monte-Carlo check of the noise
//! covariance of the coefficient vector.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transform::{forward_with, ImageGrid, ScaleLadder, TransformOptions};
use crate::wavelets::MorseFamily;

/// Closest distance at which an inverse-distance term is evaluated; closer
/// pixels take the value half a pixel away.
pub const CLIP_DISTANCE: f64 = 0.5;
/// Noise level of the singularity test image.
pub const SIGNAL1_SIGMA: f64 = 0.2;
/// Smallest replicate count accepted by `mc_covariance`.
pub const MIN_REPLICATES: usize = 1000;

/// Shape and spacing of a sampling grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridShape {
    pub n1: usize,
    pub n2: usize,
    pub d1: f64,
    pub d2: f64,
}

impl GridShape {
    pub fn square(n: usize) -> Self {
        GridShape {
            n1: n,
            n2: n,
            d1: 1.0,
            d2: 1.0,
        }
    }

    pub fn of(grid: &ImageGrid) -> Self {
        GridShape {
            n1: grid.n1,
            n2: grid.n2,
            d1: grid.d1,
            d2: grid.d2,
        }
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Result<ImageGrid> {
        ImageGrid::from_fn(self.n1, self.n2, self.d1, self.d2, f)
    }
}

/// I.i.d. zero-mean Gaussian pixel noise. Replicate `k` draws from the
/// ChaCha20 stream `k` keyed by `seed`, with standard normals from the
/// ziggurat sampler, so every field is reproducible on its own.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma_eps: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(sigma_eps: f64, seed: u64) -> Result<Self> {
        if !(sigma_eps >= 0.0 && sigma_eps.is_finite()) {
            return Err(Error::domain(
                "synth",
                format!("noise level must be >= 0 (got {sigma_eps})"),
            ));
        }
        Ok(NoiseModel { sigma_eps, seed })
    }

    pub fn silent() -> Self {
        NoiseModel {
            sigma_eps: 0.0,
            seed: 0,
        }
    }

    /// Unit-variance field for replicate `stream`.
    pub fn standard_field(&self, len: usize, stream: u64) -> Vec<f64> {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        StandardNormal.sample_iter(&mut rng).take(len).collect()
    }

    /// Field scaled by `sigma_eps`.
    pub fn field(&self, len: usize, stream: u64) -> Vec<f64> {
        if self.sigma_eps == 0.0 {
            return vec![0.0; len];
        }
        let mut v = self.standard_field(len, stream);
        v.iter_mut().for_each(|x| *x *= self.sigma_eps);
        v
    }

    fn add_to(&self, grid: &mut ImageGrid, stream: u64) {
        if self.sigma_eps > 0.0 {
            let field = self.field(grid.data.len(), stream);
            for (g, e) in grid.data.iter_mut().zip(field) {
                *g += e;
            }
        }
    }
}

fn clipped_inverse(weight: f64, distance: f64) -> f64 {
    weight / distance.abs().max(CLIP_DISTANCE)
}

/// Point singularity `weight / |x - centre|`.
pub fn point_singularity(weight: f64, centre: (f64, f64)) -> impl Fn(f64, f64) -> f64 {
    move |x1, x2| clipped_inverse(weight, (x1 - centre.0).hypot(x2 - centre.1))
}

/// Line singularity `weight / |x . n - offset|` with `n` at `normal_angle`.
pub fn line_singularity(weight: f64, normal_angle: f64, offset: f64) -> impl Fn(f64, f64) -> f64 {
    let (s, c) = normal_angle.sin_cos();
    move |x1, x2| clipped_inverse(weight, x1 * c + x2 * s - offset)
}

/// Singularity test image without noise: two point and two line
/// singularities placed relative to the grid size.
pub fn signal1_clean(shape: &GridShape) -> Result<ImageGrid> {
    let n = shape.n1 as f64;
    let p1 = point_singularity(10.0, (n / 4.0 + 0.5, n / 4.0 + 0.5));
    let p2 = point_singularity(15.0, (45.0 * n / 64.0 + 0.5, 45.0 * n / 64.0 + 0.5));
    // |x1 cos t - x2 sin t - c| is a line with normal at angle -t
    let l1 = line_singularity(1.0, -PI / 3.0, 15.0 * n / 128.0 - 0.5);
    let l2 = line_singularity(1.0, -PI / 9.0, 45.0 * n / 64.0 - 0.5);
    shape.sample(|x1, x2| p1(x1, x2) + p2(x1, x2) + l1(x1, x2) + l2(x1, x2))
}

/// Singularity test image plus `sigma1` times white noise.
pub fn gen_signal1(shape: &GridShape, sigma1: f64, seed: u64) -> Result<ImageGrid> {
    if shape.n1 != shape.n2 {
        return Err(Error::domain(
            "synth",
            "the singularity image needs a square grid",
        ));
    }
    let mut g = signal1_clean(shape)?;
    NoiseModel::new(sigma1, seed)?.add_to(&mut g, 0);
    Ok(g)
}

/// Component `a(x) cos(2 pi phase(t))` with `t = x . (cos eta(x), sin eta(x))`;
/// phase in cycles.
pub struct AmFmComponent {
    pub amplitude: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub phase: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub orientation: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl AmFmComponent {
    pub fn value(&self, x1: f64, x2: f64) -> f64 {
        let a = (self.amplitude)(x1, x2);
        if a == 0.0 {
            return 0.0;
        }
        let (s, c) = (self.orientation)(x1, x2).sin_cos();
        a * (2.0 * PI * (self.phase)(x1 * c + x2 * s)).cos()
    }
}

/// The two components of the AM/FM/OM test image on an `n`-wide grid:
/// a chirp with drifting orientation confined to `x1 < n/2`, and a slower
/// chirp at orientation pi/5.
pub fn signal2_components(n: usize) -> [AmFmComponent; 2] {
    let nf = n as f64;
    [
        AmFmComponent {
            amplitude: Box::new(move |x1, _| if x1 < nf / 2.0 { 1.2 } else { 0.0 }),
            phase: Box::new(move |t| 0.087 * (t * t / (2.0 * nf) + t)),
            orientation: Box::new(move |x1, x2| -PI / 4.0 + (x1 + x2 - 155.0) / (10.0 * nf)),
        },
        AmFmComponent {
            amplitude: Box::new(|_, _| 0.8),
            phase: Box::new(move |t| 0.025 * (t * t / (10.0 * nf) + t)),
            orientation: Box::new(|_, _| PI / 5.0),
        },
    ]
}

/// Sum of components plus noise.
pub fn render_components(
    shape: &GridShape,
    components: &[AmFmComponent],
    noise: &NoiseModel,
) -> Result<ImageGrid> {
    let mut g = shape.sample(|x1, x2| components.iter().map(|c| c.value(x1, x2)).sum())?;
    noise.add_to(&mut g, 0);
    Ok(g)
}

/// AM/FM/OM test image; `noise.sigma_eps` multiplies the unit white field.
pub fn gen_signal2(shape: &GridShape, noise: &NoiseModel) -> Result<ImageGrid> {
    render_components(shape, &signal2_components(shape.n1), noise)
}

/// Plane wave `amplitude cos(2 pi f0 x . n + theta_s)` with `n` at `eta`.
pub fn gen_plane_wave(
    shape: &GridShape,
    amplitude: f64,
    f0: f64,
    eta: f64,
    theta_s: f64,
) -> Result<ImageGrid> {
    let spacing = shape.d1.max(shape.d2);
    if !(f0 >= 0.0) || f0 * spacing >= 0.5 {
        return Err(Error::Alias { f0, spacing });
    }
    let (s, c) = eta.sin_cos();
    shape.sample(|x1, x2| amplitude * (2.0 * PI * f0 * (x1 * c + x2 * s) + theta_s).cos())
}

/// Single line singularity plus noise.
pub fn gen_line(
    shape: &GridShape,
    weight: f64,
    normal_angle: f64,
    offset: f64,
    noise: &NoiseModel,
    stream: u64,
) -> Result<ImageGrid> {
    let mut g = shape.sample(line_singularity(weight, normal_angle, offset))?;
    noise.add_to(&mut g, stream);
    Ok(g)
}

/// Spatial kernels of the three planes for wavelet `n` at scale `a`: the
/// coefficient at pixel `p` of an image `g` is `sum_q h[p - q] g[q]` with
/// circular indices.
pub fn point_kernels(
    shape: &GridShape,
    family: &MorseFamily,
    a: f64,
) -> Result<Vec<[Vec<f64>; 3]>> {
    let mut impulse = ImageGrid::zeros(shape.n1, shape.n2, shape.d1, shape.d2)?;
    impulse.data[0] = 1.0;
    let set = forward_with(&impulse, family, &[a], TransformOptions::default())?;
    Ok((0..family.count())
        .map(|n| {
            let t = set.get(n, 0);
            [t.even.clone(), t.r1.clone(), t.r2.clone()]
        })
        .collect())
}

/// Kernels reflected about `centre`, so the coefficient there is a plain
/// dot product with the image.
fn reflect(shape: &GridShape, h: &[f64], centre: (usize, usize)) -> Vec<f64> {
    let (n1, n2) = (shape.n1, shape.n2);
    let mut out = vec![0.0; n1 * n2];
    for q1 in 0..n1 {
        let k1 = (centre.0 + n1 - q1) % n1;
        for q2 in 0..n2 {
            let k2 = (centre.1 + n2 - q2) % n2;
            out[q1 * n2 + q2] = h[k1 * n2 + k2];
        }
    }
    out
}

/// Kernels whose dot product with an image gives the three coefficients of
/// each wavelet at pixel `point` and scale `a`.
pub fn dot_kernels(
    shape: &GridShape,
    family: &MorseFamily,
    a: f64,
    point: (usize, usize),
) -> Result<Vec<[Vec<f64>; 3]>> {
    Ok(point_kernels(shape, family, a)?
        .iter()
        .map(|[e, u, v]| {
            [
                reflect(shape, e, point),
                reflect(shape, u, point),
                reflect(shape, v, point),
            ]
        })
        .collect())
}

/// Empirical and exact noise covariance of the stacked coefficient vector
/// `(w_e, w_1, w_2)` of every wavelet at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub replicates: usize,
    pub count: usize,
    pub sigma_eps: f64,
    pub scale: f64,
    pub point: (usize, usize),
    /// `3 count x 3 count` empirical covariance, ordered `(n, plane)`.
    pub empirical: Vec<Vec<f64>>,
    /// Covariance implied by the discrete kernels.
    pub exact: Vec<Vec<f64>>,
    /// Correlation matrix of `empirical`.
    pub correlation: Vec<Vec<f64>>,
    /// Continuum prediction `sigma^2 d1 d2 diag(1, 1/2, 1/2)` per wavelet.
    pub reference: [f64; 3],
    /// Largest relative deviation of the empirical diagonal from `reference`.
    pub max_diag_rel_error: f64,
    /// Largest |correlation| between planes of the same wavelet.
    pub max_within_corr: f64,
    /// Largest |correlation| between different wavelets.
    pub max_cross_corr: f64,
}

impl CovarianceReport {
    /// 3x3 block of the empirical covariance for wavelet `n`.
    pub fn block(&self, n: usize) -> [[f64; 3]; 3] {
        let mut b = [[0.0; 3]; 3];
        for (i, row) in b.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.empirical[3 * n + i][3 * n + j];
            }
        }
        b
    }
}

/// Checks that every wavelet's peak frequency at every ladder scale stays
/// below the Nyquist frequency of both axes.
pub fn check_nyquist(shape: &GridShape, family: &MorseFamily, ladder: &ScaleLadder) -> Result<()> {
    let nyquist = (0.5 / shape.d1).min(0.5 / shape.d2);
    let peak = (0..family.count())
        .map(|n| family.f_max(n))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    if peak / ladder.a_min >= nyquist {
        return Err(Error::NyquistViolation(format!(
            "peak frequency {:.6} at scale {:.6} reaches the Nyquist limit {nyquist}",
            peak / ladder.a_min,
            ladder.a_min
        )));
    }
    Ok(())
}

/// Monte-Carlo covariance of the coefficient vector at the grid centre and
/// the geometric-mean scale of `ladder`.
pub fn mc_covariance(
    shape: &GridShape,
    family: &MorseFamily,
    ladder: &ScaleLadder,
    noise: &NoiseModel,
    replicates: usize,
) -> Result<CovarianceReport> {
    if replicates < MIN_REPLICATES {
        return Err(Error::domain(
            "synth",
            format!("need at least {MIN_REPLICATES} replicates (got {replicates})"),
        ));
    }
    check_nyquist(shape, family, ladder)?;
    let scale =
        (ladder.scales.iter().map(|a| a.ln()).sum::<f64>() / ladder.scales.len() as f64).exp();
    let point = (shape.n1 / 2, shape.n2 / 2);
    let kernels: Vec<Vec<f64>> = point_kernels(shape, family, scale)?
        .iter()
        .flat_map(|planes| {
            planes
                .iter()
                .map(|h| reflect(shape, h, point))
                .collect::<Vec<_>>()
        })
        .collect();
    let dim = kernels.len();
    let sigma2 = noise.sigma_eps * noise.sigma_eps;

    let exact: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    sigma2
                        * kernels[i]
                            .iter()
                            .zip(&kernels[j])
                            .map(|(a, b)| a * b)
                            .sum::<f64>()
                })
                .collect()
        })
        .collect();

    let samples: Vec<Vec<f64>> = (0..replicates as u64)
        .into_par_iter()
        .map(|k| {
            let e = noise.field(shape.len(), k);
            kernels
                .iter()
                .map(|h| h.iter().zip(&e).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    // sequential sums keep the result independent of the thread count
    let rf = replicates as f64;
    let mut mean = vec![0.0; dim];
    for s in &samples {
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v / rf;
        }
    }
    let mut empirical = vec![vec![0.0; dim]; dim];
    for s in &samples {
        for i in 0..dim {
            let di = s[i] - mean[i];
            for j in 0..dim {
                empirical[i][j] += di * (s[j] - mean[j]);
            }
        }
    }
    empirical.iter_mut().flatten().for_each(|v| *v /= rf - 1.0);

    let correlation: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| empirical[i][j] / (empirical[i][i] * empirical[j][j]).sqrt())
                .collect()
        })
        .collect();
    let base = sigma2 * shape.d1 * shape.d2;
    let reference = [base, 0.5 * base, 0.5 * base];
    let mut max_diag_rel_error: f64 = 0.0;
    let mut max_within_corr: f64 = 0.0;
    let mut max_cross_corr: f64 = 0.0;
    for i in 0..dim {
        max_diag_rel_error =
            max_diag_rel_error.max((empirical[i][i] / reference[i % 3] - 1.0).abs());
        for (j, c) in correlation[i].iter().enumerate() {
            if i == j {
                continue;
            }
            let rho = c.abs();
            if i / 3 == j / 3 {
                max_within_corr = max_within_corr.max(rho);
            } else {
                max_cross_corr = max_cross_corr.max(rho);
            }
        }
    }
    Ok(CovarianceReport {
        replicates,
        count: family.count(),
        sigma_eps: noise.sigma_eps,
        scale,
        point,
        empirical,
        exact,
        correlation,
        reference,
        max_diag_rel_error,
        max_within_corr,
        max_cross_corr,
    })
}

/// Largest deviation of the kernel-implied covariance from the continuum
/// prediction, relative to `sigma^2 d1 d2`; shrinks as the grid is refined.
pub fn exact_covariance_error(shape: &GridShape, family: &MorseFamily, a: f64) -> Result<f64> {
    let kernels: Vec<Vec<f64>> = point_kernels(shape, family, a)?
        .into_iter()
        .flatten()
        .collect();
    let dim = kernels.len();
    let scale = shape.d1 * shape.d2;
    let mut worst: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let c: f64 = kernels[i].iter().zip(&kernels[j]).map(|(x, y)| x * y).sum();
            let target = match (i == j, i % 3) {
                (false, _) => 0.0,
                (true, 0) => 1.0,
                (true, _) => 0.5,
            };
            worst = worst.max((c / scale - target).abs());
        }
    }
    Ok(worst)
}
