//! FFT-based monogenic wavelet analysis of sampled images.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathcore::quaternion::{quat_mul, quat_polar, Quaternion};
use crate::wavelets::{MorseFamily, DEFAULT_BAND_EPS};

/// Sampled real image; `data[i1 * n2 + i2]` holds the sample at
/// `x = (i1 d1, i2 d2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageGrid {
    pub n1: usize,
    pub n2: usize,
    pub d1: f64,
    pub d2: f64,
    pub data: Vec<f64>,
}

impl ImageGrid {
    pub fn new(n1: usize, n2: usize, d1: f64, d2: f64, data: Vec<f64>) -> Result<Self> {
        if n1 < 8 || n2 < 8 {
            return Err(Error::Grid(format!("grid {n1}x{n2} is smaller than 8x8")));
        }
        if !(d1 > 0.0 && d2 > 0.0 && d1.is_finite() && d2.is_finite()) {
            return Err(Error::Grid(format!(
                "sample spacings must be positive (got {d1}, {d2})"
            )));
        }
        if data.len() != n1 * n2 {
            return Err(Error::Grid(format!(
                "data length {} does not match {n1}x{n2}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(ImageGrid {
            n1,
            n2,
            d1,
            d2,
            data,
        })
    }

    pub fn zeros(n1: usize, n2: usize, d1: f64, d2: f64) -> Result<Self> {
        Self::new(n1, n2, d1, d2, vec![0.0; n1 * n2])
    }

    /// Grid sampled from a function of position.
    pub fn from_fn(
        n1: usize,
        n2: usize,
        d1: f64,
        d2: f64,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(n1 * n2);
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                data.push(f(i1 as f64 * d1, i2 as f64 * d2));
            }
        }
        Self::new(n1, n2, d1, d2, data)
    }

    #[inline]
    pub fn at(&self, i1: usize, i2: usize) -> f64 {
        self.data[i1 * self.n2 + i2]
    }
}

/// Point of the wavelet parameter space: scale, orientation, translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Xi {
    pub a: f64,
    pub theta: f64,
    pub b1: f64,
    pub b2: f64,
}

/// Logarithmically spaced scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleLadder {
    pub a_min: f64,
    pub a_max: f64,
    pub count: usize,
    /// Minimum number of frequency bins covered by the wavelet.
    pub min_bins: usize,
    pub scales: Vec<f64>,
}

impl ScaleLadder {
    /// Ladder from an explicit list of scales.
    pub fn explicit(scales: Vec<f64>) -> Result<Self> {
        if scales.is_empty() || scales.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::Grid("scales must be positive and non-empty".into()));
        }
        let a_min = scales.iter().copied().fold(f64::INFINITY, f64::min);
        let a_max = scales.iter().copied().fold(0.0, f64::max);
        Ok(ScaleLadder {
            a_min,
            a_max,
            count: scales.len(),
            min_bins: 0,
            scales,
        })
    }

    pub fn contains(&self, a: f64) -> bool {
        a >= self.a_min * (1.0 - 1e-12) && a <= self.a_max * (1.0 + 1e-12)
    }
}

/// Scale bounds from the wavelet's support band: the upper band edge must
/// stay below the grid Nyquist limit, and the band must span `min_bins`
/// frequency bins.
pub fn scale_ladder(
    grid: &ImageGrid,
    family: &MorseFamily,
    n: usize,
    min_bins: usize,
    count: usize,
) -> Result<ScaleLadder> {
    scale_ladder_with_eps(grid, family, n, min_bins, count, DEFAULT_BAND_EPS)
}

pub fn scale_ladder_with_eps(
    grid: &ImageGrid,
    family: &MorseFamily,
    n: usize,
    min_bins: usize,
    count: usize,
    eps_rel: f64,
) -> Result<ScaleLadder> {
    if min_bins < 2 {
        return Err(Error::Grid(format!(
            "bin count must be >= 2 (got {min_bins})"
        )));
    }
    if count == 0 {
        return Err(Error::Grid("ladder needs at least one scale".into()));
    }
    let (f1, f2) = family.support_band(n, eps_rel)?;
    let (d1, d2) = (grid.d1, grid.d2);
    let a_min = 2.0 * f2 * d1 * d2 / d1.hypot(d2);
    let extent = (grid.n1 as f64 * d1).min(grid.n2 as f64 * d2);
    let a_max = extent * (f2 - f1) / min_bins as f64;
    if a_min > a_max {
        return Err(Error::EmptyLadder { a_min, a_max });
    }
    let scales = if count == 1 {
        vec![(a_min * a_max).sqrt()]
    } else {
        let step = (a_max / a_min).ln() / (count - 1) as f64;
        (0..count)
            .map(|k| a_min * (step * k as f64).exp())
            .collect()
    };
    Ok(ScaleLadder {
        a_min,
        a_max,
        count,
        min_bins,
        scales,
    })
}

/// Analysis options.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TransformOptions {
    /// Zero-pad each axis by a factor of 2 before the DFT.
    pub pad: bool,
}

/// Real coefficient planes for one wavelet and scale: the isotropic
/// response and the two Riesz responses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTriple {
    pub even: Vec<f64>,
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
}

impl CoefficientTriple {
    pub fn zeros(len: usize) -> Self {
        CoefficientTriple {
            even: vec![0.0; len],
            r1: vec![0.0; len],
            r2: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.even.len()
    }

    pub fn is_empty(&self) -> bool {
        self.even.is_empty()
    }
}

/// Result of the forward transform, planes stored per `(n, scale)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub family: MorseFamily,
    pub scales: Vec<f64>,
    pub n1: usize,
    pub n2: usize,
    pub d1: f64,
    pub d2: f64,
    pub planes: Vec<CoefficientTriple>,
    /// Largest imaginary part left by the inverse DFTs, relative to the
    /// largest real part.
    pub imag_residue: f64,
}

impl CoefficientSet {
    pub fn get(&self, n: usize, k: usize) -> &CoefficientTriple {
        &self.planes[n * self.scales.len() + k]
    }

    pub fn index(&self, i1: usize, i2: usize) -> usize {
        i1 * self.n2 + i2
    }
}

/// Frequency of DFT bin `k` on an axis of `len` samples with spacing `d`.
#[inline]
pub fn bin_freq(k: usize, len: usize, d: f64) -> f64 {
    let k = if 2 * k >= len {
        k as f64 - len as f64
    } else {
        k as f64
    };
    k / (len as f64 * d)
}

/// Row/column FFT plans for an `n1 x n2` array.
#[derive(Clone)]
pub struct Fft2 {
    n1: usize,
    n2: usize,
    fwd1: Arc<dyn Fft<f64>>,
    fwd2: Arc<dyn Fft<f64>>,
    inv1: Arc<dyn Fft<f64>>,
    inv2: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(n1: usize, n2: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            n1,
            n2,
            fwd1: planner.plan_fft_forward(n1),
            fwd2: planner.plan_fft_forward(n2),
            inv1: planner.plan_fft_inverse(n1),
            inv2: planner.plan_fft_inverse(n2),
        }
    }

    fn run(&self, data: &mut [Complex64], inverse: bool) {
        let (ax1, ax2) = if inverse {
            (&self.inv1, &self.inv2)
        } else {
            (&self.fwd1, &self.fwd2)
        };
        // contiguous rows run along axis 2
        ax2.process(data);
        let mut column = vec![Complex64::new(0.0, 0.0); self.n1];
        for i2 in 0..self.n2 {
            for i1 in 0..self.n1 {
                column[i1] = data[i1 * self.n2 + i2];
            }
            ax1.process(&mut column);
            for i1 in 0..self.n1 {
                data[i1 * self.n2 + i2] = column[i1];
            }
        }
        if inverse {
            let s = 1.0 / (self.n1 * self.n2) as f64;
            data.iter_mut().for_each(|v| *v *= s);
        }
    }

    /// Unnormalised forward DFT.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, false);
    }

    /// Inverse DFT including the `1/(n1 n2)` factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, true);
    }
}

/// Frequency-domain multipliers of the three planes for one wavelet and
/// scale; the Riesz multipliers are the `j` coefficients.
fn multipliers(
    family: &MorseFamily,
    n: usize,
    a: f64,
    (n1, n2): (usize, usize),
    (d1, d2): (f64, f64),
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let len = n1 * n2;
    let mut even = vec![0.0; len];
    let mut r1 = vec![0.0; len];
    let mut r2 = vec![0.0; len];
    let nyq1 = (n1 % 2 == 0).then_some(n1 / 2);
    let nyq2 = (n2 % 2 == 0).then_some(n2 / 2);
    for k1 in 0..n1 {
        let f1 = bin_freq(k1, n1, d1);
        for k2 in 0..n2 {
            let f2 = bin_freq(k2, n2, d2);
            let f = f1.hypot(f2);
            let idx = k1 * n2 + k2;
            let psi = a * family.eval(n, a * f);
            even[idx] = psi;
            if f > 0.0 {
                // analysis with the conjugate companion: +j f_s / f
                if Some(k1) != nyq1 {
                    r1[idx] = f1 / f * psi;
                }
                if Some(k2) != nyq2 {
                    r2[idx] = f2 / f * psi;
                }
            }
        }
    }
    (even, r1, r2)
}

/// Forward transform on a scale ladder.
pub fn forward(
    image: &ImageGrid,
    family: &MorseFamily,
    ladder: &ScaleLadder,
) -> Result<CoefficientSet> {
    forward_with(image, family, &ladder.scales, TransformOptions::default())
}

/// Forward transform on explicit scales.
pub fn forward_with(
    image: &ImageGrid,
    family: &MorseFamily,
    scales: &[f64],
    opts: TransformOptions,
) -> Result<CoefficientSet> {
    if image.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    if scales.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
        return Err(Error::Grid("scales must be positive".into()));
    }
    let (n1, n2) = (image.n1, image.n2);
    let (p1, p2) = if opts.pad { (2 * n1, 2 * n2) } else { (n1, n2) };
    let fft = Fft2::new(p1, p2);
    let mut spectrum = vec![Complex64::new(0.0, 0.0); p1 * p2];
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            spectrum[i1 * p2 + i2] = Complex64::new(image.at(i1, i2), 0.0);
        }
    }
    fft.forward(&mut spectrum);

    let jobs: Vec<(usize, f64)> = (0..family.count())
        .flat_map(|n| scales.iter().map(move |&a| (n, a)))
        .collect();
    let results: Vec<(CoefficientTriple, f64, f64)> = jobs
        .par_iter()
        .map(|&(n, a)| {
            let (me, m1, m2) = multipliers(family, n, a, (p1, p2), (image.d1, image.d2));
            let mut out = CoefficientTriple::zeros(n1 * n2);
            let mut imag: f64 = 0.0;
            let mut real: f64 = 0.0;
            let mut buf = vec![Complex64::new(0.0, 0.0); p1 * p2];
            for (mult, plane, j) in [
                (&me, &mut out.even, false),
                (&m1, &mut out.r1, true),
                (&m2, &mut out.r2, true),
            ] {
                for ((b, g), &m) in buf.iter_mut().zip(&spectrum).zip(mult.iter()) {
                    *b = if j { g * Complex64::new(0.0, m) } else { g * m };
                }
                fft.inverse(&mut buf);
                for i1 in 0..n1 {
                    for i2 in 0..n2 {
                        let v = buf[i1 * p2 + i2];
                        plane[i1 * n2 + i2] = v.re;
                        imag = imag.max(v.im.abs());
                        real = real.max(v.re.abs());
                    }
                }
            }
            (out, imag, real)
        })
        .collect();

    let imag = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let real = results.iter().map(|r| r.2).fold(0.0, f64::max);
    let imag_residue = if real > 0.0 { imag / real } else { 0.0 };
    Ok(CoefficientSet {
        family: family.clone(),
        scales: scales.to_vec(),
        n1,
        n2,
        d1: image.d1,
        d2: image.d2,
        planes: results.into_iter().map(|r| r.0).collect(),
        imag_residue,
    })
}

/// Riesz pair at orientation `theta` from the pair at orientation zero.
pub fn rotate_coeffs(triple: &CoefficientTriple, theta: f64) -> CoefficientTriple {
    let (s, c) = theta.sin_cos();
    CoefficientTriple {
        even: triple.even.clone(),
        r1: triple
            .r1
            .iter()
            .zip(&triple.r2)
            .map(|(&u, &v)| c * u + s * v)
            .collect(),
        r2: triple
            .r1
            .iter()
            .zip(&triple.r2)
            .map(|(&u, &v)| -s * u + c * v)
            .collect(),
    }
}

/// Quaternion `w_e - i w_1 - j w_2` for one point.
#[inline]
pub fn assemble_point(even: f64, r1: f64, r2: f64) -> Quaternion {
    Quaternion::new(even, -r1, -r2, 0.0)
}

/// Local amplitude, orientation and phase at one point. Orientation is
/// `None` where both Riesz responses vanish; phase is `None` where the
/// whole quaternion vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonogenicDescriptor {
    pub amplitude: f64,
    pub orientation: Option<f64>,
    pub phase: Option<f64>,
}

/// Polar decomposition of the assembled quaternion at every point, after
/// rotating the orientation-zero `triple` to `theta`. Orientations are
/// measured in the rotated frame.
pub fn monogenic_assemble(triple: &CoefficientTriple, theta: f64) -> Vec<MonogenicDescriptor> {
    let rotated;
    let t = if theta == 0.0 {
        triple
    } else {
        rotated = rotate_coeffs(triple, theta);
        &rotated
    };
    (0..t.len())
        .map(
            |i| match quat_polar(assemble_point(t.even[i], t.r1[i], t.r2[i])) {
                Ok(p) => MonogenicDescriptor {
                    amplitude: p.amplitude,
                    orientation: (!p.degenerate).then_some(p.eta),
                    phase: Some(p.phase),
                },
                Err(_) => MonogenicDescriptor {
                    amplitude: 0.0,
                    orientation: None,
                    phase: None,
                },
            },
        )
        .collect()
}

/// Point-wise energies of a triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scalogram {
    pub even: Vec<f64>,
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
    pub total: Vec<f64>,
}

pub fn scalogram(triple: &CoefficientTriple) -> Scalogram {
    let sq = |v: &[f64]| v.iter().map(|x| x * x).collect::<Vec<_>>();
    let even = sq(&triple.even);
    let r1 = sq(&triple.r1);
    let r2 = sq(&triple.r2);
    let total = (0..even.len()).map(|i| even[i] + r1[i] + r2[i]).collect();
    Scalogram {
        even,
        r1,
        r2,
        total,
    }
}

/// Quaternion-valued monogenic wavelet at frequency `(f1, f2)`, oriented
/// at `theta`: `Psi + i Psi_1 + j Psi_2` with `Psi_s` the Riesz companions
/// whose imaginary unit is read as the quaternion `j`.
pub fn monogenic_filter(
    family: &MorseFamily,
    n: usize,
    f1: f64,
    f2: f64,
    theta: f64,
) -> Result<Quaternion> {
    let psi = family.psi_e_hat(f1.hypot(f2), n)?;
    if psi == 0.0 {
        return Ok(Quaternion::new(0.0, 0.0, 0.0, 0.0));
    }
    let angle = f2.atan2(f1) - theta;
    let r1 = Quaternion::J.scale(-angle.cos() * psi);
    let r2 = Quaternion::J.scale(-angle.sin() * psi);
    Ok(Quaternion::ONE.scale(psi) + quat_mul(Quaternion::I, r1) + quat_mul(Quaternion::J, r2))
}
