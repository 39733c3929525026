//! Python bindings. Images travel as flat row-major lists `data[i1 * n2 + i2]`.

use monomorse::estimators::{ridge_extract, RidgeOptions};
use monomorse::synth::{gen_plane_wave, gen_signal1, GridShape, SIGNAL1_SIGMA};
use monomorse::transform::{self, ImageGrid, TransformOptions};
use monomorse::validator::{eigenrelation_residual, MorseExponents, RegionParams};
use monomorse::wavelets::{self, MorseFamily, DEFAULT_BAND_EPS};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn py_err(e: monomorse::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn family(l: f64, m: f64, count: usize) -> PyResult<MorseFamily> {
    MorseFamily::new(l, m, count).map_err(py_err)
}

/// Isotropic wavelet spectrum `Psi_n(f)` at each radial frequency.
#[pyfunction]
#[pyo3(signature = (freqs, n=0, l=8.0, m=3.0))]
pub fn psi_hat(freqs: Vec<f64>, n: usize, l: f64, m: f64) -> PyResult<Vec<f64>> {
    let fam = family(l, m, n + 1)?;
    freqs
        .iter()
        .map(|&f| fam.psi_e_hat(f, n).map_err(py_err))
        .collect()
}

/// Peak radial frequency of wavelet `n`.
#[pyfunction]
#[pyo3(signature = (n=0, l=8.0, m=3.0))]
pub fn f_max(n: usize, l: f64, m: f64) -> PyResult<f64> {
    family(l, m, n + 1)?.f_max(n).map_err(py_err)
}

/// Frequencies `(f1, f2)` where wavelet `n` drops to `eps_rel` of its peak.
#[pyfunction]
#[pyo3(signature = (n=0, l=8.0, m=3.0, eps_rel=DEFAULT_BAND_EPS))]
pub fn support_band(n: usize, l: f64, m: f64, eps_rel: f64) -> PyResult<(f64, f64)> {
    family(l, m, n + 1)?
        .support_band(n, eps_rel)
        .map_err(py_err)
}

/// Concentration eigenvalue of wavelet `n` for region parameter `c`.
#[pyfunction]
pub fn eigenvalue(n: usize, r: f64, c: f64) -> PyResult<f64> {
    Ok(wavelets::eigenvalue(n, r, c).map_err(py_err)?.lambda)
}

/// Logarithmic scale ladder admissible on an `n1 x n2` grid.
#[pyfunction]
#[pyo3(signature = (n1, n2, voices=16, min_bins=8, l=8.0, m=3.0, d1=1.0, d2=1.0))]
#[allow(clippy::too_many_arguments)]
pub fn scale_ladder(
    n1: usize,
    n2: usize,
    voices: usize,
    min_bins: usize,
    l: f64,
    m: f64,
    d1: f64,
    d2: f64,
) -> PyResult<Vec<f64>> {
    let grid = ImageGrid::zeros(n1, n2, d1, d2).map_err(py_err)?;
    let ladder =
        transform::scale_ladder(&grid, &family(l, m, 1)?, 0, min_bins, voices).map_err(py_err)?;
    Ok(ladder.scales)
}

/// Forward transform. Returns `planes[n][k] = (even, r1, r2)`.
#[pyfunction]
#[pyo3(signature = (data, n1, n2, scales, count=1, l=8.0, m=3.0, d1=1.0, d2=1.0))]
#[allow(clippy::too_many_arguments, clippy::type_complexity)]
pub fn forward(
    data: Vec<f64>,
    n1: usize,
    n2: usize,
    scales: Vec<f64>,
    count: usize,
    l: f64,
    m: f64,
    d1: f64,
    d2: f64,
) -> PyResult<Vec<Vec<(Vec<f64>, Vec<f64>, Vec<f64>)>>> {
    let grid = ImageGrid::new(n1, n2, d1, d2, data).map_err(py_err)?;
    let fam = family(l, m, count)?;
    let set = transform::forward_with(&grid, &fam, &scales, TransformOptions::default())
        .map_err(py_err)?;
    Ok((0..count)
        .map(|n| {
            (0..scales.len())
                .map(|k| {
                    let t = set.get(n, k);
                    (t.even.clone(), t.r1.clone(), t.r2.clone())
                })
                .collect()
        })
        .collect())
}

/// Ridge samples `(b1, b2, a, nu, phase, amplitude, s_plus)`; `nu` is
/// `None` where the orientation is undefined.
#[pyfunction]
#[pyo3(signature = (data, n1, n2, scales, count=1, l=8.0, m=3.0))]
#[allow(clippy::type_complexity)]
pub fn ridge(
    data: Vec<f64>,
    n1: usize,
    n2: usize,
    scales: Vec<f64>,
    count: usize,
    l: f64,
    m: f64,
) -> PyResult<Vec<(f64, f64, f64, Option<f64>, f64, f64, f64)>> {
    let grid = ImageGrid::new(n1, n2, 1.0, 1.0, data).map_err(py_err)?;
    let fam = family(l, m, count)?;
    let set = transform::forward_with(&grid, &fam, &scales, TransformOptions::default())
        .map_err(py_err)?;
    Ok(ridge_extract(&set, &RidgeOptions::default())
        .into_iter()
        .map(|s| (s.b1, s.b2, s.a, s.nu, s.phase, s.amplitude, s.s_plus))
        .collect())
}

/// Singularity test image (two points, two lines) with white noise.
#[pyfunction]
#[pyo3(signature = (size=128, seed=0, sigma=SIGNAL1_SIGMA))]
pub fn signal1(size: usize, seed: u64, sigma: f64) -> PyResult<Vec<f64>> {
    Ok(gen_signal1(&GridShape::square(size), sigma, seed)
        .map_err(py_err)?
        .data)
}

/// Plane wave `amplitude cos(2 pi f0 x . (cos eta, sin eta) + theta_s)`.
#[pyfunction]
#[pyo3(signature = (size, amplitude, f0, eta, theta_s=0.0))]
pub fn plane_wave(
    size: usize,
    amplitude: f64,
    f0: f64,
    eta: f64,
    theta_s: f64,
) -> PyResult<Vec<f64>> {
    Ok(
        gen_plane_wave(&GridShape::square(size), amplitude, f0, eta, theta_s)
            .map_err(py_err)?
            .data,
    )
}

/// Eigenrelation check `(residual, lambda_formula, lambda_numeric)`.
#[pyfunction]
#[pyo3(signature = (n, c, beta=8.5, gamma=3.0))]
pub fn validate_operator(n: usize, c: f64, beta: f64, gamma: f64) -> PyResult<(f64, f64, f64)> {
    let exps = MorseExponents::new(beta, gamma).map_err(py_err)?;
    let region = RegionParams::new(c).map_err(py_err)?;
    let r = eigenrelation_residual(n, &region, &exps).map_err(py_err)?;
    Ok((r.residual, r.lambda_formula, r.lambda_numeric))
}

#[pymodule]
fn monomorse_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(psi_hat, m)?)?;
    m.add_function(wrap_pyfunction!(f_max, m)?)?;
    m.add_function(wrap_pyfunction!(support_band, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalue, m)?)?;
    m.add_function(wrap_pyfunction!(scale_ladder, m)?)?;
    m.add_function(wrap_pyfunction!(forward, m)?)?;
    m.add_function(wrap_pyfunction!(ridge, m)?)?;
    m.add_function(wrap_pyfunction!(signal1, m)?)?;
    m.add_function(wrap_pyfunction!(plane_wave, m)?)?;
    m.add_function(wrap_pyfunction!(validate_operator, m)?)?;
    Ok(())
}
