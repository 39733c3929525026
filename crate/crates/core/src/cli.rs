//! Command-line front end. Every command writes its artifacts and a
//! `manifest.json` holding the resolved configuration into `--out`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::estimators::{
    amplitude_at, average, orientation_at, phase_at, ridge_extract, theta_max_at, RidgeOptions,
    DEFAULT_MIN_GAIN,
};
use crate::io::{
    read_image, write_estimate_csv, write_image_raw, write_json, write_pgm16, write_raw,
    write_ridge_csv, write_wavelet_table, EstimateRow,
};
use crate::synth::{
    gen_line, gen_plane_wave, gen_signal1, gen_signal2, mc_covariance, GridShape, NoiseModel,
    MIN_REPLICATES,
};
use crate::transform::{forward_with, scale_ladder, ImageGrid, ScaleLadder, TransformOptions};
use crate::validator::{eigenrelation_residual, MorseExponents, RegionParams};
use crate::wavelets::MorseFamily;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;
pub const THREADS_ENV: &str = "MONOMORSE_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "monomorse",
    version,
    about = "Monogenic Morse wavelet analysis of 2-D images"
)]
pub struct Cli {
    /// Worker thread cap (falls back to MONOMORSE_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Plain-text `key = value` file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct FamilyArgs {
    #[arg(long = "l", allow_negative_numbers = true)]
    pub l: Option<f64>,
    #[arg(long = "m", allow_negative_numbers = true)]
    pub m: Option<f64>,
    /// Number of wavelets.
    #[arg(long = "n")]
    pub n: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct LadderArgs {
    /// Explicit comma-separated scales; overrides the automatic ladder.
    #[arg(long, value_delimiter = ',')]
    pub scales: Option<Vec<f64>>,
    /// Number of scales on the automatic ladder.
    #[arg(long)]
    pub voices: Option<usize>,
    /// Frequency bins the lowest-frequency wavelet must span.
    #[arg(long = "min-bins")]
    pub min_bins: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the radial spectra of the wavelet family.
    WaveletGen {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long = "f-hi")]
        f_hi: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Forward transform of an image on a scale ladder.
    Transform {
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        ladder: LadderArgs,
        #[arg(long)]
        pad: Option<bool>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Point-wise orientation, phase and amplitude estimates.
    Estimate {
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        ladder: LadderArgs,
        #[arg(long = "min-gain")]
        min_gain: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ridge extraction with orientation, phase and amplitude.
    Ridge {
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        ladder: LadderArgs,
        #[arg(long = "min-rel-energy")]
        min_rel_energy: Option<f64>,
        #[arg(long = "link-db")]
        link_db: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Numerical checks of the radial localisation operator.
    ValidateOperator {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        /// Comma-separated region parameters.
        #[arg(long = "c", value_delimiter = ',')]
        c: Option<Vec<f64>>,
        #[arg(long = "residual-tol")]
        residual_tol: Option<f64>,
        #[arg(long = "lambda-tol")]
        lambda_tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthetic test images.
    Simulate {
        /// 1, 2, plane or line.
        #[arg(long)]
        signal: Option<String>,
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, allow_negative_numbers = true)]
        amplitude: Option<f64>,
        #[arg(long)]
        f0: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        eta: Option<f64>,
        #[arg(long = "phase-offset", allow_negative_numbers = true)]
        phase_offset: Option<f64>,
        #[arg(long = "normal-angle", allow_negative_numbers = true)]
        normal_angle: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        offset: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo noise covariance of the coefficients.
    McCovariance {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        ladder: LadderArgs,
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::WaveletGen { .. } => "wavelet-gen",
            Command::Transform { .. } => "transform",
            Command::Estimate { .. } => "estimate",
            Command::Ridge { .. } => "ridge",
            Command::ValidateOperator { .. } => "validate-operator",
            Command::Simulate { .. } => "simulate",
            Command::McCovariance { .. } => "mc-covariance",
        }
    }
}

/// Merges flags, the config file and defaults, recording every resolved
/// value.
pub struct Resolver {
    file: BTreeMap<String, String>,
    used: BTreeMap<String, Value>,
}

impl Resolver {
    pub fn new(file: BTreeMap<String, String>) -> Self {
        Resolver {
            file,
            used: BTreeMap::new(),
        }
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>> {
        let mut map = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(map)
    }

    fn file_value<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.file
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Config(format!("config key {key}: cannot parse {v:?}")))
            })
            .transpose()
    }

    pub fn opt<T: FromStr + serde::Serialize + Clone>(
        &mut self,
        key: &str,
        flag: Option<T>,
    ) -> Result<Option<T>> {
        let v = match flag {
            Some(v) => Some(v),
            None => self.file_value(key)?,
        };
        self.used.insert(
            key.to_string(),
            serde_json::to_value(&v).unwrap_or(Value::Null),
        );
        Ok(v)
    }

    pub fn get<T: FromStr + serde::Serialize + Clone>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> Result<T> {
        let v = self.opt(key, flag)?.unwrap_or(default);
        self.used.insert(
            key.to_string(),
            serde_json::to_value(&v).unwrap_or(Value::Null),
        );
        Ok(v)
    }

    /// List-valued key; the file form is comma separated.
    pub fn list(&mut self, key: &str, flag: Option<Vec<f64>>) -> Result<Option<Vec<f64>>> {
        let v = match flag {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some(s) => Some(
                    s.split(',')
                        .map(|t| {
                            t.trim().parse::<f64>().map_err(|_| {
                                Error::Config(format!("config key {key}: cannot parse {t:?}"))
                            })
                        })
                        .collect::<Result<Vec<_>>>()?,
                ),
                None => None,
            },
        };
        self.used.insert(key.to_string(), json!(v));
        Ok(v)
    }

    /// Fails on file keys no command option consumed.
    pub fn finish(&self) -> Result<Value> {
        if let Some(k) = self.file.keys().find(|k| !self.used.contains_key(*k)) {
            return Err(Error::Config(format!("unknown config key {k}")));
        }
        Ok(Value::Object(
            self.used
                .iter()
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect::<Map<_, _>>(),
        ))
    }
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Io(_) | Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_NUMERIC,
    }
}

fn family(r: &mut Resolver, f: &FamilyArgs) -> Result<MorseFamily> {
    let l = r.get("l", f.l, 8.0)?;
    let m = r.get("m", f.m, 3.0)?;
    let n = r.get("n", f.n, 1)?;
    MorseFamily::new(l, m, n).map_err(config_err)
}

fn ladder(
    r: &mut Resolver,
    a: &LadderArgs,
    grid: &ImageGrid,
    fam: &MorseFamily,
) -> Result<ScaleLadder> {
    let scales = r.list("scales", a.scales.clone())?;
    let voices = r.get("voices", a.voices, 8)?;
    let min_bins = r.get("min-bins", a.min_bins, 8)?;
    match scales {
        Some(s) => ScaleLadder::explicit(s),
        None => scale_ladder(grid, fam, 0, min_bins, voices),
    }
    .map_err(config_err)
}

fn out_dir(r: &mut Resolver, out: &Option<PathBuf>) -> Result<PathBuf> {
    let dir: PathBuf = r
        .opt::<String>(
            "out",
            out.as_ref().map(|p| p.to_string_lossy().into_owned()),
        )?
        .map(PathBuf::from)
        .ok_or_else(|| Error::Config("--out is required".into()))?;
    fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn input(r: &mut Resolver, p: &Option<PathBuf>) -> Result<ImageGrid> {
    let path: PathBuf = r
        .opt::<String>(
            "input",
            p.as_ref().map(|p| p.to_string_lossy().into_owned()),
        )?
        .map(PathBuf::from)
        .ok_or_else(|| Error::Config("--input is required".into()))?;
    read_image(&path)
}

fn units() -> Value {
    json!({
        "angle": "radians",
        "phase": "cycles",
        "frequency": "cycles per sample unit",
        "position": "sample units",
    })
}

fn write_manifest(
    dir: &Path,
    command: &str,
    config: &Value,
    artifacts: &[&str],
    extra: Value,
) -> Result<()> {
    write_json(
        &dir.join("manifest.json"),
        &json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "config": config,
            "units": units(),
            "artifacts": artifacts,
            "summary": extra,
        }),
    )
}

fn plane_labels(count: usize, scales: usize) -> Vec<String> {
    let mut out = Vec::new();
    for n in 0..count {
        for k in 0..scales {
            for p in ["even", "r1", "r2"] {
                out.push(format!("n{n}_a{k}_{p}"));
            }
        }
    }
    out
}

fn execute(cmd: &Command, r: &mut Resolver) -> Result<()> {
    let name = cmd.name();
    match cmd {
        Command::WaveletGen {
            family: f,
            f_hi,
            points,
            out,
        } => {
            let fam = family(r, f)?;
            let f_hi = r.get("f-hi", *f_hi, 1.0)?;
            let points = r.get("points", *points, 512)?;
            if !(f_hi > 0.0) || points < 2 {
                return Err(Error::Config(
                    "need f-hi > 0 and at least two points".into(),
                ));
            }
            let dir = out_dir(r, out)?;
            let config = r.finish()?;
            let freqs: Vec<f64> = (0..points)
                .map(|k| f_hi * k as f64 / (points - 1) as f64)
                .collect();
            write_wavelet_table(&dir.join("wavelets.csv"), &fam, &freqs)?;
            let f_max = (0..fam.count())
                .map(|n| fam.f_max(n))
                .collect::<Result<Vec<_>>>()?;
            write_manifest(
                &dir,
                name,
                &config,
                &["wavelets.csv"],
                json!({ "f_max": f_max }),
            )
        }
        Command::Transform {
            input: inp,
            family: f,
            ladder: l,
            pad,
            out,
        } => {
            let grid = input(r, inp)?;
            let fam = family(r, f)?;
            let lad = ladder(r, l, &grid, &fam)?;
            let pad = r.get("pad", *pad, false)?;
            let dir = out_dir(r, out)?;
            let config = r.finish()?;
            let set = forward_with(&grid, &fam, &lad.scales, TransformOptions { pad })?;
            let labels = plane_labels(fam.count(), lad.scales.len());
            let mut planes: Vec<(String, &[f64])> = Vec::new();
            let mut labels = labels.into_iter();
            for t in &set.planes {
                for p in [&t.even, &t.r1, &t.r2] {
                    planes.push((labels.next().expect("label per plane"), p.as_slice()));
                }
            }
            write_raw(
                &dir.join("coefficients.json"),
                (grid.n1, grid.n2, grid.d1, grid.d2),
                &planes,
                units(),
                config.clone(),
            )?;
            write_manifest(
                &dir,
                name,
                &config,
                &["coefficients.json", "coefficients.f64"],
                json!({ "scales": lad.scales, "imag_residue": set.imag_residue }),
            )
        }
        Command::Estimate {
            input: inp,
            family: f,
            ladder: l,
            min_gain,
            out,
        } => {
            let grid = input(r, inp)?;
            let fam = family(r, f)?;
            let lad = ladder(r, l, &grid, &fam)?;
            let min_gain = r.get("min-gain", *min_gain, DEFAULT_MIN_GAIN)?;
            let dir = out_dir(r, out)?;
            let config = r.finish()?;
            let set = forward_with(&grid, &fam, &lad.scales, TransformOptions::default())?;
            let avg = average(&set);
            let f0 = fam.f_max(0)?;
            let mut rows = Vec::with_capacity(lad.scales.len() * grid.data.len());
            for (k, &a) in lad.scales.iter().enumerate() {
                for i in 0..grid.data.len() {
                    let p = avg.point_at(k, i, 0.0);
                    rows.push(EstimateRow {
                        b1: (i / grid.n2) as f64 * grid.d1,
                        b2: (i % grid.n2) as f64 * grid.d2,
                        a,
                        theta_max: theta_max_at(&p).ok(),
                        nu: orientation_at(&p).ok(),
                        phase: phase_at(&p).ok(),
                        amplitude: amplitude_at(&fam, &p, f0 / a, min_gain).ok(),
                        s_plus: p.s_plus,
                    });
                }
            }
            write_estimate_csv(&dir.join("estimates.csv"), &rows)?;
            write_manifest(
                &dir,
                name,
                &config,
                &["estimates.csv"],
                json!({ "scales": lad.scales }),
            )
        }
        Command::Ridge {
            input: inp,
            family: f,
            ladder: l,
            min_rel_energy,
            link_db,
            out,
        } => {
            let grid = input(r, inp)?;
            let fam = family(r, f)?;
            let lad = ladder(r, l, &grid, &fam)?;
            let defaults = RidgeOptions::default();
            let opts = RidgeOptions {
                min_rel_energy: r.get(
                    "min-rel-energy",
                    *min_rel_energy,
                    defaults.min_rel_energy,
                )?,
                link_db: r.get("link-db", *link_db, defaults.link_db)?,
            };
            let dir = out_dir(r, out)?;
            let config = r.finish()?;
            let set = forward_with(&grid, &fam, &lad.scales, TransformOptions::default())?;
            let samples = ridge_extract(&set, &opts);
            write_ridge_csv(&dir.join("ridge.csv"), &samples)?;
            write_manifest(
                &dir,
                name,
                &config,
                &["ridge.csv"],
                json!({ "samples": samples.len(), "scales": lad.scales }),
            )
        }
        Command::ValidateOperator {
            family: f,
            beta,
            gamma,
            c,
            residual_tol,
            lambda_tol,
            out,
        } => {
            let fam = family(r, f)?;
            let beta = r.get("beta", *beta, fam.l() + 0.5)?;
            let gamma = r.get("gamma", *gamma, fam.m())?;
            let cs = r.list("c", c.clone())?.unwrap_or_else(|| vec![3.0]);
            let residual_tol = r.get("residual-tol", *residual_tol, 5e-2)?;
            let lambda_tol = r.get("lambda-tol", *lambda_tol, 5e-3)?;
            let exps = MorseExponents::new(beta, gamma).map_err(config_err)?;
            let regions = cs
                .iter()
                .map(|&c| RegionParams::new(c))
                .collect::<Result<Vec<_>>>()
                .map_err(config_err)?;
            let dir = out_dir(r, out)?;
            let config = r.finish()?;
            let mut reports = Vec::new();
            for region in &regions {
                for n in 0..fam.count() {
                    reports.push(eigenrelation_residual(n, region, &exps)?);
                }
            }
            let pass = reports.iter().all(|rep| {
                rep.residual <= residual_tol
                    && (rep.lambda_numeric - rep.lambda_formula).abs() <= lambda_tol
                    && (rep.c0_ratio - 1.0).abs() <= 1e-3
            });
            write_json(
                &dir.join("report.json"),
                &json!({ "reports": reports, "pass": pass }),
            )?;
            write_manifest(
                &dir,
                name,
                &config,
                &["report.json"],
                json!({ "pass": pass }),
            )?;
            if pass {
                Ok(())
            } else {
                Err(Error::domain(
                    "validator",
                    "operator checks outside tolerance",
                ))
            }
        }
        Command::Simulate {
            signal,
            size,
            sigma,
            seed,
            amplitude,
            f0,
            eta,
            phase_offset,
            normal_angle,
            offset,
            out,
        } => {
            let signal = r.get("signal", signal.clone(), "1".to_string())?;
            let size = r.get("size", *size, 128)?;
            let seed = r.get("seed", *seed, 0)?;
            let shape = GridShape::square(size);
            let default_sigma = if signal == "1" { 0.2 } else { 0.0 };
            let sigma = r.get("sigma", *sigma, default_sigma)?;
            let noise = NoiseModel::new(sigma, seed).map_err(config_err)?;
            let image = match signal.as_str() {
                "1" => gen_signal1(&shape, sigma, seed),
                "2" => gen_signal2(&shape, &noise),
                "plane" => {
                    let amp = r.get("amplitude", *amplitude, 1.0)?;
                    let f0 = r.get("f0", *f0, 0.1)?;
                    let eta = r.get("eta", *eta, 0.0)?;
                    let ph = r.get("phase-offset", *phase_offset, 0.0)?;
                    gen_plane_wave(&shape, amp, f0, eta, ph).map(|mut g| {
                        let e = noise.field(g.data.len(), 0);
                        g.data.iter_mut().zip(e).for_each(|(v, e)| *v += e);
                        g
                    })
                }
                "line" => {
                    let amp = r.get("amplitude", *amplitude, 1.0)?;
                    let ang = r.get("normal-angle", *normal_angle, std::f64::consts::FRAC_PI_3)?;
                    let centre = size as f64 / 2.0;
                    let off = r.get("offset", *offset, centre * (ang.cos() + ang.sin()))?;
                    gen_line(&shape, amp, ang, off, &noise, 0)
                }
                other => return Err(Error::Config(format!("unknown signal {other:?}"))),
            }
            .map_err(config_err)?;
            let dir = out_dir(r, out)?;
            let config = r.finish()?;
            write_image_raw(&dir.join("image.json"), &image, config.clone())?;
            write_pgm16(&dir.join("image.pgm"), &image)?;
            write_manifest(
                &dir,
                name,
                &config,
                &["image.json", "image.f64", "image.pgm"],
                Value::Null,
            )
        }
        Command::McCovariance {
            family: f,
            ladder: l,
            size,
            sigma,
            seed,
            replicates,
            out,
        } => {
            let fam = family(r, f)?;
            let size = r.get("size", *size, 128)?;
            let shape = GridShape::square(size);
            let grid = ImageGrid::zeros(size, size, 1.0, 1.0).map_err(config_err)?;
            let lad = ladder(r, l, &grid, &fam)?;
            let sigma = r.get("sigma", *sigma, 1.0)?;
            let seed = r.get("seed", *seed, 0)?;
            let replicates = r.get("replicates", *replicates, 10_000)?;
            if replicates < MIN_REPLICATES {
                return Err(Error::Config(format!(
                    "need at least {MIN_REPLICATES} replicates"
                )));
            }
            let noise = NoiseModel::new(sigma, seed).map_err(config_err)?;
            let dir = out_dir(r, out)?;
            let config = r.finish()?;
            let rep = mc_covariance(&shape, &fam, &lad, &noise, replicates)?;
            let summary = json!({
                "reference_diagonal": rep.reference,
                "max_diag_rel_error": rep.max_diag_rel_error,
                "max_within_corr": rep.max_within_corr,
                "max_cross_corr": rep.max_cross_corr,
                "diag_within_5pct": rep.max_diag_rel_error <= 0.05,
                "corr_below_0.05": rep.max_within_corr < 0.05 && rep.max_cross_corr < 0.05,
            });
            write_json(&dir.join("report.json"), &rep)?;
            write_manifest(&dir, name, &config, &["report.json"], summary)
        }
    }
}

fn configure_threads(flag: Option<usize>) -> Result<Option<usize>> {
    let n =
        match flag {
            Some(n) => Some(n),
            None => match std::env::var(THREADS_ENV) {
                Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
                    Error::Config(format!("{THREADS_ENV} must be a positive integer"))
                })?),
                Err(_) => None,
            },
        };
    if let Some(n) = n {
        if n == 0 {
            return Err(Error::Config("thread count must be positive".into()));
        }
        // a pool built earlier in this process stays in place
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(n)
}

fn run_parsed(cli: &Cli) -> Result<()> {
    let threads = configure_threads(cli.threads)?;
    let file = match &cli.config {
        Some(p) => Resolver::parse_file(
            &fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        )?,
        None => BTreeMap::new(),
    };
    let mut r = Resolver::new(file);
    r.used.insert("command".into(), json!(cli.command.name()));
    r.used.insert("threads".into(), json!(threads));
    execute(&cli.command, &mut r)
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run_parsed(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("monomorse: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parsing_and_precedence() {
        let file = Resolver::parse_file("# comment\nl = 7\nsize=64 # trailing\n\n").unwrap();
        let mut r = Resolver::new(file);
        assert_eq!(r.get("l", None, 8.0).unwrap(), 7.0);
        assert_eq!(r.get("l", Some(9.0), 8.0).unwrap(), 9.0);
        assert_eq!(r.get("size", None, 128usize).unwrap(), 64);
        assert_eq!(r.get("m", None, 3.0).unwrap(), 3.0);
        let cfg = r.finish().unwrap();
        assert_eq!(cfg["m"], 3.0);
        assert!(Resolver::parse_file("novalue").is_err());
    }

    #[test]
    fn unknown_and_malformed_keys() {
        let mut r = Resolver::new(Resolver::parse_file("bogus = 1\nl = x").unwrap());
        assert!(matches!(r.get("l", None, 8.0), Err(Error::Config(_))));
        let r = Resolver::new(Resolver::parse_file("bogus = 1").unwrap());
        assert!(matches!(r.finish(), Err(Error::Config(_))));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::Io("x".into())), EXIT_IO);
        assert_eq!(exit_code(&Error::ZeroEnergy), EXIT_NUMERIC);
        assert_eq!(run(["monomorse", "no-such-command"]), EXIT_CONFIG);
        assert_eq!(run(["monomorse", "wavelet-gen", "--l", "8"]), EXIT_CONFIG);
        assert_eq!(
            run(["monomorse", "wavelet-gen", "--l", "-1", "--out", "/tmp"]),
            EXIT_CONFIG
        );
    }
}
