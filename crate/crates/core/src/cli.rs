//! Command-line front end of the `mittag` binary.
//!
//! Exit status is 0 on success, 2 when input is rejected and 3 when a
//! numerical routine fails. Every failure writes one JSON object on a single
//! line to standard error. Tables go to `--out` (standard output by default);
//! JSON summaries go to `--summary`, or to standard output when `--out` names
//! a file. A `--config FILE` of `key = value` lines supplies defaults for any
//! long flag; flags given on the command line take precedence.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::fracpde::{
    resolution_warning, solve_homogeneous, solve_inhomogeneous, verify_dispersive, verify_inhomogeneous_decay,
    BoxGrid, Forcing, ProbeMode, ProblemSpec, Profile, SpectralField, TimeProfile, DEFAULT_BOX_TOLERANCE,
};
use crate::lp::verify_band_bound;
use crate::mlf::{mlf_contour, mlf_ray_detailed, mlf_series, ContourSpec, MlParams, RaySpec};
use crate::radial::{asymptotic_slope, default_slope_windows, fmt17, log2_grid, KernelTransform};

#[derive(Debug, Parser)]
#[command(name = "mittag", version, about = "Mittag-Leffler kernels, radial transforms and fractional Cauchy solvers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate E_{α,β}(e^{iπs} r^γ) on a log-spaced r grid.
    Mlf(MlfArgs),
    /// Radial Fourier transform of the ray kernel with asymptotic slopes.
    Kernel(KernelArgs),
    /// Dyadic band ratios of the kernel transform.
    LpVerify(LpArgs),
    /// Spectral solution snapshots and norms.
    Solve(SolveArgs),
    /// Fit decay exponents of the homogeneous or Duhamel part.
    Dispersive(DispersiveArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MlfMethod {
    Auto,
    Series,
    Contour,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SnapshotFormat {
    Csv,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Fixed,
    Scaled,
}

#[derive(Debug, Clone, Args)]
pub struct RayFlags {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub s: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub gamma: f64,
}

impl RayFlags {
    fn build(&self) -> Result<(MlParams, RaySpec)> {
        Ok((MlParams::new(self.alpha, self.beta)?, RaySpec::new(self.s, self.gamma)?))
    }
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct MlfArgs {
    #[command(flatten)]
    pub ray: RayFlags,
    #[arg(long, allow_negative_numbers = true)]
    pub r_min: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub r_max: f64,
    #[arg(long)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = MlfMethod::Auto)]
    pub method: MlfMethod,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    pub format: TableFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct KernelArgs {
    #[command(flatten)]
    pub ray: RayFlags,
    #[arg(long)]
    pub d: u32,
    /// log2 range of the ξ grid, `lo:hi`.
    #[arg(long, default_value = "-14:10", allow_hyphen_values = true)]
    pub xi_octaves: String,
    #[arg(long, default_value_t = 8)]
    pub per_octave: u32,
    /// Two log2 windows `lo:hi,lo:hi` for the small- and large-ξ slopes.
    #[arg(long, allow_hyphen_values = true)]
    pub slope_windows: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct LpArgs {
    #[command(flatten)]
    pub ray: RayFlags,
    #[arg(long)]
    pub d: u32,
    /// One or more exponents, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<f64>,
    #[arg(long, default_value_t = -10, allow_negative_numbers = true)]
    pub j_min: i32,
    #[arg(long, default_value_t = 14, allow_negative_numbers = true)]
    pub j_max: i32,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ProblemFlags {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub nu: f64,
    #[arg(long, default_value_t = 1)]
    pub d: u32,
    /// Initial data, e.g. `gaussian:width=1`, `super_gaussian:width=1,power=2`, `zero`.
    #[arg(long, default_value = "gaussian")]
    pub profile: String,
    /// Spatial factor of a separable forcing.
    #[arg(long)]
    pub forcing_profile: Option<String>,
    /// Time factor of the forcing: `constant`, `power:exponent=1`, `cosine:frequency=0.5`.
    #[arg(long, default_value = "constant")]
    pub forcing_time: String,
    /// Order of each panel of the Duhamel time rule.
    #[arg(long, default_value_t = 8)]
    pub n_time: usize,
    #[arg(long, default_value_t = 64)]
    pub n_grid: usize,
    #[arg(long = "box", default_value_t = 20.0)]
    pub box_length: f64,
}

impl ProblemFlags {
    fn build(&self) -> Result<(ProblemSpec, BoxGrid)> {
        let initial = parse_profile(&self.profile)?;
        let mut spec = ProblemSpec::new(self.alpha, self.beta, self.mu, self.nu, initial)?;
        if let Some(fp) = &self.forcing_profile {
            spec = spec.with_forcing(Forcing {
                space: parse_profile(fp)?,
                time: parse_time_profile(&self.forcing_time)?,
            });
            spec.validate()?;
        }
        if self.n_time == 0 {
            return Err(invalid("n-time must be positive"));
        }
        let grid = BoxGrid::new(self.d, self.n_grid, self.box_length)?;
        Ok((spec, grid))
    }
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemFlags,
    #[arg(long, value_delimiter = ',', required = true)]
    pub t_list: Vec<f64>,
    /// Directory receiving one snapshot file per time.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SnapshotFormat::Csv)]
    pub snapshot_format: SnapshotFormat,
    /// Norm table `t,norm_2,norm_inf`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct DispersiveArgs {
    #[command(flatten)]
    pub problem: ProblemFlags,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
    /// Time exponent of the forcing norm; selects the Duhamel estimate.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub t_min: f64,
    #[arg(long)]
    pub t_max: f64,
    #[arg(long, default_value_t = 5)]
    pub t_points: usize,
    #[arg(long, value_enum, default_value_t = Mode::Fixed)]
    pub mode: Mode,
    /// Table `t,norm_q,bound`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

fn parse_number(key: &str, v: &str) -> Result<f64> {
    f64::from_str(v.trim()).map_err(|_| Error::Parse(format!("{key}: cannot read '{v}' as a number")))
}

fn parse_descriptor(text: &str) -> Result<(String, Vec<(String, f64)>)> {
    let (kind, rest) = match text.split_once(':') {
        Some((k, r)) => (k, r),
        None => (text, ""),
    };
    let mut fields = Vec::new();
    for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value in descriptor '{text}', found '{part}'")))?;
        fields.push((k.trim().to_string(), parse_number(k, v)?));
    }
    Ok((kind.trim().replace('-', "_"), fields))
}

fn take(fields: &[(String, f64)], key: &str, default: Option<f64>, text: &str) -> Result<f64> {
    fields
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| *v)
        .or(default)
        .ok_or_else(|| Error::Parse(format!("descriptor '{text}' needs {key}=…")))
}

fn reject_unknown(fields: &[(String, f64)], allowed: &[&str], text: &str) -> Result<()> {
    for (k, _) in fields {
        if !allowed.contains(&k.as_str()) {
            return Err(Error::Parse(format!("unknown field '{k}' in descriptor '{text}'")));
        }
    }
    Ok(())
}

/// Parses `kind[:key=value,…]` into a [`Profile`].
pub fn parse_profile(text: &str) -> Result<Profile> {
    let (kind, f) = parse_descriptor(text)?;
    let p = match kind.as_str() {
        "zero" => {
            reject_unknown(&f, &[], text)?;
            Profile::Zero
        }
        "gaussian" => {
            reject_unknown(&f, &["width", "amplitude"], text)?;
            Profile::Gaussian {
                amplitude: take(&f, "amplitude", Some(1.0), text)?,
                width: take(&f, "width", Some(1.0), text)?,
            }
        }
        "super_gaussian" => {
            reject_unknown(&f, &["width", "amplitude", "power"], text)?;
            Profile::SuperGaussian {
                amplitude: take(&f, "amplitude", Some(1.0), text)?,
                width: take(&f, "width", Some(1.0), text)?,
                power: take(&f, "power", Some(2.0), text)?,
            }
        }
        "modulated_gaussian" => {
            reject_unknown(&f, &["width", "amplitude", "wavenumber"], text)?;
            Profile::ModulatedGaussian {
                amplitude: take(&f, "amplitude", Some(1.0), text)?,
                width: take(&f, "width", Some(1.0), text)?,
                wavenumber: take(&f, "wavenumber", None, text)?,
            }
        }
        other => return Err(Error::Parse(format!("unknown profile '{other}'"))),
    };
    p.validate()?;
    Ok(p)
}

/// Parses `constant`, `power:exponent=…` or `cosine:frequency=…`.
pub fn parse_time_profile(text: &str) -> Result<TimeProfile> {
    let (kind, f) = parse_descriptor(text)?;
    match kind.as_str() {
        "constant" => {
            reject_unknown(&f, &[], text)?;
            Ok(TimeProfile::Constant)
        }
        "power" => {
            reject_unknown(&f, &["exponent"], text)?;
            Ok(TimeProfile::Power {
                exponent: take(&f, "exponent", None, text)?,
            })
        }
        "cosine" => {
            reject_unknown(&f, &["frequency"], text)?;
            Ok(TimeProfile::Cosine {
                frequency: take(&f, "frequency", None, text)?,
            })
        }
        other => Err(Error::Parse(format!("unknown time profile '{other}'"))),
    }
}

fn parse_range(text: &str) -> Result<(f64, f64)> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("expected lo:hi, found '{text}'")))?;
    let (a, b) = (parse_number("range", a)?, parse_number("range", b)?);
    if !(a < b) {
        return Err(invalid(format!("range {text} must have lo < hi")));
    }
    Ok((a, b))
}

/// Reads `key = value` lines, skipping blanks and `#` comments, into flag tokens.
pub fn config_to_args(text: &str) -> Result<Vec<OsString>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(Error::Config(format!("line {}: invalid key '{}'", n + 1, k.trim())));
        }
        out.push(OsString::from(format!("--{key}")));
        out.push(OsString::from(v.trim()));
    }
    Ok(out)
}

/// Splices `--config FILE` contents in front of the remaining flags.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy().into_owned();
        if s == "--config" {
            let path = it
                .next()
                .ok_or_else(|| Error::Config("--config needs a file argument".into()))?;
            config = Some(PathBuf::from(path));
        } else if let Some(p) = s.strip_prefix("--config=") {
            config = Some(PathBuf::from(p));
        } else {
            rest.push(a);
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let extra = config_to_args(&text)?;
    // program name, then the subcommand, then file values, then explicit flags
    let split = rest
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|i| i + 2)
        .unwrap_or(rest.len());
    let mut out: Vec<OsString> = rest[..split].to_vec();
    out.extend(extra);
    out.extend_from_slice(&rest[split..]);
    Ok(out)
}

fn open_out<'a>(path: &Option<PathBuf>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(stdout),
    })
}

fn emit_summary(summary: &Option<PathBuf>, out: &Option<PathBuf>, value: &Value, stdout: &mut dyn Write) -> Result<()> {
    let text = serde_json::to_string(value).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    match (summary, out) {
        (Some(p), _) => std::fs::write(p, format!("{text}\n"))?,
        (None, Some(_)) => writeln!(stdout, "{text}")?,
        (None, None) => {}
    }
    Ok(())
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                lo * (hi / lo).powf(k as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

fn cmd_mlf(a: &MlfArgs, stdout: &mut dyn Write) -> Result<()> {
    let (params, ray) = a.ray.build()?;
    if a.method != MlfMethod::Series {
        ray.require_decay(&params)?;
    }
    if !(a.r_min > 0.0 && a.r_max >= a.r_min && a.r_max.is_finite()) {
        return Err(invalid("need 0 < r-min <= r-max"));
    }
    if a.points == 0 || (a.points == 1 && a.r_max != a.r_min) {
        return Err(invalid("points must be positive, and one point needs r-min = r-max"));
    }
    let grid = log_grid(a.r_min, a.r_max, a.points);
    let contour = match a.method {
        MlfMethod::Contour => Some(ContourSpec::for_ray(&params, &ray)?),
        _ => None,
    };
    let rows: Vec<(f64, Complex64, &'static str)> = grid
        .par_iter()
        .map(|&r| -> Result<_> {
            Ok(match a.method {
                MlfMethod::Auto => {
                    let v = mlf_ray_detailed(&params, &ray, r)?;
                    (r, v.value, v.method.as_str())
                }
                MlfMethod::Series => (r, mlf_series(&params, ray.point(r))?, "series"),
                MlfMethod::Contour => {
                    let c = contour.as_ref().expect("contour prepared above");
                    (r, mlf_contour(&params, &ray, r.powf(ray.gamma), c)?, "contour")
                }
            })
        })
        .collect::<Result<_>>()?;
    let mut out = open_out(&a.out, stdout)?;
    match a.format {
        TableFormat::Csv => {
            writeln!(out, "r,re,im,method")?;
            for (r, v, m) in &rows {
                writeln!(out, "{},{},{},{m}", fmt17(*r), fmt17(v.re), fmt17(v.im))?;
            }
        }
        TableFormat::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|(r, v, m)| json!({"r": r, "re": v.re, "im": v.im, "method": m}))
                .collect();
            writeln!(out, "{}", json!({ "rows": rows }))?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Large-ξ slopes steeper than this are reported as super-polynomial decay.
const SUPER_POLYNOMIAL_SLOPE: f64 = -20.0;

fn cmd_kernel(a: &KernelArgs, stdout: &mut dyn Write) -> Result<()> {
    let (params, ray) = a.ray.build()?;
    ray.require_decay(&params)?;
    let (lo, hi) = parse_range(&a.xi_octaves)?;
    if a.per_octave == 0 {
        return Err(invalid("per-octave must be positive"));
    }
    let grid = log2_grid(lo, hi, a.per_octave);
    let (small_w, large_w) = match &a.slope_windows {
        None => default_slope_windows(&grid),
        Some(text) => {
            let (s, l) = text
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("slope windows need 'lo:hi,lo:hi', found '{text}'")))?;
            let (s, l) = (parse_range(s)?, parse_range(l)?);
            ((2f64.powf(s.0), 2f64.powf(s.1)), (2f64.powf(l.0), 2f64.powf(l.1)))
        }
    };
    let kt = KernelTransform::new(&params, &ray, a.d)?;
    let samples = kt.sample(&grid)?;
    let small = asymptotic_slope(&samples, small_w)?;
    let large = asymptotic_slope(&samples, large_w)?;
    let mut out = open_out(&a.out, stdout)?;
    samples.write_csv(&mut out)?;
    out.flush()?;
    drop(out);
    let summary = json!({
        "d": a.d,
        "gamma": ray.gamma,
        "small_xi_slope": finite_or_null(small),
        "large_xi_slope": finite_or_null(large),
        "expected_small_xi_slope": ray.gamma - a.d as f64,
        "super_polynomial": !(large > SUPER_POLYNOMIAL_SLOPE),
    });
    emit_summary(&a.summary, &a.out, &summary, stdout)
}

fn cmd_lp_verify(a: &LpArgs, stdout: &mut dyn Write) -> Result<()> {
    let (params, ray) = a.ray.build()?;
    ray.require_decay(&params)?;
    if let Some(p) = a.p.iter().find(|p| !(**p > 1.0)) {
        return Err(invalid(format!("p must exceed 1, got {p}")));
    }
    if a.j_max < a.j_min {
        return Err(invalid("j-max must not be below j-min"));
    }
    let reports = a
        .p
        .iter()
        .map(|&p| verify_band_bound(&params, &ray, a.d, p, a.j_min..=a.j_max))
        .collect::<Result<Vec<_>>>()?;
    let mut out = open_out(&a.out, stdout)?;
    writeln!(out, "p,j,ratio,band_norm,envelope")?;
    for rep in &reports {
        for row in &rep.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt17(rep.p),
                row.j,
                fmt17(row.ratio),
                fmt17(row.band_norm),
                fmt17(row.envelope)
            )?;
        }
    }
    out.flush()?;
    drop(out);
    let summary: Vec<Value> = reports
        .iter()
        .map(|r| {
            json!({
                "d": r.d, "gamma": r.gamma, "p": r.p,
                "max_ratio": finite_or_null(r.max_ratio),
                "positive_trend": finite_or_null(r.positive_trend),
                "upper_tail_rate": finite_or_null(r.upper_tail_rate),
                "lower_tail_rate": finite_or_null(r.lower_tail_rate),
                "predicted_upper_rate": r.predicted_upper_rate,
                "predicted_lower_rate": r.predicted_lower_rate,
                "admissible": r.admissible,
                "summable": r.summable,
            })
        })
        .collect();
    emit_summary(&a.summary, &a.out, &json!({ "reports": summary }), stdout)
}

fn warn(stderr: &mut dyn Write, kind: &str, message: &str) {
    let _ = writeln!(stderr, "{}", json!({"status": "warning", "kind": kind, "message": message}));
}

fn write_snapshot(field: &SpectralField, dir: &Path, k: usize, format: SnapshotFormat) -> Result<()> {
    let name = match format {
        SnapshotFormat::Csv => format!("snapshot_{k:03}.csv"),
        SnapshotFormat::Binary => format!("snapshot_{k:03}.mlf"),
    };
    let mut w = BufWriter::new(File::create(dir.join(name))?);
    match format {
        SnapshotFormat::Csv => field.write_csv(&mut w)?,
        SnapshotFormat::Binary => field.write_binary(&mut w)?,
    }
    w.flush()?;
    Ok(())
}

fn cmd_solve(a: &SolveArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let (spec, grid) = a.problem.build()?;
    if let Some(t) = a.t_list.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(invalid(format!("times must be finite and nonnegative, got {t}")));
    }
    if let Some(dir) = &a.out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let mut rows = Vec::with_capacity(a.t_list.len());
    for (k, &t) in a.t_list.iter().enumerate() {
        let mut field = if spec.initial.is_zero() && spec.forcing.is_some() {
            SpectralField::zeros(grid)
        } else {
            if let Some(msg) = resolution_warning(&spec, &grid, t)? {
                warn(stderr, "resolution", &format!("t = {t}: {msg}"));
            }
            solve_homogeneous(&spec, &grid, t)?
        };
        if spec.forcing.is_some() {
            let forced = ProblemSpec {
                initial: Profile::Zero,
                ..spec
            };
            let w = solve_inhomogeneous(&forced, &grid, t, a.problem.n_time)?;
            for (u, v) in field.values.iter_mut().zip(&w.values) {
                *u += v;
            }
        }
        field.check_box(DEFAULT_BOX_TOLERANCE)?;
        if let Some(dir) = &a.out_dir {
            write_snapshot(&field, dir, k, a.snapshot_format)?;
        }
        rows.push((t, field.norm(2.0), field.norm_inf()));
    }
    let mut out = open_out(&a.out, stdout)?;
    writeln!(out, "t,norm_2,norm_inf")?;
    for (t, n2, ni) in rows {
        writeln!(out, "{},{},{}", fmt17(t), fmt17(n2), fmt17(ni))?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_dispersive(a: &DispersiveArgs, stdout: &mut dyn Write) -> Result<()> {
    let (spec, grid) = a.problem.build()?;
    if !(a.t_min > 0.0 && a.t_max > a.t_min && a.t_max.is_finite()) || a.t_points < 3 {
        return Err(invalid("need 0 < t-min < t-max and at least three t-points"));
    }
    let t_grid = log_grid(a.t_min, a.t_max, a.t_points);
    let fit = match a.r {
        None => {
            let mode = match a.mode {
                Mode::Fixed => ProbeMode::FixedData,
                Mode::Scaled => ProbeMode::ScaledData,
            };
            verify_dispersive(&spec, &grid, a.p, a.q, &t_grid, mode)?
        }
        Some(r) => {
            if spec.forcing.is_none() {
                return Err(Error::Config("--r selects the Duhamel estimate and needs --forcing-profile".into()));
            }
            let forced = ProblemSpec {
                initial: Profile::Zero,
                ..spec
            };
            verify_inhomogeneous_decay(&forced, &grid, a.p, a.q, r, &t_grid, a.problem.n_time)?
        }
    };
    let mut out = open_out(&a.out, stdout)?;
    fit.write_csv(&mut out)?;
    out.flush()?;
    drop(out);
    let verdict = json!({
        "slope": finite_or_null(fit.slope),
        "expected": fit.expected,
        "tolerance": fit.tolerance,
        "prefactor_max": fit.prefactor_max,
        "pass": fit.pass,
    });
    emit_summary(&a.summary, &a.out, &verdict, stdout)
}

fn diagnostic(stderr: &mut dyn Write, kind: &str, message: &str, code: i32) -> i32 {
    let _ = writeln!(
        stderr,
        "{}",
        json!({"status": "error", "kind": kind, "message": message, "exit": code})
    );
    code
}

/// Parses `args` (program name first), runs the subcommand and returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => return diagnostic(stderr, e.kind(), &e.to_string(), 2),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{}", e.render());
                return 0;
            }
            let msg = e.render().to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            return diagnostic(stderr, "usage", &first, 2);
        }
    };
    let result = match &cli.command {
        Command::Mlf(a) => cmd_mlf(a, stdout),
        Command::Kernel(a) => cmd_kernel(a, stdout),
        Command::LpVerify(a) => cmd_lp_verify(a, stdout),
        Command::Solve(a) => cmd_solve(a, stdout, stderr),
        Command::Dispersive(a) => cmd_dispersive(a, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let code = if e.is_validation() { 2 } else { 3 };
            diagnostic(stderr, e.kind(), &e.to_string(), code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("mittag").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn exponential_row() {
        let (code, out, _) = call(&[
            "mlf", "--alpha", "1", "--beta", "1", "--s", "1", "--gamma", "1", "--r-min", "1", "--r-max", "1",
            "--points", "1",
        ]);
        assert_eq!(code, 0);
        let line = out.lines().nth(1).unwrap();
        let re: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((re - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn non_decay_ray_rejected() {
        let (code, _, err) = call(&[
            "mlf", "--alpha", "0.5", "--s", "0.1", "--r-min", "1", "--r-max", "2", "--points", "3",
        ]);
        assert_eq!(code, 2);
        assert!(err.contains("ray inside the non-decay sector"));
        let v: Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(v["exit"], 2);
    }

    #[test]
    fn missing_flag_is_usage_error() {
        let (code, _, err) = call(&["kernel", "--alpha", "0.5", "--s", "1"]);
        assert_eq!(code, 2);
        assert_eq!(err.lines().count(), 1);
    }

    #[test]
    fn p_one_rejected() {
        let (code, _, _) = call(&["lp-verify", "--alpha", "0.5", "--s", "1", "--gamma", "0.5", "--d", "1", "--p", "1"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn descriptors() {
        assert_eq!(parse_profile("gaussian").unwrap(), Profile::gaussian(1.0));
        assert_eq!(
            parse_profile("super-gaussian:width=2,power=3").unwrap(),
            Profile::SuperGaussian { amplitude: 1.0, width: 2.0, power: 3.0 }
        );
        assert!(parse_profile("gaussian:sigma=1").is_err());
        assert!(parse_profile("modulated_gaussian:width=1").is_err());
        assert_eq!(parse_time_profile("power:exponent=0.5").unwrap(), TimeProfile::Power { exponent: 0.5 });
        assert!(parse_time_profile("sine").is_err());
    }

    #[test]
    fn config_lines() {
        let a = config_to_args("# comment\nalpha = 0.5\n\nr_min=1\n").unwrap();
        assert_eq!(a, vec!["--alpha", "0.5", "--r-min", "1"]);
        assert!(config_to_args("alpha 0.5").is_err());
    }

    #[test]
    fn config_file_and_override() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "alpha = 1\nbeta = 1\ns = 1\nr-min = 1\nr-max = 1\npoints = 1\n").unwrap();
        let (code, out, _) = call(&["mlf", "--config", cfg.to_str().unwrap(), "--r-min", "2", "--r-max", "2"]);
        assert_eq!(code, 0, "{out}");
        let re: f64 = out.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
        assert!((re - (-2f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn hypothesis_violation_exit_two() {
        let (code, _, err) = call(&[
            "dispersive", "--alpha", "0.5", "--beta", "1", "--p", "1", "--q", "inf", "--t-min", "1", "--t-max",
            "100",
        ]);
        assert_eq!(code, 2);
        assert!(err.contains("hypothesis"));
        let (code, _, _) = call(&[
            "dispersive", "--alpha", "0.5", "--beta", "2", "--p", "2", "--q", "2", "--t-min", "1", "--t-max", "100",
        ]);
        assert_eq!(code, 2);
    }

    #[test]
    fn small_box_exit_three() {
        let (code, _, err) = call(&["solve", "--alpha", "1", "--beta", "2", "--t-list", "0,5", "--box", "6", "--n-grid", "32"]);
        assert_eq!(code, 3, "{err}");
        assert!(err.contains("domain too small"));
    }
}
