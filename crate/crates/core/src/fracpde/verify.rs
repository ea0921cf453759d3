use serde::Serialize;

use super::field::{fft_nd, BoxGrid, SpectralField};
use super::solve::{evolve, solve_inhomogeneous, KernelIndex, Multiplier};
use super::{ProblemSpec, TimeProfile};
use crate::error::{invalid, Error, Result};
use crate::lp::ls_slope;
use crate::quad::gauss_legendre;

/// Largest admissible ratio of boundary-layer to global maximum.
pub const DEFAULT_BOX_TOLERANCE: f64 = 1e-6;

/// Slope tolerance of the homogeneous decay fit.
pub const DISPERSIVE_SLOPE_TOLERANCE: f64 = 0.03;

/// Slack allowed above the predicted exponent of the Duhamel bound.
pub const INHOMOGENEOUS_SLOPE_SLACK: f64 = 0.05;

/// How the initial data depends on the probe time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeMode {
    /// The same data at every time.
    FixedData,
    /// Data widened by t^{α/β} at time t, which saturates the L^p→L^q bound.
    ScaledData,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayRow {
    pub t: f64,
    /// ‖u(t)‖_q
    pub norm: f64,
    /// The data norm the bound is stated in.
    pub data_norm: f64,
    pub ratio: f64,
    /// prefactor_max · t^expected · data_norm
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub expected: f64,
    pub tolerance: f64,
    /// max over rows of ratio · t^{−expected}
    pub prefactor_max: f64,
    pub rows: Vec<DecayRow>,
    pub pass: bool,
}

impl DecayFit {
    /// Writes the `t,norm_q,bound` table at 17 significant digits.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(["t", "norm_q", "bound"]).map_err(io)?;
        for r in &self.rows {
            w.write_record([format!("{:.16e}", r.t), format!("{:.16e}", r.norm), format!("{:.16e}", r.bound)])
                .map_err(io)?;
        }
        w.flush().map_err(Error::Io)
    }
}

fn check_exponents(p: f64, q: f64) -> Result<f64> {
    if !(p >= 1.0) || !(q > p) {
        return Err(Error::Hypothesis(format!("need 1 <= p < q <= inf, got p = {p}, q = {q}")));
    }
    Ok(1.0 / p - if q.is_infinite() { 0.0 } else { 1.0 / q })
}

fn check_times(t_grid: &[f64]) -> Result<()> {
    if t_grid.len() < 3 || t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(invalid("need at least three positive probe times"));
    }
    let (lo, hi) = t_grid
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &t| (a.min(t), b.max(t)));
    if hi / lo < 100.0 {
        return Err(invalid(format!(
            "probe times must span at least two decades, got [{lo}, {hi}]"
        )));
    }
    Ok(())
}

/// Errors when the sampled data carries more than `tol` of its peak Fourier
/// amplitude on the outer tenth of the frequency box.
fn check_resolution(f: &SpectralField, tol: f64) -> Result<()> {
    let grid = f.grid;
    let mut hat = f.values.clone();
    fft_nd(&grid, &mut hat, false);
    let peak = hat.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let cut = (0.4 * grid.n as f64).powi(2);
    let high = hat
        .iter()
        .enumerate()
        .filter(|(i, _)| grid.wavenumber_sq(*i) as f64 >= cut)
        .map(|(_, v)| v.norm())
        .fold(0.0, f64::max);
    if peak > 0.0 && high > tol * peak {
        return Err(Error::DomainTooSmall(format!(
            "data is under-resolved: {:.3e} of its spectrum sits near the Nyquist shell (n = {})",
            high / peak,
            grid.n
        )));
    }
    Ok(())
}

fn finish(t_grid: &[f64], norms: Vec<(f64, f64)>, expected: f64, tolerance: f64, one_sided: bool) -> DecayFit {
    let ratios: Vec<f64> = norms.iter().map(|(n, d)| n / d).collect();
    if ratios.iter().all(|r| *r == 0.0) {
        let rows = t_grid
            .iter()
            .zip(&norms)
            .map(|(&t, &(norm, data_norm))| DecayRow { t, norm, data_norm, ratio: 0.0, bound: 0.0 })
            .collect();
        return DecayFit {
            slope: f64::NEG_INFINITY,
            expected,
            tolerance,
            prefactor_max: 0.0,
            rows,
            pass: true,
        };
    }
    let xs: Vec<f64> = t_grid.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
    let slope = ls_slope(&xs, &ys);
    let prefactor_max = t_grid
        .iter()
        .zip(&ratios)
        .map(|(t, r)| r * t.powf(-expected))
        .fold(0.0, f64::max);
    let rows = t_grid
        .iter()
        .zip(&norms)
        .zip(&ratios)
        .map(|((&t, &(norm, data_norm)), &ratio)| DecayRow {
            t,
            norm,
            data_norm,
            ratio,
            bound: prefactor_max * t.powf(expected) * data_norm,
        })
        .collect();
    let pass = if one_sided {
        slope <= expected + tolerance
    } else {
        (slope - expected).abs() <= tolerance
    };
    DecayFit { slope, expected, tolerance, prefactor_max, rows, pass }
}

/// Fits the decay of ‖v(t)‖_q/‖f‖_p over `t_grid` against −(α/β)d(1/p − 1/q).
pub fn verify_dispersive(
    spec: &ProblemSpec,
    grid: &BoxGrid,
    p: f64,
    q: f64,
    t_grid: &[f64],
    mode: ProbeMode,
) -> Result<DecayFit> {
    spec.validate()?;
    spec.require_decay()?;
    let theta = check_exponents(p, q)?;
    let d = grid.d as f64;
    if !(theta < spec.beta / d) {
        return Err(Error::Hypothesis(format!(
            "1/p - 1/q = {theta} must stay below beta/d = {}",
            spec.beta / d
        )));
    }
    check_times(t_grid)?;
    let expected = -(spec.alpha / spec.beta) * d * theta;
    let mult = Multiplier::new(spec, KernelIndex::Homogeneous)?;
    let fixed = SpectralField::sample(*grid, |x| spec.initial.eval(x))?;
    let mut norms = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let data = match mode {
            ProbeMode::FixedData => fixed.clone(),
            ProbeMode::ScaledData => {
                let prof = spec.initial.scaled(t.powf(spec.alpha / spec.beta));
                SpectralField::sample(*grid, |x| prof.eval(x))?
            }
        };
        data.check_box(DEFAULT_BOX_TOLERANCE)?;
        check_resolution(&data, DEFAULT_BOX_TOLERANCE)?;
        let v = evolve(&mult, &data, t)?;
        v.check_box(DEFAULT_BOX_TOLERANCE)?;
        norms.push((v.norm(q), data.norm(p)));
    }
    Ok(finish(t_grid, norms, expected, DISPERSIVE_SLOPE_TOLERANCE, false))
}

/// ‖τ‖_{L^r(0,t)} for the separable forcing time factor.
fn time_norm(time: &TimeProfile, t: f64, r: f64) -> f64 {
    if r.is_infinite() {
        return time.sup(t);
    }
    match *time {
        TimeProfile::Constant => t.powf(1.0 / r),
        TimeProfile::Power { exponent } => t.powf(exponent + 1.0 / r) / (exponent * r + 1.0).powf(1.0 / r),
        TimeProfile::Cosine { frequency } => {
            let panels = ((4.0 * frequency.abs() * t).ceil() as usize).clamp(1, 1 << 20);
            let rule = gauss_legendre(16);
            let h = t / panels as f64;
            let s: f64 = (0..panels)
                .flat_map(|k| rule.mapped(k as f64 * h, (k + 1) as f64 * h).collect::<Vec<_>>())
                .map(|(x, w)| w * time.eval(x).abs().powf(r))
                .sum();
            s.powf(1.0 / r)
        }
    }
}

/// Fits the growth of ‖w(t)‖_q/‖F‖_{L^r(0,t; L^p)} for zero initial data and
/// checks it stays below (α/β)d(β/d − (1/p − 1/q)) − 1/r.
pub fn verify_inhomogeneous_decay(
    spec: &ProblemSpec,
    grid: &BoxGrid,
    p: f64,
    q: f64,
    r: f64,
    t_grid: &[f64],
    n_time: usize,
) -> Result<DecayFit> {
    spec.validate()?;
    spec.require_decay()?;
    let forcing = *spec.forcing_or_err()?;
    let theta = check_exponents(p, q)?;
    let d = grid.d as f64;
    let inv_r = if r.is_infinite() { 0.0 } else { 1.0 / r };
    if !(r >= 1.0) || !(spec.alpha * r > 1.0) {
        return Err(Error::Hypothesis(format!(
            "need 1/alpha < r, got alpha = {}, r = {r}",
            spec.alpha
        )));
    }
    let limit = (spec.beta / d) * (1.0 - inv_r / spec.alpha);
    if !(theta < limit) {
        return Err(Error::Hypothesis(format!(
            "1/p - 1/q = {theta} must stay below (beta/d)(1 - 1/(alpha r)) = {limit}"
        )));
    }
    check_times(t_grid)?;
    let expected = (spec.alpha / spec.beta) * d * (spec.beta / d - theta) - inv_r;
    let space = SpectralField::sample(*grid, |x| forcing.space.eval(x))?;
    space.check_box(DEFAULT_BOX_TOLERANCE)?;
    check_resolution(&space, DEFAULT_BOX_TOLERANCE)?;
    let space_norm = space.norm(p);
    let mut norms = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let w = solve_inhomogeneous(spec, grid, t, n_time)?;
        w.check_box(DEFAULT_BOX_TOLERANCE)?;
        norms.push((w.norm(q), space_norm * time_norm(&forcing.time, t, r)));
    }
    Ok(finish(t_grid, norms, expected, INHOMOGENEOUS_SLOPE_SLACK, true))
}
