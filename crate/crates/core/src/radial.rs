//! Fourier transforms of radial functions on ℝ^d under the e^{2πi x·ξ}
//! convention, computed as
//!
//! φ̂(ξ) = (2π)^{d/2} ∫₀^∞ φ₀(r) r^{d−1} g_λ(2π|ξ|r) dr,  g_λ(x) = x^{−λ}J_λ(x),  λ = d/2 − 1,
//!
//! which is the Hankel form with the power of |ξ| folded into the entire
//! function g_λ. The r-axis is cut into the smooth dyadic partition of
//! [`crate::lp::band_multiplier`]; each block is integrated by composite
//! Gauss–Legendre with the oscillation resolved, and the block sums are
//! accelerated when the integral is only conditionally convergent.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bessel::{BesselOrder, BesselTable};
use crate::error::{invalid, Error, GridEnd, Result};
use crate::gamma::{gamma, rgamma};
use crate::lp::{bump, bump_complement};
use crate::mlf::{MlParams, RayEvaluator, RaySpec};
use crate::quad::{gauss_legendre, iterated_aitken};

const ORDER: usize = 16;
const NODES_PER_PERIOD: f64 = 10.0;
const BLOCK_BUDGET: usize = 80;
const ACCELERATED_AGREEMENT: f64 = 1e-8;
/// Values whose modulus is below this multiple of ε·Σ|terms| are indistinguishable from zero.
const NOISE_MULTIPLE: f64 = 64.0;

/// Breakpoints in t = r/A of the bump transition on [A, 2A], graded toward
/// both ends where the step flattens.
const TRANSITION_BREAKS: [f64; 15] = [
    1.0, 1.01, 1.025, 1.05, 1.1, 1.2, 1.35, 1.5, 1.65, 1.8, 1.9, 1.95, 1.975, 1.99, 2.0,
];

type ProfileFn = dyn Fn(f64) -> Complex64 + Send + Sync;

/// Radial function φ(x) = φ₀(|x|).
#[derive(Clone)]
pub struct RadialProfile {
    evaluator: Arc<ProfileFn>,
    /// |φ₀(r)| ≲ r^{−hint} as r → ∞; infinity for faster than any power.
    pub decay_exponent_hint: f64,
    breakpoints: Vec<f64>,
    support: Option<f64>,
    oscillatory: bool,
}

impl std::fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialProfile")
            .field("decay_exponent_hint", &self.decay_exponent_hint)
            .field("breakpoints", &self.breakpoints)
            .field("support", &self.support)
            .field("oscillatory", &self.oscillatory)
            .finish()
    }
}

impl RadialProfile {
    pub fn new<F>(evaluator: F, decay_exponent_hint: f64) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        RadialProfile {
            evaluator: Arc::new(evaluator),
            decay_exponent_hint,
            breakpoints: Vec::new(),
            support: None,
            oscillatory: false,
        }
    }

    /// Radii where φ₀ or a derivative jumps; quadrature panels are split there.
    pub fn with_breakpoints(mut self, mut points: Vec<f64>) -> Self {
        points.retain(|p| *p > 0.0 && p.is_finite());
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        self.breakpoints = points;
        self
    }

    /// φ₀ vanishes for r > `radius`.
    pub fn with_support(mut self, radius: f64) -> Self {
        self.support = Some(radius);
        self
    }

    /// Allows block acceleration for profiles that are not absolutely integrable against r^{d−1}.
    pub fn with_oscillatory_summation(mut self, enabled: bool) -> Self {
        self.oscillatory = enabled;
        self
    }

    pub fn gaussian() -> Self {
        RadialProfile::new(|r| Complex64::new((-r * r).exp(), 0.0), f64::INFINITY)
    }

    /// Indicator of [a, b].
    pub fn indicator(a: f64, b: f64) -> Self {
        RadialProfile::new(
            move |r| Complex64::new(if r >= a && r <= b { 1.0 } else { 0.0 }, 0.0),
            f64::INFINITY,
        )
        .with_breakpoints(vec![a, b])
        .with_support(b)
    }

    /// r ↦ E_{α,β}(e^{iπs} r^γ) with oscillatory summation enabled.
    pub fn kernel(evaluator: Arc<RayEvaluator>) -> Self {
        let p = *evaluator.params();
        let gamma_exp = evaluator.ray().gamma;
        // Leading algebraic term −z^{−k}/Γ(β − αk) with the first non-vanishing coefficient.
        let hint = (1..=64)
            .find(|&k| rgamma(p.beta - p.alpha * k as f64) != 0.0)
            .map(|k| k as f64 * gamma_exp)
            .unwrap_or(f64::INFINITY);
        RadialProfile::new(move |r| evaluator.eval(r), hint).with_oscillatory_summation(true)
    }

    pub fn eval(&self, r: f64) -> Complex64 {
        if let Some(s) = self.support {
            if r > s {
                return Complex64::new(0.0, 0.0);
            }
        }
        (self.evaluator)(r)
    }

    /// Linear combination a·self + b·other.
    pub fn combine(&self, a: Complex64, other: &RadialProfile, b: Complex64) -> RadialProfile {
        let (f, g) = (self.clone(), other.clone());
        let mut bp = self.breakpoints.clone();
        bp.extend_from_slice(&other.breakpoints);
        let support = match (self.support, other.support) {
            (Some(x), Some(y)) => Some(x.max(y)),
            _ => None,
        };
        RadialProfile {
            evaluator: Arc::new(move |r| a * f.eval(r) + b * g.eval(r)),
            decay_exponent_hint: self.decay_exponent_hint.min(other.decay_exponent_hint),
            breakpoints: Vec::new(),
            support,
            oscillatory: self.oscillatory || other.oscillatory,
        }
        .with_breakpoints(bp)
    }

    fn absolutely_integrable(&self, d: u32) -> bool {
        self.support.is_some() || self.decay_exponent_hint > d as f64
    }
}

/// Sampled transform ξ ↦ φ̂(ξ) on a strictly increasing grid of |ξ|.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSamples {
    xi_grid: Vec<f64>,
    values: Vec<Complex64>,
    d: u32,
}

impl RadialSamples {
    pub fn new(xi_grid: Vec<f64>, values: Vec<Complex64>, d: u32) -> Result<Self> {
        if d == 0 {
            return Err(invalid("dimension must be positive"));
        }
        if xi_grid.len() != values.len() {
            return Err(invalid(format!(
                "grid has {} points but {} values were given",
                xi_grid.len(),
                values.len()
            )));
        }
        if xi_grid.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(invalid("grid points must be positive and finite"));
        }
        if xi_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("grid must be strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("sample values must be finite"));
        }
        Ok(RadialSamples { xi_grid, values, d })
    }

    pub fn xi_grid(&self) -> &[f64] {
        &self.xi_grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn len(&self) -> usize {
        self.xi_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi_grid.is_empty()
    }

    /// CSV with header `xi,re,im`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(["xi", "re", "im"]).map_err(io)?;
        for (x, v) in self.xi_grid.iter().zip(&self.values) {
            w.write_record([fmt17(*x), fmt17(v.re), fmt17(v.im)]).map_err(io)?;
        }
        w.flush().map_err(Error::Io)
    }

    pub fn read_csv<R: Read>(input: R, d: u32) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        let header = rd.headers().map_err(|e| Error::Parse(e.to_string()))?;
        if header.iter().collect::<Vec<_>>() != ["xi", "re", "im"] {
            return Err(Error::Parse(format!("unexpected header {:?}", header)));
        }
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Parse("short row".into()))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(e.to_string()))
            };
            grid.push(num(0)?);
            values.push(Complex64::new(num(1)?, num(2)?));
        }
        RadialSamples::new(grid, values, d)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path, d: u32) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        RadialSamples::read_csv(std::io::BufReader::new(f), d)
    }
}

/// Fixed 17-significant-digit scientific format used by every text output.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Admissible range (1, upper) or (1, upper] of L^p exponents for the kernel transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentRange {
    pub gamma: f64,
    pub d: u32,
    pub lower: f64,
    pub upper: f64,
    pub upper_inclusive: bool,
}

impl ExponentRange {
    pub fn contains(&self, p: f64) -> bool {
        p > self.lower && (p < self.upper || (self.upper_inclusive && p == self.upper))
    }
}

/// p > 1 and γ p′ > d, with p′ = 1 at p = ∞.
pub fn is_admissible(gamma: f64, d: u32, p: f64) -> bool {
    if !(p > 1.0) {
        return false;
    }
    let conj = if p.is_infinite() { 1.0 } else { p / (p - 1.0) };
    gamma * conj > d as f64
}

pub fn admissible_exponents(gamma: f64, d: u32) -> ExponentRange {
    let df = d as f64;
    let (upper, upper_inclusive) = if gamma > df {
        (f64::INFINITY, true)
    } else if gamma == df {
        (f64::INFINITY, false)
    } else {
        (df / (df - gamma), false)
    };
    ExponentRange {
        gamma,
        d,
        lower: 1.0,
        upper,
        upper_inclusive,
    }
}

/// Which part of the dyadic partition a quadrature covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    /// h(r/2^j): everything below 2^{j+1}.
    Low(i32),
    /// h(r/2^j) − h(r/2^{j−1}) on [2^{j−1}, 2^{j+1}].
    Band(i32),
}

#[derive(Clone)]
enum Reduced {
    Cos,
    Sinc,
    Table(Arc<BesselTable>),
}

impl Reduced {
    fn for_dimension(d: u32) -> Result<Self> {
        static CACHE: OnceLock<Mutex<HashMap<u32, Arc<BesselTable>>>> = OnceLock::new();
        match d {
            0 => Err(invalid("dimension must be positive")),
            1 => Ok(Reduced::Cos),
            3 => Ok(Reduced::Sinc),
            _ => {
                let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
                if let Some(t) = cache.lock().unwrap().get(&d) {
                    return Ok(Reduced::Table(t.clone()));
                }
                let table = Arc::new(BesselTable::new(BesselOrder::from_dimension(d)?)?);
                cache.lock().unwrap().insert(d, table.clone());
                Ok(Reduced::Table(table))
            }
        }
    }

    /// x^{−λ}J_λ(x) for λ = d/2 − 1.
    #[inline]
    fn eval(&self, x: f64) -> f64 {
        const NORM: f64 = 0.797_884_560_802_865_4; // √(2/π)
        match self {
            Reduced::Cos => NORM * x.cos(),
            Reduced::Sinc => {
                if x.abs() < 1e-4 {
                    NORM * (1.0 - x * x / 6.0)
                } else {
                    NORM * x.sin() / x
                }
            }
            Reduced::Table(t) => t.reduced(x),
        }
    }
}

/// Precomputed nodes r_i and weights W_i = w_i·window(r_i)·φ₀(r_i)·r_i^{d−1} for one window.
pub struct BandQuadrature {
    radii: Vec<f64>,
    weights: Vec<Complex64>,
    reduced: Reduced,
    scale: f64,
}

fn split_panels(breaks: &[f64], extra: &[f64], clip: Option<f64>) -> Vec<(f64, f64)> {
    let (lo, hi) = (breaks[0], *breaks.last().unwrap());
    let mut pts: Vec<f64> = breaks.to_vec();
    pts.extend(extra.iter().copied().filter(|&p| p > lo && p < hi));
    if let Some(c) = clip {
        if c > lo && c < hi {
            pts.push(c);
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs());
    pts.windows(2)
        .map(|w| (w[0], w[1]))
        .filter(|(a, _)| clip.is_none_or(|c| *a < c))
        .collect()
}

impl BandQuadrature {
    /// Builds the node set for `window`, resolving oscillations up to `xi_max`.
    pub fn new(
        profile: &(dyn Fn(f64) -> Complex64 + Sync),
        breakpoints: &[f64],
        d: u32,
        window: Window,
        xi_max: f64,
    ) -> Result<Self> {
        Self::with_support(profile, breakpoints, None, d, window, xi_max)
    }

    fn with_support(
        profile: &(dyn Fn(f64) -> Complex64 + Sync),
        breakpoints: &[f64],
        support: Option<f64>,
        d: u32,
        window: Window,
        xi_max: f64,
    ) -> Result<Self> {
        let reduced = Reduced::for_dimension(d)?;
        // (panel, which weight applies): 0 = flat, 1 = h(r/A), 2 = 1 − h(r/A)
        let mut panels: Vec<(f64, f64, u8, f64)> = Vec::new();
        let mut transition = |a: f64, kind: u8| {
            let breaks: Vec<f64> = TRANSITION_BREAKS.iter().map(|t| t * a).collect();
            for (p, q) in split_panels(&breaks, breakpoints, support) {
                panels.push((p, q, kind, a));
            }
        };
        match window {
            Window::Band(j) => {
                let a = 2f64.powi(j);
                transition(0.5 * a, 2);
                transition(a, 1);
            }
            Window::Low(j) => {
                let a = 2f64.powi(j);
                transition(a, 1);
                // Half-octave panels toward the origin, then one panel to 0.
                let mut breaks: Vec<f64> = (0..=120).rev().map(|k| a * 2f64.powf(-0.5 * k as f64)).collect();
                breaks.insert(0, 0.0);
                for (p, q) in split_panels(&breaks, breakpoints, support) {
                    panels.push((p, q, 0, a));
                }
            }
        }
        let rule = gauss_legendre(ORDER);
        let df = d as i32 - 1;
        let mut radii = Vec::new();
        let mut raw = Vec::new();
        for (p, q, kind, a) in panels {
            let periods = (q - p) * xi_max;
            let m = ((periods * NODES_PER_PERIOD / ORDER as f64).ceil() as usize).max(1);
            let h = (q - p) / m as f64;
            for i in 0..m {
                let (pa, pb) = (p + i as f64 * h, p + (i + 1) as f64 * h);
                for (r, w) in rule.mapped(pa, pb) {
                    let win = match kind {
                        0 => 1.0,
                        1 => bump(r / a),
                        _ => bump_complement(r / a),
                    };
                    if win == 0.0 {
                        continue;
                    }
                    radii.push(r);
                    raw.push(w * win * r.powi(df));
                }
            }
        }
        let values: Vec<Complex64> = if radii.len() > 4096 {
            radii.par_iter().map(|&r| profile(r)).collect()
        } else {
            radii.iter().map(|&r| profile(r)).collect()
        };
        let weights: Vec<Complex64> = values.iter().zip(&raw).map(|(v, w)| v * *w).collect();
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Domain("profile is not finite on the quadrature nodes".into()));
        }
        Ok(BandQuadrature {
            radii,
            weights,
            reduced,
            scale: (2.0 * PI).powf(d as f64 / 2.0),
        })
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// The window's contribution to φ̂(ξ) and the absolute sum of the terms.
    pub fn eval_with_mass(&self, xi: f64) -> (Complex64, f64) {
        let k = 2.0 * PI * xi;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut mass = 0.0;
        for (r, w) in self.radii.iter().zip(&self.weights) {
            let g = self.reduced.eval(k * r);
            acc += w * g;
            mass += w.norm() * g.abs();
        }
        (acc * self.scale, mass * self.scale)
    }

    /// The window's contribution, flushed to zero when it is below roundoff of the terms.
    pub fn eval(&self, xi: f64) -> Complex64 {
        let (v, mass) = self.eval_with_mass(xi);
        if v.norm() <= NOISE_MULTIPLE * f64::EPSILON * mass {
            Complex64::new(0.0, 0.0)
        } else {
            v
        }
    }
}

/// Diagnostics of one transform value.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TransformValue {
    #[serde(skip)]
    pub value: Complex64,
    pub blocks: usize,
    pub accelerated: bool,
    /// Roundoff level ε·Σ|terms|; values below it are returned as zero.
    pub noise_floor: f64,
}

/// φ̂(ξ) for a radial profile on ℝ^d.
pub fn radial_fourier(profile: &RadialProfile, d: u32, xi: f64) -> Result<Complex64> {
    radial_fourier_detailed(profile, d, xi).map(|v| v.value)
}

pub fn radial_fourier_detailed(profile: &RadialProfile, d: u32, xi: f64) -> Result<TransformValue> {
    if d == 0 {
        return Err(invalid("dimension must be positive"));
    }
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::Domain(format!("xi must be positive and finite, got {xi}")));
    }
    let integrable = profile.absolutely_integrable(d);
    if !integrable && !profile.oscillatory {
        return Err(Error::Domain(format!(
            "profile decays like r^-{} and is not integrable against r^{}; enable oscillatory summation",
            profile.decay_exponent_hint,
            d - 1
        )));
    }
    let f = |r: f64| profile.eval(r);
    let build = |w: Window| {
        BandQuadrature::with_support(&f, &profile.breakpoints, profile.support, d, w, xi)
    };
    // The low window stays below one oscillation period.
    let j0 = (1.0 / (4.0 * PI * xi)).log2().floor() as i32;
    let (low, low_mass) = build(Window::Low(j0))?.eval_with_mass(xi);
    let mut sum = low;
    let mut partial = vec![sum];
    let mut accelerated: Vec<Complex64> = Vec::new();
    let mut max_mass = low_mass;
    let mut quiet = 0;
    for n in 1..=BLOCK_BUDGET {
        let j = j0 + n as i32;
        let lo_edge = 2f64.powi(j - 1);
        if profile.support.is_some_and(|s| lo_edge >= s) {
            return Ok(finish(sum, n, false, max_mass));
        }
        let (b, mass) = build(Window::Band(j))?.eval_with_mass(xi);
        sum += b;
        partial.push(sum);
        max_mass = max_mass.max(mass);
        let noise = NOISE_MULTIPLE * f64::EPSILON * mass;
        if b.norm() <= 1e-16 * sum.norm() + noise {
            quiet += 1;
        } else {
            quiet = 0;
        }
        // The block sits past the first oscillation once 2^{j−1}ξ ≥ 1.
        let past_onset = lo_edge * xi >= 1.0;
        if past_onset && quiet >= 2 {
            return Ok(finish(sum, n, false, max_mass));
        }
        if !integrable && past_onset {
            let start = partial.len().saturating_sub(12);
            if let Some(a) = iterated_aitken(&partial[start..]) {
                accelerated.push(a);
            }
            let k = accelerated.len();
            if k >= 3 {
                let (a0, a1, a2) = (accelerated[k - 3], accelerated[k - 2], accelerated[k - 1]);
                let tol = ACCELERATED_AGREEMENT * a2.norm() + NOISE_MULTIPLE * f64::EPSILON * max_mass;
                if (a2 - a1).norm() <= tol && (a1 - a0).norm() <= tol {
                    return Ok(finish(a2, n, true, max_mass));
                }
            }
        }
    }
    let tail: Vec<String> = accelerated
        .iter()
        .rev()
        .take(3)
        .map(|a| format!("{:.6e}{:+.6e}i", a.re, a.im))
        .collect();
    Err(Error::OscillatorySummation {
        blocks: BLOCK_BUDGET,
        detail: format!(
            "xi={xi}, last partial sum {:.6e}, last accelerated iterates [{}]",
            sum.norm(),
            tail.join(", ")
        ),
    })
}

fn finish(value: Complex64, blocks: usize, accelerated: bool, mass: f64) -> TransformValue {
    let noise_floor = NOISE_MULTIPLE * f64::EPSILON * mass;
    let value = if value.norm() <= noise_floor {
        Complex64::new(0.0, 0.0)
    } else {
        value
    };
    TransformValue {
        value,
        blocks,
        accelerated,
        noise_floor,
    }
}

/// Transform of r ↦ E_{α,β}(e^{iπs} r^γ) with the evaluator shared across ξ.
#[derive(Debug, Clone)]
pub struct KernelTransform {
    profile: RadialProfile,
    d: u32,
}

impl KernelTransform {
    pub fn new(params: &MlParams, ray: &RaySpec, d: u32) -> Result<Self> {
        if d == 0 {
            return Err(invalid("dimension must be positive"));
        }
        let ev = Arc::new(RayEvaluator::new(params, ray)?);
        Ok(KernelTransform {
            profile: RadialProfile::kernel(ev),
            d,
        })
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn eval(&self, xi: f64) -> Result<Complex64> {
        radial_fourier(&self.profile, self.d, xi)
    }

    /// Transform on a grid, evaluated in parallel.
    pub fn sample(&self, xi_grid: &[f64]) -> Result<RadialSamples> {
        let values = xi_grid
            .par_iter()
            .map(|&xi| self.eval(xi))
            .collect::<Result<Vec<_>>>()?;
        RadialSamples::new(xi_grid.to_vec(), values, self.d)
    }
}

/// (E_{α,β}(e^{iπs}|·|^γ))^(ξ) on ℝ^d.
pub fn mlf_kernel_hat(params: &MlParams, ray: &RaySpec, d: u32, xi: f64) -> Result<Complex64> {
    KernelTransform::new(params, ray, d)?.eval(xi)
}

/// 2^{lo}, …, 2^{hi} with `per_octave` points per octave.
pub fn log2_grid(lo: f64, hi: f64, per_octave: u32) -> Vec<f64> {
    let n = ((hi - lo) * per_octave as f64).round() as i64;
    (0..=n).map(|k| 2f64.powf(lo + k as f64 / per_octave as f64)).collect()
}

/// 2^{−14} … 2^{10}, 8 points per octave.
pub fn default_xi_grid() -> Vec<f64> {
    log2_grid(-14.0, 10.0, 8)
}

/// Lowest five octaves and highest four octaves of a grid.
pub fn default_slope_windows(grid: &[f64]) -> ((f64, f64), (f64, f64)) {
    let first = grid[0];
    let last = *grid.last().unwrap();
    ((first, first * 32.0), (last / 16.0, last))
}

/// Least-squares slope of log|value| against log ξ inside `window`.
///
/// A window whose last sample is exactly zero has decayed below roundoff and
/// reports −∞; a window starting at zero reports +∞.
pub fn asymptotic_slope(samples: &RadialSamples, window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = (window.0.min(window.1), window.0.max(window.1));
    let inside: Vec<(f64, f64)> = samples
        .xi_grid
        .iter()
        .zip(&samples.values)
        .filter(|(x, _)| **x >= lo * (1.0 - 1e-12) && **x <= hi * (1.0 + 1e-12))
        .map(|(x, v)| (*x, v.norm()))
        .collect();
    if inside.len() < 6 {
        return Err(Error::InsufficientPoints {
            needed: 6,
            found: inside.len(),
        });
    }
    if inside.last().unwrap().1 == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if inside[0].1 == 0.0 {
        return Ok(f64::INFINITY);
    }
    let pts: Vec<(f64, f64)> = inside
        .into_iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|(x, v)| (x.ln(), v.ln()))
        .collect();
    if pts.len() < 6 {
        return Err(Error::InsufficientPoints {
            needed: 6,
            found: pts.len(),
        });
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    Ok(crate::lp::ls_slope(&xs, &ys))
}

/// Treatment of the integrand beyond the sampled grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpNormOptions {
    /// Extrapolate power laws past both ends; otherwise the samples are taken to cover the support.
    pub extrapolate: bool,
    /// Largest relative contribution tolerated from the extrapolated pieces.
    pub coverage_tol: f64,
    /// Number of end points used in each slope fit.
    pub fit_points: usize,
}

impl Default for LpNormOptions {
    fn default() -> Self {
        LpNormOptions {
            extrapolate: true,
            coverage_tol: 1e-6,
            fit_points: 4,
        }
    }
}

/// Relative level below which sampled magnitudes are treated as roundoff.
const NOISE_FLOOR: f64 = 1e-13;

/// Surface area of the unit sphere in ℝ^d (2 for d = 1).
pub fn sphere_area(d: u32) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

/// L^p(ℝ^d) norm of a radial function from its samples.
pub fn lp_norm_radial(samples: &RadialSamples, p: f64) -> Result<f64> {
    lp_norm_radial_with(samples, p, &LpNormOptions::default())
}

pub fn lp_norm_radial_with(samples: &RadialSamples, p: f64, opts: &LpNormOptions) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(invalid(format!("p must be at least 1, got {p}")));
    }
    let n = samples.len();
    let k = opts.fit_points.max(2);
    if n < 2 * k {
        return Err(Error::InsufficientPoints {
            needed: 2 * k,
            found: n,
        });
    }
    let ln_x: Vec<f64> = samples.xi_grid.iter().map(|x| x.ln()).collect();
    let mods: Vec<f64> = samples.values.iter().map(|v| v.norm()).collect();
    // Samples this far below the peak are quadrature roundoff; a slope fitted
    // through them says nothing about the function, so such an end counts as resolved.
    let floor = NOISE_FLOOR * mods.iter().copied().fold(0.0, f64::max);
    let fit = |idx: std::ops::Range<usize>, ys: &[f64]| -> Option<f64> {
        if idx.clone().any(|i| ys[i] == 0.0) || idx.clone().all(|i| mods[i] <= floor) {
            return None;
        }
        let xs: Vec<f64> = idx.clone().map(|i| ln_x[i]).collect();
        let ls: Vec<f64> = idx.map(|i| ys[i].ln()).collect();
        Some(crate::lp::ls_slope(&xs, &ls))
    };

    if p.is_infinite() {
        let max = mods.iter().copied().fold(0.0, f64::max);
        if opts.extrapolate {
            if let Some(s) = fit(0..k, &mods) {
                if s < -1e-3 {
                    return Err(Error::GridCoverage {
                        end: GridEnd::Head,
                        divergent: true,
                        detail: format!("|value| grows like xi^{s:.4} toward xi -> 0"),
                    });
                }
            }
            if let Some(s) = fit(n - k..n, &mods) {
                if s > 1e-3 {
                    return Err(Error::GridCoverage {
                        end: GridEnd::Tail,
                        divergent: true,
                        detail: format!("|value| grows like xi^{s:.4} toward xi -> infinity"),
                    });
                }
            }
        }
        return Ok(max);
    }

    let d = samples.d as i32;
    // ∫|v|^p ξ^{d−1} dξ = ∫ F d(ln ξ) with F = |v|^p ξ^d.
    let big_f: Vec<f64> = mods
        .iter()
        .zip(&samples.xi_grid)
        .map(|(m, x)| m.powf(p) * x.powi(d))
        .collect();
    let mut body = 0.0;
    for i in 1..n {
        body += 0.5 * (big_f[i] + big_f[i - 1]) * (ln_x[i] - ln_x[i - 1]);
    }
    let mut total = body;
    if opts.extrapolate {
        let head = match fit(0..k, &big_f) {
            None => 0.0,
            Some(s) if s <= 0.0 => {
                return Err(Error::GridCoverage {
                    end: GridEnd::Head,
                    divergent: true,
                    detail: format!("integrand |v|^p xi^d behaves like xi^{s:.4} toward xi -> 0"),
                })
            }
            Some(s) => big_f[0] / s,
        };
        let tail = match fit(n - k..n, &big_f) {
            None => 0.0,
            Some(s) if s >= 0.0 => {
                return Err(Error::GridCoverage {
                    end: GridEnd::Tail,
                    divergent: true,
                    detail: format!("integrand |v|^p xi^d behaves like xi^{s:.4} toward xi -> infinity"),
                })
            }
            Some(s) => big_f[n - 1] / -s,
        };
        total += head + tail;
        for (end, piece) in [(GridEnd::Head, head), (GridEnd::Tail, tail)] {
            if piece > opts.coverage_tol * total {
                return Err(Error::GridCoverage {
                    end,
                    divergent: false,
                    detail: format!(
                        "extrapolated piece is {:.3e} of the total, above {:.1e}",
                        piece / total,
                        opts.coverage_tol
                    ),
                });
            }
        }
    }
    Ok((sphere_area(samples.d) * total).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_hat(d: u32, xi: f64) -> f64 {
        PI.powf(d as f64 / 2.0) * (-PI * PI * xi * xi).exp()
    }

    #[test]
    fn transition_rule_integrates_bump() {
        // h(t) + h(3 − t) = 1, so ∫₁² h = 1/2.
        let rule = gauss_legendre(ORDER);
        let mut acc = 0.0;
        for w in TRANSITION_BREAKS.windows(2) {
            for (t, wt) in rule.mapped(w[0], w[1]) {
                acc += wt * bump(t);
            }
        }
        assert!((acc - 0.5).abs() < 1e-15, "{acc}");
    }

    #[test]
    fn gaussian_closed_forms() {
        for &(d, xi) in &[(2u32, 1.0), (3, 0.5), (1, 0.25), (4, 0.7)] {
            let got = radial_fourier(&RadialProfile::gaussian(), d, xi).unwrap();
            let want = gaussian_hat(d, xi);
            assert!((got.re - want).abs() < 1e-12 * want + 1e-14, "d={d} xi={xi} {got} {want}");
            assert!(got.im.abs() < 1e-15);
        }
    }

    #[test]
    fn indicator_sinc_zero() {
        let v = radial_fourier(&RadialProfile::indicator(0.0, 1.0), 1, 1.0).unwrap();
        assert!(v.norm() < 1e-14, "{v}");
        let v = radial_fourier(&RadialProfile::indicator(0.0, 1.0), 1, 0.25).unwrap();
        assert!((v.re - (PI / 2.0).sin() / (PI * 0.25)).abs() < 1e-13);
    }

    #[test]
    fn zero_xi_is_a_domain_error() {
        assert!(matches!(radial_fourier(&RadialProfile::gaussian(), 1, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn slow_profile_needs_opt_in() {
        let p = RadialProfile::new(|r| Complex64::new((1.0 + r * r).powf(-0.25), 0.0), 0.5);
        assert!(matches!(radial_fourier(&p, 1, 1.0), Err(Error::Domain(_))));
        // (1 + r²)^{−1/4} on ℝ: 2∫₀^∞ (1+r²)^{−1/4} cos(2πξr) dr = 2√π/Γ(1/4)·(πξ)^{−1/4}·K_{1/4}(2πξ)
        let p = p.with_oscillatory_summation(true);
        let xi = 0.5;
        let got = radial_fourier(&p, 1, xi).unwrap();
        // K_{1/4}(π) = 0.0456575... from the integral ∫₀^∞ e^{−π cosh t} cosh(t/4) dt
        let k = {
            let rule = gauss_legendre(64);
            rule.mapped(0.0, 6.0)
                .map(|(t, w)| w * (-PI * t.cosh()).exp() * (0.25 * t).cosh())
                .sum::<f64>()
        };
        let want = 2.0 * PI.sqrt() / gamma(0.25) * (PI * xi).powf(-0.25) * k;
        assert!((got.re - want).abs() < 1e-8 * want, "{got} {want}");
    }

    #[test]
    fn admissible_ranges() {
        let r = admissible_exponents(2.0, 2);
        assert_eq!((r.upper, r.upper_inclusive), (f64::INFINITY, false));
        let r = admissible_exponents(4.0, 2);
        assert!(r.upper_inclusive && r.contains(f64::INFINITY));
        let r = admissible_exponents(1.0, 2);
        assert_eq!(r.upper, 2.0);
        assert!(r.contains(1.9) && !r.contains(2.0) && !r.contains(1.0));
        assert!(is_admissible(1.0, 2, 1.9) && !is_admissible(1.0, 2, 2.1));
    }

    #[test]
    fn lp_norm_of_constant_on_interval() {
        let grid = log2_grid(0.0, 1.0, 4096);
        let vals = vec![Complex64::new(1.0, 0.0); grid.len()];
        let s = RadialSamples::new(grid, vals, 1).unwrap();
        let opts = LpNormOptions {
            extrapolate: false,
            ..Default::default()
        };
        let v = lp_norm_radial_with(&s, 1.0, &opts).unwrap();
        assert!((v - 2.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn lp_norm_of_gaussian_samples() {
        let grid = log2_grid(-30.0, 3.0, 32);
        let vals: Vec<Complex64> = grid.iter().map(|&x| Complex64::new(gaussian_hat(1, x), 0.0)).collect();
        let s = RadialSamples::new(grid, vals, 1).unwrap();
        let want = (PI / 2.0).powf(0.25);
        let got = lp_norm_radial(&s, 2.0).unwrap();
        assert!((got - want).abs() < 1e-4 * want, "{got} {want}");
        assert!((lp_norm_radial(&s, f64::INFINITY).unwrap() - PI.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn lp_norm_flags_short_head() {
        let grid = log2_grid(-8.0, 3.0, 8);
        let vals: Vec<Complex64> = grid.iter().map(|&x| Complex64::new(gaussian_hat(1, x), 0.0)).collect();
        let s = RadialSamples::new(grid, vals, 1).unwrap();
        assert!(matches!(
            lp_norm_radial(&s, 2.0),
            Err(Error::GridCoverage { end: GridEnd::Head, divergent: false, .. })
        ));
    }

    #[test]
    fn lp_norm_flags_divergent_head() {
        // |ξ|^{−0.5} in d = 1 is not in L^2 near the origin.
        let grid = log2_grid(-20.0, 0.0, 8);
        let vals: Vec<Complex64> = grid.iter().map(|&x| Complex64::new(x.powf(-0.5), 0.0)).collect();
        let s = RadialSamples::new(grid, vals, 1).unwrap();
        assert!(matches!(
            lp_norm_radial(&s, 2.5),
            Err(Error::GridCoverage { end: GridEnd::Head, divergent: true, .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let grid = log2_grid(-2.0, 2.0, 3);
        let vals: Vec<Complex64> = grid.iter().map(|&x| Complex64::new(x.sin() / 3.0, -x.exp())).collect();
        let s = RadialSamples::new(grid, vals, 2).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"xi,re,im\n"));
        let back = RadialSamples::read_csv(&buf[..], 2).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn samples_validation() {
        assert!(RadialSamples::new(vec![1.0, 1.0], vec![Complex64::new(0.0, 0.0); 2], 1).is_err());
        assert!(RadialSamples::new(vec![1.0], vec![], 1).is_err());
        assert!(RadialSamples::new(vec![1.0], vec![Complex64::new(f64::NAN, 0.0)], 1).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let grid = log2_grid(0.0, 4.0, 4);
        let vals: Vec<Complex64> = grid.iter().map(|&x| Complex64::new(3.0 * x.powf(-1.7), 0.0)).collect();
        let s = RadialSamples::new(grid, vals, 1).unwrap();
        assert!((asymptotic_slope(&s, (1.0, 16.0)).unwrap() + 1.7).abs() < 1e-12);
        assert!(matches!(asymptotic_slope(&s, (1.0, 1.5)), Err(Error::InsufficientPoints { .. })));
    }
}
