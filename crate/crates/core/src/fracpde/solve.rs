use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::field::{fft_nd, BoxGrid, SpectralField};
use super::{Forcing, ProblemSpec};
use crate::error::{invalid, Error, Result};
use crate::gamma::gamma;
use crate::mlf::{mlf_ray, MlParams, RayEvaluator, RaySpec, SERIES_RADIUS};
use crate::quad::{gauss_jacobi, gauss_legendre};
use crate::radial::KernelTransform;

/// Which Mittag-Leffler function a multiplier uses: E_{α,1} for the
/// homogeneous part, E_{α,α} inside the Duhamel integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelIndex {
    Homogeneous,
    Duhamel,
}

/// ρ ↦ E_{α,b}(e^{iπ s_eff} ρ) for one problem, with a cached ray evaluator
/// when the ray decays.
#[derive(Debug, Clone)]
pub struct Multiplier {
    params: MlParams,
    ray: RaySpec,
    evaluator: Option<RayEvaluator>,
    alpha: f64,
    beta: f64,
}

impl Multiplier {
    pub fn new(spec: &ProblemSpec, index: KernelIndex) -> Result<Self> {
        spec.validate()?;
        let b = match index {
            KernelIndex::Homogeneous => 1.0,
            KernelIndex::Duhamel => spec.alpha,
        };
        let params = MlParams::new(spec.alpha, b)?;
        let ray = RaySpec::new(spec.s_eff(), 1.0)?;
        let evaluator = if ray.is_decay(&params) {
            Some(RayEvaluator::new(&params, &ray)?)
        } else {
            None
        };
        Ok(Multiplier {
            params,
            ray,
            evaluator,
            alpha: spec.alpha,
            beta: spec.beta,
        })
    }

    /// Value at modulus ρ = t^α|ξ|^β of the argument.
    pub fn at_radius(&self, radius: f64) -> Result<Complex64> {
        match &self.evaluator {
            Some(ev) => Ok(ev.eval_radius(radius)),
            None => {
                if radius > SERIES_RADIUS {
                    return Err(Error::ContourUnavailable(format!(
                        "|argument| = {radius:.4e} exceeds the series radius on the non-decay ray s = {}",
                        self.ray.s
                    )));
                }
                mlf_ray(&self.params, &self.ray, radius)
            }
        }
    }

    /// E(e^{iπ s} t^α |ξ|^β).
    pub fn at(&self, t: f64, xi: f64) -> Result<Complex64> {
        if t == 0.0 || xi == 0.0 {
            return self.at_radius(0.0);
        }
        self.at_radius(t.powf(self.alpha) * xi.powf(self.beta))
    }
}

/// E_α(e^{iπ s_eff} t^α ξ^β), the Fourier multiplier of the homogeneous flow.
pub fn solution_multiplier(spec: &ProblemSpec, t: f64, xi_mod: f64) -> Result<Complex64> {
    spec.validate()?;
    if !(t >= 0.0) || !(xi_mod >= 0.0) {
        return Err(invalid("t and |xi| must be nonnegative"));
    }
    let params = MlParams::new(spec.alpha, 1.0)?;
    let ray = RaySpec::new(spec.s_eff(), 1.0)?;
    let radius = if t == 0.0 || xi_mod == 0.0 {
        0.0
    } else {
        t.powf(spec.alpha) * xi_mod.powf(spec.beta)
    };
    mlf_ray(&params, &ray, radius).map_err(|e| match e {
        Error::NonDecayRay { s, half_alpha } => Error::ContourUnavailable(format!(
            "|argument| = {radius:.4e} exceeds the series radius and |s| = {s} <= alpha/2 = {half_alpha}"
        )),
        other => other,
    })
}

/// Values of `f` at every distinct |k|² of the grid, evaluated in parallel.
fn per_shell<F>(grid: &BoxGrid, f: F) -> Result<HashMap<i64, Complex64>>
where
    F: Fn(i64, f64) -> Result<Complex64> + Sync,
{
    let mut shells: Vec<i64> = (0..grid.len()).map(|i| grid.wavenumber_sq(i)).collect();
    shells.sort_unstable();
    shells.dedup();
    let values = shells
        .par_iter()
        .map(|&k2| f(k2, (k2 as f64).sqrt() / grid.box_length))
        .collect::<Result<Vec<_>>>()?;
    Ok(shells.into_iter().zip(values).collect())
}

pub(crate) fn apply_multiplier(
    grid: &BoxGrid,
    data: &SpectralField,
    table: &HashMap<i64, Complex64>,
) -> SpectralField {
    let mut spec = data.values.clone();
    fft_nd(grid, &mut spec, false);
    for (i, v) in spec.iter_mut().enumerate() {
        *v *= table[&grid.wavenumber_sq(i)];
    }
    fft_nd(grid, &mut spec, true);
    SpectralField {
        grid: *grid,
        values: spec,
    }
}

/// Homogeneous flow of `initial` with a prepared multiplier.
pub(crate) fn evolve(mult: &Multiplier, initial: &SpectralField, t: f64) -> Result<SpectralField> {
    let grid = initial.grid;
    let table = per_shell(&grid, |_, xi| mult.at(t, xi))?;
    Ok(apply_multiplier(&grid, initial, &table))
}

/// v(t) = V(t)∗f on the periodic box.
pub fn solve_homogeneous(spec: &ProblemSpec, grid: &BoxGrid, t: f64) -> Result<SpectralField> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid(format!("t must be nonnegative, got {t}")));
    }
    let mult = Multiplier::new(spec, KernelIndex::Homogeneous)?;
    let f = SpectralField::sample(*grid, |x| spec.initial.eval(x))?;
    evolve(&mult, &f, t)
}

/// |multiplier| on the Nyquist shell |ξ| = n/(2L).
pub fn nyquist_multiplier(spec: &ProblemSpec, grid: &BoxGrid, t: f64) -> Result<f64> {
    let xi = grid.n as f64 / (2.0 * grid.box_length);
    Ok(solution_multiplier(spec, t, xi)?.norm())
}

/// A message when the multiplier has not decayed below 1e−10 at the Nyquist
/// shell, so grid truncation rather than the flow sets the smallest scale.
pub fn resolution_warning(spec: &ProblemSpec, grid: &BoxGrid, t: f64) -> Result<Option<String>> {
    if t == 0.0 {
        return Ok(None);
    }
    let m = nyquist_multiplier(spec, grid, t)?;
    Ok((m > 1e-10).then(|| {
        format!(
            "multiplier is {m:.3e} at the Nyquist shell (n = {}, L = {}); the grid truncates the solution spectrum",
            grid.n, grid.box_length
        )
    }))
}

/// x ↦ V(t, x) from the radial transform of the multiplier and the scaling
/// V(t, x) = t^{−αd/β} K(t^{−α/β}|x|).
pub fn kernel_v(spec: &ProblemSpec, d: u32, t: f64, x_mod: f64) -> Result<Complex64> {
    kernel(spec, d, t, x_mod, 1.0)
}

/// x ↦ W(t, x), as [`kernel_v`] with E_{α,α}.
pub fn kernel_w(spec: &ProblemSpec, d: u32, t: f64, x_mod: f64) -> Result<Complex64> {
    kernel(spec, d, t, x_mod, spec.alpha)
}

fn kernel(spec: &ProblemSpec, d: u32, t: f64, x_mod: f64, b: f64) -> Result<Complex64> {
    spec.validate()?;
    if !(t > 0.0) {
        return Err(invalid("kernels need t > 0"));
    }
    let params = MlParams::new(spec.alpha, b)?;
    let ray = RaySpec::new(spec.s_eff(), spec.beta)?;
    let kt = KernelTransform::new(&params, &ray, d)?;
    let a = spec.alpha / spec.beta;
    Ok(kt.eval(t.powf(-a) * x_mod)? * t.powf(-a * d as f64))
}

/// One node of a Duhamel rule: time σ, lag t − σ (kept exact near σ = t) and weight.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TimeNode {
    pub s: f64,
    pub lag: f64,
    pub w: f64,
}

/// Nodes and positive weights for ∫₀^t (t−σ)^{α−1} g(σ) dσ.
#[derive(Debug, Clone, Serialize)]
pub struct TimeQuadrature {
    pub t: f64,
    pub nodes: Vec<TimeNode>,
}

impl TimeQuadrature {
    pub fn apply<F: Fn(f64) -> Complex64>(&self, g: F) -> Complex64 {
        self.nodes.iter().map(|n| g(n.s) * n.w).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|n| n.w).sum()
    }
}

/// n-point Gauss–Jacobi rule for the weight (t−σ)^{α−1} on [0, t].
pub fn duhamel_quadrature(alpha: f64, t: f64, n: usize) -> Result<TimeQuadrature> {
    if !(alpha > 0.0 && alpha < 2.0) || !(t > 0.0) || n == 0 {
        return Err(invalid("duhamel quadrature needs 0 < alpha < 2, t > 0, n >= 1"));
    }
    let rule = gauss_jacobi(n, 0.0, alpha - 1.0);
    let scale = (0.5 * t).powf(alpha);
    let nodes = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| {
            let lag = 0.5 * t * (1.0 + x);
            TimeNode { s: t - lag, lag, w: w * scale }
        })
        .collect();
    Ok(TimeQuadrature { t, nodes })
}

fn split_panels(breaks: &[f64], max_panel: f64) -> Vec<f64> {
    let mut fine = vec![breaks[0]];
    for w in breaks.windows(2) {
        let m = ((w[1] - w[0]) / max_panel).ceil().max(1.0) as usize;
        for i in 1..=m {
            fine.push(w[0] + (w[1] - w[0]) * i as f64 / m as f64);
        }
    }
    fine
}

/// Composite rule for the Duhamel integral: panels refined geometrically
/// toward both ends (to absorb t^{α}-type behaviour of the integrand),
/// Gauss–Jacobi on the panel touching σ = t and Gauss–Legendre elsewhere.
/// Panels longer than `max_panel` are split.
pub fn graded_duhamel_quadrature(
    alpha: f64,
    t: f64,
    order: usize,
    levels: u32,
    max_panel: f64,
) -> Result<TimeQuadrature> {
    if !(alpha > 0.0 && alpha < 2.0) || !(t > 0.0) || order == 0 {
        return Err(invalid("graded quadrature needs 0 < alpha < 2, t > 0, order >= 1"));
    }
    let half = 0.5 * t;
    // both halves as increasing breakpoints from 0 to t/2: in σ on the left, in the lag on the right
    let mut breaks: Vec<f64> = (0..=levels).map(|k| half * 0.5f64.powi(k as i32)).collect();
    breaks.push(0.0);
    breaks.reverse();
    let inner = breaks[1];
    let gl = gauss_legendre(order);
    let mut nodes = Vec::new();
    for w in split_panels(&breaks, max_panel).windows(2) {
        for (s, wt) in gl.mapped(w[0], w[1]) {
            let lag = t - s;
            nodes.push(TimeNode { s, lag, w: wt * lag.powf(alpha - 1.0) });
        }
    }
    for w in split_panels(&breaks[1..], max_panel).windows(2) {
        for (lag, wt) in gl.mapped(w[0], w[1]) {
            nodes.push(TimeNode { s: t - lag, lag, w: wt * lag.powf(alpha - 1.0) });
        }
    }
    let jac = gauss_jacobi(order, 0.0, alpha - 1.0);
    let scale = (0.5 * inner).powf(alpha);
    for (&x, &w) in jac.nodes.iter().zip(&jac.weights) {
        let lag = 0.5 * inner * (1.0 + x);
        nodes.push(TimeNode { s: t - lag, lag, w: w * scale });
    }
    Ok(TimeQuadrature { t, nodes })
}

const DUHAMEL_LEVELS: u32 = 48;

fn duhamel_rule(spec: &ProblemSpec, forcing: &Forcing, t: f64, n_time: usize) -> Result<TimeQuadrature> {
    let max_panel = match forcing.time {
        super::TimeProfile::Cosine { frequency } if frequency != 0.0 => 0.25 / frequency.abs(),
        _ => f64::INFINITY,
    };
    graded_duhamel_quadrature(spec.alpha, t, n_time, DUHAMEL_LEVELS, max_panel)
}

/// w(t) for zero initial data: the Duhamel term evaluated per frequency shell
/// with the graded rule of order `n_time`.
pub fn solve_inhomogeneous(spec: &ProblemSpec, grid: &BoxGrid, t: f64, n_time: usize) -> Result<SpectralField> {
    let forcing = *spec.forcing_or_err()?;
    if !spec.initial.is_zero() {
        return Err(invalid(
            "the inhomogeneous solver expects zero initial data; solve the homogeneous part separately",
        ));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid(format!("t must be nonnegative, got {t}")));
    }
    if t == 0.0 || forcing.space.is_zero() {
        return Ok(SpectralField::zeros(*grid));
    }
    let mult = Multiplier::new(spec, KernelIndex::Duhamel)?;
    let rule = duhamel_rule(spec, &forcing, t, n_time)?;
    let space = SpectralField::sample(*grid, |x| forcing.space.eval(x))?;
    let mut hat = space.values.clone();
    fft_nd(grid, &mut hat, false);
    // Shells whose forcing amplitude is at the transform's roundoff carry nothing.
    let mut shell_amp: HashMap<i64, f64> = HashMap::new();
    for (i, v) in hat.iter().enumerate() {
        let e = shell_amp.entry(grid.wavenumber_sq(i)).or_insert(0.0);
        *e = e.max(v.norm());
    }
    let peak = shell_amp.values().copied().fold(0.0, f64::max);
    let phase = Complex64::from_polar(1.0, -PI * spec.mu);
    let weights: Vec<(f64, f64)> = rule
        .nodes
        .iter()
        .map(|n| (n.lag, n.w * forcing.time.eval(n.s)))
        .collect();
    let table = per_shell(grid, |k2, xi| {
        if shell_amp.get(&k2).copied().unwrap_or(0.0) <= 1e-18 * peak {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for &(u, w) in &weights {
            acc += mult.at(u, xi)? * w;
        }
        Ok(acc * phase)
    })?;
    for (i, v) in hat.iter_mut().enumerate() {
        *v *= table[&grid.wavenumber_sq(i)];
    }
    fft_nd(grid, &mut hat, true);
    SpectralField::new(*grid, hat)
}

/// L1 approximation of the Caputo derivative of order α ∈ (0, 1) at the last
/// point of a uniformly sampled history u_0, …, u_N.
pub fn l1_caputo(values: &[Complex64], dt: f64, alpha: f64) -> Result<Complex64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::UnsupportedOrder(format!(
            "the L1 scheme covers 0 < alpha < 1, got {alpha}"
        )));
    }
    let n = values.len();
    if n < 2 {
        return Err(invalid("need at least two samples"));
    }
    let e = 1.0 - alpha;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n - 1 {
        let b = (k as f64 + 1.0).powf(e) - (k as f64).powf(e);
        acc += (values[n - 1 - k] - values[n - 2 - k]) * b;
    }
    Ok(acc / (gamma(2.0 - alpha) * dt.powf(alpha)))
}

/// Residual of e^{iπμ}∂^α û − e^{iπν}|ξ|^β û − F̂ at the last snapshot, with the
/// Caputo derivative from the L1 scheme on uniform snapshots t_k = k·dt.
///
/// The residual is checked on the first eight axis wavenumbers and scaled by
/// the largest |ξ|^β|û| among them.
pub fn caputo_residual(spec: &ProblemSpec, snapshots: &[SpectralField], dt: f64) -> Result<f64> {
    if !(spec.alpha < 1.0) {
        return Err(Error::UnsupportedOrder(format!(
            "residual checks need alpha < 1, got {}; use laplace_identity_residual",
            spec.alpha
        )));
    }
    if snapshots.len() < 65 {
        return Err(invalid(format!(
            "need at least 64 time steps, got {}",
            snapshots.len().saturating_sub(1)
        )));
    }
    let grid = snapshots[0].grid;
    let test: Vec<usize> = (1..=8usize.min(grid.n / 2 - 1))
        .map(|k| k * grid.n.pow(grid.d - 1))
        .collect();
    let hats: Vec<Vec<Complex64>> = snapshots
        .par_iter()
        .map(|s| {
            let mut h = s.values.clone();
            fft_nd(&grid, &mut h, false);
            test.iter().map(|&i| h[i]).collect()
        })
        .collect();
    let t_final = dt * (snapshots.len() - 1) as f64;
    let forcing_hat: Vec<Complex64> = match &spec.forcing {
        None => vec![Complex64::new(0.0, 0.0); test.len()],
        Some(f) => {
            let mut h = SpectralField::sample(grid, |x| f.space.eval(x))?.values;
            fft_nd(&grid, &mut h, false);
            test.iter().map(|&i| h[i] * f.time.eval(t_final)).collect()
        }
    };
    let e_mu = Complex64::from_polar(1.0, PI * spec.mu);
    let e_nu = Complex64::from_polar(1.0, PI * spec.nu);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (j, &i) in test.iter().enumerate() {
        let history: Vec<Complex64> = hats.iter().map(|h| h[j]).collect();
        let d = l1_caputo(&history, dt, spec.alpha)?;
        let sym = grid.frequency(i).powf(spec.beta);
        let last = *history.last().unwrap();
        let r = e_mu * d - e_nu * sym * last - forcing_hat[j];
        worst = worst.max(r.norm());
        scale = scale.max((sym * last).norm());
    }
    if scale == 0.0 {
        return Ok(worst);
    }
    Ok(worst / scale)
}

/// Residuals of the L1 check for several step counts at a common final time.
#[derive(Debug, Clone, Serialize)]
pub struct CaputoStudy {
    pub t_final: f64,
    pub steps: Vec<usize>,
    pub residuals: Vec<f64>,
    /// log2 of successive residual ratios under step doubling.
    pub observed_orders: Vec<f64>,
}

/// Builds homogeneous snapshots on `grid` and runs [`caputo_residual`] for each step count.
pub fn caputo_residual_study(
    spec: &ProblemSpec,
    grid: &BoxGrid,
    t_final: f64,
    steps: &[usize],
) -> Result<CaputoStudy> {
    if spec.forcing.is_some() {
        return Err(invalid("the residual study covers the homogeneous problem"));
    }
    let mult = Multiplier::new(spec, KernelIndex::Homogeneous)?;
    let f = SpectralField::sample(*grid, |x| spec.initial.eval(x))?;
    let mut residuals = Vec::with_capacity(steps.len());
    for &n in steps {
        let dt = t_final / n as f64;
        let snaps = (0..=n)
            .map(|k| evolve(&mult, &f, k as f64 * dt))
            .collect::<Result<Vec<_>>>()?;
        residuals.push(caputo_residual(spec, &snaps, dt)?);
    }
    let observed_orders = residuals
        .windows(2)
        .zip(steps.windows(2))
        .map(|(r, s)| (r[0] / r[1]).log2() / (s[1] as f64 / s[0] as f64).log2())
        .collect();
    Ok(CaputoStudy {
        t_final,
        steps: steps.to_vec(),
        residuals,
        observed_orders,
    })
}

/// Checks the Laplace-domain identity s^α Ũ − s^{α−1} = λŨ for U(t) = E_α(λ t^α),
/// λ = e^{iπ s_eff}|ξ|^β, with Ũ computed by quadrature; returns the largest
/// relative residual over `s_values`. Valid for every α ∈ (0, 2).
pub fn laplace_identity_residual(spec: &ProblemSpec, xi: f64, s_values: &[f64]) -> Result<f64> {
    spec.require_decay()?;
    let mult = Multiplier::new(spec, KernelIndex::Homogeneous)?;
    let lambda = Complex64::from_polar(xi.powf(spec.beta), PI * spec.s_eff());
    let a = spec.alpha;
    let rule = gauss_legendre(32);
    let mut worst: f64 = 0.0;
    for &s in s_values {
        if !(s > 0.0) {
            return Err(invalid("Laplace variable must be positive"));
        }
        // e^{−st} below 1e−18 past t = 42/s; geometric panels absorb t^α near 0.
        let t_end = 42.0 / s;
        let mut breaks: Vec<f64> = (0..60).map(|k| t_end * 0.7f64.powi(k)).collect();
        breaks.push(0.0);
        breaks.reverse();
        let mut lt = Complex64::new(0.0, 0.0);
        for w in breaks.windows(2) {
            for (t, wt) in rule.mapped(w[0], w[1]) {
                lt += mult.at_radius(t.powf(a) * lambda.norm())? * (-s * t).exp() * wt;
            }
        }
        let lhs = lt * s.powf(a) - s.powf(a - 1.0);
        let rhs = lambda * lt;
        worst = worst.max((lhs - rhs).norm() / s.powf(a - 1.0));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracpde::{Profile, TimeProfile};

    fn heat(alpha: f64, beta: f64) -> ProblemSpec {
        ProblemSpec::heat(alpha, beta, Profile::gaussian(1.0)).unwrap()
    }

    #[test]
    fn multiplier_examples() {
        let s = heat(1.0, 1.5);
        let v = solution_multiplier(&s, 0.7, 1.3).unwrap();
        assert!((v.re - (-0.7 * 1.3f64.powf(1.5)).exp()).abs() < 1e-15);
        assert_eq!(solution_multiplier(&s, 0.0, 5.0).unwrap(), Complex64::new(1.0, 0.0));
        let v = solution_multiplier(&heat(0.5, 2.0), 1.0, 1.0).unwrap();
        assert!((v.re - 0.427_583_576_155_807).abs() < 1e-13);
    }

    #[test]
    fn non_decay_multiplier_beyond_series() {
        let s = ProblemSpec::new(1.0, 2.0, 0.5, 0.0, Profile::gaussian(1.0)).unwrap();
        assert!(solution_multiplier(&s, 1.0, 1.0).is_ok());
        assert!(matches!(solution_multiplier(&s, 1.0, 3.0), Err(Error::ContourUnavailable(_))));
    }

    #[test]
    fn duhamel_moments() {
        let q = duhamel_quadrature(0.5, 2.0, 8).unwrap();
        assert!((q.total_weight() - 2f64.powf(0.5) / 0.5).abs() < 1e-12);
        let q = duhamel_quadrature(1.0, 3.0, 4).unwrap();
        assert!((q.total_weight() - 3.0).abs() < 1e-13);
        let q = duhamel_quadrature(0.5, 1.0, 6).unwrap();
        let m1 = q.apply(|s| Complex64::new(s, 0.0)).re;
        assert!((m1 - 4.0 / 3.0).abs() < 1e-12);
        assert!(q.nodes.iter().all(|n| n.w > 0.0));
    }

    #[test]
    fn graded_rule_moments() {
        for &a in &[0.3, 0.5, 1.0, 1.5] {
            let q = graded_duhamel_quadrature(a, 2.5, 12, 40, f64::INFINITY).unwrap();
            let want = 2.5f64.powf(a) / a;
            assert!((q.total_weight() - want).abs() < 1e-12 * want, "a={a}");
            // ∫₀^t (t−σ)^{a−1} σ^{1/2} dσ = t^{a+1/2} B(a, 3/2)
            let got = q.apply(|s| Complex64::new(s.sqrt(), 0.0)).re;
            let want = 2.5f64.powf(a + 0.5) * gamma(a) * gamma(1.5) / gamma(a + 1.5);
            assert!((got - want).abs() < 1e-10 * want, "a={a} {got} {want}");
        }
    }

    #[test]
    fn l1_scheme_exact_cases() {
        let c = vec![Complex64::new(2.0, 0.0); 10];
        assert_eq!(l1_caputo(&c, 0.1, 0.5).unwrap(), Complex64::new(0.0, 0.0));
        // linear data is reproduced exactly: ∂^{1/2} t = 2√(t/π)
        let dt = 0.01;
        let lin: Vec<Complex64> = (0..=100).map(|k| Complex64::new(k as f64 * dt, 0.0)).collect();
        let d = l1_caputo(&lin, dt, 0.5).unwrap();
        assert!((d.re - 2.0 * (1.0 / PI).sqrt()).abs() < 1e-13);
        assert!(matches!(l1_caputo(&lin, dt, 1.0), Err(Error::UnsupportedOrder(_))));
    }

    #[test]
    fn initial_data_recovered_at_zero() {
        let g = BoxGrid::new(2, 32, 12.0).unwrap();
        let s = heat(0.7, 1.3);
        let u = solve_homogeneous(&s, &g, 0.0).unwrap();
        let f = SpectralField::sample(g, |x| s.initial.eval(x)).unwrap();
        let err = u.values.iter().zip(&f.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12 * f.norm_inf());
    }

    #[test]
    fn classical_heat_gaussian() {
        // e^{−|x|²} evolves to c^{−d/2}·exp(−|x|²/c), c = 1 + t/π², under the symbol |ξ|².
        let g = BoxGrid::new(1, 512, 60.0).unwrap();
        let s = heat(1.0, 2.0);
        let t = 0.3;
        let u = solve_homogeneous(&s, &g, t).unwrap();
        let c = 1.0 + t / (PI * PI);
        let err = (0..g.len())
            .map(|i| {
                let x = g.coordinate(i);
                (u.values[i].re - c.powf(-0.5) * (-x * x / c).exp()).abs()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn inhomogeneous_constant_heat_source() {
        // û = (1 − e^{−t|ξ|²})/|ξ|² · P̂ for constant forcing; compare mode by mode.
        let g = BoxGrid::new(1, 128, 40.0).unwrap();
        let spec = ProblemSpec::heat(1.0, 2.0, Profile::Zero)
            .unwrap()
            .with_forcing(Forcing {
                space: Profile::gaussian(1.0),
                time: TimeProfile::Constant,
            });
        let t = 0.8;
        let w = solve_inhomogeneous(&spec, &g, t, 8).unwrap();
        let mut hat = w.values.clone();
        fft_nd(&g, &mut hat, false);
        let mut p = SpectralField::sample(g, |x| Profile::gaussian(1.0).eval(x)).unwrap().values;
        fft_nd(&g, &mut p, false);
        for i in 0..g.len() {
            let l = g.frequency(i).powi(2);
            let factor = if l == 0.0 { t } else { (1.0 - (-t * l).exp()) / l };
            assert!((hat[i] - p[i] * factor).norm() < 1e-12 * p[0].norm(), "mode {i}");
        }
    }

    #[test]
    fn heat_kernel_with_unit_frequency_convention() {
        // symbol |ξ|² under e^{2πi x·ξ}: V(t, x) = (π/t)^{1/2} exp(−π²x²/t)
        let s = heat(1.0, 2.0);
        for &t in &[0.5, 2.0] {
            for &x in &[0.1, 0.5, 1.0] {
                let got = kernel_v(&s, 1, t, x).unwrap();
                let want = (PI / t).sqrt() * (-PI * PI * x * x / t).exp();
                assert!((got.re - want).abs() < 1e-8 * want + 1e-14 && got.im.abs() < 1e-12, "t={t} x={x}");
            }
        }
    }

    #[test]
    fn kernel_scaling_against_direct_transform() {
        use crate::radial::{radial_fourier, RadialProfile};
        let s = heat(0.5, 2.0);
        let mult = Multiplier::new(&s, KernelIndex::Homogeneous).unwrap();
        let mult = std::sync::Arc::new(mult);
        for &t in &[0.25, 4.0] {
            let m = mult.clone();
            let profile = RadialProfile::new(move |xi: f64| m.at(t, xi).unwrap(), 2.0).with_oscillatory_summation(true);
            for &y in &[0.3, 1.0] {
                let x = t.powf(0.25) * y;
                let direct = radial_fourier(&profile, 1, x).unwrap();
                let scaled = kernel_v(&s, 1, t, x).unwrap();
                assert!((direct - scaled).norm() < 1e-6 * scaled.norm(), "t={t} y={y}");
            }
        }
    }

    #[test]
    fn duhamel_refinement_and_small_time() {
        let g = BoxGrid::new(1, 64, 24.0).unwrap();
        let spec = ProblemSpec::heat(0.5, 2.0, Profile::Zero)
            .unwrap()
            .with_forcing(Forcing {
                space: Profile::gaussian(1.0),
                time: TimeProfile::Cosine { frequency: 0.3 },
            });
        let a = solve_inhomogeneous(&spec, &g, 5.0, 8).unwrap();
        let b = solve_inhomogeneous(&spec, &g, 5.0, 16).unwrap();
        let diff = SpectralField::new(g, a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect()).unwrap();
        assert!(diff.norm(2.0) < 1e-8 * b.norm(2.0));

        let t = 1e-8;
        let w = solve_inhomogeneous(&spec, &g, t, 8).unwrap();
        let p = SpectralField::sample(g, |x| Profile::gaussian(1.0).eval(x)).unwrap();
        let ratio = w.norm(2.0) / (t.sqrt() / gamma(1.5) * p.norm(2.0));
        assert!((ratio - 1.0).abs() < 1e-3, "{ratio}");
    }

    #[test]
    fn zero_forcing_gives_zero_field() {
        let g = BoxGrid::new(1, 16, 10.0).unwrap();
        let spec = ProblemSpec::heat(0.5, 2.0, Profile::Zero).unwrap().with_forcing(Forcing {
            space: Profile::Zero,
            time: TimeProfile::Constant,
        });
        assert_eq!(solve_inhomogeneous(&spec, &g, 3.0, 8).unwrap().norm_inf(), 0.0);
    }

    #[test]
    fn resolution_warning_on_coarse_grid() {
        let s = heat(1.0, 2.0);
        assert!(resolution_warning(&s, &BoxGrid::new(1, 64, 64.0).unwrap(), 0.01).unwrap().is_some());
        assert!(resolution_warning(&s, &BoxGrid::new(1, 64, 4.0).unwrap(), 1.0).unwrap().is_none());
    }

    #[test]
    fn forcing_required() {
        let g = BoxGrid::new(1, 16, 10.0).unwrap();
        let s = ProblemSpec::heat(0.5, 2.0, Profile::Zero).unwrap();
        assert!(matches!(solve_inhomogeneous(&s, &g, 1.0, 8), Err(Error::Config(_))));
    }

    #[test]
    fn laplace_identity_for_large_alpha() {
        let s = ProblemSpec::new(1.5, 2.0, 0.0, 1.0, Profile::gaussian(1.0)).unwrap();
        let r = laplace_identity_residual(&s, 0.8, &[0.5, 1.0, 3.0]).unwrap();
        assert!(r < 1e-9, "{r}");
    }
}
