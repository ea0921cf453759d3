//! Littlewood-Paley bands of the kernel transform: the smooth partition of
//! unity in r, band projections, their L^p norms and the dyadic envelope
//! 2^{d(1−1/p)j+δ(j)}.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::mlf::{MlParams, RayEvaluator, RaySpec};
use crate::radial::{
    lp_norm_radial, BandQuadrature, LpNormOptions, RadialSamples, Window,
};

fn smooth_edge(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// The fixed C^∞ bump h: 1 on [0, 1], 0 on [2, ∞), monotone smooth step between.
///
/// h(t) = f(2−t) / (f(2−t) + f(t−1)) with f(t) = e^{−1/t} for t > 0 and 0 otherwise.
pub fn bump(x: f64) -> f64 {
    if x <= 1.0 {
        return 1.0;
    }
    if x >= 2.0 {
        return 0.0;
    }
    let a = smooth_edge(2.0 - x);
    let b = smooth_edge(x - 1.0);
    a / (a + b)
}

/// 1 − h(x), computed without cancellation on the upper half of the transition.
pub fn bump_complement(x: f64) -> f64 {
    if x <= 1.0 {
        return 0.0;
    }
    if x >= 2.0 {
        return 1.0;
    }
    let a = smooth_edge(2.0 - x);
    let b = smooth_edge(x - 1.0);
    b / (a + b)
}

/// Annular multiplier h(r/2^j) − h(r/2^{j−1}), supported in [2^{j−1}, 2^{j+1}].
pub fn band_multiplier(j: i32, r: f64) -> f64 {
    let scale = 2f64.powi(j);
    let t = r / scale;
    if t <= 0.5 || t >= 2.0 {
        return 0.0;
    }
    if t <= 1.0 {
        // h(r/2^j) = 1 here, so the multiplier is 1 − h(r/2^{j−1})
        bump_complement(2.0 * t)
    } else {
        bump(t)
    }
}

/// δ(j) = −γj for j > 0 and 0 otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaExponent {
    pub gamma: f64,
}

impl DeltaExponent {
    pub fn at(&self, j: i32) -> f64 {
        if j > 0 {
            -self.gamma * j as f64
        } else {
            0.0
        }
    }
}

/// 2^{d(1−1/p)j + δ(j)}.
pub fn envelope(d: u32, p: f64, gamma: f64, j: i32) -> f64 {
    let q = if p.is_infinite() { 1.0 } else { 1.0 - 1.0 / p };
    2f64.powf(d as f64 * q * j as f64 + DeltaExponent { gamma }.at(j))
}

/// Kernel restricted to one dyadic band: ξ ↦ P_j applied to the kernel transform.
#[derive(Debug)]
pub struct BandKernel<'a> {
    evaluator: &'a RayEvaluator,
    d: u32,
    j: i32,
}

impl<'a> BandKernel<'a> {
    pub fn new(evaluator: &'a RayEvaluator, d: u32, j: i32) -> Result<Self> {
        if d == 0 {
            return Err(invalid("dimension must be positive"));
        }
        Ok(BandKernel { evaluator, d, j })
    }

    fn quadrature(&self, xi_max: f64) -> Result<BandQuadrature> {
        let ev = self.evaluator;
        BandQuadrature::new(
            &|r: f64| ev.eval(r),
            &[],
            self.d,
            Window::Band(self.j),
            xi_max,
        )
    }

    /// One value of the band projection.
    pub fn value(&self, xi: f64) -> Result<Complex64> {
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::Domain(format!("xi must be positive, got {xi}")));
        }
        Ok(self.quadrature(xi)?.eval(xi))
    }

    /// Band projection sampled on an increasing grid, reusing one node set per octave.
    pub fn sample(&self, xi_grid: &[f64]) -> Result<RadialSamples> {
        let mut values = Vec::with_capacity(xi_grid.len());
        let mut current: Option<(f64, BandQuadrature)> = None;
        for &xi in xi_grid {
            let rebuild = match &current {
                Some((top, _)) => xi > *top,
                None => true,
            };
            if rebuild {
                let top = xi * 2.0;
                current = Some((top, self.quadrature(top)?));
            }
            values.push(current.as_ref().unwrap().1.eval(xi));
        }
        RadialSamples::new(xi_grid.to_vec(), values, self.d)
    }

    /// Default ξ-grid for band j: from 2^{−j−24} to 2^{−j+14}, 8 points per octave.
    pub fn default_grid(&self) -> Vec<f64> {
        let lo = -self.j - 24;
        let hi = -self.j + 14;
        crate::radial::log2_grid(lo as f64, hi as f64, 8)
    }
}

/// P_j of the kernel transform at one ξ.
pub fn band_projection(params: &MlParams, ray: &RaySpec, d: u32, j: i32, xi: f64) -> Result<Complex64> {
    let ev = RayEvaluator::new(params, ray)?;
    BandKernel::new(&ev, d, j)?.value(xi)
}

/// L^p(ℝ^d) norm of the band projection over `xi_grid`.
pub fn band_lp_norm(
    params: &MlParams,
    ray: &RaySpec,
    d: u32,
    j: i32,
    p: f64,
    xi_grid: &[f64],
) -> Result<f64> {
    let ev = RayEvaluator::new(params, ray)?;
    band_lp_norm_with(&ev, d, j, p, xi_grid)
}

pub fn band_lp_norm_with(ev: &RayEvaluator, d: u32, j: i32, p: f64, xi_grid: &[f64]) -> Result<f64> {
    let band = BandKernel::new(ev, d, j)?;
    let samples = band.sample(xi_grid)?;
    lp_norm_radial(&samples, p)
}

/// One row of the band report.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BandRow {
    pub j: i32,
    pub ratio: f64,
    pub band_norm: f64,
    pub envelope: f64,
}

/// Outcome of [`verify_band_bound`].
#[derive(Debug, Clone, Serialize)]
pub struct BandReport {
    pub d: u32,
    pub gamma: f64,
    pub p: f64,
    pub rows: Vec<BandRow>,
    pub max_ratio: f64,
    /// Least-squares slope of log2(ratio_j) over j > 0.
    pub positive_trend: f64,
    /// Fitted geometric decay rate of band norms for large positive j.
    pub upper_tail_rate: f64,
    /// Fitted geometric decay rate of band norms as j decreases below zero.
    pub lower_tail_rate: f64,
    /// 2^{d(1−1/p)−γ}, the rate predicted for j > 0.
    pub predicted_upper_rate: f64,
    /// 2^{−d(1−1/p)}, the rate predicted for j ≤ 0.
    pub predicted_lower_rate: f64,
    /// Partial sums Σ_{j ≤ J} band_norm_j for J in the window.
    pub partial_sums: Vec<f64>,
    /// True when γ p′ > d, the hypothesis under which the dyadic sum converges.
    pub admissible: bool,
    /// True when both fitted tail rates are below one.
    pub summable: bool,
}

/// Least-squares slope of ys against xs.
pub(crate) fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Per-band ratios ‖P_j K‖_p / 2^{d(1−1/p)j+δ(j)} over `j_range` with tail diagnostics.
pub fn verify_band_bound(
    params: &MlParams,
    ray: &RaySpec,
    d: u32,
    p: f64,
    j_range: std::ops::RangeInclusive<i32>,
) -> Result<BandReport> {
    if !(p > 1.0) {
        return Err(invalid(format!("p must exceed 1, got {p}")));
    }
    let (j_min, j_max) = (*j_range.start(), *j_range.end());
    if j_max - j_min < 6 {
        return Err(invalid("the j window must span at least 7 bands"));
    }
    let ev = RayEvaluator::new(params, ray)?;
    let gamma = ray.gamma;
    let norms: Vec<(i32, f64)> = {
        use rayon::prelude::*;
        let js: Vec<i32> = j_range.clone().collect();
        js.par_iter()
            .map(|&j| {
                let band = BandKernel::new(&ev, d, j)?;
                let grid = band.default_grid();
                let samples = band.sample(&grid)?;
                let opts = LpNormOptions::default();
                Ok((j, crate::radial::lp_norm_radial_with(&samples, p, &opts)?))
            })
            .collect::<Result<_>>()?
    };
    let rows: Vec<BandRow> = norms
        .iter()
        .map(|&(j, n)| {
            let env = envelope(d, p, gamma, j);
            BandRow {
                j,
                ratio: n / env,
                band_norm: n,
                envelope: env,
            }
        })
        .collect();
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let pos: Vec<&BandRow> = rows.iter().filter(|r| r.j > 0).collect();
    let positive_trend = if pos.len() >= 3 {
        let xs: Vec<f64> = pos.iter().map(|r| r.j as f64).collect();
        let ys: Vec<f64> = pos.iter().map(|r| r.ratio.log2()).collect();
        ls_slope(&xs, &ys)
    } else {
        0.0
    };
    // Tail rates from the outermost bands on each side (at least 4 points each).
    let fit_rate = |sel: Vec<&BandRow>, sign: f64| -> f64 {
        let xs: Vec<f64> = sel.iter().map(|r| sign * r.j as f64).collect();
        let ys: Vec<f64> = sel.iter().map(|r| r.band_norm.log2()).collect();
        2f64.powf(ls_slope(&xs, &ys))
    };
    let upper: Vec<&BandRow> = rows.iter().filter(|r| r.j >= (j_max - 5).max(1)).collect();
    let lower: Vec<&BandRow> = rows.iter().filter(|r| r.j <= (j_min + 5).min(0)).collect();
    let upper_tail_rate = fit_rate(upper, 1.0);
    let lower_tail_rate = fit_rate(lower, -1.0);
    let q = 1.0 - 1.0 / p;
    let dq = d as f64 * q;
    let mut acc = 0.0;
    let partial_sums = rows
        .iter()
        .map(|r| {
            acc += r.band_norm;
            acc
        })
        .collect();
    Ok(BandReport {
        d,
        gamma,
        p,
        max_ratio,
        positive_trend,
        upper_tail_rate,
        lower_tail_rate,
        predicted_upper_rate: 2f64.powf(dq - gamma),
        predicted_lower_rate: 2f64.powf(-dq),
        partial_sums,
        admissible: gamma * p / (p - 1.0) > d as f64,
        summable: upper_tail_rate < 1.0 && lower_tail_rate < 1.0,
        rows,
    })
}
