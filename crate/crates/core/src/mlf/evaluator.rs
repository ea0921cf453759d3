use std::f64::consts::PI;

use num_complex::Complex64;

use super::asymptotic::exponential_part;
use super::contour::{mlf_contour, ContourPanels, Poles};
use super::{ContourSpec, Method, MlParams, RaySpec, SERIES_RADIUS};
#[cfg(test)]
use super::mlf_series;
use crate::error::{Error, Result};
use crate::gamma::rgamma;

/// Σ|t_k| allowed for the double-precision Horner series.
const SERIES_CONDITION: f64 = 1e3;
const ASYMPTOTIC_CEILING: f64 = 1e6;
const TABLE_TOLERANCE: f64 = 1e-10;
/// Absolute floor for the cross-checks; the contour reference itself carries
/// roundoff of this size relative to its O(1) integrand.
const ABSOLUTE_FLOOR: f64 = 1e-14;

fn close(got: Complex64, reference: Complex64) -> bool {
    (got - reference).norm() <= TABLE_TOLERANCE * reference.norm() + ABSOLUTE_FLOOR
}

/// Reusable evaluator of r ↦ E_{α,β}(e^{iπs} r^γ) for one (α, β, s, γ).
///
/// Construction precomputes the series coefficients, a contour quadrature
/// valid for every pole on the middle stretch of the ray, and the radius
/// beyond which the asymptotic expansion is accurate. Each regime is checked
/// against the adaptive contour integral before the evaluator is returned.
#[derive(Debug, Clone)]
pub struct RayEvaluator {
    params: MlParams,
    ray: RaySpec,
    dir: Complex64,
    series_radius: f64,
    series_coeffs: Vec<f64>,
    asymptotic_radius: f64,
    asymptotic_coeffs: Vec<f64>,
    table_zeta: Vec<Complex64>,
    table_weight: Vec<Complex64>,
}

impl RayEvaluator {
    pub fn new(params: &MlParams, ray: &RaySpec) -> Result<Self> {
        params.validate()?;
        ray.validate()?;
        ray.require_decay(params)?;
        let dir = ray.direction();
        let (series_radius, series_coeffs) = series_setup(params);
        let contour = ContourSpec::for_ray(params, ray)?;
        let (asymptotic_radius, asymptotic_coeffs) =
            asymptotic_setup(params, ray, &contour, series_radius)?;
        let mut ev = RayEvaluator {
            params: *params,
            ray: *ray,
            dir,
            series_radius,
            series_coeffs,
            asymptotic_radius,
            asymptotic_coeffs,
            table_zeta: Vec::new(),
            table_weight: Vec::new(),
        };
        if asymptotic_radius > series_radius {
            ev.build_table(&contour)?;
        }
        Ok(ev)
    }

    pub fn params(&self) -> &MlParams {
        &self.params
    }

    pub fn ray(&self) -> &RaySpec {
        &self.ray
    }

    /// |z| up to which the Horner series is used.
    pub fn series_radius(&self) -> f64 {
        self.series_radius
    }

    /// |z| from which the asymptotic expansion is used.
    pub fn asymptotic_radius(&self) -> f64 {
        self.asymptotic_radius
    }

    pub fn table_len(&self) -> usize {
        self.table_zeta.len()
    }

    /// E_{α,β}(e^{iπs} r^γ).
    pub fn eval(&self, r: f64) -> Complex64 {
        self.eval_radius(r.powf(self.ray.gamma))
    }

    /// E_{α,β}(e^{iπs} ρ) for a modulus ρ = |z| ≥ 0.
    pub fn eval_radius(&self, radius: f64) -> Complex64 {
        self.eval_radius_with_method(radius).0
    }

    pub fn eval_radius_with_method(&self, radius: f64) -> (Complex64, Method) {
        let z = self.dir * radius;
        if radius <= self.series_radius {
            let mut acc = Complex64::new(0.0, 0.0);
            for &c in self.series_coeffs.iter().rev() {
                acc = acc * z + c;
            }
            (acc, Method::Series)
        } else if radius >= self.asymptotic_radius {
            (self.asymptotic(z), Method::Asymptotic)
        } else {
            let mut acc = Complex64::new(0.0, 0.0);
            for (zeta, w) in self.table_zeta.iter().zip(&self.table_weight) {
                acc += w / (zeta - z);
            }
            (acc, Method::Table)
        }
    }

    fn asymptotic(&self, z: Complex64) -> Complex64 {
        let inv = z.inv();
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.asymptotic_coeffs.iter().rev() {
            acc = (acc + c) * inv;
        }
        exponential_part(&self.params, z) - acc
    }

    fn build_table(&mut self, contour: &ContourSpec) -> Result<()> {
        let poles = Poles::Segment {
            dir: self.dir,
            lo: self.series_radius,
            hi: self.asymptotic_radius,
        };
        let norm = Complex64::new(0.0, 2.0 * PI * self.params.alpha).inv();
        // Spot checks against the adaptive contour: log-spaced moduli in the table range.
        let lo = self.series_radius.max(1e-3);
        let hi = self.asymptotic_radius;
        let checks: Vec<(f64, Complex64)> = (0..=12)
            .map(|i| {
                let x = lo * (hi / lo).powf(i as f64 / 12.0);
                mlf_contour(&self.params, &self.ray, x, contour).map(|v| (x, v))
            })
            .collect::<Result<_>>()?;
        let mut c = 0.5;
        let mut worst = f64::INFINITY;
        let mut fallback: Option<(Vec<Complex64>, Vec<Complex64>)> = None;
        for _ in 0..5 {
            let panels = ContourPanels::new(&self.params, contour, &poles, c);
            let nodes = panels.nodes(&self.params, contour);
            self.table_zeta = nodes.iter().map(|n| n.zeta).collect();
            self.table_weight = nodes.iter().map(|n| n.factor * n.weight * norm).collect();
            worst = checks
                .iter()
                .map(|&(x, v)| {
                    let (t, _) = self.eval_radius_with_method(x.clamp(
                        self.series_radius * (1.0 + 1e-12),
                        self.asymptotic_radius * (1.0 - 1e-12),
                    ));
                    (t - v).norm() / (v.norm() + ABSOLUTE_FLOOR / TABLE_TOLERANCE)
                })
                .fold(0.0, f64::max);
            if worst <= TABLE_TOLERANCE {
                return Ok(());
            }
            // Rays hugging the sector boundary leave the reference itself near 1e-10.
            if worst <= super::OVERLAP_TOLERANCE && fallback.is_none() {
                fallback = Some((self.table_zeta.clone(), self.table_weight.clone()));
            }
            c *= 0.5;
        }
        if let Some((zeta, weight)) = fallback {
            self.table_zeta = zeta;
            self.table_weight = weight;
            return Ok(());
        }
        Err(Error::CrossCheck(worst))
    }
}

fn series_setup(params: &MlParams) -> (f64, Vec<f64>) {
    let coeffs_at = |radius: f64| -> Vec<f64> {
        let mut out = Vec::new();
        let mut prev = f64::INFINITY;
        for k in 0..20_000 {
            let c = rgamma(params.alpha * k as f64 + params.beta);
            let mag = c.abs() * radius.powi(k as i32);
            out.push(c);
            if k > 2 && mag < 1e-18 && mag <= prev {
                break;
            }
            prev = mag;
        }
        out
    };
    let abs_sum = |radius: f64| -> f64 {
        coeffs_at(radius)
            .iter()
            .enumerate()
            .map(|(k, c)| c.abs() * radius.powi(k as i32))
            .sum()
    };
    let radius = if abs_sum(SERIES_RADIUS) <= SERIES_CONDITION {
        SERIES_RADIUS
    } else {
        let (mut lo, mut hi) = (0.0, SERIES_RADIUS);
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if abs_sum(mid) <= SERIES_CONDITION {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    (radius, coeffs_at(radius))
}

fn asymptotic_setup(
    params: &MlParams,
    ray: &RaySpec,
    contour: &ContourSpec,
    series_radius: f64,
) -> Result<(f64, Vec<f64>)> {
    let a = params.alpha;
    let b = params.beta;
    let dir = ray.direction();
    let all: Vec<f64> = (1..=400).map(|k| rgamma(b - a * k as f64)).collect();
    let nonzero = all.iter().any(|c| *c != 0.0);
    // Truncation index where the algebraic terms stop decreasing at modulus `radius`,
    // together with the first omitted term.
    let truncation = |radius: f64| -> (usize, f64) {
        if !nonzero {
            return (0, 0.0);
        }
        let mut prev = f64::INFINITY;
        let mut last = 0;
        for (i, &c) in all.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let tm = c.abs() * radius.powi(-(i as i32 + 1));
            if tm > prev || tm == 0.0 {
                return (last, tm);
            }
            prev = tm;
            last = i + 1;
        }
        (last, prev)
    };

    let mut radius = series_radius.max(0.5);
    loop {
        let (k, err) = truncation(radius);
        let coeffs = all[..k].to_vec();
        let z = dir * radius;
        let approx = exponential_part(params, z) - eval_algebraic(&coeffs, z);
        if err <= 1e-15 * approx.norm() && approx.is_finite() {
            // Confirm against the adaptive contour before accepting.
            let ok = [1.0, 2.0, 8.0].iter().all(|&f| {
                let x = radius * f;
                let zz = dir * x;
                let asym = exponential_part(params, zz) - eval_algebraic(&coeffs, zz);
                match mlf_contour(params, ray, x, contour) {
                    Ok(v) => close(asym, v),
                    Err(_) => false,
                }
            });
            if ok {
                return Ok((radius, coeffs));
            }
        }
        if radius >= ASYMPTOTIC_CEILING {
            return Ok((radius, coeffs));
        }
        radius = (radius * 1.25).min(ASYMPTOTIC_CEILING);
    }
}

fn eval_algebraic(coeffs: &[f64], z: Complex64) -> Complex64 {
    let inv = z.inv();
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = (acc + c) * inv;
    }
    acc
}

/// E_{α,β} at an arbitrary point, through the series near the origin and the
/// contour elsewhere; shared by callers that need isolated values.
#[cfg(test)]
pub(crate) fn mlf_point(params: &MlParams, ray: &RaySpec, radius: f64) -> Result<Complex64> {
    if radius <= SERIES_RADIUS {
        mlf_series(params, ray.direction() * radius)
    } else {
        let contour = ContourSpec::for_ray(params, ray)?;
        mlf_contour(params, ray, radius, &contour)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(a: f64, b: f64, s: f64) {
        let p = MlParams::new(a, b).unwrap();
        let ray = RaySpec::new(s, 1.0).unwrap();
        let ev = RayEvaluator::new(&p, &ray).unwrap();
        for i in 0..40 {
            let x = 0.01 * 1.35f64.powi(i);
            let got = ev.eval_radius(x);
            let want = mlf_point(&p, &ray, x).unwrap();
            // The contour reference carries ~1e-15 absolute roundoff.
            let rel = (got - want).norm() / (want.norm() + 1e-5);
            assert!(rel < 1e-9, "a={a} b={b} s={s} x={x} rel={rel:e}");
        }
    }

    #[test]
    fn matches_reference_paths() {
        check(0.5, 1.0, 1.0);
        check(1.0, 1.0, 1.0);
        check(0.5, 0.5, -0.75);
        check(1.5, 2.0, 1.0);
    }

    #[test]
    fn exponential_case_needs_no_table() {
        let p = MlParams::new(1.0, 1.0).unwrap();
        let ray = RaySpec::new(1.0, 2.0).unwrap();
        let ev = RayEvaluator::new(&p, &ray).unwrap();
        assert_eq!(ev.table_len(), 0);
        assert!((ev.eval(3.0).re - (-9.0f64).exp()).abs() < 1e-16);
    }
}
