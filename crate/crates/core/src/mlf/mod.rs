//! The two-parameter Mittag-Leffler function E_{α,β} evaluated along rays
//! z = e^{iπs} r^γ of the complex plane.
//!
//! Three evaluation paths are available: the power series (with an internal
//! extended-precision fallback when cancellation is severe), the contour
//! integral over C_{ρ,ω}, and the large-argument asymptotic expansion.
//! [`mlf_ray`] dispatches between the first two; [`RayEvaluator`] combines
//! all three with precomputed tables for bulk evaluation.

mod asymptotic;
mod contour;
mod evaluator;
mod series;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub use asymptotic::{mlf_asymptotic, AsymptoticValue};
pub use contour::{
    choose_omega, contour_distance_lower_bound, mlf_contour, mlf_derivative, ray_truncation,
};
pub use evaluator::RayEvaluator;
pub use series::{mlf_series, mlf_series_detailed, SeriesValue};

/// Radius of |z| up to which [`mlf_ray`] uses the power series.
pub const SERIES_RADIUS: f64 = 4.0;

/// Largest relative series/contour discrepancy tolerated in the overlap band.
pub const OVERLAP_TOLERANCE: f64 = 1e-9;

/// Order α and type β of E_{α,β}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlParams {
    pub alpha: f64,
    pub beta: f64,
}

impl MlParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let p = MlParams { alpha, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(invalid(format!("alpha must lie in (0, 2), got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(invalid(format!("beta must be positive, got {}", self.beta)));
        }
        Ok(())
    }
}

/// Direction s (in units of π) and radial power γ of the ray z = e^{iπs} r^γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySpec {
    pub s: f64,
    pub gamma: f64,
}

impl RaySpec {
    pub fn new(s: f64, gamma: f64) -> Result<Self> {
        let ray = RaySpec { s, gamma };
        ray.validate()?;
        Ok(ray)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > -1.0 && self.s <= 1.0) {
            return Err(invalid(format!("s must lie in (-1, 1], got {}", self.s)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(invalid(format!("gamma must be positive, got {}", self.gamma)));
        }
        Ok(())
    }

    /// True when the ray lies outside the closed sector |arg z| ≤ απ/2.
    pub fn is_decay(&self, params: &MlParams) -> bool {
        self.s.abs() > params.alpha / 2.0
    }

    pub fn require_decay(&self, params: &MlParams) -> Result<()> {
        if self.is_decay(params) {
            Ok(())
        } else {
            Err(Error::NonDecayRay {
                s: self.s,
                half_alpha: params.alpha / 2.0,
            })
        }
    }

    /// e^{iπs}.
    pub fn direction(&self) -> Complex64 {
        Complex64::from_polar(1.0, PI * self.s)
    }

    /// The point e^{iπs} r^γ.
    pub fn point(&self, r: f64) -> Complex64 {
        self.direction() * r.powf(self.gamma)
    }
}

/// Geometry and resolution of the contour C_{ρ,ω}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec {
    pub rho: f64,
    pub omega: f64,
    /// Gauss–Legendre order used on each ray panel.
    pub nodes_ray: usize,
    /// Gauss–Legendre order used on each arc panel.
    pub nodes_arc: usize,
    pub ray_truncation: f64,
}

impl ContourSpec {
    /// Default contour for a decay ray: ρ = 1, midpoint ω, truncation from the tail bound.
    pub fn for_ray(params: &MlParams, ray: &RaySpec) -> Result<Self> {
        let omega = choose_omega(params, ray)?;
        let rho = 1.0;
        Ok(ContourSpec {
            rho,
            omega,
            nodes_ray: 16,
            nodes_arc: 16,
            ray_truncation: ray_truncation(params, rho, omega),
        })
    }

    pub fn validate(&self, params: &MlParams, ray: &RaySpec) -> Result<()> {
        ray.require_decay(params)?;
        let lo = params.alpha * PI / 2.0;
        let hi = ray.s.abs().min(params.alpha) * PI;
        if !(self.omega > lo && self.omega < hi) {
            return Err(Error::ContourConfig(format!(
                "omega = {} outside the admissible interval ({lo}, {hi})",
                self.omega
            )));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::ContourConfig(format!("rho must be positive, got {}", self.rho)));
        }
        if self.nodes_ray == 0 || self.nodes_arc == 0 {
            return Err(Error::ContourConfig("node counts must be positive".into()));
        }
        if !(self.ray_truncation > self.rho) {
            return Err(Error::ContourConfig(format!(
                "ray truncation {} must exceed rho {}",
                self.ray_truncation, self.rho
            )));
        }
        Ok(())
    }
}

/// Which evaluation path produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Series,
    Contour,
    Asymptotic,
    Table,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::Contour => "contour",
            Method::Asymptotic => "asymptotic",
            Method::Table => "table",
        }
    }
}

/// A ray evaluation together with the method used and the overlap health metric.
#[derive(Debug, Clone, Copy)]
pub struct RayValue {
    pub value: Complex64,
    pub method: Method,
    /// Relative series/contour discrepancy when both were computed.
    pub overlap_discrepancy: Option<f64>,
}

/// E_{α,β}(e^{iπs} r^γ) with automatic choice between series and contour.
pub fn mlf_ray(params: &MlParams, ray: &RaySpec, r: f64) -> Result<Complex64> {
    mlf_ray_detailed(params, ray, r).map(|v| v.value)
}

pub fn mlf_ray_detailed(params: &MlParams, ray: &RaySpec, r: f64) -> Result<RayValue> {
    params.validate()?;
    ray.validate()?;
    if !(r >= 0.0 && r.is_finite()) {
        return Err(invalid(format!("r must be finite and nonnegative, got {r}")));
    }
    let radius = r.powf(ray.gamma);
    let z = ray.direction() * radius;
    if radius <= SERIES_RADIUS {
        let series = mlf_series(params, z)?;
        if radius >= SERIES_RADIUS / 2.0 && ray.is_decay(params) {
            let contour = ContourSpec::for_ray(params, ray)?;
            let via_contour = mlf_contour(params, ray, radius, &contour)?;
            let scale = series.norm().max(f64::MIN_POSITIVE);
            let discrepancy = (series - via_contour).norm() / scale;
            if discrepancy >= OVERLAP_TOLERANCE {
                return Err(Error::CrossCheck(discrepancy));
            }
            return Ok(RayValue {
                value: series,
                method: Method::Series,
                overlap_discrepancy: Some(discrepancy),
            });
        }
        return Ok(RayValue {
            value: series,
            method: Method::Series,
            overlap_discrepancy: None,
        });
    }
    ray.require_decay(params)?;
    let contour = ContourSpec::for_ray(params, ray)?;
    Ok(RayValue {
        value: mlf_contour(params, ray, radius, &contour)?,
        method: Method::Contour,
        overlap_discrepancy: None,
    })
}
