//! Spectral solution of
//!
//! e^{iπμ} ∂_t^α u = e^{iπν} (−Δ)^{β/2} u + F,  u(0) = f,
//!
//! on a periodic box, where (−Δ)^{β/2} has symbol |ξ|^β under the
//! e^{2πi x·ξ} transform. The Fourier solution is
//!
//! û(t,ξ) = E_α(e^{iπ s} t^α |ξ|^β) f̂(ξ) + e^{−iπμ} ∫₀^t (t−σ)^{α−1} E_{α,α}(e^{iπ s}(t−σ)^α |ξ|^β) F̂(σ,ξ) dσ
//!
//! with s = ν − μ reduced into (−1, 1]. For α ∈ (1, 2) the formula uses
//! the single initial condition u(0) = f and implicitly sets u_t(0) = 0.

mod field;
mod solve;
mod verify;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use field::{fft_nd, BoxGrid, SpectralField};
pub use solve::{
    caputo_residual, caputo_residual_study, duhamel_quadrature, graded_duhamel_quadrature, kernel_v, kernel_w,
    nyquist_multiplier, resolution_warning,
    l1_caputo, laplace_identity_residual, solution_multiplier, solve_homogeneous, solve_inhomogeneous,
    CaputoStudy, KernelIndex, Multiplier, TimeNode, TimeQuadrature,
};
pub use verify::{
    verify_dispersive, verify_inhomogeneous_decay, DecayFit, DecayRow, ProbeMode, DEFAULT_BOX_TOLERANCE,
};

/// Named analytic spatial profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Zero,
    /// amplitude · exp(−|x|²/width²)
    Gaussian { amplitude: f64, width: f64 },
    /// amplitude · exp(−(|x|²/width²)^power)
    SuperGaussian { amplitude: f64, width: f64, power: f64 },
    /// amplitude · exp(−|x|²/width²) · e^{2πi k x₁}
    ModulatedGaussian { amplitude: f64, width: f64, wavenumber: f64 },
}

impl Profile {
    pub fn gaussian(width: f64) -> Self {
        Profile::Gaussian { amplitude: 1.0, width }
    }

    pub fn validate(&self) -> Result<()> {
        let (w, extra_ok) = match *self {
            Profile::Zero => return Ok(()),
            Profile::Gaussian { width, amplitude } => (width, amplitude.is_finite()),
            Profile::SuperGaussian { width, power, amplitude } => (width, power >= 1.0 && amplitude.is_finite()),
            Profile::ModulatedGaussian { width, wavenumber, amplitude } => {
                (width, wavenumber.is_finite() && amplitude.is_finite())
            }
        };
        if !(w > 0.0 && w.is_finite()) || !extra_ok {
            return Err(invalid(format!("invalid profile parameters {self:?}")));
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        match *self {
            Profile::Zero => Complex64::new(0.0, 0.0),
            Profile::Gaussian { amplitude, width } => Complex64::new(amplitude * (-r2 / (width * width)).exp(), 0.0),
            Profile::SuperGaussian { amplitude, width, power } => {
                Complex64::new(amplitude * (-(r2 / (width * width)).powf(power)).exp(), 0.0)
            }
            Profile::ModulatedGaussian { amplitude, width, wavenumber } => Complex64::from_polar(
                amplitude * (-r2 / (width * width)).exp(),
                2.0 * PI * wavenumber * x.first().copied().unwrap_or(0.0),
            ),
        }
    }

    /// Same profile with every width multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            Profile::Zero => Profile::Zero,
            Profile::Gaussian { amplitude, width } => Profile::Gaussian { amplitude, width: width * factor },
            Profile::SuperGaussian { amplitude, width, power } => Profile::SuperGaussian {
                amplitude,
                width: width * factor,
                power,
            },
            Profile::ModulatedGaussian { amplitude, width, wavenumber } => Profile::ModulatedGaussian {
                amplitude,
                width: width * factor,
                wavenumber: wavenumber / factor,
            },
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Profile::Zero) || matches!(self, Profile::Gaussian { amplitude, .. } if *amplitude == 0.0)
    }
}

/// Time factor τ(t) of a separable forcing F(t, x) = τ(t)·P(x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeProfile {
    Constant,
    /// t^exponent, exponent ≥ 0
    Power { exponent: f64 },
    /// cos(2π frequency t)
    Cosine { frequency: f64 },
}

impl TimeProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant => 1.0,
            TimeProfile::Power { exponent } => {
                if exponent == 0.0 {
                    1.0
                } else {
                    t.powf(exponent)
                }
            }
            TimeProfile::Cosine { frequency } => (2.0 * PI * frequency * t).cos(),
        }
    }

    /// sup over [0, t] of |τ|.
    pub fn sup(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Power { exponent } => t.powf(exponent).max(if exponent == 0.0 { 1.0 } else { 0.0 }),
            _ => 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            TimeProfile::Power { exponent } if !(exponent >= 0.0 && exponent.is_finite()) => {
                Err(invalid("forcing power must be nonnegative"))
            }
            TimeProfile::Cosine { frequency } if !frequency.is_finite() => Err(invalid("forcing frequency must be finite")),
            _ => Ok(()),
        }
    }
}

/// Separable space-time forcing τ(t)·P(x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Forcing {
    pub space: Profile,
    pub time: TimeProfile,
}

/// Parameters of the Cauchy problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub nu: f64,
    pub initial: Profile,
    pub forcing: Option<Forcing>,
}

/// Reduces an angle parameter into (−1, 1] modulo 2.
pub fn wrap_unit(s: f64) -> f64 {
    let mut w = s % 2.0;
    if w <= -1.0 {
        w += 2.0;
    } else if w > 1.0 {
        w -= 2.0;
    }
    w
}

impl ProblemSpec {
    pub fn new(alpha: f64, beta: f64, mu: f64, nu: f64, initial: Profile) -> Result<Self> {
        let spec = ProblemSpec {
            alpha,
            beta,
            mu,
            nu,
            initial,
            forcing: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The heat-type problem μ = 0, ν = 1.
    pub fn heat(alpha: f64, beta: f64, initial: Profile) -> Result<Self> {
        ProblemSpec::new(alpha, beta, 0.0, 1.0, initial)
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Self {
        self.forcing = Some(forcing);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(invalid(format!("alpha must lie in (0, 2), got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(invalid(format!("beta must be positive, got {}", self.beta)));
        }
        for (name, v) in [("mu", self.mu), ("nu", self.nu)] {
            if !(v > -1.0 && v <= 1.0) {
                return Err(invalid(format!("{name} must lie in (-1, 1], got {v}")));
            }
        }
        self.initial.validate()?;
        if let Some(f) = &self.forcing {
            f.space.validate()?;
            f.time.validate()?;
        }
        Ok(())
    }

    /// ν − μ reduced into (−1, 1].
    pub fn s_eff(&self) -> f64 {
        wrap_unit(self.nu - self.mu)
    }

    pub fn is_decay(&self) -> bool {
        self.s_eff().abs() > self.alpha / 2.0
    }

    pub fn require_decay(&self) -> Result<()> {
        if self.is_decay() {
            Ok(())
        } else {
            Err(Error::NonDecayRay {
                s: self.s_eff(),
                half_alpha: self.alpha / 2.0,
            })
        }
    }

    pub fn forcing_or_err(&self) -> Result<&Forcing> {
        self.forcing
            .as_ref()
            .ok_or_else(|| Error::Config("the inhomogeneous solver needs a forcing descriptor".into()))
    }
}
