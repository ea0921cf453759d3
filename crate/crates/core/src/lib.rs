//! Mittag-Leffler kernels on complex rays, their radial Fourier transforms,
//! Littlewood-Paley band diagnostics and spectral solvers for space-time
//! fractional heat and Schrödinger-type Cauchy problems.

pub mod bessel;
pub mod cli;
pub mod error;
pub mod fracpde;
pub mod gamma;
pub mod lp;
pub mod mlf;
pub mod quad;
pub mod radial;

pub use error::{Error, Result};
pub use mlf::{ContourSpec, MlParams, RayEvaluator, RaySpec};
