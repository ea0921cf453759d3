use std::f64::consts::PI;

use num_complex::Complex64;

use super::MlParams;
use crate::gamma::rgamma;

/// Value of the large-|z| expansion with an estimate of its truncation error.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticValue {
    pub value: Complex64,
    /// Magnitude of the first omitted algebraic term.
    pub error_estimate: f64,
    pub terms: usize,
}

/// Large-argument expansion of E_{α,β}(z):
///
/// (1/α) Σ_m Z_m^{1−β} e^{Z_m} − Σ_{k≥1} z^{−k} / Γ(β − αk),
///
/// where Z_m = |z|^{1/α} e^{i(arg z + 2πm)/α} runs over the branches with
/// |arg z + 2πm| ≤ απ. The algebraic sum is cut at its smallest term, and at
/// most `max_terms` terms are used.
pub fn mlf_asymptotic(params: &MlParams, z: Complex64, max_terms: usize) -> AsymptoticValue {
    let a = params.alpha;
    let b = params.beta;
    let exponential = exponential_part(params, z);
    let inv = z.inv();
    let mut algebraic = Complex64::new(0.0, 0.0);
    let mut pw = Complex64::new(1.0, 0.0);
    let mut prev = f64::INFINITY;
    let mut error_estimate = 0.0;
    let mut terms = 0;
    let mut trailing_zeros = 0;
    for k in 1..=max_terms {
        pw *= inv;
        let coef = rgamma(b - a * k as f64);
        let term = pw * coef;
        let tm = term.norm();
        if coef == 0.0 {
            // Reciprocal-gamma zeros; the expansion may terminate exactly.
            trailing_zeros += 1;
            if trailing_zeros > 4 && k > 2.0f64.max(b / a + 2.0) as usize {
                error_estimate = 0.0;
                break;
            }
            terms = k;
            continue;
        }
        trailing_zeros = 0;
        if tm > prev {
            error_estimate = tm;
            break;
        }
        algebraic -= term;
        terms = k;
        prev = tm;
        error_estimate = tm;
        if tm <= 1e-18 * algebraic.norm() {
            break;
        }
    }
    AsymptoticValue {
        value: exponential + algebraic,
        error_estimate,
        terms,
    }
}

/// (1/α) Σ_m Z_m^{1−β} e^{Z_m} over the branches with |arg z + 2πm| ≤ απ.
pub(crate) fn exponential_part(params: &MlParams, z: Complex64) -> Complex64 {
    let a = params.alpha;
    let b = params.beta;
    let radius = z.norm();
    let theta = z.arg();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut used: [Option<Complex64>; 3] = [None; 3];
    for (slot, m) in [0i32, -1, 1].into_iter().enumerate() {
        let phase = theta + 2.0 * PI * m as f64;
        if phase.abs() > a * PI * (1.0 + 1e-14) {
            continue;
        }
        let big = Complex64::from_polar(radius.powf(1.0 / a), phase / a);
        // At α = 1 and arg z = π two branches describe the same point; keep the principal one.
        if used.iter().flatten().any(|u| (u - big).norm() <= 1e-12 * big.norm()) {
            continue;
        }
        used[slot] = Some(big);
        let e = big.exp();
        if e.is_finite() && e.norm() > 0.0 {
            let power = Complex64::from_polar(big.norm().powf(1.0 - b), (1.0 - b) * phase / a);
            acc += power * e / a;
        }
    }
    acc
}
