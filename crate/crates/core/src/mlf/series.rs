use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rug::Float;

use super::MlParams;
use crate::error::{Error, Result};
use crate::gamma::{ln_gamma, rgamma};

/// Hard cap on the number of series terms.
pub const TERM_BUDGET: usize = 100_000;

/// Condition number Σ|t_k| / |Σ t_k| above which the double-precision sum is
/// replaced by an MPFR sum.
const CONDITION_LIMIT: f64 = 32.0;

const RELATIVE_STOP: f64 = 1e-17;

#[derive(Debug, Clone, Copy)]
pub struct SeriesValue {
    pub value: Complex64,
    pub terms: usize,
    /// Σ|t_k| / |Σ t_k| measured on the accepted sum.
    pub condition: f64,
    /// Working precision in bits (53 for the plain double-precision path).
    pub precision_bits: u32,
}

/// Power series Σ z^k / Γ(αk + β).
pub fn mlf_series(params: &MlParams, z: Complex64) -> Result<Complex64> {
    mlf_series_detailed(params, z).map(|v| v.value)
}

pub fn mlf_series_detailed(params: &MlParams, z: Complex64) -> Result<SeriesValue> {
    // The series is entire for every α > 0, so α = 2 is accepted here even
    // though the contour-based paths need α < 2.
    if !(params.alpha > 0.0 && params.beta > 0.0 && params.alpha.is_finite()) {
        return Err(crate::error::invalid(format!(
            "series needs alpha > 0 and beta > 0, got ({}, {})",
            params.alpha, params.beta
        )));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(crate::error::invalid("series argument must be finite"));
    }
    let (value, abs_sum, terms) = sum_f64(params, z)?;
    let mag = value.norm();
    let condition = if mag > 0.0 { abs_sum / mag } else { f64::INFINITY };
    if condition <= CONDITION_LIMIT {
        return Ok(SeriesValue {
            value,
            terms,
            condition,
            precision_bits: 53,
        });
    }
    // Cancellation: rerun in MPFR with enough guard bits to absorb it.
    let mut bits = guard_bits(condition, abs_sum);
    for _ in 0..6 {
        let mp = sum_mpfr(params, z, bits)?;
        let needed = 64 + mp.condition.log2().max(0.0).ceil() as u32 + 24;
        if bits >= needed {
            return Ok(mp);
        }
        bits = needed + 32;
    }
    Err(Error::SeriesBudget { terms: TERM_BUDGET })
}

fn guard_bits(condition: f64, abs_sum: f64) -> u32 {
    let c = if condition.is_finite() {
        condition.log2()
    } else {
        // The double sum vanished; the cancellation is at least as deep as the largest term.
        abs_sum.max(1.0).log2() + 60.0
    };
    64 + c.max(0.0).ceil() as u32 + 32
}

fn term_f64(params: &MlParams, ln_r: f64, theta: f64, k: usize) -> Complex64 {
    let a = params.alpha * k as f64 + params.beta;
    let mag = (k as f64 * ln_r - ln_gamma(a)).exp();
    Complex64::from_polar(mag, k as f64 * theta)
}

fn sum_f64(params: &MlParams, z: Complex64) -> Result<(Complex64, f64, usize)> {
    let mut sum = Complex64::new(rgamma(params.beta), 0.0);
    let mut abs_sum = sum.norm();
    if z.norm() == 0.0 {
        return Ok((sum, abs_sum, 1));
    }
    let ln_r = z.norm().ln();
    let theta = z.arg();
    let mut small_run = 0;
    let mut prev = f64::INFINITY;
    for k in 1..TERM_BUDGET {
        let t = term_f64(params, ln_r, theta, k);
        let tm = t.norm();
        sum += t;
        abs_sum += tm;
        if tm < RELATIVE_STOP * sum.norm().max(f64::MIN_POSITIVE) && tm <= prev {
            small_run += 1;
            if small_run >= 3 {
                return Ok((sum, abs_sum, k + 1));
            }
        } else {
            small_run = 0;
        }
        prev = tm;
    }
    Err(Error::SeriesBudget { terms: TERM_BUDGET })
}

/// 1/Γ(αk + β) tables in MPFR, keyed by the bit patterns of (α, β).
struct RgammaTable {
    bits: u32,
    values: Arc<Vec<Float>>,
}

type TableMap = HashMap<(u64, u64), RgammaTable>;

fn table_cache() -> &'static Mutex<TableMap> {
    static CACHE: OnceLock<Mutex<TableMap>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn rgamma_table(params: &MlParams, bits: u32, len: usize) -> Arc<Vec<Float>> {
    let key = (params.alpha.to_bits(), params.beta.to_bits());
    let mut cache = table_cache().lock().unwrap();
    if let Some(t) = cache.get(&key) {
        if t.bits >= bits && t.values.len() >= len {
            return t.values.clone();
        }
    }
    let (start, mut values) = match cache.get(&key) {
        Some(t) if t.bits >= bits => (t.values.len(), t.values.as_ref().clone()),
        _ => (0, Vec::with_capacity(len)),
    };
    let bits = cache.get(&key).map_or(bits, |t| t.bits.max(bits));
    for k in start..len {
        let mut a = Float::with_val(bits + 32, params.alpha);
        a *= k as u32;
        a += params.beta;
        let g = a.gamma();
        values.push(Float::with_val(bits, g.recip()));
    }
    let values = Arc::new(values);
    cache.insert(
        key,
        RgammaTable {
            bits,
            values: values.clone(),
        },
    );
    values
}

fn sum_mpfr(params: &MlParams, z: Complex64, bits: u32) -> Result<SeriesValue> {
    let zr = Float::with_val(bits, z.re);
    let zi = Float::with_val(bits, z.im);
    let mut pr = Float::with_val(bits, 1.0);
    let mut pi = Float::with_val(bits, 0.0);
    let mut sr = Float::with_val(bits, 0.0);
    let mut si = Float::with_val(bits, 0.0);
    let mut abs_sum = Float::with_val(bits, 0.0);
    // Terms are below 2^{-bits} of the sum once this holds three times in a row.
    let tol_sq = Float::with_val(bits, Float::i_exp(1, -2 * bits as i32));

    let mut chunk = 256usize;
    let mut k = 0usize;
    let mut small_run = 0;
    let mut prev_sq = Float::with_val(bits, rug::float::Special::Infinity);
    loop {
        let table = rgamma_table(params, bits, (k + chunk).min(TERM_BUDGET));
        while k < table.len() {
            let g = &table[k];
            let tr = Float::with_val(bits, &pr * g);
            let ti = Float::with_val(bits, &pi * g);
            sr += &tr;
            si += &ti;
            let t_sq = Float::with_val(bits, tr.square_ref()) + Float::with_val(bits, ti.square_ref());
            abs_sum += Float::with_val(bits, t_sq.sqrt_ref());
            let s_sq = Float::with_val(bits, sr.square_ref()) + Float::with_val(bits, si.square_ref());
            let below = t_sq < Float::with_val(bits, &s_sq * &tol_sq) && t_sq <= prev_sq;
            if below && k > 0 {
                small_run += 1;
                if small_run >= 3 {
                    let value = Complex64::new(sr.to_f64(), si.to_f64());
                    let mag = Float::with_val(bits, s_sq.sqrt_ref());
                    let condition = if mag.is_zero() {
                        f64::INFINITY
                    } else {
                        Float::with_val(bits, &abs_sum / &mag).to_f64()
                    };
                    return Ok(SeriesValue {
                        value,
                        terms: k + 1,
                        condition,
                        precision_bits: bits,
                    });
                }
            } else {
                small_run = 0;
            }
            prev_sq = t_sq;
            // (pr + i pi) *= z
            let nr = Float::with_val(bits, &pr * &zr) - Float::with_val(bits, &pi * &zi);
            let ni = Float::with_val(bits, &pr * &zi) + Float::with_val(bits, &pi * &zr);
            pr = nr;
            pi = ni;
            k += 1;
        }
        if k >= TERM_BUDGET {
            return Err(Error::SeriesBudget { terms: TERM_BUDGET });
        }
        chunk *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, b: f64) -> MlParams {
        MlParams::new(a, b).unwrap()
    }

    #[test]
    fn value_at_zero() {
        let v = mlf_series(&p(0.7, 1.3), Complex64::new(0.0, 0.0)).unwrap();
        assert!((v.re - rgamma(1.3)).abs() < 1e-16);
    }

    #[test]
    fn exponential_identity() {
        let v = mlf_series(&p(1.0, 1.0), Complex64::new(-2.0, 0.0)).unwrap();
        assert!((v.re - (-2.0f64).exp()).abs() < 1e-16);
        let w = mlf_series(&p(1.0, 1.0), Complex64::new(0.3, 1.7)).unwrap();
        let exact = Complex64::new(0.3, 1.7).exp();
        assert!((w - exact).norm() < 1e-14 * exact.norm());
    }

    #[test]
    fn cosh_identity() {
        for x in [-4.0, -1.0, 0.5, 3.0] {
            let z = Complex64::new(x, 0.0);
            let v = mlf_series(&MlParams { alpha: 2.0, beta: 1.0 }, z).unwrap();
            let exact = z.sqrt().cosh();
            assert!((v - exact).norm() < 1e-12 * exact.norm(), "x={x}");
        }
    }

    #[test]
    fn half_order_value_at_minus_one() {
        // E_{1/2}(-1) = e erfc(1)
        let v = mlf_series(&p(0.5, 1.0), Complex64::new(-1.0, 0.0)).unwrap();
        assert!((v.re - 0.427_583_576_155_807).abs() < 1e-14);
    }

    #[test]
    fn cancellation_switches_to_extended_precision() {
        // E_{1/2}(-5) = e^{25} erfc(5) with Σ|t_k| ≈ e^{25}.
        let d = mlf_series_detailed(&p(0.5, 1.0), Complex64::new(-5.0, 0.0)).unwrap();
        assert!(d.precision_bits > 53);
        assert!((d.value.re - 0.110_704_637_733_068_6).abs() < 1e-15);
        let small = mlf_series_detailed(&p(0.5, 1.0), Complex64::new(0.5, 0.0)).unwrap();
        assert_eq!(small.precision_bits, 53);
    }
}
