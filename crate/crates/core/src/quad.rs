//! Gauss rules and small summation helpers shared by the integrators.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::gamma::ln_gamma;

/// Nodes and weights of an n-point rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped affinely onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn compute_legendre(n: usize) -> GaussRule {
    assert!(n >= 1);
    if n == 1 {
        return GaussRule {
            nodes: vec![0.0],
            weights: vec![2.0],
        };
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GaussRule { nodes, weights }
}

/// Gauss–Legendre rule with `n` nodes, cached process-wide.
pub fn gauss_legendre(n: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&n) {
        return rule.clone();
    }
    let rule = Arc::new(compute_legendre(n));
    cache.lock().unwrap().insert(n, rule.clone());
    rule
}

fn jacobi_with_derivative(n: usize, a: f64, b: f64, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = 0.5 * (a - b + (a + b + 2.0) * x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let c = 2.0 * kf + a + b;
        let a1 = 2.0 * kf * (kf + a + b) * (c - 2.0);
        let a2 = (c - 1.0) * (a * a - b * b);
        let a3 = (c - 2.0) * (c - 1.0) * c;
        let a4 = 2.0 * (kf + a - 1.0) * (kf + b - 1.0) * c;
        let p2 = ((a2 + a3 * x) * p1 - a4 * p0) / a1;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let c = 2.0 * nf + a + b;
    let dp = (nf * (a - b - c * x) * p1 + 2.0 * (nf + a) * (nf + b) * p0) / (c * (1.0 - x * x));
    (p1, dp)
}

/// Gauss–Jacobi rule for the weight (1-x)^a (1+x)^b on [-1, 1].
///
/// Nodes come from the Golub–Welsch eigenproblem and are polished by Newton
/// steps on the three-term recurrence; weights use the closed form in P'_n.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> GaussRule {
    assert!(n >= 1 && a > -1.0 && b > -1.0);
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let c = 2.0 * kf + a + b;
        let diag = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (c * (c + 2.0))
        };
        jac[(k, k)] = diag;
        if k + 1 < n {
            let k1 = kf + 1.0;
            let c1 = 2.0 * k1 + a + b;
            let off = if k == 0 {
                // the generic expression is 0/0 when a + b = −1
                (4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))).sqrt()
            } else {
                let num = 4.0 * k1 * (k1 + a) * (k1 + b) * (k1 + a + b);
                let den = c1 * c1 * (c1 + 1.0) * (c1 - 1.0);
                (num / den).sqrt()
            };
            jac[(k, k + 1)] = off;
            jac[(k + 1, k)] = off;
        }
    }
    let mut nodes: Vec<f64> = jac.symmetric_eigen().eigenvalues.iter().copied().collect();
    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let nf = n as f64;
    let log_const = (a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(nf + a + 1.0)
        + ln_gamma(nf + b + 1.0)
        - ln_gamma(nf + a + b + 1.0)
        - ln_gamma(nf + 1.0);
    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..8 {
            let (p, dp) = jacobi_with_derivative(n, a, b, *x);
            let step = p / dp;
            let next = *x - step;
            if !(next > -1.0 && next < 1.0) {
                break;
            }
            *x = next;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = jacobi_with_derivative(n, a, b, *x);
        weights.push(log_const.exp() / ((1.0 - *x * *x) * dp * dp));
    }
    GaussRule { nodes, weights }
}

/// Composite Gauss–Legendre integral of `f` over consecutive breakpoints.
pub fn integrate_panels<F>(f: &F, breaks: &[f64], order: usize) -> Complex64
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let rule = gauss_legendre(order);
    let mut acc = Complex64::new(0.0, 0.0);
    for w in breaks.windows(2) {
        for (x, wt) in rule.mapped(w[0], w[1]) {
            acc += f(x) * wt;
        }
    }
    acc
}

/// Splits every interval of `breaks` into halves.
pub fn bisect_breaks(breaks: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * breaks.len());
    for w in breaks.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    if let Some(&last) = breaks.last() {
        out.push(last);
    }
    out
}

/// One Aitken Δ² pass over a sequence; output is two entries shorter.
pub fn aitken_pass(seq: &[Complex64]) -> Vec<Complex64> {
    seq.windows(3)
        .map(|w| {
            let d1 = w[1] - w[0];
            let d2 = w[2] - w[1];
            let denom = d2 - d1;
            if denom.norm() <= 1e-300 || !denom.is_finite() {
                w[2]
            } else {
                w[2] - d2 * d2 / denom
            }
        })
        .collect()
}

/// Repeated Aitken Δ² extrapolation; returns the deepest available estimate.
pub fn iterated_aitken(seq: &[Complex64]) -> Option<Complex64> {
    let mut current = seq.to_vec();
    let mut best = *current.last()?;
    while current.len() >= 3 {
        current = aitken_pass(&current);
        if let Some(&last) = current.last() {
            if last.is_finite() {
                best = last;
            }
        }
    }
    Some(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 16, 40] {
            let rule = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
                let got: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| w * x.powi(deg as i32))
                    .sum();
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn jacobi_moments_match_beta_function() {
        // ∫_{-1}^{1} (1-x)^a (1+x)^b x^k dx checked through the Beta function for k = 0, 1.
        for &(a, b) in &[(-0.5, 0.0), (0.3, 0.0), (-0.7, 0.4), (1.0, 1.0), (-0.5, -0.5), (0.0, 0.0)] {
            let rule = gauss_jacobi(12, a, b);
            let m0: f64 = rule.weights.iter().sum();
            let exact0 = ((a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
                - ln_gamma(a + b + 2.0))
            .exp();
            assert!((m0 - exact0).abs() < 1e-13 * exact0, "a={a} b={b}");
            let m1: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| x * w).sum();
            let exact1 = exact0 * (b - a) / (a + b + 2.0);
            assert!((m1 - exact1).abs() < 1e-13, "a={a} b={b}");
            assert!(rule.weights.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn aitken_accelerates_alternating_series() {
        // partial sums of ln 2 = 1 - 1/2 + 1/3 - ...
        let mut s = 0.0;
        let seq: Vec<Complex64> = (1..=12)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                Complex64::new(s, 0.0)
            })
            .collect();
        let acc = iterated_aitken(&seq).unwrap();
        assert!((acc.re - std::f64::consts::LN_2).abs() < 1e-9);
    }
}
