use std::f64::consts::PI;

use num_complex::Complex64;

use super::{ContourSpec, MlParams, RaySpec};
use crate::error::{Error, Result};
use crate::quad::{bisect_breaks, gauss_legendre};

const TAIL_BOUND: f64 = 1e-16;
const RELATIVE_TOL: f64 = 1e-12;
const MAX_REFINEMENTS: usize = 9;

/// Midpoint of the admissible opening interval (απ/2, min{|s|, α}π).
pub fn choose_omega(params: &MlParams, ray: &RaySpec) -> Result<f64> {
    ray.require_decay(params)?;
    let lo = params.alpha * PI / 2.0;
    let hi = ray.s.abs().min(params.alpha) * PI;
    Ok(0.5 * (lo + hi))
}

/// |sin(π|s| − ω)|, a lower bound on the distance from C_{1,ω} to the ray.
pub fn contour_distance_lower_bound(ray: &RaySpec, omega: f64) -> f64 {
    (PI * ray.s.abs() - omega).sin().abs()
}

/// Radius T beyond which t^{(1−β)/α} e^{t^{1/α} cos(ω/α)} stays below 1e−16.
pub fn ray_truncation(params: &MlParams, rho: f64, omega: f64) -> f64 {
    let a = params.alpha;
    let c = (omega / a).cos();
    debug_assert!(c < 0.0);
    let p = (1.0 - params.beta) / a;
    let ln_g = |t: f64| p * t.ln() + t.powf(1.0 / a) * c;
    let target = TAIL_BOUND.ln();
    // ln g is decreasing beyond t_dec, where its derivative vanishes.
    let t_dec = if p > 0.0 { (p / -c).powf(a) } else { 0.0 };
    let mut lo = (2.0 * rho).max(t_dec);
    if ln_g(lo) < target {
        return lo;
    }
    let mut hi = 2.0 * lo;
    while ln_g(hi) >= target {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ln_g(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    hi
}

/// Where the poles of the Cauchy kernel can sit: one point, or a whole stretch of the ray.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Poles {
    Point(Complex64),
    Segment { dir: Complex64, lo: f64, hi: f64 },
}

impl Poles {
    fn distance(&self, w: Complex64) -> f64 {
        match *self {
            Poles::Point(z) => (w - z).norm(),
            Poles::Segment { dir, lo, hi } => {
                let proj = (w * dir.conj()).re.clamp(lo, hi);
                (w - dir * proj).norm()
            }
        }
    }
}

/// One node of the discretised contour: position ζ, dζ-weight and the
/// analytic factor e^{ζ^{1/α}} ζ^{(1−β)/α}.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ContourNode {
    pub zeta: Complex64,
    pub weight: Complex64,
    pub factor: Complex64,
}

fn analytic_factor(params: &MlParams, t: f64, theta: f64) -> Complex64 {
    let a = params.alpha;
    let root = Complex64::from_polar(t.powf(1.0 / a), theta / a);
    let power = Complex64::from_polar(t.powf((1.0 - params.beta) / a), theta * (1.0 - params.beta) / a);
    root.exp() * power
}

fn ray_breaks(params: &MlParams, contour: &ContourSpec, theta: f64, poles: &Poles, c: f64) -> Vec<f64> {
    let dir = Complex64::from_polar(1.0, theta);
    let a = params.alpha;
    let (rho, end) = (contour.rho, contour.ray_truncation);
    let mut breaks = vec![rho];
    let mut t = rho;
    while t < end {
        let rate_cap = 3.0 * a * t.powf(1.0 - 1.0 / a);
        let mut h = (c * poles.distance(dir * t)).min(rate_cap).min(end - t);
        h = h.min(c * poles.distance(dir * (t + h)).max(0.5 * h));
        h = h.max(1e-9 * t);
        t = (t + h).min(end);
        if end - t < 1e-3 * h {
            t = end;
        }
        breaks.push(t);
    }
    breaks
}

fn arc_breaks(params: &MlParams, contour: &ContourSpec, poles: &Poles, c: f64) -> Vec<f64> {
    let rho = contour.rho;
    let omega = contour.omega;
    let rate_cap = (3.0 * params.alpha / rho.powf(1.0 / params.alpha)).min(0.5);
    let mut breaks = vec![-omega];
    let mut phi = -omega;
    while phi < omega {
        let d = poles.distance(Complex64::from_polar(rho, phi)) / rho;
        let mut h = (c * d).min(rate_cap).min(omega - phi);
        h = h.min(c * poles.distance(Complex64::from_polar(rho, phi + h)) / rho).max(1e-12);
        phi = (phi + h).min(omega);
        if omega - phi < 1e-6 * h {
            phi = omega;
        }
        breaks.push(phi);
    }
    breaks
}

/// Panel breakpoints for the two rays and the arc at resolution `c`.
#[derive(Debug, Clone)]
pub(crate) struct ContourPanels {
    lower: Vec<f64>,
    arc: Vec<f64>,
    upper: Vec<f64>,
}

impl ContourPanels {
    pub(crate) fn new(params: &MlParams, contour: &ContourSpec, poles: &Poles, c: f64) -> Self {
        ContourPanels {
            lower: ray_breaks(params, contour, -contour.omega, poles, c),
            arc: arc_breaks(params, contour, poles, c),
            upper: ray_breaks(params, contour, contour.omega, poles, c),
        }
    }

    pub(crate) fn refined(&self) -> Self {
        ContourPanels {
            lower: bisect_breaks(&self.lower),
            arc: bisect_breaks(&self.arc),
            upper: bisect_breaks(&self.upper),
        }
    }

    /// Nodes with weights for ∫_{C} g(ζ) dζ, traversed with the sector on the left.
    pub(crate) fn nodes(&self, params: &MlParams, contour: &ContourSpec) -> Vec<ContourNode> {
        let ray_rule = gauss_legendre(contour.nodes_ray);
        let arc_rule = gauss_legendre(contour.nodes_arc);
        let omega = contour.omega;
        let mut out = Vec::new();
        let down = Complex64::from_polar(1.0, -omega);
        // Lower ray, from infinity towards the arc.
        for w in self.lower.windows(2) {
            for (t, wt) in ray_rule.mapped(w[0], w[1]) {
                out.push(ContourNode {
                    zeta: down * t,
                    weight: -down * wt,
                    factor: analytic_factor(params, t, -omega),
                });
            }
        }
        let rho = contour.rho;
        for w in self.arc.windows(2) {
            for (phi, wt) in arc_rule.mapped(w[0], w[1]) {
                let zeta = Complex64::from_polar(rho, phi);
                out.push(ContourNode {
                    zeta,
                    weight: Complex64::i() * zeta * wt,
                    factor: analytic_factor(params, rho, phi),
                });
            }
        }
        let up = Complex64::from_polar(1.0, omega);
        for w in self.upper.windows(2) {
            for (t, wt) in ray_rule.mapped(w[0], w[1]) {
                out.push(ContourNode {
                    zeta: up * t,
                    weight: up * wt,
                    factor: analytic_factor(params, t, omega),
                });
            }
        }
        out
    }
}

/// (1/(2πiα)) ∫_C e^{ζ^{1/α}} ζ^{(1−β)/α} (ζ − z)^{−power} dζ with panel doubling.
fn cauchy_integral(
    params: &MlParams,
    ray: &RaySpec,
    contour: &ContourSpec,
    z: Complex64,
    power: i32,
) -> Result<Complex64> {
    let poles = Poles::Point(z);
    // Every contour point has modulus ≥ ρ, so its distance to the ray is at least ρ·|sin(π|s| − ω)|.
    let lower_bound = contour_distance_lower_bound(ray, contour.omega) * contour.rho;
    let norm = Complex64::new(0.0, 2.0 * PI * params.alpha).inv();
    let eval = |panels: &ContourPanels| {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut l1 = 0.0;
        for node in panels.nodes(params, contour) {
            let diff = node.zeta - z;
            debug_assert!(
                diff.norm() >= lower_bound * (1.0 - 1e-12),
                "node {:?} closer to the pole than the contour distance bound",
                node.zeta
            );
            let term = node.factor * node.weight / diff.powi(power);
            l1 += term.norm();
            acc += term;
        }
        (acc * norm, l1 * norm.norm())
    };
    let mut panels = ContourPanels::new(params, contour, &poles, 1.0);
    let (mut prev, _) = eval(&panels);
    for _ in 0..MAX_REFINEMENTS {
        panels = panels.refined();
        let (cur, l1) = eval(&panels);
        let diff = (cur - prev).norm();
        if diff <= (RELATIVE_TOL * cur.norm()).max(64.0 * f64::EPSILON * l1) {
            return Ok(cur);
        }
        prev = cur;
    }
    let (last, _) = eval(&panels.refined());
    Err(Error::QuadratureStagnation { previous: prev, last })
}

/// E_{α,β}(r e^{iπs}) from the contour representation over C_{ρ,ω}.
pub fn mlf_contour(params: &MlParams, ray: &RaySpec, r: f64, contour: &ContourSpec) -> Result<Complex64> {
    params.validate()?;
    contour.validate(params, ray)?;
    if !(r >= 0.0 && r.is_finite()) {
        return Err(crate::error::invalid(format!("r must be finite and nonnegative, got {r}")));
    }
    cauchy_integral(params, ray, contour, ray.direction() * r, 1)
}

/// d^k/dr^k E_{α,β}(r e^{iπs}) = k! e^{iπks} E^{(k)}_{α,β}(r e^{iπs}).
pub fn mlf_derivative(
    params: &MlParams,
    ray: &RaySpec,
    r: f64,
    k: u32,
    contour: &ContourSpec,
) -> Result<Complex64> {
    if k == 0 {
        return mlf_contour(params, ray, r, contour);
    }
    params.validate()?;
    contour.validate(params, ray)?;
    if !(r >= 0.0 && r.is_finite()) {
        return Err(crate::error::invalid(format!("r must be finite and nonnegative, got {r}")));
    }
    let dir = ray.direction();
    let integral = cauchy_integral(params, ray, contour, dir * r, k as i32 + 1)?;
    let factorial: f64 = (1..=k).map(|i| i as f64).product();
    Ok(integral * factorial * dir.powu(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlf::mlf_series;

    fn setup(a: f64, b: f64, s: f64) -> (MlParams, RaySpec, ContourSpec) {
        let p = MlParams::new(a, b).unwrap();
        let ray = RaySpec::new(s, 1.0).unwrap();
        let c = ContourSpec::for_ray(&p, &ray).unwrap();
        (p, ray, c)
    }

    #[test]
    fn omega_is_interval_midpoint() {
        let (p, ray, _) = setup(1.0, 1.0, 1.0);
        assert!((choose_omega(&p, &ray).unwrap() - 0.75 * PI).abs() < 1e-15);
        let (p, ray, _) = setup(0.5, 1.0, 0.5);
        assert!((choose_omega(&p, &ray).unwrap() - 3.0 * PI / 8.0).abs() < 1e-15);
        let (p, ray, _) = setup(1.5, 1.0, 1.0);
        assert!((choose_omega(&p, &ray).unwrap() - 7.0 * PI / 8.0).abs() < 1e-15);
        let ray = RaySpec::new(0.2, 1.0).unwrap();
        assert!(matches!(choose_omega(&p, &ray), Err(Error::NonDecayRay { .. })));
    }

    #[test]
    fn distance_bound_values() {
        let ray = RaySpec::new(1.0, 1.0).unwrap();
        assert!((contour_distance_lower_bound(&ray, 0.75 * PI) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(contour_distance_lower_bound(&ray, PI - 1e-12) < 1e-11);
        let ray = RaySpec::new(0.5, 1.0).unwrap();
        assert!((contour_distance_lower_bound(&ray, 3.0 * PI / 8.0) - 0.382_683_432_365_089_8).abs() < 1e-15);
    }

    #[test]
    fn truncation_meets_tail_bound() {
        for (a, b) in [(0.3, 2.0), (1.0, 1.0), (1.9, 0.5), (0.5, 0.5)] {
            let (_, _, c) = setup(a, b, 1.0);
            let t = c.ray_truncation;
            let g = t.powf((1.0 - b) / a) * (t.powf(1.0 / a) * (c.omega / a).cos()).exp();
            assert!(g <= 1.0001e-16, "a={a} b={b} g={g}");
        }
    }

    #[test]
    fn exponential_identity() {
        let (p, ray, c) = setup(1.0, 1.0, 1.0);
        let v = mlf_contour(&p, &ray, 2.0, &c).unwrap();
        assert!((v - Complex64::new((-2.0f64).exp(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn agrees_with_series() {
        let (p, ray, c) = setup(0.5, 1.0, 1.0);
        let v = mlf_contour(&p, &ray, 1.0, &c).unwrap();
        assert!((v.re - 0.427_583_576_155_807).abs() < 1e-13);
        let (p, ray, c) = setup(1.5, 2.0, 1.0);
        let v = mlf_contour(&p, &ray, 0.5, &c).unwrap();
        let s = mlf_series(&p, Complex64::new(-0.5, 0.0)).unwrap();
        assert!((v - s).norm() < 1e-12 * s.norm());
    }

    #[test]
    fn derivative_conventions() {
        let (p, ray, c) = setup(1.0, 1.0, 1.0);
        let d = mlf_derivative(&p, &ray, 1.0, 1, &c).unwrap();
        assert!((d.re + (-1.0f64).exp()).abs() < 1e-13 && d.im.abs() < 1e-13);
        let (p, ray, c) = setup(1.5, 1.0, 1.0);
        let d2 = mlf_derivative(&p, &ray, 0.0, 2, &c).unwrap();
        assert!((d2.re - 2.0 / 6.0).abs() < 1e-13);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let (p, ray, c) = setup(0.5, 1.0, 1.0);
        let r = 1.0;
        let h = 1e-3;
        let f = |x: f64| mlf_contour(&p, &ray, x, &c).unwrap();
        let fd = (f(r - 2.0 * h) - f(r + 2.0 * h) + (f(r + h) - f(r - h)) * 8.0) / (12.0 * h);
        let d = mlf_derivative(&p, &ray, r, 1, &c).unwrap();
        assert!((d - fd).norm() < 1e-6 * d.norm());
    }

    #[test]
    fn rejects_bad_contours() {
        let (p, ray, mut c) = setup(1.0, 1.0, 1.0);
        c.omega = 0.4 * PI;
        assert!(matches!(mlf_contour(&p, &ray, 1.0, &c), Err(Error::ContourConfig(_))));
    }
}
