//! Cross-module checks: ray evaluation feeding the radial transform, the
//! band decomposition and the evolution multipliers.

use std::f64::consts::PI;

use mittag_core::fracpde::{solution_multiplier, Profile, ProblemSpec};
use mittag_core::lp::band_projection;
use mittag_core::radial::{log2_grid, lp_norm_radial, mlf_kernel_hat, KernelTransform};
use mittag_core::{MlParams, RayEvaluator, RaySpec};

fn gaussian_case() -> (MlParams, RaySpec) {
    (MlParams::new(1.0, 1.0).unwrap(), RaySpec::new(1.0, 2.0).unwrap())
}

#[test]
fn gaussian_kernel_transform_examples() {
    let (p, ray) = gaussian_case();
    let v1 = mlf_kernel_hat(&p, &ray, 1, 1.0).unwrap();
    let want1 = PI.sqrt() * (-PI * PI).exp();
    assert!((v1.re - want1).abs() < 1e-6 * want1 && v1.im.abs() < 1e-12);
    let v3 = mlf_kernel_hat(&p, &ray, 3, 0.25).unwrap();
    let want3 = PI.powf(1.5) * (-PI * PI / 16.0).exp();
    assert!((v3.re - want3).abs() < 1e-9 * want3);
}

#[test]
fn bands_reconstruct_the_transform() {
    let (p, ray) = gaussian_case();
    let total: num_complex::Complex64 = (-40..=6).map(|j| band_projection(&p, &ray, 1, j, 1.0).unwrap()).sum();
    let want = PI.sqrt() * (-PI * PI).exp();
    assert!((total.re - want).abs() < 1e-5 * want, "{total} vs {want}");
}

#[test]
fn gaussian_kernel_l2_norm() {
    let (p, ray) = gaussian_case();
    let samples = KernelTransform::new(&p, &ray, 1).unwrap().sample(&log2_grid(-24.0, 2.0, 16)).unwrap();
    let norm = lp_norm_radial(&samples, 2.0).unwrap();
    let want = (PI / 2.0).powf(0.25);
    assert!((norm - want).abs() < 1e-4 * want, "{norm} vs {want}");
}

#[test]
fn evolution_multiplier_is_a_ray_value() {
    for &(alpha, beta) in &[(0.5, 2.0), (1.3, 1.0), (0.8, 0.7)] {
        let spec = ProblemSpec::heat(alpha, beta, Profile::gaussian(1.0)).unwrap();
        let ev = RayEvaluator::new(&MlParams::new(alpha, 1.0).unwrap(), &RaySpec::new(1.0, beta).unwrap()).unwrap();
        for &(t, xi) in &[(0.3, 0.2), (2.0, 1.5), (50.0, 3.0)] {
            let direct = solution_multiplier(&spec, t, xi).unwrap();
            let via_ray = ev.eval(t.powf(alpha / beta) * xi);
            assert!((direct - via_ray).norm() <= 1e-10 * direct.norm().max(1e-30), "{direct} vs {via_ray}");
        }
    }
}

#[test]
fn slow_kernel_small_xi_power_law() {
    // d = 1, γ = 0.4: |K̂(ξ)| ∼ ξ^{γ−d} once ξ is small enough.
    let p = MlParams::new(0.5, 1.0).unwrap();
    let ray = RaySpec::new(1.0, 0.4).unwrap();
    let kt = KernelTransform::new(&p, &ray, 1).unwrap();
    let (a, b) = (2f64.powi(-30), 2f64.powi(-26));
    let slope = (kt.eval(b).unwrap().norm() / kt.eval(a).unwrap().norm()).ln() / (b / a).ln();
    assert!((slope + 0.6).abs() < 0.05, "slope {slope}");
}
