use bfx_core::functionals::{
    expected_recip_one_plus_beta_a, kernel_g, laplace_recip_one_plus_beta_a,
};
use bfx_core::quadrature::integrate_finite;
use bfx_core::special::{bessel_i, kummer_phi, phi_x_map, tricomi_psi};
use bfx_core::stochastic::{mc_estimate, sample_besq0_transition, Stream};
use bfx_core::sv::{stein_moment, SVParams};
use bfx_core::{FunctionalParams, KernelContext, MCConfig, QuadConfig, SeriesControl};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bessel_derivative_identity(x in 0.05..40.0f64) {
        // I_1'(x) = I_2(x) + I_1(x)/x
        let h = 1e-5 * x.max(1.0);
        let d = (bessel_i(1, x + h).unwrap() - bessel_i(1, x - h).unwrap()) / (2.0 * h);
        let rhs = bessel_i(2, x).unwrap() + bessel_i(1, x).unwrap() / x;
        prop_assert!((d - rhs).abs() <= 1e-6 * rhs.abs());
    }

    #[test]
    fn kummer_transformation(a in 0.1..4.0f64, c in 0.5..6.0f64, z in -8.0..8.0f64) {
        let ctl = SeriesControl::default();
        let lhs = kummer_phi(a, c, z, ctl).unwrap();
        let rhs = z.exp() * kummer_phi(c - a, c, -z, ctl).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn kummer_derivative(a in 0.1..3.0f64, c in 0.5..5.0f64, z in -5.0..5.0f64) {
        let ctl = SeriesControl::default();
        let h = 1e-5;
        let d = (kummer_phi(a, c, z + h, ctl).unwrap() - kummer_phi(a, c, z - h, ctl).unwrap()) / (2.0 * h);
        let rhs = a / c * kummer_phi(a + 1.0, c + 1.0, z, ctl).unwrap();
        prop_assert!((d - rhs).abs() <= 1e-6 * rhs.abs().max(1.0));
    }

    #[test]
    fn tricomi_is_positive_and_decreasing(a in 0.2..3.0f64, c in 0.5..4.0f64, z in 0.1..20.0f64) {
        let ctl = SeriesControl::default();
        let u0 = tricomi_psi(a, c, z, ctl).unwrap();
        let u1 = tricomi_psi(a, c, z * 1.1, ctl).unwrap();
        prop_assert!(u0 > 0.0 && u1 < u0);
    }

    #[test]
    fn phi_map_dominates_abs_y(x in 0.0..50.0f64, y in -30.0..30.0f64) {
        let p = phi_x_map(x, y).unwrap();
        prop_assert!(p >= y.abs() - 1e-12);
        prop_assert!(phi_x_map(x + 1.0, y).unwrap() >= p);
    }

    #[test]
    fn quadrature_is_linear(a in -3.0..3.0f64, b in -3.0..3.0f64, w in 0.5..6.0f64) {
        let cfg = QuadConfig::default();
        let f = |x: f64| (w * x).sin();
        let g = |x: f64| (-x * x).exp();
        let lhs = integrate_finite(|x| a * f(x) + b * g(x), 0.0, 2.0, &cfg).unwrap().value;
        let rhs = a * integrate_finite(f, 0.0, 2.0, &cfg).unwrap().value
            + b * integrate_finite(g, 0.0, 2.0, &cfg).unwrap().value;
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn laplace_values_lie_in_unit_interval(
        lambda in 0.05..3.0f64, beta in 0.1..2.0f64, mu in -1.0..1.0f64, t in 0.1..1.5f64,
    ) {
        let q = QuadConfig::default();
        let p = FunctionalParams::new(mu, beta, t).unwrap();
        let v = laplace_recip_one_plus_beta_a(lambda, &p, &q).unwrap();
        prop_assert!(v > 0.0 && v <= 1.0);
        let v2 = laplace_recip_one_plus_beta_a(lambda * 1.5, &p, &q).unwrap();
        prop_assert!(v2 <= v + 1e-9);
        let r = expected_recip_one_plus_beta_a(&p, &q).unwrap().value;
        prop_assert!(r > 0.0 && r < 1.0);
    }

    #[test]
    fn kernel_is_a_decreasing_probability_transform(x in 0.0..5.0f64, mu in -1.0..1.0f64, t in 0.1..2.0f64) {
        let ctx = KernelContext::new(mu, t, QuadConfig::default()).unwrap();
        let g = kernel_g(x, &ctx).unwrap();
        prop_assert!((0.0..=1.0).contains(&g));
        prop_assert!(kernel_g(x + 0.5, &ctx).unwrap() <= g + 1e-10);
    }

    #[test]
    fn stein_moment_is_one_at_time_zero(alpha in 0.1..0.99f64, rho in -0.9..0.0f64, lambda in 0.5..3.0f64) {
        let p = SVParams::stein(alpha, rho, lambda, 0.0).unwrap();
        if let Ok(v) = stein_moment(&p) {
            prop_assert_eq!(v, 1.0);
        }
    }
}

#[test]
fn mc_estimate_is_seed_deterministic() {
    // centred: the transition preserves the mean
    let centred = |s: &mut Stream| sample_besq0_transition(1.0, 0.8, s) - 1.0;
    let mc = MCConfig::default().with_paths(5000).with_seed(42);
    let a = mc_estimate(centred, &mc).unwrap();
    let b = mc_estimate(centred, &mc).unwrap();
    assert_eq!(a, b);
    let c = mc_estimate(centred, &mc.with_seed(43)).unwrap();
    assert_ne!(a.value, c.value);
    assert!(a.value.abs() < 4.0 * a.std_error);
}
