//! Frozen reference values. Special functions and one-dimensional integrals
//! come from 30-digit mpmath; functionals of Brownian paths from a separate
//! numpy simulation (4·10⁵ paths, 2000 trapezoid steps, seed 20261016),
//! quoted with its standard error.

use bfx_core::functionals::{
    expected_log_one_plus_beta_a, expected_recip_one_plus_beta_a, gamma_moments_at, kernel_g,
    laplace_shifted_recip_general,
};
use bfx_core::quadrature::integrate_to_infinity;
use bfx_core::special::{bessel_i, bessel_i_scaled, kummer_phi, ln_gamma, phi_x_map, tricomi_psi};
use bfx_core::sv::solve_b;
use bfx_core::{FunctionalParams, KernelContext, QuadConfig, SeriesControl};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn bessel_values() {
    assert!(rel(bessel_i(2, 0.5).unwrap(), 0.031_906_149_177_738_254) < 1e-13);
    assert!(rel(bessel_i(1, 2.3).unwrap(), 2.097_800_027_517_421) < 1e-13);
    assert!(rel(bessel_i_scaled(1, 30.0).unwrap(), 0.071_916_330_598_647_55) < 1e-12);
    assert!(
        rel(
            bessel_i_scaled(2, 250.0).unwrap(),
            0.025_042_421_940_997_815
        ) < 1e-12
    );
}

#[test]
fn kummer_values() {
    let c = SeriesControl::default();
    assert!(
        rel(
            kummer_phi(1.5, 3.0, 2.0, c).unwrap(),
            3.072_523_445_141_935_8
        ) < 1e-12
    );
    assert!(
        rel(
            kummer_phi(0.7, 1.4, -5.0, c).unwrap(),
            0.233_709_750_138_472_24
        ) < 1e-10
    );
    assert!(
        rel(
            kummer_phi(2.618, 5.236, 0.3, c).unwrap(),
            1.163_931_671_440_177_3
        ) < 1e-12
    );
    assert!(
        rel(
            kummer_phi(1.2, 2.4, 40.0, c).unwrap(),
            3.783_478_777_512_886e15
        ) < 1e-10
    );
}

#[test]
fn tricomi_values() {
    let c = SeriesControl::default();
    assert!(
        rel(
            tricomi_psi(1.5, 3.0, 2.0, c).unwrap(),
            0.461_550_377_017_538_6
        ) < 1e-8
    );
    assert!(
        rel(
            tricomi_psi(0.6, 1.2, 10.0, c).unwrap(),
            0.245_726_038_052_980_26
        ) < 1e-8
    );
    assert!(
        rel(
            tricomi_psi(2.618, 5.236, 0.3, c).unwrap(),
            1_064.194_183_427_858_3
        ) < 1e-8
    );
    assert!(rel(tricomi_psi(1.0, 2.0, 0.05, c).unwrap(), 20.0) < 1e-8);
}

#[test]
fn gamma_and_phi_map() {
    assert!((ln_gamma(7.3).unwrap() - 7.147_892_523_022_248).abs() < 1e-12);
    assert!((ln_gamma(0.2).unwrap() - 1.524_063_822_430_784_5).abs() < 1e-12);
    assert!(rel(phi_x_map(2.0, 0.5).unwrap(), 1.494_477_879_411_818) < 1e-13);
}

#[test]
fn root_of_b_transcendental() {
    let b = solve_b();
    assert!((b - 2.034_764_817_612_225).abs() < 1e-13);
}

#[test]
fn exponential_mixture_representation() {
    // E exp(-x/(s+ξ)), ξ ~ Exp(1), through the generic kernel route
    let cfg = QuadConfig::default();
    // kernel G(y) = E e^{-y/ξ} = ∫ e^{-y/u - u} du
    let kernel = |y: f64| {
        if y == 0.0 {
            return 1.0;
        }
        integrate_to_infinity(
            |u: f64| if u > 0.0 { (-y / u - u).exp() } else { 0.0 },
            0.0,
            1.0,
            &cfg,
        )
        .unwrap()
        .value
    };
    let r = laplace_shifted_recip_general(1.5, 0.7, kernel, &cfg).unwrap();
    assert!((r.value - 0.363_078_418_117_067_26).abs() < 1e-8);
}

fn within_mc(value: f64, oracle: f64, se: f64) {
    // three oracle standard errors plus a discretisation allowance for 2000 steps
    let tol = 3.0 * se + 1e-3;
    assert!((value - oracle).abs() <= tol, "{value} vs {oracle} ± {se}");
}

#[test]
fn functionals_against_independent_simulation() {
    let q = QuadConfig::default();
    let p = FunctionalParams::new(0.0, 1.0, 1.0).unwrap();
    within_mc(
        expected_recip_one_plus_beta_a(&p, &q).unwrap().value,
        0.448_024_531,
        3.56e-4,
    );
    within_mc(
        expected_log_one_plus_beta_a(&p, &q).unwrap().value,
        1.000_266_108,
        1.17e-3,
    );
    let ctx = KernelContext::new(0.0, 1.0, q).unwrap();
    within_mc(kernel_g(1.0, &ctx).unwrap(), 0.445_495_202, 4.63e-4);
    let m = gamma_moments_at(0.5, 1.0, 1, 2, &q).unwrap();
    within_mc(m[0], 0.580_877_202, 8.33e-4);
    within_mc(m[1], 0.614_965_556, 2.35e-3);
}
