use std::hint::black_box;

use bfx_core::functionals::{gamma_moments_at, kernel_g, kernel_g_derivatives, laplace_recip, psi};
use bfx_core::special::{kummer_phi, tricomi_psi};
use bfx_core::sv::{lognormal_moment_random_time, stein_moment};
use bfx_core::{
    ExponentSign, FunctionalParams, KernelContext, LaplaceRoute, MCConfig, QuadConfig, SVParams,
    SeriesControl,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn special(c: &mut Criterion) {
    let ctl = SeriesControl::default();
    c.bench_function("kummer_phi", |b| {
        b.iter(|| kummer_phi(black_box(1.3), 2.6, black_box(3.7), ctl))
    });
    c.bench_function("tricomi_psi", |b| {
        b.iter(|| tricomi_psi(black_box(1.3), 2.6, black_box(3.7), ctl))
    });
}

fn kernels(c: &mut Criterion) {
    let ctx = KernelContext::new(0.0, 1.0, QuadConfig::default()).unwrap();
    c.bench_function("kernel_g", |b| b.iter(|| kernel_g(black_box(1.0), &ctx)));
    c.bench_function("kernel_g_derivatives_4", |b| {
        b.iter(|| kernel_g_derivatives(black_box(1.0), &ctx, 4))
    });
    c.bench_function("psi", |b| {
        b.iter(|| psi(black_box(1.0), black_box(1.0), &ctx))
    });
}

fn closed_forms(c: &mut Criterion) {
    let q = QuadConfig::default();
    let mut g = c.benchmark_group("closed_forms");
    g.sample_size(20);
    let p = FunctionalParams::new(0.0, 1.0, 1.0).unwrap();
    let mc = MCConfig::default();
    g.bench_function("laplace_recip_quadrature", |b| {
        b.iter(|| laplace_recip(black_box(1.0), &p, LaplaceRoute::Quadrature, &q, &mc))
    });
    g.bench_function("gamma_moments", |b| {
        b.iter(|| gamma_moments_at(black_box(0.5), 1.0, -2, 3, &q))
    });
    let rt = SVParams::lognormal(0.5, -0.3, 0.0)
        .unwrap()
        .with_time_rate(1.0)
        .unwrap();
    g.bench_function("random_time_moment", |b| {
        b.iter(|| lognormal_moment_random_time(&rt, ExponentSign::Minus, &q))
    });
    let st = SVParams::stein(0.5, -0.2, 1.0, 0.5).unwrap();
    g.bench_function("stein_moment", |b| b.iter(|| stein_moment(black_box(&st))));
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let q = QuadConfig::default();
    let mut g = c.benchmark_group("monte_carlo");
    g.sample_size(10);
    let p = FunctionalParams::new(0.0, 1.0, 1.0).unwrap();
    let mc = MCConfig::default().with_paths(2000).with_steps(256);
    g.bench_function("laplace_recip_path_mc_2k", |b| {
        b.iter(|| laplace_recip(1.0, &p, LaplaceRoute::PathMc, &q, &mc))
    });
    g.bench_function("laplace_recip_radial_ou_2k", |b| {
        b.iter(|| laplace_recip(1.0, &p, LaplaceRoute::RadialOu, &q, &mc))
    });
    g.finish();
}

criterion_group!(benches, special, kernels, closed_forms, monte_carlo);
criterion_main!(benches);
