//! Expectations of `(1 + βA_t)^{-1}`, `ln(1 + βA_t)` and
//! `exp(−λ/(1 + βA_t))`, by kernel quadrature and by simulation.

use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use super::kernel::{kernel_g_raw, psi, KernelContext, PsiTable};
use crate::error::{Error, Result};
use crate::quadrature::{
    integrate_to_infinity, integrate_with_breaks, truncation_point, QuadConfig, QuadResult,
};
use crate::special::recip_gamma;
use crate::stochastic::{
    estimate_from_samples, gbm_multi_drift, mc_estimate, mc_samples, simulate_squared_rou,
    std_normal, Estimate, FunctionalParams, GbmState, MCConfig, UniformGrid,
};

/// `E A_t^{(μ)} = (e^{2(1+μ)t} − 1) / (2(1+μ))`.
pub fn mean_exponential_functional(mu: f64, t: f64) -> f64 {
    let k = 2.0 * (1.0 + mu);
    if k.abs() < 1e-12 {
        t
    } else {
        (k * t).exp_m1() / k
    }
}

fn kernel_scale(mu: f64, t: f64) -> f64 {
    mean_exponential_functional(mu, t).clamp(1e-8, 1e8)
}

/// `∫_0^∞ G_t(y) e^{−decay·y} dy`, with breakpoints adapted to both the
/// kernel scale and the exponential weight.
fn kernel_laplace_integral(ctx: &KernelContext, decay: f64) -> Result<QuadResult> {
    let inner = ctx.inner();
    let scale = kernel_scale(ctx.mu, ctx.t).min(1.0 / decay);
    let cut = truncation_point(0.0, decay, &ctx.quad);
    let mut pts = vec![0.0];
    let mut y = scale / 64.0;
    while y < cut {
        pts.push(y);
        y *= 4.0;
    }
    pts.push(cut);
    let mut failure = None;
    let r = integrate_with_breaks(
        |y| match kernel_g_raw(y, ctx.mu, ctx.t, &inner, false) {
            Ok(g) => g * (-decay * y).exp(),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        &pts,
        &ctx.quad,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(r),
    }
}

/// `E (1 + βA_t^{(μ)})^{-1} = 1 − β ∫_0^∞ G_t(y) e^{−βy} dy`.
pub fn expected_recip_one_plus_beta_a(
    p: &FunctionalParams,
    quad: &QuadConfig,
) -> Result<QuadResult> {
    p.validate()?;
    if p.horizon == 0.0 {
        return Ok(QuadResult {
            value: 1.0,
            err_estimate: 0.0,
            evaluations: 0,
        });
    }
    let ctx = KernelContext::new(p.mu, p.horizon, *quad)?;
    let r = kernel_laplace_integral(&ctx, p.beta)?;
    Ok(QuadResult {
        value: 1.0 - p.beta * r.value,
        err_estimate: p.beta * r.err_estimate,
        evaluations: r.evaluations,
    })
}

/// `E ln(1 + βA_t^{(μ)}) = ∫_0^∞ G_t(y) (1 − e^{−βy}) / y dy`.
pub fn expected_log_one_plus_beta_a(p: &FunctionalParams, quad: &QuadConfig) -> Result<QuadResult> {
    p.validate()?;
    if p.horizon == 0.0 {
        return Ok(QuadResult {
            value: 0.0,
            err_estimate: 0.0,
            evaluations: 0,
        });
    }
    let ctx = KernelContext::new(p.mu, p.horizon, *quad)?;
    let inner = ctx.inner();
    let beta = p.beta;
    let mut failure = None;
    let r = integrate_to_infinity(
        |y| {
            // (1 − e^{−βy})/y → β as y → 0
            let w = if y == 0.0 {
                beta
            } else {
                -(-beta * y).exp_m1() / y
            };
            match kernel_g_raw(y, ctx.mu, ctx.t, &inner, false) {
                Ok(g) => g * w,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        kernel_scale(p.mu, p.horizon),
        quad,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(r),
    }
}

/// Evaluation route for `E exp(−λ/(1 + βA_t))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LaplaceRoute {
    /// `ψ_t(1/β, λ/β)` by kernel quadrature.
    Quadrature,
    /// Average of `ψ_t(1, θ)` over the exact squared radial OU state
    /// `θ = θ^λ(−ln√β)`; requires `β ≤ 1`.
    RadialOu,
    /// Direct simulation of `A_t`.
    PathMc,
}

impl std::str::FromStr for LaplaceRoute {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('_', "-").as_str() {
            "quadrature" | "quad" => Ok(Self::Quadrature),
            "radial-ou" | "rou" => Ok(Self::RadialOu),
            "path-mc" | "mc" => Ok(Self::PathMc),
            other => Err(Error::Config(format!("unknown route {other:?}"))),
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::domain(format!("lambda must be >= 0, got {lambda}")));
    }
    Ok(())
}

/// `E exp(−λ/(1 + βA_t^{(μ)})) = ψ_t(1/β, λ/β)`.
pub fn laplace_recip_one_plus_beta_a(
    lambda: f64,
    p: &FunctionalParams,
    quad: &QuadConfig,
) -> Result<f64> {
    check_lambda(lambda)?;
    p.validate()?;
    if lambda == 0.0 {
        return Ok(1.0);
    }
    if p.horizon == 0.0 {
        return Ok((-lambda).exp());
    }
    let ctx = KernelContext::new(p.mu, p.horizon, *quad)?;
    psi(1.0 / p.beta, lambda / p.beta, &ctx)
}

/// Exact draws of `θ^λ(−ln√β)` for the radial OU route.
pub fn radial_ou_samples(lambda: f64, beta: f64, mc: &MCConfig) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::domain(format!(
            "the radial OU representation needs 0 < beta <= 1, got {beta}"
        )));
    }
    let time = -0.5 * beta.ln();
    mc_samples(|s| simulate_squared_rou(lambda, time, s), mc)
}

/// Radial OU estimate from pre-drawn samples and a `ψ_t(1, ·)` table.
pub fn radial_ou_estimate(samples: &[f64], table: &PsiTable, ci_level: f64) -> Result<Estimate> {
    let values = samples
        .iter()
        .map(|&th| table.eval(th))
        .collect::<Result<Vec<f64>>>()?;
    Ok(estimate_from_samples(&values, ci_level, "radial-ou"))
}

/// `E exp(−λ/(1 + βA_t))` by the radial OU representation (`β ≤ 1`).
pub fn laplace_recip_radial_ou(
    lambda: f64,
    p: &FunctionalParams,
    quad: &QuadConfig,
    mc: &MCConfig,
) -> Result<Estimate> {
    p.validate()?;
    let samples = radial_ou_samples(lambda, p.beta, mc)?;
    if lambda == 0.0 || p.horizon == 0.0 {
        let v = (-lambda).exp();
        return Ok(estimate_from_samples(
            &vec![v; samples.len()],
            mc.ci_level,
            "radial-ou",
        ));
    }
    let ctx = KernelContext::new(p.mu, p.horizon, *quad)?;
    let upper = samples.iter().cloned().fold(1.0, f64::max);
    let table = PsiTable::build(&ctx, 1.0, upper)?;
    radial_ou_estimate(&samples, &table, mc.ci_level)
}

/// Path Monte Carlo of `E f(A_t^{(μ)})` with the exact GBM and trapezoid
/// integral on `mc.n_steps` steps.
pub fn path_mc_of_a<F>(mu: f64, horizon: f64, mc: &MCConfig, f: F) -> Result<Estimate>
where
    F: Fn(f64) -> f64 + Sync,
{
    if horizon == 0.0 {
        return mc_estimate(|_| f(0.0), mc).map(|e| e.with_method("path-mc"));
    }
    let grid = UniformGrid::new(horizon, mc.n_steps)?;
    mc_estimate(
        |s| {
            let mut st = [GbmState::default()];
            gbm_multi_drift(s, &[mu], &grid, &mut st, |_, _| {});
            f(st[0].int_y2)
        },
        mc,
    )
    .map(|e| e.with_method("path-mc"))
}

/// `E exp(−λ/(1 + βA_t))` by the requested route.
pub fn laplace_recip(
    lambda: f64,
    p: &FunctionalParams,
    route: LaplaceRoute,
    quad: &QuadConfig,
    mc: &MCConfig,
) -> Result<Estimate> {
    match route {
        LaplaceRoute::Quadrature => {
            let v = laplace_recip_one_plus_beta_a(lambda, p, quad)?;
            Ok(Estimate::deterministic(
                v,
                quad.abs_tol.max(quad.rel_tol * v),
                "quadrature",
            ))
        }
        LaplaceRoute::RadialOu => laplace_recip_radial_ou(lambda, p, quad, mc),
        LaplaceRoute::PathMc => {
            check_lambda(lambda)?;
            p.validate()?;
            let beta = p.beta;
            path_mc_of_a(p.mu, p.horizon, mc, |a| (-lambda / (1.0 + beta * a)).exp())
        }
    }
}

/// The conditional expectation `E(A_t^{(−μ)} | A_∞^{(−μ)} = 1/(2β))` and
/// the identity value `1 − 2β·conditional`, which equals
/// `E (1 + 2βA_t^{(μ)})^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerpetuityConditional {
    pub conditional: f64,
    pub identity_value: f64,
    pub err_estimate: f64,
}

/// `E(A_t^{(−μ)} | A_∞^{(−μ)} = 1/(2β)) = ∫_0^∞ G_t^{(μ)}(y) e^{−2βy} dy`, `μ > 0`.
pub fn conditional_a_given_perpetuity(
    p: &FunctionalParams,
    quad: &QuadConfig,
) -> Result<PerpetuityConditional> {
    p.validate()?;
    if !(p.mu > 0.0) {
        return Err(Error::domain(format!(
            "the perpetuity is finite only for a positive drift, got mu = {}",
            p.mu
        )));
    }
    if p.horizon == 0.0 {
        return Ok(PerpetuityConditional {
            conditional: 0.0,
            identity_value: 1.0,
            err_estimate: 0.0,
        });
    }
    let ctx = KernelContext::new(p.mu, p.horizon, *quad)?;
    let r = kernel_laplace_integral(&ctx, 2.0 * p.beta)?;
    Ok(PerpetuityConditional {
        conditional: r.value,
        identity_value: 1.0 - 2.0 * p.beta * r.value,
        err_estimate: r.err_estimate,
    })
}

/// Monte Carlo of `E[e^{2μB_t^{(−μ)}} / (1 + 2βA_t^{(−μ)})]`, the
/// change-of-measure form of the perpetuity identity.
pub fn perpetuity_identity_mc(p: &FunctionalParams, mc: &MCConfig) -> Result<Estimate> {
    p.validate()?;
    let (mu, beta, t) = (p.mu, p.beta, p.horizon);
    if t == 0.0 {
        return mc_estimate(|_| 1.0, mc);
    }
    let grid = UniformGrid::new(t, mc.n_steps)?;
    mc_estimate(
        |s| {
            let mut st = [GbmState::default()];
            gbm_multi_drift(s, &[-mu], &grid, &mut st, |_, _| {});
            let b_drift = st[0].b - mu * t;
            (2.0 * mu * b_drift).exp() / (1.0 + 2.0 * beta * st[0].int_y2)
        },
        mc,
    )
    .map(|e| e.with_method("path-mc"))
}

fn check_rate(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::domain(format!("rate must be > 0, got {lambda}")));
    }
    Ok(())
}

/// Call value `E(∫_0^{T_λ} U_s² ds − K/4)^+` with `U_s = e^{B_s − s}`:
///
/// `(1/(λΓ(a))) ∫_0^{2/K} e^{−u} u^{a−1} (1 − Ku/2)^b du`,
/// `a = (√(2λ+1) − 1)/2`, `b = a + 1`.
pub fn random_time_call_value(strike: f64, lambda: f64, quad: &QuadConfig) -> Result<f64> {
    check_rate(lambda)?;
    if !(strike >= 0.0) || !strike.is_finite() {
        return Err(Error::domain(format!("strike must be >= 0, got {strike}")));
    }
    let root = (2.0 * lambda + 1.0).sqrt();
    let (a, b) = (0.5 * (root - 1.0), 0.5 * (root + 1.0));
    if strike == 0.0 {
        return Ok(1.0 / lambda);
    }
    // Beyond u_max the factor e^{−u} u^{a−1} is negligible.
    let u_max = (2.0 / strike).min(60.0 + 4.0 * a);
    let inv_a = 1.0 / a;
    let half_k = 0.5 * strike;
    // u = w^{1/a} removes the endpoint singularity of u^{a−1}.
    let w_max = u_max.powf(a);
    let r = integrate_with_breaks(
        |w| {
            let u = w.powf(inv_a);
            let base = (1.0 - half_k * u).max(0.0);
            (-u).exp() * base.powf(b) * inv_a
        },
        &[0.0, 0.25 * w_max, 0.5 * w_max, w_max],
        &quad.tightened(1e-2),
    )?;
    Ok(r.value * recip_gamma(a) / lambda)
}

/// `E ln(1 + β∫_0^{4T_λ} Y_u du)` with `Y_u = exp(B_u − u/2)` and `T_λ`
/// exponential of rate `λ`, via the call-value expansion
/// `4β/λ − 4β² ∫_0^∞ C(K) (1 + βK)^{−2} dK`.
pub fn random_time_log_moment(beta: f64, lambda: f64, quad: &QuadConfig) -> Result<QuadResult> {
    check_rate(lambda)?;
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::domain(format!("beta must be > 0, got {beta}")));
    }
    let mut failure = None;
    let r = integrate_to_infinity(
        |k| match random_time_call_value(k, lambda, quad) {
            Ok(c) => c / ((1.0 + beta * k) * (1.0 + beta * k)),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        0.0,
        1.0 / beta,
        quad,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(QuadResult {
        value: 4.0 * beta / lambda - 4.0 * beta * beta * r.value,
        err_estimate: 4.0 * beta * beta * r.err_estimate,
        evaluations: r.evaluations,
    })
}

/// Monte Carlo oracle for [`random_time_log_moment`]: draw `T`, simulate
/// `U` on `mc.n_steps` steps of `[0, T]`.
pub fn random_time_log_moment_mc(beta: f64, lambda: f64, mc: &MCConfig) -> Result<Estimate> {
    check_rate(lambda)?;
    let exp = Exp::new(lambda).map_err(|e| Error::domain(e.to_string()))?;
    let n = mc.n_steps;
    mc_estimate(
        |s| {
            let t: f64 = exp.sample(s);
            let dt = t / n as f64;
            let sq = dt.sqrt();
            let (mut b, mut prev, mut acc) = (0.0, 1.0, 0.0);
            for i in 1..=n {
                b += sq * std_normal(s);
                let u2 = (2.0 * (b - i as f64 * dt)).exp();
                acc += 0.5 * dt * (prev + u2);
                prev = u2;
            }
            (4.0 * beta * acc).ln_1p()
        },
        mc,
    )
    .map(|e| e.with_method("path-mc"))
}
