use rand::Rng;
use rand_distr::{Beta, Distribution, Exp, Gamma, Poisson};

use super::{std_normal, MCConfig, Stream};
use crate::error::{Error, Result};

/// Exact draw from the squared Bessel (dimension 0) transition with
/// parameter `s`, i.e. over time `s/2`: `N ~ Poisson(x/s)`, then
/// `Gamma(N, s)` (zero when `N = 0`).
pub fn sample_besq0_transition(x: f64, s: f64, stream: &mut Stream) -> f64 {
    debug_assert!(x >= 0.0 && s > 0.0);
    if x == 0.0 {
        return 0.0;
    }
    let n: f64 = Poisson::new(x / s)
        .expect("positive Poisson mean")
        .sample(stream);
    if n == 0.0 {
        0.0
    } else {
        Gamma::new(n, s)
            .expect("valid gamma parameters")
            .sample(stream)
    }
}

/// Euler scheme for `dR = 2√R dB` run for time `time`, absorbed at 0.
pub fn besq0_euler(x: f64, time: f64, n_steps: usize, stream: &mut Stream) -> f64 {
    let dt = time / n_steps as f64;
    let sq = dt.sqrt();
    let mut r = x;
    for _ in 0..n_steps {
        if r == 0.0 {
            break;
        }
        r = (r + 2.0 * r.sqrt() * sq * std_normal(stream)).max(0.0);
    }
    r
}

/// Exact draw of the squared radial OU process `dθ = 2√θ dB + 2θ dt` at
/// time `t`: `θ(t) = e^{2t} R^x(τ)` with `τ = (1 − e^{−2t})/2`.
pub fn simulate_squared_rou(x: f64, t: f64, stream: &mut Stream) -> f64 {
    debug_assert!(x >= 0.0 && t >= 0.0);
    if t == 0.0 {
        return x;
    }
    let tau = -0.5 * (-2.0 * t).exp_m1();
    (2.0 * t).exp() * sample_besq0_transition(x, 2.0 * tau, stream)
}

/// Euler scheme for the squared radial OU SDE, absorbed at 0.
pub fn squared_rou_euler(x: f64, t: f64, n_steps: usize, stream: &mut Stream) -> f64 {
    let dt = t / n_steps as f64;
    let sq = dt.sqrt();
    let mut th = x;
    for _ in 0..n_steps {
        if th == 0.0 {
            break;
        }
        th = (th + 2.0 * th.sqrt() * sq * std_normal(stream) + 2.0 * th * dt).max(0.0);
    }
    th
}

/// Euler path of `S = cosh R`, `dS = √(S²−1) dB`, clamped at 1; returns `S_t`.
pub fn simulate_cosh_hyperbolic(
    c0: f64,
    t: f64,
    mc: &MCConfig,
    stream: &mut Stream,
) -> Result<f64> {
    if !(c0 >= 1.0) || !c0.is_finite() {
        return Err(Error::domain(format!(
            "cosh process needs a start >= 1, got {c0}"
        )));
    }
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(c0);
    }
    let grid = super::UniformGrid::new(t, mc.n_steps)?;
    let mut s = [c0];
    super::cosh_hyperbolic_multi(stream, &grid, &mut s, |_, _| {});
    Ok(s[0])
}

fn beta_gamma_shapes(lambda: f64) -> (f64, f64) {
    let r = (2.0 * lambda + 0.25).sqrt();
    (0.5 * (r - 0.5), 0.5 * (r + 0.5))
}

/// Components `(ζ, γ)` with `ζ ~ Beta(1, a)` and `γ ~ Gamma(b, 1)`.
pub fn beta_gamma_parts(lambda_rate: f64, stream: &mut Stream) -> Result<(f64, f64)> {
    if !(lambda_rate > 0.0) || !lambda_rate.is_finite() {
        return Err(Error::domain(format!(
            "rate must be > 0, got {lambda_rate}"
        )));
    }
    let (a, b) = beta_gamma_shapes(lambda_rate);
    let zeta = Beta::new(1.0, a).expect("valid beta shape").sample(stream);
    let gamma = Gamma::new(b, 1.0)
        .expect("valid gamma shape")
        .sample(stream);
    Ok((zeta, gamma))
}

/// One draw of `ζ/(2γ)`, distributed as `∫_0^{T} exp(2B_u − u) du` with
/// `T` exponential of rate `lambda_rate`.
pub fn sample_beta_gamma_ratio(lambda_rate: f64, stream: &mut Stream) -> Result<f64> {
    let (zeta, gamma) = beta_gamma_parts(lambda_rate, stream)?;
    Ok(zeta / (2.0 * gamma))
}

/// Path simulation of `∫_0^T exp(2B_u − u) du` with `T ~ Exp(lambda_rate)`
/// drawn first and `n_steps` trapezoid steps on `[0, T]`.
pub fn sample_exp_functional_random_time(
    lambda_rate: f64,
    n_steps: usize,
    stream: &mut Stream,
) -> f64 {
    let t: f64 = Exp::new(lambda_rate).expect("positive rate").sample(stream);
    let dt = t / n_steps as f64;
    let sq = dt.sqrt();
    let (mut b, mut prev, mut acc) = (0.0, 1.0, 0.0);
    for i in 1..=n_steps {
        b += sq * std_normal(stream);
        let y2 = (2.0 * b - i as f64 * dt).exp();
        acc += 0.5 * dt * (prev + y2);
        prev = y2;
    }
    acc
}

/// A uniform on `(0, 1)`, for callers that need one outside `rand`.
#[allow(dead_code)]
pub(crate) fn uniform(stream: &mut Stream) -> f64 {
    stream.random::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::{estimate_from_samples, mc_samples};

    fn mc(n: usize, seed: u64) -> MCConfig {
        MCConfig::default().with_paths(n).with_seed(seed)
    }

    fn check_mean(samples: &[f64], target: f64) {
        let e = estimate_from_samples(samples, 0.95, "t");
        assert!(
            (e.value - target).abs() <= 3.0 * e.std_error,
            "mean {} ± {} vs {target}",
            e.value,
            e.std_error
        );
    }

    #[test]
    fn besq_zero_is_absorbing() {
        let mut s = super::super::rng_substream(0, 0);
        assert!((0..100).all(|_| sample_besq0_transition(0.0, 0.7, &mut s) == 0.0));
    }

    #[test]
    fn besq_atom_and_mean() {
        let (x, s) = (1.0, 0.8);
        let draws = mc_samples(|st| sample_besq0_transition(x, s, st), &mc(50_000, 4)).unwrap();
        check_mean(&draws, x);
        let atom: Vec<f64> = draws.iter().map(|&d| (d == 0.0) as u8 as f64).collect();
        check_mean(&atom, (-x / s).exp());
    }

    #[test]
    fn besq_matches_euler_moments() {
        let (x, s) = (1.0, 0.5);
        let n = 20_000;
        let exact = mc_samples(|st| sample_besq0_transition(x, s, st), &mc(n, 6)).unwrap();
        let euler = mc_samples(|st| besq0_euler(x, s / 2.0, 512, st), &mc(n, 7)).unwrap();
        for power in [1, 2] {
            let a: Vec<f64> = exact.iter().map(|v| v.powi(power)).collect();
            let b: Vec<f64> = euler.iter().map(|v| v.powi(power)).collect();
            let (ea, eb) = (
                estimate_from_samples(&a, 0.95, ""),
                estimate_from_samples(&b, 0.95, ""),
            );
            let se = ea.std_error.hypot(eb.std_error);
            assert!((ea.value - eb.value).abs() <= 3.0 * se, "power {power}");
        }
        // E R² = x² + 2xs for the parameter-s transition
        let sq: Vec<f64> = exact.iter().map(|v| v * v).collect();
        check_mean(&sq, x * x + 2.0 * x * s);
    }

    #[test]
    fn squared_rou_mean_and_euler() {
        let mut s = super::super::rng_substream(0, 0);
        assert_eq!(simulate_squared_rou(1.3, 0.0, &mut s), 1.3);
        let (x, t) = (1.0, 0.5);
        let exact = mc_samples(|st| simulate_squared_rou(x, t, st), &mc(20_000, 8)).unwrap();
        check_mean(&exact, x * (2.0 * t).exp());
        let euler = mc_samples(|st| squared_rou_euler(x, t, 512, st), &mc(20_000, 9)).unwrap();
        let (ea, eb) = (
            estimate_from_samples(&exact, 0.95, ""),
            estimate_from_samples(&euler, 0.95, ""),
        );
        assert!((ea.value - eb.value).abs() <= 3.0 * ea.std_error.hypot(eb.std_error));
    }

    #[test]
    fn cosh_process_is_local_martingale() {
        let cfg = MCConfig::default().with_steps(256);
        let draws = mc_samples(
            |st| simulate_cosh_hyperbolic(2.0, 0.1, &cfg, st).unwrap(),
            &mc(20_000, 10),
        )
        .unwrap();
        check_mean(&draws, 2.0);
        let mut s = super::super::rng_substream(0, 0);
        assert!(simulate_cosh_hyperbolic(0.5, 1.0, &cfg, &mut s)
            .unwrap_err()
            .is_domain());
        assert_eq!(
            simulate_cosh_hyperbolic(1.0, 1.0, &cfg, &mut s).unwrap(),
            1.0
        );
    }

    #[test]
    fn beta_gamma_component_means() {
        let lambda = 3.0;
        let (a, b) = beta_gamma_shapes(lambda);
        assert!(b > 1.0);
        let parts: Vec<(f64, f64)> = (0..40_000u64)
            .map(|i| beta_gamma_parts(lambda, &mut super::super::rng_substream(12, i)).unwrap())
            .collect();
        let zetas: Vec<f64> = parts.iter().map(|p| p.0).collect();
        let inv: Vec<f64> = parts.iter().map(|p| 1.0 / p.1).collect();
        check_mean(&zetas, 1.0 / (1.0 + a));
        check_mean(&inv, 1.0 / (b - 1.0));
        let mut s = super::super::rng_substream(0, 0);
        assert!(sample_beta_gamma_ratio(0.0, &mut s).is_err());
    }

    #[test]
    fn beta_gamma_ratio_mean_matches_functional() {
        // E ∫_0^T exp(2B_u − u) du = E(e^T − 1) = 1/(λ − 1)
        let lambda = 3.0;
        let draws = mc_samples(
            |st| sample_beta_gamma_ratio(lambda, st).unwrap(),
            &mc(50_000, 13),
        )
        .unwrap();
        check_mean(&draws, 1.0 / (lambda - 1.0));
    }
}
