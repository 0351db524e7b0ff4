//! Random streams, path simulators and the generic Monte Carlo estimator.
//!
//! Every path draws from its own ChaCha8 stream selected by
//! `(seed, path_index)`, so results do not depend on how paths are
//! scheduled across threads.

mod estimate;
mod paths;
mod samplers;
mod stats;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use estimate::{estimate_from_samples, mc_estimate, mc_estimate_multi, mc_samples, Estimate};
pub use paths::{
    cosh_hyperbolic_multi, gamma_euler_multi, gbm_multi_drift, simulate_correlated_pair,
    simulate_gamma_paths, simulate_gbm_drift, GbmState, PathBundle, RunningIntegrals, UniformGrid,
};
pub use samplers::{
    besq0_euler, beta_gamma_parts, sample_besq0_transition, sample_beta_gamma_ratio,
    sample_exp_functional_random_time, simulate_cosh_hyperbolic, simulate_squared_rou,
    squared_rou_euler,
};
pub use stats::{ks_two_sample, KsResult};

/// Per-path random stream.
pub type Stream = ChaCha8Rng;

/// Independent stream for path `path_index` under `seed`.
pub fn rng_substream(seed: u64, path_index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

#[inline]
pub(crate) fn std_normal(stream: &mut Stream) -> f64 {
    use rand::Rng;
    stream.sample(rand_distr::StandardNormal)
}

/// Drift, scale and horizon of the `Γ` and `A` functionals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalParams {
    pub mu: f64,
    pub beta: f64,
    pub horizon: f64,
}

impl FunctionalParams {
    pub fn new(mu: f64, beta: f64, horizon: f64) -> Result<Self> {
        let p = Self { mu, beta, horizon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return Err(Error::domain(format!("mu must be finite, got {}", self.mu)));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::domain(format!(
                "beta must be > 0, got {}",
                self.beta
            )));
        }
        if !(self.horizon >= 0.0) || !self.horizon.is_finite() {
            return Err(Error::domain(format!(
                "horizon must be >= 0, got {}",
                self.horizon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Euler,
    #[default]
    ExactFunctional,
    ExactTransition,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('_', "-").as_str() {
            "euler" => Ok(Scheme::Euler),
            "exact-functional" => Ok(Scheme::ExactFunctional),
            "exact-transition" => Ok(Scheme::ExactTransition),
            other => Err(Error::Config(format!("unknown scheme {other:?}"))),
        }
    }
}

/// Monte Carlo budget and reproducibility settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub scheme: Scheme,
    pub ci_level: f64,
}

impl Default for MCConfig {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            n_steps: 4096,
            seed: 1,
            scheme: Scheme::ExactFunctional,
            ci_level: 0.95,
        }
    }
}

impl MCConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(Error::Config(format!(
                "n_paths must be >= 2, got {}",
                self.n_paths
            )));
        }
        if self.n_steps < 2 {
            return Err(Error::Config(format!(
                "n_steps must be >= 2, got {}",
                self.n_steps
            )));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::Config(format!(
                "ci_level must lie in (0, 1), got {}",
                self.ci_level
            )));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_paths(mut self, n_paths: usize) -> Self {
        self.n_paths = n_paths;
        self
    }

    pub fn with_steps(mut self, n_steps: usize) -> Self {
        self.n_steps = n_steps;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn substreams_are_deterministic_and_distinct() {
        let a: Vec<u64> = (0..16)
            .map({
                let mut s = rng_substream(9, 3);
                move |_| s.random()
            })
            .collect();
        let b: Vec<u64> = (0..16)
            .map({
                let mut s = rng_substream(9, 3);
                move |_| s.random()
            })
            .collect();
        assert_eq!(a, b);
        let mut other_seed = rng_substream(10, 3);
        let mut other_path = rng_substream(9, 4);
        assert_ne!(a[0], other_seed.random::<u64>());
        assert_ne!(a[0], other_path.random::<u64>());
    }

    #[test]
    fn neighbouring_substreams_pass_independence_screen() {
        // 10x10 contingency table of paired uniforms from streams 0 and 1.
        let mut s0 = rng_substream(42, 0);
        let mut s1 = rng_substream(42, 1);
        let n = 10_000;
        let mut table = [[0.0f64; 10]; 10];
        for _ in 0..n {
            let i = (s0.random::<f64>() * 10.0) as usize;
            let j = (s1.random::<f64>() * 10.0) as usize;
            table[i][j] += 1.0;
        }
        let rows: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
        let cols: Vec<f64> = (0..10).map(|j| table.iter().map(|r| r[j]).sum()).collect();
        let mut chi2 = 0.0;
        for i in 0..10 {
            for j in 0..10 {
                let e = rows[i] * cols[j] / n as f64;
                chi2 += (table[i][j] - e).powi(2) / e;
            }
        }
        // 81 degrees of freedom; 0.999 quantile ≈ 127.
        assert!(chi2 < 127.0, "chi2 = {chi2}");
    }

    #[test]
    fn config_validation() {
        assert!(MCConfig::default().validate().is_ok());
        assert!(MCConfig::default().with_steps(1).validate().is_err());
        assert!(FunctionalParams::new(0.0, 0.0, 1.0)
            .unwrap_err()
            .is_domain());
        assert!(FunctionalParams::new(0.0, 1.0, -1.0).is_err());
        assert_eq!(
            "exact_transition".parse::<Scheme>().unwrap(),
            Scheme::ExactTransition
        );
    }
}
