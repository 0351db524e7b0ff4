use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{rng_substream, MCConfig, Stream};
use crate::error::{Error, Result};

/// A point estimate with its error bar.
///
/// For Monte Carlo methods `std_error` is the sample standard deviation
/// over `√n_effective`; for deterministic methods it is the numerical error
/// estimate and `n_effective` is 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub n_effective: u64,
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci: Option<(f64, f64)>,
}

impl Estimate {
    pub fn deterministic(value: f64, err_estimate: f64, method: impl Into<String>) -> Self {
        Self {
            value,
            std_error: err_estimate,
            n_effective: 0,
            method: method.into(),
            ci: None,
        }
    }

    pub fn is_mc(&self) -> bool {
        self.n_effective > 0
    }

    pub fn with_method(mut self, method: impl Into<String>) -> Self {
        self.method = method.into();
        self
    }

    /// The estimate of `factor · X`.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.value *= factor;
        self.std_error *= factor.abs();
        self.ci = self.ci.map(|(lo, hi)| {
            let (a, b) = (lo * factor, hi * factor);
            (a.min(b), a.max(b))
        });
        self
    }

    /// The estimate of `X + shift`.
    pub fn shifted(mut self, shift: f64) -> Self {
        self.value += shift;
        self.ci = self.ci.map(|(lo, hi)| (lo + shift, hi + shift));
        self
    }
}

fn z_quantile(level: f64) -> f64 {
    std::f64::consts::SQRT_2 * statrs::function::erf::erf_inv(level)
}

/// Mean, standard error and confidence interval of `samples`.
pub fn estimate_from_samples(
    samples: &[f64],
    ci_level: f64,
    method: impl Into<String>,
) -> Estimate {
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    let se = (var / n as f64).sqrt();
    let ci = (n >= 100).then(|| {
        let z = z_quantile(ci_level);
        (mean - z * se, mean + z * se)
    });
    Estimate {
        value: mean,
        std_error: se,
        n_effective: n as u64,
        method: method.into(),
        ci,
    }
}

fn check_finite(buf: &[f64], dim: usize) -> Result<()> {
    if let Some(pos) = buf.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            location: format!("Monte Carlo sample of path {}", pos / dim.max(1)),
            value: buf[pos],
        });
    }
    Ok(())
}

/// Draws one sample per path, in path order.
pub fn mc_samples<F>(sampler: F, mc: &MCConfig) -> Result<Vec<f64>>
where
    F: Fn(&mut Stream) -> f64 + Sync,
{
    mc.validate()?;
    let seed = mc.seed;
    let samples: Vec<f64> = (0..mc.n_paths as u64)
        .into_par_iter()
        .map(|i| sampler(&mut rng_substream(seed, i)))
        .collect();
    check_finite(&samples, 1)?;
    Ok(samples)
}

/// Plain Monte Carlo estimate of `E sampler(stream)`.
pub fn mc_estimate<F>(sampler: F, mc: &MCConfig) -> Result<Estimate>
where
    F: Fn(&mut Stream) -> f64 + Sync,
{
    let samples = mc_samples(sampler, mc)?;
    Ok(estimate_from_samples(&samples, mc.ci_level, "mc"))
}

/// Estimates `dim` expectations from one set of paths: `sampler` writes
/// `dim` outputs per path.
pub fn mc_estimate_multi<F>(dim: usize, sampler: F, mc: &MCConfig) -> Result<Vec<Estimate>>
where
    F: Fn(&mut Stream, &mut [f64]) + Sync,
{
    mc.validate()?;
    if dim == 0 {
        return Ok(Vec::new());
    }
    let seed = mc.seed;
    let mut buf = vec![0.0; mc.n_paths * dim];
    buf.par_chunks_mut(dim)
        .enumerate()
        .for_each(|(i, out)| sampler(&mut rng_substream(seed, i as u64), out));
    check_finite(&buf, dim)?;
    let mut column = vec![0.0; mc.n_paths];
    Ok((0..dim)
        .map(|d| {
            for (i, c) in column.iter_mut().enumerate() {
                *c = buf[i * dim + d];
            }
            estimate_from_samples(&column, mc.ci_level, "mc")
        })
        .collect())
}
