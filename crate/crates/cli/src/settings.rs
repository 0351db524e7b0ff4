//! Effective Monte Carlo and quadrature settings: defaults, then the config
//! file, then flags; `BFX_SEED` overrides the seed from either.

use std::path::Path;

use bfx_core::{MCConfig, QuadConfig, Scheme};
use serde::Deserialize;

use crate::cli::Params;
use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub paths: Option<usize>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
    pub scheme: Option<String>,
    pub ci_level: Option<f64>,
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_subdivisions: Option<usize>,
    pub tail_bound_factor: Option<f64>,
    pub threads: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub mc: MCConfig,
    pub quad: QuadConfig,
}

pub fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var("BFX_SEED") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| {
            CliError::Usage(format!("BFX_SEED must be an unsigned integer, got {v:?}"))
        }),
        Err(_) => Ok(None),
    }
}

pub fn resolve(file: &FileConfig, p: &Params) -> Result<Settings, CliError> {
    let mut mc = MCConfig::default();
    let mut quad = QuadConfig::default();
    if let Some(v) = file.paths {
        mc.n_paths = v;
    }
    if let Some(v) = file.steps {
        mc.n_steps = v;
    }
    if let Some(v) = file.seed {
        mc.seed = v;
    }
    if let Some(v) = &file.scheme {
        mc.scheme = parse_scheme(v)?;
    }
    if let Some(v) = file.ci_level {
        mc.ci_level = v;
    }
    if let Some(v) = file.abs_tol {
        quad.abs_tol = v;
    }
    if let Some(v) = file.rel_tol {
        quad.rel_tol = v;
    }
    if let Some(v) = file.max_subdivisions {
        quad.max_subdivisions = v;
    }
    if let Some(v) = file.tail_bound_factor {
        quad.tail_bound_factor = v;
    }
    if let Some(v) = p.paths {
        mc.n_paths = v;
    }
    if let Some(v) = p.steps {
        mc.n_steps = v;
    }
    if let Some(v) = p.seed {
        mc.seed = v;
    }
    if let Some(v) = &p.scheme {
        mc.scheme = parse_scheme(v)?;
    }
    if let Some(v) = p.tol {
        quad.abs_tol = v;
        quad.rel_tol = v;
    }
    if let Some(v) = env_seed()? {
        mc.seed = v;
    }
    mc.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    quad.validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(Settings { mc, quad })
}

fn parse_scheme(s: &str) -> Result<Scheme, CliError> {
    s.replace('_', "-")
        .parse()
        .map_err(|e: bfx_core::Error| CliError::Usage(e.to_string()))
}
