//! Asset-price moments `E X_t^α` for `dX = YX dW` with `Y` either a
//! geometric Brownian motion (lognormal model) or an Ornstein–Uhlenbeck
//! process (Stein model), `d⟨W, Z⟩ = ρ dt`.
//!
//! After integrating out the part of `W` independent of `Z`,
//! `E X_t^α = E exp(αρ∫Y dZ + ((α²(1−ρ²) − α)/2) ∫Y² du)`, which is what the
//! Monte Carlo routes average.

use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{laplace_gamma, GammaLaplaceMethod};
use crate::quadrature::{integrate_finite, integrate_semi_infinite, QuadConfig, QuadResult};
use crate::special::{kummer_phi, ln_gamma, tricomi_psi, SeriesControl};
use crate::stochastic::{
    cosh_hyperbolic_multi, gbm_multi_drift, mc_estimate, std_normal, Estimate, FunctionalParams,
    GbmState, MCConfig, Stream, UniformGrid,
};

/// Volatility dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SvModel {
    /// `Y = exp(Z − t/2)`.
    Lognormal,
    /// `dY = −λY dt + dZ`, `Y_0 = 1`.
    Stein,
}

impl std::str::FromStr for SvModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lognormal" => Ok(Self::Lognormal),
            "stein" => Ok(Self::Stein),
            other => Err(Error::Config(format!("unknown model {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SVParams {
    /// Moment order.
    pub alpha: f64,
    pub rho: f64,
    pub t: f64,
    pub model: SvModel,
    /// Stein mean reversion `λ`; ignored by the lognormal model.
    pub mean_reversion: f64,
    /// Rate of the exponential horizon for the random-time moment.
    pub time_rate: Option<f64>,
}

impl SVParams {
    pub fn lognormal(alpha: f64, rho: f64, t: f64) -> Result<Self> {
        let p = Self {
            alpha,
            rho,
            t,
            model: SvModel::Lognormal,
            mean_reversion: 1.0,
            time_rate: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn stein(alpha: f64, rho: f64, lambda: f64, t: f64) -> Result<Self> {
        let p = Self {
            alpha,
            rho,
            t,
            model: SvModel::Stein,
            mean_reversion: lambda,
            time_rate: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_time_rate(mut self, lambda: f64) -> Result<Self> {
        self.time_rate = Some(lambda);
        self.validate()?;
        Ok(self)
    }

    /// Basic ranges; model preconditions are checked by each route.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::domain(format!(
                "moment order alpha must be > 0, got {}",
                self.alpha
            )));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(Error::domain(format!(
                "correlation rho must lie in [-1, 1], got {}",
                self.rho
            )));
        }
        if !(self.t >= 0.0) || !self.t.is_finite() {
            return Err(Error::domain(format!(
                "horizon t must be >= 0, got {}",
                self.t
            )));
        }
        if !(self.mean_reversion > 0.0) || !self.mean_reversion.is_finite() {
            return Err(Error::domain(format!(
                "mean reversion must be > 0, got {}",
                self.mean_reversion
            )));
        }
        if let Some(l) = self.time_rate {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::domain(format!("time rate must be > 0, got {l}")));
            }
        }
        Ok(())
    }

    /// `(α²(1−ρ²) − α)/2`, the coefficient of `∫Y²` in the reduced exponent.
    pub fn quadratic_coefficient(&self) -> f64 {
        0.5 * (self.alpha * self.alpha * (1.0 - self.rho * self.rho) - self.alpha)
    }

    /// Lognormal `β = √(α − α²(1−ρ²))`, defined under `α(1−ρ²) < 1`.
    pub fn lognormal_beta(&self) -> Result<f64> {
        self.validate()?;
        let j = self.alpha * (1.0 - self.rho * self.rho);
        if !(j < 1.0) {
            return Err(Error::domain(format!(
                "Jourdain bound alpha*(1-rho^2) < 1 violated: alpha={}, rho={} give {j}",
                self.alpha, self.rho
            )));
        }
        Ok((self.alpha * (1.0 - j)).sqrt())
    }

    /// Stein `β = (λ − ρα)/2`.
    pub fn stein_beta(&self) -> f64 {
        0.5 * (self.mean_reversion - self.rho * self.alpha)
    }

    /// Stein `γ² = λ² − α²(1−ρ²) + α − 2λρα`.
    pub fn stein_gamma_sq(&self) -> f64 {
        let (a, r, l) = (self.alpha, self.rho, self.mean_reversion);
        l * l - a * a * (1.0 - r * r) + a - 2.0 * l * r * a
    }

    /// Checks the Stein validity window.
    pub fn check_stein(&self) -> Result<()> {
        self.validate()?;
        let (a, r, l) = (self.alpha, self.rho, self.mean_reversion);
        let g2 = self.stein_gamma_sq();
        if !(g2 > 0.0) {
            return Err(Error::domain(format!(
                "Stein window: gamma^2 = {g2} must be > 0"
            )));
        }
        if !(r < l / a) {
            return Err(Error::domain(format!(
                "Stein window: rho = {r} must be < lambda/alpha = {}",
                l / a
            )));
        }
        if !(a * (1.0 - r * r) <= 1.0) {
            return Err(Error::domain(format!(
                "Stein window: alpha*(1-rho^2) = {} must be <= 1",
                a * (1.0 - r * r)
            )));
        }
        let horizon = solve_b() / l;
        if !(self.t < horizon) {
            return Err(Error::domain(format!(
                "Stein window: t = {} must be < b/lambda = {horizon}",
                self.t
            )));
        }
        Ok(())
    }
}

/// Route for the lognormal moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LognormalMethod {
    /// `e^{−c} E e^{cΓ_t}` with `c = β + ρα`, by path simulation of `Γ`.
    GammaMc,
    /// Same representation through the moment series of `Γ`.
    GammaSeries,
    /// Direct simulation of the volatility path.
    TwoFactorMc,
}

impl std::str::FromStr for LognormalMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma-mc" => Ok(Self::GammaMc),
            "gamma-series" => Ok(Self::GammaSeries),
            "two-factor-mc" => Ok(Self::TwoFactorMc),
            other => Err(Error::Config(format!("unknown method {other:?}"))),
        }
    }
}

fn require_model(p: &SVParams, model: SvModel) -> Result<()> {
    if p.model != model {
        return Err(Error::Config(format!(
            "this route needs the {model:?} model, got {:?}",
            p.model
        )));
    }
    Ok(())
}

/// `E X_t^α` in the lognormal model.
pub fn lognormal_moment(
    p: &SVParams,
    method: LognormalMethod,
    quad: &QuadConfig,
    mc: &MCConfig,
) -> Result<Estimate> {
    require_model(p, SvModel::Lognormal)?;
    let beta = p.lognormal_beta()?;
    if p.t == 0.0 {
        return Ok(Estimate::deterministic(1.0, 0.0, "exact"));
    }
    let c = beta + p.rho * p.alpha;
    match method {
        LognormalMethod::TwoFactorMc => lognormal_two_factor_mc(p, mc),
        _ if c.abs() <= 1e-14 * (beta + p.alpha) => {
            Ok(Estimate::deterministic(1.0, 0.0, "gamma-collapse"))
        }
        LognormalMethod::GammaMc | LognormalMethod::GammaSeries => {
            let m = if method == LognormalMethod::GammaMc {
                GammaLaplaceMethod::Mc
            } else {
                GammaLaplaceMethod::Series
            };
            let fp = FunctionalParams::new(0.0, beta, p.t)?;
            let e = laplace_gamma(-c, &fp, m, quad, mc)?.scaled((-c).exp());
            let tag = if method == LognormalMethod::GammaMc {
                "gamma-mc".to_string()
            } else {
                format!("gamma-{}", e.method)
            };
            Ok(e.with_method(tag))
        }
    }
}

/// Exponent `αρ(Y_t − 1) + q∫Y²` of the lognormal two-factor sample, using
/// `∫Y dZ = Y_t − 1` for `Y = exp(Z − t/2)`.
pub(crate) fn lognormal_log_sample(alpha: f64, rho: f64, q: f64, s: &GbmState) -> f64 {
    alpha * rho * (s.y - 1.0) + q * s.int_y2
}

fn lognormal_two_factor_mc(p: &SVParams, mc: &MCConfig) -> Result<Estimate> {
    let grid = UniformGrid::new(p.t, mc.n_steps)?;
    let q = p.quadratic_coefficient();
    Ok(mc_estimate(
        |s| {
            let mut st = [GbmState::default()];
            gbm_multi_drift(s, &[-0.5], &grid, &mut st, |_, _| {});
            lognormal_log_sample(p.alpha, p.rho, q, &st[0]).exp()
        },
        mc,
    )?
    .with_method("two-factor-mc"))
}

/// Start `S_0 = −ρα/β` of the cosh process, which must be `≥ 1`.
pub fn lognormal_bessel_start(p: &SVParams) -> Result<f64> {
    let beta = p.lognormal_beta()?;
    if !(p.rho < 0.0) {
        return Err(Error::domain(format!(
            "the hyperbolic Bessel route needs rho < 0, got {}",
            p.rho
        )));
    }
    let mut s0 = -p.rho * p.alpha / beta;
    if (s0 - 1.0).abs() < 1e-12 {
        s0 = s0.max(1.0);
    }
    if !(s0 >= 1.0) {
        return Err(Error::domain(format!(
            "the hyperbolic Bessel route needs -rho*alpha >= beta (start {s0} < 1, i.e. alpha < 1)"
        )));
    }
    Ok(s0)
}

/// `E X_t^α = e^{−ρα} E e^{−βS_t}` with `S = cosh R` started at `−ρα/β`.
pub fn lognormal_moment_bessel(p: &SVParams, mc: &MCConfig) -> Result<Estimate> {
    require_model(p, SvModel::Lognormal)?;
    let s0 = lognormal_bessel_start(p)?;
    let beta = p.lognormal_beta()?;
    if p.t == 0.0 {
        return Ok(Estimate::deterministic(1.0, 0.0, "exact"));
    }
    let grid = UniformGrid::new(p.t, mc.n_steps)?;
    Ok(mc_estimate(
        |s| {
            let mut st = [s0];
            cosh_hyperbolic_multi(s, &grid, &mut st, |_, _| {});
            (-p.rho * p.alpha - beta * st[0]).exp()
        },
        mc,
    )?
    .with_method("bessel-mc"))
}

/// Sign of the exponent in the resolvent integrand of the random-time moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentSign {
    /// `e^{((αρ−β)/(2β))/y}`.
    #[default]
    Minus,
    /// `e^{((αρ+β)/(2β))/y}`, taken literally without the speed density.
    Plus,
}

impl std::str::FromStr for ExponentSign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minus" => Ok(Self::Minus),
            "plus" => Ok(Self::Plus),
            other => Err(Error::Config(format!("unknown exponent sign {other:?}"))),
        }
    }
}

/// `E X_{2T}^α` for `T ~ Exp(λ)` independent of the drivers, through the
/// resolvent of the diffusion `1/(2Γ)` written with `Φ(p, 2p, ·)` and
/// `Ψ(p, 2p, ·)`, `p = (1 + √(1+4λ))/2`.
pub fn lognormal_moment_random_time(
    p: &SVParams,
    sign: ExponentSign,
    quad: &QuadConfig,
) -> Result<QuadResult> {
    require_model(p, SvModel::Lognormal)?;
    let lambda = p
        .time_rate
        .ok_or_else(|| Error::Config("the random-time moment needs a time rate".into()))?;
    let beta = p.lognormal_beta()?;
    let ar = p.alpha * p.rho;
    let c = beta + ar;
    let kappa = match sign {
        ExponentSign::Minus => (ar - beta) / (2.0 * beta),
        ExponentSign::Plus => (ar + beta) / (2.0 * beta),
    };
    if !(kappa < 0.0) {
        return Err(Error::domain(format!(
            "resolvent exponent {kappa} is not negative, the outer integral diverges"
        )));
    }
    let pp = 0.5 * (1.0 + (1.0 + 4.0 * lambda).sqrt());
    let cc = 2.0 * pp;
    let z0 = 2.0 * beta;
    let ctl = SeriesControl::default();
    let mut failure: Option<Error> = None;

    let i2 = integrate_semi_infinite(
        |z| match tricomi_psi(pp, cc, z, ctl) {
            Ok(v) => (kappa * z).exp() * z.powf(pp - 2.0) * v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        z0,
        -kappa,
        quad,
    )?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    // z = w^{1/(p−1)} absorbs the z^{p−2} singularity at 0.
    let e = 1.0 / (pp - 1.0);
    let i1 = integrate_finite(
        |w| {
            let z = w.powf(e);
            match kummer_phi(pp, cc, z, ctl) {
                Ok(v) => (kappa * z).exp() * v * e,
                Err(err) => {
                    failure.get_or_insert(err);
                    0.0
                }
            }
        },
        0.0,
        z0.powf(pp - 1.0),
        quad,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let x0p = (2.0 * beta).powf(pp);
    let phi1 = x0p * kummer_phi(pp, cc, z0, ctl)?;
    let phi2 = x0p * tricomi_psi(pp, cc, z0, ctl)?;
    let pref = lambda * (-c + ln_gamma(pp)? - ln_gamma(cc)?).exp();
    let value = pref * (phi1 * i2.value + phi2 * i1.value);
    if !value.is_finite() {
        return Err(Error::NonFinite {
            location: "random-time moment".into(),
            value,
        });
    }
    Ok(QuadResult {
        value,
        err_estimate: pref * (phi1 * i2.err_estimate + phi2 * i1.err_estimate),
        evaluations: i1.evaluations + i2.evaluations,
    })
}

/// Monte Carlo of `E X_{2T}^α`, `T ~ Exp(λ)` drawn per path and the
/// volatility path simulated on `mc.n_steps` steps of `[0, 2T]`.
pub fn lognormal_moment_random_time_mc(p: &SVParams, mc: &MCConfig) -> Result<Estimate> {
    require_model(p, SvModel::Lognormal)?;
    let lambda = p
        .time_rate
        .ok_or_else(|| Error::Config("the random-time moment needs a time rate".into()))?;
    p.lognormal_beta()?;
    let q = p.quadratic_coefficient();
    let exp = Exp::new(lambda).map_err(|e| Error::domain(e.to_string()))?;
    let n = mc.n_steps;
    Ok(mc_estimate(
        |s| {
            let horizon = 2.0 * exp.sample(s);
            let dt = horizon / n as f64;
            let sq = dt.sqrt();
            let (mut z, mut y, mut acc) = (0.0, 1.0f64, 0.0);
            for i in 1..=n {
                z += sq * std_normal(s);
                let yn = (z - 0.5 * i as f64 * dt).exp();
                acc += 0.5 * dt * (y * y + yn * yn);
                y = yn;
            }
            (p.alpha * p.rho * (y - 1.0) + q * acc).exp()
        },
        mc,
    )?
    .with_method("random-time-mc"))
}

/// Root of `b(1 − e^{−2b}) = 2`.
pub fn solve_b() -> f64 {
    let f = |b: f64| b * (-(-2.0 * b).exp_m1()) - 2.0;
    let (mut lo, mut hi) = (1.0f64, 3.0f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut b = 0.5 * (lo + hi);
    for _ in 0..3 {
        let e = (-2.0 * b).exp();
        let d = 1.0 - e + 2.0 * b * e;
        b -= f(b) / d;
    }
    b
}

/// Closed forms competing for the Stein moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SteinVariant {
    /// Quadratic-functional transform of the OU process started at 1.
    Corrected,
    /// `e^{(1+t)β} D^{−1/2}` alone.
    Printed,
    /// `e^{(1+t)β} D^{−1/2} exp(β/2 − (γ/2 + β) e^{γt}/D)`.
    ProofLine,
}

impl SteinVariant {
    pub const ALL: [SteinVariant; 3] = [Self::Corrected, Self::Printed, Self::ProofLine];
}

/// `E X_t^α` in the Stein model (corrected closed form).
pub fn stein_moment(p: &SVParams) -> Result<f64> {
    stein_moment_variant(p, SteinVariant::Corrected)
}

/// A named Stein closed form, evaluated inside the validity window.
pub fn stein_moment_variant(p: &SVParams, variant: SteinVariant) -> Result<f64> {
    require_model(p, SvModel::Stein)?;
    p.check_stein()?;
    let beta = p.stein_beta();
    let g = p.stein_gamma_sq().sqrt();
    let t = p.t;
    let (ch, sh) = ((g * t).cosh(), (g * t).sinh());
    let d = ch + 2.0 * beta / g * sh;
    if !(d > 0.0) {
        return Err(Error::domain(format!(
            "Stein transform denominator {d} is not positive"
        )));
    }
    let base = (1.0 + t) * beta - 0.5 * d.ln();
    let log_value = match variant {
        SteinVariant::Corrected => base - 0.5 * g * (sh + 2.0 * beta / g * ch) / d,
        SteinVariant::Printed => base,
        SteinVariant::ProofLine => base + 0.5 * beta - (0.5 * g + beta) * (g * t).exp() / d,
    };
    let v = log_value.exp();
    if !v.is_finite() {
        return Err(Error::NonFinite {
            location: "Stein moment".into(),
            value: v,
        });
    }
    Ok(v)
}

/// One OU path from 1 with exact transitions; returns `(Y_t, ∫Y²)`.
pub(crate) fn ou_path(lambda: f64, grid: &UniformGrid, s: &mut Stream) -> (f64, f64) {
    let dt = grid.dt();
    let decay = (-lambda * dt).exp();
    let sd = (-(-2.0 * lambda * dt).exp_m1() / (2.0 * lambda)).sqrt();
    let (mut y, mut acc) = (1.0f64, 0.0);
    for _ in 0..grid.n_steps {
        let yn = y * decay + sd * std_normal(s);
        acc += 0.5 * dt * (y * y + yn * yn);
        y = yn;
    }
    (y, acc)
}

/// Exponent of the Stein two-factor sample, using
/// `∫Y dZ = (Y_t² − 1 − t)/2 + λ∫Y²`.
pub(crate) fn stein_log_sample(
    alpha: f64,
    rho: f64,
    lambda: f64,
    t: f64,
    q: f64,
    y: f64,
    int_y2: f64,
) -> f64 {
    alpha * rho * (0.5 * (y * y - 1.0 - t) + lambda * int_y2) + q * int_y2
}

/// Two-factor Monte Carlo of `E X_t^α` for either model.
pub fn mc_asset_moment(p: &SVParams, mc: &MCConfig) -> Result<Estimate> {
    p.validate()?;
    if p.t == 0.0 {
        return Ok(Estimate::deterministic(1.0, 0.0, "exact"));
    }
    match p.model {
        SvModel::Lognormal => {
            p.lognormal_beta()?;
            lognormal_two_factor_mc(p, mc)
        }
        SvModel::Stein => {
            let grid = UniformGrid::new(p.t, mc.n_steps)?;
            let q = p.quadratic_coefficient();
            let l = p.mean_reversion;
            mc_estimate(
                |s| {
                    let (y, i2) = ou_path(l, &grid, s);
                    stein_log_sample(p.alpha, p.rho, l, p.t, q, y, i2).exp()
                },
                mc,
            )
            .map_err(|e| match e {
                Error::NonFinite { location, value } => Error::NonFinite {
                    location: format!(
                        "{location} (alpha={}, rho={}, lambda={l}, t={})",
                        p.alpha, p.rho, p.t
                    ),
                    value,
                },
                other => other,
            })
            .map(|e| e.with_method("two-factor-mc"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mc(n: usize) -> MCConfig {
        MCConfig::default()
            .with_paths(n)
            .with_steps(256)
            .with_seed(3)
    }

    #[test]
    fn b_root() {
        let b = solve_b();
        assert!((b * (1.0 - (-2.0 * b).exp()) - 2.0).abs() < 1e-12);
        assert!(b > 2.0 && b < 2.1);
        assert!((b - 2.03).abs() < 0.005);
    }

    #[test]
    fn jourdain_surface() {
        let p = SVParams::lognormal(2.0, -0.5, 1.0).unwrap();
        let e = lognormal_moment(
            &p,
            LognormalMethod::GammaMc,
            &QuadConfig::default(),
            &mc(100),
        )
        .unwrap_err();
        assert!(e.is_domain() && e.to_string().contains("Jourdain"));
        assert!(mc_asset_moment(&p, &mc(100)).unwrap_err().is_domain());
    }

    #[test]
    fn martingale_collapse_is_exact() {
        for rho in [-0.5, -0.9] {
            let p = SVParams::lognormal(1.0, rho, 1.0).unwrap();
            for m in [LognormalMethod::GammaMc, LognormalMethod::GammaSeries] {
                let e = lognormal_moment(&p, m, &QuadConfig::default(), &mc(100)).unwrap();
                assert_eq!(e.value, 1.0);
            }
        }
    }

    #[test]
    fn stein_at_zero_time() {
        let p = SVParams::stein(0.5, -0.2, 1.0, 0.0).unwrap();
        assert!((stein_moment(&p).unwrap() - 1.0).abs() < 1e-15);
        assert!(stein_moment_variant(&p, SteinVariant::Printed).unwrap() > 1.1);
    }

    #[test]
    fn stein_window_errors_name_condition() {
        let p = SVParams::stein(0.5, -0.2, 1.0, 2.5).unwrap();
        assert!(stein_moment(&p)
            .unwrap_err()
            .to_string()
            .contains("b/lambda"));
        let p = SVParams::stein(0.5, 0.9, 0.2, 0.1).unwrap();
        assert!(stein_moment(&p).unwrap_err().is_domain());
    }

    #[test]
    fn stein_matches_reference_value() {
        // independent vectorised simulation gave 0.95250 ± 0.00019
        let p = SVParams::stein(0.5, -0.2, 1.0, 0.5).unwrap();
        assert!((stein_moment(&p).unwrap() - 0.95260).abs() < 1e-4);
    }

    #[test]
    fn bessel_start_requires_alpha_at_least_one() {
        let p = SVParams::lognormal(0.5, -0.8, 1.0).unwrap();
        assert!(lognormal_moment_bessel(&p, &mc(100))
            .unwrap_err()
            .is_domain());
        let p = SVParams::lognormal(1.5, -0.8, 0.0).unwrap();
        assert_eq!(lognormal_moment_bessel(&p, &mc(100)).unwrap().value, 1.0);
    }

    #[test]
    fn random_time_collapse() {
        let p = SVParams::lognormal(1.0, -0.5, 0.0)
            .unwrap()
            .with_time_rate(1.0)
            .unwrap();
        let v =
            lognormal_moment_random_time(&p, ExponentSign::Minus, &QuadConfig::default()).unwrap();
        assert!((v.value - 1.0).abs() < 1e-7, "{}", v.value);
    }

    #[test]
    fn random_time_reference() {
        // mpmath evaluation of the resolvent formula at (0.5, −0.3, λ=2)
        let p = SVParams::lognormal(0.5, -0.3, 0.0)
            .unwrap()
            .with_time_rate(2.0)
            .unwrap();
        let v =
            lognormal_moment_random_time(&p, ExponentSign::Minus, &QuadConfig::default()).unwrap();
        assert!((v.value - 0.89483).abs() < 2e-5, "{}", v.value);
        assert!(
            lognormal_moment_random_time(&p, ExponentSign::Plus, &QuadConfig::default()).is_err()
        );
    }
}
