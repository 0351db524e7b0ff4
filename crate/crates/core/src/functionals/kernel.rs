//! The kernel `G_t(x) = E exp(−x / A_t^{(μ)})` and its squared-Bessel
//! transform `ψ_t(s, x) = E G_t(R^x(s/2))`.
//!
//! `G` comes from the Matsumoto–Yor conditional law of `1/A_t` given `B_t`.
//! Once the Gaussian density of `B_t` is folded into the exponent, a single
//! integral remains:
//!
//! `G_t(x) = e^{−tμ²/2} (2πt)^{−1/2} ∫ exp(μz − φ_x(z)²/(2t)) dz`.

use crate::error::{Error, Result};
use crate::quadrature::{
    integrate_best_effort, integrate_vec_best_effort, integrate_with_breaks, ChebInterpolant,
    QuadConfig, QuadResult,
};
use crate::special::{bessel_i_scaled_unchecked, phi_x_unchecked};

/// Drift and horizon of the kernel together with the quadrature policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelContext {
    pub mu: f64,
    pub t: f64,
    pub quad: QuadConfig,
}

impl KernelContext {
    pub fn new(mu: f64, t: f64, quad: QuadConfig) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::domain(format!("mu must be finite, got {mu}")));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::domain(format!(
                "kernel horizon must be > 0, got {t}"
            )));
        }
        quad.validate()?;
        Ok(Self { mu, t, quad })
    }

    /// Configuration for integrals nested inside another quadrature.
    pub(crate) fn inner(&self) -> QuadConfig {
        self.quad.tightened(1e-2)
    }
}

// Half-width of the z-range in standard deviations; e^{-72} beyond.
const Z_HALF_WIDTH: f64 = 12.0;
// The highest time-derivative order supported by the Bell recursion.
pub(crate) const MAX_DERIVATIVE: usize = 24;

fn z_points(x: f64, mu: f64, t: f64, extra: f64) -> Vec<f64> {
    let centre = mu * t;
    let sd = t.sqrt();
    let k = Z_HALF_WIDTH + extra;
    let mut pts: Vec<f64> = [-k, -6.0, -3.0, -1.5, 0.0, 1.5, 3.0, 6.0, k]
        .iter()
        .map(|c| centre + c * sd)
        .collect();
    // Where x e^{-z} and cosh z cross, the integrand switches regime.
    let cross = 0.5 * (2.0 * x).ln();
    if cross > pts[0] && cross < pts[pts.len() - 1] {
        pts.push(cross);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

#[inline]
fn log_integrand(x: f64, z: f64, mu: f64, t: f64, log_norm: f64) -> f64 {
    let phi = phi_x_unchecked(x, z);
    mu * z - 0.5 * t * mu * mu - phi * phi / (2.0 * t) - log_norm
}

/// `G_t(x)`; `strict` selects whether an unmet tolerance is an error.
pub(crate) fn kernel_g_raw(x: f64, mu: f64, t: f64, cfg: &QuadConfig, strict: bool) -> Result<f64> {
    if x == 0.0 {
        return Ok(1.0);
    }
    if !(x > 0.0) {
        return Err(Error::domain(format!(
            "kernel argument must be >= 0, got {x}"
        )));
    }
    let log_norm = 0.5 * (2.0 * std::f64::consts::PI * t).ln();
    let f = |z: f64| log_integrand(x, z, mu, t, log_norm).exp();
    let pts = z_points(x, mu, t, 0.0);
    let r = if strict {
        integrate_with_breaks(f, &pts, cfg)?
    } else {
        integrate_best_effort(f, &pts, cfg)?
    };
    Ok(r.value.clamp(0.0, 1.0))
}

/// `G_t(x) = E exp(−x / A_t^{(μ)})`.
pub fn kernel_g(x: f64, ctx: &KernelContext) -> Result<f64> {
    kernel_g_raw(x, ctx.mu, ctx.t, &ctx.quad, true)
}

/// Time derivatives `∂_t^j G_t(x)` for `j = 0..=order`, written to `out`.
///
/// Differentiates under the integral sign: with the log-integrand
/// `L(t) = −½ln(2πt) − tμ²/2 + μz − c/t`, `c = φ_x(z)²/2`, the `j`-th
/// derivative of `e^L` is `e^L` times the complete Bell polynomial in
/// `L', …, L^{(j)}`.
pub(crate) fn kernel_g_tderivs(
    x: f64,
    mu: f64,
    t: f64,
    cfg: &QuadConfig,
    out: &mut [f64],
) -> Result<()> {
    let order = out.len() - 1;
    if order > MAX_DERIVATIVE {
        return Err(Error::Config(format!(
            "derivative order {order} exceeds {MAX_DERIVATIVE}"
        )));
    }
    if x == 0.0 {
        out.iter_mut()
            .enumerate()
            .for_each(|(j, o)| *o = (j == 0) as u8 as f64);
        return Ok(());
    }
    let log_norm = 0.5 * (2.0 * std::f64::consts::PI * t).ln();
    let binom = binomial_rows(order);
    let pts = z_points(x, mu, t, order as f64);
    let r = integrate_vec_best_effort(
        |z, vals: &mut [f64]| {
            let phi = phi_x_unchecked(x, z);
            let c = 0.5 * phi * phi;
            let e = (mu * z - 0.5 * t * mu * mu - c / t - log_norm).exp();
            if e == 0.0 {
                vals.iter_mut().for_each(|v| *v = 0.0);
                return;
            }
            let mut l = [0.0; MAX_DERIVATIVE + 1];
            let inv = 1.0 / t;
            l[1] = -0.5 * inv - 0.5 * mu * mu + c * inv * inv;
            let mut fact = 1.0; // (k-1)!
            let mut inv_pow = inv; // t^{-k}
            for k in 2..=order {
                fact *= (k - 1) as f64;
                inv_pow *= inv;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                // −½ (−1)^{k−1}(k−1)!/t^k − c (−1)^k k!/t^{k+1}
                l[k] = 0.5 * sign * fact * inv_pow - c * sign * fact * k as f64 * inv_pow * inv;
            }
            let mut bell = [0.0; MAX_DERIVATIVE + 1];
            bell[0] = 1.0;
            for n in 0..order {
                let mut acc = 0.0;
                for i in 0..=n {
                    acc += binom[n][i] * bell[n - i] * l[i + 1];
                }
                bell[n + 1] = acc;
            }
            for (v, b) in vals.iter_mut().zip(bell.iter()) {
                *v = e * b;
            }
        },
        order + 1,
        &pts,
        cfg,
    )?;
    out.copy_from_slice(&r.values);
    Ok(())
}

fn binomial_rows(n: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![1.0]];
    for i in 1..=n {
        let prev = &rows[i - 1];
        let mut row = vec![1.0; i + 1];
        for j in 1..i {
            row[j] = prev[j - 1] + prev[j];
        }
        rows.push(row);
    }
    rows
}

/// `∂_t^j G_t(x)` for `j = 0..=order`.
pub fn kernel_g_derivatives(x: f64, ctx: &KernelContext, order: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; order + 1];
    kernel_g_tderivs(x, ctx.mu, ctx.t, &ctx.quad, &mut out)?;
    Ok(out)
}

// Half-width in standard deviations of the Bessel-kernel window in √y.
const V_HALF_WIDTH: f64 = 7.5;

/// `E g(R^x(s/2))` for the squared Bessel process of dimension 0: the atom
/// `e^{−x/s} g(0)` plus the `I₁` density, integrated in `v = √y`.
pub(crate) fn tfg_expectation<F>(x: f64, s: f64, mut g: F, cfg: &QuadConfig) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(x >= 0.0) || !(s >= 0.0) {
        return Err(Error::domain(format!(
            "need x >= 0 and s >= 0, got ({x}, {s})"
        )));
    }
    if x == 0.0 {
        return Ok(QuadResult {
            value: g(0.0)?,
            err_estimate: 0.0,
            evaluations: 1,
        });
    }
    if s == 0.0 {
        return Ok(QuadResult {
            value: g(x)?,
            err_estimate: 0.0,
            evaluations: 1,
        });
    }
    let atom = (-x / s).exp() * g(0.0)?;
    let r = x.sqrt();
    let w = s.sqrt();
    let lo = (r - V_HALF_WIDTH * w).max(0.0);
    let hi = r + V_HALF_WIDTH * w;
    let mut pts: Vec<f64> = [-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0]
        .iter()
        .map(|k| r + k * w)
        .filter(|v| *v > lo && *v < hi)
        .collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let scale = 2.0 * r / s;
    let mut failure = None;
    let res = integrate_with_breaks(
        |v| {
            if v <= 0.0 {
                return 0.0;
            }
            let d = r - v;
            let dens = scale * (-d * d / s).exp() * bessel_i_scaled_unchecked(1, scale * v);
            if dens == 0.0 {
                return 0.0;
            }
            match g(v * v) {
                Ok(val) => dens * val,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        &pts,
        cfg,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(QuadResult {
        value: atom + res.value,
        err_estimate: res.err_estimate,
        evaluations: res.evaluations + 1,
    })
}

/// `ψ_t(s, x) = E G_t(R^x(s/2)) = E exp(−x / (s + A_t^{(μ)}))`.
pub fn psi(s: f64, x: f64, ctx: &KernelContext) -> Result<f64> {
    let inner = ctx.inner();
    let r = tfg_expectation(
        x,
        s,
        |y| kernel_g_raw(y, ctx.mu, ctx.t, &inner, false),
        &ctx.quad,
    )?;
    Ok(r.value.clamp(0.0, 1.0))
}

/// `E exp(−x/(s + ξ))` for a positive random variable `ξ` described by its
/// kernel `G(y) = E e^{−y/ξ}`.
pub fn laplace_shifted_recip_general<G>(
    x: f64,
    s: f64,
    mut kernel: G,
    cfg: &QuadConfig,
) -> Result<QuadResult>
where
    G: FnMut(f64) -> f64,
{
    cfg.validate()?;
    tfg_expectation(x, s, |y| Ok(kernel(y)), cfg)
}

/// `y ↦ ψ_t(s, y)` tabulated on `[0, upper]` by a piecewise Chebyshev
/// interpolant with geometrically growing pieces.
#[derive(Debug, Clone)]
pub struct PsiTable {
    ctx: KernelContext,
    s: f64,
    interp: ChebInterpolant,
}

const PSI_TABLE_DEGREE: usize = 24;

impl PsiTable {
    pub fn build(ctx: &KernelContext, s: f64, upper: f64) -> Result<Self> {
        if !(upper > 0.0) || !upper.is_finite() {
            return Err(Error::domain(format!(
                "table range must be positive, got {upper}"
            )));
        }
        let mut edges = vec![0.0, 0.5];
        while *edges.last().unwrap() < upper {
            let last = *edges.last().unwrap();
            edges.push(2.0 * last);
        }
        let interp =
            ChebInterpolant::build_with_edges(|y| psi(s, y, ctx), &edges, PSI_TABLE_DEGREE)?;
        Ok(Self {
            ctx: *ctx,
            s,
            interp,
        })
    }

    pub fn upper(&self) -> f64 {
        self.interp.upper()
    }

    /// Interpolated value; falls back to direct evaluation beyond the range.
    pub fn eval(&self, y: f64) -> Result<f64> {
        match self.interp.eval(y) {
            Some(v) => Ok(v.clamp(0.0, 1.0)),
            None => psi(self.s, y, &self.ctx),
        }
    }
}
