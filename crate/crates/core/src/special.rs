//! Scalar special functions needed by the closed forms: Gamma, the modified
//! Bessel functions `I_1`/`I_2`, Kummer's `Φ`, Tricomi's `Ψ` and the
//! argcosh map `φ_x` appearing in the Matsumoto–Yor conditional law.
//!
//! All functions are pure and deterministic.

use crate::error::{Error, Result};
use crate::quadrature::{integrate_to_infinity, QuadConfig};

/// Truncation policy for power series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub max_terms: usize,
    /// Relative magnitude (term / partial sum) at which a series stops.
    pub term_tol: f64,
}

impl SeriesControl {
    pub fn new(max_terms: usize, term_tol: f64) -> Result<Self> {
        if max_terms < 16 {
            return Err(Error::Config(format!(
                "max_terms must be >= 16, got {max_terms}"
            )));
        }
        if !(term_tol > 0.0 && term_tol < 1e-6) {
            return Err(Error::Config(format!(
                "term_tol must lie in (0, 1e-6), got {term_tol}"
            )));
        }
        Ok(Self {
            max_terms,
            term_tol,
        })
    }
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            max_terms: 5000,
            term_tol: 1e-17,
        }
    }
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

/// `Γ(x)` on the whole real line (infinite at the poles).
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// `1/Γ(x)`, which is entire: zero at the non-positive integers.
pub fn recip_gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.round() {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

/// Rising factorial `(a)_k = a (a+1) ... (a+k-1)`.
pub fn pochhammer(a: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (a + j as f64))
}

// Power series below this argument, Hankel asymptotic expansion above.
const BESSEL_SERIES_LIMIT: f64 = 15.0;

/// Modified Bessel function of the first kind `I_ν(x)` for `ν ∈ {1, 2}`.
pub fn bessel_i(order: u32, x: f64) -> Result<f64> {
    check_bessel_args(order, x)?;
    let scaled = bessel_i_scaled_unchecked(order, x);
    let value = scaled * x.exp();
    if !value.is_finite() {
        return Err(Error::NonFinite {
            location: format!("bessel_i({order}, {x}) overflows"),
            value,
        });
    }
    Ok(value)
}

/// Exponentially scaled `e^{-x} I_ν(x)`; never overflows.
pub fn bessel_i_scaled(order: u32, x: f64) -> Result<f64> {
    check_bessel_args(order, x)?;
    Ok(bessel_i_scaled_unchecked(order, x))
}

fn check_bessel_args(order: u32, x: f64) -> Result<()> {
    if !(order == 1 || order == 2) {
        return Err(Error::domain(format!(
            "bessel_i supports orders 1 and 2, got {order}"
        )));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(format!("bessel_i requires x >= 0, got {x}")));
    }
    Ok(())
}

/// `e^{-x} I_ν(x)` for `ν ∈ {0, 1, 2}` and `x ≥ 0`.
pub(crate) fn bessel_i_scaled_unchecked(nu: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0 { 1.0 } else { 0.0 };
    }
    if x.is_infinite() {
        return 0.0;
    }
    if x < BESSEL_SERIES_LIMIT {
        let half = 0.5 * x;
        let q = half * half;
        let nu_f = nu as f64;
        let mut term = half.powi(nu as i32) / pochhammer(1.0, nu as usize);
        let mut sum = term;
        let mut k = 0.0;
        loop {
            k += 1.0;
            term *= q / (k * (k + nu_f));
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum * (-x).exp()
    } else {
        // e^{-x} I_ν(x) ~ (2πx)^{-1/2} Σ (-1)^k a_k(ν) / x^k
        let mu = 4.0 * (nu * nu) as f64;
        let mut term = 1.0_f64;
        let mut sum = 1.0;
        for k in 1..60 {
            let odd = (2 * k - 1) as f64;
            let next = -term * (mu - odd * odd) / (8.0 * k as f64 * x);
            if next.abs() >= term.abs() {
                break;
            }
            term = next;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum / (2.0 * std::f64::consts::PI * x).sqrt()
    }
}

/// Kummer's confluent hypergeometric function
/// `Φ(a, c, z) = Σ_k (a)_k / (c)_k z^k / k!`.
pub fn kummer_phi(a: f64, c: f64, z: f64, ctl: SeriesControl) -> Result<f64> {
    if c <= 0.0 && c == c.round() {
        return Err(Error::domain(format!(
            "kummer_phi undefined for non-positive integer c = {c}"
        )));
    }
    if !(a.is_finite() && c.is_finite() && z.is_finite()) {
        return Err(Error::domain("kummer_phi requires finite arguments"));
    }
    let a_terminates = a <= 0.0 && a == a.round();
    if z < 0.0 && !a_terminates {
        // Kummer's transformation avoids the alternating-sign cancellation.
        return Ok(z.exp() * kummer_series(c - a, c, -z, ctl)?);
    }
    kummer_series(a, c, z, ctl)
}

fn kummer_series(a: f64, c: f64, z: f64, ctl: SeriesControl) -> Result<f64> {
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for k in 0..ctl.max_terms {
        let kf = k as f64;
        term *= (a + kf) / (c + kf) * z / (kf + 1.0);
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        let next_ratio = ((a + kf + 1.0) / (c + kf + 1.0) * z / (kf + 2.0)).abs();
        if term.abs() <= ctl.term_tol * sum.abs() && next_ratio < 1.0 {
            return Ok(sum);
        }
        if !sum.is_finite() {
            return Err(Error::NonFinite {
                location: format!("kummer_phi({a}, {c}, {z})"),
                value: sum,
            });
        }
    }
    Err(Error::NonConvergence {
        terms: ctl.max_terms,
        last_term: term,
    })
}

/// How a value of `Ψ` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiRoute {
    /// Gamma-weighted combination of two Kummer series.
    KummerCombination,
    /// Laplace-type integral, used when the combination cancels.
    LaplaceIntegral,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiEvaluation {
    pub value: f64,
    pub route: PsiRoute,
    /// Decimal digits lost to cancellation in the Kummer combination.
    pub digits_lost: f64,
}

// Beyond this many cancelled digits the combination is rejected.
const PSI_MAX_DIGITS_LOST: f64 = 10.0;
// With a > 0 the integral is preferred well before the hard limit.
const PSI_SWITCH_DIGITS: f64 = 6.0;
const PSI_INTEGER_GUARD: f64 = 1e-6;
const PSI_INTEGER_SHIFT: f64 = 1e-5;

/// Tricomi's confluent hypergeometric function of the second kind `Ψ(a, c, z)`.
pub fn tricomi_psi(a: f64, c: f64, z: f64, ctl: SeriesControl) -> Result<f64> {
    tricomi_psi_eval(a, c, z, ctl).map(|e| e.value)
}

/// Like [`tricomi_psi`], also reporting the evaluation route and conditioning.
pub fn tricomi_psi_eval(a: f64, c: f64, z: f64, ctl: SeriesControl) -> Result<PsiEvaluation> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::domain(format!(
            "tricomi_psi requires z > 0, got {z}"
        )));
    }
    if (c - c.round()).abs() < PSI_INTEGER_GUARD {
        // Γ(1 - c) has poles at the integers: average the two neighbours.
        // Gamma weights evaluated this close to a pole carry ~5 fewer digits.
        let pole_digits = -PSI_INTEGER_SHIFT.log10();
        let lo = psi_generic(a, c.round() - PSI_INTEGER_SHIFT, z, ctl, pole_digits)?;
        let hi = psi_generic(a, c.round() + PSI_INTEGER_SHIFT, z, ctl, pole_digits)?;
        let route =
            if lo.route == PsiRoute::LaplaceIntegral || hi.route == PsiRoute::LaplaceIntegral {
                PsiRoute::LaplaceIntegral
            } else {
                PsiRoute::KummerCombination
            };
        return Ok(PsiEvaluation {
            value: 0.5 * (lo.value + hi.value),
            route,
            digits_lost: lo.digits_lost.max(hi.digits_lost),
        });
    }
    psi_generic(a, c, z, ctl, 0.0)
}

fn psi_generic(
    a: f64,
    c: f64,
    z: f64,
    ctl: SeriesControl,
    pole_digits: f64,
) -> Result<PsiEvaluation> {
    let combination = psi_kummer_terms(a, c, z, ctl);
    let (t1, t2) = match combination {
        Ok(terms) => terms,
        Err(_) if a > 0.0 => (f64::INFINITY, f64::INFINITY),
        Err(e) => return Err(e),
    };
    let sum = t1 + t2;
    let scale = t1.abs().max(t2.abs());
    let digits_lost = if sum == 0.0 || !sum.is_finite() {
        f64::INFINITY
    } else if scale == 0.0 {
        0.0
    } else {
        (scale / sum.abs()).log10().max(0.0) + pole_digits
    };
    let limit = if a > 0.0 {
        PSI_SWITCH_DIGITS
    } else {
        PSI_MAX_DIGITS_LOST
    };
    if digits_lost <= limit {
        return Ok(PsiEvaluation {
            value: sum,
            route: PsiRoute::KummerCombination,
            digits_lost,
        });
    }
    if a > 0.0 {
        let value = psi_laplace_integral(a, c, z)?;
        return Ok(PsiEvaluation {
            value,
            route: PsiRoute::LaplaceIntegral,
            digits_lost,
        });
    }
    Err(Error::IllConditioned {
        what: "tricomi_psi",
        digits: digits_lost,
    })
}

fn psi_kummer_terms(a: f64, c: f64, z: f64, ctl: SeriesControl) -> Result<(f64, f64)> {
    let w1 = gamma(1.0 - c) * recip_gamma(1.0 + a - c);
    let t1 = if w1 == 0.0 {
        0.0
    } else {
        w1 * kummer_phi(a, c, z, ctl)?
    };
    let w2 = gamma(c - 1.0) * recip_gamma(a);
    let t2 = if w2 == 0.0 {
        0.0
    } else {
        w2 * z.powf(1.0 - c) * kummer_phi(1.0 + a - c, 2.0 - c, z, ctl)?
    };
    Ok((t1, t2))
}

/// `Ψ(a,c,z) = z^{-a}/Γ(a) ∫_0^∞ e^{-u} u^{a-1} (1 + u/z)^{c-a-1} du`, `a > 0`.
fn psi_laplace_integral(a: f64, c: f64, z: f64) -> Result<f64> {
    let cfg = QuadConfig {
        abs_tol: 1e-15,
        rel_tol: 1e-12,
        max_subdivisions: 2000,
        tail_bound_factor: 10.0,
    };
    let power = c - a - 1.0;
    let integral = if a < 1.0 {
        // u = w^{1/a} removes the u^{a-1} endpoint singularity.
        let inv = 1.0 / a;
        integrate_to_infinity(
            |w: f64| {
                let u = w.powf(inv);
                (-u).exp() * (u / z).ln_1p().mul_add(power, 0.0).exp() * inv
            },
            0.0,
            1.0,
            &cfg,
        )?
    } else {
        integrate_to_infinity(
            |u: f64| ((a - 1.0) * u.ln() - u + power * (u / z).ln_1p()).exp(),
            0.0,
            a,
            &cfg,
        )?
    };
    Ok(integral.value * (-a * z.ln()).exp() * recip_gamma(a))
}

/// `φ_x(y) = argcosh(x e^{-y} + cosh y)`, evaluated without overflow or
/// cancellation for any `x ≥ 0` and real `y`.
pub fn phi_x_map(x: f64, y: f64) -> Result<f64> {
    if !(x >= 0.0) || !y.is_finite() {
        return Err(Error::domain(format!(
            "phi_x_map requires x >= 0 and finite y, got ({x}, {y})"
        )));
    }
    Ok(phi_x_unchecked(x, y))
}

#[inline]
pub(crate) fn phi_x_unchecked(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        return y.abs();
    }
    let ln2 = std::f64::consts::LN_2;
    let ln_u = log_sum_exp3(x.ln() - y, y - ln2, -y - ln2);
    if ln_u < 0.5 {
        // u - 1 = x e^{-y} + 2 sinh²(y/2), free of cancellation.
        let sh = (0.5 * y).sinh();
        let w = x * (-y).exp() + 2.0 * sh * sh;
        (w + (w * (w + 2.0)).sqrt()).ln_1p()
    } else {
        ln_u + (1.0 + (-(-2.0 * ln_u).exp_m1()).sqrt()).ln()
    }
}

#[inline]
fn log_sum_exp3(a: f64, b: f64, c: f64) -> f64 {
    let m = a.max(b).max(c);
    m + ((a - m).exp() + (b - m).exp() + (c - m).exp()).ln()
}
