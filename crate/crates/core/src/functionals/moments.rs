//! Moments of `Γ_t = Y_t / (1 + β∫_0^t Y_s ds)` through the functions
//! `p_k(t) = ∫_0^t E Γ_s^k ds`, which satisfy
//!
//! `p_k' = 1 + (k(k−1)/2) p_k − βk p_{k+1}`,  `p_k(0) = 0`.
//!
//! `p_0 = t`, so the recursion runs downward (`k ≤ −1`) as a chain of linear
//! ODEs solved exactly in exponential polynomials. Upward (`k ≥ 2`) it
//! needs derivatives of `p_1`, which are obtained analytically from
//! `p_1(t) = (1/β) E ln(1 + 4βA_{t/4}^{(−1)})` by differentiating the kernel
//! under the integral sign.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{kernel_g_tderivs, KernelContext, MAX_DERIVATIVE};
use super::laplace::conditional_a_given_perpetuity;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_finite, integrate_vec_to_infinity, QuadConfig};
use crate::stochastic::{
    cosh_hyperbolic_multi, gamma_euler_multi, gbm_multi_drift, mc_estimate, Estimate,
    FunctionalParams, GbmState, MCConfig, Scheme, UniformGrid,
};

/// `p_1^{(j)}(t)` for `j = 0..=order`.
pub fn p1_derivatives(beta: f64, t: f64, order: usize, quad: &QuadConfig) -> Result<Vec<f64>> {
    if !(beta > 0.0) || !(t > 0.0) {
        return Err(Error::domain(format!(
            "need beta > 0 and t > 0, got ({beta}, {t})"
        )));
    }
    if order > MAX_DERIVATIVE {
        return Err(Error::Config(format!(
            "derivative order {order} exceeds {MAX_DERIVATIVE}"
        )));
    }
    let tau = 0.25 * t;
    let ctx = KernelContext::new(-1.0, tau, *quad)?;
    let inner = ctx.inner();
    let chain: Vec<f64> = (0..=order).map(|j| 0.25f64.powi(j as i32) / beta).collect();
    let mut failure = None;
    let mut buf = vec![0.0; order + 1];
    let r = integrate_vec_to_infinity(
        |y, out: &mut [f64]| {
            let w = if y == 0.0 {
                4.0 * beta
            } else {
                -(-4.0 * beta * y).exp_m1() / y
            };
            if let Err(e) = kernel_g_tderivs(y, -1.0, tau, &inner, &mut buf) {
                failure.get_or_insert(e);
                out.iter_mut().for_each(|o| *o = 0.0);
                return;
            }
            for ((o, g), c) in out.iter_mut().zip(&buf).zip(&chain) {
                *o = w * g * c;
            }
        },
        order + 1,
        0.0,
        tau,
        quad,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(r.values),
    }
}

/// Linear combination `c + Σ_j d_j p_1^{(j)}`.
#[derive(Debug, Clone, PartialEq)]
struct Jet {
    constant: f64,
    coeffs: Vec<f64>,
}

impl Jet {
    fn p1(order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = 1.0;
        Self {
            constant: 0.0,
            coeffs,
        }
    }

    fn derivative(&self) -> Self {
        let mut coeffs = vec![0.0; self.coeffs.len()];
        for j in 0..self.coeffs.len() - 1 {
            coeffs[j + 1] = self.coeffs[j];
        }
        debug_assert_eq!(*self.coeffs.last().unwrap(), 0.0, "jet order exhausted");
        Self {
            constant: 0.0,
            coeffs,
        }
    }

    fn eval(&self, d: &[f64]) -> f64 {
        self.constant + self.coeffs.iter().zip(d).map(|(c, v)| c * v).sum::<f64>()
    }

    /// `p_{k+1} = (1 + a_k p_k − p_k') / (βk)`.
    fn next(&self, k: i32, beta: f64) -> Self {
        let a = (k * (k - 1)) as f64 / 2.0;
        let d = self.derivative();
        let s = 1.0 / (beta * k as f64);
        Self {
            constant: (1.0 + a * self.constant) * s,
            coeffs: self
                .coeffs
                .iter()
                .zip(&d.coeffs)
                .map(|(p, dp)| (a * p - dp) * s)
                .collect(),
        }
    }
}

/// `Σ c · t^m · e^{r t}`.
#[derive(Debug, Clone, PartialEq, Default)]
struct ExpPoly {
    terms: Vec<(f64, u32, f64)>,
}

impl ExpPoly {
    fn add(&mut self, c: f64, m: u32, r: f64) {
        if let Some(t) = self.terms.iter_mut().find(|t| t.1 == m && t.2 == r) {
            t.0 += c;
        } else {
            self.terms.push((c, m, r));
        }
    }

    fn eval(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(c, m, r)| c * t.powi(m as i32) * (r * t).exp())
            .sum()
    }

    /// `t ↦ ∫_0^t e^{a(t−s)} (1 + w·self(s)) ds`.
    fn solve_linear(&self, a: f64, w: f64) -> Self {
        let mut src = ExpPoly::default();
        src.add(1.0, 0, 0.0);
        for &(c, m, r) in &self.terms {
            src.add(w * c, m, r);
        }
        let mut out = ExpPoly::default();
        for &(c, m, r) in &src.terms {
            let b = r - a;
            if b == 0.0 {
                out.add(c / (m + 1) as f64, m + 1, a);
                continue;
            }
            // ∫_0^t s^m e^{bs} ds = e^{bt} Σ_j (−1)^j m!/(m−j)! t^{m−j} / b^{j+1} − (−1)^m m!/b^{m+1}
            let mut falling = 1.0;
            for j in 0..=m {
                if j > 0 {
                    falling *= (m - j + 1) as f64;
                }
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                out.add(c * sign * falling / b.powi(j as i32 + 1), m - j, r);
            }
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            out.add(-c * sign * falling / b.powi(m as i32 + 1), 0, a);
        }
        out
    }
}

/// Closed form `p_{−1}(t) = (1+β)e^t − βt − (1+β)`.
pub fn p_minus_one(beta: f64, t: f64) -> f64 {
    (1.0 + beta) * t.exp_m1() - beta * t
}

fn downward_chain(beta: f64, k_min: i32) -> Vec<ExpPoly> {
    // index 0 ↔ k = 0, index j ↔ k = −j
    let mut chain = Vec::new();
    let mut p0 = ExpPoly::default();
    p0.add(1.0, 1, 0.0);
    chain.push(p0);
    for k in (k_min..=-1).rev() {
        let a = (k * (k - 1)) as f64 / 2.0;
        let next = chain.last().unwrap().solve_linear(a, -beta * k as f64);
        chain.push(next);
    }
    chain
}

/// Values of `p_k(t)` and `E Γ_t^k` for `k_min ≤ k ≤ k_max` on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub k_min: i32,
    pub k_max: i32,
    pub beta: f64,
    pub grid: Vec<f64>,
    /// `p_values[k − k_min][i] = p_k(grid[i])`.
    pub p_values: Vec<Vec<f64>>,
    /// `moment_values[k − k_min][i] = E Γ^k` at `grid[i]`.
    pub moment_values: Vec<Vec<f64>>,
    /// Sup-norm of the finite-difference recursion residual.
    pub residual: f64,
}

/// Sup-norm tolerance of the recursion residual check.
pub const MOMENT_RESIDUAL_TOL: f64 = 1e-3;
/// Fewest grid intervals accepted by [`gamma_moment_table`].
pub const MIN_MOMENT_INTERVALS: usize = 128;

impl MomentTable {
    fn row(&self, k: i32) -> Option<usize> {
        (k >= self.k_min && k <= self.k_max).then(|| (k - self.k_min) as usize)
    }

    fn node(&self, t: f64) -> Option<usize> {
        let h = self.grid[1] - self.grid[0];
        let i = (t / h).round();
        ((t / h - i).abs() < 1e-9 && i >= 0.0 && (i as usize) < self.grid.len())
            .then_some(i as usize)
    }

    /// `p_k(t)` at a grid node.
    pub fn p(&self, k: i32, t: f64) -> Option<f64> {
        Some(self.p_values[self.row(k)?][self.node(t)?])
    }

    /// `E Γ_t^k` at a grid node.
    pub fn moment(&self, k: i32, t: f64) -> Option<f64> {
        Some(self.moment_values[self.row(k)?][self.node(t)?])
    }
}

/// `E Γ_t^k` for `k = k_min..=k_max` at a single time.
fn moments_at(
    beta: f64,
    t: f64,
    k_min: i32,
    k_max: i32,
    quad: &QuadConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = (k_max - k_min + 1) as usize;
    let mut p = vec![0.0; n];
    let mut m = vec![1.0; n];
    if t == 0.0 {
        return Ok((p, m));
    }
    let chain = downward_chain(beta, k_min.min(-1));
    for k in k_min..=k_max.min(0) {
        p[(k - k_min) as usize] = chain[(-k) as usize].eval(t);
    }
    if k_max >= 1 {
        let order = k_max as usize;
        let d = p1_derivatives(beta, t, order, quad)?;
        let mut jet = Jet::p1(order);
        for k in 1..=k_max {
            if k >= k_min {
                p[(k - k_min) as usize] = jet.eval(&d);
                m[(k - k_min) as usize] = jet.derivative().eval(&d);
            }
            if k < k_max {
                jet = jet.next(k, beta);
            }
        }
    }
    for k in k_min..=k_max.min(0) {
        let i = (k - k_min) as usize;
        let a = (k * (k - 1)) as f64 / 2.0;
        let next = if k == 0 {
            t
        } else if k < k_max {
            p[i + 1]
        } else {
            chain[(-k - 1) as usize].eval(t)
        };
        m[i] = 1.0 + a * p[i] - beta * k as f64 * next;
    }
    Ok((p, m))
}

/// `E Γ_t^k` for `k = k_min..=k_max`.
pub fn gamma_moments_at(
    beta: f64,
    t: f64,
    k_min: i32,
    k_max: i32,
    quad: &QuadConfig,
) -> Result<Vec<f64>> {
    if k_min > k_max || k_max as usize > MAX_DERIVATIVE {
        return Err(Error::Config(format!(
            "invalid moment range {k_min}..={k_max}"
        )));
    }
    if !(beta > 0.0) || !(t >= 0.0) {
        return Err(Error::domain(format!(
            "need beta > 0 and t >= 0, got ({beta}, {t})"
        )));
    }
    Ok(moments_at(beta, t, k_min, k_max, quad)?.1)
}

/// Fourth-order finite-difference derivative on a uniform grid.
fn fd_derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| {
            let d = if i >= 2 && i + 2 < n {
                -f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]
            } else if i == 0 {
                -25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]
            } else if i == 1 {
                -3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]
            } else if i == n - 2 {
                3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]
            } else {
                25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4]
                    + 3.0 * f[n - 5]
            };
            d / (12.0 * h)
        })
        .collect()
}

/// Tabulates `p_k` and `E Γ^k` on `n_intervals + 1` uniform nodes of
/// `[0, horizon]` and checks the recursion residual.
pub fn gamma_moment_table(
    beta: f64,
    horizon: f64,
    k_min: i32,
    k_max: i32,
    n_intervals: usize,
    quad: &QuadConfig,
) -> Result<MomentTable> {
    if k_min > -1 || k_max < 2 {
        return Err(Error::Config(format!(
            "need k_min <= -1 and k_max >= 2, got {k_min}..={k_max}"
        )));
    }
    if k_max as usize > MAX_DERIVATIVE {
        return Err(Error::Config(format!("k_max must be <= {MAX_DERIVATIVE}")));
    }
    if n_intervals < MIN_MOMENT_INTERVALS {
        return Err(Error::Config(format!(
            "moment grid needs at least {MIN_MOMENT_INTERVALS} intervals, got {n_intervals}"
        )));
    }
    if !(beta > 0.0) || !(horizon > 0.0) {
        return Err(Error::domain(format!(
            "need beta > 0 and horizon > 0, got ({beta}, {horizon})"
        )));
    }
    let grid = UniformGrid::new(horizon, n_intervals)?.times();
    let rows: Vec<(Vec<f64>, Vec<f64>)> = grid
        .par_iter()
        .map(|&t| moments_at(beta, t, k_min, k_max, quad))
        .collect::<Result<_>>()?;
    let nk = (k_max - k_min + 1) as usize;
    let mut p_values = vec![vec![0.0; grid.len()]; nk];
    let mut moment_values = vec![vec![0.0; grid.len()]; nk];
    for (i, (p, m)) in rows.iter().enumerate() {
        for r in 0..nk {
            p_values[r][i] = p[r];
            moment_values[r][i] = m[r];
        }
    }
    let h = horizon / n_intervals as f64;
    let mut residual: f64 = 0.0;
    for k in k_min..k_max {
        let r = (k - k_min) as usize;
        let a = (k * (k - 1)) as f64 / 2.0;
        let fd = fd_derivative(&p_values[r], h);
        for i in 0..grid.len() {
            let rhs = 1.0 + a * p_values[r][i] - beta * k as f64 * p_values[r + 1][i];
            residual = residual.max((fd[i] - rhs).abs());
        }
    }
    if residual > MOMENT_RESIDUAL_TOL {
        return Err(Error::GridTooCoarse {
            residual,
            tolerance: MOMENT_RESIDUAL_TOL,
        });
    }
    Ok(MomentTable {
        k_min,
        k_max,
        beta,
        grid,
        p_values,
        moment_values,
        residual,
    })
}

/// Both sides of `p_1(t) = t − 4β ∫_0^t X(s) ds`, where `X(s)` is the
/// perpetuity conditional at drift 1, scale `2β` and horizon `s/4`.
pub fn gmm_identity(beta: f64, t: f64, quad: &QuadConfig) -> Result<(f64, f64)> {
    let lhs = p1_derivatives(beta, t, 0, quad)?[0];
    let mut failure = None;
    let outer = quad.tightened(10.0).tightened(1.0);
    let integral = integrate_finite(
        |s| {
            if s == 0.0 {
                return 0.0;
            }
            let p = FunctionalParams {
                mu: 1.0,
                beta: 2.0 * beta,
                horizon: 0.25 * s,
            };
            match conditional_a_given_perpetuity(&p, quad) {
                Ok(c) => c.conditional,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        t,
        &QuadConfig {
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            ..outer
        },
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((lhs, t - 4.0 * beta * integral.value))
}

/// Method for `E e^{−arg·Γ_t}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaLaplaceMethod {
    /// Hyperbolic Bessel representation `e^β E e^{−βS_t}`, `S_0 = arg/β + 1`.
    Hb,
    /// Path simulation of `Γ_t`.
    Mc,
    /// Moment series `Σ (−arg)^i E Γ_t^i / i!`.
    Series,
}

impl std::str::FromStr for GammaLaplaceMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hb" => Ok(Self::Hb),
            "mc" => Ok(Self::Mc),
            "series" => Ok(Self::Series),
            other => Err(Error::Config(format!("unknown method {other:?}"))),
        }
    }
}

/// Number of series terms used by [`GammaLaplaceMethod::Series`].
pub const SERIES_TERMS: usize = 20;
/// Largest accepted tail estimate before the series falls back to MC.
pub const SERIES_TAIL_TOL: f64 = 1e-6;

/// Outcome of the moment series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesOutcome {
    pub value: f64,
    pub tail_estimate: f64,
    /// Moments that passed the positivity and log-convexity screen.
    pub terms_used: usize,
}

/// Partial sum of `Σ_{i≤N} (−arg)^i E Γ_t^i / i!` with a geometric tail
/// estimate from the last three terms. Moments failing the positivity and
/// log-convexity screen end the sum early.
pub fn laplace_gamma_series(
    arg: f64,
    beta: f64,
    t: f64,
    quad: &QuadConfig,
) -> Result<SeriesOutcome> {
    let m = gamma_moments_at(beta, t, 0, SERIES_TERMS as i32, quad)?;
    let mut usable = 1;
    for k in 1..m.len() {
        let ok = m[k].is_finite()
            && m[k] > 0.0
            && (k < 2 || m[k - 1] * m[k - 1] <= m[k] * m[k - 2] * (1.0 + 1e-9));
        if !ok {
            break;
        }
        usable = k + 1;
    }
    let mut term = 1.0;
    let mut terms = vec![1.0];
    for (i, mi) in m.iter().enumerate().take(usable).skip(1) {
        term *= -arg / i as f64;
        terms.push(term * mi);
    }
    let value: f64 = terms.iter().sum();
    let n = terms.len();
    let tail = if n < 3 {
        f64::INFINITY
    } else {
        let r1 = (terms[n - 1] / terms[n - 2]).abs();
        let r2 = (terms[n - 2] / terms[n - 3]).abs();
        let r = r1.max(r2);
        if r < 1.0 {
            terms[n - 1].abs() * r / (1.0 - r)
        } else {
            f64::INFINITY
        }
    };
    Ok(SeriesOutcome {
        value,
        tail_estimate: tail,
        terms_used: usable,
    })
}

/// `E e^{−arg·Γ_t}` for `Γ` with scale `p.beta` at horizon `p.horizon`.
pub fn laplace_gamma(
    arg: f64,
    p: &FunctionalParams,
    method: GammaLaplaceMethod,
    quad: &QuadConfig,
    mc: &MCConfig,
) -> Result<Estimate> {
    p.validate()?;
    if !arg.is_finite() {
        return Err(Error::domain(format!("argument must be finite, got {arg}")));
    }
    let (beta, t) = (p.beta, p.horizon);
    if method == GammaLaplaceMethod::Hb && arg < 0.0 {
        return Err(Error::domain(format!(
            "the hyperbolic Bessel representation needs arg >= 0, got {arg}"
        )));
    }
    if arg == 0.0 || t == 0.0 {
        return Ok(Estimate::deterministic((-arg).exp(), 0.0, "exact"));
    }
    match method {
        GammaLaplaceMethod::Hb => {
            let grid = UniformGrid::new(t, mc.n_steps)?;
            let s0 = arg / beta + 1.0;
            Ok(mc_estimate(
                |s| {
                    let mut st = [s0];
                    cosh_hyperbolic_multi(s, &grid, &mut st, |_, _| {});
                    (-beta * st[0]).exp()
                },
                mc,
            )?
            .scaled(beta.exp())
            .with_method("hb"))
        }
        GammaLaplaceMethod::Mc => {
            Ok(gamma_path_mc(beta, t, mc, |g| (-arg * g).exp())?.with_method("mc"))
        }
        GammaLaplaceMethod::Series => {
            let s = laplace_gamma_series(arg, beta, t, quad)?;
            if s.tail_estimate <= SERIES_TAIL_TOL {
                Ok(Estimate::deterministic(s.value, s.tail_estimate, "series"))
            } else {
                Ok(gamma_path_mc(beta, t, mc, |g| (-arg * g).exp())?
                    .with_method("series-fallback-mc"))
            }
        }
    }
}

/// Path Monte Carlo of `E f(Γ_t)`; `mc.scheme` selects the exact functional
/// or the Euler scheme.
pub fn gamma_path_mc<F>(beta: f64, t: f64, mc: &MCConfig, f: F) -> Result<Estimate>
where
    F: Fn(f64) -> f64 + Sync,
{
    if t == 0.0 {
        return mc_estimate(|_| f(1.0), mc);
    }
    let grid = UniformGrid::new(t, mc.n_steps)?;
    if mc.scheme == Scheme::Euler {
        mc_estimate(
            |s| {
                let (mut g, mut flag) = ([1.0], [false]);
                gamma_euler_multi(s, &[beta], &grid, &mut g, &mut flag, |_, _| {});
                f(g[0])
            },
            mc,
        )
    } else {
        mc_estimate(
            |s| {
                let mut st = [GbmState::default()];
                gbm_multi_drift(s, &[-0.5], &grid, &mut st, |_, _| {});
                f(st[0].y / (1.0 + beta * st[0].int_y))
            },
            mc,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> QuadConfig {
        QuadConfig::default()
    }

    #[test]
    fn downward_chain_reproduces_closed_form() {
        let beta = 0.5;
        let chain = downward_chain(beta, -3);
        for t in [0.0, 0.01, 0.5, 1.0, 2.0] {
            assert!((chain[1].eval(t) - p_minus_one(beta, t)).abs() < 1e-12);
            assert!(chain[2].eval(0.0).abs() < 1e-12 && chain[3].eval(0.0).abs() < 1e-12);
        }
        assert_eq!(p_minus_one(beta, 0.0), 0.0);
    }

    #[test]
    fn downward_chain_solves_recursion() {
        let beta = 0.7;
        let chain = downward_chain(beta, -4);
        for j in 1..=4usize {
            let k = -(j as i32);
            let a = (k * (k - 1)) as f64 / 2.0;
            for t in [0.1, 0.6, 1.3] {
                let h = 1e-5;
                let d = (chain[j].eval(t + h) - chain[j].eval(t - h)) / (2.0 * h);
                let rhs = 1.0 + a * chain[j].eval(t) - beta * k as f64 * chain[j - 1].eval(t);
                assert!((d - rhs).abs() < 1e-5 * rhs.abs().max(1.0), "k={k} t={t}");
            }
        }
    }

    #[test]
    fn inverse_moment_closed_form() {
        // E Γ_t^{-1} = (1+β)e^t − β
        let (beta, t) = (0.5, 1.0);
        let m = gamma_moments_at(beta, t, -1, 1, &quad()).unwrap();
        assert!((m[0] - ((1.0 + beta) * t.exp() - beta)).abs() < 1e-12);
        assert_eq!(m[1], 1.0);
    }

    #[test]
    fn jets_follow_recursion() {
        let j = Jet::p1(3);
        let j2 = j.next(1, 0.5);
        // p_2 = (1 − p_1')/β
        assert_eq!(j2.constant, 2.0);
        assert_eq!(j2.coeffs, vec![0.0, -2.0, 0.0, 0.0]);
    }

    #[test]
    fn first_moment_small_time() {
        // E Γ_t = 1 − βt + O(t²)
        let (beta, t) = (0.5, 0.01);
        let m = gamma_moments_at(beta, t, 1, 2, &quad()).unwrap();
        assert!((m[0] - (1.0 - beta * t)).abs() < 2e-4, "{}", m[0]);
        // E Γ_t² = 1 + (1 − 2β)t + O(t²)
        assert!(
            (m[1] - (1.0 + (1.0 - 2.0 * beta) * t)).abs() < 2e-4,
            "{}",
            m[1]
        );
    }

    #[test]
    fn series_agrees_with_small_argument_expansion() {
        let (beta, t) = (0.5, 0.25);
        let s = laplace_gamma_series(0.05, beta, t, &quad()).unwrap();
        let m = gamma_moments_at(beta, t, 1, 2, &quad()).unwrap();
        let approx = 1.0 - 0.05 * m[0] + 0.00125 * m[1];
        assert!((s.value - approx).abs() < 1e-4);
        assert!(s.terms_used >= 3);
    }

    #[test]
    fn laplace_gamma_trivial() {
        let p = FunctionalParams::new(0.0, 0.5, 0.0).unwrap();
        let mc = MCConfig::default().with_paths(100);
        let e = laplace_gamma(1.5, &p, GammaLaplaceMethod::Mc, &quad(), &mc).unwrap();
        assert_eq!(e.value, (-1.5f64).exp());
        let p = FunctionalParams::new(0.0, 0.5, 1.0).unwrap();
        assert_eq!(
            laplace_gamma(0.0, &p, GammaLaplaceMethod::Hb, &quad(), &mc)
                .unwrap()
                .value,
            1.0
        );
        assert!(
            laplace_gamma(-1.0, &p, GammaLaplaceMethod::Hb, &quad(), &mc)
                .unwrap_err()
                .is_domain()
        );
    }

    #[test]
    fn table_rejects_bad_layouts() {
        assert!(gamma_moment_table(0.5, 1.0, 0, 3, 128, &quad()).is_err());
        assert!(gamma_moment_table(0.5, 1.0, -2, 1, 128, &quad()).is_err());
        assert!(gamma_moment_table(0.5, 1.0, -2, 3, 64, &quad()).is_err());
    }

    #[test]
    fn fd_is_fourth_order() {
        let h = 0.01;
        let f: Vec<f64> = (0..50).map(|i| (i as f64 * h).sin()).collect();
        let d = fd_derivative(&f, h);
        for (i, v) in d.iter().enumerate() {
            assert!((v - (i as f64 * h).cos()).abs() < 1e-8);
        }
    }
}
