//! One-dimensional deterministic integration.
//!
//! Everything is built on a globally adaptive 21-point Gauss–Kronrod rule
//! with QUADPACK-style error estimates. A vector-valued variant integrates
//! several integrands sharing one set of nodes, which is how the kernel
//! derivatives are obtained in a single pass.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Tolerances and budgets for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Safety multiplier applied when truncating a semi-infinite range.
    pub tail_bound_factor: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 1000,
            tail_bound_factor: 10.0,
        }
    }
}

impl QuadConfig {
    pub fn new(
        abs_tol: f64,
        rel_tol: f64,
        max_subdivisions: usize,
        tail_bound_factor: f64,
    ) -> Result<Self> {
        let cfg = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
            tail_bound_factor,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("abs_tol", self.abs_tol), ("rel_tol", self.rel_tol)] {
            if !(v > 0.0 && v <= 1e-2) {
                return Err(Error::Config(format!(
                    "{name} must lie in (0, 1e-2], got {v}"
                )));
            }
        }
        if self.max_subdivisions < 8 {
            return Err(Error::Config(format!(
                "max_subdivisions must be >= 8, got {}",
                self.max_subdivisions
            )));
        }
        if !(self.tail_bound_factor > 0.0) {
            return Err(Error::Config("tail_bound_factor must be positive".into()));
        }
        Ok(())
    }

    /// Tolerances scaled by `factor` (floored at 1e-15), for inner integrals.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            abs_tol: (self.abs_tol * factor).max(1e-15),
            rel_tol: (self.rel_tol * factor).max(1e-14),
            max_subdivisions: self.max_subdivisions.max(200),
            tail_bound_factor: self.tail_bound_factor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub err_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VecQuadResult {
    pub values: Vec<f64>,
    pub err_estimates: Vec<f64>,
    pub evaluations: usize,
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_478_516,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const ROUNDOFF_FLOOR: f64 = 200.0 * f64::EPSILON;

struct Segment {
    a: f64,
    b: f64,
    vals: Vec<f64>,
    errs: Vec<f64>,
    abs: Vec<f64>,
}

/// Applies the 21-point rule to a vector integrand on `[a, b]`.
fn gk21<F>(f: &mut F, dim: usize, a: f64, b: f64, scratch: &mut [Vec<f64>; 21]) -> Result<Segment>
where
    F: FnMut(f64, &mut [f64]),
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    for (j, buf) in scratch.iter_mut().enumerate() {
        buf.clear();
        buf.resize(dim, 0.0);
        let x = match j {
            10 => centre,
            j if j < 10 => centre - half * XGK[j],
            j => centre + half * XGK[20 - j],
        };
        f(x, buf);
        if let Some(bad) = buf.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                location: format!("integrand at x = {x}"),
                value: *bad,
            });
        }
    }
    let mut vals = vec![0.0; dim];
    let mut errs = vec![0.0; dim];
    let mut abs = vec![0.0; dim];
    let eps = f64::EPSILON;
    for d in 0..dim {
        let fc = scratch[10][d];
        let mut resk = WGK[10] * fc;
        let mut resg = 0.0;
        let mut resabs = resk.abs();
        for j in 0..10 {
            let (lo, hi) = (scratch[j][d], scratch[20 - j][d]);
            resk += WGK[j] * (lo + hi);
            resabs += WGK[j] * (lo.abs() + hi.abs());
            if j % 2 == 1 {
                resg += WG[j / 2] * (lo + hi);
            }
        }
        let mean = 0.5 * resk;
        let mut resasc = WGK[10] * (fc - mean).abs();
        for j in 0..10 {
            resasc += WGK[j] * ((scratch[j][d] - mean).abs() + (scratch[20 - j][d] - mean).abs());
        }
        let result = resk * half;
        let resabs = resabs * half.abs();
        let resasc = resasc * half.abs();
        let mut err = ((resk - resg) * half).abs();
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        if resabs > f64::MIN_POSITIVE / (50.0 * eps) {
            err = err.max(50.0 * eps * resabs);
        }
        vals[d] = result;
        errs[d] = err;
        abs[d] = resabs;
    }
    Ok(Segment {
        a,
        b,
        vals,
        errs,
        abs,
    })
}

/// Core driver. Returns the result and whether the tolerance was met.
fn adaptive_vec<F>(
    mut f: F,
    dim: usize,
    points: &[f64],
    cfg: &QuadConfig,
) -> Result<(VecQuadResult, bool)>
where
    F: FnMut(f64, &mut [f64]),
{
    let mut scratch: [Vec<f64>; 21] = Default::default();
    let mut segments = Vec::with_capacity(points.len() + 16);
    for w in points.windows(2) {
        if w[1] > w[0] {
            segments.push(gk21(&mut f, dim, w[0], w[1], &mut scratch)?);
        }
    }
    let mut evaluations = 21 * segments.len();
    let total = |segs: &[Segment]| {
        let mut v = vec![0.0; dim];
        let mut e = vec![0.0; dim];
        for s in segs {
            for d in 0..dim {
                v[d] += s.vals[d];
                e[d] += s.errs[d];
            }
        }
        (v, e)
    };
    let abs_total = |segs: &[Segment]| {
        let mut a = vec![0.0; dim];
        for s in segs {
            for d in 0..dim {
                a[d] += s.abs[d];
            }
        }
        a
    };
    let mut subdivisions = segments.len();
    loop {
        let (values, errs) = total(&segments);
        // Cancellation in ∫|f| ≫ |∫f| caps the attainable accuracy.
        let roundoff = abs_total(&segments);
        let tols: Vec<f64> = values
            .iter()
            .zip(&roundoff)
            .map(|(v, r)| {
                cfg.abs_tol
                    .max(cfg.rel_tol * v.abs())
                    .max(ROUNDOFF_FLOOR * r)
            })
            .collect();
        let converged = errs.iter().zip(&tols).all(|(e, t)| e <= t);
        if converged || subdivisions >= cfg.max_subdivisions || segments.is_empty() {
            return Ok((
                VecQuadResult {
                    values,
                    err_estimates: errs,
                    evaluations,
                },
                converged || segments.is_empty(),
            ));
        }
        let score = |s: &Segment| -> f64 { s.errs.iter().zip(&tols).map(|(e, t)| e / t).sum() };
        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, s)| {
                let sc = score(s);
                if sc > acc.1 {
                    (i, sc)
                } else {
                    acc
                }
            });
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) {
            // Interval can no longer be split in floating point.
            segments.push(seg);
            let (values, err_estimates) = total(&segments);
            return Ok((
                VecQuadResult {
                    values,
                    err_estimates,
                    evaluations,
                },
                false,
            ));
        }
        segments.push(gk21(&mut f, dim, seg.a, mid, &mut scratch)?);
        segments.push(gk21(&mut f, dim, mid, seg.b, &mut scratch)?);
        evaluations += 42;
        subdivisions += 1;
    }
}

fn check_points(points: &[f64]) -> Result<()> {
    if points.len() < 2 {
        return Err(Error::domain("need at least two integration points"));
    }
    if points.iter().any(|p| !p.is_finite()) || points.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain(
            "integration points must be finite and nondecreasing",
        ));
    }
    Ok(())
}

fn scalar_result(r: VecQuadResult) -> QuadResult {
    QuadResult {
        value: r.values[0],
        err_estimate: r.err_estimates[0],
        evaluations: r.evaluations,
    }
}

fn strict(r: (VecQuadResult, bool), cfg: &QuadConfig) -> Result<VecQuadResult> {
    let (res, ok) = r;
    if ok {
        Ok(res)
    } else {
        let worst = res
            .err_estimates
            .iter()
            .cloned()
            .zip(res.values.iter().cloned())
            .max_by(|x, y| x.0.total_cmp(&y.0))
            .unwrap_or((0.0, 0.0));
        Err(Error::ToleranceNotMet {
            value: worst.1,
            err_estimate: worst.0,
            subdivisions: cfg.max_subdivisions,
        })
    }
}

/// Adaptive estimate of `∫_a^b f`.
pub fn integrate_finite<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    if !(a <= b) {
        return Err(Error::domain(format!(
            "integrate_finite requires a <= b, got [{a}, {b}]"
        )));
    }
    integrate_with_breaks(&mut f, &[a, b], cfg)
}

/// Adaptive estimate over `[points[0], points[last]]` with the interior
/// points used as initial breakpoints.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    check_points(points)?;
    let r = adaptive_vec(|x, out: &mut [f64]| out[0] = f(x), 1, points, cfg)?;
    strict(r, cfg).map(scalar_result)
}

/// Vector-valued version of [`integrate_with_breaks`]: `f(x, out)` fills
/// `dim` integrand values; every component must meet the tolerance.
pub fn integrate_vec_with_breaks<F: FnMut(f64, &mut [f64])>(
    f: F,
    dim: usize,
    points: &[f64],
    cfg: &QuadConfig,
) -> Result<VecQuadResult> {
    check_points(points)?;
    let r = adaptive_vec(f, dim, points, cfg)?;
    strict(r, cfg)
}

/// Like [`integrate_vec_with_breaks`] but returns the best estimate even when
/// the budget runs out. Used for inner integrals of nested quadratures,
/// whose residual error is absorbed by the outer tolerance.
pub(crate) fn integrate_vec_best_effort<F: FnMut(f64, &mut [f64])>(
    f: F,
    dim: usize,
    points: &[f64],
    cfg: &QuadConfig,
) -> Result<VecQuadResult> {
    check_points(points)?;
    adaptive_vec(f, dim, points, cfg).map(|r| r.0)
}

pub(crate) fn integrate_best_effort<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    integrate_vec_best_effort(|x, out: &mut [f64]| out[0] = f(x), 1, points, cfg).map(scalar_result)
}

/// `∫_a^∞ f` for integrands with `|f(y)| ≤ C e^{-decay_rate·y}`, `C ≲ 1`.
///
/// The range is cut at the point where the exponential tail bound drops
/// below `abs_tol / tail_bound_factor`; the remainder is integrated
/// adaptively with geometrically spaced breakpoints.
pub fn integrate_semi_infinite<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    decay_rate: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::domain(format!(
            "integrate_semi_infinite requires finite a >= 0, got {a}"
        )));
    }
    if !(decay_rate > 0.0) || !decay_rate.is_finite() {
        return Err(Error::domain(format!(
            "decay_rate must be positive, got {decay_rate}"
        )));
    }
    let cut = truncation_point(a, decay_rate, cfg);
    let mut points = vec![a];
    let mut step = 0.25 / decay_rate;
    while a + step < cut {
        points.push(a + step);
        step *= 2.0;
    }
    points.push(cut);
    integrate_with_breaks(f, &points, cfg)
}

/// `Y*` at which `e^{-decay·(Y*-a)}/decay < abs_tol / tail_bound_factor`.
pub fn truncation_point(a: f64, decay_rate: f64, cfg: &QuadConfig) -> f64 {
    let target = cfg.abs_tol / cfg.tail_bound_factor;
    a + ((1.0 / (decay_rate * target)).ln() / decay_rate).max(1.0 / decay_rate)
}

/// Breakpoints in `u` for the half-line map, geometric in `y`.
fn half_line_points() -> Vec<f64> {
    let mut pts = vec![0.0];
    let mut r = 1.0 / 256.0;
    while r <= 256.0 {
        pts.push(r / (1.0 + r));
        r *= 4.0;
    }
    pts.push(1.0);
    pts
}

/// `∫_a^∞ f` for integrands with no known exponential envelope, by the map
/// `y = a + scale·u/(1-u)`. `scale` should be the typical size of the
/// region carrying the mass.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    scale: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    integrate_vec_to_infinity(|y, out: &mut [f64]| out[0] = f(y), 1, a, scale, cfg)
        .map(scalar_result)
}

pub fn integrate_vec_to_infinity<F: FnMut(f64, &mut [f64])>(
    mut f: F,
    dim: usize,
    a: f64,
    scale: f64,
    cfg: &QuadConfig,
) -> Result<VecQuadResult> {
    if !a.is_finite() || !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::domain(format!(
            "invalid half-line map: a = {a}, scale = {scale}"
        )));
    }
    let points = half_line_points();
    integrate_vec_with_breaks(
        |u, out: &mut [f64]| {
            let one_minus = 1.0 - u;
            let y = a + scale * u / one_minus;
            let jac = scale / (one_minus * one_minus);
            if !y.is_finite() {
                out.iter_mut().for_each(|o| *o = 0.0);
                return;
            }
            f(y, out);
            for o in out.iter_mut() {
                // 0 · ∞ at the far end is a zero contribution.
                *o = if *o == 0.0 { 0.0 } else { *o * jac };
            }
        },
        dim,
        &points,
        cfg,
    )
}

struct HermiteRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Gauss–Hermite nodes for the weight `e^{-x²}` (Golub–Welsch-free Newton
/// iteration on the orthonormal recurrence).
fn hermite_rule(n: usize) -> HermiteRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0_f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    HermiteRule { nodes, weights }
}

fn hermite(n: usize) -> &'static HermiteRule {
    static R48: OnceLock<HermiteRule> = OnceLock::new();
    static R64: OnceLock<HermiteRule> = OnceLock::new();
    match n {
        48 => R48.get_or_init(|| hermite_rule(48)),
        _ => R64.get_or_init(|| hermite_rule(64)),
    }
}

/// `E g(Z)` for `Z ~ N(mean, variance)`.
///
/// Tries 48- and 64-point Gauss–Hermite rules; if they disagree beyond the
/// tolerance, falls back to adaptive quadrature against the density.
pub fn gauss_expectation<F: FnMut(f64) -> f64>(
    mut g: F,
    mean: f64,
    variance: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    if !(variance > 0.0) || !variance.is_finite() || !mean.is_finite() {
        return Err(Error::domain(format!(
            "gauss_expectation requires finite mean and variance > 0, got ({mean}, {variance})"
        )));
    }
    let sd = variance.sqrt();
    let scale = std::f64::consts::SQRT_2 * sd;
    let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
    let mut apply = |rule: &HermiteRule| -> f64 {
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * g(mean + scale * x))
            .sum::<f64>()
            * inv_sqrt_pi
    };
    let coarse = apply(hermite(48));
    let fine = apply(hermite(64));
    let diff = (fine - coarse).abs();
    if fine.is_finite() && diff <= cfg.abs_tol.max(cfg.rel_tol * fine.abs()) {
        return Ok(QuadResult {
            value: fine,
            err_estimate: diff,
            evaluations: 112,
        });
    }
    let norm = 1.0 / (sd * (2.0 * std::f64::consts::PI).sqrt());
    let points: Vec<f64> = [-14.0, -8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0, 14.0]
        .iter()
        .map(|k| mean + k * sd)
        .collect();
    let mut r = integrate_with_breaks(
        |z| {
            let u = (z - mean) / sd;
            let w = (-0.5 * u * u).exp();
            if w == 0.0 {
                0.0
            } else {
                g(z) * w * norm
            }
        },
        &points,
        cfg,
    )?;
    r.evaluations += 112;
    Ok(r)
}

/// Piecewise Chebyshev interpolant.
#[derive(Debug, Clone)]
pub struct ChebInterpolant {
    edges: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
}

impl ChebInterpolant {
    /// Builds the interpolant on `pieces` equal-width pieces of `[lo, hi]`.
    pub fn build<F: FnMut(f64) -> Result<f64>>(
        f: F,
        lo: f64,
        hi: f64,
        pieces: usize,
        degree: usize,
    ) -> Result<Self> {
        if !(hi > lo) || pieces == 0 {
            return Err(Error::domain("invalid Chebyshev interpolant layout"));
        }
        let width = (hi - lo) / pieces as f64;
        let edges: Vec<f64> = (0..=pieces).map(|i| lo + i as f64 * width).collect();
        Self::build_with_edges(f, &edges, degree)
    }

    /// Builds the interpolant with `degree + 1` first-kind Chebyshev nodes on
    /// each piece `[edges[i], edges[i+1]]`.
    pub fn build_with_edges<F: FnMut(f64) -> Result<f64>>(
        mut f: F,
        edges: &[f64],
        degree: usize,
    ) -> Result<Self> {
        if edges.len() < 2 || degree == 0 || edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("invalid Chebyshev interpolant layout"));
        }
        let n = degree + 1;
        let angles: Vec<f64> = (0..n)
            .map(|k| std::f64::consts::PI * (k as f64 + 0.5) / n as f64)
            .collect();
        let mut coeffs = Vec::with_capacity(edges.len() - 1);
        for w in edges.windows(2) {
            let (a, width) = (w[0], w[1] - w[0]);
            let mut fx = Vec::with_capacity(n);
            for th in &angles {
                fx.push(f(a + 0.5 * width * (1.0 + th.cos()))?);
            }
            let c: Vec<f64> = (0..n)
                .map(|j| {
                    let s: f64 = fx
                        .iter()
                        .zip(&angles)
                        .map(|(v, th)| v * (j as f64 * th).cos())
                        .sum();
                    2.0 * s / n as f64
                })
                .collect();
            coeffs.push(c);
        }
        Ok(Self {
            edges: edges.to_vec(),
            coeffs,
        })
    }

    pub fn lower(&self) -> f64 {
        self.edges[0]
    }

    pub fn upper(&self) -> f64 {
        *self.edges.last().expect("at least two edges")
    }

    /// Evaluates by Clenshaw recurrence; `None` outside the covered range.
    pub fn eval(&self, x: f64) -> Option<f64> {
        if !(x >= self.lower() && x <= self.upper()) {
            return None;
        }
        let idx = self
            .edges
            .partition_point(|e| *e <= x)
            .clamp(1, self.coeffs.len())
            - 1;
        let (a, b) = (self.edges[idx], self.edges[idx + 1]);
        let u = 2.0 * (x - a) / (b - a) - 1.0;
        let c = &self.coeffs[idx];
        let (mut b1, mut b2) = (0.0, 0.0);
        for cj in c.iter().skip(1).rev() {
            let b0 = 2.0 * u * b1 - b2 + cj;
            b2 = b1;
            b1 = b0;
        }
        Some(u * b1 - b2 + 0.5 * c[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    #[test]
    fn finite_examples() {
        assert_relative_eq!(
            integrate_finite(|_| 1.0, 0.0, 1.0, &cfg()).unwrap().value,
            1.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            integrate_finite(|x| x * x, 0.0, 1.0, &cfg()).unwrap().value,
            1.0 / 3.0,
            max_relative = 1e-14
        );
        let r =
            integrate_finite(|x| (-x).exp() * x.sin(), 0.0, std::f64::consts::PI, &cfg()).unwrap();
        let exact = 0.5 * (1.0 + (-std::f64::consts::PI).exp());
        assert!((r.value - exact).abs() < 1e-12);
        assert!(r.err_estimate <= cfg().abs_tol.max(cfg().rel_tol * r.value.abs()));
    }

    #[test]
    fn endpoint_singularity_is_resolved() {
        // ∫_0^1 x^{-1/2} = 2
        let r = integrate_finite(|x| 1.0 / x.sqrt(), 0.0, 1.0, &cfg()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let tight = QuadConfig::new(1e-14, 1e-14, 8, 10.0).unwrap();
        let r = integrate_finite(|x| (1.0 / x).sin(), 1e-4, 1.0, &tight);
        assert!(matches!(r, Err(Error::ToleranceNotMet { .. })));
    }

    #[test]
    fn nonfinite_integrand_is_reported() {
        let r = integrate_finite(|x| if x > 0.5 { f64::NAN } else { x }, 0.0, 1.0, &cfg());
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn config_validation() {
        assert!(QuadConfig::new(0.0, 1e-8, 100, 10.0).is_err());
        assert!(QuadConfig::new(1e-8, 0.5, 100, 10.0).is_err());
        assert!(QuadConfig::new(1e-8, 1e-8, 4, 10.0).is_err());
        assert!(QuadConfig::new(1e-8, 1e-8, 100, 10.0).is_ok());
    }

    #[test]
    fn semi_infinite_examples() {
        assert!(
            (integrate_semi_infinite(|y| (-y).exp(), 0.0, 1.0, &cfg())
                .unwrap()
                .value
                - 1.0)
                .abs()
                < 1e-9
        );
        assert!(
            (integrate_semi_infinite(|y| y * (-y).exp(), 0.0, 0.5, &cfg())
                .unwrap()
                .value
                - 1.0)
                .abs()
                < 1e-9
        );
        let beta = 0.7;
        let v = integrate_semi_infinite(|y| (-beta * y).exp() / (1.0 + y), 0.0, beta, &cfg())
            .unwrap()
            .value;
        assert!(v > 0.0 && v < 1.0 / beta);
    }

    #[test]
    fn semi_infinite_truncation_bound() {
        // ∫_0^∞ e^{-y}(1 + sin² y) = 7/5
        let f = |y: f64| (-y).exp() * (1.0 + y.sin().powi(2));
        let loose = QuadConfig::new(1e-4, 1e-12, 1000, 1.0).unwrap();
        let tight = QuadConfig::new(1e-11, 1e-12, 1000, 1.0).unwrap();
        assert!(truncation_point(0.0, 1.0, &tight) > truncation_point(0.0, 1.0, &loose));
        let a = integrate_semi_infinite(f, 0.0, 1.0, &loose).unwrap().value;
        let b = integrate_semi_infinite(f, 0.0, 1.0, &tight).unwrap().value;
        assert!(b > a);
        assert!((1.4 - a).abs() <= 2e-4);
        assert!((1.4 - b).abs() <= 1e-10);
    }

    #[test]
    fn half_line_map() {
        // ∫_0^∞ 1/(1+y)^2 = 1
        let r = integrate_to_infinity(|y| 1.0 / ((1.0 + y) * (1.0 + y)), 0.0, 1.0, &cfg()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        // lognormal-like decay
        let r = integrate_to_infinity(|y: f64| (-(y.ln().powi(2))).exp() / y, 0.0, 1.0, &cfg())
            .unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn vector_integration_matches_scalar() {
        let r = integrate_vec_with_breaks(
            |x, out: &mut [f64]| {
                out[0] = x.exp();
                out[1] = x.cos();
            },
            2,
            &[0.0, 0.5, 1.0],
            &cfg(),
        )
        .unwrap();
        assert!((r.values[0] - (1f64.exp() - 1.0)).abs() < 1e-13);
        assert!((r.values[1] - 1f64.sin()).abs() < 1e-13);
    }

    #[test]
    fn hermite_examples() {
        let c = cfg();
        assert!((gauss_expectation(|_| 1.0, 0.3, 2.0, &c).unwrap().value - 1.0).abs() < 1e-13);
        assert!((gauss_expectation(|z| z, -0.7, 2.0, &c).unwrap().value + 0.7).abs() < 1e-13);
        for t in [0.25, 1.0, 4.0] {
            let v = gauss_expectation(|z| z.exp(), 0.0, t, &c).unwrap().value;
            assert_relative_eq!(v, (t / 2.0).exp(), max_relative = 1e-10);
        }
    }

    #[test]
    fn hermite_falls_back_for_kinks() {
        // E|Z| = sqrt(2/π)
        let v = gauss_expectation(|z| z.abs(), 0.0, 1.0, &cfg()).unwrap();
        assert!(v.evaluations > 112);
        assert!((v.value - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn chebyshev_interpolant() {
        let cheb =
            ChebInterpolant::build(|x| Ok((-x).exp() * (1.0 + x).ln()), 0.0, 20.0, 10, 20).unwrap();
        for i in 0..=200 {
            let x = i as f64 * 0.1;
            let exact = (-x).exp() * (1.0 + x).ln();
            assert!((cheb.eval(x).unwrap() - exact).abs() < 1e-12, "x = {x}");
        }
        assert!(cheb.eval(20.5).is_none());
        let geo = ChebInterpolant::build_with_edges(
            |x| Ok(1.0 / (1.0 + x)),
            &[0.0, 1.0, 2.0, 4.0, 8.0, 16.0],
            24,
        )
        .unwrap();
        for x in [0.0, 0.5, 1.0, 3.3, 7.9, 16.0] {
            assert!((geo.eval(x).unwrap() - 1.0 / (1.0 + x)).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic() {
        let f = |x: f64| (x * 3.0).sin() / (1.0 + x * x);
        let a = integrate_finite(f, -2.0, 5.0, &cfg()).unwrap();
        let b = integrate_finite(f, -2.0, 5.0, &cfg()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn linearity(al in -3.0f64..3.0, be in -3.0f64..3.0, k in 0.1f64..4.0) {
            let c = cfg();
            let f = |x: f64| (k * x).cos();
            let g = |x: f64| x * (-x).exp();
            let lhs = integrate_finite(|x| al * f(x) + be * g(x), 0.0, 2.0, &c).unwrap();
            let rf = integrate_finite(f, 0.0, 2.0, &c).unwrap();
            let rg = integrate_finite(g, 0.0, 2.0, &c).unwrap();
            let rhs = al * rf.value + be * rg.value;
            let tol = 2.0 * (lhs.err_estimate + al.abs() * rf.err_estimate + be.abs() * rg.err_estimate) + 1e-14;
            prop_assert!((lhs.value - rhs).abs() <= tol);
        }
    }
}
