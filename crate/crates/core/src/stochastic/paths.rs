use rayon::prelude::*;

use super::{rng_substream, std_normal, FunctionalParams, MCConfig, Scheme, Stream};
use crate::error::{Error, Result};

/// Uniform time grid `0 = t_0 < … < t_n = horizon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    pub horizon: f64,
    pub n_steps: usize,
}

impl UniformGrid {
    pub fn new(horizon: f64, n_steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::domain(format!(
                "grid horizon must be > 0, got {horizon}"
            )));
        }
        if n_steps == 0 {
            return Err(Error::Config("grid needs at least one step".into()));
        }
        Ok(Self { horizon, n_steps })
    }

    #[inline]
    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    #[inline]
    pub fn time(&self, step: usize) -> f64 {
        if step == self.n_steps {
            self.horizon
        } else {
            step as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|i| self.time(i)).collect()
    }

    /// Index of the grid node at time `t`, which must lie on the grid.
    pub fn step_of(&self, t: f64) -> Result<usize> {
        let x = t / self.dt();
        let i = x.round();
        if !(i >= 0.0 && i <= self.n_steps as f64) || (x - i).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "time {t} is not a node of the grid with {} steps on [0, {}]",
                self.n_steps, self.horizon
            )));
        }
        Ok(i as usize)
    }
}

/// Running state of `Y^{(μ)} = exp(B + μt)` and its trapezoid integrals.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GbmState {
    pub b: f64,
    pub y: f64,
    pub int_y: f64,
    pub int_y2: f64,
}

/// Simulates one Brownian path and the exact GBM for each drift in `mus`.
///
/// `states` must have `mus.len()` entries. `observe(step, states)` is called
/// at every node including `step = 0`.
pub fn gbm_multi_drift<O>(
    stream: &mut Stream,
    mus: &[f64],
    grid: &UniformGrid,
    states: &mut [GbmState],
    mut observe: O,
) where
    O: FnMut(usize, &[GbmState]),
{
    debug_assert_eq!(mus.len(), states.len());
    let dt = grid.dt();
    let sq = dt.sqrt();
    for s in states.iter_mut() {
        *s = GbmState {
            b: 0.0,
            y: 1.0,
            int_y: 0.0,
            int_y2: 0.0,
        };
    }
    observe(0, states);
    let mut b = 0.0;
    for step in 1..=grid.n_steps {
        b += sq * std_normal(stream);
        let t = grid.time(step);
        for (s, &mu) in states.iter_mut().zip(mus) {
            let y = (b + mu * t).exp();
            s.int_y += 0.5 * dt * (s.y + y);
            s.int_y2 += 0.5 * dt * (s.y * s.y + y * y);
            s.y = y;
            s.b = b;
        }
        observe(step, states);
    }
}

/// Euler scheme for `dΓ = Γ dB − βΓ² dt`, one `β` per entry of `gammas`.
/// Uses the same normal draws, in the same order, as [`gbm_multi_drift`].
/// Paths that become nonpositive are marked in `flagged`.
pub fn gamma_euler_multi<O>(
    stream: &mut Stream,
    betas: &[f64],
    grid: &UniformGrid,
    gammas: &mut [f64],
    flagged: &mut [bool],
    mut observe: O,
) where
    O: FnMut(usize, &[f64]),
{
    let dt = grid.dt();
    let sq = dt.sqrt();
    gammas.iter_mut().for_each(|g| *g = 1.0);
    flagged.iter_mut().for_each(|f| *f = false);
    observe(0, gammas);
    for step in 1..=grid.n_steps {
        let db = sq * std_normal(stream);
        for ((g, &beta), flag) in gammas.iter_mut().zip(betas).zip(flagged.iter_mut()) {
            *g += *g * db - beta * *g * *g * dt;
            if *g <= 0.0 {
                *flag = true;
            }
        }
        observe(step, gammas);
    }
}

/// Euler scheme for `dS = √(S²−1) dB` from each start in `states`, clamped
/// at the boundary 1 after every step.
pub fn cosh_hyperbolic_multi<O>(
    stream: &mut Stream,
    grid: &UniformGrid,
    states: &mut [f64],
    mut observe: O,
) where
    O: FnMut(usize, &[f64]),
{
    let sq = grid.dt().sqrt();
    observe(0, states);
    for step in 1..=grid.n_steps {
        let db = sq * std_normal(stream);
        for s in states.iter_mut() {
            let next = *s + ((*s - 1.0) * (*s + 1.0)).sqrt() * db;
            *s = next.max(1.0);
        }
        observe(step, states);
    }
}

/// Brownian pair `(Z, W)` on the grid with `W = ρZ + √(1−ρ²)V`.
pub fn simulate_correlated_pair(
    rho: f64,
    grid: &UniformGrid,
    stream: &mut Stream,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::domain(format!(
            "correlation must lie in [-1, 1], got {rho}"
        )));
    }
    let sq = grid.dt().sqrt();
    let rho_bar = (1.0 - rho * rho).sqrt();
    let mut z = Vec::with_capacity(grid.n_steps + 1);
    let mut w = Vec::with_capacity(grid.n_steps + 1);
    z.push(0.0);
    w.push(0.0);
    let (mut zc, mut wc) = (0.0, 0.0);
    for _ in 0..grid.n_steps {
        let dz = sq * std_normal(stream);
        let dv = sq * std_normal(stream);
        zc += dz;
        wc += rho * dz + rho_bar * dv;
        z.push(zc);
        w.push(wc);
    }
    Ok((z, w))
}

/// Accumulated `∫_0^t Y ds` and `∫_0^t Y² ds` on the grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunningIntegrals {
    pub int_y: Vec<f64>,
    pub int_y2: Vec<f64>,
}

/// A set of simulated paths on a common time grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathBundle {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub running_integrals: Option<Vec<RunningIntegrals>>,
    /// Paths on which a discretisation left the state space.
    pub flagged_paths: Vec<usize>,
}

impl PathBundle {
    pub fn n_paths(&self) -> usize {
        self.values.len()
    }

    pub fn terminal_values(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|v| *v.last().unwrap_or(&f64::NAN))
            .collect()
    }
}

fn degenerate_bundle(n_paths: usize, initial: f64) -> PathBundle {
    PathBundle {
        times: vec![0.0],
        values: vec![vec![initial]; n_paths],
        running_integrals: Some(vec![
            RunningIntegrals {
                int_y: vec![0.0],
                int_y2: vec![0.0],
            };
            n_paths
        ]),
        flagged_paths: Vec::new(),
    }
}

/// Paths of `Y^{(μ)}_t = exp(B_t + μt)` with trapezoid running integrals.
pub fn simulate_gbm_drift(p: &FunctionalParams, mc: &MCConfig) -> Result<PathBundle> {
    p.validate()?;
    mc.validate()?;
    if p.horizon == 0.0 {
        return Ok(degenerate_bundle(mc.n_paths, 1.0));
    }
    let grid = UniformGrid::new(p.horizon, mc.n_steps)?;
    let paths: Vec<(Vec<f64>, RunningIntegrals)> = (0..mc.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut stream = rng_substream(mc.seed, i);
            let n = grid.n_steps + 1;
            let (mut y, mut iy, mut iy2) = (
                Vec::with_capacity(n),
                Vec::with_capacity(n),
                Vec::with_capacity(n),
            );
            let mut st = [GbmState::default()];
            gbm_multi_drift(&mut stream, &[p.mu], &grid, &mut st, |_, s| {
                y.push(s[0].y);
                iy.push(s[0].int_y);
                iy2.push(s[0].int_y2);
            });
            (
                y,
                RunningIntegrals {
                    int_y: iy,
                    int_y2: iy2,
                },
            )
        })
        .collect();
    let (values, integrals) = paths.into_iter().unzip();
    Ok(PathBundle {
        times: grid.times(),
        values,
        running_integrals: Some(integrals),
        flagged_paths: Vec::new(),
    })
}

/// Paths of `Γ_t = Y_t / (1 + β ∫_0^t Y_s ds)` with `Y = exp(B_t − t/2)`.
///
/// `Scheme::Euler` integrates the SDE of `Γ` with the same Brownian
/// increments instead; paths that turn nonpositive are listed in
/// `flagged_paths`. The running integrals are those of `Y` in both cases.
pub fn simulate_gamma_paths(p: &FunctionalParams, mc: &MCConfig) -> Result<PathBundle> {
    p.validate()?;
    mc.validate()?;
    if p.horizon == 0.0 {
        return Ok(degenerate_bundle(mc.n_paths, 1.0));
    }
    let grid = UniformGrid::new(p.horizon, mc.n_steps)?;
    let euler = mc.scheme == Scheme::Euler;
    let beta = p.beta;
    let paths: Vec<(Vec<f64>, RunningIntegrals, bool)> = (0..mc.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let n = grid.n_steps + 1;
            let (mut g, mut iy, mut iy2) = (
                Vec::with_capacity(n),
                Vec::with_capacity(n),
                Vec::with_capacity(n),
            );
            let mut st = [GbmState::default()];
            gbm_multi_drift(
                &mut rng_substream(mc.seed, i),
                &[-0.5],
                &grid,
                &mut st,
                |_, s| {
                    g.push(s[0].y / (1.0 + beta * s[0].int_y));
                    iy.push(s[0].int_y);
                    iy2.push(s[0].int_y2);
                },
            );
            let mut flag = [false];
            if euler {
                g.clear();
                let mut gam = [1.0];
                gamma_euler_multi(
                    &mut rng_substream(mc.seed, i),
                    &[beta],
                    &grid,
                    &mut gam,
                    &mut flag,
                    |_, v| g.push(v[0]),
                );
            }
            (
                g,
                RunningIntegrals {
                    int_y: iy,
                    int_y2: iy2,
                },
                flag[0],
            )
        })
        .collect();
    let mut values = Vec::with_capacity(paths.len());
    let mut integrals = Vec::with_capacity(paths.len());
    let mut flagged_paths = Vec::new();
    for (i, (v, r, f)) in paths.into_iter().enumerate() {
        values.push(v);
        integrals.push(r);
        if f {
            flagged_paths.push(i);
        }
    }
    Ok(PathBundle {
        times: grid.times(),
        values,
        running_integrals: Some(integrals),
        flagged_paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::estimate_from_samples;

    fn within(samples: &[f64], target: f64, k: f64) -> bool {
        let e = estimate_from_samples(samples, 0.95, "t");
        (e.value - target).abs() <= k * e.std_error
    }

    #[test]
    fn grid_nodes() {
        let g = UniformGrid::new(1.0, 8).unwrap();
        assert_eq!(g.step_of(0.25).unwrap(), 2);
        assert!(g.step_of(0.3).is_err());
        assert_eq!(*g.times().last().unwrap(), 1.0);
        assert!(g.times().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn gbm_means() {
        let mc = MCConfig::default()
            .with_paths(20_000)
            .with_steps(64)
            .with_seed(11);
        for mu in [-0.5, 0.3] {
            let p = FunctionalParams::new(mu, 1.0, 1.0).unwrap();
            let b = simulate_gbm_drift(&p, &mc).unwrap();
            assert_eq!(b.times.len(), 65);
            assert!(
                within(&b.terminal_values(), (mu + 0.5f64).exp(), 3.0),
                "mu = {mu}"
            );
        }
        let p = FunctionalParams::new(0.0, 1.0, 1.0).unwrap();
        let b = simulate_gbm_drift(&p, &mc).unwrap();
        let a: Vec<f64> = b
            .running_integrals
            .unwrap()
            .iter()
            .map(|r| *r.int_y2.last().unwrap())
            .collect();
        assert!(within(&a, (2f64.exp() - 1.0) / 2.0, 3.0));
    }

    #[test]
    fn gamma_paths_start_at_one_and_schemes_agree() {
        let mc = MCConfig::default()
            .with_paths(20_000)
            .with_steps(1024)
            .with_seed(3);
        let p = FunctionalParams::new(0.0, 0.5, 1.0).unwrap();
        let exact = simulate_gamma_paths(&p, &mc).unwrap();
        let euler = simulate_gamma_paths(&p, &mc.with_scheme(Scheme::Euler)).unwrap();
        assert!(exact.values.iter().all(|v| v[0] == 1.0));
        assert!(euler.flagged_paths.is_empty());
        let d: Vec<f64> = exact
            .terminal_values()
            .iter()
            .zip(euler.terminal_values())
            .map(|(a, b)| a - b)
            .collect();
        assert!(within(&d, 0.0, 3.0));
    }

    #[test]
    fn gamma_small_beta_is_martingale() {
        let mc = MCConfig::default()
            .with_paths(20_000)
            .with_steps(64)
            .with_seed(8);
        let p = FunctionalParams::new(0.0, 1e-9, 1.0).unwrap();
        assert!(within(
            &simulate_gamma_paths(&p, &mc).unwrap().terminal_values(),
            1.0,
            3.0
        ));
    }

    #[test]
    fn correlated_pair() {
        let grid = UniformGrid::new(1.0, 4000).unwrap();
        let mut s = rng_substream(1, 0);
        let (z, w) = simulate_correlated_pair(1.0, &grid, &mut s).unwrap();
        assert_eq!(z, w);
        for rho in [0.0, -0.5] {
            let (z, w) = simulate_correlated_pair(rho, &grid, &mut s).unwrap();
            let dz: Vec<f64> = z.windows(2).map(|p| p[1] - p[0]).collect();
            let dw: Vec<f64> = w.windows(2).map(|p| p[1] - p[0]).collect();
            let n = dz.len() as f64;
            let (sz, sw) = (dz.iter().sum::<f64>() / n, dw.iter().sum::<f64>() / n);
            let cov: f64 = dz
                .iter()
                .zip(&dw)
                .map(|(a, b)| (a - sz) * (b - sw))
                .sum::<f64>();
            let vz: f64 = dz.iter().map(|a| (a - sz).powi(2)).sum();
            let vw: f64 = dw.iter().map(|a| (a - sw).powi(2)).sum();
            let r = cov / (vz * vw).sqrt();
            let se = (1.0 - rho * rho) / n.sqrt();
            assert!(
                (r - rho).abs() < 3.0 * se.max(1.0 / n.sqrt()),
                "rho = {rho}, r = {r}"
            );
        }
        assert!(simulate_correlated_pair(1.5, &grid, &mut s).is_err());
    }

    #[test]
    fn cosh_stays_above_one() {
        let grid = UniformGrid::new(1.0, 256).unwrap();
        let mut s = rng_substream(2, 0);
        let mut st = [1.0, 1.5];
        let mut min = f64::INFINITY;
        cosh_hyperbolic_multi(&mut s, &grid, &mut st, |_, v| {
            min = min.min(v[0].min(v[1]));
        });
        assert!(min >= 1.0);
        assert_eq!(st[0], 1.0);
    }

    #[test]
    fn zero_horizon() {
        let p = FunctionalParams::new(0.0, 1.0, 0.0).unwrap();
        let b = simulate_gamma_paths(&p, &MCConfig::default().with_paths(10)).unwrap();
        assert_eq!(b.terminal_values(), vec![1.0; 10]);
    }
}
