//! Dispatch of the computing subcommands to the library.

use std::fs::File;
use std::io::{BufWriter, Write};

use bfx_core::functionals::{
    conditional_a_given_perpetuity, expected_log_one_plus_beta_a, expected_recip_one_plus_beta_a,
    gamma_moment_table, gamma_moments_at, gamma_path_mc, kernel_g, kernel_g_derivatives,
    laplace_gamma, laplace_recip, path_mc_of_a, perpetuity_identity_mc, psi,
    random_time_log_moment, random_time_log_moment_mc,
};
use bfx_core::stochastic::{estimate_from_samples, simulate_gamma_paths, simulate_gbm_drift};
use bfx_core::sv::{
    lognormal_moment, lognormal_moment_bessel, lognormal_moment_random_time,
    lognormal_moment_random_time_mc, mc_asset_moment, stein_moment_variant,
};
use bfx_core::{
    ExponentSign, FunctionalParams, GammaLaplaceMethod, KernelContext, LaplaceRoute,
    LognormalMethod, SVParams, SteinVariant, SvModel,
};

use crate::cli::{
    Command, GammaMomentsArgs, KernelArgs, Params, RandtimeArgs, SimulateArgs, SteinArgs,
};
use crate::record::RunRecord;
use crate::settings::{resolve, FileConfig, Settings};
use crate::CliError;

fn req(v: Option<f64>, name: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing required flag --{name}")))
}

fn num(v: f64) -> String {
    v.to_string()
}

fn method_or<'a>(p: &'a Params, default: &'a str) -> &'a str {
    p.method.as_deref().unwrap_or(default)
}

fn parse<T: std::str::FromStr<Err = bfx_core::Error>>(s: &str) -> Result<T, CliError> {
    s.parse::<T>().map_err(|e| CliError::Usage(e.to_string()))
}

fn bad_method(cmd: &str, m: &str, allowed: &str) -> CliError {
    CliError::Usage(format!(
        "{cmd}: unknown method {m:?} (expected one of {allowed})"
    ))
}

/// Runs one computing subcommand and returns its records in order.
pub fn run_compute(cmd: &Command, file: &FileConfig) -> Result<Vec<RunRecord>, CliError> {
    match cmd {
        Command::LaplaceGamma(p) => laplace_gamma_cmd(p, &resolve(file, p)?),
        Command::LaplaceRecip(p) => laplace_recip_cmd(p, &resolve(file, p)?),
        Command::ExpLog(p) => exp_a_cmd("exp-log", p, &resolve(file, p)?),
        Command::ExpRecip(p) => exp_a_cmd("exp-recip", p, &resolve(file, p)?),
        Command::GammaMoments(a) => gamma_moments_cmd(a, &resolve(file, &a.p)?),
        Command::CondPerpetuity(p) => cond_perpetuity_cmd(p, &resolve(file, p)?),
        Command::RandtimeLog(p) => randtime_log_cmd(p, &resolve(file, p)?),
        Command::Moment(p) => moment_cmd(p, &resolve(file, p)?),
        Command::SteinMoment(a) => stein_cmd(a, &resolve(file, &a.p)?),
        Command::RandtimeMoment(a) => randtime_moment_cmd(a, &resolve(file, &a.p)?),
        Command::KernelG(a) => kernel_cmd(a, &resolve(file, &a.p)?),
        Command::Psi(p) => psi_cmd(p, &resolve(file, p)?),
        Command::Simulate(a) => {
            let mut p = a.p.clone();
            // full default budgets would not fit in memory as stored paths
            p.paths = p.paths.or(file.paths).or(Some(100));
            p.steps = p.steps.or(file.steps).or(Some(256));
            simulate_cmd(a, &resolve(file, &p)?)
        }
        Command::Validate(_) | Command::Sweep(_) => unreachable!("handled by the caller"),
    }
}

fn laplace_gamma_cmd(p: &Params, s: &Settings) -> Result<Vec<RunRecord>, CliError> {
    let (arg, beta, t) = (req(p.arg, "arg")?, req(p.beta, "beta")?, req(p.t, "t")?);
    let m = method_or(p, "hb");
    let method: GammaLaplaceMethod =
        parse(m).map_err(|_| bad_method("laplace-gamma", m, "hb, mc, series"))?;
    let fp = FunctionalParams::new(0.0, beta, t)?;
    let e = laplace_gamma(arg, &fp, method, &s.quad, &s.mc)?;
    let params = [("arg", num(arg)), ("beta", num(beta)), ("t", num(t))];
    Ok(vec![
        RunRecord::new("laplace-gamma", &params, s.mc.seed).with_estimate(&e)
    ])
}

fn laplace_recip_cmd(p: &Params, s: &Settings) -> Result<Vec<RunRecord>, CliError> {
    let (lambda, beta, t) = (
        req(p.lambda, "lambda")?,
        req(p.beta, "beta")?,
        req(p.t, "t")?,
    );
    let mu = p.mu.unwrap_or(0.0);
    let m = method_or(p, "quadrature");
    let route: LaplaceRoute =
        parse(m).map_err(|_| bad_method("laplace-recip", m, "quadrature, radial-ou, path-mc"))?;
    let fp = FunctionalParams::new(mu, beta, t)?;
    let e = laplace_recip(lambda, &fp, route, &s.quad, &s.mc)?;
    let params = [
        ("lambda", num(lambda)),
        ("beta", num(beta)),
        ("mu", num(mu)),
        ("t", num(t)),
    ];
    Ok(vec![
        RunRecord::new("laplace-recip", &params, s.mc.seed).with_estimate(&e)
    ])
}

fn exp_a_cmd(name: &str, p: &Params, s: &Settings) -> Result<Vec<RunRecord>, CliError> {
    let (beta, t) = (req(p.beta, "beta")?, req(p.t, "t")?);
    let mu = p.mu.unwrap_or(0.0);
    let fp = FunctionalParams::new(mu, beta, t)?;
    let params = [("beta", num(beta)), ("mu", num(mu)), ("t", num(t))];
    let rec = RunRecord::new(name, &params, s.mc.seed);
    let log = name == "exp-log";
    match method_or(p, "quadrature") {
        "quadrature" => {
            let q = if log {
                expected_log_one_plus_beta_a(&fp, &s.quad)?
            } else {
                expected_recip_one_plus_beta_a(&fp, &s.quad)?
            };
            Ok(vec![rec.with_quad(&q, "quadrature")])
        }
        "path-mc" | "mc" => {
            let e = if log {
                path_mc_of_a(mu, t, &s.mc, |a| (beta * a).ln_1p())?
            } else {
                path_mc_of_a(mu, t, &s.mc, |a| 1.0 / (1.0 + beta * a))?
            };
            Ok(vec![rec.with_estimate(&e)])
        }
        m => Err(bad_method(name, m, "quadrature, path-mc")),
    }
}

fn gamma_moments_cmd(a: &GammaMomentsArgs, s: &Settings) -> Result<Vec<RunRecord>, CliError> {
    let p = &a.p;
    let (beta, t) = (req(p.beta, "beta")?, req(p.t, "t")?);
    if a.k_min > a.k_max {
        return Err(CliError::Usage(format!(
            "--k-min {} exceeds --k-max {}",
            a.k_min, a.k_max
        )));
    }
    let params = |k: i32| [("beta", num(beta)), ("t", num(t)), ("k", k.to_string())];
    let mut out = Vec::new();
    match method_or(p, "recursion") {
        "recursion" => {
            if let Some(n) = a.grid {
                let table =
                    gamma_moment_table(beta, t, a.k_min.min(-1), a.k_max.max(2), n, &s.quad)?;
                for k in a.k_min..=a.k_max {
                    let v = table.moment(k, t).expect("horizon is a grid node");
                    out.push(
                        RunRecord::new("gamma-moments", &params(k), s.mc.seed)
                            .with_value(v, 0.0, "moment-table")
                            .with_extra("residual", table.residual),
                    );
                }
            } else {
                let m = gamma_moments_at(beta, t, a.k_min, a.k_max, &s.quad)?;
                for (k, v) in (a.k_min..=a.k_max).zip(m) {
                    out.push(
                        RunRecord::new("gamma-moments", &params(k), s.mc.seed).with_value(
                            v,
                            0.0,
                            "recursion",
                        ),
                    );
                }
            }
        }
        "mc" => {
            for k in a.k_min..=a.k_max {
                let e = gamma_path_mc(beta, t, &s.mc, |g| g.powi(k))?;
                out.push(RunRecord::new("gamma-moments", &params(k), s.mc.seed).with_estimate(&e));
            }
        }
        m => return Err(bad_method("gamma-moments", m, "recursion, mc")),
    }
    Ok(out)
}

fn cond_perpetuity_cmd(p: &Params, s: &Settings) -> Result<Vec<RunRecord>, CliError> {
    let (mu, beta, t) = (req(p.mu, "mu")?, req(p.beta, "beta")?, req(p.t, "t")?);
    let fp = FunctionalParams::new(mu, beta, t)?;
    let params = [("mu", num(mu)), ("beta", num(beta)), ("t", num(t))];
    let rec = RunRecord::new("cond-perpetuity", &params, s.mc.seed);
    match method_or(p, "quadrature") {
        "quadrature" => {
            let c = conditional_a_given_perpetuity(&fp, &s.quad)?;
            Ok(vec![rec
                .with_value(c.conditional, c.err_estimate, "quadrature")
                .with_extra("identity_value", c.identity_value)])
        }
        "mc" => {
            if mu.is_nan() || mu <= 0.0 {
                return Err(bfx_core::Error::Domain(format!(
                    "the perpetuity is finite only for mu > 0, got {mu}"
                ))
                .into());
            }
            let e = perpetuity_identity_mc(&fp, &s.mc)?;
            let cond = e.clone().shifted(-1.0).scaled(-1.0 / (2.0 * beta));
            Ok(vec![rec
                .with_estimate(&cond)
                .with_extra("identity_value", e.value)])
        }
        m => Err(bad_method("cond-perpetuity", m, "quadrature, mc")),
    }
}

fn randtime_log_cmd(p: &Params, s: &Settings) -> Result<Vec<RunRecord>, CliError> {
    let (beta, lambda) = (req(p.beta, "beta")?, req(p.lambda, "lambda")?);
    let params = [("beta", num(beta)), ("lambda", num(lambda))];
    let rec = RunRecord::new("randtime-log", &params, s.mc.seed);
    match method_or(p, "quadrature") {
        "quadrature" => Ok(vec![rec.with_quad(
            &random_time_log_moment(beta, lambda, &s.quad)?,
            "quadrature",
        )]),
        "mc" | "path-mc" => {
            Ok(vec![rec.with_estimate(&random_time_log_moment_mc(
                beta, lambda, &s.mc,
            )?)])
        }
        m => Err(bad_method("randtime-log", m, "quadrature, mc")),
    }
}

fn moment_cmd(p: &Params, s: &Settings) -> Result<Vec<RunRecord>, CliError> {
    let model: SvModel = parse(p.model.as_deref().unwrap_or("lognormal"))?;
    let (alpha, rho, t) = (req(p.alpha, "alpha")?, req(p.rho, "rho")?, req(p.t, "t")?);
    let mut params = vec![
        (
            "model",
            p.model.clone().unwrap_or_else(|| "lognormal".into()),
        ),
        ("alpha", num(alpha)),
        ("rho", num(rho)),
        ("t", num(t)),
    ];
    let e = match model {
        SvModel::Lognormal => {
            let sv = SVParams::lognormal(alpha, rho, t)?;
            match method_or(p, "gamma-mc") {
                "bessel" | "bessel-mc" => lognormal_moment_bessel(&sv, &s.mc)?,
                m => {
                    let method: LognormalMethod = parse(m).map_err(|_| {
                        bad_method("moment", m, "gamma-mc, gamma-series, two-factor-mc, bessel")
                    })?;
                    lognormal_moment(&sv, method, &s.quad, &s.mc)?
                }
            }
        }
        SvModel::Stein => {
            let lambda = req(p.lambda, "lambda")?;
            params.push(("lambda", num(lambda)));
            let sv = SVParams::stein(alpha, rho, lambda, t)?;
            match method_or(p, "closed-form") {
                "closed-form" => {
                    let v = stein_moment_variant(&sv, SteinVariant::Corrected)?;
                    bfx_core::Estimate::deterministic(v, 0.0, "closed-form")
                }
                "two-factor-mc" | "mc" => mc_asset_moment(&sv, &s.mc)?,
                m => return Err(bad_method("moment", m, "closed-form, two-factor-mc")),
            }
        }
    };
    Ok(vec![
        RunRecord::new("moment", &params, s.mc.seed).with_estimate(&e)
    ])
}

fn stein_cmd(a: &SteinArgs, s: &Settings) -> Result<Vec<RunRecord>, CliError> {
    let p = &a.p;
    let (alpha, rho, lambda, t) = (
        req(p.alpha, "alpha")?,
        req(p.rho, "rho")?,
        req(p.lambda, "lambda")?,
        req(p.t, "t")?,
    );
    let sv = SVParams::stein(alpha, rho, lambda, t)?;
    let params = [
        ("alpha", num(alpha)),
        ("rho", num(rho)),
        ("lambda", num(lambda)),
        ("t", num(t)),
    ];
    let rec = RunRecord::new("stein-moment", &params, s.mc.seed);
    match method_or(p, "closed-form") {
        "closed-form" => {
            let variant = match a.variant.replace('_', "-").as_str() {
                "corrected" => SteinVariant::Corrected,
                "printed" => SteinVariant::Printed,
                "proof-line" | "proofline" => SteinVariant::ProofLine,
                v => {
                    return Err(CliError::Usage(format!(
                        "unknown variant {v:?} (corrected, printed, proof-line)"
                    )))
                }
            };
            let v = stein_moment_variant(&sv, variant)?;
            Ok(vec![rec.with_value(
                v,
                0.0,
                &format!("closed-form-{}", a.variant),
            )])
        }
        "two-factor-mc" | "mc" => Ok(vec![rec.with_estimate(&mc_asset_moment(&sv, &s.mc)?)]),
        m => Err(bad_method("stein-moment", m, "closed-form, two-factor-mc")),
    }
}

fn randtime_moment_cmd(a: &RandtimeArgs, s: &Settings) -> Result<Vec<RunRecord>, CliError> {
    let p = &a.p;
    let (alpha, rho, lambda) = (
        req(p.alpha, "alpha")?,
        req(p.rho, "rho")?,
        req(p.lambda, "lambda")?,
    );
    let sv = SVParams::lognormal(alpha, rho, 0.0)?.with_time_rate(lambda)?;
    let params = [
        ("alpha", num(alpha)),
        ("rho", num(rho)),
        ("lambda", num(lambda)),
    ];
    let rec = RunRecord::new("randtime-moment", &params, s.mc.seed);
    match method_or(p, "resolvent") {
        "resolvent" => {
            let sign: ExponentSign = parse(&a.sign)?;
            let q = lognormal_moment_random_time(&sv, sign, &s.quad)?;
            Ok(vec![rec.with_quad(&q, &format!("resolvent-{}", a.sign))])
        }
        "mc" => {
            Ok(vec![rec.with_estimate(&lognormal_moment_random_time_mc(
                &sv, &s.mc,
            )?)])
        }
        m => Err(bad_method("randtime-moment", m, "resolvent, mc")),
    }
}

fn kernel_cmd(a: &KernelArgs, s: &Settings) -> Result<Vec<RunRecord>, CliError> {
    let p = &a.p;
    let (x, t) = (req(p.x, "x")?, req(p.t, "t")?);
    let mu = p.mu.unwrap_or(0.0);
    let ctx = KernelContext::new(mu, t, s.quad)?;
    let params = [("x", num(x)), ("mu", num(mu)), ("t", num(t))];
    let mut rec = RunRecord::new("kernel-g", &params, s.mc.seed);
    if a.order == 0 {
        rec = rec.with_value(kernel_g(x, &ctx)?, s.quad.abs_tol, "quadrature");
    } else {
        let d = kernel_g_derivatives(x, &ctx, a.order)?;
        rec = rec.with_value(d[0], s.quad.abs_tol, "quadrature");
        for (j, v) in d.iter().enumerate().skip(1) {
            rec = rec.with_extra(&format!("d{j}"), *v);
        }
    }
    Ok(vec![rec])
}

fn psi_cmd(p: &Params, s: &Settings) -> Result<Vec<RunRecord>, CliError> {
    let (sv, x, t) = (req(p.s, "s")?, req(p.x, "x")?, req(p.t, "t")?);
    let mu = p.mu.unwrap_or(0.0);
    let ctx = KernelContext::new(mu, t, s.quad)?;
    let params = [
        ("s", num(sv)),
        ("x", num(x)),
        ("mu", num(mu)),
        ("t", num(t)),
    ];
    Ok(vec![RunRecord::new("psi", &params, s.mc.seed).with_value(
        psi(sv, x, &ctx)?,
        s.quad.abs_tol,
        "quadrature",
    )])
}

fn simulate_cmd(a: &SimulateArgs, s: &Settings) -> Result<Vec<RunRecord>, CliError> {
    let p = &a.p;
    let t = req(p.t, "t")?;
    let mu = p.mu.unwrap_or(0.0);
    let beta = p.beta.unwrap_or(1.0);
    let fp = FunctionalParams::new(mu, beta, t)?;
    let (bundle, integral_of_square) = match a.process.as_str() {
        "gbm" => (simulate_gbm_drift(&fp, &s.mc)?, true),
        "gamma" => (simulate_gamma_paths(&fp, &s.mc)?, false),
        other => {
            return Err(CliError::Usage(format!(
                "unknown process {other:?} (gbm, gamma)"
            )))
        }
    };
    if let Some(path) = &a.dump_paths {
        let f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(f));
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(["path_id", "time", "state", "running_integral"])
            .map_err(io)?;
        let ints = bundle.running_integrals.as_ref();
        for (i, vals) in bundle.values.iter().enumerate() {
            for (k, v) in vals.iter().enumerate() {
                let ri = ints.map(|r| {
                    if integral_of_square {
                        r[i].int_y2[k]
                    } else {
                        r[i].int_y[k]
                    }
                });
                w.write_record([
                    i.to_string(),
                    bundle.times[k].to_string(),
                    v.to_string(),
                    ri.map(|x| x.to_string()).unwrap_or_default(),
                ])
                .map_err(io)?;
            }
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))?;
        w.into_inner()
            .map_err(|e| CliError::Io(e.to_string()))?
            .flush()
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let e = estimate_from_samples(
        &bundle.terminal_values(),
        s.mc.ci_level,
        format!("simulate-{}", a.process),
    );
    let params = [
        ("process", a.process.clone()),
        ("mu", num(mu)),
        ("beta", num(beta)),
        ("t", num(t)),
    ];
    Ok(vec![RunRecord::new("simulate", &params, s.mc.seed)
        .with_estimate(&e)
        .with_extra(
            "flagged_paths",
            bundle.flagged_paths.len() as f64,
        )])
}
