use std::collections::BTreeMap;
use std::process::{Command, Output};

use bfx_cli::parse_range;
use bfx_cli::record::RunRecord;
use proptest::prelude::*;

const BIN: &str = env!("CARGO_BIN_EXE_bfx");

fn bfx(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("BFX_SEED")
        .output()
        .unwrap()
}

fn records(o: &Output) -> Vec<RunRecord> {
    String::from_utf8(o.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn csv_rows(o: &Output) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(o.stdout.as_slice())
        .records()
        .map(|r| r.unwrap())
        .collect()
}

#[test]
fn exp_recip_at_time_zero_is_one() {
    let o = bfx(&["exp-recip", "--beta", "1", "--mu", "0", "--t", "0"]);
    assert!(o.status.success());
    assert!(o.stderr.is_empty());
    let r = records(&o);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].value, Some(1.0));
    assert_eq!(r[0].command, "exp-recip");
}

#[test]
fn martingale_moment_is_one() {
    for method in ["gamma-mc", "two-factor-mc"] {
        let o = bfx(&[
            "moment",
            "--model",
            "lognormal",
            "--alpha",
            "1",
            "--rho",
            "-0.5",
            "--t",
            "1",
            "--method",
            method,
            "--paths",
            "20000",
            "--steps",
            "512",
        ]);
        assert!(o.status.success(), "{method}");
        let r = &records(&o)[0];
        let (v, se) = (r.value.unwrap(), r.error.unwrap());
        assert!((v - 1.0).abs() <= 3.0 * se + 1e-12, "{method}: {v} ± {se}");
    }
}

#[test]
fn repeated_runs_are_bit_identical() {
    let args = [
        "laplace-gamma",
        "--arg",
        "1",
        "--beta",
        "0.5",
        "--t",
        "1",
        "--method",
        "hb",
        "--seed",
        "7",
        "--paths",
        "5000",
    ];
    let a = bfx(&args);
    let b = bfx(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let other = bfx(&[
        "laplace-gamma",
        "--arg",
        "1",
        "--beta",
        "0.5",
        "--t",
        "1",
        "--method",
        "hb",
        "--seed",
        "8",
        "--paths",
        "5000",
    ]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(bfx(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(
        bfx(&["exp-recip", "--beta", "1"]).status.code(),
        Some(2),
        "missing --t"
    );
    assert_eq!(
        bfx(&["exp-recip", "--beta", "abc", "--t", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bfx(&[
            "laplace-gamma",
            "--arg",
            "1",
            "--beta",
            "1",
            "--t",
            "1",
            "--method",
            "bogus"
        ])
        .status
        .code(),
        Some(2)
    );

    let dom = bfx(&["moment", "--alpha", "2", "--rho", "0", "--t", "1"]);
    assert_eq!(dom.status.code(), Some(3));
    let msg = String::from_utf8_lossy(&dom.stderr);
    assert!(msg.contains("alpha*(1-rho^2)"), "{msg}");
    assert!(dom.stdout.is_empty());

    assert_eq!(
        bfx(&["exp-recip", "--beta", "-1", "--t", "1"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        bfx(&["cond-perpetuity", "--mu", "-0.5", "--beta", "1", "--t", "1"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        bfx(&["laplace-gamma", "--arg", "-1", "--beta", "1", "--t", "1"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        bfx(&[
            "randtime-moment",
            "--alpha",
            "0.5",
            "--rho",
            "-0.3",
            "--lambda",
            "1",
            "--sign",
            "plus"
        ])
        .status
        .code(),
        Some(3)
    );
}

#[test]
fn sweep_over_time_is_monotone() {
    let o = bfx(&[
        "sweep",
        "exp-recip",
        "--beta",
        "1",
        "--mu",
        "0",
        "--t",
        "0:1:5",
    ]);
    assert!(o.status.success());
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 5);
    let v: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(v[0], 1.0);
    assert!(v.windows(2).all(|w| w[1] <= w[0]), "{v:?}");
}

#[test]
fn sweep_over_beta_is_decreasing() {
    let o = bfx(&[
        "--format",
        "json",
        "sweep",
        "exp-recip",
        "--t",
        "1",
        "beta=0.25:2:4",
    ]);
    assert!(o.status.success());
    let v: Vec<f64> = records(&o).iter().map(|r| r.value.unwrap()).collect();
    assert_eq!(v.len(), 4);
    assert!(v.windows(2).all(|w| w[1] < w[0]), "{v:?}");
}

#[test]
fn sweep_marks_domain_rows() {
    let o = bfx(&[
        "sweep",
        "moment",
        "--rho",
        "-0.5",
        "--t",
        "1",
        "--method",
        "gamma-series",
        "--alpha",
        "0.5:2:4",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 4);
    for r in &rows {
        let alpha: f64 = r[1]
            .split(';')
            .find_map(|kv| kv.strip_prefix("alpha="))
            .unwrap()
            .parse()
            .unwrap();
        if alpha * 0.75 < 1.0 {
            assert!(r[2].parse::<f64>().unwrap().is_finite());
            assert_eq!(&r[8], "");
        } else {
            assert_eq!(&r[2], "");
            assert_eq!(&r[8], "domain-error");
        }
    }
}

#[test]
fn sweep_needs_exactly_one_range() {
    assert_eq!(
        bfx(&["sweep", "exp-recip", "--beta", "1", "--t", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bfx(&["sweep", "exp-recip", "--beta", "0:1:2", "--t", "0:1:2"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn seed_precedence() {
    let dir = std::env::temp_dir().join(format!("bfx-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("cfg.toml");
    std::fs::write(&cfg, "seed = 11\npaths = 3000\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let base = [
        "exp-log", "--beta", "1", "--t", "1", "--method", "mc", "--steps", "64",
    ];
    let run = |extra: &[&str], env: Option<&str>| {
        let mut c = Command::new(BIN);
        c.args(extra).args(base).env_remove("BFX_SEED");
        if let Some(s) = env {
            c.env("BFX_SEED", s);
        }
        records(&c.output().unwrap()).remove(0)
    };
    let from_file = run(&["--config", cfg], None);
    assert_eq!(from_file.seed, 11);
    assert_eq!(from_file.extra["n_effective"], 3000.0);
    let mut c = Command::new(BIN);
    let out = c
        .args(["--config", cfg])
        .args(base)
        .args(["--seed", "5"])
        .env_remove("BFX_SEED")
        .output()
        .unwrap();
    assert_eq!(records(&out)[0].seed, 5);
    let env = run(&["--config", cfg], Some("9"));
    assert_eq!(env.seed, 9);
    std::fs::write(dir.join("bad.toml"), "bogus_key = 1\n").unwrap();
    let bad = bfx(&[
        "--config",
        dir.join("bad.toml").to_str().unwrap(),
        "exp-recip",
        "--beta",
        "1",
        "--t",
        "1",
    ]);
    assert_eq!(bad.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn timing_is_opt_in() {
    let plain = records(&bfx(&["psi", "--s", "1", "--x", "1", "--t", "1"]));
    assert!(plain[0].wall_ms.is_none());
    let timed = records(&bfx(&[
        "--timing", "psi", "--s", "1", "--x", "1", "--t", "1",
    ]));
    assert!(timed[0].wall_ms.is_some());
    assert_eq!(plain[0].value, timed[0].value);
}

#[test]
fn gamma_moments_one_record_per_order() {
    let o = bfx(&[
        "gamma-moments",
        "--beta",
        "0.5",
        "--t",
        "1",
        "--k-min",
        "-2",
        "--k-max",
        "3",
    ]);
    let r = records(&o);
    assert_eq!(r.len(), 6);
    assert_eq!(r[2].params["k"], "0");
    assert!((r[2].value.unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn simulate_dumps_paths() {
    let path = std::env::temp_dir().join(format!("bfx-paths-{}.csv", std::process::id()));
    let o = bfx(&[
        "simulate",
        "--t",
        "1",
        "--paths",
        "3",
        "--steps",
        "8",
        "--dump-paths",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    assert_eq!(
        rdr.headers().unwrap(),
        vec!["path_id", "time", "state", "running_integral"]
    );
    assert_eq!(rdr.records().count(), 3 * 9);
    std::fs::remove_file(path).unwrap();
}

#[test]
fn validate_small_suite_prints_table() {
    let o = bfx(&["validate", "--suite", "kernels", "--paths", "20000"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("criterion  5: PASS"));
    assert!(o.stderr.is_empty());
}

#[test]
fn range_parsing() {
    assert_eq!(
        parse_range("0:1:5").unwrap(),
        vec![0.0, 0.25, 0.5, 0.75, 1.0]
    );
    assert_eq!(parse_range("-1:1:1").unwrap(), vec![-1.0]);
    assert!(parse_range("0:1").is_none());
    assert!(parse_range("0:1:0").is_none());
    assert!(parse_range("a:1:2").is_none());
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        -1e3..1e3f64
    ]
}

proptest! {
    #[test]
    fn run_record_json_round_trips(
        value in proptest::option::of(finite()),
        error in proptest::option::of(0.0..1e3f64),
        seed in any::<u64>(),
        wall in proptest::option::of(any::<u64>()),
        extra in proptest::collection::btree_map("[a-z_]{1,8}", finite(), 0..4),
        params in proptest::collection::btree_map("[a-z]{1,6}", "[-0-9.e]{1,10}", 0..5),
        method in "[a-z-]{0,12}",
    ) {
        let r = RunRecord {
            command: "moment".into(),
            params: params.into_iter().collect::<BTreeMap<_, _>>(),
            value,
            error,
            method,
            seed,
            wall_ms: wall,
            extra,
            status: None,
            message: None,
        };
        let text = serde_json::to_string(&r).unwrap();
        let back: RunRecord = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, r);
    }
}
