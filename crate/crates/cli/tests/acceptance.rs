//! Acceptance run: the full validation suite through the binary, plus the
//! reproducibility and negative-control checks that need separate
//! processes. Prints one line per criterion and fails if any is red.

use std::collections::BTreeMap;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_bfx");

fn bfx(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("BFX_SEED")
        .output()
        .expect("failed to start bfx")
}

struct Tally {
    checks: usize,
    failures: Vec<String>,
}

fn main() {
    let mut crit: BTreeMap<u64, Tally> = (1..=10)
        .map(|k| {
            (
                k,
                Tally {
                    checks: 0,
                    failures: vec![],
                },
            )
        })
        .collect();

    let full = bfx(&[
        "validate", "--suite", "all", "--seed", "1", "--format", "json",
    ]);
    let code = full.status.code();
    let report: Value =
        serde_json::from_slice(&full.stdout).expect("validate emits one JSON report");
    for c in report["checks"].as_array().expect("checks array") {
        let t = crit
            .get_mut(&c["criterion"].as_u64().unwrap())
            .expect("criterion in 1..=10");
        t.checks += 1;
        if !c["pass"].as_bool().unwrap() {
            t.failures.push(format!(
                "{} (observed {}, reference {}, tolerance {})",
                c["name"], c["observed"], c["reference"], c["tolerance"]
            ));
        }
    }

    let c10 = crit.get_mut(&10).unwrap();
    c10.checks += 1;
    if code != Some(0) {
        c10.failures
            .push(format!("validate --suite all --seed 1 exited {code:?}"));
    }
    if !full.stderr.is_empty() {
        c10.failures.push("validate wrote to standard error".into());
    }

    // identical output across thread counts and reruns, MC and deterministic
    let commands: [&[&str]; 3] = [
        &[
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
        ],
        &[
            "laplace-recip",
            "--lambda",
            "1",
            "--beta",
            "0.5",
            "--t",
            "1",
            "--method",
            "path-mc",
            "--paths",
            "20000",
        ],
        &[
            "moment",
            "--alpha",
            "0.5",
            "--rho",
            "-0.5",
            "--t",
            "1",
            "--method",
            "two-factor-mc",
            "--paths",
            "20000",
        ],
    ];
    for args in commands {
        let runs: Vec<Vec<u8>> = ["1", "4", "4"]
            .iter()
            .map(|n| {
                let mut a = vec!["--threads", n];
                a.extend_from_slice(args);
                let o = bfx(&a);
                assert!(
                    o.status.success(),
                    "{args:?}: {}",
                    String::from_utf8_lossy(&o.stderr)
                );
                o.stdout
            })
            .collect();
        c10.checks += 1;
        if runs.iter().any(|r| r != &runs[0]) {
            c10.failures.push(format!(
                "{} output depends on thread count or rerun",
                args[0]
            ));
        }
    }
    let v1 = bfx(&[
        "--threads",
        "1",
        "validate",
        "--suite",
        "samplers",
        "--seed",
        "3",
        "--format",
        "json",
    ]);
    let v4 = bfx(&[
        "--threads",
        "4",
        "validate",
        "--suite",
        "samplers",
        "--seed",
        "3",
        "--format",
        "json",
    ]);
    c10.checks += 1;
    if v1.stdout != v4.stdout || v1.stdout.is_empty() {
        c10.failures
            .push("validate report depends on thread count".into());
    }

    // negative control: a biased route must fail
    let biased = bfx(&[
        "validate",
        "--suite",
        "kernels",
        "--paths",
        "20000",
        "--inject-bias",
        "0.05",
    ]);
    c10.checks += 1;
    if biased.status.code() != Some(1) {
        c10.failures.push(format!(
            "biased validation exited {:?}, expected 1",
            biased.status.code()
        ));
    }

    let mut all_pass = true;
    for (k, t) in &crit {
        let pass = t.checks > 0 && t.failures.is_empty();
        all_pass &= pass;
        println!(
            "criterion {k:>2}: {} ({} checks, {} failed)",
            if pass { "PASS" } else { "FAIL" },
            t.checks,
            t.failures.len()
        );
        for f in &t.failures {
            println!("    failed: {f}");
        }
    }
    for a in report["arbitrations"].as_array().into_iter().flatten() {
        println!("arbitration {}: chose {}", a["topic"], a["chosen"]);
    }
    if !all_pass {
        std::process::exit(1);
    }
}
