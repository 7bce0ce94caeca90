//! End-to-end tests driving the binary: cross-command round trips,
//! determinism, exit codes, and the fit -> cycle composition.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;

use gpdcycle::sim::{integrate, sample_gpd, LvRates, SimConfig};
use gpdcycle::GpdParams;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gpdcycle"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().expect("spawn gpdcycle");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn fresh_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gpdcycle-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn parse_kv(path: &Path) -> BTreeMap<String, f64> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .filter_map(|l| {
            let (k, v) = l.split_once('=')?;
            Some((k.trim().to_string(), v.trim().parse().ok()?))
        })
        .collect()
}

fn data_lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

#[test]
fn sample_then_fit_recovers_parameters() {
    let dir = fresh_dir("roundtrip");
    let sample_dir = dir.join("s");
    let fit_dir = dir.join("f");
    let (code, _, err) = run(&[
        "sample",
        "--threshold", "1.787", "--eta", "0.919", "--b", "0.703", "--alpha", "2.256",
        "--n", "200000", "--seed", "42", "--year", "2019", "--mean-income", "25000",
        "--outdir", sample_dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "sample failed: {err}");

    let config = dir.join("run.cfg");
    std::fs::write(&config, "x_d_fraction = 0.5\nminwage.2019 = 12000\n").unwrap();
    let (code, _, err) = run(&[
        "fit",
        "--input", sample_dir.join("sample.csv").to_str().unwrap(),
        "--config", config.to_str().unwrap(),
        "--outdir", fit_dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "fit failed: {err}");

    // every output embeds the run manifest
    for path in [sample_dir.join("sample.csv"), fit_dir.join("fit_2019.kv"), fit_dir.join("summary.csv")] {
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# tool: gpdcycle"), "{} lacks a manifest", path.display());
        assert!(text.contains("# invocation:"));
    }

    let record = parse_kv(&fit_dir.join("fit_2019.kv"));
    let rel = |key: &str, want: f64| (record[key] - want).abs() / want;
    assert!(rel("x_t", 1.787) < 0.10, "x_t {}", record["x_t"]);
    assert!(rel("eta", 0.919) < 0.10, "eta {}", record["eta"]);
    assert!(rel("b", 0.703) < 0.10, "b {}", record["b"]);
    assert!(rel("alpha", 2.256) < 0.10, "alpha {}", record["alpha"]);
    assert!((record["mean_check"] - 1.0).abs() < 0.01);
    assert!(fit_dir.join("summary.csv").exists());

    // report re-derives the summary and emits plot data
    let report_dir = dir.join("r");
    let (code, _, err) = run(&[
        "report",
        "--fits", fit_dir.to_str().unwrap(),
        "--outdir", report_dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "report failed: {err}");
    let lorenz = data_lines(&report_dir.join("lorenz_2019.csv"));
    assert!(lorenz.len() > 100);
    // shares are percentages, monotone, income below population
    let mut prev = (-1.0, -1.0);
    for line in &lorenz[1..] {
        let (pop, inc) = line.split_once(',').unwrap();
        let (pop, inc): (f64, f64) = (pop.parse().unwrap(), inc.parse().unwrap());
        assert!(pop >= prev.0 && inc >= prev.1);
        assert!(inc <= pop + 1e-9);
        prev = (pop, inc);
    }

    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn identical_invocations_write_identical_bytes() {
    let dir = fresh_dir("determinism");
    let out = dir.join("s");
    let args = [
        "sample",
        "--threshold", "1.722", "--eta", "1.169", "--b", "0.610", "--alpha", "2.075",
        "--n", "5000", "--seed", "7", "--year", "2005",
        "--outdir", out.to_str().unwrap(),
    ];
    let (code, _, _) = run(&args);
    assert_eq!(code, 0);
    let first = std::fs::read(out.join("sample.csv")).unwrap();
    let (code, _, _) = run(&args);
    assert_eq!(code, 0);
    let second = std::fs::read(out.join("sample.csv")).unwrap();
    assert_eq!(first, second);

    // the fit stage is deterministic too
    let config = dir.join("run.cfg");
    std::fs::write(&config, "minwage.2005 = 0.5\n").unwrap();
    let fit_out = dir.join("f");
    let sample_csv = out.join("sample.csv");
    let fit_args = [
        "fit",
        "--input", sample_csv.to_str().unwrap(),
        "--config", config.to_str().unwrap(),
        "--outdir", fit_out.to_str().unwrap(),
    ];
    let (code, _, err) = run(&fit_args);
    assert_eq!(code, 0, "{err}");
    let first = std::fs::read(fit_out.join("fit_2005.kv")).unwrap();
    let (code, _, _) = run(&fit_args);
    assert_eq!(code, 0);
    let second = std::fs::read(fit_out.join("fit_2005.kv")).unwrap();
    assert_eq!(first, second);

    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn empty_input_exits_nonzero_without_outputs() {
    let dir = fresh_dir("empty");
    let input = dir.join("empty.csv");
    std::fs::write(&input, "year,income\n").unwrap();
    let config = dir.join("run.cfg");
    std::fs::write(&config, "minwage.2002 = 1\n").unwrap();
    let out = dir.join("f");
    let (code, _, err) = run(&[
        "fit",
        "--input", input.to_str().unwrap(),
        "--config", config.to_str().unwrap(),
        "--outdir", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "stderr: {err}");
    assert!(!out.exists(), "no partial outputs expected");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn usage_and_data_error_exit_codes() {
    let (code, _, _) = run(&["fit", "--no-such-flag"]);
    assert_eq!(code, 1);
    let (code, _, _) = run(&["definitely-not-a-subcommand"]);
    assert_eq!(code, 1);

    let dir = fresh_dir("exitcodes");
    let (code, _, _) = run(&[
        "fit",
        "--input", dir.join("missing.csv").to_str().unwrap(),
        "--config", dir.join("missing.cfg").to_str().unwrap(),
        "--outdir", dir.join("out").to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn cycle_rejects_short_series() {
    let dir = fresh_dir("short");
    let uv = dir.join("uv.csv");
    std::fs::write(
        &uv,
        "year,u,v\n2002,64.0,83.0\n2003,63.5,82.0\n2004,63.0,81.0\n2005,63.2,80.5\n",
    )
    .unwrap();
    let (code, _, err) = run(&[
        "cycle",
        "--uv", uv.to_str().unwrap(),
        "--outdir", dir.join("c").to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("at least 5"), "stderr: {err}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn simulate_at_fixed_point_is_constant() {
    let dir = fresh_dir("fixedpoint");
    // center of the flow: x = a1/b1, y = a2/b2
    let (code, _, err) = run(&[
        "simulate",
        "--a1", "0.7", "--b1", "0.01", "--a2", "0.4", "--b2", "0.006",
        "--x0", "70", "--y0", "66.66666666666667",
        "--dt", "0.01", "--t-end", "5",
        "--outdir", dir.join("sim").to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let lines = data_lines(&dir.join("sim").join("trajectory.csv"));
    assert_eq!(lines[0], "t,x,y,H");
    for line in &lines[1..] {
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert!((fields[1] - 70.0).abs() < 1e-9, "x drifted: {line}");
        assert!((fields[2] - 66.66666666666667).abs() < 1e-9, "y drifted: {line}");
    }
    let _ = std::fs::remove_dir_all(&dir);
}

/// Build an 18-year dataset whose per-year (u, v) trace a wide cycle
/// around the reference center, write it through the CSV + config
/// surface, and check that fit -> cycle recovers the generating rates.
#[test]
fn fit_cycle_composition_recovers_generating_rates() {
    let dir = fresh_dir("composition");

    // base body parameters; the tail exponent is solved per year so the
    // wage share lands on the orbit
    let (x_t, eta, b) = (2.072, 2.921, 0.299);
    let probe = GpdParams::new(x_t, eta, b, 2.0).unwrap();
    let body_income = probe.partial_mean(x_t).unwrap();
    let tail_scale = x_t * probe.tail_mass();
    let alpha_for_u = |u: f64| {
        let k = body_income * (1.0 - u) / (u * tail_scale);
        k / (k - 1.0)
    };

    let omega = 2.0 * std::f64::consts::PI / 18.89;
    let rates = LvRates {
        a1: omega,
        b1: omega / 83.40,
        a2: omega,
        b2: omega / 66.29,
    };
    let orbit = integrate(&SimConfig {
        rates,
        initial: (83.40, 60.0),
        dt: 1e-3,
        t_end: 17.0,
    })
    .unwrap();

    let n = 100_000usize;
    let mut csv = String::from("year,income\n");
    let mut cfg = String::from("x_d_fraction = 0.5\n");
    for i in 0..18 {
        let year = 2002 + i as i32;
        let (v_y, u_y) = orbit.states[i * 1000];
        let truth = GpdParams::new(x_t, eta, b, alpha_for_u(u_y / 100.0)).unwrap();
        let model_mean = truth.mean().unwrap();
        let x_d = truth.quantile(1.0 - v_y / 100.0).unwrap();
        let _ = writeln!(cfg, "minwage.{year} = {}", 2.0 * x_d);
        let _ = writeln!(cfg, "xt.{year} = {}", x_t / model_mean);
        let draws = sample_gpd(&truth, n, 0x900D + i as u64).unwrap();
        for value in draws.values() {
            let _ = writeln!(csv, "{year},{value}");
        }
    }
    let input = dir.join("incomes.csv");
    let config = dir.join("run.cfg");
    std::fs::write(&input, csv).unwrap();
    std::fs::write(&config, cfg).unwrap();

    let fits = dir.join("fits");
    let (code, _, err) = run(&[
        "fit",
        "--input", input.to_str().unwrap(),
        "--config", config.to_str().unwrap(),
        "--outdir", fits.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "fit failed: {err}");

    let cycle_dir = dir.join("cycle");
    let (code, _, err) = run(&[
        "cycle",
        "--fits", fits.to_str().unwrap(),
        "--outdir", cycle_dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "cycle failed: {err}");

    let coeffs = parse_kv(&cycle_dir.join("cycle.kv"));
    let rel = |key: &str, want: f64| (coeffs[key] - want).abs() / want;
    assert!(rel("a1", rates.a1) < 0.10, "a1 {}", coeffs["a1"]);
    assert!(rel("b1", rates.b1) < 0.10, "b1 {}", coeffs["b1"]);
    assert!(rel("a2", rates.a2) < 0.10, "a2 {}", coeffs["a2"]);
    assert!(rel("b2", rates.b2) < 0.10, "b2 {}", coeffs["b2"]);
    assert!((coeffs["u_c"] - 66.29).abs() < 1.5, "u_c {}", coeffs["u_c"]);
    assert!((coeffs["v_c"] - 83.40).abs() < 1.5, "v_c {}", coeffs["v_c"]);
    assert!((17.8..=19.9).contains(&coeffs["period_years"]), "T {}", coeffs["period_years"]);

    // the emitted u-v series re-estimates to the same coefficients
    let cycle2 = dir.join("cycle2");
    let (code, _, err) = run(&[
        "cycle",
        "--uv", cycle_dir.join("uv.csv").to_str().unwrap(),
        "--outdir", cycle2.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "cycle --uv failed: {err}");
    assert_eq!(
        data_lines(&cycle_dir.join("cycle.kv")),
        data_lines(&cycle2.join("cycle.kv"))
    );

    let _ = std::fs::remove_dir_all(&dir);
}
