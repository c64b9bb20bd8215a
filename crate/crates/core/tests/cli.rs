//! End-to-end tests of the `memoryflow` binary: CSV schemas, exit codes,
//! config files and the examples attached to each subcommand.

use std::path::PathBuf;
use std::process::{Command, Output};

fn memoryflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_memoryflow"))
        .args(args)
        .env_remove("MEMORYFLOW_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Column header followed by data rows, metadata stripped.
fn table(text: &str) -> (String, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().expect("column header").to_string();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn num(cell: &str) -> f64 {
    cell.parse()
        .unwrap_or_else(|_| panic!("not a number: {cell}"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("memoryflow-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn gamma_rows_start_at_zero_and_cover_the_grid() {
    let out = memoryflow(&["gamma", "--tmax", "20", "--steps", "400"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = table(&stdout(&out));
    assert_eq!(header, "t,gamma");
    assert_eq!(rows.len(), 401);
    assert_eq!(rows[0], ["0.000000e0", "0.000000e0"]);
    assert_eq!(rows[400][0], "2.000000e1");
}

#[test]
fn metadata_header_echoes_configuration() {
    let out = memoryflow(&[
        "gamma", "--kappa", "0.25", "--tmax", "5", "--steps", "100", "--seed", "9",
    ]);
    let text = stdout(&out);
    let meta: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
    assert!(meta[0].starts_with("# memoryflow "));
    for expected in [
        "# kappa = 0.25",
        "# eta = 0.5",
        "# beta = 10",
        "# seed = 9",
        "# tmax = 5",
    ] {
        assert!(meta.contains(&expected), "missing {expected}");
    }
}

#[test]
fn full_precision_prints_seventeen_digits() {
    let out = memoryflow(&["gamma", "--tmax", "5", "--steps", "100", "--full-precision"]);
    let (_, rows) = table(&stdout(&out));
    assert_eq!(rows[100][0], "5.0000000000000000e0");
    let mantissa = rows[1][1].split('e').next().unwrap();
    assert_eq!(mantissa.len(), 18);
}

#[test]
fn high_temperature_dominates_low_temperature() {
    let base = scratch("gamma.csv");
    let out = memoryflow(&[
        "gamma",
        "--beta",
        "0.1,10",
        "--tmax",
        "30",
        "--steps",
        "300",
        "--out",
        base.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let read = |name: &str| table(&std::fs::read_to_string(base.with_file_name(name)).unwrap()).1;
    let hot = read("gamma_beta0.1.csv");
    let cold = read("gamma_beta10.csv");
    assert_eq!(hot.len(), cold.len());
    for (h, c) in hot.iter().zip(&cold).skip(1) {
        assert!(num(&h[1]) > num(&c[1]), "t = {}", h[0]);
    }
}

#[test]
fn series_starts_distinguishable_and_stays_in_range() {
    let out = memoryflow(&["series", "--kappa", "0.5", "--beta", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = table(&stdout(&out));
    assert_eq!(header, "t,D,sqrtJ,K14,S14");
    assert!(rows[0][1..].iter().all(|c| c == "1.000000e0"));
    for row in &rows {
        for cell in &row[1..] {
            let v = num(cell);
            assert!((0.0..=1.0).contains(&v));
        }
    }
}

#[test]
fn series_subset_and_monotone_under_linear_gamma() {
    let out = memoryflow(&["series", "--gamma-linear", "0.2", "--quantifiers", "S,D"]);
    let (header, rows) = table(&stdout(&out));
    assert_eq!(header, "t,S14,D");
    for pair in rows.windows(2) {
        for (now, before) in pair[1][1..].iter().zip(&pair[0][1..]) {
            assert!(num(now) <= num(before));
        }
    }
}

/// (quantifier, measure, windows) blocks of a measure report.
fn measure_blocks(text: &str) -> Vec<(String, f64, Vec<[f64; 3]>)> {
    let (header, rows) = table(text);
    assert_eq!(header, "quantifier,measure,num_windows");
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        let n: usize = rows[i][2].parse().unwrap();
        let windows = rows[i + 1..i + 1 + n]
            .iter()
            .map(|r| [num(&r[0]), num(&r[1]), num(&r[2])])
            .collect();
        blocks.push((rows[i][0].clone(), num(&rows[i][1]), windows));
        i += 1 + n;
    }
    blocks
}

#[test]
fn measure_windows_sorted_and_summing_to_measure() {
    let out = memoryflow(&[
        "measure",
        "--kappa",
        "0.5",
        "--beta",
        "20",
        "--full-precision",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let blocks = measure_blocks(&stdout(&out));
    assert_eq!(blocks.len(), 4);
    for (name, measure, windows) in &blocks {
        assert!(!windows.is_empty(), "{name}");
        assert!(windows.windows(2).all(|w| w[0][0] < w[1][0]));
        let sum: f64 = windows.iter().map(|w| w[2]).sum();
        assert!((sum - measure).abs() <= 1e-12, "{name}");
    }
}

#[test]
fn measure_is_zero_for_linear_gamma() {
    let out = memoryflow(&["measure", "--gamma-linear", "0.3"]);
    assert_eq!(out.status.code(), Some(0));
    for (_, measure, windows) in measure_blocks(&stdout(&out)) {
        assert_eq!(measure, 0.0);
        assert!(windows.is_empty());
    }
}

#[test]
fn sweep_with_two_points_has_two_rows() {
    let out = memoryflow(&["sweep", "--points", "2", "--quantifiers", "D"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = table(&stdout(&out));
    assert_eq!(header, "param_value,M_D");
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "1.000000e0");
    assert_eq!(rows[1][0], "2.000000e1");
}

#[test]
fn beta_sweep_is_non_decreasing() {
    let out = memoryflow(&[
        "sweep", "--sweep", "beta", "--kappa", "0.5", "--from", "1", "--to", "20", "--points", "8",
    ]);
    let (header, rows) = table(&stdout(&out));
    assert_eq!(header, "param_value,M_D,M_sqrtJ,M_K14,M_S14");
    for q in 1..5 {
        for pair in rows.windows(2) {
            assert!(num(&pair[1][q]) >= num(&pair[0][q]));
        }
    }
}

#[test]
fn sweep_output_independent_of_thread_count() {
    let args = ["sweep", "--sweep", "kappa", "--log", "--points", "6"];
    let one = memoryflow(&[&args[..], &["--threads", "1"]].concat());
    let many = memoryflow(&[&args[..], &["--threads", "3"]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout);
    let env = Command::new(env!("CARGO_BIN_EXE_memoryflow"))
        .args(args)
        .env("MEMORYFLOW_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(env.stdout, one.stdout);
}

#[test]
fn partial_sweep_failure_reports_nan_and_exit_three() {
    let out = memoryflow(&["sweep", "--kappa", "0.5", "--matsubara-terms", "500"]);
    assert_eq!(out.status.code(), Some(3));
    let (_, rows) = table(&stdout(&out));
    assert_eq!(rows.len(), 8);
    assert!(rows[0][1..].iter().all(|c| c != "nan"));
    assert!(rows[7][1..].iter().all(|c| c == "nan"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("did not converge"));
}

#[test]
fn exit_codes_for_invalid_input_and_convergence() {
    // overdamped: η ≥ 2ω₀
    assert_eq!(memoryflow(&["gamma", "--eta", "3"]).status.code(), Some(1));
    assert_eq!(
        memoryflow(&["gamma", "--kappa", "-1"]).status.code(),
        Some(1)
    );
    assert_eq!(
        memoryflow(&["sweep", "--from", "5", "--to", "1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(memoryflow(&["gamma", "--bogus"]).status.code(), Some(1));
    assert_eq!(
        memoryflow(&["measure", "--tmax", "100", "--steps", "100"])
            .status
            .code(),
        Some(1)
    );
    let out = memoryflow(&[
        "gamma",
        "--beta",
        "20",
        "--matsubara-terms",
        "10",
        "--tmax",
        "5",
        "--steps",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(memoryflow(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_values_and_flag_overrides() {
    let path = scratch("run.conf");
    std::fs::write(
        &path,
        "# comment\nkappa = 0.5\nbeta = 20\nquantifiers = D\ntmax = 10\nsteps = 200\n",
    )
    .unwrap();
    let from_file = memoryflow(&["series", "--config", path.to_str().unwrap()]);
    let text = stdout(&from_file);
    assert!(text.contains("# kappa = 0.5\n"));
    assert_eq!(table(&text).0, "t,D");
    let overridden = memoryflow(&[
        "series",
        "--config",
        path.to_str().unwrap(),
        "--kappa",
        "0.2",
    ]);
    assert!(stdout(&overridden).contains("# kappa = 0.2\n"));

    std::fs::write(&path, "kappa = lots\n").unwrap();
    assert_eq!(
        memoryflow(&["series", "--config", path.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn check_reports_named_suites_and_flags_corruption() {
    let out = memoryflow(&["check", "--samples", "50", "--corrupt-contractivity"]);
    assert_eq!(out.status.code(), Some(4));
    let text = stdout(&out);
    let (header, rows) = table(&text);
    assert_eq!(header, "suite,subject,passed,total");
    let suites: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    for name in ["b1", "b2", "tlikeS", "tlikeK", "tlikebis", "cpcontra"] {
        assert!(suites.contains(&name), "missing {name}");
    }
    let cp: Vec<&Vec<String>> = rows.iter().filter(|r| r[0] == "cpcontra").collect();
    assert!(cp.iter().any(|r| r[2] != r[3]));
    assert!(text.contains("# cpcontra,"));
}

#[test]
fn check_is_seed_reproducible() {
    let a = memoryflow(&["check", "--samples", "30", "--seed", "5"]);
    let b = memoryflow(&["check", "--samples", "30", "--seed", "5"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), b.status.code());
}
