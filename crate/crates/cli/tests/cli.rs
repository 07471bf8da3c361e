//! End-to-end checks of the gkfade binary: CSV contract, exit codes, config
//! precedence, and the validate report.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gkfade"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gkfade-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

/// Split a CSV body into (header, data rows).
fn rows(text: &str) -> (String, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default().to_string();
    let data = lines
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, data)
}

#[test]
fn ber_emits_reference_row() {
    let out = run(&[
        "ber", "--mod", "bpsk", "--mm1", "1", "--ms1", "2", "--mm2", "1", "--ms2", "2", "--snr",
        "15:15:1",
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    let (header, data) = rows(&stdout(&out));
    assert_eq!(header, "modulation,snr_db,ber_analytic,ber_mc,mc_stderr");
    assert_eq!(data.len(), 1);
    let row = &data[0];
    assert_eq!(row[0], "bpsk");
    assert!((row[1].parse::<f64>().unwrap() - 15.0).abs() < 1e-9);
    let ber: f64 = row[2].parse().unwrap();
    assert!(
        (ber - 1.02393e-3).abs() <= 1e-3 * 1.02393e-3,
        "analytic column {ber}"
    );
    // MC not requested: both columns empty
    assert_eq!(row[3], "");
    assert_eq!(row[4], "");
}

#[test]
fn ber_grid_shape_and_precision() {
    let out = run(&[
        "ber", "--mod", "bpsk,dpsk,bfsk", "--mm1", "1", "--ms1", "0.5", "--mm2", "2", "--ms2",
        "4", "--snr", "0:20:10",
    ]);
    assert_eq!(code(&out), 0);
    let (_, data) = rows(&stdout(&out));
    assert_eq!(data.len(), 9);
    // deterministic order: modulations as listed, snr ascending inside
    let names: Vec<&str> = data.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(
        names,
        ["bpsk", "bpsk", "bpsk", "dpsk", "dpsk", "dpsk", "bfsk", "bfsk", "bfsk"]
    );
    for chunk in data.chunks(3) {
        let snrs: Vec<f64> = chunk.iter().map(|r| r[1].parse().unwrap()).collect();
        assert_eq!(snrs, [0.0, 10.0, 20.0]);
    }
    // >= 6 significant digits in every populated numeric field
    for row in &data {
        assert!(
            row[2].len() >= 7 && row[2].contains('e'),
            "short numeric field {:?}",
            row[2]
        );
        let v: f64 = row[2].parse().unwrap();
        assert!(v.is_finite() && v > 0.0);
    }
}

#[test]
fn ber_with_mc_is_byte_deterministic() {
    let args = [
        "ber", "--mod", "dpsk", "--mm1", "1", "--ms1", "2", "--mm2", "1", "--ms2", "2", "--snr",
        "5:10:5", "--samples", "20000", "--seed", "7", "--streams", "4",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout, "outputs differ between identical runs");
    let (_, data) = rows(&stdout(&a));
    assert_eq!(data.len(), 2);
    for row in data {
        let mc: f64 = row[3].parse().expect("mc column filled");
        let se: f64 = row[4].parse().expect("stderr column filled");
        assert!(mc > 0.0 && se > 0.0);
        let analytic: f64 = row[2].parse().unwrap();
        assert!((mc - analytic).abs() <= 6.0 * se, "{row:?}");
    }
}

#[test]
fn ber_omega_mode_matches_snr_mode() {
    let via_snr = run(&[
        "ber", "--mod", "dpsk", "--mm1", "1", "--ms1", "2", "--mm2", "1", "--ms2", "2", "--snr",
        "5:5:1",
    ]);
    let omega = format!("{}", 10f64.powf(0.5));
    let via_omega = run(&[
        "ber", "--mod", "dpsk", "--mm1", "1", "--ms1", "2", "--mm2", "1", "--ms2", "2",
        "--omega1", &omega, "--omega2", &omega,
    ]);
    assert_eq!(code(&via_omega), 0);
    let (_, a) = rows(&stdout(&via_snr));
    let (_, b) = rows(&stdout(&via_omega));
    assert!((b[0][1].parse::<f64>().unwrap() - 5.0).abs() < 1e-6);
    let (x, y): (f64, f64) = (a[0][2].parse().unwrap(), b[0][2].parse().unwrap());
    assert!((x - y).abs() <= 1e-9 * x, "{x} vs {y}");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["ber", "--snr", "20:0:5"],                      // empty grid
        vec!["ber", "--snr", "0:20:-5"],                     // bad step
        vec!["ber", "--snr", "0:20"],                        // malformed grid
        vec!["ber", "--snr", "0:20:5", "--omega1", "2.0", "--omega2", "2.0"], // exclusive
        vec!["ber", "--omega1", "2.0"],                      // partner missing
        vec!["ber", "--mod", "qam16"],                       // unknown modulation
        vec!["ber", "--samples", "20000", "--outputs", "analytic"], // contradiction
        vec!["ber", "--samples", "5000"],                    // below floor
        vec!["ber", "--emit-plot-stub"],                     // stub needs --out
        vec!["frobnicate"],                                  // unknown subcommand
    ] {
        let out = run(&args);
        assert_eq!(code(&out), 2, "args {args:?}: {out:?}");
    }
}

#[test]
fn config_file_precedence() {
    let dir = scratch("config");
    let cfg = dir.join("sweep.json");
    fs::write(
        &cfg,
        r#"{
            "mod": "dpsk",
            "mm1": 1.0, "ms1": 2.0, "mm2": 1.0, "ms2": 2.0,
            "snr": "5:5:1",
            "samples": 20000, "seed": 9, "streams": 4
        }"#,
    )
    .unwrap();
    let cfg_s = cfg.to_str().unwrap();

    // config alone drives the run
    let base = run(&["ber", "--config", cfg_s]);
    assert_eq!(code(&base), 0, "{base:?}");
    let (_, data) = rows(&stdout(&base));
    assert_eq!(data.len(), 1);
    assert_eq!(data[0][0], "dpsk");
    assert!(!data[0][3].is_empty(), "config samples enable MC");

    // flag overrides config field
    let over = run(&["ber", "--config", cfg_s, "--mod", "bfsk"]);
    let (_, data) = rows(&stdout(&over));
    assert_eq!(data[0][0], "bfsk");

    // flags equivalent to the config reproduce it byte for byte
    let manual = run(&[
        "ber", "--mod", "dpsk", "--mm1", "1", "--ms1", "2", "--mm2", "1", "--ms2", "2", "--snr",
        "5:5:1", "--samples", "20000", "--seed", "9", "--streams", "4",
    ]);
    assert_eq!(base.stdout, manual.stdout);

    // unknown keys are a parse error
    let bad = dir.join("bad.json");
    fs::write(&bad, r#"{"snr": "5:5:1", "bogus_key": 1}"#).unwrap();
    let out = run(&["ber", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn out_file_and_plot_stub() {
    let dir = scratch("plot");
    let csv = dir.join("sweep.csv");
    let csv_s = csv.to_str().unwrap();
    let out = run(&[
        "ber", "--mod", "bpsk", "--mm1", "1", "--ms1", "2", "--mm2", "1", "--ms2", "2", "--snr",
        "15:15:1", "--out", csv_s, "--emit-plot-stub",
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    assert!(stdout(&out).is_empty());
    let body = fs::read_to_string(&csv).unwrap();
    assert!(body.starts_with("modulation,snr_db,"));
    let stub = fs::read_to_string(dir.join("sweep.csv.plot.py")).unwrap();
    assert!(stub.contains("DictReader") && stub.contains("sweep.csv"));
}

#[test]
fn egbmgf_spec_evaluation() {
    let dir = scratch("egbmgf");
    let spec = dir.join("spec.json");
    // Laplace-shifted CDF-product spec of the reference BPSK point
    fs::write(
        &spec,
        r#"{
            "joint_num": [0.5],
            "x_block": { "c_num": [1.0], "d_num": [1.0, 2.0], "d_den": [0.0] },
            "y_block": { "c_num": [1.0], "d_num": [1.0, 2.0], "d_den": [0.0] },
            "x": 0.06324555320336758,
            "y": 0.06324555320336758
        }"#,
    )
    .unwrap();
    // prefactor kappa1 q^p / (2 Gamma(p)) = 1 / (2 sqrt(pi)) for this link
    let out = run(&[
        "egbmgf",
        spec.to_str().unwrap(),
        "--scale",
        "0.28209479177387814",
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    let text = stdout(&out);
    let mut value = None;
    let mut residual = None;
    let mut convergence = None;
    for line in text.lines() {
        let mut it = line.split_whitespace();
        match (it.next(), it.next()) {
            (Some("value"), Some(v)) => value = Some(v.parse::<f64>().unwrap()),
            (Some("imag_residual"), Some(v)) => residual = Some(v.parse::<f64>().unwrap()),
            (Some("convergence"), Some(v)) => convergence = Some(v.to_string()),
            _ => {}
        }
    }
    let value = value.expect("value line");
    assert!(
        (value - 1.0239260360494e-3).abs() <= 1e-6 * value,
        "value {value}"
    );
    assert!(residual.expect("imag_residual line") < 1e-8);
    assert_eq!(convergence.as_deref(), Some("strict"));
}

#[test]
fn egbmgf_error_exit_codes() {
    let dir = scratch("egbmgf-err");
    let bad = dir.join("bad.json");
    fs::write(&bad, "{\"joint_num\": [").unwrap();
    assert_eq!(code(&run(&["egbmgf", bad.to_str().unwrap()])), 2);

    assert_eq!(code(&run(&["egbmgf", "/nonexistent/spec.json"])), 2);

    // pole families with no separating contour: numeric non-convergence
    let nostrip = dir.join("nostrip.json");
    fs::write(
        &nostrip,
        r#"{
            "x_block": { "c_num": [2.0], "d_num": [0.5] },
            "y_block": { "c_num": [1.0], "d_num": [1.0, 2.0], "d_den": [0.0] },
            "x": 1.0,
            "y": 1.0
        }"#,
    )
    .unwrap();
    assert_eq!(code(&run(&["egbmgf", nostrip.to_str().unwrap()])), 3);
}

#[test]
fn validate_passes_and_flags_injection() {
    let base = [
        "validate", "--mod", "dpsk", "--mm1", "1", "--ms1", "2", "--mm2", "1", "--ms2", "2",
        "--snr", "5:10:5", "--samples", "40000", "--seed", "3",
    ];
    let ok = run(&base);
    assert_eq!(code(&ok), 0, "{ok:?}");
    let text = stdout(&ok);
    assert_eq!(
        text.lines().filter(|l| l.ends_with(" PASS")).count(),
        2,
        "{text}"
    );
    assert!(text.contains("worst offender:"));
    assert!(text.contains("result: PASS"));

    let mut corrupted: Vec<&str> = base.to_vec();
    corrupted.extend(["--inject-omega-scale", "1.6"]);
    let bad = run(&corrupted);
    assert_eq!(code(&bad), 1);
    let text = stdout(&bad);
    assert!(text.contains(" FAIL"), "{text}");
    assert!(text.contains("worst offender:"));
}

#[test]
fn validate_reports_underpowered_runs() {
    let out = run(&[
        "validate", "--mod", "bpsk", "--mm1", "1", "--ms1", "0.5", "--mm2", "2", "--ms2", "4",
        "--snr", "20:20:1", "--samples", "10000", "--seed", "9",
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    let text = stdout(&out);
    assert!(
        text.contains("stderr too large to discriminate"),
        "power check did not flag: {text}"
    );
}
