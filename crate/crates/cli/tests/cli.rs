use std::io::Write;
use std::process::{Command, Output, Stdio};

fn suprw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_suprw"))
        .args(args)
        .env_remove("SUPRW_DIGITS")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn losses_file(values: &[f64]) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "loss").unwrap();
    for v in values {
        writeln!(f, "{v}").unwrap();
    }
    f
}

#[test]
fn pvalue_from_rhat() {
    let out = stdout(&suprw(&[
        "pvalue",
        "--rhat",
        "0.03787878787878788",
        "--n",
        "100",
        "--alpha",
        "0.1",
    ]));
    assert_eq!(
        out,
        "rhat,prw,hoeffding_tight,bentkus\n0.03787878787878788,0.0379,0.0643,0.0645\n"
    );
    let out = stdout(&suprw(&[
        "pvalue",
        "--rhat",
        "0.03787878787878788",
        "--n",
        "100",
        "--alpha",
        "0.1",
        "--method",
        "bentkus",
    ]));
    assert_eq!(out, "rhat,bentkus\n0.03787878787878788,0.0645\n");
}

#[test]
fn pvalue_from_all_zero_losses() {
    let f = losses_file(&[0.0; 100]);
    let path = f.path().to_str().unwrap();
    let out = stdout(&suprw(&[
        "pvalue", "--losses", path, "--alpha", "0.1", "--method", "prw",
    ]));
    assert_eq!(out, "rhat,prw\n0,0.0000\n");
    let out = suprw(&["pvalue", "--losses", path, "--n", "99", "--alpha", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pvalue_losses_from_stdin_with_crlf() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_suprw"))
        .args([
            "pvalue", "--losses", "-", "--alpha", "0.5", "--format", "json",
        ])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"loss\r\n0\r\n1\r\n0\r\n0\r\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["n"], 4);
    assert_eq!(v["rhat"], 0.25);
    for key in ["prw", "hoeffding_tight", "bentkus"] {
        assert!(v[key].is_f64(), "{key}");
    }
}

#[test]
fn pvalue_unclamped_exceeds_one_in_capped_region() {
    let out = stdout(&suprw(&[
        "pvalue",
        "--rhat",
        "0.5",
        "--n",
        "100",
        "--alpha",
        "0.1",
        "--unclamped",
        "--digits",
        "6",
    ]));
    let row = &csv_rows(&out)[0];
    assert!(row[1].parse::<f64>().unwrap() > 1.0);
    assert!(row[3].parse::<f64>().unwrap() > 1.0);
    let out = stdout(&suprw(&[
        "pvalue", "--rhat", "0.5", "--n", "100", "--alpha", "0.1",
    ]));
    assert_eq!(csv_rows(&out)[0][1], "1.0000");
}

#[test]
fn digits_flag_and_env_override() {
    let out = stdout(&suprw(&["compare", "--digits", "0"]));
    for row in csv_rows(&out) {
        for cell in &row[1..] {
            assert!(cell == "0" || cell == "1", "{cell}");
        }
    }
    let out = Command::new(env!("CARGO_BIN_EXE_suprw"))
        .args([
            "pvalue", "--rhat", "0.0379", "--n", "100", "--alpha", "0.1", "--method", "prw",
        ])
        .env("SUPRW_DIGITS", "2")
        .output()
        .unwrap();
    assert_eq!(stdout(&out), "rhat,prw\n0.0379,0.04\n");
}

#[test]
fn compare_json_schema() {
    let out = stdout(&suprw(&["compare", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["n"], 100);
    assert_eq!(v["alpha"], 0.1);
    assert_eq!(v["digits"], 4);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 45);
    assert_eq!(rows[25]["rhat"], 0.0379);
    assert_eq!(rows[25]["bentkus"], 0.0645);
}

#[test]
fn plotdata_curves_and_capped_flag() {
    let out = stdout(&suprw(&["plotdata"]));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 1001);
    let mut prev = [f64::NEG_INFINITY; 3];
    for row in &rows {
        let rhat: f64 = row[0].parse().unwrap();
        for (c, p) in prev.iter_mut().enumerate() {
            let v: f64 = row[c + 1].parse().unwrap();
            assert!(v >= *p, "column {c} decreases at {rhat}");
            *p = v;
        }
        assert_eq!(
            row[4] == "true",
            rhat > 0.09 + 1e-12,
            "capped flag at {rhat}"
        );
    }

    let out = stdout(&suprw(&[
        "plotdata",
        "--format",
        "json",
        "--grid",
        "0,0.05,0.5",
    ]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["cap"].as_f64().unwrap() - 0.09).abs() < 1e-15);
    assert_eq!(v["rows"][2]["capped"], true);
}

#[test]
fn plotdata_single_observation() {
    let out = stdout(&suprw(&[
        "plotdata",
        "--n",
        "1",
        "--alpha",
        "0.5",
        "--grid",
        "0,1",
        "--unclamped",
    ]));
    let rows = csv_rows(&out);
    assert_eq!(rows[0][1], "1");
    assert_eq!(rows[0][4], "false");
    assert_eq!(rows[1][4], "true");
}

#[test]
fn fwer_json_and_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_suprw"))
        .args([
            "fwer",
            "-",
            "--procedure",
            "fallback",
            "--weights",
            "0.5,0.5",
            "--delta",
            "0.05",
            "--format",
            "json",
        ])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"pvalue\n0.9\n0.01\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["procedure"], "fallback");
    assert_eq!(v["rejections"], 1);
    let h = v["hypotheses"].as_array().unwrap();
    assert_eq!(h[0]["local_level"], 0.025);
    assert_eq!(h[0]["rejected"], false);
    assert_eq!(h[1]["rejected"], true);
}

#[test]
fn fwer_weight_errors() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "pvalue\n0.01\n0.02").unwrap();
    let path = f.path().to_str().unwrap();
    for weights in ["0.5,0.6", "1", "-0.5,1.5"] {
        let out = suprw(&[
            "fwer",
            path,
            "--procedure",
            "fallback",
            "--weights",
            weights,
            "--delta",
            "0.05",
        ]);
        assert_eq!(out.status.code(), Some(2), "{weights}");
    }
}

#[test]
fn validate_passes_and_is_deterministic() {
    let args = [
        "validate",
        "--dist",
        "bernoulli:0.2",
        "--n",
        "50",
        "--alpha",
        "0.1",
        "--reps",
        "100000",
        "--seed",
        "42",
    ];
    let first = suprw(&args);
    assert_eq!(first.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&first.stderr).starts_with("PASS"));
    assert_eq!(first.stdout, suprw(&args).stdout);
    assert_eq!(csv_rows(&String::from_utf8(first.stdout).unwrap()).len(), 4);
}

#[test]
fn validate_json_report() {
    let out = stdout(&suprw(&[
        "validate",
        "--dist",
        "beta:4:16",
        "--n",
        "20",
        "--alpha",
        "0.1",
        "--reps",
        "1000",
        "--delta",
        "0.05,0.1",
        "--format",
        "json",
        "--method",
        "bentkus",
    ]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["method"], "bentkus");
    assert_eq!(v["reps"], 1000);
    assert_eq!(v["pass"], true);
    assert_eq!(v["exceedance"].as_array().unwrap().len(), 2);
}

#[test]
fn usage_errors_exit_2() {
    let bad: &[&[&str]] = &[
        &["pvalue", "--rhat", "0.05", "--alpha", "0.1"],
        &["pvalue", "--rhat", "1.5", "--n", "10", "--alpha", "0.1"],
        &["pvalue", "--rhat", "0.05", "--n", "0", "--alpha", "0.1"],
        &["compare", "--alpha", "0"],
        &[
            "validate", "--dist", "gamma:1", "--n", "10", "--alpha", "0.1",
        ],
        &[
            "validate",
            "--dist",
            "bernoulli:0.1",
            "--n",
            "10",
            "--alpha",
            "0.1",
        ],
        &[
            "validate",
            "--dist",
            "bernoulli:0.2",
            "--n",
            "10",
            "--alpha",
            "0.1",
            "--method",
            "all",
        ],
        &["nonsense"],
    ];
    for args in bad {
        assert_eq!(suprw(args).status.code(), Some(2), "{args:?}");
    }
}
