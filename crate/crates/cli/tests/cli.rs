use std::process::{Command, Output};

use respl_core::io::MatrixFile;
use respl_core::operator::{CMat, C64};

fn respl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_respl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is json")
}

#[test]
fn manin_passes_and_embeds_provenance() {
    let o = respl(&["verify-manin", "--n", "2", "--trials", "10", "--seed", "5"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["N"], 2);
    assert_eq!(v["seed"], 5);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["tolerances"]["residual"], 1e-9);
    assert_eq!(v["reports"].as_array().unwrap().len(), 2);
    assert_eq!(v["pass"], true);
}

#[test]
fn manin_zero_tolerance_is_a_breach() {
    assert_eq!(
        code(&respl(&[
            "verify-manin",
            "--n",
            "2",
            "--trials",
            "10",
            "--tol",
            "0"
        ])),
        2
    );
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["verify-manin", "--n", "0"][..],
        &["verify-manin", "--n", "2000"],
        &["verify-manin", "--trials", "0"],
        &["verify-manin", "--p", "0.5"],
        &["verify-manin", "--tol", "-1"],
        &["verify-poisson", "--kind", "Heisenberg"],
        &["verify-poisson", "--kind", "BPlus", "--sign", "minus"],
        &["truncation-growth", "--n-list", "16,8"],
        &["truncation-growth", "--n-list", "8,x"],
        &["schubert", "classify"],
        &["schubert", "census", "--n", "9"],
        &["gamma-flow", "--n", "2", "--coeffs", "1,1,1,1"],
        &["gamma-flow", "--coeffs", "1:2:3"],
        &["no-such-command"],
        &["verify-manin", "--bogus"],
    ] {
        assert_eq!(code(&respl(args)), 1, "{args:?}");
    }
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&respl(&["--help"])), 0);
    let o = respl(&["--version"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn poisson_kinds_pass() {
    for (kind, sign) in [
        ("UnitaryP", "plus"),
        ("UnitaryP", "minus"),
        ("BPlus", "plus"),
        ("URes", "plus"),
        ("BResPlus", "plus"),
    ] {
        let o = respl(&[
            "verify-poisson",
            "--kind",
            kind,
            "--sign",
            sign,
            "--n",
            "3",
            "--trials",
            "8",
        ]);
        assert_eq!(
            code(&o),
            0,
            "{kind} {sign}: {}",
            String::from_utf8_lossy(&o.stdout)
        );
        let v = json(&o);
        assert_eq!(v["identity_max_abs"], 0.0);
        assert_eq!(v["kind"], kind);
    }
}

#[test]
fn growth_csv_has_expected_header_and_rows() {
    let o = respl(&[
        "truncation-growth",
        "--n-list",
        "4,8,16",
        "--format",
        "csv",
        "--seed",
        "3",
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,ratio,norm_kind,trunc_kind,seed"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.ends_with(",lower,3")));
}

#[test]
fn growth_json_reports_checks() {
    let o = respl(&["truncation-growth", "--n-list", "8,16,32"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["checks"]["e2_bounded"], true);
    assert_eq!(v["checks"]["einf_strictly_increasing"], true);
    assert_eq!(v["N"], 32);
}

#[test]
fn census_lists_every_cell() {
    let o = respl(&["schubert", "census", "--n", "3"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["cells"].as_array().unwrap().len(), 20);
}

fn write_frame(dir: &tempfile::TempDir, name: &str, n: usize, m: &CMat) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, MatrixFile::from_matrix(n, m).to_json()).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn classify_reads_frames() {
    let dir = tempfile::tempdir().unwrap();
    // H+ itself: columns at positions 0..N, the indices N-1..0.
    let top = write_frame(&dir, "top.json", 2, &CMat::identity(4, 2));
    let o = respl(&["schubert", "classify", "--frame", &top]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["S"], serde_json::json!([0, 1]));
    assert_eq!(v["dim"], 0);

    let d = respl_core::grassmannian::DEFAULT_RANK_TOL;
    let edge = CMat::from_column_slice(2, 1, &[C64::new(1.0, 0.0), C64::new(d, 0.0)]);
    let amb = write_frame(&dir, "amb.json", 1, &edge);
    let o = respl(&["schubert", "classify", "--frame", &amb]);
    assert_eq!(code(&o), 3);
    assert_eq!(json(&o)["ambiguous"], true);
    assert!(!o.stderr.is_empty());

    let bad = write_frame(&dir, "bad.json", 2, &CMat::zeros(4, 2));
    assert_eq!(code(&respl(&["schubert", "classify", "--frame", &bad])), 1);
}

#[test]
fn gamma_flow_stays_in_start_cell() {
    let o = respl(&[
        "gamma-flow",
        "--n",
        "3",
        "--coeffs",
        "0.5,-0.3:0.2",
        "--start",
        "-2,0,1",
        "--steps",
        "4",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let traj = v["trajectory"].as_array().unwrap();
    assert_eq!(traj.len(), 5);
    assert!(traj.iter().all(|s| s["S"] == serde_json::json!([-2, 0, 1])));
    assert!(traj[0]["distance"].as_f64().unwrap() < 1e-12);
    assert!(traj[4]["distance"].as_f64().unwrap() > 1e-3);
}

#[test]
fn out_flag_writes_file_and_runs_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = respl(&[
            "verify-poisson",
            "--kind",
            "URes",
            "--n",
            "2",
            "--trials",
            "6",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
        assert!(o.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}
