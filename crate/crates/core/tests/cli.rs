use std::fs;
use std::path::Path;
use std::process::Command;

fn sbl(args: &[&str], cwd: &Path) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_sbl"))
        .args(args)
        .current_dir(cwd)
        .env("SBL_THREADS", "2")
        .output()
        .unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn analyze_unit_disk() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "disk.json", r#"{"name":"unit-disk","family":"ball","N":2,"params":{"rho":1.0}}"#);
    let (code, err) = sbl(&["analyze", &cfg, "--grid-h", "0.03125", "--out", "o"], dir.path());
    assert_eq!(code, 0, "{err}");
    let rows = fs::read_to_string(dir.path().join("o/rows.csv")).unwrap();
    let mut lines = rows.lines();
    assert_eq!(lines.next().unwrap(), "scenario,param,delta,cs_deficit,serrin_deficit,fi_residual,m,sym_diff,hausdorff,perim_diff");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "unit-disk");
    assert_eq!(row[6], "1");
    assert!(row[5].parse::<f64>().unwrap() <= 1e-3);
    assert!(lines.next().is_none());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("o/report.json")).unwrap()).unwrap();
    let dec = &report["reports"][0]["decomposition"];
    for key in ["m", "balls", "metrics", "ledger", "mode"] {
        assert!(!dec[key].is_null(), "missing {key}");
    }
    assert_eq!(dec["mode"], "empirical");
    let tube = fs::read_to_string(dir.path().join("o/plotdata/tubular_unit-disk.csv")).unwrap();
    assert!(tube.starts_with("eta,measured,bound,ratio\n"));
}

#[test]
fn config_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"family":"ball""#);
    assert_eq!(sbl(&["analyze", &bad], dir.path()).0, 3);
    let (code, _) = sbl(&["analyze", "missing.json"], dir.path());
    assert_eq!(code, 3);
    let dim = write(dir.path(), "ann.json", r#"{"family":"annulus","N":2,"params":{"r_out":2.0,"r_in":0.3}}"#);
    assert_eq!(sbl(&["annulus", &dim], dir.path()).0, 3);
    let ell = write(dir.path(), "e3.json", r#"{"family":"ellipse","N":3,"params":{"a":1.5,"b":1.0}}"#);
    assert_eq!(sbl(&["analyze", &ell], dir.path()).0, 3);
    let sweep = write(dir.path(), "s.json", r#"{"family":"dumbbell","N":2,"params":{"d":3.0,"w":0.2}}"#);
    assert_eq!(sbl(&["sweep", &sweep], dir.path()).0, 3);
}

#[test]
fn paper_mode_on_large_deficit_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "e.json", r#"{"family":"ellipse","N":2,"params":{"a":1.5,"b":1.0},"tubular_asymptotic":false}"#);
    let (code, err) = sbl(&["analyze", &cfg, "--mode", "paper", "--grid-h", "0.03125", "--out", "o"], dir.path());
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("violation"));
    assert!(dir.path().join("o/report.json").exists());
}

#[test]
fn annulus_and_identity_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.json", r#"{"name":"annulus","family":"annulus","N":3,"params":{"r_out":2.0,"r_in":0.3},"epsilons":[0.3,0.1,0.01]}"#);
    let (code, err) = sbl(&["annulus", &cfg, "--out", "a"], dir.path());
    assert_eq!(code, 0, "{err}");
    let csv = fs::read_to_string(dir.path().join("a/plotdata/annulus_annulus.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    let disk = write(dir.path(), "d.json", r#"{"family":"ball","N":2}"#);
    let (code, err) = sbl(&["identity", &disk, "--grid-h", "0.03125", "--out", "i"], dir.path());
    assert_eq!(code, 0, "{err}");
}
