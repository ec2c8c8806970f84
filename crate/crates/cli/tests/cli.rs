use std::path::Path;
use std::process::{Command, Output};

fn lamegap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lamegap"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("LAMEGAP_OUT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV, skipping the schema comment and the header.
fn rows(csv: &str) -> Vec<Vec<String>> {
    let body: String = csv.lines().skip(1).collect::<Vec<_>>().join("\n");
    let mut r = csv::Reader::from_reader(body.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn rates_e1_m6_k2_has_exponent_minus_two_thirds() {
    let dir = tempfile::tempdir().unwrap();
    let o = lamegap(dir.path(), &["rates", "--set", "geometry.m=6", "--set", "boundary.k=2", "--set", "boundary.family=E1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# lamegap rates csv schema 1\ncase,side,exponent,log_power,prefactor_expr,eps,value\n"));
    let r = rows(&text);
    assert!(!r.is_empty());
    assert!(r.iter().all(|row| row[2] == "-2/3" && row[3] == "0"));
}

#[test]
fn quad_moment_on_reference_profile() {
    let dir = tempfile::tempdir().unwrap();
    let o = lamegap(dir.path(), &["quad", "--kind", "moment", "--k", "0", "--eps", "1e-4"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    let v: f64 = r[0][1].parse().unwrap();
    assert!((v - 312.159).abs() < 1e-3, "{v}");
    let exact = std::f64::consts::PI / 1e-2 - 2.0 * (1e-2f64).atan() / 1e-2;
    assert!((v - exact).abs() < 1e-6, "{v} vs {exact}");
}

#[test]
fn verify_quick_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = lamegap(dir.path(), &["verify", "--suite", "quick"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.contains("[PASS]")).count(), 5);
}

#[test]
fn reruns_reproduce_csv_bytes_and_manifest_hash() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["factors", "--provider", "leading", "--eps-list", "1e-3,1e-4", "--cramer"];
    assert_eq!(lamegap(a.path(), &args).status.code(), Some(0));
    let cfg = a.path().join("factors.config.toml");
    let mut replay: Vec<&str> = args.to_vec();
    let cfg_s = cfg.to_str().unwrap();
    replay.extend(["--config", cfg_s]);
    assert_eq!(lamegap(b.path(), &replay).status.code(), Some(0));
    for f in ["factors.csv", "factors.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let hash = |p: &Path| -> String {
        let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p.join("factors.manifest.json")).unwrap()).unwrap();
        m["config_hash"].as_str().unwrap().to_string()
    };
    assert_eq!(hash(a.path()), hash(b.path()));
}

#[test]
fn manifest_records_versions_tolerances_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(lamegap(dir.path(), &["quad", "--tol", "1e-9"]).status.code(), Some(0));
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("quad.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["tolerances"]["rel_tol"], 1e-9);
    assert_eq!(m["csv_schema_version"], 1);
    assert!(m["versions"]["lamegap-core"].is_string());
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    let outputs = m["outputs"].as_array().unwrap();
    assert!(outputs.iter().any(|o| o["file"] == "quad.csv"));
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[material]\nlambda = 1.0\nmu = -2.0\n").unwrap();
    let o = lamegap(dir.path(), &["quad", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`material`"));
    let o = lamegap(dir.path(), &["quad", "--set", "geometry.radius=2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`geometry.radius`"));
    let o = lamegap(dir.path(), &["quad", "--set", "geometry.kappa1=9"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("geometry.kappa1"));
}

#[test]
fn uncovered_case_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = lamegap(dir.path(), &["rates", "--set", "geometry.m=4", "--set", "boundary.k=3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn indefinite_factor_file_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.json");
    std::fs::write(&f, r#"{"d":2,"a":[[1,0,0],[0,-1,0],[0,0,1]],"q":[1,1,1],"provenance":"user","eps":0.01}"#).unwrap();
    let o = lamegap(dir.path(), &["factors", "--provider", "file", "--factors", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn failing_criterion_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let o = lamegap(
        dir.path(),
        &["verify", "--criteria", "9", "--set", "execution.n_layers=4", "--set", "execution.angular_res=16"],
    );
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("[FAIL]"));
}

#[test]
fn oracle_factor_file_feeds_bounds_and_expand() {
    let dir = tempfile::tempdir().unwrap();
    let disks = ["--set", "geometry.profile.kind=disks", "--set", "geometry.profile.coefficients=[0.5, 1.0]", "--set", "geometry.R=0.2"];
    let o = lamegap(dir.path(), &["factors", "--provider", "oracle", "--starred"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    let k: Vec<_> = r.iter().filter(|row| row[2] == "K").collect();
    assert_eq!(k.len(), 2);
    let file = dir.path().join("factors.json");
    let file_s = file.to_str().unwrap();

    let mut args = vec!["bounds", "--factors", file_s, "--eps", "1e-3"];
    args.extend(disks);
    let o = lamegap(dir.path(), &args);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 2);
    assert!(r.iter().all(|row| row[8] == "true"));
    let lo: f64 = r[0][7].parse().unwrap();
    let hi: f64 = r[1][7].parse().unwrap();
    assert!(0.0 < lo && lo <= hi);

    let mut args = vec!["expand", "--oracle", "--eps", "2.5e-3", "--point", "0,1.25e-3"];
    args.extend(disks);
    let o = lamegap(dir.path(), &args);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].len(), 1 + 2 + 4 + 1);
}

#[test]
fn sweep_dump_lists_nodes_and_fields() {
    let dir = tempfile::tempdir().unwrap();
    let o = lamegap(dir.path(), &["sweep", "--eps-list", "4e-2,2e-2,1e-2", "--dump"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(rows(&stdout(&o)).len(), 3);
    let dump = std::fs::read_to_string(dir.path().join("mesh_0.txt")).unwrap();
    assert!(dump.starts_with("# lamegap mesh dump v1\n"));
    assert_eq!(dump.matches("\nfield ").count(), 5);
    assert!(dir.path().join("sweep_starred.csv").exists());
}

#[test]
fn help_documents_csv_columns() {
    for (sub, col) in [("rates", "prefactor_expr"), ("quad", "error_estimate"), ("expand", "uncertainty")] {
        let o = Command::new(env!("CARGO_BIN_EXE_lamegap")).args([sub, "--help"]).output().unwrap();
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).contains(col), "{sub}");
    }
}
