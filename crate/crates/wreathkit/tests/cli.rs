use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn wk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wreathkit")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn twist_example() {
    let o = wk(&["twist", "--row", "q4-1m2z-sq", "--word", "bbb"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("bbb -> aaa -> a\n"), "{out}");
    assert!(out.contains("a in fixed family a b^n at n = 0"), "{out}");
}

#[test]
fn second_coordinate_and_prefix() {
    let o = wk(&["twist", "--row", "1", "--word", "b", "--prefix", "a", "--coordinate", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("prefix: a"));
}

#[test]
fn nucleus_match_and_mismatch() {
    let ok = wk(&["nucleus", "--row", "q4-1m2z-sq", "--verify"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("table: match"));
    let bad = wk(&["nucleus", "--row", "5", "--verify"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("mismatch: missing"));
}

#[test]
fn verify_single_table() {
    let o = wk(&["verify-tables", "--table", "2", "--table", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS 7"));
}

#[test]
fn derive_with_verify() {
    let o = wk(&["derive", "--gmap", "(1-2z)^2", "--fixed-point", "0.25,0", "--verify"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("table: match (row 1)"));
}

#[test]
fn obstruction_for_z_squared() {
    let o = wk(&["obstruction", "--row", "q4-z-sq"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("b with multiplier 1"));
}

#[test]
fn json_report() {
    let o = wk(&["--json", "portraits", "--list"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["command"], "portraits");
    assert_eq!(v["inputs"]["classes"], "13");
    assert_eq!(v["sections"].as_array().unwrap().len(), 13);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["nucleus", "--row", "99"][..],
        &["twist", "--row", "1", "--word", "b^x"],
        &["twist", "--row", "1"],
        &["derive", "--gmap", "z^3", "--fixed-point", "0,0"],
        &["derive", "--gmap", "z^2", "--fixed-point", "zero"],
        &["verify-tables"],
        &["verify-tables", "--table", "7"],
        &["fga", "--row", "1", "--coordinate", "3"],
        &["--config", "/nonexistent.conf", "portraits"],
    ] {
        let o = wk(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
}

#[test]
fn config_file_is_honoured() {
    let dir = std::env::temp_dir().join(format!("wreathkit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.conf");
    std::fs::write(&bad, "fga.bound = lots\n").unwrap();
    let o = wk(&["--config", bad.to_str().unwrap(), "portraits"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("fga.bound"));

    let default = root().join("wreathkit.conf");
    let o = wk(&["--config", default.to_str().unwrap(), "fga", "--row", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let small = dir.join("small.conf");
    std::fs::write(&small, format!("fixtures = {}\n", root().join("fixtures").display())).unwrap();
    let o = wk(&["--config", small.to_str().unwrap(), "nucleus", "--row", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn fixtures_directory_override() {
    let o = wk(&["--fixtures", root().join("fixtures").to_str().unwrap(), "portraits", "--verify-actions"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = wk(&["--fixtures", "/nonexistent", "portraits"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_is_byte_identical() {
    let a = wk(&["fga", "--row", "14"]);
    let b = wk(&["fga", "--row", "14"]);
    assert_eq!(a.stdout, b.stdout);
}
