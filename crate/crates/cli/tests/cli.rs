use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn vorcycle(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vorcycle"))
        .args(args)
        .env("VORCYCLE_CACHE", cache)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn with_stdin(cache: &Path, args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_vorcycle"))
        .args(args)
        .env("VORCYCLE_CACHE", cache)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

#[test]
fn perfect_counts_and_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let o = vorcycle(dir.path(), &["perfect", "--n", "3", "--group", "sl"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("1 class: A3\n"));
    let o = vorcycle(dir.path(), &["perfect", "--n", "4", "--group", "sl"]);
    assert!(stdout(&o).starts_with("2 classes: A4, D4\n"));
    assert!(dir.path().join("graph-sl-n4.json").exists());

    assert_eq!(vorcycle(dir.path(), &["perfect", "--n", "9"]).status.code(), Some(2));
    assert_eq!(vorcycle(dir.path(), &["perfect", "--n", "1"]).status.code(), Some(2));
    assert_eq!(vorcycle(dir.path(), &["perfect", "--n", "6"]).status.code(), Some(2));
    assert_eq!(vorcycle(dir.path(), &["verify", "--n", "4", "--group", "sl-parity-wrong"]).status.code(), Some(2));
}

#[test]
fn complex_output_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let o = vorcycle(dir.path(), &["complex", "--n", "2", "--group", "sl"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("differential: 0 x 1"));

    let first = vorcycle(dir.path(), &["complex", "--n", "4", "--group", "sl"]);
    assert!(stdout(&first).contains("differential: 1 x 2 (columns: A4, D4)"));
    let file = dir.path().join("complex-sl-n4.json");
    let bytes = std::fs::read(&file).unwrap();

    // From the cache, and from scratch in a fresh directory.
    let again = vorcycle(dir.path(), &["complex", "--n", "4", "--group", "sl"]);
    assert_eq!(stdout(&again), stdout(&first));
    let other = tempfile::tempdir().unwrap();
    let fresh = vorcycle(other.path(), &["complex", "--n", "4", "--group", "sl"]);
    assert_eq!(stdout(&fresh), stdout(&first));
    assert_eq!(std::fs::read(other.path().join("complex-sl-n4.json")).unwrap(), bytes);
}

#[test]
fn verify_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let o = vorcycle(dir.path(), &["verify", "--n", "4", "--group", "gl", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["report"]["kernel_dim"], 0);
    assert_eq!(v["report"]["statement"], "gl_even_vanishing");

    let o = vorcycle(dir.path(), &["verify", "--n", "4", "--group", "sl", "--check-dd", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["report"]["kernel_dim"], 1);
    assert_eq!(v["report"]["canonical"]["coefficients"], serde_json::json!(["1/120", "1/576"]));
    assert_eq!(v["dd"]["holds"], true);
    assert!(dir.path().join("verdict-sl-n4.json").exists());

    let o = vorcycle(dir.path(), &["verify", "--n", "4", "--group", "sl", "--seed-perm", "11"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("verified\n"));
}

#[test]
fn verify_gl5() {
    let dir = tempfile::tempdir().unwrap();
    let o = vorcycle(dir.path(), &["verify", "--n", "5", "--group", "gl", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["report"]["kernel_dim"], 1);
    assert_eq!(v["report"]["cells"], serde_json::json!(["A5", "D5", "P5-1"]));
}

#[test]
fn cache_corruption_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(vorcycle(dir.path(), &["perfect", "--n", "3"]).status.code(), Some(0));
    let path = dir.path().join("graph-gl-n3.json");
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, text.replacen("\"A3\"", "\"A4\"", 1)).unwrap();
    let o = vorcycle(dir.path(), &["perfect", "--n", "3"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cache corruption"));

    std::fs::write(&path, "{ not json").unwrap();
    assert_eq!(vorcycle(dir.path(), &["complex", "--n", "3"]).status.code(), Some(3));
}

#[test]
fn cache_dir_flag_and_env() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let o = vorcycle(env_dir.path(), &["perfect", "--n", "2", "--cache-dir", flag_dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(flag_dir.path().join("graph-gl-n2.json").exists());
    assert!(!env_dir.path().join("graph-gl-n2.json").exists());
    vorcycle(env_dir.path(), &["perfect", "--n", "2"]);
    assert!(env_dir.path().join("graph-gl-n2.json").exists());
}

#[test]
fn tess_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let fan = vorcycle(dir.path(), &["tess", "gen-sector-fan", "5"]);
    assert_eq!(fan.status.code(), Some(0));
    let o = with_stdin(dir.path(), &["tess", "check", "-"], &fan.stdout);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["kernel_dim"], 1);
    assert_eq!(v["kernel_basis"], serde_json::json!([["1", "1", "1", "1", "1"]]));

    // One sign flipped.
    let mut inst: serde_json::Value = serde_json::from_slice(&fan.stdout).unwrap();
    inst["facet_orbits"][2]["incidences"][1]["signed"] = serde_json::json!(1);
    let o = with_stdin(dir.path(), &["tess", "check", "-"], inst.to_string().as_bytes());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["holds"], false);

    let o = with_stdin(
        dir.path(),
        &["tess", "check", "-"],
        b"{\"ambient_dim\": 2, \"tiles\": [{\"name\": \"a\", \"stab_order\": -1}]}",
    );
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("tiles[0].stab_order") && err.contains("line 1"), "{err}");

    assert_eq!(vorcycle(dir.path(), &["tess", "check", "/nonexistent/file.json"]).status.code(), Some(2));
    assert_eq!(vorcycle(dir.path(), &["tess", "gen-sector-fan", "1"]).status.code(), Some(2));
}

#[test]
fn tess_from_voronoi_matches_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("inst.json");
    let o =
        vorcycle(dir.path(), &["tess", "from-voronoi", "--n", "4", "--group", "sl", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = vorcycle(dir.path(), &["tess", "check", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let t = json(&o);
    let v = json(&vorcycle(dir.path(), &["verify", "--n", "4", "--group", "sl", "--json"]));
    assert_eq!(t["kernel_dim"], v["report"]["kernel_dim"]);
    assert_eq!(t["holds"], v["verified"]);
}
