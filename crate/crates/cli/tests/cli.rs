use std::fs;
use std::process::{Command, Output};

fn mgl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mgl")).args(args).env_remove("MGL_BUDGET").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split('\t').map(String::from).collect()).collect()
}

#[test]
fn ball_row() {
    let o = mgl(&["ball", "-m", "2", "-n", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l.starts_with("2\t17")), "{}", stdout(&o));
}

#[test]
fn zm_cover_row() {
    let o = mgl(&["zm-cover", "-m", "1", "-n", "5"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l == "5\t6"), "{}", stdout(&o));
}

#[test]
fn grig_member_accepts_square() {
    let o = mgl(&["grig-member", "-w", "bb", "-omega", "0(0)*"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("accepted"));
    let o = mgl(&["grig-member", "-w", "adad", "--omega", "0(0)*"]);
    assert!(stdout(&o).contains("rejected"));
}

#[test]
fn exit_codes() {
    assert_eq!(mgl(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(mgl(&["ball", "-m", "2"]).status.code(), Some(1));
    assert_eq!(mgl(&["dehn", "-r", "ab", "-w", "a?"]).status.code(), Some(1));
    assert_eq!(mgl(&["ball", "-m", "2", "-n", "30", "--budget", "1000"]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_mgl")).args(["cyc", "-m", "2", "-n", "14"]).env("MGL_BUDGET", "100").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn refusal_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = mgl(&["cyc", "-m", "2", "-n", "20", "--budget", "10", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(!out.exists());
}

#[test]
fn json_mirrors_tsv() {
    let tsv = rows(&stdout(&mgl(&["zm-cover", "-m", "1", "-n", "3"])));
    let json: serde_json::Value = serde_json::from_str(&stdout(&mgl(&["zm-cover", "-m", "1", "-n", "3", "--format", "json"]))).unwrap();
    let cols: Vec<String> = json["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap().to_string()).collect();
    assert_eq!(cols, tsv[0]);
    assert_eq!(json["rows"].as_array().unwrap().len(), tsv.len() - 1);
}

#[test]
fn manifest_references_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = mgl(&["ps-dim", "-m", "2", "-k", "1", "-n", "4", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "ps-dim");
    let outputs = manifest["outputs"].as_object().unwrap();
    assert!(outputs.contains_key("plotdata.tsv"));
    for (name, digest) in outputs {
        let body = fs::read(dir.path().join(name)).unwrap();
        use sha2::Digest;
        let hex: String = sha2::Sha256::digest(&body).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(digest.as_str().unwrap(), hex, "{name}");
    }
    let plot = fs::read_to_string(dir.path().join("plotdata.tsv")).unwrap();
    let lower: Vec<_> = rows(&plot).into_iter().filter(|r| r[0] == "lower_bound").collect();
    assert!(!lower.is_empty());
    assert!(lower.iter().all(|r| r[2] == "1.58496"));
}

#[test]
fn ur_dim_upper_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = mgl(&["ur-dim", "-m", "2", "-q", "2", "-n", "5", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let plot = fs::read_to_string(dir.path().join("plotdata.tsv")).unwrap();
    let upper: Vec<_> = rows(&plot).into_iter().filter(|r| r[0] == "upper_bound").collect();
    assert!(!upper.is_empty() && upper.iter().all(|r| r[2] == "1.58496"), "{plot}");
}

#[test]
fn fingerprint_files_feed_distance() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(mgl(&["fingerprint", "-r", "ab", "-n", "3", "--out", a.to_str().unwrap()]).status.success());
    assert!(mgl(&["fingerprint", "-r", "aB", "-n", "3", "--out", b.to_str().unwrap()]).status.success());
    let (fa, fb) = (a.join("fingerprints.txt"), b.join("fingerprints.txt"));
    let o = mgl(&["distance", fa.to_str().unwrap(), fb.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().count() >= 2);
}

#[test]
fn dehn_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = mgl(&["dehn", "-r", "ab", "-w", "bAbaBB", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let trace: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("trace.json")).unwrap()).unwrap();
    assert_eq!(trace["accepted"], true);
    assert_eq!(trace["steps"].as_array().unwrap().len(), 2);
}

#[test]
fn float_format_is_six_significant() {
    let o = mgl(&["zm-dim", "-m", "1", "-n", "20"]);
    assert!(stdout(&o).contains("0.219616"), "{}", stdout(&o));
}
