use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
}

fn elliptic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elliptic"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn torus_passes() {
    let o = elliptic(&["check", corpus("t4.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("overall: no-obstruction-found"));
    assert!(out.contains("found-certified"));
}

#[test]
fn genus_two_is_excluded_with_witness() {
    let o = elliptic(&["check", corpus("genus2.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("overall: excluded-with-witness"));
    assert!(out.contains("[fail] euler-characteristic"), "{out}");
    assert!(out.contains("witness:"));
}

#[test]
fn structured_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = elliptic(&[
        "check",
        corpus("heisenberg.toml").to_str().unwrap(),
        "--format",
        "structured",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["overall"], "excluded-with-witness");
    assert!(v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["verdict"] == "fail" && c["witness"].is_string()));
}

#[test]
fn malformed_descriptor_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        "name = \"bad\"\nn = 2\n[cohomology]\ngenerators = [{ name = \"x\", degree = 1 }]\nrelations = []\nfundamental_class = \"x*\"\n[pi1]\nkind = \"finite\"\n",
    )
    .unwrap();
    let o = elliptic(&["check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 6"), "{err}");
    assert_eq!(elliptic(&["check"]).status.code(), Some(2));
}

#[test]
fn power_log_surface_is_hyperbolic() {
    let o = elliptic(&["surface", "--family", "power-log", "--epsilon", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("classification: hyperbolic"));
    let o = elliptic(&["surface", "--family", "spiky-plane"]);
    assert!(stdout(&o).contains("classification: parabolic"), "{}", stdout(&o));
}

#[test]
fn surface_from_sample_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("samples.txt");
    let body: String = (0..400)
        .map(|i| {
            let r = (1.0 + 11.0 * i as f64 / 399.0).exp();
            format!("{r} {}\n", 2.0 * std::f64::consts::PI * r)
        })
        .collect();
    std::fs::write(&path, format!("# r L\n{body}")).unwrap();
    let o = elliptic(&["surface", "--samples", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("classification: parabolic"), "{}", stdout(&o));
}

#[test]
fn lie_subcommand_reports_growth() {
    let o = elliptic(&["lie", "--family", "heisenberg", "--n", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains('4'));
    // nonabelian nilpotent groups are excluded in every dimension
    let o = elliptic(&["lie", "--brackets", "1,2,3", "--dim", "3", "--n", "4"]);
    assert_eq!(o.status.code(), Some(1));
    let o = elliptic(&["lie", "--family", "abelian", "--dim", "3", "--n", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn map_subcommand_runs() {
    let o = elliptic(&[
        "map",
        "--map",
        "radial-stretch",
        "--alpha",
        "2",
        "--samples",
        "2000",
        "--radii",
        "10,20",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("jacobian floor"));
}

#[test]
fn corpus_golden_detects_drift() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["t2.toml", "genus2.toml"] {
        std::fs::copy(corpus(f), dir.path().join(f)).unwrap();
    }
    let table = stdout(&elliptic(&["corpus", dir.path().to_str().unwrap()]));
    let golden = dir.path().join("golden.txt");
    std::fs::write(&golden, &table).unwrap();
    let o = elliptic(&[
        "corpus",
        dir.path().to_str().unwrap(),
        "--golden",
        golden.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    std::fs::write(&golden, table.replace("excluded", "passed")).unwrap();
    let o = elliptic(&[
        "corpus",
        dir.path().to_str().unwrap(),
        "--golden",
        golden.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}
