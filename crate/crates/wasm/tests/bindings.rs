use elliptic_wasm::{analyze_loop_json, check_descriptor_json, classify_surface_json};
use serde_json::Value;

const T2: &str = r#"
name = "torus"
n = 2
[cohomology]
generators = [{ name = "x", degree = 1 }, { name = "y", degree = 1 }]
relations = []
fundamental_class = "x*y"
[pi1]
kind = "free-abelian"
rank = 2
"#;

#[test]
fn torus_descriptor_round_trip() {
    let v: Value = serde_json::from_str(&check_descriptor_json(T2, 4).unwrap()).unwrap();
    assert_eq!(v["report"]["overall"], "no-obstruction-found");
    assert!(v["text"].as_str().unwrap().contains("torus"));
    assert!(check_descriptor_json("n = ", 4).unwrap_err().contains("line"));
}

#[test]
fn surface_families() {
    let v: Value = serde_json::from_str(&classify_surface_json("hyperbolic", 0.0).unwrap()).unwrap();
    assert_eq!(v["ahlfors"]["verdict"], "hyperbolic");
    assert!(classify_surface_json("torus", 0.0).is_err());
}

#[test]
fn loop_fill_and_turning() {
    let v: Value = serde_json::from_str(&analyze_loop_json("EENNWWSS").unwrap()).unwrap();
    assert_eq!(v["turning_number"], "1");
    assert_eq!(v["cells"].as_array().unwrap().len(), 4);
    assert!(analyze_loop_json("EN").is_err());
}
