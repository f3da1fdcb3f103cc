use std::path::PathBuf;

use elliptic::algebra::AlgebraPresentation;
use elliptic::battery::{run_battery, BatteryOptions, Overall};
use elliptic::descriptor::{parse_descriptor, ManifoldDescriptor};
use elliptic::embed::{search_embedding, SearchOutcome};

fn load(stem: &str) -> ManifoldDescriptor {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(format!("{stem}.toml"));
    parse_descriptor(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn torus(k: usize) -> AlgebraPresentation {
    let names: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
    let gens: Vec<(&str, u32)> = names.iter().map(|s| (s.as_str(), 1)).collect();
    AlgebraPresentation::parse(&gens, &[], k as u32, &names.join("*")).unwrap()
}

const SAMPLE: [&str; 10] = [
    "t2",
    "t3",
    "s2xs2",
    "cp2_1_1",
    "cp2_2_0",
    "genus2",
    "sum4_s2xs2",
    "cp2_4_0",
    "heisenberg",
    "t3_skeleton",
];

#[test]
fn certified_embeddings_never_contradict_cohomological_checks() {
    let no_search = BatteryOptions {
        search: false,
        ..BatteryOptions::default()
    };
    for stem in SAMPLE {
        let d = load(stem);
        let outcome = search_embedding(&d.cohomology, d.n as usize, 8, 0).unwrap();
        let report = run_battery(&d, &no_search).unwrap();
        if outcome.is_certified() {
            for c in report.failing() {
                assert!(
                    c.name.starts_with("pi1"),
                    "{stem}: embedding found but {} fails",
                    c.name
                );
            }
        }
        for c in report.failing() {
            assert!(c.witness.is_some(), "{stem}: {} fails without a witness", c.name);
        }
    }
}

#[test]
fn certified_witnesses_verify_exactly_and_survive_padding() {
    for stem in ["t2", "s2xs2", "cp2_1_1", "cp2_2_0", "sum2_s2xs2"] {
        let d = load(stem);
        let SearchOutcome::Certified { morphism, .. } = search_embedding(&d.cohomology, d.n as usize, 8, 0).unwrap()
        else {
            panic!("{stem}: no certified embedding");
        };
        assert!(morphism.is_exact());
        assert!(morphism.verify_morphism(0.0).unwrap());
        assert!(morphism.certify_injective().unwrap());
        let padded = morphism.pad().unwrap().pad().unwrap();
        assert_eq!(padded.n(), d.n as usize + 2);
        assert!(padded.verify_morphism(0.0).unwrap());
        assert!(padded.certify_injective().unwrap(), "{stem}: padding lost injectivity");
    }
}

#[test]
fn tori_embed_exactly_when_they_fit() {
    for k in 1..=4 {
        for n in 1..=4 {
            let found = search_embedding(&torus(k), n, 4, 0).unwrap().is_certified();
            assert_eq!(found, k <= n, "T^{k} into Λ*ℝ^{n}");
        }
    }
}

#[test]
fn battery_is_deterministic_and_orders_overall() {
    let d = load("genus2");
    let opts = BatteryOptions::default();
    let a = run_battery(&d, &opts).unwrap();
    let b = run_battery(&d, &opts).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.overall, Overall::ExcludedWithWitness);
    assert!(a.embedding.is_none(), "search runs only when nothing failed");
    let t = run_battery(&load("t3"), &opts).unwrap();
    assert_eq!(t.overall, Overall::NoObstructionFound);
    assert_eq!(t.embedding.unwrap().status, "found-certified");
}

#[test]
fn larger_target_relaxes_dimension_bound() {
    // T³ does not fit in Λ*ℝ² but does in Λ*ℝ⁴
    let d = load("t3");
    let small = run_battery(
        &d,
        &BatteryOptions {
            target_n: Some(2),
            ..BatteryOptions::default()
        },
    )
    .unwrap();
    assert_eq!(small.overall, Overall::ExcludedWithWitness);
    let big = run_battery(
        &d,
        &BatteryOptions {
            target_n: Some(4),
            ..BatteryOptions::default()
        },
    )
    .unwrap();
    assert_eq!(big.overall, Overall::NoObstructionFound);
}
