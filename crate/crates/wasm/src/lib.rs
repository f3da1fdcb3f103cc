//! Bindings for the static browser demo in `www/`.

use elliptic::battery::{run_battery, BatteryOptions};
use elliptic::descriptor::parse_descriptor;
use elliptic::geom2d::{
    ahlfors_classify, fill_cycle, free_turning_number, milnor_classify, sample_curvature, LatticeCycle, LatticeLoop,
    RadialProfile,
};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Runs the obstruction battery on a TOML descriptor; returns the report as JSON.
pub fn check_descriptor_json(toml: &str, budget: usize) -> Result<String, String> {
    let d = parse_descriptor(toml).map_err(|e| e.to_string())?;
    let opts = BatteryOptions {
        budget,
        ..BatteryOptions::default()
    };
    let report = run_battery(&d, &opts).map_err(|e| e.to_string())?;
    Ok(json!({ "text": report.to_text(), "report": report }).to_string())
}

pub fn classify_surface_json(family: &str, epsilon: f64) -> Result<String, String> {
    let p = match family {
        "euclidean" => RadialProfile::Euclidean,
        "hyperbolic" => RadialProfile::Hyperbolic,
        "power-log" => RadialProfile::PowerLog { epsilon },
        "inverse-square" => RadialProfile::InverseSquare,
        other => return Err(format!("unknown family {other:?}")),
    };
    let a = ahlfors_classify(&p);
    let milnor = sample_curvature(&p, 3.0, 1e6, 400)
        .map(|k| milnor_classify(&k).map_err(|e| e.to_string()))
        .transpose()?;
    Ok(json!({ "profile": p.name(), "ahlfors": a, "milnor": milnor }).to_string())
}

/// Turning number and winding-number fill of a loop written in E/N/W/S steps.
pub fn analyze_loop_json(word: &str) -> Result<String, String> {
    let g = LatticeLoop::parse((0, 0), word).map_err(|e| e.to_string())?;
    let reduced = g.reduce();
    let turning = if reduced.is_empty() {
        None
    } else {
        Some(free_turning_number(&g).map_err(|e| e.to_string())?.to_string())
    };
    let z = LatticeCycle::from_loop(&g);
    let fill = fill_cycle(&z).map_err(|e| e.to_string())?;
    let cells: Vec<[i64; 3]> = fill.cells().iter().map(|(&(a, b), &c)| [a, b, c]).collect();
    Ok(json!({
        "vertices": g.vertices(),
        "reduced": reduced.word(),
        "turning_number": turning,
        "cells": cells,
        "mass": z.mass(),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn check_descriptor(toml: &str, budget: usize) -> Result<String, JsError> {
    check_descriptor_json(toml, budget).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn classify_surface(family: &str, epsilon: f64) -> Result<String, JsError> {
    classify_surface_json(family, epsilon).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn analyze_loop(word: &str) -> Result<String, JsError> {
    analyze_loop_json(word).map_err(|e| JsError::new(&e))
}
