//! Browser bindings for the static demo page in `www/`.
//!
//! Each export returns a flat `Float64Array`; the page knows the layout.
//! The plain functions underneath are what the native tests call.

use mediatrix::locc::random_locc;
use mediatrix::random::derive_seed;
use mediatrix::{
    bmv_scenario, fuzz_protocols, verify_equivalence, DensityState, FuzzConfig, MediatorMode,
    Protocol,
};
use wasm_bindgen::prelude::*;

fn mode(quantum: bool) -> MediatorMode {
    if quantum {
        MediatorMode::Quantum
    } else {
        MediatorMode::Classical
    }
}

/// `[N_AB, N_A|GB, N_AG|B]` per step of the three-qubit scenario, initial state first.
pub fn bmv_negativities(quantum: bool) -> Result<Vec<f64>, String> {
    let traj = bmv_scenario(mode(quantum)).run().map_err(|e| e.to_string())?;
    Ok(traj
        .records
        .iter()
        .flat_map(|r| [r.negativity_ab, r.negativity_a_gb, r.negativity_ag_b])
        .collect())
}

/// Restarts `p` from `|+⟩ ⊗ |0⟩ ⊗ |+⟩`. The fuzzer's random mixed inputs
/// almost never end up entangled even with a quantum mediator, which makes for
/// a dull comparison.
fn from_pure_inputs(p: &Protocol) -> mediatrix::Result<Protocol> {
    let legs = p.layout().subsystems();
    p.with_initial(
        DensityState::uniform_superposition(legs[0].clone())?,
        DensityState::basis(legs[1].clone(), 0)?,
        DensityState::uniform_superposition(legs[2].clone())?,
    )
}

/// Final A|B negativity of `count` random protocols with a `dg`-level mediator,
/// each started from pure product inputs. The two modes draw the same
/// channels; classical mode dephases the mediator around each interaction.
pub fn fuzz_final_negativities(seed: u32, count: usize, dg: usize, quantum: bool) -> Result<Vec<f64>, String> {
    let cfg = FuzzConfig {
        dg,
        count,
        mode: mode(quantum),
        ..FuzzConfig::default()
    };
    fuzz_protocols(u64::from(seed), &cfg)
        .map_err(|e| e.to_string())?
        .map(|case| {
            from_pure_inputs(&case.protocol)
                .and_then(|p| p.run())
                .map(|t| t.final_record().negativity_ab)
                .map_err(|e| e.to_string())
        })
        .collect()
}

/// Choi-matrix deviation between `count` random two-round qubit LOCC
/// protocols and their classical-mediator compilations.
pub fn locc_deviations(seed: u32, count: usize) -> Result<Vec<f64>, String> {
    (0..count as u64)
        .map(|i| {
            let p = random_locc(derive_seed(u64::from(seed), i), 2, 2, 2, 2).map_err(|e| e.to_string())?;
            verify_equivalence(&p)
                .map(|eq| eq.max_choi_deviation)
                .map_err(|e| e.to_string())
        })
        .collect()
}

#[wasm_bindgen(js_name = bmvNegativities)]
pub fn bmv_negativities_js(quantum: bool) -> Result<Vec<f64>, JsValue> {
    bmv_negativities(quantum).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = fuzzFinalNegativities)]
pub fn fuzz_final_negativities_js(seed: u32, count: usize, dg: usize, quantum: bool) -> Result<Vec<f64>, JsValue> {
    fuzz_final_negativities(seed, count, dg, quantum).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = loccDeviations)]
pub fn locc_deviations_js(seed: u32, count: usize) -> Result<Vec<f64>, JsValue> {
    locc_deviations(seed, count).map_err(|e| JsValue::from_str(&e))
}
