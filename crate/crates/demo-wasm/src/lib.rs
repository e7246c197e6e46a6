//! Browser bindings: power classes, a small census, and structure constants.
//!
//! Every export takes the same comma-separated strings as the configuration
//! format and returns JSON; failures come back as `{"error": "..."}` so the
//! page never has to deal with exceptions.

use abelian_census::analysis::{delange_shape, singularity_data};
use abelian_census::config::{parse_config, RunConfig};
use abelian_census::profile::{decade_checkpoints, enumerate_census, CensusQuery};
use abelian_census::structure::{subgroup_name, StructureReport};
use abelian_census::GroupData;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest bound the page may ask for; keeps a click under a second or so.
pub const MAX_DEMO_BOUND: u64 = 1_000_000;

fn error(msg: impl ToString) -> String {
    json!({ "error": msg.to_string() }).to_string()
}

fn config(group: &str, params: &str, omega: &str, gamma: &str, bound: u64) -> Result<RunConfig, String> {
    let text = format!("group={group}\nparams={params}\nomega={omega}\ngamma={gamma}\nbound={bound}\n");
    parse_config(&text).map_err(|e| e.to_string())
}

/// Power classes of `C_{n1} x ... x C_{nk}` with their one-based indices.
#[wasm_bindgen]
pub fn classes(group: &str) -> String {
    let factors: Result<Vec<u64>, _> = group.split(',').map(|t| t.trim().parse::<u64>()).collect();
    let Ok(factors) = factors else {
        return error(format!("bad group `{group}`"));
    };
    let gd = match GroupData::new(&factors) {
        Ok(gd) => gd,
        Err(e) => return error(e),
    };
    let list: Vec<Value> = gd
        .classes
        .iter()
        .map(|c| {
            json!({
                "index": c.index + 1,
                "members": c.members.iter().map(|&m| gd.element_name(m)).collect::<Vec<_>>(),
                "subgroup": subgroup_name(&gd, c.generated),
            })
        })
        .collect();
    json!({ "order": gd.group.order(), "classes": list }).to_string()
}

/// Census counts at four checkpoints per decade up to `bound`.
#[wasm_bindgen]
pub fn census(group: &str, params: &str, omega: &str, bound: u32) -> String {
    let bound = bound as u64;
    if bound > MAX_DEMO_BOUND {
        return error(format!("the demo caps the bound at {MAX_DEMO_BOUND}"));
    }
    let cfg = match config(group, params, omega, "0", bound) {
        Ok(c) => c,
        Err(e) => return error(e),
    };
    let r = match cfg.resolve() {
        Ok(r) => r,
        Err(e) => return error(e),
    };
    let hi = (bound as f64).log10().ceil() as u32;
    let mut cps: Vec<u64> = decade_checkpoints(0, hi, 4).into_iter().filter(|&c| c < bound).collect();
    cps.push(bound);
    let q = CensusQuery::new(&r.gd, &r.x, &r.omega, bound).with_checkpoints(cps);
    match enumerate_census(q, 1) {
        Ok(t) => {
            let rows: Vec<Value> = t
                .rows
                .iter()
                .map(|row| {
                    json!({
                        "X": row.bound,
                        "fields": row.total_sur().to_string(),
                        "homs": row.total_hom().to_string(),
                        "by_gamma": row.sur.iter().map(u128::to_string).collect::<Vec<_>>(),
                        "unsliced": row.unsliced_sur.to_string(),
                    })
                })
                .collect();
            json!({ "rows": rows }).to_string()
        }
        Err(e) => error(e),
    }
}

/// Structure constants, admissible partitions and singularity data for
/// `gamma = 0..=gamma_max`.
#[wasm_bindgen]
pub fn constants(group: &str, params: &str, omega: &str, gamma_max: u32) -> String {
    let cfg = match config(group, params, omega, &format!("0..{gamma_max}"), 1) {
        Ok(c) => c,
        Err(e) => return error(e),
    };
    let r = match cfg.resolve() {
        Ok(r) => r,
        Err(e) => return error(e),
    };
    let gammas: Vec<u32> = (0..=gamma_max).collect();
    let report = match StructureReport::compute(&r.gd, &r.x, &r.omega, &gammas) {
        Ok(rep) => rep,
        Err(e) => return error(e),
    };
    let slices: Vec<Value> = gammas
        .iter()
        .map(|&g| match singularity_data(&r.gd, &r.x, &r.omega, g) {
            Ok(sd) => json!({
                "gamma": g,
                "sigma0": sd.sigma0.to_string(),
                "pole_order": sd.pole_order,
                "log_power": sd.log_power,
                "shape": delange_shape(&sd).to_string(),
                "ambiguous": sd.is_ambiguous(),
            }),
            Err(e) => json!({ "gamma": g, "error": e.to_string() }),
        })
        .collect();
    json!({ "report": report.to_text(&r.gd), "slices": slices }).to_string()
}
