//! Browser bindings: parameters of a triple, the recovered form behind a
//! partition progression, and Hecke matrix orders. Every export returns JSON.

use etacong::certify::{
    build_a, hecke_matrix_on_a, matrix_orders, periodic_statement, vanishing_statement,
};
use etacong::params::{compute_params, crosscheck_tables};
use etacong::verify::{find_h, progression_series, verify_mt1};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Order searches in the page stop here rather than freezing the tab.
const DEMO_ORDER_CAP: u64 = 200_000;
const MAX_TERMS: usize = 20_000;

pub fn params_value(p: u64, ell: u64, j: u32) -> etacong::Result<Value> {
    let params = compute_params(p, ell, j)?;
    let table = crosscheck_tables(p, ell, j)?;
    Ok(json!({
        "params": params,
        "x": params.x.to_string(),
        "character": params.character.to_string(),
        "table_row": table.row.to_string(),
        "table_matches": table.matches(),
    }))
}

pub fn congruence_value(p: u64, ell: u64, j: u32, n_terms: usize) -> etacong::Result<Value> {
    let n_terms = n_terms.min(MAX_TERMS);
    let found = find_h(p, ell, j, n_terms)?;
    let check = verify_mt1(p, ell, j, n_terms)?;
    let progression = progression_series(&found.params, 24.min(n_terms))?;
    Ok(json!({
        "modulus": found.params.ell_j,
        "d": found.params.d,
        "y": found.params.y,
        "k": found.params.k,
        "h": found.describe(),
        "progression": progression.coeffs(),
        "holds": check.holds,
        "n_terms": n_terms,
    }))
}

pub fn orders_value(p: u64, ell: u64, j: u32, m: u64) -> etacong::Result<Value> {
    let params = compute_params(p, ell, j)?;
    let record = hecke_matrix_on_a(&params, m)?;
    let orders = matrix_orders(&build_a(&record)?, DEMO_ORDER_CAP)?;
    Ok(json!({
        "matrix": record.matrix.rows(),
        "modulus": record.modulus,
        "J": orders.pgl_order,
        "N": orders.gl_order,
        "c": orders.scalar,
        "vanishing": vanishing_statement(&params, m, orders.pgl_order),
        "periodic": periodic_statement(&params, m, orders.gl_order),
    }))
}

fn export(v: etacong::Result<Value>) -> Result<String, JsError> {
    v.map(|v| v.to_string())
        .map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn params(p: u32, ell: u32, j: u32) -> Result<String, JsError> {
    export(params_value(p.into(), ell.into(), j))
}

#[wasm_bindgen]
pub fn congruence(p: u32, ell: u32, j: u32, n_terms: u32) -> Result<String, JsError> {
    export(congruence_value(p.into(), ell.into(), j, n_terms as usize))
}

#[wasm_bindgen]
pub fn orders(p: u32, ell: u32, j: u32, m: u32) -> Result<String, JsError> {
    export(orders_value(p.into(), ell.into(), j, m.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exports_produce_expected_values() {
        let v = params_value(5, 13, 1).unwrap();
        assert_eq!(v["params"]["k"], 8);
        assert_eq!(v["table_matches"], true);

        let v = congruence_value(5, 7, 1, 500).unwrap();
        assert_eq!(v["h"], "2*f0 + 1*f1 + 5*f2");
        assert_eq!(v["holds"], true);

        let v = orders_value(5, 13, 1, 7).unwrap();
        assert_eq!((v["J"].as_u64(), v["N"].as_u64()), (Some(1190), Some(3570)));
        assert!(params_value(5, 5, 1).is_err());
    }
}
