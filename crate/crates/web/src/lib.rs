//! Browser bindings. Each export returns a JSON document for the page to
//! plot; the plain `*_json` functions carry the logic and run natively too.

use ferrostack::experiments::{
    hysteresis_experiment, log_time_grid, loop_program, nc_hysteresis_check, reversal_experiment, scurve, Preset,
};
use ferrostack::kinetics::{kai_model, model_select, nls_model, DEFAULT_QUADRATURE_POINTS};
use ferrostack::lgd::{apply_disorder, Boundary, PolarizationGrid, SolverOptions};
use ferrostack::material::{FerroMaterial, Stack, StackConfig};
use ferrostack::units::EPSILON_0;
use ferrostack::Result;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const T_F: f64 = 10e-9;
const AREA: f64 = 1e-12;

fn material() -> FerroMaterial {
    FerroMaterial::from_targets(0.25, 1e8, 1e-10, 1.0, 30.0, T_F).expect("demo material")
}

fn stack(t_d_nm: f64, eps_d: f64) -> Result<Stack> {
    let cfg = StackConfig::mfm(material(), AREA);
    if t_d_nm > 0.0 {
        cfg.with_dielectric(eps_d, t_d_nm * 1e-9).validate()
    } else {
        cfg.validate()
    }
}

fn js(r: Result<Value>) -> std::result::Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e.to_string()))
}

fn decimate(x: &[f64], keep: usize) -> Vec<f64> {
    let step = (x.len() / keep.max(1)).max(1);
    x.iter().step_by(step).copied().collect()
}

/// MFM and MFDM P-E loops under the same triangular sweep.
pub fn loop_pair_json(t_d_nm: f64, eps_d: f64, amplitude: f64, period: f64) -> Result<Value> {
    let spec = loop_program(amplitude, period, 2, 1000);
    let mut out = serde_json::Map::new();
    for (name, s) in [("mfm", stack(0.0, eps_d)?), ("mfdm", stack(t_d_nm, eps_d)?)] {
        let opts = SolverOptions::for_material(s.material());
        let grid = PolarizationGrid::uniform(1, 2e-9, -0.25, Boundary::ZeroFlux)?;
        let r = hysteresis_experiment(&s, &grid, &spec, &opts)?;
        out.insert(
            name.into(),
            json!({
                "e": decimate(&r.curve.e, 500),
                "p": decimate(&r.curve.p_t, 500),
                "metrics": r.metrics,
            }),
        );
    }
    Ok(Value::Object(out))
}

/// Landau S-curve, the stack's quasi-static `V(P)`, and the stability verdict.
pub fn stability_json(t_d_nm: f64, eps_d: f64) -> Result<Value> {
    let s = stack(t_d_nm, eps_d)?;
    let m = s.material();
    let curve = scurve(m, 201, None);
    let t_eff = s.t_eff();
    let v: Vec<f64> = curve
        .p
        .iter()
        .zip(&curve.e)
        .map(|(&p, &e)| e * m.t_f + t_eff * (EPSILON_0 * m.eps_f * e + p) / EPSILON_0)
        .collect();
    let nc = nc_hysteresis_check(&s);
    Ok(json!({
        "p": curve.p,
        "e": curve.e,
        "v": v,
        "nc_region": curve.nc_region,
        "t_eff": t_eff,
        "verdict": nc.verdict.to_string(),
        "min_dv_dp": nc.min_dv_dp,
    }))
}

/// Constant-field reversal of a disordered MFM grid, fitted with both
/// kinetic models.
pub fn reversal_fit_json(field_mv_cm: f64, sigma_rel: f64, seed: u64) -> Result<Value> {
    let s = stack(0.0, 1.0)?;
    let opts = SolverOptions::for_material(s.material());
    let grid = PolarizationGrid::uniform(32, 2e-9, -0.25, Boundary::ZeroFlux)?;
    let grid = apply_disorder(&grid, seed, sigma_rel)?;
    let times = log_time_grid(1e-10, 1e-6, 40)?;
    let preset = Preset { amplitude: -4.0, width: 20e-9, relax: 20e-9 };
    let field = field_mv_cm * 1e8;
    let curve = reversal_experiment(&s, &grid, &[field], &times, &preset, &opts)?.remove(0);
    let sel = model_select(&curve.times, &curve.delta_p)?;
    let kai: Vec<f64> = times.iter().map(|&t| kai_model(t, &sel.kai.params)).collect();
    let nls: Vec<f64> = times.iter().map(|&t| nls_model(t, &sel.nls.params, DEFAULT_QUADRATURE_POINTS)).collect();
    Ok(json!({
        "t": curve.times,
        "delta_p": curve.delta_p,
        "kai": { "curve": kai, "params": sel.kai.params, "rms": sel.kai.rms },
        "nls": { "curve": nls, "params": sel.nls.params, "rms": sel.nls.rms },
        "selected": sel.selected.to_string(),
        "variance_ratio": sel.variance_ratio,
    }))
}

#[wasm_bindgen]
pub fn loop_pair(t_d_nm: f64, eps_d: f64, amplitude: f64, period: f64) -> std::result::Result<String, JsValue> {
    js(loop_pair_json(t_d_nm, eps_d, amplitude, period))
}

#[wasm_bindgen]
pub fn stability(t_d_nm: f64, eps_d: f64) -> std::result::Result<String, JsValue> {
    js(stability_json(t_d_nm, eps_d))
}

#[wasm_bindgen]
pub fn reversal_fit(field_mv_cm: f64, sigma_rel: f64, seed: u32) -> std::result::Result<String, JsValue> {
    js(reversal_fit_json(field_mv_cm, sigma_rel, seed as u64))
}
