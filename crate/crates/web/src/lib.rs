//! Browser bindings. Each exported function takes and returns JSON text so
//! the page needs no generated glue beyond strings.
//!
//! The plain functions are ordinary Rust and are tested natively; the
//! `#[wasm_bindgen]` wrappers only convert errors.

use selinf::io::{analyze, parse_model};
use selinf::rational::{format_fraction, int, parse_rational};
use selinf::{
    parse_experiment, sample_counts, serialize_experiment, AnalysisOptions, ExperimentData, JointTable,
    MsTestOptions, ParseOptions, SampleSpec, Treatment,
};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn options(tolerance: &str, sig: f64, witness: bool) -> Result<AnalysisOptions, String> {
    let tolerance = parse_rational(tolerance).map_err(|e| e.to_string())?;
    if tolerance < int(0) {
        return Err("tolerance must be nonnegative".into());
    }
    Ok(AnalysisOptions {
        tolerance,
        ms_test: MsTestOptions { alpha_sig: sig, bonferroni: false },
        include_witness: witness,
        ..AnalysisOptions::default()
    })
}

fn report(data: &ExperimentData, opts: &AnalysisOptions) -> Result<String, String> {
    let report = analyze(data, opts).map_err(|e| e.to_string())?;
    Ok(json!({ "report": report, "text": report.render_text() }).to_string())
}

/// Analyzes an experiment file. Returns `{"report": …, "text": …}`.
pub fn analyze_document(document: &str, tolerance: &str, sig: f64, witness: bool) -> Result<String, String> {
    let data = parse_experiment(document, &ParseOptions::default()).map_err(|e| e.to_string())?;
    report(&data, &options(tolerance, sig, witness)?)
}

/// Builds the four tables from `Pr(A=+1)` at `a, a'`, `Pr(B=+1)` at `b, b'`
/// and the four correlations `E[AB]`, then analyzes them. All inputs are
/// decimal or fraction strings.
pub fn explore(marginals: &[String], correlations: &[String]) -> Result<String, String> {
    let parse = |s: &String| parse_rational(s).map_err(|e| format!("{s:?}: {e}"));
    let m: Vec<_> = marginals.iter().map(parse).collect::<Result<_, _>>()?;
    let e: Vec<_> = correlations.iter().map(parse).collect::<Result<_, _>>()?;
    if m.len() != 4 || e.len() != 4 {
        return Err("expected four marginals and four correlations".into());
    }
    let one = int(1);
    let tables: Vec<JointTable> = Treatment::ALL
        .iter()
        .map(|t| {
            // With ±1 coding, p_pp = (1 + E[A] + E[B] + E[AB]) / 4, and so on.
            let ea = &m[t.alpha.index()] * int(2) - &one;
            let eb = &m[2 + t.beta.index()] * int(2) - &one;
            let eab = &e[t.index()];
            let quarter = |sa: i64, sb: i64| (&one + eab * int(sa * sb) + &ea * int(sa) + &eb * int(sb)) / int(4);
            JointTable::new(quarter(1, 1), quarter(1, -1), quarter(-1, 1), quarter(-1, -1)).map_err(|_| {
                format!(
                    "E[AB] = {} at ({}) is incompatible with the marginals",
                    format_fraction(eab),
                    t.key()
                )
            })
        })
        .collect::<Result<_, _>>()?;
    let data = ExperimentData::new(tables.try_into().expect("four treatments"));
    let mut value: serde_json::Value = serde_json::from_str(&report(&data, &options("0", 0.05, true)?)?).unwrap();
    value["experiment"] = serde_json::from_str(&serialize_experiment(&data)).unwrap();
    Ok(value.to_string())
}

/// Samples from a model file and analyzes the result. Returns
/// `{"experiment": …, "report": …, "text": …}`.
pub fn simulate_document(model: &str, n: u32, seed: u32, sig: f64) -> Result<String, String> {
    let model = parse_model(model).map_err(|e| e.to_string())?;
    let spec = SampleSpec::new(u64::from(n), u64::from(seed)).map_err(|e| e.to_string())?;
    let data = sample_counts(&model, &spec);
    let mut value: serde_json::Value = serde_json::from_str(&report(&data, &options("0", sig, false)?)?).unwrap();
    value["experiment"] = serde_json::from_str(&serialize_experiment(&data)).unwrap();
    Ok(value.to_string())
}

#[wasm_bindgen(js_name = analyzeDocument)]
pub fn analyze_document_js(document: &str, tolerance: &str, sig: f64, witness: bool) -> Result<String, JsError> {
    analyze_document(document, tolerance, sig, witness).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = explore)]
pub fn explore_js(marginals: Vec<String>, correlations: Vec<String>) -> Result<String, JsError> {
    explore(&marginals, &correlations).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = simulate)]
pub fn simulate_js(model: &str, n: u32, seed: u32, sig: f64) -> Result<String, JsError> {
    simulate_document(model, n, seed, sig).map_err(|e| JsError::new(&e))
}
