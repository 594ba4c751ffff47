//! The three reference tables and a uniform table, shipped as experiment files.

use crate::io::{parse_experiment, ParseOptions};
use crate::model::ExperimentData;

/// Γ = 0, marginal selectivity violated.
pub const TABLE1_JSON: &str = include_str!("../fixtures/table1.json");
/// Γ = 4, marginal selectivity satisfied.
pub const TABLE2_JSON: &str = include_str!("../fixtures/table2.json");
/// Animal/sound choice data, rounded to three places; n = 81 per treatment.
pub const TABLE3_JSON: &str = include_str!("../fixtures/table3.json");
pub const UNIFORM_JSON: &str = include_str!("../fixtures/uniform.json");

pub const UNIFORM_MODEL_JSON: &str = include_str!("../fixtures/models/uniform.json");
pub const CONTAMINATED_MODEL_JSON: &str = include_str!("../fixtures/models/contaminated.json");

fn load(doc: &str) -> ExperimentData {
    parse_experiment(doc, &ParseOptions::default()).expect("bundled fixture parses")
}

pub fn table1() -> ExperimentData {
    load(TABLE1_JSON)
}

pub fn table2() -> ExperimentData {
    load(TABLE2_JSON)
}

pub fn table3() -> ExperimentData {
    load(TABLE3_JSON)
}

pub fn uniform() -> ExperimentData {
    load(UNIFORM_JSON)
}
