//! Experiment files, model files and the analysis report.
//!
//! Experiment files are JSON. Each of the four treatment blocks (`"a,b"`,
//! `"a,b'"`, `"a',b"`, `"a',b'"`) holds probabilities under the cell keys
//! `pp, pm, mp, mm` (decimal or fraction strings, or JSON numbers), a
//! `counts` object with integer cells and an optional total `n`, or both:
//!
//! ```json
//! {
//!   "treatments": {
//!     "a,b":   { "pp": ".25", "pm": ".25", "mp": ".25", "mm": ".25" },
//!     "a,b'":  { "counts": { "pp": 5, "pm": 5, "mp": 5, "mm": 5, "n": 20 } },
//!     "a',b":  { "pp": "1/4", "pm": "1/4", "mp": "1/4", "mm": "1/4" },
//!     "a',b'": { "pp": 0.25, "pm": 0.25, "mp": 0.25, "mm": 0.25 }
//!   }
//! }
//! ```
//!
//! Optional top-level keys: `renormalize` (accept cell sums within 0.01 of
//! one and rescale), `counts_independent` (counts and probabilities were
//! supplied separately and need not agree) and `labels`. The schemas live
//! in `schema/` next to this crate's manifest.

use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::chsh::{compute_gamma, ChshReport};
use crate::error::{Error, Result};
use crate::feasibility::{fine_criterion, solve_feasibility, Certificate, FeasibilityResult, HiddenState, HiddenStateDistribution};
use crate::model::{CountTable, ExperimentData, Factor, JointTable, Labels, Level, LevelLabels, Probability, Sign, Treatment};
use crate::rational::{format_decimal, format_fraction, parse_rational, ratio};
use crate::selectivity::{check_marginal_selectivity, test_marginal_selectivity, MarginalComparison, MarginalReport, MsTestOptions, MsTestResult, Response};
use crate::simulate::{ContaminatedModel, Model};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Rescale blocks whose cells sum to within 0.01 of one.
    pub renormalize: bool,
}

fn renormalize_window() -> BigRational {
    ratio(1, 100)
}

pub fn parse_experiment(document: &str, options: &ParseOptions) -> Result<ExperimentData> {
    let root: Value = serde_json::from_str(document)?;
    let root = root
        .as_object()
        .ok_or_else(|| Error::Malformed("top level must be an object".into()))?;
    let renormalize = options.renormalize || bool_field(root, "renormalize")?;
    let independent = bool_field(root, "counts_independent")?;
    let blocks = root
        .get("treatments")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::Malformed("missing \"treatments\" object".into()))?;
    for key in blocks.keys() {
        if Treatment::from_key(key).is_none() {
            return Err(Error::Malformed(format!("unknown treatment block {key:?}")));
        }
    }

    let mut tables = Vec::with_capacity(4);
    let mut counts = Vec::with_capacity(4);
    for t in Treatment::ALL {
        let block = blocks
            .iter()
            .find(|(k, _)| Treatment::from_key(k) == Some(t))
            .map(|(_, v)| v)
            .ok_or_else(|| Error::MissingTreatment(t.key()))?;
        let (table, count) = parse_block(t, block, renormalize, independent)?;
        tables.push(table);
        counts.push(count);
    }

    let tables: [JointTable; 4] = tables.try_into().expect("four treatments");
    let mut data = ExperimentData::new(tables);
    match counts.iter().filter(|c| c.is_some()).count() {
        0 => {}
        4 => {
            let counts: [CountTable; 4] = std::array::from_fn(|i| counts[i].unwrap());
            data = data.with_counts(counts, independent)?;
        }
        _ => {
            return Err(Error::Malformed(
                "counts must be given for all four treatments or none".into(),
            ))
        }
    }
    if let Some(labels) = root.get("labels") {
        data = data.with_labels(parse_labels(labels)?);
    }
    Ok(data)
}

fn bool_field(obj: &Map<String, Value>, key: &str) -> Result<bool> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(false),
        Some(Value::Bool(b)) => Ok(*b),
        Some(_) => Err(Error::Malformed(format!("{key:?} must be a boolean"))),
    }
}

fn bad_cell(t: Treatment, cell: &str, reason: impl Into<String>) -> Error {
    Error::BadCell {
        treatment: t.key(),
        cell: cell.to_string(),
        reason: reason.into(),
    }
}

fn parse_block(
    t: Treatment,
    block: &Value,
    renormalize: bool,
    independent: bool,
) -> Result<(JointTable, Option<CountTable>)> {
    let block = block
        .as_object()
        .ok_or_else(|| Error::Malformed(format!("treatment {} must be an object", t.key())))?;
    for key in block.keys() {
        if !JointTable::CELL_KEYS.contains(&key.as_str()) && key != "counts" {
            return Err(bad_cell(t, key, "unknown key"));
        }
    }

    let counts = block.get("counts").map(|c| parse_counts(t, c)).transpose()?;
    let has_probabilities = JointTable::CELL_KEYS.iter().any(|k| block.contains_key(*k));

    let table = if has_probabilities {
        let cells = JointTable::CELL_KEYS
            .map(|k| block.get(k).ok_or_else(|| bad_cell(t, k, "missing")).and_then(|v| parse_probability(t, k, v)));
        let [pp, pm, mp, mm] = cells;
        let cells = [pp?, pm?, mp?, mm?];
        let table = normalize_cells(t, cells, renormalize)?;
        if let Some(c) = &counts {
            if !independent && JointTable::from_counts(c)? != table {
                return Err(Error::ConflictingData(t.key()));
            }
        }
        table
    } else {
        let c = counts.as_ref().ok_or_else(|| bad_cell(t, "pp", "block has neither probabilities nor counts"))?;
        JointTable::from_counts(c)?
    };
    Ok((table, counts))
}

fn parse_probability(t: Treatment, key: &str, value: &Value) -> Result<BigRational> {
    let text = match value {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => return Err(bad_cell(t, key, "expected a number or numeric string")),
    };
    let p = parse_rational(&text).map_err(|_| bad_cell(t, key, format!("not a number: {text:?}")))?;
    if p.is_negative() {
        return Err(bad_cell(t, key, "negative probability"));
    }
    if p > BigRational::one() {
        return Err(bad_cell(t, key, "probability above 1"));
    }
    Ok(p)
}

fn normalize_cells(t: Treatment, cells: [BigRational; 4], renormalize: bool) -> Result<JointTable> {
    let sum: BigRational = cells.iter().sum();
    let sum_error = || Error::SumNotOne {
        treatment: t.key(),
        sum: format_fraction(&sum),
    };
    let cells = if sum.is_one() {
        cells
    } else if renormalize && !sum.is_zero() && (&sum - BigRational::one()).abs() <= renormalize_window() {
        cells.map(|c| c / &sum)
    } else {
        return Err(sum_error());
    };
    let [pp, pm, mp, mm] = cells;
    JointTable::new(pp, pm, mp, mm).map_err(|_| sum_error())
}

fn parse_counts(t: Treatment, value: &Value) -> Result<CountTable> {
    let obj = value
        .as_object()
        .ok_or_else(|| bad_cell(t, "counts", "must be an object"))?;
    let get = |k: &str| -> Result<u64> {
        let v = obj.get(k).ok_or_else(|| bad_cell(t, k, "missing count"))?;
        v.as_u64()
            .ok_or_else(|| bad_cell(t, k, format!("count must be a nonnegative integer, got {v}")))
    };
    for key in obj.keys() {
        if !JointTable::CELL_KEYS.contains(&key.as_str()) && key != "n" {
            return Err(bad_cell(t, key, "unknown count key"));
        }
    }
    let counts = CountTable::new(get("pp")?, get("pm")?, get("mp")?, get("mm")?);
    if obj.contains_key("n") && get("n")? != counts.total() {
        return Err(bad_cell(t, "n", format!("cells sum to {}", counts.total())));
    }
    if counts.total() == 0 {
        return Err(Error::ZeroTotal);
    }
    Ok(counts)
}

fn parse_labels(value: &Value) -> Result<Labels> {
    let bad = |msg: &str| Error::Malformed(format!("labels: {msg}"));
    let obj = value.as_object().ok_or_else(|| bad("must be an object"))?;
    let level = |factor: Factor, l: Level| -> Result<LevelLabels> {
        let key = match factor {
            Factor::Alpha => "alpha",
            Factor::Beta => "beta",
        };
        let Some(entry) = obj.get(key).and_then(|f| f.get(l.name(factor))) else {
            return Ok(LevelLabels::default());
        };
        let name = match entry.get("name") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) if !s.is_empty() => Some(s.clone()),
            Some(_) => return Err(bad("level name must be a nonempty string")),
        };
        let alternatives = match entry.get("alternatives") {
            None | Some(Value::Null) => None,
            Some(Value::Array(a)) => match &a[..] {
                [Value::String(x), Value::String(y)] if !x.is_empty() && !y.is_empty() => {
                    Some([x.clone(), y.clone()])
                }
                _ => return Err(bad("alternatives must be two nonempty strings")),
            },
            Some(_) => return Err(bad("alternatives must be an array")),
        };
        Ok(LevelLabels { level: name, alternatives })
    };
    Ok(Labels {
        alpha: [level(Factor::Alpha, Level::First)?, level(Factor::Alpha, Level::Second)?],
        beta: [level(Factor::Beta, Level::First)?, level(Factor::Beta, Level::Second)?],
    })
}

fn labels_to_json(labels: &Labels) -> Value {
    let factor = |f: Factor, levels: &[LevelLabels; 2]| {
        let mut m = Map::new();
        for l in Level::BOTH {
            let entry = &levels[l.index()];
            let mut e = Map::new();
            if let Some(name) = &entry.level {
                e.insert("name".into(), json!(name));
            }
            if let Some(alts) = &entry.alternatives {
                e.insert("alternatives".into(), json!(alts));
            }
            if !e.is_empty() {
                m.insert(l.name(f).into(), Value::Object(e));
            }
        }
        Value::Object(m)
    };
    json!({ "alpha": factor(Factor::Alpha, &labels.alpha), "beta": factor(Factor::Beta, &labels.beta) })
}

/// Lossless JSON form of `data`; probabilities are fraction strings.
pub fn serialize_experiment(data: &ExperimentData) -> String {
    let mut blocks = Map::new();
    for t in Treatment::ALL {
        let mut block = Map::new();
        for (key, p) in JointTable::CELL_KEYS.iter().zip(data.table(t).cells()) {
            block.insert((*key).into(), json!(p.to_string()));
        }
        if let Some(c) = data.count(t) {
            block.insert(
                "counts".into(),
                json!({ "pp": c.n_pp, "pm": c.n_pm, "mp": c.n_mp, "mm": c.n_mm, "n": c.total() }),
            );
        }
        blocks.insert(t.key(), Value::Object(block));
    }
    let mut root = Map::new();
    root.insert("treatments".into(), Value::Object(blocks));
    if data.counts().is_some() && data.counts_independent() {
        root.insert("counts_independent".into(), json!(true));
    }
    if let Some(labels) = data.labels() {
        root.insert("labels".into(), labels_to_json(labels));
    }
    serde_json::to_string_pretty(&Value::Object(root)).expect("JSON values serialize")
}

/// Model files:
///
/// ```json
/// { "hidden": { "++++": "1/2", "----": "1/2" },
///   "eta": "1/10",
///   "cross_map": { "a,b": "++", "a,b'": "-+", "a',b": "+-", "a',b'": "--" } }
/// ```
///
/// `hidden` may also be the string `"uniform"`; hidden-state keys list
/// `A(a) A(a') B(b) B(b')` and omitted states have weight zero. Without
/// `eta` and `cross_map` the model is selective.
pub fn parse_model(document: &str) -> Result<Model> {
    let root: Value = serde_json::from_str(document)?;
    let bad = |msg: String| Error::InvalidModel(msg);
    let root = root.as_object().ok_or_else(|| bad("top level must be an object".into()))?;
    for key in root.keys() {
        if !["hidden", "eta", "cross_map"].contains(&key.as_str()) {
            return Err(bad(format!("unknown key {key:?}")));
        }
    }
    let hidden = match root.get("hidden") {
        Some(Value::String(s)) if s == "uniform" => HiddenStateDistribution::uniform(),
        Some(Value::Object(weights)) => {
            let mut w = vec![BigRational::zero(); HiddenState::COUNT];
            for (state, value) in weights {
                let state: HiddenState = state.parse()?;
                let text = match value {
                    Value::String(s) => s.clone(),
                    Value::Number(n) => n.to_string(),
                    _ => return Err(bad(format!("weight of {state} must be numeric"))),
                };
                w[state.index()] = parse_rational(&text)?;
            }
            HiddenStateDistribution::new(w)?
        }
        _ => return Err(bad("\"hidden\" must be \"uniform\" or an object of weights".into())),
    };

    match (root.get("eta"), root.get("cross_map")) {
        (None, None) => Ok(Model::Selective(hidden)),
        (Some(eta), Some(Value::Object(map))) => {
            let eta_text = match eta {
                Value::String(s) => s.clone(),
                Value::Number(n) => n.to_string(),
                _ => return Err(bad("\"eta\" must be numeric".into())),
            };
            let eta = Probability::new(parse_rational(&eta_text)?)?;
            let pair = |t: Treatment| -> Result<(Sign, Sign)> {
                let v = map
                    .iter()
                    .find(|(k, _)| Treatment::from_key(k) == Some(t))
                    .and_then(|(_, v)| v.as_str())
                    .ok_or_else(|| bad(format!("cross_map needs a string for {}", t.key())))?;
                let signs: Vec<Sign> = v.chars().map(Sign::from_symbol).collect::<Option<_>>().unwrap_or_default();
                match signs[..] {
                    [a, b] => Ok((a, b)),
                    _ => Err(bad(format!("cross_map entry {v:?} must be two signs like \"+-\""))),
                }
            };
            let cross_map = [pair(Treatment::ALL[0])?, pair(Treatment::ALL[1])?, pair(Treatment::ALL[2])?, pair(Treatment::ALL[3])?];
            Ok(Model::Contaminated(ContaminatedModel { hidden, eta, cross_map }))
        }
        _ => Err(bad("\"eta\" and \"cross_map\" must be given together".into())),
    }
}

pub fn serialize_model(model: &Model) -> String {
    let hidden: Map<String, Value> = model
        .hidden()
        .support()
        .map(|(s, w)| (s.to_string(), json!(w.to_string())))
        .collect();
    let mut root = Map::new();
    root.insert("hidden".into(), Value::Object(hidden));
    if let Model::Contaminated(c) = model {
        root.insert("eta".into(), json!(c.eta.to_string()));
        let map: Map<String, Value> = Treatment::ALL
            .iter()
            .zip(&c.cross_map)
            .map(|(t, (a, b))| (t.key(), json!(format!("{}{}", a.symbol(), b.symbol()))))
            .collect();
        root.insert("cross_map".into(), Value::Object(map));
    }
    serde_json::to_string_pretty(&Value::Object(root)).expect("JSON values serialize")
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    /// Marginal-selectivity tolerance; zero means exact.
    pub tolerance: BigRational,
    pub ms_test: MsTestOptions,
    pub include_witness: bool,
    /// Decimal places for the rounded Γ.
    pub decimal_places: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            tolerance: BigRational::zero(),
            ms_test: MsTestOptions::default(),
            include_witness: false,
            decimal_places: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreatmentValue {
    pub treatment: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternValue {
    pub pattern: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshSection {
    pub expectations: Vec<TreatmentValue>,
    pub sums: Vec<PatternValue>,
    pub gamma: String,
    pub gamma_decimal: String,
    pub argmax_patterns: Vec<String>,
    pub classification: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub response: String,
    pub level: String,
    pub p_under_first: String,
    pub p_under_second: String,
    pub delta: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalSection {
    pub tolerance: String,
    pub satisfied: bool,
    pub max_delta: String,
    pub comparisons: Vec<ComparisonEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestEntry {
    #[serde(flatten)]
    pub comparison: ComparisonEntry,
    #[serde(with = "extended_f64")]
    pub z: f64,
    pub p_value: f64,
    pub reject: bool,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSection {
    pub alpha_sig: f64,
    pub bonferroni: bool,
    pub effective_alpha: f64,
    pub results: Vec<TestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertificateEntry {
    MarginalSelectivity(ComparisonEntry),
    ChshFacet { pattern: String, value: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessEntry {
    pub state: String,
    pub weight: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilitySection {
    pub verdict: String,
    pub certificate: Option<CertificateEntry>,
    pub violations: Vec<CertificateEntry>,
    /// Support of the witness; present only when requested.
    pub witness: Option<Vec<WitnessEntry>>,
}

/// Machine-readable analysis of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub chsh: ChshSection,
    pub marginal_selectivity: MarginalSection,
    pub statistical_tests: Option<TestSection>,
    pub feasibility: FeasibilitySection,
    pub fine_criterion: bool,
    /// Display labels, echoed for renderers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Value>,
}

mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Str(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("bad number {s:?}"))),
        }
    }
}

fn response_name(r: Response) -> &'static str {
    match r {
        Response::A => "A",
        Response::B => "B",
    }
}

fn comparison_entry(c: &MarginalComparison) -> ComparisonEntry {
    ComparisonEntry {
        response: response_name(c.response).into(),
        level: c.level.name(c.response.own_factor()).into(),
        p_under_first: c.p_under_first.to_string(),
        p_under_second: c.p_under_second.to_string(),
        delta: c.delta.to_string(),
    }
}

fn certificate_entry(c: &Certificate) -> CertificateEntry {
    match c {
        Certificate::MarginalSelectivity(m) => CertificateEntry::MarginalSelectivity(comparison_entry(m)),
        Certificate::ChshFacet { pattern, value } => CertificateEntry::ChshFacet {
            pattern: pattern.to_string(),
            value: format_fraction(value),
        },
    }
}

fn chsh_section(r: &ChshReport, places: usize) -> ChshSection {
    ChshSection {
        expectations: Treatment::ALL
            .iter()
            .zip(&r.expectations)
            .map(|(t, e)| TreatmentValue { treatment: t.key(), value: format_fraction(e) })
            .collect(),
        sums: r
            .sums
            .iter()
            .map(|(p, v)| PatternValue { pattern: p.to_string(), value: format_fraction(v) })
            .collect(),
        gamma: format_fraction(&r.gamma),
        gamma_decimal: r.gamma_decimal(places),
        argmax_patterns: r.argmax_patterns.iter().map(ToString::to_string).collect(),
        classification: r.classification.as_str().into(),
    }
}

fn marginal_section(r: &MarginalReport) -> MarginalSection {
    MarginalSection {
        tolerance: format_fraction(&r.tolerance),
        satisfied: r.satisfied,
        max_delta: r.max_delta.to_string(),
        comparisons: r.comparisons.iter().map(comparison_entry).collect(),
    }
}

fn test_section(results: &[MsTestResult], options: &MsTestOptions) -> TestSection {
    TestSection {
        alpha_sig: options.alpha_sig,
        bonferroni: options.bonferroni,
        effective_alpha: options.effective_alpha(),
        results: results
            .iter()
            .map(|r| TestEntry {
                comparison: comparison_entry(&r.comparison),
                z: r.z_statistic,
                p_value: r.p_value,
                reject: r.reject,
                degenerate: r.degenerate,
            })
            .collect(),
    }
}

fn feasibility_section(r: &FeasibilityResult, include_witness: bool) -> FeasibilitySection {
    match r {
        FeasibilityResult::Feasible { witness } => FeasibilitySection {
            verdict: "feasible".into(),
            certificate: None,
            violations: Vec::new(),
            witness: include_witness.then(|| witness_entries(witness)),
        },
        FeasibilityResult::Infeasible { certificate, violations } => FeasibilitySection {
            verdict: "infeasible".into(),
            certificate: Some(certificate_entry(certificate)),
            violations: violations.iter().map(certificate_entry).collect(),
            witness: None,
        },
    }
}

pub fn witness_entries(w: &HiddenStateDistribution) -> Vec<WitnessEntry> {
    w.support()
        .map(|(s, p)| WitnessEntry { state: s.to_string(), weight: p.to_string() })
        .collect()
}

/// Runs every analysis. The statistical test runs only when counts are present.
pub fn analyze(data: &ExperimentData, options: &AnalysisOptions) -> Result<AnalysisReport> {
    let chsh = compute_gamma(data);
    let ms = check_marginal_selectivity(data, &options.tolerance);
    let tests = match data.counts() {
        Some(_) => Some(test_section(&test_marginal_selectivity(data, &options.ms_test)?, &options.ms_test)),
        None => None,
    };
    let feasibility = solve_feasibility(data);
    Ok(AnalysisReport {
        chsh: chsh_section(&chsh, options.decimal_places),
        marginal_selectivity: marginal_section(&ms),
        statistical_tests: tests,
        feasibility: feasibility_section(&feasibility, options.include_witness),
        fine_criterion: fine_criterion(data),
        labels: data.labels().map(labels_to_json),
    })
}

impl AnalysisReport {
    pub fn is_feasible(&self) -> bool {
        self.feasibility.verdict == "feasible"
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Plain-text rendering for terminals.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let dec = |s: &str| parse_rational(s).map(|v| format_decimal(&v, 3)).unwrap_or_else(|_| s.to_string());

        let _ = writeln!(out, "CHSH");
        for e in &self.chsh.expectations {
            let _ = writeln!(out, "  E[AB] at ({:<6}) = {:>7}", e.treatment, dec(&e.value));
        }
        let _ = writeln!(
            out,
            "  Gamma = {} ({})  attained by {}",
            self.chsh.gamma_decimal,
            self.chsh.gamma,
            self.chsh.argmax_patterns.join(" ")
        );
        let _ = writeln!(out, "  classification: {}", self.chsh.classification.replace('_', " "));

        let ms = &self.marginal_selectivity;
        let _ = writeln!(
            out,
            "Marginal selectivity (tolerance {}): {}",
            ms.tolerance,
            if ms.satisfied { "satisfied" } else { "violated" }
        );
        for c in &ms.comparisons {
            let _ = writeln!(
                out,
                "  Pr({}=+1) at {:<2}: {} vs {}  delta {}",
                c.response,
                c.level,
                dec(&c.p_under_first),
                dec(&c.p_under_second),
                dec(&c.delta)
            );
        }

        if let Some(t) = &self.statistical_tests {
            let _ = writeln!(
                out,
                "Two-proportion z-tests (alpha {}{})",
                t.effective_alpha,
                if t.bonferroni { ", Bonferroni" } else { "" }
            );
            for r in &t.results {
                let _ = writeln!(
                    out,
                    "  {} at {:<2}: z = {:>7.3}  p = {:.3e}  {}{}",
                    r.comparison.response,
                    r.comparison.level,
                    r.z,
                    r.p_value,
                    if r.reject { "reject" } else { "retain" },
                    if r.degenerate { " (degenerate)" } else { "" }
                );
            }
        }

        let f = &self.feasibility;
        let _ = writeln!(
            out,
            "Selective representation: {}",
            if f.verdict == "feasible" { "exists" } else { "impossible" }
        );
        if let Some(c) = &f.certificate {
            let _ = writeln!(out, "  certificate: {}", c);
            for v in f.violations.iter().skip(1) {
                let _ = writeln!(out, "  also:        {}", v);
            }
        }
        if let Some(w) = &f.witness {
            let _ = writeln!(out, "  witness (A(a) A(a') B(b) B(b')):");
            for e in w {
                let _ = writeln!(out, "    {}  {}", e.state, e.weight);
            }
        }
        out
    }
}

impl std::fmt::Display for CertificateEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CertificateEntry::MarginalSelectivity(m) => write!(
                f,
                "Pr({}=+1) at {} is {} vs {}",
                m.response, m.level, m.p_under_first, m.p_under_second
            ),
            CertificateEntry::ChshFacet { pattern, value } => write!(f, "CHSH sum {pattern} = {value} > 2"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::int;

    const UNIFORM: &str = r#"{"treatments": {
        "a,b": {"pp": ".25", "pm": ".25", "mp": ".25", "mm": ".25"},
        "a,b'": {"pp": "1/4", "pm": "1/4", "mp": "1/4", "mm": "1/4"},
        "a',b": {"pp": 0.25, "pm": 0.25, "mp": 0.25, "mm": 0.25},
        "a',b'": {"pp": "25/100", "pm": "2.5e-1", "mp": ".250", "mm": "1/4"}
    }}"#;

    const COUNTED: &str = r#"{"treatments": {
        "a,b": {"counts": {"pp": 3, "pm": 3, "mp": 3, "mm": 3}},
        "a,b'": {"counts": {"pp": 1, "pm": 1, "mp": 1, "mm": 1, "n": 4}},
        "a',b": {"pp": "1/4", "pm": "1/4", "mp": "1/4", "mm": "1/4", "counts": {"pp": 2, "pm": 2, "mp": 2, "mm": 2}},
        "a',b'": {"counts": {"pp": 5, "pm": 5, "mp": 5, "mm": 5}}
    }}"#;

    fn with_block(block: &str) -> String {
        format!(
            r#"{{"treatments": {{
                "a,b": {block},
                "a,b'": {{"pp": ".25", "pm": ".25", "mp": ".25", "mm": ".25"}},
                "a',b": {{"pp": ".25", "pm": ".25", "mp": ".25", "mm": ".25"}},
                "a',b'": {{"pp": ".25", "pm": ".25", "mp": ".25", "mm": ".25"}}
            }}}}"#
        )
    }

    fn parse(doc: &str) -> Result<ExperimentData> {
        parse_experiment(doc, &ParseOptions::default())
    }

    #[test]
    fn parses_uniform_in_mixed_notations() {
        let data = parse(UNIFORM).unwrap();
        assert_eq!(data.tables(), ExperimentData::uniform().tables());
        assert!(data.counts().is_none());
    }

    #[test]
    fn parses_count_blocks() {
        let data = parse(COUNTED).unwrap();
        assert_eq!(data.tables(), ExperimentData::uniform().tables());
        assert_eq!(data.count(Treatment::ALL[3]), Some(&CountTable::new(5, 5, 5, 5)));
        assert!(!data.counts_independent());
    }

    #[test]
    fn table3_fixture_cells() {
        let data = fixtures::table3();
        let t = data.table(Treatment::ALL[3]);
        assert_eq!(t, &JointTable::from_parts([148, 86, 99, 667], 1000).unwrap());
        assert!(data.counts_independent());
        assert_eq!(data.count(Treatment::ALL[0]), Some(&CountTable::new(4, 51, 21, 5)));
        let labels = data.labels().unwrap();
        assert_eq!(labels.alpha[1].alternatives.as_ref().unwrap()[1], "Cat");
    }

    #[test]
    fn table3_needs_renormalize_flag() {
        let doc = fixtures::TABLE3_JSON.replace("\"renormalize\": true,", "");
        assert!(!doc.contains("renormalize"));
        match parse(&doc) {
            Err(Error::SumNotOne { treatment, sum }) => {
                assert_eq!(treatment, "a',b");
                assert_eq!(sum, "999/1000");
            }
            other => panic!("{other:?}"),
        }
        let data = parse_experiment(&doc, &ParseOptions { renormalize: true }).unwrap();
        assert_eq!(&data, &fixtures::table3());
    }

    #[test]
    fn renormalize_window_is_one_percent() {
        let doc = with_block(r#"{"pp": ".25", "pm": ".25", "mp": ".25", "mm": ".24"}"#);
        let opts = ParseOptions { renormalize: true };
        let t = parse_experiment(&doc, &opts).unwrap();
        assert_eq!(t.table(Treatment::ALL[0]), &JointTable::from_parts([25, 25, 25, 24], 99).unwrap());
        let doc = with_block(r#"{"pp": ".25", "pm": ".25", "mp": ".25", "mm": ".23"}"#);
        assert!(matches!(parse_experiment(&doc, &opts), Err(Error::SumNotOne { .. })));
    }

    #[test]
    fn missing_treatment() {
        let doc = r#"{"treatments": {"a,b": {"pp": "1", "pm": "0", "mp": "0", "mm": "0"}}}"#;
        assert!(matches!(parse(doc), Err(Error::MissingTreatment(k)) if k == "a,b'"));
    }

    #[test]
    fn bad_cells() {
        for block in [
            r#"{"pp": "x", "pm": ".25", "mp": ".25", "mm": ".25"}"#,
            r#"{"pp": "-.25", "pm": ".75", "mp": ".25", "mm": ".25"}"#,
            r#"{"pp": "1.5", "pm": "0", "mp": "0", "mm": "0"}"#,
            r#"{"pp": ".5", "pm": ".5", "mp": "0"}"#,
            r#"{"pp": true, "pm": ".5", "mp": ".5", "mm": "0"}"#,
            r#"{"counts": {"pp": 1, "pm": -1, "mp": 1, "mm": 1}}"#,
            r#"{"counts": {"pp": 1.5, "pm": 1, "mp": 1, "mm": 1}}"#,
            r#"{"counts": {"pp": 1, "pm": 1, "mp": 1, "mm": 1, "n": 5}}"#,
            r#"{"pq": ".5", "pm": ".5", "mp": "0", "mm": "0"}"#,
            r#"{}"#,
        ] {
            assert!(matches!(parse(&with_block(block)), Err(Error::BadCell { .. })), "{block}");
        }
        assert!(matches!(
            parse(&with_block(r#"{"counts": {"pp": 0, "pm": 0, "mp": 0, "mm": 0}}"#)),
            Err(Error::ZeroTotal)
        ));
    }

    #[test]
    fn conflicting_counts() {
        let doc = r#"{"treatments": {
            "a,b": {"pp": ".25", "pm": ".25", "mp": ".25", "mm": ".25", "counts": {"pp": 2, "pm": 1, "mp": 1, "mm": 1}},
            "a,b'": {"counts": {"pp": 1, "pm": 1, "mp": 1, "mm": 1}},
            "a',b": {"counts": {"pp": 1, "pm": 1, "mp": 1, "mm": 1}},
            "a',b'": {"counts": {"pp": 1, "pm": 1, "mp": 1, "mm": 1}}
        }}"#;
        assert!(matches!(parse(doc), Err(Error::ConflictingData(k)) if k == "a,b"));
        let flagged = doc.replacen('{', r#"{"counts_independent": true, "#, 1);
        let data = parse(&flagged).unwrap();
        assert_eq!(data.table(Treatment::ALL[0]), &JointTable::uniform());
        assert_eq!(data.count(Treatment::ALL[0]), Some(&CountTable::new(2, 1, 1, 1)));
    }

    #[test]
    fn partial_counts_rejected() {
        let doc = with_block(r#"{"counts": {"pp": 1, "pm": 1, "mp": 1, "mm": 1}}"#);
        assert!(matches!(parse(&doc), Err(Error::Malformed(_))));
    }

    #[test]
    fn unknown_treatment_rejected() {
        let doc = UNIFORM.replacen("\"a,b\"", "\"a,c\"", 1);
        assert!(matches!(parse(&doc), Err(Error::Malformed(_))));
    }

    #[test]
    fn serialize_round_trips_fixtures() {
        for data in [fixtures::table1(), fixtures::table2(), fixtures::table3(), parse(UNIFORM).unwrap(), parse(COUNTED).unwrap()] {
            let text = serialize_experiment(&data);
            assert_eq!(parse(&text).unwrap(), data, "{text}");
        }
    }

    #[test]
    fn model_file_round_trip() {
        let doc = r#"{"hidden": {"++++": "1/2", "----": 0.5}, "eta": ".1",
                      "cross_map": {"a,b": "++", "a,b'": "-+", "a',b": "+-", "a',b'": "--"}}"#;
        let model = parse_model(doc).unwrap();
        let Model::Contaminated(c) = &model else { panic!() };
        assert_eq!(c.eta.value(), &ratio(1, 10));
        assert_eq!(c.cross_map[1], (Sign::Minus, Sign::Plus));
        assert_eq!(parse_model(&serialize_model(&model)).unwrap(), model);

        let selective = parse_model(r#"{"hidden": "uniform"}"#).unwrap();
        assert_eq!(selective, Model::Selective(HiddenStateDistribution::uniform()));
        assert_eq!(parse_model(&serialize_model(&selective)).unwrap(), selective);
    }

    #[test]
    fn model_file_errors() {
        for doc in [
            r#"{"hidden": {"++++": "1/2"}}"#,
            r#"{"hidden": {"+++": "1"}}"#,
            r#"{"hidden": "uniform", "eta": "0.5"}"#,
            r#"{"hidden": "uniform", "eta": "2", "cross_map": {"a,b": "++", "a,b'": "++", "a',b": "++", "a',b'": "++"}}"#,
            r#"{"hidden": "uniform", "eta": "0", "cross_map": {"a,b": "+", "a,b'": "++", "a',b": "++", "a',b'": "++"}}"#,
            r#"{"hidden": "uniform", "extra": 1}"#,
            r#"{"hidden": 3}"#,
        ] {
            assert!(parse_model(doc).is_err(), "{doc}");
        }
    }

    #[test]
    fn report_json_round_trips() {
        let opts = AnalysisOptions { include_witness: true, ..Default::default() };
        for data in [fixtures::table1(), fixtures::table2(), fixtures::table3(), ExperimentData::uniform()] {
            let report = analyze(&data, &opts).unwrap();
            let back = AnalysisReport::from_json(&report.to_json()).unwrap();
            assert_eq!(back, report);
        }
    }

    #[test]
    fn infinite_z_round_trips() {
        let mut report = analyze(&fixtures::table3(), &AnalysisOptions::default()).unwrap();
        report.statistical_tests.as_mut().unwrap().results[0].z = f64::NEG_INFINITY;
        let text = report.to_json();
        assert!(text.contains("\"-inf\""));
        assert_eq!(AnalysisReport::from_json(&text).unwrap(), report);
    }

    #[test]
    fn report_contents() {
        let report = analyze(&fixtures::table2(), &AnalysisOptions::default()).unwrap();
        assert_eq!(report.chsh.gamma, "4");
        assert_eq!(report.chsh.gamma_decimal, "4.000");
        assert!(report.marginal_selectivity.satisfied);
        assert!(!report.is_feasible());
        assert!(report.statistical_tests.is_none());
        assert_eq!(
            report.feasibility.certificate,
            Some(CertificateEntry::ChshFacet { pattern: "+++-".into(), value: "4".into() })
        );
        let text = report.render_text();
        assert!(text.contains("Gamma = 4.000"));
        assert!(text.contains("impossible"));

        let uniform = analyze(&ExperimentData::uniform(), &AnalysisOptions { include_witness: true, ..Default::default() }).unwrap();
        assert!(uniform.is_feasible());
        let w = uniform.feasibility.witness.as_ref().unwrap();
        let total: BigRational = w.iter().map(|e| parse_rational(&e.weight).unwrap()).sum();
        assert_eq!(total, int(1));
        let no_witness = analyze(&ExperimentData::uniform(), &AnalysisOptions::default()).unwrap();
        assert!(no_witness.feasibility.witness.is_none());
    }
}
