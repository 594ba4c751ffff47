//! Command-line front end for `selinf`.
//!
//! Exit codes: 0 when a selective representation exists, 1 when it does
//! not (or a self-test fails), 2 on usage or input errors.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use selinf::io::{analyze, parse_model};
use selinf::rational::{int, parse_rational};
use selinf::{
    compute_gamma, fixtures, parse_experiment, sample_counts, serialize_experiment, solve_feasibility,
    AnalysisOptions, Bound, Certificate, ExperimentData, FeasibilityResult, MsTestOptions, ParseOptions,
    SampleSpec, DEFAULT_SEED,
};

pub const EXIT_FEASIBLE: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Environment variable holding the default output format.
pub const FORMAT_ENV: &str = "SELINF_FORMAT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "selinf", version, about = "Selective influences and CHSH checks for 2x2 designs")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, env = FORMAT_ENV, default_value = "text")]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analyze an experiment file ("-" reads standard input).
    Analyze(AnalyzeArgs),
    /// Print a hidden-state distribution reproducing the data, if one exists.
    Witness {
        file: PathBuf,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Sample an experiment file with counts from a latent model.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        /// Trials per treatment.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Write here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the bundled reference tables against their known results.
    Selftest,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Rescale treatment blocks whose cells sum to within 0.01 of one.
    #[arg(long)]
    renormalize: bool,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    file: PathBuf,
    #[command(flatten)]
    input: InputArgs,
    /// Marginal-selectivity tolerance (decimal or fraction).
    #[arg(long, default_value = "0", value_parser = parse_tolerance)]
    tolerance: String,
    /// Significance level for the z-tests on counts.
    #[arg(long, default_value_t = 0.05, value_parser = parse_sig)]
    sig: f64,
    /// Divide the significance level by the number of comparisons.
    #[arg(long)]
    bonferroni: bool,
    /// Include the hidden-state witness when feasible.
    #[arg(long)]
    witness: bool,
    /// Shorthand for --format json.
    #[arg(long)]
    json: bool,
    /// Decimal places for the rounded Gamma.
    #[arg(long, default_value_t = 3)]
    places: usize,
}

fn parse_tolerance(s: &str) -> Result<String, String> {
    match parse_rational(s) {
        Ok(v) if v >= int(0) => Ok(s.to_string()),
        Ok(_) => Err("tolerance must be nonnegative".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_sig(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v < 1.0 => Ok(v),
        _ => Err(format!("significance level must lie strictly between 0 and 1, got {s:?}")),
    }
}

/// Failure that maps to exit code 2.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

fn read_input(path: &Path) -> Result<String, InputError> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
    }
}

fn load(path: &Path, input: &InputArgs) -> Result<ExperimentData, InputError> {
    let text = read_input(path)?;
    parse_experiment(&text, &ParseOptions { renormalize: input.renormalize })
        .map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn verdict_code(feasible: bool) -> i32 {
    if feasible { EXIT_FEASIBLE } else { EXIT_INFEASIBLE }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                EXIT_ERROR
            } else {
                let _ = write!(out, "{}", e.render());
                0
            };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(InputError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32, InputError> {
    match cli.command {
        Command::Analyze(args) => {
            let format = if args.json { Format::Json } else { cli.format };
            analyze_command(&args, format, out)
        }
        Command::Witness { file, input } => witness_command(&file, &input, cli.format, out),
        Command::Simulate { model, n, seed, out: path } => {
            let model = parse_model(&read_input(&model)?).map_err(|e| InputError(format!("{}: {e}", model.display())))?;
            let data = sample_counts(&model, &SampleSpec::new(n, seed)?);
            let text = serialize_experiment(&data) + "\n";
            match path {
                Some(p) => fs::write(&p, text).map_err(|e| InputError(format!("{}: {e}", p.display())))?,
                None => out.write_all(text.as_bytes())?,
            }
            Ok(0)
        }
        Command::Selftest => selftest(cli.format, out),
    }
}

fn analyze_command(args: &AnalyzeArgs, format: Format, out: &mut dyn Write) -> Result<i32, InputError> {
    let data = load(&args.file, &args.input)?;
    let options = AnalysisOptions {
        tolerance: parse_rational(&args.tolerance)?,
        ms_test: MsTestOptions { alpha_sig: args.sig, bonferroni: args.bonferroni },
        include_witness: args.witness,
        decimal_places: args.places,
    };
    let report = analyze(&data, &options)?;
    match format {
        Format::Json => writeln!(out, "{}", report.to_json())?,
        Format::Text => write!(out, "{}", report.render_text())?,
    }
    Ok(verdict_code(report.is_feasible()))
}

fn witness_command(path: &Path, input: &InputArgs, format: Format, out: &mut dyn Write) -> Result<i32, InputError> {
    let data = load(path, input)?;
    let options = AnalysisOptions { include_witness: true, ..AnalysisOptions::default() };
    let report = analyze(&data, &options)?;
    let feasibility = &report.feasibility;
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(feasibility)?)?,
        Format::Text => {
            if let Some(witness) = &feasibility.witness {
                writeln!(out, "# A(a) A(a') B(b) B(b')  weight")?;
                for e in witness {
                    writeln!(out, "{}  {}", e.state, e.weight)?;
                }
            }
            if let Some(certificate) = &feasibility.certificate {
                writeln!(out, "no selective representation: {certificate}")?;
            }
        }
    }
    Ok(verdict_code(report.is_feasible()))
}

struct Golden {
    name: &'static str,
    data: ExperimentData,
    check: fn(&ExperimentData) -> Result<String, String>,
}

fn golden_table1(data: &ExperimentData) -> Result<String, String> {
    let chsh = compute_gamma(data);
    if chsh.gamma != int(0) {
        return Err(format!("Gamma = {}, expected 0", chsh.gamma));
    }
    match solve_feasibility(data) {
        FeasibilityResult::Infeasible { certificate: Certificate::MarginalSelectivity(c), .. } => {
            Ok(format!("Gamma = 0; marginal selectivity violated ({})", c.describe()))
        }
        other => Err(format!("expected a marginal-selectivity certificate, got {:?}", other.certificate())),
    }
}

fn golden_table2(data: &ExperimentData) -> Result<String, String> {
    let chsh = compute_gamma(data);
    if chsh.gamma != int(4) || chsh.classification != Bound::SupraQuantum {
        return Err(format!("Gamma = {}, expected 4", chsh.gamma));
    }
    match solve_feasibility(data) {
        FeasibilityResult::Infeasible { certificate: Certificate::ChshFacet { pattern, .. }, .. } => {
            Ok(format!("Gamma = 4; CHSH facet {pattern} violated"))
        }
        other => Err(format!("expected a CHSH certificate, got {:?}", other.certificate())),
    }
}

fn golden_table3(data: &ExperimentData) -> Result<String, String> {
    let chsh = compute_gamma(data);
    let gamma = chsh.gamma_decimal(3);
    if gamma != "2.422" {
        return Err(format!("Gamma = {gamma}, expected 2.422"));
    }
    if solve_feasibility(data).is_feasible() {
        return Err("reported feasible".into());
    }
    Ok(format!("Gamma = {gamma}; infeasible"))
}

fn selftest(format: Format, out: &mut dyn Write) -> Result<i32, InputError> {
    let cases = [
        Golden { name: "table1", data: fixtures::table1(), check: golden_table1 },
        Golden { name: "table2", data: fixtures::table2(), check: golden_table2 },
        Golden { name: "table3", data: fixtures::table3(), check: golden_table3 },
    ];
    let results: Vec<(&str, Result<String, String>)> = cases.iter().map(|c| (c.name, (c.check)(&c.data))).collect();
    let all_pass = results.iter().all(|(_, r)| r.is_ok());
    match format {
        Format::Json => {
            let entries: Vec<serde_json::Value> = results
                .iter()
                .map(|(name, r)| {
                    let (pass, detail) = match r {
                        Ok(d) => (true, d),
                        Err(d) => (false, d),
                    };
                    serde_json::json!({ "fixture": name, "pass": pass, "detail": detail })
                })
                .collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&entries)?)?;
        }
        Format::Text => {
            for (name, r) in &results {
                match r {
                    Ok(d) => writeln!(out, "PASS {name}: {d}")?,
                    Err(d) => writeln!(out, "FAIL {name}: {d}")?,
                }
            }
        }
    }
    Ok(if all_pass { 0 } else { EXIT_INFEASIBLE })
}
