//! Selective-influence analysis for the simplest factorial design: two binary
//! factors `α ∈ {a, a'}`, `β ∈ {b, b'}` and two `±1` responses `A`, `B`
//! recorded under each of the four treatments.
//!
//! The crate answers one question exactly: can the four observed joint
//! distributions of `(A, B)` be produced by a latent model in which `A`
//! depends only on `α` and `B` only on `β`? It does so three ways that are
//! checked against each other:
//!
//! * [`chsh`] computes the CHSH statistic Γ over the eight odd-plus sign
//!   patterns and classifies it against 2, 2√2 and 4;
//! * [`selectivity`] checks that each response's marginal does not move with
//!   the other factor, exactly or with a two-proportion z-test on counts;
//! * [`feasibility`] runs an exact rational phase-1 simplex over the 16
//!   deterministic hidden states and returns a witness distribution or a
//!   violated inequality.
//!
//! All probabilities are exact rationals ([`num_rational::BigRational`]).

pub mod chsh;
pub mod error;
pub mod feasibility;
pub mod fixtures;
pub mod io;
pub mod model;
pub mod rational;
pub mod selectivity;
pub mod simplex;
pub mod simulate;

pub use chsh::{compute_gamma, chsh_facet_value, Bound, ChshReport, SignPattern};
pub use error::{Error, Result};
pub use feasibility::{
    construct_general_representation, fine_criterion, predicted_tables, solve_feasibility,
    verify_witness, Certificate, FeasibilityResult, GeneralRepresentation, HiddenState,
    HiddenStateDistribution,
};
pub use io::{parse_experiment, serialize_experiment, AnalysisOptions, AnalysisReport, ParseOptions};
pub use model::{CountTable, ExperimentData, Factor, JointTable, Level, Probability, Sign, Treatment};
pub use selectivity::{
    check_marginal_selectivity, test_marginal_selectivity, MarginalComparison, MarginalReport,
    MsTestOptions, MsTestResult, Response,
};
pub use simulate::{model_tables, sample_counts, ContaminatedModel, Model, SampleSpec, DEFAULT_SEED};
