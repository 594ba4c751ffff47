//! Representability by a selective latent model.
//!
//! A selective model is a distribution over the 16 deterministic hidden
//! states `(A(a), A(a'), B(b), B(b'))`. Data are representable iff the linear
//! system "push-forward of the weights equals the four tables" has a
//! nonnegative solution, which [`solve_feasibility`] decides exactly. When
//! it has none, one of the marginal-selectivity equalities or one of the
//! eight CHSH inequalities fails, and that failure is returned as the
//! certificate.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::chsh::{compute_gamma, SignPattern};
use crate::error::{Error, Result};
use crate::model::{cell_index, cell_signs, ExperimentData, JointTable, Level, Probability, Sign, Treatment};
use crate::rational::{format_fraction, int};
use crate::selectivity::{check_marginal_selectivity, MarginalComparison};
use crate::simplex::find_feasible_point;

/// Deterministic responses `A(a), A(a'), B(b), B(b')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HiddenState {
    pub a: Sign,
    pub a_prime: Sign,
    pub b: Sign,
    pub b_prime: Sign,
}

impl HiddenState {
    pub const COUNT: usize = 16;

    /// State number `index` in lexicographic order with `+` before `-`;
    /// `A(a)` is the most significant position.
    pub fn from_index(index: usize) -> HiddenState {
        assert!(index < Self::COUNT);
        let sign = |bit: usize| if index & (1 << bit) != 0 { Sign::Minus } else { Sign::Plus };
        HiddenState {
            a: sign(3),
            a_prime: sign(2),
            b: sign(1),
            b_prime: sign(0),
        }
    }

    pub fn index(&self) -> usize {
        let bit = |s: Sign, shift: usize| ((s == Sign::Minus) as usize) << shift;
        bit(self.a, 3) | bit(self.a_prime, 2) | bit(self.b, 1) | bit(self.b_prime, 0)
    }

    pub fn all() -> impl Iterator<Item = HiddenState> {
        (0..Self::COUNT).map(HiddenState::from_index)
    }

    pub fn response_a(&self, alpha: Level) -> Sign {
        match alpha {
            Level::First => self.a,
            Level::Second => self.a_prime,
        }
    }

    pub fn response_b(&self, beta: Level) -> Sign {
        match beta {
            Level::First => self.b,
            Level::Second => self.b_prime,
        }
    }

    /// The `(A, B)` outcome this state produces under treatment `t`.
    pub fn outcome(&self, t: Treatment) -> (Sign, Sign) {
        (self.response_a(t.alpha), self.response_b(t.beta))
    }
}

impl fmt::Display for HiddenState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in [self.a, self.a_prime, self.b, self.b_prime] {
            write!(f, "{}", s.symbol())?;
        }
        Ok(())
    }
}

impl std::str::FromStr for HiddenState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let signs: Vec<Sign> = s.trim().chars().filter_map(Sign::from_symbol).collect();
        match signs[..] {
            [a, a_prime, b, b_prime] if s.trim().chars().count() == 4 => Ok(HiddenState { a, a_prime, b, b_prime }),
            _ => Err(Error::InvalidModel(format!("bad hidden state {s:?}"))),
        }
    }
}

/// Probability weights over the 16 hidden states, indexed by
/// [`HiddenState::index`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HiddenStateDistribution {
    weights: Vec<Probability>,
}

impl HiddenStateDistribution {
    pub fn new(weights: Vec<BigRational>) -> Result<Self> {
        if weights.len() != HiddenState::COUNT {
            return Err(Error::InvalidModel(format!("expected 16 weights, got {}", weights.len())));
        }
        let total: BigRational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidModel(format!("weights sum to {}", format_fraction(&total))));
        }
        let weights = weights.into_iter().map(Probability::new).collect::<Result<_>>()?;
        Ok(HiddenStateDistribution { weights })
    }

    /// Normalizes nonnegative integer weights.
    pub fn from_integer_weights(weights: &[u64]) -> Result<Self> {
        let total: u64 = weights.iter().sum();
        if total == 0 {
            return Err(Error::InvalidModel("all weights are zero".into()));
        }
        HiddenStateDistribution::new(
            weights
                .iter()
                .map(|&w| BigRational::new(BigInt::from(w), BigInt::from(total)))
                .collect(),
        )
    }

    pub fn uniform() -> Self {
        HiddenStateDistribution::from_integer_weights(&[1; 16]).unwrap()
    }

    pub fn point_mass(state: HiddenState) -> Self {
        let mut w = [0u64; 16];
        w[state.index()] = 1;
        HiddenStateDistribution::from_integer_weights(&w).unwrap()
    }

    pub fn weight(&self, state: HiddenState) -> &Probability {
        &self.weights[state.index()]
    }

    pub fn weights(&self) -> &[Probability] {
        &self.weights
    }

    /// States with nonzero weight.
    pub fn support(&self) -> impl Iterator<Item = (HiddenState, &Probability)> {
        HiddenState::all()
            .zip(&self.weights)
            .filter(|(_, w)| !w.value().is_zero())
    }

    /// `(1 - lambda) * self + lambda * other`.
    pub fn mix(&self, other: &HiddenStateDistribution, lambda: &Probability) -> Self {
        let keep = lambda.complement();
        let weights = self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(x, y)| keep.value() * x.value() + lambda.value() * y.value())
            .collect();
        HiddenStateDistribution::new(weights).expect("mixture of distributions")
    }
}

/// Joint tables implied by a selective model.
pub fn predicted_tables(w: &HiddenStateDistribution) -> ExperimentData {
    let tables = Treatment::ALL.map(|t| {
        let mut cells: [BigRational; 4] = std::array::from_fn(|_| BigRational::zero());
        for (state, weight) in HiddenState::all().zip(&w.weights) {
            let (a, b) = state.outcome(t);
            cells[cell_index(a, b)] += weight.value();
        }
        let [pp, pm, mp, mm] = cells;
        JointTable::new(pp, pm, mp, mm).expect("push-forward of a distribution")
    });
    ExperimentData::new(tables)
}

pub fn verify_witness(w: &HiddenStateDistribution, data: &ExperimentData) -> bool {
    predicted_tables(w).tables() == data.tables()
}

/// Reason a dataset admits no selective representation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// A marginal probability that moves with the other factor.
    MarginalSelectivity(MarginalComparison),
    /// A CHSH signed sum above 2.
    ChshFacet { pattern: SignPattern, value: BigRational },
}

impl Certificate {
    /// Re-evaluates the certificate on `data`.
    pub fn is_violated_on(&self, data: &ExperimentData) -> bool {
        match self {
            Certificate::MarginalSelectivity(c) => {
                MarginalComparison::compute(data, c.response, c.level).is_violated()
            }
            Certificate::ChshFacet { pattern, .. } => crate::chsh_facet_value(data, pattern) > int(2),
        }
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certificate::MarginalSelectivity(c) => write!(
                f,
                "marginal selectivity fails for {}: Pr(+1) = {} vs {}",
                c.describe(),
                c.p_under_first,
                c.p_under_second
            ),
            Certificate::ChshFacet { pattern, value } => {
                write!(f, "CHSH facet {pattern} has value {} > 2", format_fraction(value))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasibilityResult {
    Feasible {
        witness: HiddenStateDistribution,
    },
    Infeasible {
        /// First violation in the fixed order: marginal comparisons, then
        /// CHSH facets in [`SignPattern::ALL`] order.
        certificate: Certificate,
        /// Every violation, in the same order.
        violations: Vec<Certificate>,
    },
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityResult::Feasible { .. })
    }

    pub fn witness(&self) -> Option<&HiddenStateDistribution> {
        match self {
            FeasibilityResult::Feasible { witness } => Some(witness),
            FeasibilityResult::Infeasible { .. } => None,
        }
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            FeasibilityResult::Feasible { .. } => None,
            FeasibilityResult::Infeasible { certificate, .. } => Some(certificate),
        }
    }
}

/// Constraint matrix of the push-forward map: one row per normalization and
/// per (treatment, cell), one column per hidden state.
fn pushforward_system(data: &ExperimentData) -> (Vec<Vec<BigRational>>, Vec<BigRational>) {
    let mut a = vec![vec![BigRational::one(); HiddenState::COUNT]];
    let mut b = vec![BigRational::one()];
    for t in Treatment::ALL {
        for (cell, p) in data.table(t).cells().iter().enumerate() {
            let (ca, cb) = cell_signs(cell);
            a.push(
                HiddenState::all()
                    .map(|s| if s.outcome(t) == (ca, cb) { int(1) } else { int(0) })
                    .collect(),
            );
            b.push(p.value().clone());
        }
    }
    (a, b)
}

/// All violated marginal equalities and CHSH facets, in certificate order.
pub fn find_violations(data: &ExperimentData) -> Vec<Certificate> {
    let ms = check_marginal_selectivity(data, &BigRational::zero());
    let chsh = compute_gamma(data);
    ms.violations()
        .cloned()
        .map(Certificate::MarginalSelectivity)
        .chain(chsh.violated_facets().map(|(pattern, value)| Certificate::ChshFacet {
            pattern: *pattern,
            value: value.clone(),
        }))
        .collect()
}

pub fn solve_feasibility(data: &ExperimentData) -> FeasibilityResult {
    let (a, b) = pushforward_system(data);
    match find_feasible_point(&a, &b) {
        Some(x) => FeasibilityResult::Feasible {
            witness: HiddenStateDistribution::new(x).expect("feasible point is a distribution"),
        },
        None => {
            let violations = find_violations(data);
            let certificate = violations
                .first()
                .cloned()
                .expect("infeasible data violates marginal selectivity or a CHSH inequality");
            FeasibilityResult::Infeasible {
                certificate,
                violations,
            }
        }
    }
}

/// Exact marginal selectivity together with Γ ≤ 2.
pub fn fine_criterion(data: &ExperimentData) -> bool {
    check_marginal_selectivity(data, &BigRational::zero()).satisfied
        && !compute_gamma(data).violates_classical_bound()
}

/// A non-selective representation: the random variable ranges over
/// 4-tuples of outcome pairs, one pair per treatment (256 values).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralRepresentation {
    /// Indexed by `Σ cell(t) · 4^(3 - t)` over treatments `t` in
    /// [`Treatment::ALL`] order, where `cell` is 0..4 in `pp, pm, mp, mm` order.
    weights: Vec<Probability>,
}

impl GeneralRepresentation {
    pub const STATES: usize = 256;

    pub fn weights(&self) -> &[Probability] {
        &self.weights
    }

    /// Outcome cell of treatment `t` in state `index`.
    pub fn cell_of(index: usize, t: Treatment) -> usize {
        (index >> (2 * (3 - t.index()))) & 3
    }

    pub fn total(&self) -> BigRational {
        self.weights.iter().map(Probability::value).sum()
    }

    /// Joint table of `(f(R, t), g(R, t))` for every treatment.
    pub fn reconstruct(&self) -> ExperimentData {
        ExperimentData::new(Treatment::ALL.map(|t| {
            let mut cells: [BigRational; 4] = std::array::from_fn(|_| BigRational::zero());
            for (i, w) in self.weights.iter().enumerate() {
                cells[Self::cell_of(i, t)] += w.value();
            }
            let [pp, pm, mp, mm] = cells;
            JointTable::new(pp, pm, mp, mm).expect("marginal of a distribution")
        }))
    }
}

/// Product measure across treatments; always exists.
pub fn construct_general_representation(data: &ExperimentData) -> GeneralRepresentation {
    let weights = (0..GeneralRepresentation::STATES)
        .map(|i| {
            let w = Treatment::ALL
                .iter()
                .map(|&t| data.table(t).cells()[GeneralRepresentation::cell_of(i, t)].value())
                .fold(BigRational::one(), |acc, p| acc * p);
            Probability::new(w).expect("product of probabilities")
        })
        .collect();
    GeneralRepresentation { weights }
}
