//! Marginal selectivity: `Pr(A = +1)` may not depend on the level of `β`, nor
//! `Pr(B = +1)` on the level of `α`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::model::{CountTable, ExperimentData, Factor, Level, Probability, Treatment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Response {
    A,
    B,
}

impl Response {
    pub fn own_factor(self) -> Factor {
        match self {
            Response::A => Factor::Alpha,
            Response::B => Factor::Beta,
        }
    }

    /// The two treatments that share `level` of this response's own factor,
    /// ordered by the level of the other factor.
    pub fn treatments(self, level: Level) -> [Treatment; 2] {
        match self {
            Response::A => [Treatment::new(level, Level::First), Treatment::new(level, Level::Second)],
            Response::B => [Treatment::new(Level::First, level), Treatment::new(Level::Second, level)],
        }
    }

    fn plus_probability(self, data: &ExperimentData, t: Treatment) -> Probability {
        let (pa, pb) = data.table(t).marginals();
        match self {
            Response::A => pa,
            Response::B => pb,
        }
    }

    fn plus_count(self, counts: &CountTable) -> u64 {
        match self {
            Response::A => counts.a_plus(),
            Response::B => counts.b_plus(),
        }
    }
}

/// Order in which comparisons are reported: A at a, A at a', B at b, B at b'.
pub const COMPARISONS: [(Response, Level); 4] = [
    (Response::A, Level::First),
    (Response::A, Level::Second),
    (Response::B, Level::First),
    (Response::B, Level::Second),
];

/// `Pr(response = +1)` under the two levels of the other factor, with the
/// response's own factor held at `level`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalComparison {
    pub response: Response,
    pub level: Level,
    pub p_under_first: Probability,
    pub p_under_second: Probability,
    pub delta: Probability,
}

impl MarginalComparison {
    pub fn compute(data: &ExperimentData, response: Response, level: Level) -> Self {
        let [first, second] = response.treatments(level);
        let p_under_first = response.plus_probability(data, first);
        let p_under_second = response.plus_probability(data, second);
        let delta = Probability::new((p_under_first.value() - p_under_second.value()).abs())
            .expect("difference of probabilities");
        MarginalComparison {
            response,
            level,
            p_under_first,
            p_under_second,
            delta,
        }
    }

    /// E.g. `"A at a'"`.
    pub fn describe(&self) -> String {
        let name = match self.response {
            Response::A => "A",
            Response::B => "B",
        };
        format!("{name} at {}", self.level.name(self.response.own_factor()))
    }

    pub fn is_violated(&self) -> bool {
        !self.delta.value().is_zero()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalReport {
    pub comparisons: [MarginalComparison; 4],
    pub max_delta: Probability,
    pub tolerance: BigRational,
    pub satisfied: bool,
}

impl MarginalReport {
    pub fn violations(&self) -> impl Iterator<Item = &MarginalComparison> {
        self.comparisons.iter().filter(|c| c.delta.value() > &self.tolerance)
    }
}

/// Computes all four comparisons. A `tolerance` of zero demands exact equality.
///
/// Panics if `tolerance` is negative.
pub fn check_marginal_selectivity(data: &ExperimentData, tolerance: &BigRational) -> MarginalReport {
    assert!(!tolerance.is_negative(), "tolerance must be nonnegative");
    let comparisons = COMPARISONS.map(|(r, l)| MarginalComparison::compute(data, r, l));
    let max_delta = comparisons
        .iter()
        .map(|c| &c.delta)
        .max()
        .expect("four comparisons")
        .clone();
    let satisfied = max_delta.value() <= tolerance;
    MarginalReport {
        comparisons,
        max_delta,
        tolerance: tolerance.clone(),
        satisfied,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MsTestOptions {
    pub alpha_sig: f64,
    /// Test each comparison at `alpha_sig / 4`.
    pub bonferroni: bool,
}

impl Default for MsTestOptions {
    fn default() -> Self {
        MsTestOptions {
            alpha_sig: 0.05,
            bonferroni: false,
        }
    }
}

impl MsTestOptions {
    pub fn effective_alpha(&self) -> f64 {
        if self.bonferroni {
            self.alpha_sig / 4.0
        } else {
            self.alpha_sig
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MsTestResult {
    /// Built from the counts, not from the (possibly independently supplied)
    /// probability tables.
    pub comparison: MarginalComparison,
    pub z_statistic: f64,
    pub p_value: f64,
    pub reject: bool,
    /// Pooled proportion was 0 or 1.
    pub degenerate: bool,
}

/// Two-sided pooled two-proportion z-test for each of the four comparisons.
pub fn test_marginal_selectivity(
    data: &ExperimentData,
    options: &MsTestOptions,
) -> Result<[MsTestResult; 4]> {
    if !(options.alpha_sig > 0.0 && options.alpha_sig < 1.0) {
        return Err(Error::InvalidSignificance(options.alpha_sig));
    }
    let counts = data.counts().ok_or(Error::MissingCounts)?;
    let count_data = ExperimentData::from_counts(*counts)?;
    let alpha = options.effective_alpha();

    Ok(COMPARISONS.map(|(response, level)| {
        let [first, second] = response.treatments(level);
        let c1 = &counts[first.index()];
        let c2 = &counts[second.index()];
        let (z, degenerate) = pooled_z(
            response.plus_count(c1),
            c1.total(),
            response.plus_count(c2),
            c2.total(),
        );
        let p_value = two_sided_p(z);
        MsTestResult {
            comparison: MarginalComparison::compute(&count_data, response, level),
            z_statistic: z,
            p_value,
            reject: p_value < alpha,
            degenerate,
        }
    }))
}

/// `(p1 - p2) / sqrt(p(1-p)(1/n1 + 1/n2))` with `p` the pooled proportion.
/// When `p` is 0 or 1 the statistic is 0 for equal proportions and infinite
/// otherwise; the second value flags that case.
pub fn pooled_z(x1: u64, n1: u64, x2: u64, n2: u64) -> (f64, bool) {
    let p1 = BigRational::new(BigInt::from(x1), BigInt::from(n1));
    let p2 = BigRational::new(BigInt::from(x2), BigInt::from(n2));
    if x1 + x2 == 0 || x1 + x2 == n1 + n2 {
        let z = match p1.cmp(&p2) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Greater => f64::INFINITY,
            std::cmp::Ordering::Less => f64::NEG_INFINITY,
        };
        return (z, true);
    }
    let (x1, n1, x2, n2) = (x1 as f64, n1 as f64, x2 as f64, n2 as f64);
    let pooled = (x1 + x2) / (n1 + n2);
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)).sqrt();
    ((x1 / n1 - x2 / n2) / se, false)
}

/// `2 * (1 - Φ(|z|))`.
pub fn two_sided_p(z: f64) -> f64 {
    if z.is_infinite() {
        return 0.0;
    }
    erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}
