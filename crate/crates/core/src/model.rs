//! Treatments, joint tables and the `±1` response coding.
//!
//! `+1` always denotes the first listed alternative of a response and `-1`
//! the second. Cells are ordered `pp, pm, mp, mm`, i.e. `(A, B)` =
//! `(+,+), (+,-), (-,+), (-,-)`.

use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_fraction, is_unit_interval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }

    pub fn from_symbol(c: char) -> Option<Sign> {
        match c {
            '+' => Some(Sign::Plus),
            '-' => Some(Sign::Minus),
            _ => None,
        }
    }
}

impl Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Factor {
    Alpha,
    Beta,
}

/// `First` is `a` (or `b`), `Second` is `a'` (or `b'`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    First,
    Second,
}

impl Level {
    pub const BOTH: [Level; 2] = [Level::First, Level::Second];

    pub fn other(self) -> Level {
        match self {
            Level::First => Level::Second,
            Level::Second => Level::First,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// `"a"`, `"a'"`, `"b"` or `"b'"`.
    pub fn name(self, factor: Factor) -> &'static str {
        match (factor, self) {
            (Factor::Alpha, Level::First) => "a",
            (Factor::Alpha, Level::Second) => "a'",
            (Factor::Beta, Level::First) => "b",
            (Factor::Beta, Level::Second) => "b'",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Treatment {
    pub alpha: Level,
    pub beta: Level,
}

impl Treatment {
    /// `(a,b), (a,b'), (a',b), (a',b')`.
    pub const ALL: [Treatment; 4] = [
        Treatment::new(Level::First, Level::First),
        Treatment::new(Level::First, Level::Second),
        Treatment::new(Level::Second, Level::First),
        Treatment::new(Level::Second, Level::Second),
    ];

    pub const fn new(alpha: Level, beta: Level) -> Self {
        Treatment { alpha, beta }
    }

    pub fn index(self) -> usize {
        2 * self.alpha.index() + self.beta.index()
    }

    /// Block key used in experiment files, e.g. `"a',b"`.
    pub fn key(self) -> String {
        format!("{},{}", self.alpha.name(Factor::Alpha), self.beta.name(Factor::Beta))
    }

    pub fn from_key(key: &str) -> Option<Treatment> {
        Treatment::ALL
            .into_iter()
            .find(|t| t.key() == key.replace(' ', ""))
    }
}

impl fmt::Display for Treatment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.key())
    }
}

/// An exact probability in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Probability(BigRational);

impl Probability {
    pub fn new(value: BigRational) -> Result<Self> {
        if is_unit_interval(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::ProbabilityOutOfRange(format_fraction(&value)))
        }
    }

    pub fn zero() -> Self {
        Probability(BigRational::zero())
    }

    pub fn one() -> Self {
        Probability(BigRational::one())
    }

    pub fn ratio(numer: i64, denom: i64) -> Result<Self> {
        Probability::new(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn into_inner(self) -> BigRational {
        self.0
    }

    pub fn complement(&self) -> Probability {
        Probability(BigRational::one() - &self.0)
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_fraction(&self.0))
    }
}

/// Joint distribution of `(A, B)` under one treatment.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JointTable {
    cells: [Probability; 4],
}

impl JointTable {
    pub const CELL_KEYS: [&'static str; 4] = ["pp", "pm", "mp", "mm"];

    pub fn new(pp: BigRational, pm: BigRational, mp: BigRational, mm: BigRational) -> Result<Self> {
        let sum = &pp + &pm + &mp + &mm;
        if !sum.is_one() {
            return Err(Error::SumNotOne {
                treatment: "?".into(),
                sum: format_fraction(&sum),
            });
        }
        Ok(JointTable {
            cells: [
                Probability::new(pp)?,
                Probability::new(pm)?,
                Probability::new(mp)?,
                Probability::new(mm)?,
            ],
        })
    }

    /// Table from integer weights over a common denominator.
    pub fn from_parts(parts: [i64; 4], denom: i64) -> Result<Self> {
        let r = |n: i64| BigRational::new(BigInt::from(n), BigInt::from(denom));
        JointTable::new(r(parts[0]), r(parts[1]), r(parts[2]), r(parts[3]))
    }

    pub fn uniform() -> Self {
        JointTable::from_parts([1, 1, 1, 1], 4).unwrap()
    }

    pub fn point_mass(a: Sign, b: Sign) -> Self {
        let mut parts = [0; 4];
        parts[cell_index(a, b)] = 1;
        JointTable::from_parts(parts, 1).unwrap()
    }

    pub fn cells(&self) -> &[Probability; 4] {
        &self.cells
    }

    pub fn cell(&self, a: Sign, b: Sign) -> &Probability {
        &self.cells[cell_index(a, b)]
    }

    pub fn p_pp(&self) -> &BigRational {
        self.cells[0].value()
    }

    pub fn p_pm(&self) -> &BigRational {
        self.cells[1].value()
    }

    pub fn p_mp(&self) -> &BigRational {
        self.cells[2].value()
    }

    pub fn p_mm(&self) -> &BigRational {
        self.cells[3].value()
    }

    /// `E[AB] = p_pp - p_pm - p_mp + p_mm`.
    pub fn expectation(&self) -> BigRational {
        self.p_pp() - self.p_pm() - self.p_mp() + self.p_mm()
    }

    /// `(Pr(A = +1), Pr(B = +1))`.
    pub fn marginals(&self) -> (Probability, Probability) {
        (
            Probability(self.p_pp() + self.p_pm()),
            Probability(self.p_pp() + self.p_mp()),
        )
    }

    pub fn from_counts(counts: &CountTable) -> Result<Self> {
        let n = counts.total();
        if n == 0 {
            return Err(Error::ZeroTotal);
        }
        let c = counts.cells();
        let r = |k: u64| BigRational::new(BigInt::from(k), BigInt::from(n));
        JointTable::new(r(c[0]), r(c[1]), r(c[2]), r(c[3]))
    }

    /// Swaps the coding of `A` (rows).
    pub fn flip_a(&self) -> Self {
        let [pp, pm, mp, mm] = self.cells.clone();
        JointTable { cells: [mp, mm, pp, pm] }
    }

    /// Swaps the coding of `B` (columns).
    pub fn flip_b(&self) -> Self {
        let [pp, pm, mp, mm] = self.cells.clone();
        JointTable { cells: [pm, pp, mm, mp] }
    }

    /// Exchanges the roles of `A` and `B`.
    pub fn transpose(&self) -> Self {
        let [pp, pm, mp, mm] = self.cells.clone();
        JointTable { cells: [pp, mp, pm, mm] }
    }

    /// Cell-wise `(1 - lambda) * self + lambda * other`.
    pub fn mix(&self, other: &JointTable, lambda: &Probability) -> Self {
        let keep = lambda.complement();
        let cells = std::array::from_fn(|i| {
            Probability(keep.value() * self.cells[i].value() + lambda.value() * other.cells[i].value())
        });
        JointTable { cells }
    }
}

pub(crate) fn cell_index(a: Sign, b: Sign) -> usize {
    2 * (a == Sign::Minus) as usize + (b == Sign::Minus) as usize
}

pub(crate) fn cell_signs(index: usize) -> (Sign, Sign) {
    let sign = |minus: bool| if minus { Sign::Minus } else { Sign::Plus };
    (sign(index & 2 != 0), sign(index & 1 != 0))
}

/// Observed counts under one treatment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CountTable {
    pub n_pp: u64,
    pub n_pm: u64,
    pub n_mp: u64,
    pub n_mm: u64,
}

impl CountTable {
    pub fn new(n_pp: u64, n_pm: u64, n_mp: u64, n_mm: u64) -> Self {
        CountTable { n_pp, n_pm, n_mp, n_mm }
    }

    pub fn cells(&self) -> [u64; 4] {
        [self.n_pp, self.n_pm, self.n_mp, self.n_mm]
    }

    pub fn total(&self) -> u64 {
        self.cells().iter().sum()
    }

    /// Number of trials with `A = +1`.
    pub fn a_plus(&self) -> u64 {
        self.n_pp + self.n_pm
    }

    /// Number of trials with `B = +1`.
    pub fn b_plus(&self) -> u64 {
        self.n_pp + self.n_mp
    }
}

/// Display names for the levels of one factor and the two alternatives of
/// the response offered under each level.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LevelLabels {
    pub level: Option<String>,
    /// `[+1 alternative, -1 alternative]`.
    pub alternatives: Option<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Labels {
    pub alpha: [LevelLabels; 2],
    pub beta: [LevelLabels; 2],
}

impl Labels {
    pub fn level(&self, factor: Factor, level: Level) -> &LevelLabels {
        match factor {
            Factor::Alpha => &self.alpha[level.index()],
            Factor::Beta => &self.beta[level.index()],
        }
    }
}

/// The four joint tables of an experiment, optionally with the counts they
/// were estimated from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentData {
    tables: [JointTable; 4],
    counts: Option<[CountTable; 4]>,
    counts_independent: bool,
    labels: Option<Labels>,
}

impl ExperimentData {
    /// Tables in [`Treatment::ALL`] order.
    pub fn new(tables: [JointTable; 4]) -> Self {
        ExperimentData {
            tables,
            counts: None,
            counts_independent: false,
            labels: None,
        }
    }

    pub fn from_counts(counts: [CountTable; 4]) -> Result<Self> {
        let tables = [
            JointTable::from_counts(&counts[0])?,
            JointTable::from_counts(&counts[1])?,
            JointTable::from_counts(&counts[2])?,
            JointTable::from_counts(&counts[3])?,
        ];
        Ok(ExperimentData {
            tables,
            counts: Some(counts),
            counts_independent: false,
            labels: None,
        })
    }

    pub fn uniform() -> Self {
        ExperimentData::new(std::array::from_fn(|_| JointTable::uniform()))
    }

    /// Attaches counts. Unless `independent` is set, each table must equal its
    /// normalized counts exactly.
    pub fn with_counts(mut self, counts: [CountTable; 4], independent: bool) -> Result<Self> {
        for t in Treatment::ALL {
            let derived = JointTable::from_counts(&counts[t.index()])?;
            if !independent && derived != self.tables[t.index()] {
                return Err(Error::ConflictingData(t.key()));
            }
        }
        self.counts = Some(counts);
        self.counts_independent = independent;
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Labels) -> Self {
        self.labels = Some(labels);
        self
    }

    pub fn table(&self, t: Treatment) -> &JointTable {
        &self.tables[t.index()]
    }

    pub fn tables(&self) -> &[JointTable; 4] {
        &self.tables
    }

    pub fn counts(&self) -> Option<&[CountTable; 4]> {
        self.counts.as_ref()
    }

    pub fn count(&self, t: Treatment) -> Option<&CountTable> {
        self.counts.as_ref().map(|c| &c[t.index()])
    }

    pub fn counts_independent(&self) -> bool {
        self.counts_independent
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }

    /// `E[AB]` for each treatment in [`Treatment::ALL`] order.
    pub fn expectations(&self) -> [BigRational; 4] {
        std::array::from_fn(|i| self.tables[i].expectation())
    }

    fn map_tables(&self, f: impl Fn(Treatment, &ExperimentData) -> JointTable) -> Self {
        ExperimentData::new(Treatment::ALL.map(|t| f(t, self)))
    }

    /// Recodes `A` at one level of `α`. Counts and labels are dropped.
    pub fn flip_a_at(&self, level: Level) -> Self {
        self.map_tables(|t, d| {
            let table = d.table(t);
            if t.alpha == level { table.flip_a() } else { table.clone() }
        })
    }

    /// Recodes `B` at one level of `β`. Counts and labels are dropped.
    pub fn flip_b_at(&self, level: Level) -> Self {
        self.map_tables(|t, d| {
            let table = d.table(t);
            if t.beta == level { table.flip_b() } else { table.clone() }
        })
    }

    /// Exchanges `a` and `a'`.
    pub fn swap_alpha_levels(&self) -> Self {
        self.map_tables(|t, d| d.table(Treatment::new(t.alpha.other(), t.beta)).clone())
    }

    /// Exchanges `b` and `b'`.
    pub fn swap_beta_levels(&self) -> Self {
        self.map_tables(|t, d| d.table(Treatment::new(t.alpha, t.beta.other())).clone())
    }

    /// Exchanges the roles of `(α, A)` and `(β, B)`.
    pub fn swap_factors(&self) -> Self {
        self.map_tables(|t, d| d.table(Treatment::new(t.beta, t.alpha)).transpose())
    }

    /// Treatment-wise mixture `(1 - lambda) * self + lambda * other`.
    pub fn mix(&self, other: &ExperimentData, lambda: &Probability) -> Self {
        self.map_tables(|t, d| d.table(t).mix(other.table(t), lambda))
    }
}
