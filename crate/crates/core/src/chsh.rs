//! The CHSH statistic.
//!
//! Γ is the largest of the eight signed sums
//! `±E_ab ± E_ab' ± E_a'b ± E_a'b'` whose number of `+` signs is odd.

use std::fmt;

use num_rational::BigRational;
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::model::{ExperimentData, Sign};
use crate::rational::{format_decimal, int};

/// Signs applied to `(E_ab, E_ab', E_a'b, E_a'b')`; always an odd number of `+`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignPattern([Sign; 4]);

use Sign::{Minus as M, Plus as P};

impl SignPattern {
    /// The eight valid patterns, lexicographic with `+` before `-`.
    pub const ALL: [SignPattern; 8] = [
        SignPattern([P, P, P, M]),
        SignPattern([P, P, M, P]),
        SignPattern([P, M, P, P]),
        SignPattern([P, M, M, M]),
        SignPattern([M, P, P, P]),
        SignPattern([M, P, M, M]),
        SignPattern([M, M, P, M]),
        SignPattern([M, M, M, P]),
    ];

    pub fn new(signs: [Sign; 4]) -> Result<Self> {
        let plus = signs.iter().filter(|&&s| s == Sign::Plus).count();
        if plus % 2 == 1 {
            Ok(SignPattern(signs))
        } else {
            Err(Error::InvalidPattern(symbols(&signs)))
        }
    }

    pub fn signs(&self) -> [Sign; 4] {
        self.0
    }

    /// Total negation; maps valid patterns to valid patterns.
    pub fn negated(&self) -> SignPattern {
        SignPattern(self.0.map(|s| -s))
    }

    /// Signed sum of four expectations under this pattern.
    pub fn apply(&self, expectations: &[BigRational; 4]) -> BigRational {
        self.0
            .iter()
            .zip(expectations)
            .map(|(s, e)| match s {
                Sign::Plus => e.clone(),
                Sign::Minus => -e,
            })
            .sum()
    }

    pub fn index(&self) -> usize {
        SignPattern::ALL.iter().position(|p| p == self).unwrap()
    }
}

impl std::str::FromStr for SignPattern {
    type Err = Error;

    /// Accepts `"+++-"` or `"(+,+,+,-)"`.
    fn from_str(s: &str) -> Result<Self> {
        let signs: Vec<Sign> = s
            .chars()
            .filter(|c| !matches!(c, '(' | ')' | ',' | ' '))
            .map(|c| Sign::from_symbol(c).ok_or_else(|| Error::InvalidPattern(s.to_string())))
            .collect::<Result<_>>()?;
        let signs: [Sign; 4] = signs
            .try_into()
            .map_err(|_| Error::InvalidPattern(s.to_string()))?;
        SignPattern::new(signs)
    }
}

fn symbols(signs: &[Sign; 4]) -> String {
    signs.iter().map(|s| s.symbol()).collect()
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&symbols(&self.0))
    }
}

/// Where Γ falls relative to the classical bound 2 and the quantum bound 2√2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bound {
    /// Γ ≤ 2.
    ClassicalBoundSatisfied,
    /// 2 < Γ ≤ 2√2.
    QuantumRegion,
    /// Γ > 2√2.
    SupraQuantum,
}

impl Bound {
    pub fn classify(gamma: &BigRational) -> Bound {
        if gamma <= &int(2) {
            Bound::ClassicalBoundSatisfied
        } else if gamma * gamma <= int(8) {
            // Γ > 2 here, so comparing squares is exact.
            Bound::QuantumRegion
        } else {
            Bound::SupraQuantum
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Bound::ClassicalBoundSatisfied => "classical_bound_satisfied",
            Bound::QuantumRegion => "quantum_region",
            Bound::SupraQuantum => "supra_quantum",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChshReport {
    /// `E[AB]` per treatment, in [`crate::Treatment::ALL`] order.
    pub expectations: [BigRational; 4],
    /// Signed sums in [`SignPattern::ALL`] order.
    pub sums: [(SignPattern, BigRational); 8],
    pub gamma: BigRational,
    /// Every pattern whose sum equals Γ.
    pub argmax_patterns: Vec<SignPattern>,
    pub classification: Bound,
}

impl ChshReport {
    pub fn gamma_decimal(&self, places: usize) -> String {
        format_decimal(&self.gamma, places)
    }

    pub fn violates_classical_bound(&self) -> bool {
        self.classification != Bound::ClassicalBoundSatisfied
    }

    /// Patterns whose signed sum exceeds 2.
    pub fn violated_facets(&self) -> impl Iterator<Item = &(SignPattern, BigRational)> {
        let two = int(2);
        self.sums.iter().filter(move |(_, v)| v > &two)
    }
}

pub fn compute_gamma(data: &ExperimentData) -> ChshReport {
    let expectations = data.expectations();
    let sums = SignPattern::ALL.map(|p| {
        let v = p.apply(&expectations);
        (p, v)
    });
    let gamma = sums
        .iter()
        .map(|(_, v)| v)
        .max()
        .expect("eight patterns")
        .clone();
    debug_assert!(!gamma.is_negative());
    let argmax_patterns = sums
        .iter()
        .filter(|(_, v)| *v == gamma)
        .map(|(p, _)| *p)
        .collect();
    ChshReport {
        expectations,
        classification: Bound::classify(&gamma),
        sums,
        gamma,
        argmax_patterns,
    }
}

pub fn chsh_facet_value(data: &ExperimentData, pattern: &SignPattern) -> BigRational {
    pattern.apply(&data.expectations())
}
