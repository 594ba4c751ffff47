//! Random instance generators shared by the integration tests.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use selinf::{ExperimentData, HiddenStateDistribution, JointTable, Level, Treatment};

pub fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Random sparse integer weights over the 16 hidden states.
pub fn random_hidden(rng: &mut impl Rng) -> HiddenStateDistribution {
    loop {
        let weights: Vec<u64> = (0..16)
            .map(|_| if rng.random_bool(0.4) { rng.random_range(1..20) } else { 0 })
            .collect();
        if let Ok(w) = HiddenStateDistribution::from_integer_weights(&weights) {
            return w;
        }
    }
}

/// Marginally selective data: random marginals per factor level and, per
/// treatment, `Pr(A=+1, B=+1)` within the Fréchet bounds, often at one of
/// them. Coarse denominators put a fair share of instances on Γ = 2.
pub fn random_selective_marginals(rng: &mut impl Rng) -> ExperimentData {
    let d: i64 = 2 * rng.random_range(1..7);
    let mut level = || if rng.random_bool(0.4) { d / 2 } else { rng.random_range(0..=d) };
    let pa: [i64; 2] = [level(), level()];
    let pb: [i64; 2] = [level(), level()];
    let tables = Treatment::ALL.map(|t| {
        let a = pa[t.alpha.index()];
        let b = pb[t.beta.index()];
        let lo = (a + b - d).max(0);
        let hi = a.min(b);
        let pp = match rng.random_range(0..5) {
            0 | 1 => lo,
            2 | 3 => hi,
            _ => rng.random_range(lo..=hi),
        };
        JointTable::new(r(pp, d), r(a - pp, d), r(b - pp, d), r(d - a - b + pp, d)).unwrap()
    });
    ExperimentData::new(tables)
}

/// Four unrelated random tables; marginal selectivity almost always fails.
pub fn random_tables(rng: &mut impl Rng) -> ExperimentData {
    ExperimentData::new(Treatment::ALL.map(|_| loop {
        let w: [i64; 4] = std::array::from_fn(|_| rng.random_range(0..10));
        let total: i64 = w.iter().sum();
        if total > 0 {
            break JointTable::from_parts(w, total).unwrap();
        }
    }))
}

/// The relabelings under which Γ must be invariant.
pub fn relabelings(data: &ExperimentData) -> Vec<(&'static str, ExperimentData)> {
    vec![
        ("flip A at a", data.flip_a_at(Level::First)),
        ("flip A at a'", data.flip_a_at(Level::Second)),
        ("flip B at b", data.flip_b_at(Level::First)),
        ("flip B at b'", data.flip_b_at(Level::Second)),
        ("swap a<->a'", data.swap_alpha_levels()),
        ("swap b<->b'", data.swap_beta_levels()),
        ("flip A at a and a'", data.flip_a_at(Level::First).flip_a_at(Level::Second)),
        ("exchange (alpha,A) with (beta,B)", data.swap_factors()),
    ]
}
