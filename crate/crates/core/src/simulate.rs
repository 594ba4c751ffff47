//! Synthetic data from selective and contaminated latent models.
//!
//! # Sampling algorithm
//!
//! Each treatment `t` (index 0..4 in `(a,b), (a,b'), (a',b), (a',b')` order)
//! gets its own ChaCha20 stream: the key is `ChaCha20Rng::seed_from_u64(seed)`
//! from `rand_chacha` 0.9, and the stream id is set to `t`. A draw takes one
//! `next_u64()` value `u` and returns the first cell `k` (in `pp, pm, mp, mm`
//! order) with `u < floor(F_k · 2^64)`, where `F_k` is the exact cumulative
//! probability through cell `k`. Draws for a treatment are taken
//! sequentially. Treatments are independent, so they may be sampled in
//! parallel without changing the output.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::feasibility::{predicted_tables, HiddenStateDistribution};
use crate::model::{CountTable, ExperimentData, JointTable, Probability, Sign, Treatment};

/// Seed used for the documented reproducibility runs.
pub const DEFAULT_SEED: u64 = 0x5EED_2012;

/// With probability `eta`, the selective mechanism is replaced by a fixed
/// outcome pair that may depend on both factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContaminatedModel {
    pub hidden: HiddenStateDistribution,
    pub eta: Probability,
    /// Outcome pair `(A, B)` per treatment, in [`Treatment::ALL`] order.
    pub cross_map: [(Sign, Sign); 4],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Model {
    Selective(HiddenStateDistribution),
    Contaminated(ContaminatedModel),
}

impl Model {
    pub fn hidden(&self) -> &HiddenStateDistribution {
        match self {
            Model::Selective(h) => h,
            Model::Contaminated(c) => &c.hidden,
        }
    }
}

pub fn model_tables(model: &Model) -> ExperimentData {
    match model {
        Model::Selective(hidden) => predicted_tables(hidden),
        Model::Contaminated(c) => {
            let base = predicted_tables(&c.hidden);
            let cross = ExperimentData::new(c.cross_map.map(|(a, b)| JointTable::point_mass(a, b)));
            base.mix(&cross, &c.eta)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleSpec {
    n_per_treatment: u64,
    pub seed: u64,
}

impl SampleSpec {
    pub fn new(n_per_treatment: u64, seed: u64) -> Result<Self> {
        if n_per_treatment == 0 {
            return Err(Error::EmptySample);
        }
        Ok(SampleSpec { n_per_treatment, seed })
    }

    pub fn n_per_treatment(&self) -> u64 {
        self.n_per_treatment
    }
}

/// `floor(F_k · 2^64)` for the cumulative probabilities of `table`.
fn thresholds(table: &JointTable) -> [u128; 4] {
    let scale = BigRational::from_integer(BigInt::from(1u128 << 64));
    let mut cumulative = BigRational::from_integer(BigInt::from(0));
    std::array::from_fn(|k| {
        cumulative += table.cells()[k].value();
        let scaled = (&cumulative * &scale).floor().to_integer();
        u128::try_from(scaled).expect("cumulative probability is at most 1")
    })
}

fn treatment_rng(seed: u64, t: Treatment) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(t.index() as u64);
    rng
}

/// Draws `n` trials from `table` using the given stream.
fn sample_table(table: &JointTable, n: u64, rng: &mut impl RngCore) -> CountTable {
    let limits = thresholds(table);
    let mut counts = [0u64; 4];
    for _ in 0..n {
        let u = rng.next_u64() as u128;
        // The last threshold is 2^64 whenever the table sums to one.
        let k = limits.iter().position(|&limit| u < limit).unwrap_or(3);
        counts[k] += 1;
    }
    CountTable::new(counts[0], counts[1], counts[2], counts[3])
}

/// Independent multinomial samples per treatment; the returned data carry
/// the counts and the tables estimated from them.
pub fn sample_counts(model: &Model, spec: &SampleSpec) -> ExperimentData {
    let tables = model_tables(model);
    let counts = Treatment::ALL.map(|t| {
        let mut rng = treatment_rng(spec.seed, t);
        sample_table(tables.table(t), spec.n_per_treatment, &mut rng)
    });
    ExperimentData::from_counts(counts).expect("n_per_treatment >= 1")
}

/// Convenience for building a cross map: `A` copies `β`'s level and `B`
/// copies `α`'s level (`+1` for the first level).
pub fn crossed_cross_map() -> [(Sign, Sign); 4] {
    let sign = |first: bool| if first { Sign::Plus } else { Sign::Minus };
    Treatment::ALL.map(|t| {
        (
            sign(t.beta == crate::Level::First),
            sign(t.alpha == crate::Level::First),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::{fine_criterion, solve_feasibility, HiddenState};
    use crate::rational::{int, ratio};
    use crate::selectivity::check_marginal_selectivity;
    use num_traits::{Signed, Zero};

    fn contaminated(eta: Probability) -> Model {
        Model::Contaminated(ContaminatedModel {
            hidden: HiddenStateDistribution::uniform(),
            eta,
            cross_map: crossed_cross_map(),
        })
    }

    #[test]
    fn selective_uniform_gives_uniform_tables() {
        let m = Model::Selective(HiddenStateDistribution::uniform());
        assert_eq!(model_tables(&m), ExperimentData::uniform());
    }

    #[test]
    fn eta_zero_is_selective() {
        let hidden = HiddenStateDistribution::from_integer_weights(&[3, 0, 1, 4, 0, 0, 2, 1, 0, 5, 0, 1, 1, 0, 2, 7]).unwrap();
        let m = Model::Contaminated(ContaminatedModel {
            hidden: hidden.clone(),
            eta: Probability::zero(),
            cross_map: crossed_cross_map(),
        });
        assert_eq!(model_tables(&m), model_tables(&Model::Selective(hidden)));
    }

    #[test]
    fn full_contamination_breaks_marginal_selectivity() {
        let data = model_tables(&contaminated(Probability::one()));
        // A = +1 under (a,b) but -1 under (a,b'): Pr(A=+1 at a) is 1 vs 0.
        let r = check_marginal_selectivity(&data, &int(0));
        assert!(!r.satisfied);
        assert_eq!(r.comparisons[0].delta, Probability::one());
        assert!(!solve_feasibility(&data).is_feasible());
    }

    #[test]
    fn contamination_is_affine_in_eta() {
        let at = |p: BigRational| model_tables(&contaminated(Probability::new(p).unwrap()));
        let (t0, t1) = (at(int(0)), at(int(1)));
        for k in 0..=8 {
            let eta = ratio(k, 8);
            let mid = at(eta.clone());
            for t in Treatment::ALL {
                for c in 0..4 {
                    let expected = (int(1) - &eta) * t0.table(t).cells()[c].value()
                        + &eta * t1.table(t).cells()[c].value();
                    assert_eq!(mid.table(t).cells()[c].value(), &expected);
                }
            }
        }
    }

    #[test]
    fn point_mass_sampling() {
        let m = Model::Selective(HiddenStateDistribution::point_mass(HiddenState::from_index(0)));
        for seed in [0, 1, u64::MAX] {
            let data = sample_counts(&m, &SampleSpec::new(37, seed).unwrap());
            for c in data.counts().unwrap() {
                assert_eq!(c, &CountTable::new(37, 0, 0, 0));
            }
        }
    }

    #[test]
    fn point_mass_on_last_cell() {
        let m = Model::Selective(HiddenStateDistribution::point_mass(HiddenState::from_index(15)));
        let data = sample_counts(&m, &SampleSpec::new(1000, 3).unwrap());
        for c in data.counts().unwrap() {
            assert_eq!(c, &CountTable::new(0, 0, 0, 1000));
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let m = contaminated(Probability::ratio(1, 3).unwrap());
        let spec = SampleSpec::new(500, 99).unwrap();
        assert_eq!(sample_counts(&m, &spec), sample_counts(&m, &spec));
        let other = sample_counts(&m, &SampleSpec::new(500, 100).unwrap());
        assert_ne!(sample_counts(&m, &spec).counts(), other.counts());
    }

    #[test]
    fn treatments_use_distinct_streams() {
        let data = sample_counts(&Model::Selective(HiddenStateDistribution::uniform()), &SampleSpec::new(200, 5).unwrap());
        let c = data.counts().unwrap();
        assert!(c.iter().any(|x| x != &c[0]));
    }

    #[test]
    fn thresholds_are_exact() {
        let t = JointTable::from_parts([1, 1, 1, 1], 4).unwrap();
        assert_eq!(thresholds(&t), [1 << 62, 1 << 63, 3 << 62, 1 << 64]);
        let t = JointTable::from_parts([1, 0, 0, 2], 3).unwrap();
        let third = (1u128 << 64) / 3;
        assert_eq!(thresholds(&t), [third, third, third, 1 << 64]);
    }

    #[test]
    fn zero_sample_size_is_rejected() {
        assert!(matches!(SampleSpec::new(0, 1), Err(Error::EmptySample)));
    }

    #[test]
    fn cell_frequencies_converge() {
        let hidden = HiddenStateDistribution::from_integer_weights(&[5, 1, 0, 2, 3, 0, 1, 1, 0, 2, 4, 0, 1, 3, 0, 1]).unwrap();
        let m = contaminated(Probability::ratio(1, 5).unwrap());
        let m = match m {
            Model::Contaminated(mut c) => {
                c.hidden = hidden;
                Model::Contaminated(c)
            }
            _ => unreachable!(),
        };
        let truth = model_tables(&m);
        let deviation = |n: u64| {
            let sample = sample_counts(&m, &SampleSpec::new(n, DEFAULT_SEED).unwrap());
            Treatment::ALL
                .iter()
                .flat_map(|&t| {
                    let (s, e) = (sample.table(t).clone(), truth.table(t).clone());
                    (0..4).map(move |c| (s.cells()[c].value() - e.cells()[c].value()).abs())
                })
                .fold(BigRational::zero(), |a, b| a.max(b))
        };
        let d = [deviation(100), deviation(10_000), deviation(1_000_000)];
        assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
        assert!(d[2] < ratio(3, 1000));
    }

    #[test]
    fn selective_models_pass_fine() {
        let hidden = HiddenStateDistribution::from_integer_weights(&[1, 2, 3, 4, 5, 6, 7, 8, 8, 7, 6, 5, 4, 3, 2, 1]).unwrap();
        let data = model_tables(&Model::Selective(hidden));
        assert!(fine_criterion(&data));
        assert!(solve_feasibility(&data).is_feasible());
    }
}
