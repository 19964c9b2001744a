//! Reproducible Monte Carlo sampling of outcome quadruples.
//!
//! Draws come from ChaCha20 (the `rand_chacha` implementation, whose output
//! stream is fixed across platforms and versions). The 32-byte key is the
//! seed as 8 little-endian bytes followed by 24 zero bytes; stream 0 is used.
//! Draw `i` consumes keystream words `2i` and `2i + 1` as one little-endian
//! `u64`, and maps it to a uniform `u = (x >> 11) * 2^-53` in `[0, 1)`. The
//! quadruple is the first one in canonical order whose cumulative probability
//! exceeds `u`.
//!
//! Because each draw sits at a fixed keystream position, a worker handling
//! draws `start..end` seeks to word `2 * start` and produces exactly the draws
//! a single worker would, so sharded counts equal unsharded counts.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::quantum::{CorrelatorSet, GrandJointDistribution, OutcomeQuadruple, PairLabel};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    /// Counts in canonical quadruple order.
    pub counts: [u64; 16],
    pub n: u64,
    pub seed: u64,
}

impl OutcomeCounts {
    pub fn from_counts(counts: [u64; 16], seed: u64) -> Self {
        OutcomeCounts {
            n: counts.iter().sum(),
            counts,
            seed,
        }
    }

    pub fn count(&self, q: OutcomeQuadruple) -> u64 {
        self.counts[q.index()]
    }

    pub fn csv_header() -> String {
        let mut cols: Vec<String> = OutcomeQuadruple::all().map(|q| format!("c{}", q.label())).collect();
        cols.push("n".into());
        cols.join(",")
    }

    /// One CSV row: the 16 counts in canonical order, then `n`.
    pub fn csv_row(&self) -> String {
        let mut cols: Vec<String> = self.counts.iter().map(u64::to_string).collect();
        cols.push(self.n.to_string());
        cols.join(",")
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", Self::csv_header(), self.csv_row())
    }
}

fn generator(seed: u64, first_draw: u64) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_word_pos(2 * first_draw as u128);
    rng
}

fn uniform(rng: &mut ChaCha20Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

struct InverseCdf {
    cumulative: [f64; 16],
    last_nonzero: usize,
}

impl InverseCdf {
    fn new(d: &GrandJointDistribution) -> Self {
        let mut cumulative = [0.0; 16];
        let mut acc = 0.0;
        for (c, p) in cumulative.iter_mut().zip(d.probs()) {
            acc += p;
            *c = acc;
        }
        let last_nonzero = d.probs().iter().rposition(|p| *p > 0.0).unwrap_or(15);
        InverseCdf {
            cumulative,
            last_nonzero,
        }
    }

    fn pick(&self, u: f64) -> usize {
        // rounding can leave the total slightly below 1
        self.cumulative
            .iter()
            .position(|c| u < *c)
            .map_or(self.last_nonzero, |i| i.min(self.last_nonzero))
    }
}

fn count_range(cdf: &InverseCdf, seed: u64, start: u64, end: u64) -> [u64; 16] {
    let mut rng = generator(seed, start);
    let mut counts = [0u64; 16];
    for _ in start..end {
        counts[cdf.pick(uniform(&mut rng))] += 1;
    }
    counts
}

/// `n` independent draws from `d`.
pub fn sample(d: &GrandJointDistribution, n: u64, seed: u64) -> OutcomeCounts {
    sample_sharded(d, n, seed, 1)
}

/// Draw `i` of the sequence used by [`sample`], as a quadruple.
pub fn draw_at(d: &GrandJointDistribution, seed: u64, i: u64) -> OutcomeQuadruple {
    let cdf = InverseCdf::new(d);
    let mut rng = generator(seed, i);
    OutcomeQuadruple::from_index(cdf.pick(uniform(&mut rng)))
}

/// Same draws as [`sample`], split into `workers` contiguous ranges that are
/// generated in parallel.
pub fn sample_sharded(d: &GrandJointDistribution, n: u64, seed: u64, workers: usize) -> OutcomeCounts {
    let cdf = InverseCdf::new(d);
    let workers = workers.max(1) as u64;
    let chunk = n.div_ceil(workers).max(1);
    let ranges: Vec<(u64, u64)> = (0..workers)
        .map(|w| (w * chunk, ((w + 1) * chunk).min(n)))
        .filter(|(s, e)| s < e)
        .collect();
    let counts = ranges
        .par_iter()
        .map(|&(s, e)| count_range(&cdf, seed, s, e))
        .reduce(
            || [0u64; 16],
            |mut acc, c| {
                for (a, x) in acc.iter_mut().zip(c) {
                    *a += x;
                }
                acc
            },
        );
    OutcomeCounts { counts, n, seed }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatedCorrelators {
    pub estimates: CorrelatorSet,
    /// `sqrt((1 - e^2) / n)` per entry, in the order of [`CorrelatorSet`].
    pub std_errors: CorrelatorSet,
    pub n: u64,
}

/// Count-weighted means of the four cross-particle outcome products.
pub fn empirical_correlators(c: &OutcomeCounts) -> Result<EstimatedCorrelators> {
    if c.n == 0 {
        return Err(Error::EmptySample);
    }
    let n = c.n as f64;
    let estimate = |pair: PairLabel| -> f64 {
        let sum: i64 = OutcomeQuadruple::all()
            .map(|q| {
                let product = (q.get(pair.first()) * q.get(pair.second())).as_i8() as i64;
                product * c.count(q) as i64
            })
            .sum();
        sum as f64 / n
    };
    let se = |e: f64| ((1.0 - e * e).max(0.0) / n).sqrt();
    let estimates = CorrelatorSet {
        ab: estimate(PairLabel::A1_B1),
        ab_prime: estimate(PairLabel::A1_B2),
        a_prime_b: estimate(PairLabel::A2_B1),
        a_prime_b_prime: estimate(PairLabel::A2_B2),
    };
    let std_errors = CorrelatorSet {
        ab: se(estimates.ab),
        ab_prime: se(estimates.ab_prime),
        a_prime_b: se(estimates.a_prime_b),
        a_prime_b_prime: se(estimates.a_prime_b_prime),
    };
    Ok(EstimatedCorrelators {
        estimates,
        std_errors,
        n: c.n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{grand_joint_quantum, Mode, Scenario, Sign};
    use std::f64::consts::FRAC_PI_3;

    fn exact(sc: &Scenario) -> GrandJointDistribution {
        grand_joint_quantum(sc).unwrap()
    }

    #[test]
    fn empty_sample() {
        let c = sample(&GrandJointDistribution::uniform(), 0, 7);
        assert_eq!(c.counts, [0; 16]);
        assert_eq!(c.n, 0);
        assert!(matches!(empirical_correlators(&c), Err(Error::EmptySample)));
    }

    #[test]
    fn point_mass_sample() {
        let q = OutcomeQuadruple::new(Sign::Minus, Sign::Plus, Sign::Plus, Sign::Minus);
        let c = sample(&GrandJointDistribution::point_mass(q), 100, 3);
        assert_eq!(c.count(q), 100);
        assert_eq!(c.counts.iter().sum::<u64>(), 100);
    }

    #[test]
    fn anticorrelated_support_is_respected() {
        let sc = Scenario::from_radians(Mode::Sequential, 1.0, 2.0, 1.0, 4.0).unwrap();
        let c = sample(&exact(&sc), 50_000, 11);
        for q in OutcomeQuadruple::all().filter(|q| q.a1 == q.b1) {
            assert_eq!(c.count(q), 0);
        }
    }

    #[test]
    fn point_mass_correlator() {
        let q = OutcomeQuadruple::new(Sign::Plus, Sign::Minus, Sign::Plus, Sign::Minus);
        let c = sample(&GrandJointDistribution::point_mass(q), 10, 0);
        assert_eq!(empirical_correlators(&c).unwrap().estimates.ab, -1.0);
    }

    #[test]
    fn expected_counts_give_exact_estimate() {
        let sc = Scenario::from_differences(Mode::Sequential, FRAC_PI_3, 0.0, 0.0).unwrap();
        let d = exact(&sc);
        // probabilities are multiples of 1/8 here; scale to integer counts
        let n = 8_000u64;
        let counts = d.probs().map(|p| (p * n as f64).round() as u64);
        let c = OutcomeCounts::from_counts(counts, 0);
        assert_eq!(c.n, n);
        assert_eq!(empirical_correlators(&c).unwrap().estimates.ab, -0.5);
    }

    #[test]
    fn determinism_and_sharding() {
        let sc = Scenario::from_radians(Mode::Sequential, 0.3, 1.9, 2.4, 5.0).unwrap();
        let d = exact(&sc);
        let one = sample(&d, 100_003, 99);
        assert_eq!(one, sample(&d, 100_003, 99));
        for k in [2, 3, 8, 17] {
            assert_eq!(sample_sharded(&d, 100_003, 99, k), one);
        }
        assert_ne!(sample(&d, 100_003, 100).counts, one.counts);
    }

    #[test]
    fn draw_at_matches_sequence() {
        let d = GrandJointDistribution::uniform();
        let mut counts = [0u64; 16];
        for i in 0..1000 {
            counts[draw_at(&d, 5, i).index()] += 1;
        }
        assert_eq!(counts, sample(&d, 1000, 5).counts);
    }

    #[test]
    fn csv_layout() {
        let c = OutcomeCounts::from_counts([1; 16], 0);
        let csv = c.to_csv();
        let mut lines = csv.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(header.len(), 17);
        assert_eq!(header[0], "c++++");
        assert_eq!(header[16], "n");
        assert_eq!(lines.next().unwrap().split(',').next_back(), Some("16"));
    }
}
