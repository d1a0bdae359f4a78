//! Sampling the measurement process photon by photon.
//!
//! A block input `phi_{k,l}` is a uniform superposition of photon-pair Bell states
//! `phi_{k,r_i}` over bit strings `r` of parity `l`; a logical input `phi_{k,l}` is
//! one over block states `phi_{s_i,l}` with `s` of parity `k`. Outcome
//! probabilities follow by drawing such strings uniformly, drawing each pair's
//! result from the matching physical column and classifying the counts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, Normal};

use crate::error::{invalid, Result};
use crate::oracle::parity::{bit, ParitySet};
use crate::outcome::{CountVector, Outcome, OutcomeMatrix, BELL_STATES, OUTCOMES};
use crate::propagation::RuleFamily;

/// Fixed number of independent streams; results do not depend on the thread count.
const SHARDS: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(invalid("samples", "must be at least 1"));
        }
        Ok(Self { samples, seed })
    }
}

/// Empirical outcome distribution with binomial standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub samples: u64,
    pub counts: [u64; OUTCOMES],
    pub frequencies: [f64; OUTCOMES],
    pub std_errors: [f64; OUTCOMES],
}

impl McEstimate {
    fn from_counts(counts: [u64; OUTCOMES]) -> Self {
        let samples: u64 = counts.iter().sum();
        let n = samples as f64;
        let frequencies = counts.map(|c| c as f64 / n);
        let std_errors = frequencies.map(|p| (p * (1.0 - p) / n).sqrt());
        Self {
            samples,
            counts,
            frequencies,
            std_errors,
        }
    }

    /// Largest deviation from `expected`, in equivalent normal standard deviations.
    ///
    /// Each outcome count is compared with its exact binomial distribution: the
    /// one-sided tail probability of the observed count is mapped to the normal
    /// quantile with the same tail. For counts in the bulk this is the usual
    /// `|f - p| / sigma`; for probabilities so small that only a handful of events
    /// are expected it avoids the breakdown of the normal approximation.
    pub fn max_deviation_sigmas(&self, expected: &[f64; OUTCOMES]) -> f64 {
        (0..OUTCOMES)
            .map(|u| equivalent_sigmas(self.counts[u], self.samples, expected[u]))
            .fold(0.0, f64::max)
    }

    pub fn agrees_with(&self, expected: &[f64; OUTCOMES], sigmas: f64) -> bool {
        self.max_deviation_sigmas(expected) <= sigmas
    }
}

/// Normal quantile matching the binomial tail of `observed` successes out of `trials`.
fn equivalent_sigmas(observed: u64, trials: u64, p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    if p == 0.0 || p == 1.0 {
        let expected = if p == 0.0 { 0 } else { trials };
        return if observed == expected { 0.0 } else { f64::INFINITY };
    }
    let dist = Binomial::new(p, trials).expect("p is in (0, 1)");
    let mean = p * trials as f64;
    let tail = if (observed as f64) > mean {
        dist.sf(observed - 1)
    } else {
        dist.cdf(observed)
    };
    if tail >= 0.5 {
        return 0.0;
    }
    if tail <= 0.0 {
        return f64::INFINITY;
    }
    -Normal::standard().inverse_cdf(tail)
}

/// Inverse-CDF sampler over the seven outcomes of each column.
#[derive(Debug, Clone)]
struct ColumnSampler {
    cumulative: [[f64; OUTCOMES]; BELL_STATES],
    last_nonzero: [usize; BELL_STATES],
}

impl ColumnSampler {
    fn new(p: &OutcomeMatrix) -> Self {
        let mut cumulative = [[0.0; OUTCOMES]; BELL_STATES];
        let mut last_nonzero = [0; BELL_STATES];
        for v in 0..BELL_STATES {
            let mut acc = 0.0;
            for u in 0..OUTCOMES {
                acc += p.at(u, v).max(0.0);
                cumulative[v][u] = acc;
                if p.at(u, v) > 0.0 {
                    last_nonzero[v] = u;
                }
            }
        }
        Self {
            cumulative,
            last_nonzero,
        }
    }

    fn draw<R: Rng>(&self, v: usize, rng: &mut R) -> Outcome {
        let x: f64 = rng.gen::<f64>() * self.cumulative[v][OUTCOMES - 1];
        let u = self.cumulative[v]
            .iter()
            .position(|&c| x < c)
            .unwrap_or(self.last_nonzero[v]);
        Outcome::ALL[u]
    }
}

fn sample_block<R: Rng>(
    sampler: &ColumnSampler,
    pairs: &ParitySet,
    k: u8,
    rules: RuleFamily,
    rng: &mut R,
) -> Result<Outcome> {
    let m = pairs.size();
    let r = pairs.sample(rng);
    let mut gamma = CountVector::zero();
    for i in 0..m {
        let column = usize::from(2 * k + bit(r, i));
        gamma.increment(sampler.draw(column, rng));
    }
    rules.classify(&gamma, m)
}

fn run_sharded<F>(cfg: McConfig, draw: F) -> Result<McEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Outcome> + Sync,
{
    let per_shard = cfg.samples / SHARDS;
    let extra = cfg.samples % SHARDS;
    let shard_counts: Result<Vec<[u64; OUTCOMES]>> = (0..SHARDS)
        .into_par_iter()
        .map(|shard| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(shard);
            let quota = per_shard + u64::from(shard < extra);
            let mut counts = [0u64; OUTCOMES];
            for _ in 0..quota {
                counts[draw(&mut rng)?.index()] += 1;
            }
            Ok(counts)
        })
        .collect();
    let mut total = [0u64; OUTCOMES];
    for c in shard_counts? {
        for u in 0..OUTCOMES {
            total[u] += c[u];
        }
    }
    Ok(McEstimate::from_counts(total))
}

fn check_bits(k: u8, l: u8) -> Result<()> {
    if k > 1 || l > 1 {
        return Err(invalid("k, l", "must be bits"));
    }
    Ok(())
}

/// Estimates the block-level column `phi_{k,l}` for blocks of `m` pairs.
pub fn mc_block_column(
    p: &OutcomeMatrix,
    m: usize,
    k: u8,
    l: u8,
    rules: RuleFamily,
    cfg: McConfig,
) -> Result<McEstimate> {
    check_bits(k, l)?;
    let pairs = ParitySet::new(l, m)?;
    let sampler = ColumnSampler::new(p);
    run_sharded(cfg, |rng| sample_block(&sampler, &pairs, k, rules, rng))
}

/// Estimates the logical-level column `phi_{k,l}` for codes of `n` blocks of `m` pairs.
#[allow(clippy::too_many_arguments)]
pub fn mc_logical_column(
    p: &OutcomeMatrix,
    n: usize,
    m: usize,
    k: u8,
    l: u8,
    rules_block: RuleFamily,
    rules_logical: RuleFamily,
    cfg: McConfig,
) -> Result<McEstimate> {
    check_bits(k, l)?;
    let blocks = ParitySet::new(k, n)?;
    let pairs = ParitySet::new(l, m)?;
    let sampler = ColumnSampler::new(p);
    run_sharded(cfg, |rng| {
        let s = blocks.sample(rng);
        let mut lambda = CountVector::zero();
        for i in 0..n {
            lambda.increment(sample_block(&sampler, &pairs, bit(s, i), rules_block, rng)?);
        }
        rules_logical.classify(&lambda, n)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physical::{p_matrix_depol, p_matrix_loss};

    #[test]
    fn deterministic_block() {
        let p = p_matrix_loss(1.0).unwrap();
        let cfg = McConfig::new(2000, 1).unwrap();
        let est = mc_block_column(&p, 3, 1, 0, RuleFamily::StandardF, cfg).unwrap();
        assert_eq!(est.counts[Outcome::K1L0.index()], 2000);
    }

    #[test]
    fn single_pair_reproduces_the_column() {
        let p = p_matrix_depol(0.8, 0.2).unwrap();
        let cfg = McConfig::new(200_000, 9).unwrap();
        for v in 0..4u8 {
            let est = mc_block_column(&p, 1, v / 2, v % 2, RuleFamily::StandardF, cfg).unwrap();
            assert!(est.agrees_with(&p.column(v as usize), 4.0));
        }
    }

    #[test]
    fn ideal_two_two_logical() {
        let p = p_matrix_loss(1.0).unwrap();
        let cfg = McConfig::new(20_000, 5).unwrap();
        let f = RuleFamily::StandardF;
        let g = RuleFamily::StandardG;
        let one = mc_logical_column(&p, 2, 2, 1, 1, f, g, cfg).unwrap();
        assert_eq!(one.frequencies[Outcome::K1L1.index()], 1.0);
        let zero = mc_logical_column(&p, 2, 2, 0, 0, f, g, cfg).unwrap();
        assert!((zero.frequencies[Outcome::K0L0.index()] - 0.5).abs() < 0.02);
        assert!((zero.frequencies[Outcome::K0Unknown.index()] - 0.5).abs() < 0.02);
    }

    #[test]
    fn equivalent_sigmas_match_the_normal_bulk() {
        // 1e6 trials, p = 0.3: sigma = 458.26; a count 2 sigma high.
        let z = equivalent_sigmas(300_000 + 917, 1_000_000, 0.3);
        assert!((z - 2.0).abs() < 0.02, "{z}");
        assert_eq!(equivalent_sigmas(300_000, 1_000_000, 0.3), 0.0);
        // Three events where 0.35 are expected is unusual but not a 4 sigma event.
        let rare = equivalent_sigmas(3, 1_000_000, 3.5e-7);
        assert!(rare > 2.0 && rare < 3.0, "{rare}");
        assert_eq!(equivalent_sigmas(1, 10, 0.0), f64::INFINITY);
    }

    #[test]
    fn reproducible_given_seed() {
        let p = p_matrix_depol(0.9, 0.05).unwrap();
        let cfg = McConfig::new(10_001, 77).unwrap();
        let a = mc_block_column(&p, 4, 0, 1, RuleFamily::StandardF, cfg).unwrap();
        let b = mc_block_column(&p, 4, 0, 1, RuleFamily::StandardF, cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples, 10_001);
        assert!(McConfig::new(0, 1).is_err());
    }
}
