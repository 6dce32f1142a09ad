//! Combinatorial and probabilistic analysis of the adversarial family.
//!
//! A *segmentation* for a left agent `i` is a perfect pairing of `R` in
//! which at most a quarter of the pairs are split by `S_i` (contain
//! exactly one neighbor). Allocations whose neighborhood unions have few
//! boundary points force such pairings to exist; randomness makes them
//! collectively unlikely. This module provides the exact combinatorial
//! checks at the smallest scale (`m = 32`, where the `C(16, 8) = 12870`
//! neighborhoods can be enumerated outright), seeded Monte Carlo
//! estimation beyond it, and log-space evaluation of the final
//! union-bound expression
//! `C(m/2, m/4) * (m/2 - 1)!! * 2^(m/4) * exp(-m^2/512)`.
//!
//! Probability bounds are evaluated as natural logarithms in double
//! precision; exact rationals are reserved for cake arithmetic and the
//! small-case enumeration.

use std::collections::BTreeSet;

use num::bigint::BigInt;
use num::One;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::adversary::AdversaryInstance;
use crate::fairness::Allocation;
use crate::protocol::Transcript;
use crate::rational::{rat, Rational};
use crate::seeding::derive_seed;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("pair ({a}, {b}) is degenerate or reuses an element")]
    BadPair { a: usize, b: usize },
    #[error("exact enumeration is only implemented at m = 32, got {m}")]
    ExactScaleOnly { m: usize },
    #[error("m must be a positive multiple of 32, got {m}")]
    BadScale { m: usize },
    #[error("need at least one trial")]
    NoTrials,
    #[error("agent {agent} received an empty piece")]
    EmptyPiece { agent: usize },
    #[error("agents {a} and {b} share an infimum, which a valid allocation cannot do")]
    TiedInfimum { a: usize, b: usize },
}

/// A perfect pairing of a vertex set: disjoint unordered pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairPartition {
    pairs: Vec<(usize, usize)>,
}

impl PairPartition {
    pub fn new(raw: Vec<(usize, usize)>) -> Result<Self, AnalysisError> {
        let mut seen = BTreeSet::new();
        let mut pairs = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            let (lo, hi) = (a.min(b), a.max(b));
            if lo == hi || !seen.insert(lo) || !seen.insert(hi) {
                return Err(AnalysisError::BadPair { a, b });
            }
            pairs.push((lo, hi));
        }
        pairs.sort_unstable();
        Ok(PairPartition { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn elements(&self) -> BTreeSet<usize> {
        self.pairs.iter().flat_map(|&(a, b)| [a, b]).collect()
    }

    /// Number of pairs containing exactly one element of `set`.
    pub fn split_count(&self, set: &BTreeSet<usize>) -> usize {
        self.pairs
            .iter()
            .filter(|(a, b)| set.contains(a) != set.contains(b))
            .count()
    }
}

/// A pairing is a segmentation for `s_i` when at most a quarter of its
/// pairs are split by `s_i`.
pub fn is_segmentation_for(partition: &PairPartition, s_i: &BTreeSet<usize>) -> bool {
    4 * partition.split_count(s_i) <= partition.len()
}

/// A pairing is a segmentation for a set of left agents when it is one
/// for every member (vacuously true for the empty set).
pub fn is_segmentation_for_set(
    partition: &PairPartition,
    agents: &BTreeSet<usize>,
    instance: &AdversaryInstance,
) -> bool {
    agents
        .iter()
        .all(|&i| is_segmentation_for(partition, instance.neighborhood(i)))
}

/// The pairing induced by an allocation: sort `R` by the infimum of each
/// agent's piece and pair consecutive agents. Pairing depends only on
/// each piece's first interval.
pub fn canonical_segmentation(
    allocation: &Allocation,
    instance: &AdversaryInstance,
) -> Result<PairPartition, AnalysisError> {
    let mut by_infimum: Vec<(Rational, usize)> = Vec::with_capacity(instance.right_agents().len());
    for agent in instance.right_agents() {
        let piece = allocation.piece(agent);
        let first = piece
            .intervals()
            .first()
            .ok_or(AnalysisError::EmptyPiece { agent })?;
        by_infimum.push((first.lo().clone(), agent));
    }
    by_infimum.sort();
    for w in by_infimum.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(AnalysisError::TiedInfimum {
                a: w[0].1,
                b: w[1].1,
            });
        }
    }
    let pairs = by_infimum
        .chunks_exact(2)
        .map(|c| (c[0].1, c[1].1))
        .collect();
    PairPartition::new(pairs)
}

/// Concrete check of the boundary-to-segmentation implication: when
/// every agent in `agents` has `b_i <= m/16`, the canonical pairing of
/// the allocation must be a segmentation for all of them. A report with
/// `implication_ok == false` would falsify the implementation, not the
/// underlying combinatorics.
#[derive(Debug, Clone)]
pub struct Lemma3Report {
    /// `(agent, b_i)` for every agent checked.
    pub boundary_counts: Vec<(usize, usize)>,
    /// `(agent, queries issued to it)` from the transcript.
    pub query_counts: Vec<(usize, u64)>,
    /// All checked agents have `b_i <= m/16`.
    pub premise_holds: bool,
    pub segmentation: Option<PairPartition>,
    pub conclusion_holds: Option<bool>,
    pub implication_ok: bool,
}

pub fn lemma3_check(
    allocation: &Allocation,
    transcript: &Transcript,
    instance: &AdversaryInstance,
    agents: &BTreeSet<usize>,
) -> Result<Lemma3Report, AnalysisError> {
    let profile = crate::adversary::boundary_profile(allocation, instance);
    let threshold = instance.m() / 16;
    let boundary_counts: Vec<(usize, usize)> = agents
        .iter()
        .map(|&i| (i, profile.boundary_count(i)))
        .collect();
    let query_counts = agents
        .iter()
        .map(|&i| {
            let count = transcript
                .entries()
                .iter()
                .filter(|e| e.query.agent == i)
                .count() as u64;
            (i, count)
        })
        .collect();
    let premise_holds = boundary_counts.iter().all(|&(_, b)| b <= threshold);
    let (segmentation, conclusion_holds) = if premise_holds {
        let partition = canonical_segmentation(allocation, instance)?;
        let ok = is_segmentation_for_set(&partition, agents, instance);
        (Some(partition), Some(ok))
    } else {
        (None, None)
    };
    let implication_ok = !premise_holds || conclusion_holds == Some(true);
    Ok(Lemma3Report {
        boundary_counts,
        query_counts,
        premise_holds,
        segmentation,
        conclusion_holds,
        implication_ok,
    })
}

/// `exp(-m/128)`: the concentration bound on the probability that at
/// most 5/8 of the pairs of a fixed pairing are hit by a random
/// neighborhood.
pub fn hoeffding_tail_bound(m: usize) -> f64 {
    (-(m as f64) / 128.0).exp()
}

/// Everything the full `m = 32` enumeration knows: all `C(16, 8) =
/// 12870` neighborhoods scored against the fixed consecutive pairing of
/// a 16-element `R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitEnumeration {
    /// Total subsets enumerated (12870).
    pub subsets: u64,
    /// `hit_counts[h]`: subsets hitting exactly `h` of the 8 pairs.
    pub hit_counts: [u64; 9],
    /// `miss_counts[h]`: subsets for which exactly `h` pairs contain a
    /// vertex *outside* the subset.
    pub miss_counts: [u64; 9],
    /// `split_counts[s]`: subsets splitting exactly `s` pairs.
    pub split_counts: [u64; 9],
    /// Subsets hitting the first pair.
    pub pair0_hit: u64,
}

impl SplitEnumeration {
    /// Exact `Pr[hits <= 5]`.
    pub fn hit_tail(&self) -> Rational {
        let favorable: u64 = self.hit_counts[..=5].iter().sum();
        rat(favorable as i64, self.subsets as i64)
    }

    /// Exact `Pr[pairs with an outside vertex <= 5]`.
    pub fn miss_tail(&self) -> Rational {
        let favorable: u64 = self.miss_counts[..=5].iter().sum();
        rat(favorable as i64, self.subsets as i64)
    }

    /// Exact probability that one fixed pair is hit.
    pub fn per_pair_hit_probability(&self) -> Rational {
        rat(self.pair0_hit as i64, self.subsets as i64)
    }
}

/// Enumerates all 8-element subsets of a 16-element `R` against the
/// consecutive pairing `(0,1), (2,3), ..., (14,15)`. Any fixed pairing
/// gives the same distribution by symmetry.
pub fn enumerate_splits_m32() -> SplitEnumeration {
    let mut out = SplitEnumeration {
        subsets: 0,
        hit_counts: [0; 9],
        miss_counts: [0; 9],
        split_counts: [0; 9],
        pair0_hit: 0,
    };
    for mask in 0u32..(1 << 16) {
        if mask.count_ones() != 8 {
            continue;
        }
        out.subsets += 1;
        let mut hits = 0;
        let mut misses = 0;
        let mut splits = 0;
        for pair in 0..8 {
            let bits = (mask >> (2 * pair)) & 3;
            if bits != 0 {
                hits += 1;
            }
            if bits != 3 {
                misses += 1;
            }
            if bits == 1 || bits == 2 {
                splits += 1;
            }
        }
        out.hit_counts[hits] += 1;
        out.miss_counts[misses] += 1;
        out.split_counts[splits] += 1;
        if mask & 3 != 0 {
            out.pair0_hit += 1;
        }
    }
    out
}

/// Exact tail probability `Pr[hits <= (5/8)(m/4)]` by full enumeration.
/// Only the smallest scale is enumerable; use
/// [`monte_carlo_split_tail`] beyond it.
pub fn exact_split_tail(m: usize) -> Result<Rational, AnalysisError> {
    if m != 32 {
        return Err(AnalysisError::ExactScaleOnly { m });
    }
    Ok(enumerate_splits_m32().hit_tail())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloEstimate {
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub std_error: f64,
}

impl MonteCarloEstimate {
    /// Symmetric binomial confidence interval at `z` standard errors,
    /// clamped to `[0, 1]`.
    pub fn confidence_interval(&self, z: f64) -> (f64, f64) {
        let half = z * self.std_error;
        ((self.estimate - half).max(0.0), (self.estimate + half).min(1.0))
    }
}

/// Estimates `Pr[hits <= (5/8)(m/4)]` by sampling neighborhoods
/// uniformly against the consecutive pairing. Trials use derived
/// per-trial seeds, so the estimate is reproducible and parallel-safe.
pub fn monte_carlo_split_tail(
    m: usize,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloEstimate, AnalysisError> {
    if m == 0 || m % 32 != 0 {
        return Err(AnalysisError::BadScale { m });
    }
    if trials == 0 {
        return Err(AnalysisError::NoTrials);
    }
    let r_size = m / 2;
    let sample_size = m / 4;
    let threshold = 5 * m / 32;
    let successes = (0..trials)
        .into_par_iter()
        .filter(|&trial| {
            let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, trial));
            let mut pool: Vec<usize> = (0..r_size).collect();
            let (chosen, _) = pool.partial_shuffle(&mut rng, sample_size);
            let mut in_set = vec![false; r_size];
            for &v in chosen.iter() {
                in_set[v] = true;
            }
            let hits = (0..r_size / 2)
                .filter(|&p| in_set[2 * p] || in_set[2 * p + 1])
                .count();
            hits <= threshold
        })
        .count() as u64;
    let estimate = successes as f64 / trials as f64;
    let std_error = (estimate * (1.0 - estimate) / trials as f64).sqrt();
    Ok(MonteCarloEstimate {
        trials,
        successes,
        estimate,
        std_error,
    })
}

/// The union-bound expression split into its log-space components.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundComponents {
    pub m: usize,
    /// `ln C(m/2, m/4)`.
    pub ln_binomial: f64,
    /// `ln (m/2 - 1)!!`.
    pub ln_double_factorial: f64,
    /// `(m/4) ln 2`.
    pub ln_pow2_term: f64,
    /// `-m^2 / 512`.
    pub exp_term: f64,
    pub total: f64,
}

fn ln_factorial(k: usize) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `ln (k - 1)!!` for even `k`, via `(k - 1)!! = k! / (2^(k/2) (k/2)!)`.
fn ln_odd_double_factorial_below(k: usize) -> f64 {
    debug_assert!(k % 2 == 0);
    ln_factorial(k) - (k as f64 / 2.0) * std::f64::consts::LN_2 - ln_factorial(k / 2)
}

/// Natural log of `C(m/2, m/4) * (m/2 - 1)!! * 2^(m/4) * exp(-m^2/512)`,
/// computed via log-gamma so the scan never overflows.
pub fn union_bound_log(m: usize) -> Result<BoundComponents, AnalysisError> {
    if m == 0 || m % 32 != 0 {
        return Err(AnalysisError::BadScale { m });
    }
    let ln_binomial = ln_binomial(m / 2, m / 4);
    let ln_double_factorial = ln_odd_double_factorial_below(m / 2);
    let ln_pow2_term = (m as f64 / 4.0) * std::f64::consts::LN_2;
    let exp_term = -((m as f64) * (m as f64)) / 512.0;
    Ok(BoundComponents {
        m,
        ln_binomial,
        ln_double_factorial,
        ln_pow2_term,
        exp_term,
        total: ln_binomial + ln_double_factorial + ln_pow2_term + exp_term,
    })
}

/// Evaluates the bound for every multiple of 32 up to `max_m` inclusive.
pub fn bound_scan(max_m: usize) -> Vec<BoundComponents> {
    (1..=max_m / 32)
        .map(|k| union_bound_log(32 * k).expect("multiples of 32"))
        .collect()
}

/// Smallest `m` (multiple of 32, up to `max_m`) where the bound's log
/// turns negative.
pub fn bound_crossing(max_m: usize) -> Option<usize> {
    bound_scan(max_m)
        .into_iter()
        .find(|c| c.total < 0.0)
        .map(|c| c.m)
}

/// Exact binomial coefficient, for cross-checking the log-space terms.
pub fn binomial_exact(n: usize, k: usize) -> BigInt {
    let mut result = BigInt::one();
    for i in 0..k.min(n - k) {
        result = result * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    result
}

/// Exact double factorial `j!! = j (j-2) (j-4) ...` with `j!! = 1` for
/// `j <= 0`.
pub fn double_factorial_exact(j: i64) -> BigInt {
    let mut result = BigInt::one();
    let mut i = j;
    while i > 1 {
        result *= BigInt::from(i);
        i -= 2;
    }
    result
}

/// Visits every perfect pairing of `elements` (even length), in a
/// deterministic order: the smallest remaining element is paired with
/// each larger remaining element in turn.
pub fn for_each_pair_partition(elements: &[usize], visit: &mut impl FnMut(&[(usize, usize)])) {
    fn recurse(
        remaining: &mut Vec<usize>,
        acc: &mut Vec<(usize, usize)>,
        visit: &mut impl FnMut(&[(usize, usize)]),
    ) {
        if remaining.is_empty() {
            visit(acc);
            return;
        }
        let first = remaining[0];
        for idx in 1..remaining.len() {
            let partner = remaining[idx];
            let mut rest: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|&v| v != first && v != partner)
                .collect();
            acc.push((first, partner));
            recurse(&mut rest, acc, visit);
            acc.pop();
        }
    }
    assert!(elements.len() % 2 == 0, "need an even number of elements");
    let mut remaining = elements.to_vec();
    remaining.sort_unstable();
    remaining.dedup();
    assert_eq!(remaining.len(), elements.len(), "elements must be distinct");
    let mut acc = Vec::with_capacity(elements.len() / 2);
    recurse(&mut remaining, &mut acc, visit);
}

/// Number of perfect pairings of a `k`-element set (`(k - 1)!!`).
pub fn count_pair_partitions(k: usize) -> u64 {
    let elements: Vec<usize> = (0..k).collect();
    let mut count = 0u64;
    for_each_pair_partition(&elements, &mut |_| count += 1);
    count
}
