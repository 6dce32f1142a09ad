//! Seeded random instance generators, shared by the CLI and the test
//! suites. Everything stays exact: breakpoints and cut points are
//! rationals with small denominators, densities are integer weights
//! normalized by the exact total mass.

use rand::Rng;

use crate::cake::{Interval, Piece, Valuation};
use crate::fairness::{Allocation, SocialGraph};
use crate::rational::{one, rat, zero, Rational};

/// Distinct random rationals strictly inside (0, 1), sorted.
fn random_cut_points(rng: &mut impl Rng, count: usize) -> Vec<Rational> {
    let mut points = Vec::with_capacity(count);
    while points.len() < count {
        let denom = rng.gen_range(2..=64i64);
        let numer = rng.gen_range(1..denom);
        let candidate = rat(numer, denom);
        if !points.contains(&candidate) {
            points.push(candidate);
        }
    }
    points.sort();
    points
}

/// A random piecewise-constant valuation with at most `max_segments`
/// pieces, integrating to exactly 1.
pub fn random_valuation(rng: &mut impl Rng, max_segments: usize) -> Valuation {
    let segments = rng.gen_range(1..=max_segments.max(1));
    let mut breakpoints = random_cut_points(rng, segments - 1);
    breakpoints.insert(0, zero());
    breakpoints.push(one());
    loop {
        let weights: Vec<Rational> = (0..segments)
            .map(|_| rat(rng.gen_range(0..=9), 1))
            .collect();
        let total: Rational = breakpoints
            .windows(2)
            .zip(&weights)
            .map(|(w, d)| d * (&w[1] - &w[0]))
            .sum();
        if total == zero() {
            continue;
        }
        let densities = weights.into_iter().map(|w| w / &total).collect();
        return Valuation::new(breakpoints, densities).expect("normalized by construction");
    }
}

/// A random valid allocation for `n` agents: the cake is sliced at
/// `n - 1 + extra_cuts` random points and every slice goes to a random
/// agent, so pieces may be multi-interval or empty.
pub fn random_allocation(rng: &mut impl Rng, n: usize, extra_cuts: usize) -> Allocation {
    let cut_count = n.saturating_sub(1) + extra_cuts;
    let mut cuts = random_cut_points(rng, cut_count);
    cuts.insert(0, zero());
    cuts.push(one());
    let mut raw: Vec<Vec<Interval>> = vec![Vec::new(); n];
    for w in cuts.windows(2) {
        let owner = rng.gen_range(0..n);
        raw[owner].push(Interval::new(w[0].clone(), w[1].clone()).expect("cuts are distinct"));
    }
    Allocation::new(raw.into_iter().map(Piece::new).collect())
        .expect("slices tile the cake")
}

/// Like [`random_allocation`] but guaranteed to have unequal measures
/// (resamples in the vanishingly rare all-equal case).
pub fn random_unequal_allocation(rng: &mut impl Rng, n: usize, extra_cuts: usize) -> Allocation {
    loop {
        let allocation = random_allocation(rng, n, extra_cuts);
        let measures = allocation.measures();
        if measures.iter().any(|m| *m != measures[0]) {
            return allocation;
        }
    }
}

/// An Erdos-Renyi style random graph with edge probability 1/2.
pub fn random_graph(rng: &mut impl Rng, n: usize) -> SocialGraph {
    let mut graph = SocialGraph::new(n).expect("n >= 1");
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(0.5) {
                graph.add_edge(i, j).expect("valid edge");
            }
        }
    }
    graph
}

/// A uniformly chosen permutation of `0..n`.
pub fn random_ordering(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut ordering: Vec<usize> = (0..n).collect();
    ordering.shuffle(rng);
    ordering
}

/// The built-in three-agent demo instance: agent 0 holds density 4 on
/// the leftmost quarter, agent 1 is uniform, agent 2 holds density 4 on
/// the rightmost quarter. Lives on the path 0 - 1 - 2.
pub fn demo_valuations() -> Vec<Valuation> {
    vec![
        Valuation::new(vec![zero(), rat(1, 4), one()], vec![rat(4, 1), zero()]).unwrap(),
        Valuation::uniform(),
        Valuation::new(vec![zero(), rat(3, 4), one()], vec![zero(), rat(4, 1)]).unwrap(),
    ]
}

/// The path graph the demo instance lives on.
pub fn demo_graph() -> SocialGraph {
    SocialGraph::path(3).unwrap()
}
