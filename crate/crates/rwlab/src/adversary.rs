//! The adversarial instance family and its constructive attacks.
//!
//! For `n >= 33` agents, let `m` be the greatest multiple of 32 strictly
//! below `n` and `r = n - m`. Vertices split into `L` (ids `0..m/2`),
//! `R` (ids `m/2..m`) and `U` (ids `m..n`). Every `U` vertex is adjacent
//! to all other vertices; each `L` vertex `i` is adjacent to a uniformly
//! random subset `S_i` of `R` with `|S_i| = m/4`, drawn independently
//! per `i` by a seeded partial shuffle. All queries are answered as if
//! every agent were uniform: `eval(x, y) = y - x`, `cut(x, a) = x + a`.
//!
//! Against a candidate allocation plus the transcript that produced it,
//! two refutations are attempted, in order:
//!
//! 1. *uniform witness* — if piece measures are not all `1/n`, some
//!    agent strictly loses to its neighborhood average under the uniform
//!    valuations themselves;
//! 2. *boundary perturbation* — otherwise, an unqueried interior
//!    boundary point of some `L`-agent's neighborhood union admits a
//!    density bump/dent pair that stays consistent with the whole
//!    transcript yet makes that agent's local-proportionality margin
//!    exactly `-eps/deg(i)`.
//!
//! An `Unrefuted` verdict certifies nothing; it only means these two
//! attacks found no purchase.

use std::collections::BTreeSet;

use num::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::cake::{Interval, Piece, Valuation};
use crate::fairness::{is_locally_proportional, Allocation, SocialGraph};
use crate::protocol::{is_consistent, Oracle, QueriedPointSet, Query, QueryKind, Response, Transcript};
use crate::rational::{one, rat, zero, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AdversaryError {
    #[error("adversarial construction needs n >= 33, got {n}")]
    TooFewAgents { n: usize },
    #[error("uniform witness search requires a connected graph")]
    Disconnected,
    #[error("allocation has {allocation} agents but graph has {graph}")]
    SizeMismatch { allocation: usize, graph: usize },
    #[error("instance data does not match the construction shape for n = {n}")]
    MalformedInstance { n: usize },
}

/// Greatest multiple of 32 strictly below `n`.
fn greatest_multiple_of_32_below(n: usize) -> usize {
    32 * ((n - 1) / 32)
}

/// Query budget below which the construction defeats every algorithm:
/// `8 * floor((n - 1) / 32)^2`, which equals `m^2 / 128` exactly.
pub fn query_budget(n: usize) -> u64 {
    let k = ((n - 1) / 32) as u64;
    8 * k * k
}

/// One sampled instance of the adversarial family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdversaryInstance {
    n: usize,
    m: usize,
    seed: u64,
    neighborhoods: Vec<BTreeSet<usize>>,
}

impl AdversaryInstance {
    pub fn build(n: usize, seed: u64) -> Result<Self, AdversaryError> {
        if n < 33 {
            return Err(AdversaryError::TooFewAgents { n });
        }
        let m = greatest_multiple_of_32_below(n);
        let r_ids: Vec<usize> = (m / 2..m).collect();
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let neighborhoods = (0..m / 2)
            .map(|_| {
                let mut pool = r_ids.clone();
                let (chosen, _) = pool.partial_shuffle(&mut rng, m / 4);
                chosen.iter().copied().collect()
            })
            .collect();
        Ok(AdversaryInstance {
            n,
            m,
            seed,
            neighborhoods,
        })
    }

    /// Rebuilds an instance from parsed parts, validating the shape.
    pub fn from_parts(
        n: usize,
        seed: u64,
        neighborhoods: Vec<BTreeSet<usize>>,
    ) -> Result<Self, AdversaryError> {
        if n < 33 {
            return Err(AdversaryError::TooFewAgents { n });
        }
        let m = greatest_multiple_of_32_below(n);
        let instance = AdversaryInstance {
            n,
            m,
            seed,
            neighborhoods,
        };
        if instance.neighborhoods.len() != m / 2
            || instance.neighborhoods.iter().any(|s| {
                s.len() != m / 4 || s.iter().any(|&j| j < m / 2 || j >= m)
            })
        {
            return Err(AdversaryError::MalformedInstance { n });
        }
        Ok(instance)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn r(&self) -> usize {
        self.n - self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn budget(&self) -> u64 {
        query_budget(self.n)
    }

    pub fn left_agents(&self) -> std::ops::Range<usize> {
        0..self.m / 2
    }

    pub fn right_agents(&self) -> std::ops::Range<usize> {
        self.m / 2..self.m
    }

    pub fn universal_agents(&self) -> std::ops::Range<usize> {
        self.m..self.n
    }

    /// `S_i`: the random `R`-neighborhood of left agent `i`.
    pub fn neighborhood(&self, left_agent: usize) -> &BTreeSet<usize> {
        &self.neighborhoods[left_agent]
    }

    /// Materializes the social graph: `U` complete to everything,
    /// `L`-`R` edges from the sampled neighborhoods, no other edges.
    pub fn graph(&self) -> SocialGraph {
        let mut graph = SocialGraph::new(self.n).expect("n >= 33");
        for u in self.universal_agents() {
            for v in 0..self.n {
                if v != u {
                    graph.add_edge(u, v).expect("valid vertices");
                }
            }
        }
        for i in self.left_agents() {
            for &j in &self.neighborhoods[i] {
                graph.add_edge(i, j).expect("valid vertices");
            }
        }
        graph
    }
}

/// The non-adaptive uniform responder: `eval(x, y) = y - x` and
/// `cut(x, alpha) = x + alpha` when that stays inside the cake.
pub struct UniformOracle;

impl Oracle for UniformOracle {
    fn answer(&mut self, query: &Query) -> Response {
        match &query.kind {
            QueryKind::Eval { x, y } => Response::Value(y - x),
            QueryKind::Cut { x, alpha } => {
                let y = x + alpha;
                if y <= one() {
                    Response::CutAt(y)
                } else {
                    Response::NoSuchCut
                }
            }
        }
    }
}

/// Certificate that an allocation with unequal measures fails local
/// proportionality under the uniform valuations: `source` is a vertex of
/// the measure-comparison digraph with no smaller neighbor and at least
/// one strictly larger one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformWitness {
    pub source: usize,
    pub violated_neighbor: usize,
    /// Edges `(i, j)` of the comparison digraph: `{i, j}` in the graph
    /// and `|A_i| < |A_j|`.
    pub comparison_edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WitnessOutcome {
    /// Every piece has measure exactly `1/n`.
    AllEqual,
    Witness(UniformWitness),
}

/// Looks for an agent that strictly loses under uniform valuations. The
/// comparison digraph orients every graph edge toward the larger piece;
/// it is acyclic, and on a connected graph with unequal measures it has
/// a source with an outgoing edge. Among sources the one with the
/// smallest piece (ties by id) is returned, with its smallest-id larger
/// neighbor.
pub fn find_uniform_witness(
    allocation: &Allocation,
    graph: &SocialGraph,
) -> Result<WitnessOutcome, AdversaryError> {
    if allocation.n() != graph.n() {
        return Err(AdversaryError::SizeMismatch {
            allocation: allocation.n(),
            graph: graph.n(),
        });
    }
    if !graph.is_connected() {
        return Err(AdversaryError::Disconnected);
    }
    let n = graph.n();
    let measures = allocation.measures();
    let share = rat(1, n as i64);
    if measures.iter().all(|m| *m == share) {
        return Ok(WitnessOutcome::AllEqual);
    }
    let mut comparison_edges = Vec::new();
    let mut has_incoming = vec![false; n];
    let mut has_outgoing = vec![false; n];
    for (i, j) in graph.edges() {
        let (small, large) = match measures[i].cmp(&measures[j]) {
            std::cmp::Ordering::Less => (i, j),
            std::cmp::Ordering::Greater => (j, i),
            std::cmp::Ordering::Equal => continue,
        };
        comparison_edges.push((small, large));
        has_outgoing[small] = true;
        has_incoming[large] = true;
    }
    let source = (0..n)
        .filter(|&i| has_outgoing[i] && !has_incoming[i])
        .min_by(|&a, &b| (&measures[a], a).cmp(&(&measures[b], b)))
        .expect("connected graph with unequal measures has a strict loser");
    let violated_neighbor = *graph
        .neighbors(source)
        .iter()
        .find(|&&j| measures[j] > measures[source])
        .expect("source has an outgoing comparison edge");

    // The witness's local-proportionality margin under uniform
    // valuations must be strictly negative; anything else is a bug.
    let uniform = vec![Valuation::uniform(); n];
    let report = is_locally_proportional(allocation, &uniform, graph);
    debug_assert!(report.margins[source] < zero());

    Ok(WitnessOutcome::Witness(UniformWitness {
        source,
        violated_neighbor,
        comparison_edges,
    }))
}

/// Per-`L`-agent boundary data of the neighborhood union
/// `U_{j in S_i} A_j`.
#[derive(Debug, Clone)]
pub struct AgentBoundary {
    pub agent: usize,
    /// Normalized union of the pieces allocated to `S_i`.
    pub union: Piece,
    /// Its boundary points, cake ends included when touched.
    pub boundary: BTreeSet<Rational>,
}

#[derive(Debug, Clone)]
pub struct BoundaryProfile {
    profiles: Vec<AgentBoundary>,
}

impl BoundaryProfile {
    pub fn get(&self, left_agent: usize) -> &AgentBoundary {
        &self.profiles[left_agent]
    }

    /// `b_i`: twice the number of disjoint intervals in the union.
    pub fn boundary_count(&self, left_agent: usize) -> usize {
        self.profiles[left_agent].boundary.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &AgentBoundary> {
        self.profiles.iter()
    }
}

/// Computes the neighborhood-union boundary for every `L` agent.
pub fn boundary_profile(allocation: &Allocation, instance: &AdversaryInstance) -> BoundaryProfile {
    let profiles = instance
        .left_agents()
        .map(|i| {
            let union = instance
                .neighborhood(i)
                .iter()
                .fold(Piece::empty(), |acc, &j| acc.union(allocation.piece(j)));
            let boundary = union.boundary_points();
            AgentBoundary {
                agent: i,
                union,
                boundary,
            }
        })
        .collect();
    BoundaryProfile { profiles }
}

/// A verified boundary perturbation: the valuation is uniform except for
/// density 2 on `boosted` (inside the neighborhood union) and density 0
/// on `zeroed` (outside it), both of length `epsilon` around `x`.
#[derive(Debug, Clone)]
pub struct PerturbationAttack {
    pub agent: usize,
    pub x: Rational,
    pub epsilon: Rational,
    pub boosted: Interval,
    pub zeroed: Interval,
    pub valuation: Valuation,
}

impl PerturbationAttack {
    /// The valuation profile the attack pits against the transcript:
    /// uniform everywhere except the perturbed agent.
    pub fn profile(&self, n: usize) -> Vec<Valuation> {
        let mut profile = vec![Valuation::uniform(); n];
        profile[self.agent] = self.valuation.clone();
        profile
    }
}

/// Builds the perturbed valuation: uniform density except 2 on `boosted`
/// and 0 on `zeroed`. The two intervals share the point `x` and have
/// equal length, so the total mass stays exactly 1.
fn perturbed_valuation(boosted: &Interval, zeroed: &Interval) -> Valuation {
    let mut cuts: Vec<Rational> = vec![
        zero(),
        boosted.lo().clone(),
        boosted.hi().clone(),
        zeroed.lo().clone(),
        zeroed.hi().clone(),
        one(),
    ];
    cuts.sort();
    cuts.dedup();
    let densities = cuts
        .windows(2)
        .map(|w| {
            let mid = (&w[0] + &w[1]) / rat(2, 1);
            if boosted.contains(&mid) {
                rat(2, 1)
            } else if zeroed.contains(&mid) {
                zero()
            } else {
                one()
            }
        })
        .collect();
    Valuation::new(cuts, densities).expect("equal-length bump and dent preserve total mass")
}

/// Attempts the boundary-perturbation refutation at a single `L` agent.
///
/// Candidates are the interior points of `B_i \ Q_i`, swept in ascending
/// order. For each, `epsilon` is the full minimum distance from `x` to
/// `Q_i`, the other boundary points, and the cake ends; `[x - eps, x]`
/// and `[x, x + eps]` split into the side inside the neighborhood union
/// (density 2) and the side outside (density 0). A candidate is returned
/// only after re-verification: the perturbed profile must replay the
/// entire transcript exactly, and the agent's local-proportionality
/// margin must be exactly `-eps/deg(i)` — which requires the zeroed side
/// to fall on cake owned by non-neighbors, so candidates whose outside
/// cake belongs to a universal vertex (or to the agent itself) are
/// skipped. `None` means the attack is inapplicable here, not that the
/// allocation is safe.
pub fn find_perturbation(
    allocation: &Allocation,
    transcript: &Transcript,
    queried: &QueriedPointSet,
    instance: &AdversaryInstance,
    agent: usize,
) -> Option<PerturbationAttack> {
    let graph = instance.graph();
    let profile = boundary_profile(allocation, instance);
    find_perturbation_in(
        allocation,
        transcript,
        queried,
        instance,
        profile.get(agent),
        &graph,
    )
}

fn find_perturbation_in(
    allocation: &Allocation,
    transcript: &Transcript,
    queried: &QueriedPointSet,
    instance: &AdversaryInstance,
    boundary: &AgentBoundary,
    graph: &SocialGraph,
) -> Option<PerturbationAttack> {
    let agent = boundary.agent;
    let q_i = queried.points(agent);
    let degree = graph.degree(agent);
    for x in &boundary.boundary {
        if x.is_zero() || *x == one() || q_i.contains(x) {
            continue;
        }
        let epsilon = q_i
            .iter()
            .chain(boundary.boundary.iter().filter(|b| *b != x))
            .map(|p| if p > x { p - x } else { x - p })
            .chain([x.clone(), one() - x])
            .min()
            .expect("cake ends always bound epsilon");
        debug_assert!(epsilon > zero());
        let left = Interval::new(x - &epsilon, x.clone()).expect("epsilon <= x");
        let right = Interval::new(x.clone(), x + &epsilon).expect("epsilon <= 1 - x");
        let (boosted, zeroed) = if boundary.union.covers(left.lo(), left.hi()) {
            (left, right)
        } else {
            debug_assert!(boundary.union.covers(right.lo(), right.hi()));
            (right, left)
        };
        let valuation = perturbed_valuation(&boosted, &zeroed);
        let attack = PerturbationAttack {
            agent,
            x: x.clone(),
            epsilon: epsilon.clone(),
            boosted,
            zeroed,
            valuation,
        };

        // Re-verify through the protocol and fairness modules before
        // returning anything.
        let profile = attack.profile(instance.n());
        if !is_consistent(transcript, &profile) {
            continue;
        }
        let report = is_locally_proportional(allocation, &profile, graph);
        let expected_margin = -&epsilon / rat(degree as i64, 1);
        if report.margins[agent] != expected_margin {
            continue;
        }
        return Some(attack);
    }
    None
}

/// Outcome of the full attack pipeline.
#[derive(Debug, Clone)]
pub enum Verdict {
    RefutedUniform(UniformWitness),
    RefutedPerturbation(PerturbationAttack),
    /// Neither attack applied. Not a certificate of local
    /// proportionality.
    Unrefuted,
}

impl Verdict {
    pub fn is_refuted(&self) -> bool {
        !matches!(self, Verdict::Unrefuted)
    }
}

/// Runs the two refutations in order: the uniform witness first, then
/// the perturbation sweep over `L` in ascending agent order (first
/// success wins, so parallel and serial sweeps agree).
pub fn attack(
    allocation: &Allocation,
    transcript: &Transcript,
    queried: &QueriedPointSet,
    instance: &AdversaryInstance,
) -> Verdict {
    let graph = instance.graph();
    match find_uniform_witness(allocation, &graph).expect("instance graphs are connected") {
        WitnessOutcome::Witness(witness) => return Verdict::RefutedUniform(witness),
        WitnessOutcome::AllEqual => {}
    }
    let profile = boundary_profile(allocation, instance);
    for entry in profile.iter() {
        if let Some(attack) =
            find_perturbation_in(allocation, transcript, queried, instance, entry, &graph)
        {
            return Verdict::RefutedPerturbation(attack);
        }
    }
    Verdict::Unrefuted
}
