//! Baseline cake-cutting algorithms.
//!
//! Every algorithm sees valuations only through a [`CountingOracle`]; it
//! receives no direct valuation access, so the recorded transcript is a
//! faithful account of everything it learned. Divide-and-conquer and
//! trimming both work with absolute value targets `k/n`, which keeps
//! each round at one cut query per agent: an agent guaranteed value
//! `s/n` on the current piece can always place a mark worth exactly
//! `k/n <= s/n` of the whole cake inside it.
//!
//! When a query budget runs out mid-protocol the algorithm falls back to
//! the contiguous equal split in agent-id order, so a complete
//! allocation is always emitted; the queries already spent stay in the
//! transcript.

use thiserror::Error;

use crate::cake::{Interval, Piece};
use crate::fairness::Allocation;
use crate::protocol::{AgentId, BudgetExhausted, CountingOracle, Oracle, QueriedPointSet, Transcript};
use crate::rational::{one, rat, zero, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmKind {
    CutAndChoose,
    EvenPaz,
    LastDiminisher,
    Contiguous,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 4] = [
        AlgorithmKind::CutAndChoose,
        AlgorithmKind::EvenPaz,
        AlgorithmKind::LastDiminisher,
        AlgorithmKind::Contiguous,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::CutAndChoose => "cut-and-choose",
            AlgorithmKind::EvenPaz => "even-paz",
            AlgorithmKind::LastDiminisher => "last-diminisher",
            AlgorithmKind::Contiguous => "contiguous",
        }
    }
}

impl std::str::FromStr for AlgorithmKind {
    type Err = AlgorithmError;

    fn from_str(name: &str) -> Result<Self, AlgorithmError> {
        AlgorithmKind::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| AlgorithmError::UnknownAlgorithm {
                name: name.to_string(),
            })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlgorithmError {
    #[error("unknown algorithm {name:?}")]
    UnknownAlgorithm { name: String },
    #[error("{algorithm} requires exactly {expected} agents, got {actual}")]
    WrongAgentCount {
        algorithm: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("need at least one agent")]
    NoAgents,
    #[error("ordering must be a permutation of 0..{n}")]
    BadOrdering { n: usize },
    #[error("oracle refused a cut the protocol is entitled to")]
    InconsistentOracle,
}

/// Outcome of an instrumented run. `query_count` always equals the
/// transcript length; `budget_exhausted` marks runs that fell back to
/// the contiguous split after the budget ran out.
#[derive(Debug, Clone)]
pub struct AlgorithmResult {
    pub allocation: Allocation,
    pub query_count: u64,
    pub transcript: Transcript,
    pub points: QueriedPointSet,
    pub budget_exhausted: bool,
}

enum Stop {
    Budget,
    BadOracle,
}

impl From<BudgetExhausted> for Stop {
    fn from(_: BudgetExhausted) -> Self {
        Stop::Budget
    }
}

/// Runs `kind` for `n` agents against `inner`, with an optional query
/// budget, and packages allocation + transcript + counts.
pub fn run<O: Oracle>(
    kind: AlgorithmKind,
    inner: O,
    n: usize,
    budget: Option<u64>,
) -> Result<AlgorithmResult, AlgorithmError> {
    if n == 0 {
        return Err(AlgorithmError::NoAgents);
    }
    if kind == AlgorithmKind::CutAndChoose && n != 2 {
        return Err(AlgorithmError::WrongAgentCount {
            algorithm: "cut-and-choose",
            expected: 2,
            actual: n,
        });
    }
    let mut oracle = match budget {
        Some(b) => CountingOracle::with_budget(inner, n, b),
        None => CountingOracle::new(inner, n),
    };
    let attempt = match kind {
        AlgorithmKind::CutAndChoose => cut_and_choose(&mut oracle),
        AlgorithmKind::EvenPaz => even_paz(&mut oracle, n),
        AlgorithmKind::LastDiminisher => last_diminisher(&mut oracle, n),
        AlgorithmKind::Contiguous => Ok(contiguous_identity(n)),
    };
    let (allocation, budget_exhausted) = match attempt {
        Ok(allocation) => (allocation, false),
        Err(Stop::Budget) => (contiguous_identity(n), true),
        Err(Stop::BadOracle) => return Err(AlgorithmError::InconsistentOracle),
    };
    let (transcript, points, query_count) = oracle.into_record();
    Ok(AlgorithmResult {
        allocation,
        query_count,
        transcript,
        points,
        budget_exhausted,
    })
}

fn contiguous_identity(n: usize) -> Allocation {
    let ordering: Vec<usize> = (0..n).collect();
    contiguous_equal_split(n, &ordering).expect("identity ordering is a permutation")
}

/// Zero-query contiguous equal split: the agent at position `k` of
/// `ordering` receives `[k/n, (k+1)/n]`. Under uniform valuations every
/// comparison any fairness predicate makes is tight, so the result is
/// locally proportional on every graph.
pub fn contiguous_equal_split(n: usize, ordering: &[usize]) -> Result<Allocation, AlgorithmError> {
    if n == 0 {
        return Err(AlgorithmError::NoAgents);
    }
    let mut seen = vec![false; n];
    if ordering.len() != n || ordering.iter().any(|&a| a >= n || std::mem::replace(&mut seen[a], true)) {
        return Err(AlgorithmError::BadOrdering { n });
    }
    let mut pieces = vec![Piece::empty(); n];
    for (slot, &agent) in ordering.iter().enumerate() {
        let lo = rat(slot as i64, n as i64);
        let hi = rat(slot as i64 + 1, n as i64);
        pieces[agent] = Piece::from_interval(Interval::new(lo, hi).unwrap());
    }
    Ok(Allocation::new(pieces).expect("slots tile the cake"))
}

/// Classical two-agent protocol: agent 0 cuts the cake in half by its
/// own measure, agent 1 takes whichever side it values at least 1/2.
/// Two queries, envy-free with respect to the true valuations.
fn cut_and_choose<O: Oracle>(oracle: &mut CountingOracle<O>) -> Result<Allocation, Stop> {
    let half = rat(1, 2);
    let y = oracle
        .cut(0, zero(), half.clone())?
        .ok_or(Stop::BadOracle)?;
    let left_value = oracle.eval(1, zero(), y.clone())?;
    let left = Piece::from_interval(Interval::new(zero(), y.clone()).map_err(|_| Stop::BadOracle)?);
    let right = Piece::from_interval(Interval::new(y, one()).map_err(|_| Stop::BadOracle)?);
    let pieces = if left_value >= half {
        vec![right, left]
    } else {
        vec![left, right]
    };
    Allocation::new(pieces).map_err(|_| Stop::BadOracle)
}

/// Divide-and-conquer proportional protocol. Each round every agent in
/// the current group marks a prefix of the group's interval worth
/// exactly `ceil(s/2)/n`; the group splits at the median mark (ties
/// broken by agent id) and recurses. One cut query per agent per level.
fn even_paz<O: Oracle>(oracle: &mut CountingOracle<O>, n: usize) -> Result<Allocation, Stop> {
    let agents: Vec<AgentId> = (0..n).collect();
    let mut assignments: Vec<Option<Interval>> = vec![None; n];
    even_paz_node(oracle, &agents, zero(), one(), n, &mut assignments)?;
    let pieces = assignments
        .into_iter()
        .map(|iv| Piece::from_interval(iv.expect("every agent is assigned a leaf interval")))
        .collect();
    Allocation::new(pieces).map_err(|_| Stop::BadOracle)
}

fn even_paz_node<O: Oracle>(
    oracle: &mut CountingOracle<O>,
    agents: &[AgentId],
    lo: Rational,
    hi: Rational,
    n: usize,
    assignments: &mut Vec<Option<Interval>>,
) -> Result<(), Stop> {
    let s = agents.len();
    if s == 1 {
        assignments[agents[0]] = Some(Interval::new(lo, hi).map_err(|_| Stop::BadOracle)?);
        return Ok(());
    }
    let k = s.div_ceil(2);
    let alpha = rat(k as i64, n as i64);
    let mut marks: Vec<(Rational, AgentId)> = Vec::with_capacity(s);
    for &agent in agents {
        let z = oracle
            .cut(agent, lo.clone(), alpha.clone())?
            .ok_or(Stop::BadOracle)?;
        marks.push((z, agent));
    }
    marks.sort();
    let split = marks[k - 1].0.clone();
    let mut left: Vec<AgentId> = marks[..k].iter().map(|(_, a)| *a).collect();
    let mut right: Vec<AgentId> = marks[k..].iter().map(|(_, a)| *a).collect();
    left.sort_unstable();
    right.sort_unstable();
    even_paz_node(oracle, &left, lo, split.clone(), n, assignments)?;
    even_paz_node(oracle, &right, split, hi, n, assignments)
}

/// Banach-Knaster trimming protocol. Every remaining agent marks the
/// prefix of the remaining cake worth exactly `1/n` to it; the smallest
/// mark wins that prefix (ties to the lower agent id) and the rest
/// continue on what is left. The last agent takes the remainder, so the
/// allocation always covers the full cake.
fn last_diminisher<O: Oracle>(oracle: &mut CountingOracle<O>, n: usize) -> Result<Allocation, Stop> {
    let share = rat(1, n as i64);
    let mut pieces: Vec<Option<Interval>> = vec![None; n];
    let mut remaining: Vec<AgentId> = (0..n).collect();
    let mut left_edge = zero();
    while remaining.len() > 1 {
        let mut best: Option<(Rational, AgentId)> = None;
        for &agent in &remaining {
            let z = oracle
                .cut(agent, left_edge.clone(), share.clone())?
                .ok_or(Stop::BadOracle)?;
            let candidate = (z, agent);
            if best.as_ref().map_or(true, |b| candidate < *b) {
                best = Some(candidate);
            }
        }
        let (mark, winner) = best.expect("group is nonempty");
        pieces[winner] =
            Some(Interval::new(left_edge.clone(), mark.clone()).map_err(|_| Stop::BadOracle)?);
        remaining.retain(|&a| a != winner);
        left_edge = mark;
    }
    let last = remaining[0];
    pieces[last] = Some(Interval::new(left_edge, one()).map_err(|_| Stop::BadOracle)?);
    let pieces = pieces
        .into_iter()
        .map(|iv| Piece::from_interval(iv.expect("every agent won a round")))
        .collect();
    Allocation::new(pieces).map_err(|_| Stop::BadOracle)
}
