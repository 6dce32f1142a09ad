//! Fairness predicates over social-network graphs.
//!
//! An [`Allocation`] assigns every agent a piece so the pieces tile the
//! whole cake exactly (overlaps only at interval endpoints). The four
//! predicates compare each agent's value for its own piece against the
//! global or neighborhood benchmarks. Proportionality and local
//! proportionality also report exact per-agent margins (slack relative
//! to the defining inequality), which the adversarial attacks use to
//! certify strict violations.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::cake::{Piece, Valuation};
use crate::rational::{one, rat, zero, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {vertex} not allowed in a simple graph")]
    SelfLoop { vertex: usize },
    #[error("graph needs at least one vertex")]
    Empty,
}

/// Undirected simple graph on agent identifiers `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialGraph {
    adjacency: Vec<BTreeSet<usize>>,
}

impl SocialGraph {
    pub fn new(n: usize) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        Ok(SocialGraph {
            adjacency: vec![BTreeSet::new(); n],
        })
    }

    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let mut graph = SocialGraph::new(n)?;
        for (i, j) in edges {
            graph.add_edge(i, j)?;
        }
        Ok(graph)
    }

    pub fn complete(n: usize) -> Result<Self, GraphError> {
        let mut graph = SocialGraph::new(n)?;
        for i in 0..n {
            for j in (i + 1)..n {
                graph.add_edge(i, j)?;
            }
        }
        Ok(graph)
    }

    /// Path 0 - 1 - ... - (n-1).
    pub fn path(n: usize) -> Result<Self, GraphError> {
        let mut graph = SocialGraph::new(n)?;
        for i in 1..n {
            graph.add_edge(i - 1, i)?;
        }
        Ok(graph)
    }

    pub fn edgeless(n: usize) -> Result<Self, GraphError> {
        SocialGraph::new(n)
    }

    /// Inserts an undirected edge; re-inserting an existing edge is a
    /// no-op (the graph stays simple).
    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<(), GraphError> {
        let n = self.n();
        for v in [i, j] {
            if v >= n {
                return Err(GraphError::VertexOutOfRange { vertex: v, n });
            }
        }
        if i == j {
            return Err(GraphError::SelfLoop { vertex: i });
        }
        self.adjacency[i].insert(j);
        self.adjacency[j].insert(i);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, i: usize) -> &BTreeSet<usize> {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].contains(&j)
    }

    /// Edges as `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, nbrs) in self.adjacency.iter().enumerate() {
            for &j in nbrs.range((i + 1)..) {
                out.push((i, j));
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut visited = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    visited += 1;
                    stack.push(w);
                }
            }
        }
        visited == n
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AllocationError {
    #[error("allocation needs at least one agent")]
    Empty,
    #[error("coverage does not start at 0 (first interval begins at {at})")]
    DoesNotStartAtZero { at: Rational },
    #[error("coverage does not reach 1 (last interval ends at {at})")]
    DoesNotReachOne { at: Rational },
    #[error("gap in coverage at {at}")]
    Gap { at: Rational },
    #[error("pieces overlap with positive measure at {at}")]
    Overlap { at: Rational },
}

/// A complete allocation: one piece per agent, tiling `[0, 1]` exactly.
/// Pieces may be empty; every covered point belongs to exactly one piece
/// up to interval endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    pieces: Vec<Piece>,
}

impl Allocation {
    pub fn new(pieces: Vec<Piece>) -> Result<Self, AllocationError> {
        if pieces.is_empty() {
            return Err(AllocationError::Empty);
        }
        let mut intervals: Vec<(Rational, Rational)> = pieces
            .iter()
            .flat_map(|p| {
                p.intervals()
                    .iter()
                    .map(|iv| (iv.lo().clone(), iv.hi().clone()))
            })
            .collect();
        intervals.sort();
        match intervals.first() {
            None => return Err(AllocationError::Gap { at: zero() }),
            Some((lo, _)) if *lo != zero() => {
                return Err(AllocationError::DoesNotStartAtZero { at: lo.clone() })
            }
            _ => {}
        }
        let mut end = zero();
        for (lo, hi) in intervals {
            if lo > end {
                return Err(AllocationError::Gap { at: end });
            }
            if lo < end {
                return Err(AllocationError::Overlap { at: lo });
            }
            end = hi;
        }
        if end != one() {
            return Err(AllocationError::DoesNotReachOne { at: end });
        }
        Ok(Allocation { pieces })
    }

    pub fn n(&self) -> usize {
        self.pieces.len()
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn piece(&self, agent: usize) -> &Piece {
        &self.pieces[agent]
    }

    pub fn measures(&self) -> Vec<Rational> {
        self.pieces.iter().map(Piece::measure).collect()
    }
}

/// Outcome of a margin-reporting predicate. `margins[i]` is the exact
/// slack of agent `i`'s defining inequality; the predicate holds iff
/// every margin is nonnegative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropReport {
    pub satisfied: bool,
    pub margins: Vec<Rational>,
}

fn report_from_margins(margins: Vec<Rational>) -> PropReport {
    let satisfied = margins.iter().all(|m| *m >= zero());
    PropReport { satisfied, margins }
}

/// Proportionality: every agent values its own piece at least `1/n`.
pub fn is_proportional(allocation: &Allocation, valuations: &[Valuation]) -> PropReport {
    let n = allocation.n();
    debug_assert_eq!(n, valuations.len());
    let share = rat(1, n as i64);
    let margins = (0..n)
        .map(|i| valuations[i].value(allocation.piece(i)) - &share)
        .collect();
    report_from_margins(margins)
}

/// Local proportionality: every agent values its own piece at least the
/// average of its values for its neighbors' pieces. Isolated vertices
/// have no neighborhood to compare against and pass with zero margin.
pub fn is_locally_proportional(
    allocation: &Allocation,
    valuations: &[Valuation],
    graph: &SocialGraph,
) -> PropReport {
    let n = allocation.n();
    debug_assert_eq!(n, valuations.len());
    debug_assert_eq!(n, graph.n());
    let margins = (0..n)
        .map(|i| {
            let degree = graph.degree(i);
            if degree == 0 {
                return zero();
            }
            let own = valuations[i].value(allocation.piece(i));
            let neighborhood: Rational = graph
                .neighbors(i)
                .iter()
                .fold(zero(), |acc, &j| acc + valuations[i].value(allocation.piece(j)));
            own - neighborhood / rat(degree as i64, 1)
        })
        .collect();
    report_from_margins(margins)
}

/// Envy-freeness: no agent values any other agent's piece above its own.
pub fn is_envy_free(allocation: &Allocation, valuations: &[Valuation]) -> bool {
    let n = allocation.n();
    debug_assert_eq!(n, valuations.len());
    (0..n).all(|i| {
        let own = valuations[i].value(allocation.piece(i));
        (0..n).all(|j| j == i || valuations[i].value(allocation.piece(j)) <= own)
    })
}

/// Local envy-freeness: envy is checked along graph edges only, in both
/// directions.
pub fn is_locally_envy_free(
    allocation: &Allocation,
    valuations: &[Valuation],
    graph: &SocialGraph,
) -> bool {
    debug_assert_eq!(allocation.n(), valuations.len());
    debug_assert_eq!(allocation.n(), graph.n());
    graph.edges().into_iter().all(|(i, j)| {
        valuations[i].value(allocation.piece(j)) <= valuations[i].value(allocation.piece(i))
            && valuations[j].value(allocation.piece(i)) <= valuations[j].value(allocation.piece(j))
    })
}
