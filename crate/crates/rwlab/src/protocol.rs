//! The Robertson-Webb oracle boundary.
//!
//! Algorithms never touch valuations directly; they issue [`Query`]
//! values through an [`Oracle`] and receive [`Response`]s. The
//! [`CountingOracle`] wrapper counts queries (total and per agent),
//! records a [`Transcript`], maintains the per-agent [`QueriedPointSet`],
//! and optionally enforces a query budget. Completed transcripts can be
//! replayed against candidate valuation profiles with [`is_consistent`].

use std::collections::BTreeSet;

use thiserror::Error;

use crate::cake::{CakeError, Valuation};
use crate::rational::{one, Rational};

pub type AgentId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryKind {
    Eval { x: Rational, y: Rational },
    Cut { x: Rational, alpha: Rational },
}

/// A single well-formed Robertson-Webb query addressed to one agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub agent: AgentId,
    pub kind: QueryKind,
}

impl Query {
    /// An `eval` query; requires `0 <= x <= y <= 1`.
    pub fn eval(agent: AgentId, x: Rational, y: Rational) -> Result<Self, CakeError> {
        check_unit(&x)?;
        check_unit(&y)?;
        if x > y {
            return Err(CakeError::ReversedEndpoints { x, y });
        }
        Ok(Query {
            agent,
            kind: QueryKind::Eval { x, y },
        })
    }

    /// A `cut` query; requires `x, alpha` in `[0, 1]`.
    pub fn cut(agent: AgentId, x: Rational, alpha: Rational) -> Result<Self, CakeError> {
        check_unit(&x)?;
        check_unit(&alpha)?;
        Ok(Query {
            agent,
            kind: QueryKind::Cut { x, alpha },
        })
    }
}

fn check_unit(x: &Rational) -> Result<(), CakeError> {
    if crate::rational::in_unit(x) {
        Ok(())
    } else {
        Err(CakeError::OutOfRange { value: x.clone() })
    }
}

/// An oracle's answer. A failed cut is a recorded response, not an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Response {
    Value(Rational),
    CutAt(Rational),
    NoSuchCut,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub query: Query,
    pub response: Response,
}

/// Ordered record of every query issued during a run and its response.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Transcript {
    entries: Vec<TranscriptEntry>,
}

impl Transcript {
    pub fn new() -> Self {
        Transcript::default()
    }

    pub fn push(&mut self, entry: TranscriptEntry) {
        self.entries.push(entry);
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn from_entries(entries: Vec<TranscriptEntry>) -> Self {
        Transcript { entries }
    }
}

/// Per-agent set of cake points an algorithm has revealed interest in:
/// both endpoints of every `eval`, the `x` of every `cut` (never the
/// `alpha`), and every successful `cut` response. Failed cuts contribute
/// only their `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueriedPointSet {
    per_agent: Vec<BTreeSet<Rational>>,
}

impl QueriedPointSet {
    pub fn new(agents: usize) -> Self {
        QueriedPointSet {
            per_agent: vec![BTreeSet::new(); agents],
        }
    }

    pub fn record(&mut self, entry: &TranscriptEntry) {
        let set = &mut self.per_agent[entry.query.agent];
        match &entry.query.kind {
            QueryKind::Eval { x, y } => {
                set.insert(x.clone());
                set.insert(y.clone());
            }
            QueryKind::Cut { x, .. } => {
                set.insert(x.clone());
                if let Response::CutAt(y) = &entry.response {
                    set.insert(y.clone());
                }
            }
        }
    }

    pub fn from_transcript(transcript: &Transcript, agents: usize) -> Self {
        let mut points = QueriedPointSet::new(agents);
        for entry in transcript.entries() {
            points.record(entry);
        }
        points
    }

    pub fn points(&self, agent: AgentId) -> &BTreeSet<Rational> {
        &self.per_agent[agent]
    }

    pub fn agents(&self) -> usize {
        self.per_agent.len()
    }
}

/// The query interface algorithms are allowed to see.
pub trait Oracle {
    fn answer(&mut self, query: &Query) -> Response;
}

/// Answers queries from a concrete valuation profile.
pub struct ValuationOracle {
    valuations: Vec<Valuation>,
}

impl ValuationOracle {
    pub fn new(valuations: Vec<Valuation>) -> Self {
        ValuationOracle { valuations }
    }
}

impl Oracle for ValuationOracle {
    fn answer(&mut self, query: &Query) -> Response {
        let v = &self.valuations[query.agent];
        match &query.kind {
            QueryKind::Eval { x, y } => {
                Response::Value(v.eval(x, y).expect("query was validated on construction"))
            }
            QueryKind::Cut { x, alpha } => {
                match v.cut(x, alpha).expect("query was validated on construction") {
                    Some(y) => Response::CutAt(y),
                    None => Response::NoSuchCut,
                }
            }
        }
    }
}

/// Returned by a [`CountingOracle`] once its query budget is spent; the
/// refused query is neither counted nor recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("query budget exhausted")]
pub struct BudgetExhausted;

/// Instrumentation wrapper: forwards queries to the inner oracle while
/// counting them, recording the transcript, and tracking queried points.
/// Single-owner during an algorithm run; the finished transcript is
/// immutable and freely shareable.
pub struct CountingOracle<O> {
    inner: O,
    budget: Option<u64>,
    total: u64,
    per_agent: Vec<u64>,
    transcript: Transcript,
    points: QueriedPointSet,
}

impl<O: Oracle> CountingOracle<O> {
    pub fn new(inner: O, agents: usize) -> Self {
        Self::build(inner, agents, None)
    }

    pub fn with_budget(inner: O, agents: usize, budget: u64) -> Self {
        Self::build(inner, agents, Some(budget))
    }

    fn build(inner: O, agents: usize, budget: Option<u64>) -> Self {
        CountingOracle {
            inner,
            budget,
            total: 0,
            per_agent: vec![0; agents],
            transcript: Transcript::new(),
            points: QueriedPointSet::new(agents),
        }
    }

    pub fn ask(&mut self, query: Query) -> Result<Response, BudgetExhausted> {
        if let Some(budget) = self.budget {
            if self.total >= budget {
                return Err(BudgetExhausted);
            }
        }
        let response = self.inner.answer(&query);
        self.total += 1;
        self.per_agent[query.agent] += 1;
        let entry = TranscriptEntry { query, response };
        self.points.record(&entry);
        let response = entry.response.clone();
        self.transcript.push(entry);
        Ok(response)
    }

    pub fn eval(
        &mut self,
        agent: AgentId,
        x: Rational,
        y: Rational,
    ) -> Result<Rational, BudgetExhausted> {
        let query = Query::eval(agent, x, y).expect("algorithm issued a malformed eval");
        match self.ask(query)? {
            Response::Value(v) => Ok(v),
            _ => unreachable!("eval queries receive value responses"),
        }
    }

    pub fn cut(
        &mut self,
        agent: AgentId,
        x: Rational,
        alpha: Rational,
    ) -> Result<Option<Rational>, BudgetExhausted> {
        let query = Query::cut(agent, x, alpha).expect("algorithm issued a malformed cut");
        match self.ask(query)? {
            Response::CutAt(y) => Ok(Some(y)),
            Response::NoSuchCut => Ok(None),
            Response::Value(_) => unreachable!("cut queries receive cut responses"),
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn per_agent(&self, agent: AgentId) -> u64 {
        self.per_agent[agent]
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn points(&self) -> &QueriedPointSet {
        &self.points
    }

    pub fn into_record(self) -> (Transcript, QueriedPointSet, u64) {
        (self.transcript, self.points, self.total)
    }
}

/// Checks a transcript against a candidate valuation profile: every
/// recorded response must be an exact answer the candidate could have
/// given. A recorded cut response `y` is accepted whenever the candidate
/// assigns `[x, y]` exactly the queried value, even if the candidate's
/// own canonical (minimal) cut point differs; the query contract only
/// promises *a* point with the requested value. A recorded `NoSuchCut`
/// is consistent exactly when the candidate values `[x, 1]` below
/// `alpha`.
pub fn is_consistent(transcript: &Transcript, candidates: &[Valuation]) -> bool {
    transcript.entries().iter().all(|entry| {
        let v = match candidates.get(entry.query.agent) {
            Some(v) => v,
            None => return false,
        };
        match (&entry.query.kind, &entry.response) {
            (QueryKind::Eval { x, y }, Response::Value(recorded)) => {
                v.eval(x, y).map(|got| got == *recorded).unwrap_or(false)
            }
            (QueryKind::Cut { x, alpha }, Response::CutAt(y)) => {
                *y >= *x && v.eval(x, y).map(|got| got == *alpha).unwrap_or(false)
            }
            (QueryKind::Cut { x, alpha }, Response::NoSuchCut) => v
                .eval(x, &one())
                .map(|rest| rest < *alpha)
                .unwrap_or(false),
            _ => false,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, zero};

    fn uniform_profile(n: usize) -> Vec<Valuation> {
        vec![Valuation::uniform(); n]
    }

    #[test]
    fn oracle_answers_eval_and_cut() {
        let mut oracle = ValuationOracle::new(uniform_profile(2));
        let q = Query::eval(0, zero(), rat(1, 2)).unwrap();
        assert_eq!(oracle.answer(&q), Response::Value(rat(1, 2)));
        let q = Query::cut(1, rat(1, 4), rat(1, 4)).unwrap();
        assert_eq!(oracle.answer(&q), Response::CutAt(rat(1, 2)));
        let q = Query::cut(1, rat(3, 4), rat(1, 2)).unwrap();
        assert_eq!(oracle.answer(&q), Response::NoSuchCut);
    }

    #[test]
    fn query_validation() {
        assert!(Query::eval(0, rat(3, 4), rat(1, 4)).is_err());
        assert!(Query::eval(0, rat(-1, 4), rat(1, 4)).is_err());
        assert!(Query::cut(0, rat(1, 4), rat(9, 8)).is_err());
    }

    #[test]
    fn counting_starts_empty() {
        let oracle = CountingOracle::new(ValuationOracle::new(uniform_profile(2)), 2);
        assert_eq!(oracle.total(), 0);
        assert!(oracle.transcript().is_empty());
    }

    #[test]
    fn counting_tracks_totals_and_transcript() {
        let mut oracle = CountingOracle::new(ValuationOracle::new(uniform_profile(3)), 3);
        for _ in 0..3 {
            oracle.eval(0, zero(), rat(1, 2)).unwrap();
        }
        oracle.cut(1, zero(), rat(1, 4)).unwrap();
        oracle.cut(2, rat(1, 2), rat(1, 4)).unwrap();
        assert_eq!(oracle.total(), 5);
        assert_eq!(oracle.transcript().len(), 5);
        assert_eq!(oracle.per_agent(0), 3);
        assert_eq!(oracle.per_agent(1), 1);
    }

    #[test]
    fn queried_points_follow_the_accounting_rule() {
        // eval contributes both endpoints; cut contributes x and the
        // response, never alpha.
        let mut oracle = CountingOracle::new(ValuationOracle::new(uniform_profile(1)), 1);
        oracle.eval(0, rat(1, 4), rat(3, 4)).unwrap();
        oracle.cut(0, zero(), rat(1, 8)).unwrap();
        let expected: BTreeSet<Rational> =
            [rat(1, 4), rat(3, 4), zero(), rat(1, 8)].into_iter().collect();
        assert_eq!(oracle.points().points(0), &expected);
    }

    #[test]
    fn failed_cut_contributes_only_x() {
        let mut oracle = CountingOracle::new(ValuationOracle::new(uniform_profile(1)), 1);
        oracle.cut(0, rat(3, 4), rat(1, 2)).unwrap();
        let expected: BTreeSet<Rational> = [rat(3, 4)].into_iter().collect();
        assert_eq!(oracle.points().points(0), &expected);
    }

    #[test]
    fn budget_refuses_after_limit() {
        let mut oracle =
            CountingOracle::with_budget(ValuationOracle::new(uniform_profile(1)), 1, 2);
        assert!(oracle.eval(0, zero(), one()).is_ok());
        assert!(oracle.eval(0, zero(), one()).is_ok());
        assert_eq!(oracle.eval(0, zero(), one()), Err(BudgetExhausted));
        assert_eq!(oracle.total(), 2);
        assert_eq!(oracle.transcript().len(), 2);
    }

    #[test]
    fn transcript_is_self_consistent() {
        let profile = uniform_profile(2);
        let mut oracle = CountingOracle::new(ValuationOracle::new(profile.clone()), 2);
        oracle.eval(0, rat(1, 8), rat(5, 8)).unwrap();
        oracle.cut(1, rat(1, 3), rat(1, 3)).unwrap();
        oracle.cut(1, rat(2, 3), rat(1, 2)).unwrap();
        assert!(is_consistent(oracle.transcript(), &profile));
    }

    #[test]
    fn empty_transcript_is_vacuously_consistent() {
        assert!(is_consistent(&Transcript::new(), &uniform_profile(1)));
    }

    #[test]
    fn consistency_is_about_responses_not_densities() {
        // A uniform transcript answering eval(0, 0, 1/2) = 1/2 is also
        // consistent with a lumpier candidate integrating to the same
        // value over [0, 1/2].
        let mut oracle = CountingOracle::new(ValuationOracle::new(uniform_profile(1)), 1);
        oracle.eval(0, zero(), rat(1, 2)).unwrap();
        let candidate = Valuation::new(
            vec![zero(), rat(1, 4), rat(1, 2), one()],
            vec![rat(2, 1), zero(), one()],
        )
        .unwrap();
        assert!(is_consistent(oracle.transcript(), &[candidate]));
    }

    #[test]
    fn cut_consistency_accepts_any_feasible_response_point() {
        // Record a cut answered at y = 1/2 with alpha = 1/2. A candidate
        // whose density vanishes on [3/8, 5/8] reaches value 1/2 already
        // at 3/8; its canonical cut differs, but 1/2 is still a point
        // where [0, 1/2] is worth exactly 1/2, so the entry must pass.
        let entry = TranscriptEntry {
            query: Query::cut(0, zero(), rat(1, 2)).unwrap(),
            response: Response::CutAt(rat(1, 2)),
        };
        let transcript = Transcript::from_entries(vec![entry]);
        let candidate = Valuation::new(
            vec![zero(), rat(3, 8), rat(5, 8), one()],
            vec![rat(4, 3), zero(), rat(4, 3)],
        )
        .unwrap();
        assert_eq!(candidate.cut(&zero(), &rat(1, 2)).unwrap(), Some(rat(3, 8)));
        assert!(is_consistent(&transcript, &[candidate]));
    }

    #[test]
    fn no_such_cut_consistency_requires_insufficient_remainder() {
        let entry = TranscriptEntry {
            query: Query::cut(0, rat(3, 4), rat(1, 2)).unwrap(),
            response: Response::NoSuchCut,
        };
        let transcript = Transcript::from_entries(vec![entry]);
        // Uniform: eval(3/4, 1) = 1/4 < 1/2, consistent.
        assert!(is_consistent(&transcript, &uniform_profile(1)));
        // All mass at the right end: eval(3/4, 1) = 1 >= 1/2, inconsistent.
        let heavy_tail = Valuation::new(vec![zero(), rat(3, 4), one()], vec![zero(), rat(4, 1)])
            .unwrap();
        assert!(!is_consistent(&transcript, &[heavy_tail]));
    }
}
