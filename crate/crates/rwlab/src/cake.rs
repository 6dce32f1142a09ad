//! Cake, pieces, and piecewise-constant valuations with exact arithmetic.
//!
//! The cake is `[0, 1]`. A [`Piece`] is a finite union of closed
//! intervals with positive measure, kept in canonical form (sorted,
//! interior-disjoint, adjacent intervals merged). A [`Valuation`] is a
//! nonnegative piecewise-constant density integrating to exactly 1; it
//! answers the two Robertson-Webb primitives, `eval` and `cut`, with
//! exact rationals. Restricting densities to piecewise-constant keeps
//! every construction in this crate closed under exact arithmetic and
//! makes `cut` exactly invertible.

use std::collections::BTreeSet;
use std::fmt;

use num::Zero;
use thiserror::Error;

use crate::rational::{one, rat, zero, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CakeError {
    #[error("interval must satisfy lo < hi, got {lo} .. {hi}")]
    EmptyInterval { lo: Rational, hi: Rational },
    #[error("coordinate {value} lies outside the unit interval")]
    OutOfRange { value: Rational },
    #[error("eval endpoints reversed: x = {x} > y = {y}")]
    ReversedEndpoints { x: Rational, y: Rational },
    #[error("breakpoints must strictly increase from 0 to 1")]
    BadBreakpoints,
    #[error("density count {densities} does not match breakpoint count {breakpoints}")]
    MismatchedDensities { breakpoints: usize, densities: usize },
    #[error("densities must be nonnegative, got {value}")]
    NegativeDensity { value: Rational },
    #[error("valuation must integrate to exactly 1, got {total}")]
    WrongTotalMass { total: Rational },
    #[error("lambda must lie in [0, 1], got {lambda}")]
    BadLambda { lambda: Rational },
}

fn check_unit(x: &Rational) -> Result<(), CakeError> {
    if crate::rational::in_unit(x) {
        Ok(())
    } else {
        Err(CakeError::OutOfRange { value: x.clone() })
    }
}

/// A closed subinterval of the cake with positive measure.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, CakeError> {
        check_unit(&lo)?;
        check_unit(&hi)?;
        if lo >= hi {
            return Err(CakeError::EmptyInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    /// Convenience constructor from small integer fractions.
    pub fn from_ints(lo_n: i64, lo_d: i64, hi_n: i64, hi_d: i64) -> Self {
        Interval::new(rat(lo_n, lo_d), rat(hi_n, hi_d)).expect("valid interval literals")
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        *x >= self.lo && *x <= self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// A finite union of positive-measure closed intervals in canonical form:
/// sorted by left endpoint, interiors pairwise disjoint, and adjacent
/// intervals merged. The empty piece is allowed (an agent may receive
/// nothing); pieces never store zero-measure intervals.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Piece {
    intervals: Vec<Interval>,
}

impl Piece {
    pub fn empty() -> Self {
        Piece::default()
    }

    /// The whole cake `[0, 1]`.
    pub fn whole() -> Self {
        Piece {
            intervals: vec![Interval::new(zero(), one()).unwrap()],
        }
    }

    /// Canonicalizes a raw interval list: sorts by left endpoint and
    /// merges overlapping or touching intervals. Overlaps are merged
    /// rather than rejected; callers construct pieces by set union and
    /// only the resulting subset of the cake matters.
    pub fn new(raw: Vec<Interval>) -> Self {
        let mut sorted = raw;
        sorted.sort();
        let mut intervals: Vec<Interval> = Vec::with_capacity(sorted.len());
        for iv in sorted {
            match intervals.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => intervals.push(iv),
            }
        }
        Piece { intervals }
    }

    pub fn from_interval(iv: Interval) -> Self {
        Piece {
            intervals: vec![iv],
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Exact Lebesgue measure: the sum of interval lengths.
    pub fn measure(&self) -> Rational {
        self.intervals
            .iter()
            .fold(zero(), |acc, iv| acc + iv.length())
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    /// `true` when `[lo, hi]` lies inside a single interval of the piece.
    pub fn covers(&self, lo: &Rational, hi: &Rational) -> bool {
        self.intervals
            .iter()
            .any(|iv| iv.lo <= *lo && *hi <= iv.hi)
    }

    pub fn union(&self, other: &Piece) -> Piece {
        let mut raw = self.intervals.clone();
        raw.extend(other.intervals.iter().cloned());
        Piece::new(raw)
    }

    /// Endpoints of the constituent intervals, i.e. the topological
    /// boundary of the piece within the real line (the cake's own ends
    /// count when the piece touches them).
    pub fn boundary_points(&self) -> BTreeSet<Rational> {
        let mut points = BTreeSet::new();
        for iv in &self.intervals {
            points.insert(iv.lo.clone());
            points.insert(iv.hi.clone());
        }
        points
    }
}

impl fmt::Display for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "(empty)");
        }
        let mut first = true;
        for iv in &self.intervals {
            if !first {
                write!(f, " ∪ ")?;
            }
            write!(f, "{iv}")?;
            first = false;
        }
        Ok(())
    }
}

/// A piecewise-constant nonnegative density on `[0, 1]` integrating to
/// exactly 1. `breakpoints` strictly increase from 0 to 1 and
/// `densities[k]` holds on `[breakpoints[k], breakpoints[k + 1]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Valuation {
    breakpoints: Vec<Rational>,
    densities: Vec<Rational>,
}

impl Valuation {
    pub fn new(breakpoints: Vec<Rational>, densities: Vec<Rational>) -> Result<Self, CakeError> {
        if breakpoints.len() < 2
            || breakpoints[0] != zero()
            || *breakpoints.last().unwrap() != one()
            || breakpoints.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(CakeError::BadBreakpoints);
        }
        if densities.len() != breakpoints.len() - 1 {
            return Err(CakeError::MismatchedDensities {
                breakpoints: breakpoints.len(),
                densities: densities.len(),
            });
        }
        if let Some(d) = densities.iter().find(|d| **d < zero()) {
            return Err(CakeError::NegativeDensity { value: d.clone() });
        }
        let total: Rational = breakpoints
            .windows(2)
            .zip(&densities)
            .fold(zero(), |acc, (w, d)| acc + d * (&w[1] - &w[0]));
        if total != one() {
            return Err(CakeError::WrongTotalMass { total });
        }
        Ok(Valuation {
            breakpoints,
            densities,
        })
    }

    /// The uniform valuation: density 1 everywhere, so value = measure.
    pub fn uniform() -> Self {
        Valuation {
            breakpoints: vec![zero(), one()],
            densities: vec![one()],
        }
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn densities(&self) -> &[Rational] {
        &self.densities
    }

    fn segment_value(&self, lo: &Rational, hi: &Rational) -> Rational {
        let mut total = zero();
        for (w, d) in self.breakpoints.windows(2).zip(&self.densities) {
            if d.is_zero() {
                continue;
            }
            let a = if &w[0] > lo { w[0].clone() } else { lo.clone() };
            let b = if &w[1] < hi { w[1].clone() } else { hi.clone() };
            if a < b {
                total += d * (b - a);
            }
        }
        total
    }

    /// Exact value of a piece: the integral of the density over it.
    pub fn value(&self, piece: &Piece) -> Rational {
        piece
            .intervals()
            .iter()
            .fold(zero(), |acc, iv| acc + self.segment_value(iv.lo(), iv.hi()))
    }

    pub fn value_interval(&self, iv: &Interval) -> Rational {
        self.segment_value(iv.lo(), iv.hi())
    }

    /// The `eval` query: the value of `[x, y]`, zero when `x = y`.
    pub fn eval(&self, x: &Rational, y: &Rational) -> Result<Rational, CakeError> {
        check_unit(x)?;
        check_unit(y)?;
        if x > y {
            return Err(CakeError::ReversedEndpoints {
                x: x.clone(),
                y: y.clone(),
            });
        }
        Ok(self.segment_value(x, y))
    }

    /// The `cut` query: the minimal `y >= x` with value of `[x, y]`
    /// exactly `alpha`, or `None` when even `[x, 1]` is worth less than
    /// `alpha`. Minimality pins down the answer on zero-density
    /// plateaus, where any point of the plateau would satisfy the query.
    pub fn cut(&self, x: &Rational, alpha: &Rational) -> Result<Option<Rational>, CakeError> {
        check_unit(x)?;
        check_unit(alpha)?;
        if alpha.is_zero() {
            return Ok(Some(x.clone()));
        }
        let mut remaining = alpha.clone();
        for (w, d) in self.breakpoints.windows(2).zip(&self.densities) {
            if w[1] <= *x || d.is_zero() {
                continue;
            }
            let start = if &w[0] > x { w[0].clone() } else { x.clone() };
            let available = d * (&w[1] - &start);
            if remaining <= available {
                return Ok(Some(start + remaining / d));
            }
            remaining -= available;
        }
        Ok(None)
    }

    /// The divisibility primitive: a left-anchored subinterval of
    /// `interval` worth exactly `lambda` times the whole interval.
    /// Returns `None` when the target value is zero (a zero-measure
    /// contribution; pieces never store such intervals).
    pub fn divide(
        &self,
        interval: &Interval,
        lambda: &Rational,
    ) -> Result<Option<Interval>, CakeError> {
        if lambda < &zero() || lambda > &one() {
            return Err(CakeError::BadLambda {
                lambda: lambda.clone(),
            });
        }
        let target = lambda * self.value_interval(interval);
        if target.is_zero() {
            return Ok(None);
        }
        let y = self
            .cut(interval.lo(), &target)?
            .expect("target does not exceed the interval's value");
        debug_assert!(y <= *interval.hi());
        Ok(Some(Interval::new(interval.lo().clone(), y).unwrap()))
    }
}
