//! rwlab — a laboratory for divisible fair division in the
//! Robertson-Webb query model.
//!
//! The cake is the unit interval `[0, 1]`. Agents hold piecewise-constant
//! density valuations over it, and algorithms interact with those
//! valuations only through `eval` and `cut` queries. On top of that
//! protocol boundary the crate provides:
//!
//! * exact rational cake/piece/valuation arithmetic ([`cake`]),
//! * query counting, transcripts, and transcript-consistency checking
//!   ([`protocol`]),
//! * the four fairness predicates over social-network graphs
//!   ([`fairness`]),
//! * baseline cake-cutting algorithms with query instrumentation
//!   ([`algorithms`]),
//! * a randomized adversarial instance family together with two
//!   constructive attacks that refute "provably locally proportional"
//!   claims within a quadratic query budget ([`adversary`]),
//! * combinatorial and probabilistic analysis of the construction:
//!   segmentations, exact tail enumeration, Monte Carlo estimation, and
//!   log-space union-bound evaluation ([`analysis`]),
//! * plain-text file formats for every object the CLI exchanges ([`io`]).
//!
//! All cake coordinates and values are exact rationals; probability
//! bounds are the only quantities evaluated in floating point.

pub mod adversary;
pub mod algorithms;
pub mod analysis;
pub mod cake;
pub mod fairness;
pub mod gen;
pub mod io;
pub mod protocol;
pub mod rational;
pub mod seeding;

pub use rational::Rational;
