//! Online purchasing of combinatorial structures.
//!
//! A stream of items (edges of a complete graph or digraph, bipartite edges,
//! or abstract indices) carries independent uniform `[0,1]` costs.  Items are
//! inspected one at a time under one of three order models — purchaser
//! ordered (POM), randomly ordered (ROM), or adversarially ordered (AOM) —
//! and each must be bought or rejected on the spot.  The goal is to buy a
//! target structure (any k items, a path, a triangle, a clique, a spanning
//! tree, an arborescence, a perfect matching, a Hamilton cycle) at small
//! expected total cost.
//!
//! The crate provides:
//!
//! - [`stream`]: item universes, lazy inspection sessions for the three
//!   order models, and the min-of-m cost decomposition.
//! - [`purchase`]: the optimal-stopping dynamic program for the k-purchase
//!   problem, its asymptotic constants, the density-scaled variant, and the
//!   average-two-purchase lower-bound optimization.
//! - [`graph`]: incremental component tracking, bipartite matching,
//!   Hamilton-cycle search, functional-digraph decomposition, and structure
//!   validators.
//! - [`strategies`]: the purchasing strategies for every supported target,
//!   the adversaries, and the must-take fallback guard.
//! - [`harness`]: a deterministic, parallel Monte Carlo experiment runner
//!   with analytic bound comparison.

pub mod graph;
pub mod harness;
pub mod purchase;
pub mod rng;
pub mod stream;
pub mod strategies;
pub mod util;

use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A parameter was outside its documented range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A session protocol rule was broken (re-inspection, bad adversary).
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    /// An internal invariant failed; indicates a bug.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
