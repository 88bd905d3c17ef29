//! Group-aware search success (GA-SS) evaluation.
//!
//! The crate computes the probability that a search system serves *every*
//! searcher group for a query, along with the group-unaware diversity
//! objective (DA-SS) and two ways of aggregating GA-SS across queries. Ranking
//! policies can be static (one permutation per query) or stochastic
//! (Plackett-Luce randomizations of a static ranker), and exposure is modelled
//! with the rank-biased precision browsing model.
//!
//! Module map:
//!
//! | module       | contents                                                    |
//! |--------------|-------------------------------------------------------------|
//! | [`model`]    | catalog, probability tables, validation                     |
//! | [`browse`]   | browsing models and exposure                                |
//! | [`policy`]   | static rankings, Plackett-Luce sampling and enumeration      |
//! | [`rankers`]  | MPC and group-aware MPC score builders                      |
//! | [`metrics`]  | item, intent and group success, GA-SS and DA-SS             |
//! | [`estimate`] | frequency estimation from logs and synthetic data           |
//! | [`eval`]     | end-to-end evaluation of one ranker configuration           |
//! | [`analysis`] | temperature sweeps, Kendall correlation, toy scenario       |

pub mod analysis;
pub mod browse;
mod error;
pub mod estimate;
pub mod eval;
pub mod metrics;
pub mod model;
pub mod policy;
pub mod rankers;
pub(crate) mod util;

pub use error::{Error, Result};
