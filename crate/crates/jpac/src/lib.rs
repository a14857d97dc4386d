//! Joint power and admission control for interference-limited wireless links
//! under sampled SINR constraints.
//!
//! Pipeline: draw channel realizations around a nominal instance, rewrite the
//! sampled SINR constraints as a normalized linear block system, then either
//! check a link subset directly (monotone fixed point), solve the group-sparse
//! convex relaxation (smoothed projected Barzilai-Borwein or projected
//! subgradient), or run the full deflation loop that removes links until the
//! remainder is supportable and re-admits what it can. A brute-force oracle
//! and a Monte-Carlo benchmark harness close the loop for validation.

pub mod channel;
#[doc(hidden)]
pub mod fixtures;
pub mod bench;
pub mod cli;
pub mod deflation;
pub mod io;
pub mod oracle;
pub mod power_control;
pub mod relaxation;
pub mod error;
pub mod rng;

pub use error::{Error, Result};
