//! Exhaustive ground truth for small systems.
//!
//! Every link subset is checked with the fixed-point feasibility test,
//! scanning cardinalities from largest to smallest and stopping at the first
//! size that admits a servable set. The result certifies the maximum number
//! of links that can be served together and the cheapest way to do it.

use crate::channel::NormalizedProblem;
use crate::error::{Error, Result};
use crate::power_control::check_feasibility;

/// Safety cap on the exhaustive search.
#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    /// Largest link count the search accepts (`2^K` subsets are scanned).
    pub max_k: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { max_k: 12 }
    }
}

/// Certified optimum of the admission problem.
#[derive(Debug, Clone)]
pub struct OracleResult {
    /// Maximum number of links servable together.
    pub m_star: usize,
    /// Every servable subset of that size, masks ascending, indices sorted.
    pub best_sets: Vec<Vec<usize>>,
    /// Smallest total transmit power over `best_sets`, in watts.
    pub min_power: f64,
    /// Total transmit power of each entry of `best_sets`, in watts.
    pub power_per_set: Vec<f64>,
}

/// Scans subsets by descending cardinality (ascending bitmask within each
/// size) and returns the first size with at least one servable set. Smaller
/// sizes need no scan once a servable set exists, and every larger set has
/// already failed by construction. Refuses systems beyond `max_k` links.
pub fn enumerate_optimal(
    problem: &NormalizedProblem,
    config: &OracleConfig,
) -> Result<OracleResult> {
    let k = problem.links();
    if k > config.max_k || k >= usize::BITS as usize {
        return Err(Error::TooLarge { links: k, max: config.max_k.min(usize::BITS as usize - 1) });
    }
    for size in (1..=k).rev() {
        let mut best_sets = Vec::new();
        let mut power_per_set = Vec::new();
        for mask in 0usize..(1usize << k) {
            if mask.count_ones() as usize != size {
                continue;
            }
            let subset: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
            let rep = check_feasibility(problem, &subset)?;
            if rep.feasible {
                best_sets.push(subset);
                power_per_set.push(rep.total_power);
            }
        }
        if !best_sets.is_empty() {
            let min_power = power_per_set.iter().cloned().fold(f64::INFINITY, f64::min);
            return Ok(OracleResult { m_star: size, best_sets, min_power, power_per_set });
        }
    }
    Ok(OracleResult {
        m_star: 0,
        best_sets: vec![Vec::new()],
        min_power: 0.0,
        power_per_set: vec![0.0],
    })
}
