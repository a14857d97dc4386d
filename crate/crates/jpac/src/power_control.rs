//! Minimum-power feasibility for a fixed link subset.
//!
//! The sampled constraints of an active link read `q_k >= c_k[n] + sum_{j!=k}
//! |a^n_{k,j}| q_j` for every sample `n`. Iterating the componentwise update
//! `q_k <- min(max_n { c_k[n] + sum_{j!=k} |a^n_{k,j}| q_j }, 1)` is a
//! monotone fixed-point scheme: started from zero it climbs to the least
//! fixed point, which is the componentwise-minimal admissible power vector
//! whenever the subset is supportable within budget. With a single sample the
//! update is the classical per-link power control recursion that tracks the
//! worst-case interference; extra samples only add rows to the inner maximum.

use crate::channel::NormalizedProblem;
use crate::error::{Error, Result};
use ndarray::Array1;

/// Residual threshold below which a subset counts as supported.
pub const TOL_FEAS: f64 = 1e-9;
/// Default stopping tolerance on the iterate step.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default iteration cap.
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Outcome of the fixed-point iteration on a subset.
#[derive(Debug, Clone)]
pub struct FixedPointReport {
    /// Final normalized powers, indexed like the subset.
    pub q: Array1<f64>,
    /// Number of update sweeps performed.
    pub iterations: usize,
    /// Largest entry of `c_k - A_k q` over the subset; nonpositive within
    /// `TOL_FEAS` means every sampled constraint holds.
    pub residual: f64,
    pub feasible: bool,
    /// Per subset link, the 0-based sample row closest to equality (the
    /// binding sample for feasible links, the worst violation otherwise).
    pub binding: Vec<usize>,
}

/// Runs the capped fixed-point iteration from `q0` on `subset` (strictly
/// increasing original link indices). Stops once the sweep moves no entry by
/// more than `tol`, or after `max_iter` sweeps.
pub fn fixed_point(
    problem: &NormalizedProblem,
    subset: &[usize],
    q0: &Array1<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<FixedPointReport> {
    let sub = problem.restrict(subset)?;
    let k = sub.links();
    if q0.len() != k {
        return Err(Error::Shape(format!(
            "start point has {} entries for a {}-link subset",
            q0.len(),
            k
        )));
    }
    if q0.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Domain("start point must lie in the unit box".into()));
    }
    if k == 0 {
        return Ok(FixedPointReport {
            q: Array1::zeros(0),
            iterations: 0,
            residual: f64::NEG_INFINITY,
            feasible: true,
            binding: Vec::new(),
        });
    }
    if max_iter == 0 {
        return Err(Error::Domain("need at least one iteration".into()));
    }
    let n = sub.samples();
    let magnitudes: Vec<_> = sub.blocks.iter().map(|b| b.mapv(f64::abs)).collect();
    let mut q = q0.clone();
    let mut iterations = 0;
    loop {
        let mut next = Array1::zeros(k);
        let mut step = 0.0f64;
        for link in 0..k {
            let load = magnitudes[link].dot(&q);
            let mut t = f64::NEG_INFINITY;
            for row in 0..n {
                t = t.max(sub.floors[link][row] + load[row]);
            }
            // the own-power term inside `load` cancels against the diagonal
            let v = (t - q[link]).min(1.0);
            step = step.max((v - q[link]).abs());
            next[link] = v;
        }
        q = next;
        iterations += 1;
        if step <= tol || iterations >= max_iter {
            break;
        }
    }
    let mut residual = f64::NEG_INFINITY;
    let mut binding = Vec::with_capacity(k);
    for link in 0..k {
        let r = &sub.floors[link] - &sub.blocks[link].dot(&q);
        let mut worst = 0usize;
        for row in 1..n {
            if r[row] > r[worst] {
                worst = row;
            }
        }
        binding.push(worst);
        residual = residual.max(r[worst]);
    }
    Ok(FixedPointReport { q, iterations, residual, feasible: residual <= TOL_FEAS, binding })
}

/// Feasibility verdict for a subset, with the minimal powers when supported.
#[derive(Debug, Clone)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// Componentwise-minimal admissible normalized powers, indexed like the
    /// subset; absent when the subset is not supportable.
    pub q_min: Option<Array1<f64>>,
    /// Total transmit power in watts, `+inf` when not supportable.
    pub total_power: f64,
    pub fixed_point: FixedPointReport,
}

/// Decides whether `subset` can be served within budget by running the
/// fixed-point iteration from zero with default tolerances.
pub fn check_feasibility(problem: &NormalizedProblem, subset: &[usize]) -> Result<FeasibilityReport> {
    let report = fixed_point(
        problem,
        subset,
        &Array1::zeros(subset.len()),
        DEFAULT_TOL,
        DEFAULT_MAX_ITER,
    )?;
    let (q_min, total_power) = if report.feasible {
        let budget = Array1::from_iter(subset.iter().map(|&l| problem.budget[l]));
        let total = budget.dot(&report.q);
        (Some(report.q.clone()), total)
    } else {
        (None, f64::INFINITY)
    };
    Ok(FeasibilityReport { feasible: report.feasible, q_min, total_power, fixed_point: report })
}
