//! Admission control by deflation.
//!
//! Links are discarded one at a time until the remainder can be served
//! together. A cheap aggregate certificate prunes hopeless subsets before any
//! optimization runs, the group-sparse relaxation then flags the link to drop
//! in each round, and a final pass tries to re-admit casualties in
//! cheapest-first order.

use crate::channel::NormalizedProblem;
use crate::error::{Error, Result};
use crate::power_control::check_feasibility;
use crate::relaxation::{
    alpha_bounds, max_residual, residuals, solve_pabb, solve_subgradient, RelaxationParams,
};
use ndarray::{Array1, Axis};
use std::str::FromStr;
use std::time::Instant;

/// Largest constraint residual at which a relaxation solution still counts
/// as serving every link. Looser than the fixed-point tolerance to absorb
/// solver inexactness.
pub const TOL_SUPPORTED: f64 = 1e-6;

/// Aggregate feasibility certificate for a link subset.
///
/// Summing every sampled constraint row gives `mu . q >= e . c` with
/// `mu` the column sums of the stacked constraint blocks. Any admissible `q`
/// also satisfies `c_max <= q <= 1`, so the left side is at most
/// `mu_plus . e - mu_minus . c_max`. A subset whose `slack` is negative
/// cannot be served no matter how the powers are chosen.
#[derive(Debug, Clone)]
pub struct NecessaryConditionReport {
    /// Column sums of the stacked constraint blocks, indexed like the subset.
    pub mu: Array1<f64>,
    /// Componentwise positive part of `mu`.
    pub mu_plus: Array1<f64>,
    /// Componentwise magnitude of the negative part of `mu`.
    pub mu_minus: Array1<f64>,
    /// Per link, the largest noise floor over the samples.
    pub c_max: Array1<f64>,
    /// `mu_plus . e - (mu_minus . c_max + e . c)`.
    pub slack: f64,
    /// Whether the certificate passes (`slack >= 0`).
    pub holds: bool,
}

/// Evaluates the aggregate certificate on `subset` (strictly increasing
/// original link indices, nonempty).
pub fn necessary_condition(
    problem: &NormalizedProblem,
    subset: &[usize],
) -> Result<NecessaryConditionReport> {
    let sub = problem.restrict(subset)?;
    let k = sub.links();
    if k == 0 {
        return Err(Error::Domain("certificate needs a nonempty subset".into()));
    }
    let mut mu = Array1::zeros(k);
    let mut floor_total = 0.0;
    for block in &sub.blocks {
        mu += &block.sum_axis(Axis(0));
    }
    for floors in &sub.floors {
        floor_total += floors.sum();
    }
    let mu_plus = mu.mapv(|v: f64| v.max(0.0));
    let mu_minus = mu.mapv(|v: f64| (-v).max(0.0));
    let c_max = Array1::from_iter(
        sub.floors.iter().map(|f| f.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))),
    );
    let slack = mu_plus.sum() - (mu_minus.dot(&c_max) + floor_total);
    Ok(NecessaryConditionReport { mu, mu_plus, mu_minus, c_max, slack, holds: slack >= 0.0 })
}

fn smart_scores(sub: &NormalizedProblem) -> Vec<f64> {
    let k = sub.links();
    let means: Vec<Array1<f64>> =
        sub.blocks.iter().map(|b| b.mean_axis(Axis(0)).expect("nonempty sample axis")).collect();
    let floor_means: Vec<f64> =
        sub.floors.iter().map(|f| f.mean().expect("nonempty sample axis")).collect();
    (0..k)
        .map(|link| {
            let mut score = floor_means[link];
            for j in 0..k {
                if j != link {
                    score += means[link][j].abs() + means[j][link].abs();
                }
            }
            score
        })
        .collect()
}

/// Picks the link whose sample-averaged system is hardest to carry: largest
/// sum of outgoing and incoming averaged cross terms plus averaged floor.
/// Ties break toward the smallest link index. Needs at least two links.
pub fn smart_removal(problem: &NormalizedProblem, subset: &[usize]) -> Result<usize> {
    let sub = problem.restrict(subset)?;
    if sub.links() < 2 {
        return Err(Error::Domain("averaged removal needs at least two links".into()));
    }
    let scores = smart_scores(&sub);
    Ok(subset[argmax(&scores)])
}

/// Which score decides the link to drop in an admission round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemovalRule {
    /// Interference-plus-noise footprint at the worst sample rows.
    Footprint,
    /// Footprint weighted by how far each link overshoots its constraints.
    Excess,
    /// Euclidean norm of the positive constraint residuals.
    Violation,
}

impl RemovalRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            RemovalRule::Footprint => "footprint",
            RemovalRule::Excess => "excess",
            RemovalRule::Violation => "violation",
        }
    }
}

impl FromStr for RemovalRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "footprint" => Ok(RemovalRule::Footprint),
            "excess" => Ok(RemovalRule::Excess),
            "violation" => Ok(RemovalRule::Violation),
            other => Err(Error::Invalid(format!(
                "unknown removal rule {other:?}; expected footprint, excess, or violation"
            ))),
        }
    }
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0usize;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

fn removal_scores(
    problem: &NormalizedProblem,
    qbar: &Array1<f64>,
    rule: RemovalRule,
) -> Result<Vec<f64>> {
    let k = problem.links();
    if qbar.len() != k {
        return Err(Error::Shape(format!(
            "candidate point has {} entries for a {}-link system",
            qbar.len(),
            k
        )));
    }
    let res = residuals(problem, qbar);
    let worst: Vec<usize> = res
        .iter()
        .map(|r| {
            let mut row = 0usize;
            for n in 1..r.len() {
                if r[n] > r[row] {
                    row = n;
                }
            }
            row
        })
        .collect();
    let peak: Vec<f64> = res.iter().zip(&worst).map(|(r, &w)| r[w]).collect();
    if !peak.iter().any(|&p| p > 0.0) {
        return Err(Error::NothingToRemove);
    }
    let scores = match rule {
        RemovalRule::Footprint => (0..k)
            .map(|link| {
                let mut s = problem.floors[link][worst[link]];
                for j in 0..k {
                    if j != link {
                        s += problem.blocks[link][(worst[link], j)].abs() * qbar[j];
                        s += problem.blocks[j][(worst[j], link)].abs() * qbar[link];
                    }
                }
                s
            })
            .collect(),
        RemovalRule::Excess => {
            let qe: Vec<f64> = peak.iter().map(|p| p.max(0.0)).collect();
            (0..k)
                .map(|link| {
                    let mut s = 0.0;
                    for j in 0..k {
                        if j != link {
                            s += problem.blocks[link][(worst[link], j)].abs() * qe[j];
                            s += problem.blocks[j][(worst[j], link)].abs() * qe[link];
                        }
                    }
                    s
                })
                .collect()
        }
        RemovalRule::Violation => res
            .iter()
            .map(|r| r.mapv(|v| v.max(0.0)).dot(&r.mapv(|v| v.max(0.0))).sqrt())
            .collect(),
    };
    Ok(scores)
}

/// Scores every link of `problem` at the relaxation solution `qbar` under
/// `rule` and returns the argmax (ties toward the smallest index). At least
/// one link must have a positive residual; otherwise nothing needs removing
/// and `Error::NothingToRemove` is returned.
pub fn removal_select(
    problem: &NormalizedProblem,
    qbar: &Array1<f64>,
    rule: RemovalRule,
) -> Result<usize> {
    Ok(argmax(&removal_scores(problem, qbar, rule)?))
}

/// Which solver handles the relaxation subproblems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverKind {
    Pabb,
    Subgrad { step0: f64, iters: usize },
}

/// Tunable knobs of the deflation pipeline.
#[derive(Debug, Clone, Copy)]
pub struct DeflateConfig {
    pub solver: SolverKind,
    pub rule: RemovalRule,
    /// Fraction of the strict upper weight bound to use.
    pub c1: f64,
    /// Fraction of the sufficient weight bound to use.
    pub c2: f64,
    /// Residual threshold under which a relaxation solution serves every
    /// link of its subproblem.
    pub tol_supported: f64,
}

impl Default for DeflateConfig {
    fn default() -> Self {
        DeflateConfig {
            solver: SolverKind::Pabb,
            rule: RemovalRule::Footprint,
            c1: crate::relaxation::DEFAULT_C1,
            c2: crate::relaxation::DEFAULT_C2,
            tol_supported: TOL_SUPPORTED,
        }
    }
}

/// When in the pipeline a link was dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemovalPhase {
    /// Before any relaxation ran: unreachable floor or failed certificate.
    Preprocess,
    /// During the solve-and-remove rounds.
    Admission,
}

/// What triggered a removal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemovalKind {
    /// The link's largest floor exceeds the power cap on its own.
    Ceiling,
    /// The sample-averaged preprocessing rule.
    Smart,
    /// An admission round under the configured rule.
    Rule(RemovalRule),
}

/// One dropped link with the score that condemned it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Removal {
    pub link: usize,
    pub phase: RemovalPhase,
    pub kind: RemovalKind,
    pub score: f64,
}

/// Outcome of a full deflation run.
#[derive(Debug, Clone)]
pub struct DeflationResult {
    /// Served links, ascending original indices.
    pub supported: Vec<usize>,
    /// Minimal normalized powers of the served links, indexed like
    /// `supported`.
    pub q: Array1<f64>,
    /// Total transmit power of the served links in watts.
    pub total_power: f64,
    /// Every dropped link in drop order, including later re-admissions.
    pub removals: Vec<Removal>,
    /// Links restored by the final pass, in admission order.
    pub readmitted: Vec<usize>,
    /// Relaxation objective after each solve-and-remove round.
    pub stage_objectives: Vec<f64>,
    /// Seconds spent in the pipeline.
    pub wall_time: f64,
}

/// Re-admission outcome: the grown subset and its minimal powers.
#[derive(Debug, Clone)]
pub struct PostprocessReport {
    /// Served links after re-admission, ascending.
    pub supported: Vec<usize>,
    /// Restored links in admission order.
    pub readmitted: Vec<usize>,
    /// Minimal normalized powers, indexed like `supported`.
    pub q: Array1<f64>,
    /// Total transmit power in watts.
    pub total_power: f64,
}

/// Tries to re-admit removed links one at a time, always taking the candidate
/// whose enlarged subset needs the least total power (ties toward the
/// smallest index). Candidates whose enlarged subset is unsupportable are
/// dropped for good, which is sound because growing the served set only ever
/// tightens feasibility. `supported` must itself be servable.
pub fn postprocess(
    problem: &NormalizedProblem,
    supported: &[usize],
    removed: &[usize],
) -> Result<PostprocessReport> {
    let mut current: Vec<usize> = supported.to_vec();
    current.sort_unstable();
    let base = check_feasibility(problem, &current)?;
    if !base.feasible {
        return Err(Error::Domain("re-admission needs a servable starting subset".into()));
    }
    let mut pool: Vec<usize> = removed.to_vec();
    pool.sort_unstable();
    let mut readmitted = Vec::new();
    while !pool.is_empty() {
        let mut viable: Vec<usize> = Vec::new();
        let mut best: Option<(f64, usize)> = None;
        for &j in &pool {
            let mut trial = current.clone();
            trial.push(j);
            trial.sort_unstable();
            let rep = check_feasibility(problem, &trial)?;
            if rep.feasible {
                viable.push(j);
                if best.map_or(true, |(v, _)| rep.total_power < v) {
                    best = Some((rep.total_power, j));
                }
            }
        }
        let Some((_, admit)) = best else { break };
        current.push(admit);
        current.sort_unstable();
        readmitted.push(admit);
        pool = viable.into_iter().filter(|&j| j != admit).collect();
    }
    let fin = check_feasibility(problem, &current)?;
    let q = fin.q_min.ok_or_else(|| Error::Invalid("re-admitted subset lost feasibility".into()))?;
    Ok(PostprocessReport { supported: current, readmitted, q, total_power: fin.total_power })
}

/// Runs the full pipeline: floor-ceiling and certificate preprocessing,
/// solve-and-remove admission rounds, then cheapest-first re-admission. The
/// returned set always passes `check_feasibility`.
pub fn deflate(problem: &NormalizedProblem, config: &DeflateConfig) -> Result<DeflationResult> {
    let start = Instant::now();
    let k = problem.links();
    let mut removals: Vec<Removal> = Vec::new();
    let mut active: Vec<usize> = Vec::with_capacity(k);
    for link in 0..k {
        let ceiling = problem.floors[link].iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        if ceiling > 1.0 {
            removals.push(Removal {
                link,
                phase: RemovalPhase::Preprocess,
                kind: RemovalKind::Ceiling,
                score: ceiling,
            });
        } else {
            active.push(link);
        }
    }
    while active.len() >= 2 && !necessary_condition(problem, &active)?.holds {
        let sub = problem.restrict(&active)?;
        let scores = smart_scores(&sub);
        let local = argmax(&scores);
        removals.push(Removal {
            link: active[local],
            phase: RemovalPhase::Preprocess,
            kind: RemovalKind::Smart,
            score: scores[local],
        });
        active.remove(local);
    }
    let mut stage_objectives = Vec::new();
    while !active.is_empty() {
        let sub = problem.restrict(&active)?;
        let params: RelaxationParams = alpha_bounds(&sub, config.c1, config.c2)?;
        let out = match config.solver {
            SolverKind::Pabb => solve_pabb(&sub, &params)?,
            SolverKind::Subgrad { step0, iters } => {
                solve_subgradient(&sub, params.alpha, step0, iters)?
            }
        };
        stage_objectives.push(out.objective);
        if max_residual(&sub, &out.q) <= config.tol_supported {
            break;
        }
        let scores = removal_scores(&sub, &out.q, config.rule)?;
        let local = argmax(&scores);
        removals.push(Removal {
            link: active[local],
            phase: RemovalPhase::Admission,
            kind: RemovalKind::Rule(config.rule),
            score: scores[local],
        });
        active.remove(local);
    }
    let removed: Vec<usize> = removals.iter().map(|r| r.link).collect();
    let post = postprocess(problem, &active, &removed)?;
    Ok(DeflationResult {
        supported: post.supported,
        q: post.q,
        total_power: post.total_power,
        removals,
        readmitted: post.readmitted,
        stage_objectives,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
