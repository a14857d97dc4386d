//! Group-sparse convex relaxation of the admission problem.
//!
//! For normalized powers `q` in the unit box, writing `r_k = c_k - A_k q`,
//! the relaxation minimizes
//!
//! ```text
//! f(q) = sum_k || max(r_k, 0) ||_2  +  alpha * budget . q
//! ```
//!
//! The hinge norms vanish exactly on served links, so minimizers concentrate
//! violations on few links; the `alpha` term then drives served links down to
//! minimal power. `alpha_bounds` picks `alpha` small enough that total power
//! never trades against serving one more link, and small enough that a fully
//! servable set is served outright at the minimizer.
//!
//! Two solvers are provided: a smoothed projected Barzilai-Borwein method
//! with continuation on the smoothing parameter (fast path) and a projected
//! subgradient method with diminishing steps (reference path).

use crate::channel::NormalizedProblem;
use crate::error::{Error, Result};
use ndarray::Array1;

pub const DEFAULT_C1: f64 = 0.999;
pub const DEFAULT_C2: f64 = 0.999;
/// First smoothing level of the continuation schedule.
pub const DEFAULT_MU_START: f64 = 1.0;
/// Multiplicative decrease between continuation stages.
pub const DEFAULT_MU_FACTOR: f64 = 0.1;
/// Last smoothing level still solved. Small enough that the smoothing bias
/// on served links stays far below the supported-link residual tolerance.
pub const DEFAULT_MU_MIN: f64 = 1e-8;
/// Iteration cap per continuation stage.
pub const DEFAULT_STAGE_ITERS: usize = 2000;
/// Stage termination threshold on the projected gradient step.
pub const DEFAULT_GRAD_TOL: f64 = 1e-8;

/// Step-size clamp for the Barzilai-Borwein scalars.
const BB_STEP_MIN: f64 = 1e-12;
const BB_STEP_MAX: f64 = 1e12;
/// History window of the nonmonotone acceptance test.
const BB_HISTORY: usize = 10;
/// Sufficient-decrease fraction of the acceptance test.
const BB_DECREASE: f64 = 1e-4;
/// Smallest backtracking fraction before a step is accepted as-is.
const BB_BACKTRACK_MIN: f64 = 1e-10;
/// Cap on full coordinate-descent passes of the final polish.
const POLISH_SWEEPS: usize = 50;

/// Weight bounds and solver tuning for one relaxation solve.
#[derive(Debug, Clone)]
pub struct RelaxationParams {
    /// Power weight actually used, `min(c1 * alpha1, c2 * alpha2)`.
    pub alpha: f64,
    /// Below this weight, total power never outweighs serving a link.
    pub alpha1: f64,
    /// Below this weight, a fully servable set is served at the minimizer.
    pub alpha2: f64,
    pub c1: f64,
    pub c2: f64,
    pub mu_start: f64,
    pub mu_factor: f64,
    pub mu_min: f64,
    pub max_iter_per_stage: usize,
    pub grad_tol: f64,
}

/// Computes the safe power-weight bounds for `problem` and returns solver
/// parameters with `alpha = min(c1 * alpha1, c2 * alpha2)` and default
/// continuation settings.
pub fn alpha_bounds(problem: &NormalizedProblem, c1: f64, c2: f64) -> Result<RelaxationParams> {
    if !(c1 > 0.0 && c1 < 1.0 && c2 > 0.0 && c2 < 1.0) {
        return Err(Error::Domain("weight fractions must lie in (0, 1)".into()));
    }
    if problem.links() == 0 {
        return Err(Error::Domain("problem has no links".into()));
    }
    let total_budget: f64 = problem.budget.sum();
    let alpha1 = 1.0 / total_budget;
    let min_floor = problem
        .floors
        .iter()
        .flat_map(|c| c.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let max_budget = problem.budget.iter().copied().fold(0.0f64, f64::max);
    let alpha2 = min_floor / (problem.links() as f64 * max_budget);
    let alpha = (c1 * alpha1).min(c2 * alpha2);
    Ok(RelaxationParams {
        alpha,
        alpha1,
        alpha2,
        c1,
        c2,
        mu_start: DEFAULT_MU_START,
        mu_factor: DEFAULT_MU_FACTOR,
        mu_min: DEFAULT_MU_MIN,
        max_iter_per_stage: DEFAULT_STAGE_ITERS,
        grad_tol: DEFAULT_GRAD_TOL,
    })
}

/// Per-link constraint residuals `c_k - A_k q`; positive entries are violated
/// samples.
pub fn residuals(problem: &NormalizedProblem, q: &Array1<f64>) -> Vec<Array1<f64>> {
    problem
        .blocks
        .iter()
        .zip(&problem.floors)
        .map(|(a, c)| c - &a.dot(q))
        .collect()
}

/// Largest residual entry over all links and samples.
pub fn max_residual(problem: &NormalizedProblem, q: &Array1<f64>) -> f64 {
    residuals(problem, q)
        .iter()
        .flat_map(|r| r.iter().copied())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Relaxation objective value at `q`.
pub fn objective(problem: &NormalizedProblem, q: &Array1<f64>, alpha: f64) -> f64 {
    let mut value = alpha * problem.budget.dot(q);
    for r in residuals(problem, q) {
        value += r.iter().map(|v| v.max(0.0).powi(2)).sum::<f64>().sqrt();
    }
    value
}

/// Value and gradient of the smoothed objective, where each hinge norm
/// `||max(r_k, 0)||_2` is replaced by `sqrt(||max(r_k, 0)||_2^2 + mu^2)`.
pub fn smoothed_objective_gradient(
    problem: &NormalizedProblem,
    q: &Array1<f64>,
    alpha: f64,
    mu: f64,
) -> Result<(f64, Array1<f64>)> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::Domain(format!("smoothing parameter must be positive, got {mu}")));
    }
    let mut value = alpha * problem.budget.dot(q);
    let mut grad = &problem.budget * alpha;
    for (block, floor) in problem.blocks.iter().zip(&problem.floors) {
        let clipped = (floor - &block.dot(q)).mapv(|v| v.max(0.0));
        let norm_sq = clipped.dot(&clipped);
        let denom = (norm_sq + mu * mu).sqrt();
        value += denom;
        if norm_sq > 0.0 {
            grad = grad - block.t().dot(&clipped) / denom;
        }
    }
    Ok((value, grad))
}

/// One link's contribution to the subdifferential of the hinge-norm sum.
#[derive(Debug, Clone)]
pub enum LinkSubgradient {
    /// Some sample is strictly violated; the term is differentiable with this
    /// gradient.
    Gradient(Array1<f64>),
    /// All samples hold and `rows` are exactly tight: the subdifferential is
    /// `{ -A_k^T s : s >= 0, support(s) within rows, ||s||_2 <= 1 }`. The
    /// canonical element the solvers use is zero (`s = 0`).
    Tight { rows: Vec<usize> },
    /// All samples hold strictly; the term vanishes on a neighborhood.
    Slack,
}

/// Classifies link `k`'s hinge-norm term at `q`.
pub fn subgradient_element(
    problem: &NormalizedProblem,
    k: usize,
    q: &Array1<f64>,
) -> Result<LinkSubgradient> {
    if k >= problem.links() {
        return Err(Error::Shape(format!("link {k} out of range")));
    }
    let r = &problem.floors[k] - &problem.blocks[k].dot(q);
    let clipped = r.mapv(|v| v.max(0.0));
    let norm = clipped.dot(&clipped).sqrt();
    if norm > 0.0 {
        return Ok(LinkSubgradient::Gradient(-problem.blocks[k].t().dot(&clipped) / norm));
    }
    let rows: Vec<usize> = r
        .iter()
        .enumerate()
        .filter_map(|(i, v)| (*v == 0.0).then_some(i))
        .collect();
    if rows.is_empty() {
        Ok(LinkSubgradient::Slack)
    } else {
        Ok(LinkSubgradient::Tight { rows })
    }
}

/// Full subgradient of the relaxation objective using the canonical element
/// (zero) at kinks.
fn total_subgradient(problem: &NormalizedProblem, q: &Array1<f64>, alpha: f64) -> Array1<f64> {
    let mut g = &problem.budget * alpha;
    for (block, floor) in problem.blocks.iter().zip(&problem.floors) {
        let clipped = (floor - &block.dot(q)).mapv(|v| v.max(0.0));
        let norm = clipped.dot(&clipped).sqrt();
        if norm > 0.0 {
            g = g - block.t().dot(&clipped) / norm;
        }
    }
    g
}

/// Componentwise projection onto the unit box.
pub fn project_box(q: &Array1<f64>) -> Array1<f64> {
    q.mapv(|v| v.clamp(0.0, 1.0))
}

/// Result of a relaxation solve.
#[derive(Debug, Clone)]
pub struct SolverOutput {
    pub q: Array1<f64>,
    /// Relaxation objective at `q` (unsmoothed).
    pub objective: f64,
    /// Iterations spent in each continuation stage (a single entry for the
    /// subgradient solver).
    pub stage_iterations: Vec<usize>,
    /// Unsmoothed objective after each continuation stage.
    pub stage_objectives: Vec<f64>,
    pub gradient_evals: usize,
}

/// Minimizes the smoothed objective for one smoothing level with projected
/// Barzilai-Borwein steps, alternating the two classical step scalars. Steps
/// pass a nonmonotone sufficient-decrease test over a short window of recent
/// values, with backtracking along the projected direction, so the spectral
/// step lengths keep their speed without letting the iteration cycle between
/// the flat and steep regions of the hinge terms.
fn bb_stage(
    problem: &NormalizedProblem,
    alpha: f64,
    mu: f64,
    mut x: Array1<f64>,
    params: &RelaxationParams,
    gradient_evals: &mut usize,
) -> Result<(Array1<f64>, usize)> {
    let (mut f, mut g) = smoothed_objective_gradient(problem, &x, alpha, mu)?;
    *gradient_evals += 1;
    let mut history = vec![f];
    let mut prev: Option<(Array1<f64>, Array1<f64>)> = None;
    let mut last_step = 0.0f64;
    for it in 0..params.max_iter_per_stage {
        let pg = (&x - &project_box(&(&x - &g)))
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        if pg <= params.grad_tol {
            return Ok((x, it));
        }
        let step = match &prev {
            None => {
                let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                1.0 / gmax
            }
            Some((px, pg_grad)) => {
                let s = &x - px;
                let y = &g - pg_grad;
                let sy = s.dot(&y);
                if sy > 0.0 {
                    let scalar = if it % 2 == 1 { s.dot(&s) / sy } else { sy / y.dot(&y) };
                    scalar.clamp(BB_STEP_MIN, BB_STEP_MAX)
                } else {
                    // non-positive curvature along the step: keep the last
                    // accepted scalar rather than trusting the quotient
                    last_step
                }
            }
        };
        let d = &project_box(&(&x - &(&g * step))) - &x;
        let gd = g.dot(&d);
        let f_ref = history.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
        let mut lambda = 1.0f64;
        let (accepted, f_acc, g_acc) = loop {
            let trial = project_box(&(&x + &(&d * lambda)));
            let (ft, gt) = smoothed_objective_gradient(problem, &trial, alpha, mu)?;
            *gradient_evals += 1;
            if ft <= f_ref + BB_DECREASE * lambda * gd || lambda < BB_BACKTRACK_MIN {
                break (trial, ft, gt);
            }
            lambda *= 0.5;
        };
        prev = Some((x, g));
        x = accepted;
        f = f_acc;
        g = g_acc;
        last_step = step;
        history.push(f);
        if history.len() > BB_HISTORY {
            history.remove(0);
        }
    }
    Ok((x, params.max_iter_per_stage))
}

/// Exact single-coordinate descent on the unsmoothed objective. Badly
/// conditioned instances put the minimizer on a box face behind a nearly
/// vertical hinge wall; gradient steps crawl along such walls, while a
/// one-dimensional line minimum lands on the face exactly. Each coordinate
/// is minimized by golden-section search (the objective is convex, hence
/// unimodal, in one variable) with the box corners checked explicitly, and
/// sweeps repeat until a full pass leaves every coordinate in place.
fn coordinate_polish(problem: &NormalizedProblem, mut x: Array1<f64>, alpha: f64) -> Array1<f64> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut f = objective(problem, &x, alpha);
    for _ in 0..POLISH_SWEEPS {
        let mut improved = false;
        for i in 0..x.len() {
            let eval = |v: f64| {
                let mut trial = x.clone();
                trial[i] = v;
                objective(problem, &trial, alpha)
            };
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            let mut a = hi - INV_PHI * (hi - lo);
            let mut b = lo + INV_PHI * (hi - lo);
            let mut fa = eval(a);
            let mut fb = eval(b);
            while hi - lo > 1e-13 {
                if fa <= fb {
                    hi = b;
                    b = a;
                    fb = fa;
                    a = hi - INV_PHI * (hi - lo);
                    fa = eval(a);
                } else {
                    lo = a;
                    a = b;
                    fa = fb;
                    b = lo + INV_PHI * (hi - lo);
                    fb = eval(b);
                }
            }
            let mid = 0.5 * (lo + hi);
            let mut best_v = x[i];
            let mut best_f = f;
            for v in [0.0, 1.0, mid] {
                let fv = eval(v);
                if fv < best_f {
                    best_f = fv;
                    best_v = v;
                }
            }
            if best_v != x[i] {
                x[i] = best_v;
                f = best_f;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    x
}

/// Solves the relaxation by smoothing continuation: starting from full power,
/// each smoothing level is minimized with projected Barzilai-Borwein steps
/// and warm-starts the next, until the level drops below `mu_min`. A final
/// coordinate-descent polish on the unsmoothed objective snaps the iterate
/// onto box faces the smoothed stages only approach.
pub fn solve_pabb(problem: &NormalizedProblem, params: &RelaxationParams) -> Result<SolverOutput> {
    if !(params.alpha > 0.0 && params.alpha.is_finite()) {
        return Err(Error::Domain("alpha must be positive".into()));
    }
    if !(params.mu_start > 0.0 && params.mu_min > 0.0 && params.mu_start >= params.mu_min) {
        return Err(Error::Domain("smoothing schedule must satisfy mu_start >= mu_min > 0".into()));
    }
    if !(params.mu_factor > 0.0 && params.mu_factor < 1.0) {
        return Err(Error::Domain("mu_factor must lie in (0, 1)".into()));
    }
    let k = problem.links();
    let mut x = Array1::ones(k);
    let mut stage_iterations = Vec::new();
    let mut stage_objectives = Vec::new();
    let mut gradient_evals = 0usize;
    let mut mu = params.mu_start;
    while mu >= params.mu_min {
        let (next, iters) = bb_stage(problem, params.alpha, mu, x, params, &mut gradient_evals)?;
        x = next;
        stage_iterations.push(iters);
        stage_objectives.push(objective(problem, &x, params.alpha));
        mu *= params.mu_factor;
    }
    let x = coordinate_polish(problem, x, params.alpha);
    let objective = objective(problem, &x, params.alpha);
    Ok(SolverOutput { q: x, objective, stage_iterations, stage_objectives, gradient_evals })
}

/// Solves the relaxation with projected subgradient steps along the
/// normalized subgradient direction, starting from full power and returning
/// the best iterate seen. The step length decays geometrically from `step0`
/// to `1e-10` over the iteration budget. Normalizing keeps the step length
/// independent of the subgradient magnitude, which on badly conditioned
/// instances (a receiver nearly on top of an interferer) spans several
/// orders of magnitude between neighbouring points; the geometric decay
/// trades the classical `1 / sqrt(t)` guarantee for much faster shrinkage
/// toward the sharp minimizers these objectives have. The best iterate gets
/// the same coordinate-descent polish as the continuation solver. Zero
/// iterations return the start point untouched.
pub fn solve_subgradient(
    problem: &NormalizedProblem,
    alpha: f64,
    step0: f64,
    iters: usize,
) -> Result<SolverOutput> {
    if !(step0 > 0.0 && step0.is_finite()) {
        return Err(Error::Domain("step0 must be positive".into()));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::Domain("alpha must be nonnegative".into()));
    }
    let k = problem.links();
    let mut x = Array1::ones(k);
    let mut best = x.clone();
    let mut best_value = objective(problem, &x, alpha);
    let mut gradient_evals = 0usize;
    let step_floor = 1e-10f64;
    let decay = if iters > 0 && step0 > step_floor {
        (step_floor / step0).powf(1.0 / iters as f64)
    } else {
        1.0
    };
    let mut step = step0;
    for _ in 1..=iters {
        let g = total_subgradient(problem, &x, alpha);
        gradient_evals += 1;
        let norm = g.dot(&g).sqrt();
        if norm == 0.0 {
            break;
        }
        x = project_box(&(&x - &(&g * (step / norm))));
        let value = objective(problem, &x, alpha);
        if value < best_value {
            best_value = value;
            best = x.clone();
        }
        step *= decay;
    }
    if iters > 0 {
        best = coordinate_polish(problem, best, alpha);
        best_value = objective(problem, &best, alpha);
    }
    Ok(SolverOutput {
        q: best,
        objective: best_value,
        stage_iterations: vec![iters],
        stage_objectives: vec![best_value],
        gradient_evals,
    })
}
