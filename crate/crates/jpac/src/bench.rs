//! Monte-Carlo experiment harness.
//!
//! Draws random deployments, runs the configured admission algorithms on
//! each, and aggregates supported-link statistics per cell. Seeds derive from
//! a single master seed so results are reproducible and the same instance is
//! reused across spreads and algorithms for paired comparisons. A separate
//! outage estimator replays a solved power vector on fresh channel draws.

use crate::channel::{
    generate_nominal, normalize, required_sample_size, sample_perturbed, GenConfig, NominalChannel,
};
use crate::deflation::{deflate, DeflateConfig, SolverKind};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use ndarray::Array1;
use rayon::prelude::*;
use std::str::FromStr;

/// Which pipeline a record came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    /// Deflation with the spectral projected solver on the full sample set.
    PabbDeflate,
    /// Deflation with the subgradient solver on the full sample set.
    SubgradDeflate,
    /// Deflation on the nominal channel only (single sample, no spread).
    Benchmark,
}

impl Algo {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algo::PabbDeflate => "pabb-d",
            Algo::SubgradDeflate => "subgrad-d",
            Algo::Benchmark => "benchmark-nlpd",
        }
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pabb-d" | "pabb" => Ok(Algo::PabbDeflate),
            "subgrad-d" | "subgrad" => Ok(Algo::SubgradDeflate),
            "benchmark-nlpd" | "benchmark" => Ok(Algo::Benchmark),
            other => Err(Error::Invalid(format!(
                "unknown algorithm {other:?}; expected pabb-d, subgrad-d, or benchmark-nlpd"
            ))),
        }
    }
}

/// One experiment grid.
#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// Link counts to sweep.
    pub links: Vec<usize>,
    /// Perturbation spreads to sweep, each in `[0, 1)`.
    pub spreads: Vec<f64>,
    /// Instances per (links, spread) cell.
    pub runs: usize,
    /// Constraint samples per instance; `None` derives the count from
    /// `(epsilon, delta, k_supported)`.
    pub samples: Option<usize>,
    pub epsilon: f64,
    pub delta: f64,
    /// Supported-link count the sample size is certified for.
    pub k_supported: usize,
    pub algos: Vec<Algo>,
    pub master_seed: u64,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    /// Base deflation settings; the solver field is overridden per algorithm.
    pub deflate: DeflateConfig,
    /// Step scale of the subgradient solver.
    pub subgrad_step0: f64,
    /// Iteration budget of the subgradient solver.
    pub subgrad_iters: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            links: vec![4, 12],
            spreads: vec![0.0, 0.1, 0.2],
            runs: 200,
            samples: None,
            epsilon: 0.1,
            delta: 0.05,
            k_supported: 10,
            algos: vec![Algo::PabbDeflate, Algo::SubgradDeflate, Algo::Benchmark],
            master_seed: 1,
            jobs: None,
            deflate: DeflateConfig::default(),
            subgrad_step0: 0.1,
            subgrad_iters: 20_000,
        }
    }
}

/// Outcome of one algorithm on one instance.
#[derive(Debug, Clone)]
pub struct BenchRecord {
    pub links: usize,
    pub spread: f64,
    pub run: usize,
    /// Instance seed, shared across spreads and algorithms of this run.
    pub seed: u64,
    pub algo: Algo,
    pub supported: usize,
    /// Total transmit power in watts.
    pub power: f64,
    /// Seconds spent in the deflation pipeline.
    pub wall_time: f64,
}

/// Aggregate of one (links, spread, algorithm) cell.
#[derive(Debug, Clone)]
pub struct BenchSummary {
    pub links: usize,
    pub spread: f64,
    pub algo: Algo,
    pub runs: usize,
    /// `total=v1*n1+v2*n2+...` with supported-link values ascending.
    pub distribution: String,
    pub mean_supported: f64,
    pub mean_power: f64,
    pub mean_time: f64,
}

fn run_one(
    config: &BenchConfig,
    samples: usize,
    links: usize,
    run: usize,
) -> Result<Vec<BenchRecord>> {
    let seed = derive_seed(derive_seed(config.master_seed, links as u64), run as u64);
    let geo_seed = derive_seed(seed, 0);
    let samp_seed = derive_seed(seed, 1);
    let nominal = generate_nominal(&GenConfig::new(links), geo_seed)?;
    let benchmark = if config.algos.contains(&Algo::Benchmark) {
        let set = sample_perturbed(&nominal, 1, 0.0, samp_seed)?;
        let prob = normalize(&nominal, &set)?;
        let mut cfg = config.deflate;
        cfg.solver = SolverKind::Pabb;
        Some(deflate(&prob, &cfg)?)
    } else {
        None
    };
    let mut records = Vec::with_capacity(config.spreads.len() * config.algos.len());
    for &spread in &config.spreads {
        let set = sample_perturbed(&nominal, samples, spread, samp_seed)?;
        let prob = normalize(&nominal, &set)?;
        for &algo in &config.algos {
            let result = match algo {
                Algo::PabbDeflate => {
                    let mut cfg = config.deflate;
                    cfg.solver = SolverKind::Pabb;
                    deflate(&prob, &cfg)?
                }
                Algo::SubgradDeflate => {
                    let mut cfg = config.deflate;
                    cfg.solver = SolverKind::Subgrad {
                        step0: config.subgrad_step0,
                        iters: config.subgrad_iters,
                    };
                    deflate(&prob, &cfg)?
                }
                Algo::Benchmark => benchmark.clone().expect("benchmark precomputed"),
            };
            records.push(BenchRecord {
                links,
                spread,
                run,
                seed,
                algo,
                supported: result.supported.len(),
                power: result.total_power,
                wall_time: result.wall_time,
            });
        }
    }
    Ok(records)
}

/// Runs the whole grid. Records come back in (links, spread, run, algorithm)
/// order following the config lists, whatever the completion order of the
/// parallel workers, and all randomness derives from the master seed.
pub fn run_montecarlo(config: &BenchConfig) -> Result<(Vec<BenchRecord>, Vec<BenchSummary>)> {
    if config.runs == 0 || config.links.is_empty() || config.spreads.is_empty() {
        return Err(Error::Domain("grid needs links, spreads, and at least one run".into()));
    }
    if config.algos.is_empty() {
        return Err(Error::Domain("grid needs at least one algorithm".into()));
    }
    if config.spreads.iter().any(|s| !(0.0..1.0).contains(s)) {
        return Err(Error::Domain("every spread must lie in [0, 1)".into()));
    }
    let samples = match config.samples {
        Some(n) if n >= 1 => n,
        Some(_) => return Err(Error::Domain("sample count must be at least 1".into())),
        None => required_sample_size(config.epsilon, config.delta, config.k_supported)?,
    };
    let tasks: Vec<(usize, usize)> = config
        .links
        .iter()
        .flat_map(|&k| (0..config.runs).map(move |run| (k, run)))
        .collect();
    let work = || -> Result<Vec<Vec<BenchRecord>>> {
        tasks
            .par_iter()
            .map(|&(links, run)| run_one(config, samples, links, run))
            .collect()
    };
    let bundles = match config.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Invalid(format!("could not build a {jobs}-thread pool: {e}")))?
            .install(work),
        None => work(),
    }?;
    let n_algos = config.algos.len();
    let mut records = Vec::with_capacity(tasks.len() * config.spreads.len() * n_algos);
    for k_idx in 0..config.links.len() {
        for s_idx in 0..config.spreads.len() {
            for run in 0..config.runs {
                let bundle = &bundles[k_idx * config.runs + run];
                for a_idx in 0..n_algos {
                    records.push(bundle[s_idx * n_algos + a_idx].clone());
                }
            }
        }
    }
    let summaries = summarize(&records);
    Ok((records, summaries))
}

/// Groups records into (links, spread, algorithm) cells in first-appearance
/// order and formats each cell's supported-count distribution.
pub fn summarize(records: &[BenchRecord]) -> Vec<BenchSummary> {
    let mut order: Vec<(usize, f64, Algo)> = Vec::new();
    for r in records {
        if !order.iter().any(|&(k, s, a)| k == r.links && s == r.spread && a == r.algo) {
            order.push((r.links, r.spread, r.algo));
        }
    }
    order
        .into_iter()
        .map(|(links, spread, algo)| {
            let cell: Vec<&BenchRecord> = records
                .iter()
                .filter(|r| r.links == links && r.spread == spread && r.algo == algo)
                .collect();
            let runs = cell.len();
            let mut counts = std::collections::BTreeMap::new();
            for r in &cell {
                *counts.entry(r.supported).or_insert(0usize) += 1;
            }
            let total: usize = counts.iter().map(|(v, c)| v * c).sum();
            let parts: Vec<String> =
                counts.iter().map(|(v, c)| format!("{v}*{c}")).collect();
            let distribution = format!("{total}={}", parts.join("+"));
            let mean = |f: fn(&BenchRecord) -> f64| {
                cell.iter().map(|r| f(r)).sum::<f64>() / runs as f64
            };
            BenchSummary {
                links,
                spread,
                algo,
                runs,
                distribution,
                mean_supported: total as f64 / runs as f64,
                mean_power: mean(|r| r.power),
                mean_time: mean(|r| r.wall_time),
            }
        })
        .collect()
}

/// Replays a solved power allocation on `fresh_samples` new channel draws and
/// returns, per supported link, the fraction of draws in which the link
/// misses its SINR target. `q` is indexed like `supported`; a relative dead
/// band of `1e-9` keeps exactly-binding links from flickering into outage.
pub fn estimate_outage(
    nominal: &NominalChannel,
    supported: &[usize],
    q: &Array1<f64>,
    spread: f64,
    fresh_samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if fresh_samples == 0 {
        return Err(Error::Domain("need at least one fresh sample".into()));
    }
    if q.len() != supported.len() {
        return Err(Error::Shape(format!(
            "power vector has {} entries for {} supported links",
            q.len(),
            supported.len()
        )));
    }
    let set = sample_perturbed(nominal, fresh_samples + 1, spread, seed)?;
    let k = nominal.links();
    let mut p = Array1::zeros(k);
    for (slot, &link) in supported.iter().enumerate() {
        p[link] = q[slot] * nominal.budget[link];
    }
    Ok(supported
        .iter()
        .map(|&link| {
            let floor = nominal.sinr_target[link] * (1.0 - 1e-9);
            let misses =
                (1..set.len()).filter(|&slice| set.sinr(slice, link, &p) < floor).count();
            misses as f64 / fresh_samples as f64
        })
        .collect())
}
