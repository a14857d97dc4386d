//! Command-line front end: generate instances, solve them, sweep experiment
//! grids.
//!
//! Exit codes: 0 on success, 1 on runtime or I/O failure, 2 on usage errors
//! (flag parsing, out-of-range values). The `JPAC_SEED` environment variable
//! overrides seed defaults; an explicit `--seed` flag still wins over it.

use crate::bench::{run_montecarlo, Algo, BenchConfig};
use crate::channel::{
    generate_nominal, normalize, required_sample_size, sample_perturbed, GenConfig,
};
use crate::deflation::{deflate, DeflateConfig, RemovalRule, SolverKind};
use crate::error::Result;
use crate::io::{
    instance_file, read_instance, solve_report, write_csv, write_figure_data, write_instance,
    write_report, write_summary, OracleSection,
};
use crate::oracle::{enumerate_optimal, OracleConfig};
use crate::rng::derive_seed;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "jpac",
    version,
    about = "Joint power and admission control under sampled SINR constraints"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a random instance and write it as JSON.
    Gen(GenArgs),
    /// Run the deflation pipeline on an instance file.
    Solve(SolveArgs),
    /// Sweep a Monte-Carlo grid and write CSV, summary, and figure data.
    Bench(BenchArgs),
}

fn parse_spread(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if (0.0..1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("spread must satisfy 0 <= S < 1, got {v}"))
    }
}

fn parse_rule(s: &str) -> std::result::Result<RemovalRule, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_algo(s: &str) -> std::result::Result<Algo, String> {
    s.parse().map_err(|e| format!("{e}"))
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Number of links.
    #[arg(long, default_value_t = 4)]
    pub links: usize,
    /// Relative perturbation magnitude, in [0, 1).
    #[arg(long, default_value_t = 0.0, value_parser = parse_spread)]
    pub spread: f64,
    /// Channel samples to draw, the nominal slice included.
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
    /// Derive the sample count from --epsilon, --delta, and --k-supported.
    #[arg(long)]
    pub auto_samples: bool,
    /// Outage tolerance used by --auto-samples.
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Confidence failure probability used by --auto-samples.
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// Supported-link count the sample size certifies.
    #[arg(long, default_value_t = 10)]
    pub k_supported: usize,
    /// SINR target in dB.
    #[arg(long, default_value_t = 2.0)]
    pub gamma_db: f64,
    /// Nominal noise power in dBm.
    #[arg(long, default_value_t = -90.0, allow_hyphen_values = true)]
    pub noise_dbm: f64,
    /// Master seed; JPAC_SEED overrides the default.
    #[arg(long, default_value_t = 1, env = "JPAC_SEED")]
    pub seed: u64,
    /// Output path for the instance JSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Instance JSON path.
    pub instance: PathBuf,
    /// Relaxation solver: pabb or subgrad.
    #[arg(long, default_value = "pabb")]
    pub algo: String,
    /// Removal rule for admission rounds.
    #[arg(long, default_value = "footprint", value_parser = parse_rule)]
    pub removal: RemovalRule,
    /// Subgradient step scale.
    #[arg(long, default_value_t = 0.1)]
    pub step0: f64,
    /// Subgradient iteration budget.
    #[arg(long, default_value_t = 20_000)]
    pub iters: usize,
    /// Compare against the exhaustive search (needs at most 12 links).
    #[arg(long)]
    pub oracle_check: bool,
    /// Optional path for the result JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated link counts.
    #[arg(long, value_delimiter = ',', default_value = "4,12")]
    pub links: Vec<usize>,
    /// Comma-separated spreads, each in [0, 1).
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2", value_parser = parse_spread)]
    pub spreads: Vec<f64>,
    /// Instances per cell.
    #[arg(long, default_value_t = 200)]
    pub runs: usize,
    /// Channel samples per instance; omitted means derive from
    /// --epsilon/--delta/--k-supported.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 10)]
    pub k_supported: usize,
    /// Comma-separated algorithms: pabb-d, subgrad-d, benchmark-nlpd.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "pabb-d,subgrad-d,benchmark-nlpd",
        value_parser = parse_algo
    )]
    pub algos: Vec<Algo>,
    /// Master seed; JPAC_SEED overrides the default.
    #[arg(long, default_value_t = 1, env = "JPAC_SEED")]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Removal rule for admission rounds.
    #[arg(long, default_value = "footprint", value_parser = parse_rule)]
    pub removal: RemovalRule,
    /// Subgradient step scale.
    #[arg(long, default_value_t = 0.1)]
    pub step0: f64,
    /// Subgradient iteration budget.
    #[arg(long, default_value_t = 20_000)]
    pub iters: usize,
    /// Directory for results.csv, summary.json, and fig_*.dat files.
    #[arg(long, default_value = "bench-out")]
    pub out_dir: PathBuf,
}

fn fmt_list<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    let parts: Vec<String> = items.into_iter().map(|v| v.to_string()).collect();
    if parts.is_empty() {
        "none".into()
    } else {
        parts.join(",")
    }
}

fn cmd_gen(args: &GenArgs) -> Result<()> {
    let samples = if args.auto_samples {
        required_sample_size(args.epsilon, args.delta, args.k_supported)?
    } else {
        args.samples
    };
    let mut cfg = GenConfig::new(args.links);
    cfg.sinr_target_db = args.gamma_db;
    cfg.noise_dbm = args.noise_dbm;
    let nominal = generate_nominal(&cfg, derive_seed(args.seed, 0))?;
    let set = sample_perturbed(&nominal, samples, args.spread, derive_seed(args.seed, 1))?;
    let file = instance_file(&nominal, &set, args.seed, args.gamma_db, args.noise_dbm);
    write_instance(&args.out, &file)?;
    println!(
        "wrote {} (links={}, samples={}, spread={}, seed={})",
        args.out.display(),
        args.links,
        samples,
        args.spread,
        args.seed
    );
    Ok(())
}

fn cmd_solve(args: &SolveArgs) -> Result<()> {
    let loaded = read_instance(&args.instance)?;
    let problem = normalize(&loaded.nominal, &loaded.samples)?;
    let solver = match args.algo.as_str() {
        "pabb" => SolverKind::Pabb,
        "subgrad" => SolverKind::Subgrad { step0: args.step0, iters: args.iters },
        other => {
            return Err(crate::error::Error::Invalid(format!(
                "unknown solver {other:?}; expected pabb or subgrad"
            )))
        }
    };
    let config = DeflateConfig { solver, rule: args.removal, ..DeflateConfig::default() };
    let result = deflate(&problem, &config)?;
    let mut report = solve_report(&result, &problem.budget);
    println!(
        "supported: {}; q = {}",
        fmt_list(report.supported.iter()),
        fmt_list(result.q.iter().map(|v| format!("{v:.3}")))
    );
    println!("total_power_w: {}", report.total_power_w);
    if report.removals.is_empty() {
        println!("removed: none");
    } else {
        for r in &report.removals {
            println!("removed: link {} ({}/{}, score {:.6})", r.link, r.phase, r.kind, r.score);
        }
    }
    println!("readmitted: {}", fmt_list(report.readmitted.iter()));
    if args.oracle_check {
        let oracle = enumerate_optimal(&problem, &OracleConfig::default())?;
        let gap = oracle.m_star as i64 - result.supported.len() as i64;
        println!("oracle: m_star={}, gap={}", oracle.m_star, gap);
        report.oracle =
            Some(OracleSection { m_star: oracle.m_star, gap, min_power_w: oracle.min_power });
    }
    if let Some(out) = &args.out {
        write_report(out, &report)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let config = BenchConfig {
        links: args.links.clone(),
        spreads: args.spreads.clone(),
        runs: args.runs,
        samples: args.samples,
        epsilon: args.epsilon,
        delta: args.delta,
        k_supported: args.k_supported,
        algos: args.algos.clone(),
        master_seed: args.seed,
        jobs: args.jobs,
        deflate: DeflateConfig { rule: args.removal, ..DeflateConfig::default() },
        subgrad_step0: args.step0,
        subgrad_iters: args.iters,
    };
    let (records, summaries) = run_montecarlo(&config)?;
    std::fs::create_dir_all(&args.out_dir)?;
    write_csv(&args.out_dir.join("results.csv"), &records)?;
    write_summary(&args.out_dir.join("summary.json"), &summaries)?;
    write_figure_data(&args.out_dir, &summaries)?;
    for cell in &summaries {
        println!(
            "k={} s={} algo={} dist={} mean_supported={:.3} mean_power_w={:.3e} mean_time_s={:.3}",
            cell.links,
            cell.spread,
            cell.algo.as_str(),
            cell.distribution,
            cell.mean_supported,
            cell.mean_power,
            cell.mean_time
        );
    }
    println!("wrote {}", args.out_dir.display());
    Ok(())
}

/// Dispatches a parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
    }
}
