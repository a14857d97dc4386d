//! End-to-end acceptance checks for the full toolkit: one test per release
//! gate, each printing a summary line and enforcing its runtime budget.

use std::path::Path;
use std::time::Instant;

use jpac::bench::{estimate_outage, run_montecarlo, Algo, BenchConfig};
use jpac::channel::{
    generate_nominal, normalize, required_sample_size, sample_perturbed, GenConfig,
    NormalizedProblem,
};
use jpac::deflation::{deflate, necessary_condition, DeflateConfig, SolverKind};
use jpac::io::read_instance;
use jpac::oracle::{enumerate_optimal, OracleConfig};
use jpac::power_control::check_feasibility;
use jpac::relaxation::{alpha_bounds, smoothed_objective_gradient, solve_pabb, solve_subgradient};
use jpac::rng::derive_seed;
use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_problem(k: usize, n: usize, spread: f64, seed: u64) -> NormalizedProblem {
    let nominal = generate_nominal(&GenConfig::new(k), derive_seed(seed, 0))
        .expect("geometry generation succeeds");
    let samples = sample_perturbed(&nominal, n, spread, derive_seed(seed, 1))
        .expect("sampling succeeds");
    normalize(&nominal, &samples).expect("normalization succeeds")
}

/// Every served link must have at least one sample row at equality: the
/// minimal-power solution cannot strictly over-satisfy all of a link's
/// sampled constraints, or its power could be lowered further.
fn assert_served_links_balanced(problem: &NormalizedProblem, supported: &[usize], q: &Array1<f64>) {
    if supported.is_empty() {
        return;
    }
    let sub = problem.restrict(supported).expect("supported set restricts");
    for (local, link) in supported.iter().enumerate() {
        let rows = sub.blocks[local].dot(q) - &sub.floors[local];
        let closest = rows.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        assert!(
            closest <= 1e-6,
            "served link {link} has no binding sample row; closest residual {closest:.3e}"
        );
    }
}

#[test]
fn a01_sample_count_formula_matches_known_values() {
    let t = Instant::now();
    assert_eq!(required_sample_size(0.1, 0.05, 10).unwrap(), 200);
    assert_eq!(required_sample_size(0.5, (-1.0f64).exp(), 1).unwrap(), 4);
    assert_eq!(required_sample_size(0.2, 0.1, 3).unwrap(), 41);
    assert!(t.elapsed().as_secs_f64() < 1.0, "formula must be instant");
    println!("[PASS] sample-count formula reproduces 200, 4, and 41");
}

#[test]
fn a02_two_link_fixture_served_at_full_power_with_exact_residuals() {
    let t = Instant::now();
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/two_link.json");
    let loaded = read_instance(&path).expect("bundled fixture parses");
    let problem = normalize(&loaded.nominal, &loaded.samples).expect("fixture normalizes");

    let result = deflate(&problem, &DeflateConfig::default()).expect("deflation succeeds");
    assert_eq!(result.supported, vec![0, 1], "both links must be served");
    assert!(result.removals.is_empty(), "nothing may be dropped");
    for value in result.q.iter() {
        assert!(
            (value - 1.0).abs() <= 1e-6,
            "minimal powers must sit at the cap, got {value}"
        );
    }
    assert_served_links_balanced(&problem, &result.supported, &result.q);

    let ones = Array1::ones(2);
    let first = problem.blocks[0].dot(&ones) - &problem.floors[0];
    let second = problem.blocks[1].dot(&ones) - &problem.floors[1];
    for (got, want) in first.iter().zip([0.3, 0.0]) {
        assert!(
            (got - want).abs() <= 1e-12,
            "first block residual {got} differs from {want}"
        );
    }
    for (got, want) in second.iter().zip([0.2, 0.0]) {
        assert!(
            (got - want).abs() <= 1e-12,
            "second block residual {got} differs from {want}"
        );
    }
    let elapsed = t.elapsed().as_secs_f64();
    assert!(elapsed < 1.0, "fixture check took {elapsed:.2}s, budget 1s");
    println!("[PASS] fixture served at q = (1, 1) with residuals (0.3, 0) and (0.2, 0)");
}

#[test]
fn a03_fully_servable_instances_never_lose_a_link() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    let mut tried = 0u64;
    let mut kept = 0usize;
    while kept < 200 {
        assert!(
            tried < 10_000,
            "only {kept} fully servable draws in {tried} attempts"
        );
        let k = rng.gen_range(2..=6usize);
        let n = rng.gen_range(1..=20usize);
        let s = [0.0, 0.1, 0.2][rng.gen_range(0..3usize)];
        let seed = derive_seed(301, tried);
        tried += 1;
        let problem = random_problem(k, n, s, seed);
        let oracle = enumerate_optimal(&problem, &OracleConfig::default()).unwrap();
        if oracle.m_star != k {
            continue;
        }
        kept += 1;
        let result = deflate(&problem, &DeflateConfig::default()).unwrap();
        assert_eq!(
            result.supported.len(),
            k,
            "instance {seed} (k={k}, n={n}, s={s}) is fully servable but lost links: {:?}",
            result.supported
        );
        assert_served_links_balanced(&problem, &result.supported, &result.q);
    }
    let elapsed = t.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "took {elapsed:.1}s, budget 30s");
    println!("[PASS] 200 certified fully servable instances all kept every link ({elapsed:.1}s)");
}

#[test]
fn a04_deflation_matches_exhaustive_search_support_counts() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(400);
    let mut equal = 0usize;
    let mut gap_sum = 0.0f64;
    for j in 0..100u64 {
        let k = rng.gen_range(2..=6usize);
        let n = rng.gen_range(1..=10usize);
        let seed = derive_seed(401, j);
        let problem = random_problem(k, n, 0.2, seed);
        let oracle = enumerate_optimal(&problem, &OracleConfig::default()).unwrap();
        let result = deflate(&problem, &DeflateConfig::default()).unwrap();
        let served = result.supported.len();
        assert!(
            served <= oracle.m_star,
            "instance {seed}: served {served} exceeds the exhaustive optimum {}",
            oracle.m_star
        );
        if served == oracle.m_star {
            equal += 1;
        }
        gap_sum += (oracle.m_star - served) as f64;
        assert_served_links_balanced(&problem, &result.supported, &result.q);
    }
    let mean_gap = gap_sum / 100.0;
    assert!(equal >= 80, "optimal support count hit only {equal}/100 times");
    assert!(mean_gap <= 0.25, "mean support gap {mean_gap} exceeds 0.25");
    let elapsed = t.elapsed().as_secs_f64();
    assert!(elapsed < 120.0, "took {elapsed:.1}s, budget 2min");
    println!("[PASS] exhaustive-search parity: {equal}/100 exact, mean gap {mean_gap:.3} ({elapsed:.1}s)");
}

#[test]
fn a05_smoothed_gradient_matches_finite_differences() {
    let t = Instant::now();
    let h = 2e-7;
    let mut worst = 0.0f64;
    for i in 0..10u64 {
        let k = 2 + (i as usize % 4);
        let n = 1 + (i as usize % 10);
        let seed = derive_seed(500, i);
        let problem = random_problem(k, n, 0.2, seed);
        let params = alpha_bounds(&problem, 0.999, 0.999).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let x = Array1::from_shape_fn(k, |_| rng.gen_range(0.0..=1.0));
            for mu in [1.0, 1e-2, 1e-4] {
                let (_, g) = smoothed_objective_gradient(&problem, &x, params.alpha, mu).unwrap();
                let mut fd = Array1::zeros(k);
                for d in 0..k {
                    let mut xp = x.clone();
                    xp[d] += h;
                    let mut xm = x.clone();
                    xm[d] -= h;
                    let (fp, _) =
                        smoothed_objective_gradient(&problem, &xp, params.alpha, mu).unwrap();
                    let (fm, _) =
                        smoothed_objective_gradient(&problem, &xm, params.alpha, mu).unwrap();
                    fd[d] = (fp - fm) / (2.0 * h);
                }
                let scale = g.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                let err = (&fd - &g).iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let rel = err / scale;
                assert!(
                    rel <= 1e-5,
                    "gradient mismatch {rel:.3e} at mu={mu} on instance {seed}"
                );
                worst = worst.max(rel);
            }
        }
    }
    let elapsed = t.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "took {elapsed:.1}s, budget 10s");
    println!("[PASS] analytic gradient within {worst:.2e} of finite differences ({elapsed:.1}s)");
}

#[test]
fn a06_solvers_agree_and_continuation_is_faster() {
    let t = Instant::now();

    let mut rng = ChaCha8Rng::seed_from_u64(600);
    let mut worst = 0.0f64;
    for i in 0..50u64 {
        let k = rng.gen_range(2..=5usize);
        let n = rng.gen_range(1..=8usize);
        let seed = derive_seed(601, i);
        let problem = random_problem(k, n, 0.2, seed);
        let params = alpha_bounds(&problem, 0.999, 0.999).unwrap();
        let pabb = solve_pabb(&problem, &params).unwrap();
        let mut best = f64::INFINITY;
        for step0 in [0.1, 0.3, 1.0] {
            let sg = solve_subgradient(&problem, params.alpha, step0, 100_000).unwrap();
            best = best.min(sg.objective);
        }
        let rel = (pabb.objective - best).abs() / pabb.objective.abs().max(best.abs()).max(1e-12);
        assert!(
            rel <= 1e-4,
            "objectives disagree by {rel:.3e} on instance {seed}: {} vs {}",
            pabb.objective,
            best
        );
        worst = worst.max(rel);
    }

    let mut faster = 0usize;
    let subgrad = DeflateConfig {
        solver: SolverKind::Subgrad {
            step0: 0.1,
            iters: 20_000,
        },
        ..DeflateConfig::default()
    };
    for i in 0..20u64 {
        let seed = derive_seed(602, i);
        let problem = random_problem(12, 200, 0.1, seed);
        let t1 = Instant::now();
        let fast = deflate(&problem, &DeflateConfig::default()).unwrap();
        let continuation = t1.elapsed().as_secs_f64();
        let t2 = Instant::now();
        deflate(&problem, &subgrad).unwrap();
        let subgradient = t2.elapsed().as_secs_f64();
        if continuation < subgradient {
            faster += 1;
        }
        assert_served_links_balanced(&problem, &fast.supported, &fast.q);
    }
    assert!(
        faster >= 18,
        "continuation pipeline faster on only {faster}/20 instances"
    );
    let elapsed = t.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "took {elapsed:.1}s, budget 5min");
    println!(
        "[PASS] solver agreement within {worst:.2e}, continuation faster on {faster}/20 ({elapsed:.1}s)"
    );
}

#[test]
fn a07_every_served_link_has_a_binding_sample() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(700);
    let mut fixed_points = 0usize;
    let mut served_links = 0usize;
    for j in 0..60u64 {
        let k = rng.gen_range(2..=6usize);
        let n = rng.gen_range(1..=10usize);
        let s = [0.0, 0.1, 0.2][rng.gen_range(0..3usize)];
        let problem = random_problem(k, n, s, derive_seed(701, j));

        let result = deflate(&problem, &DeflateConfig::default()).unwrap();
        assert_served_links_balanced(&problem, &result.supported, &result.q);
        served_links += result.supported.len();

        for mask in 1u32..(1 << k) {
            let subset: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
            let report = check_feasibility(&problem, &subset).unwrap();
            if !report.feasible {
                continue;
            }
            fixed_points += 1;
            let q = report.q_min.expect("feasible subsets carry minimal powers");
            assert_served_links_balanced(&problem, &subset, &q);
            let sub = problem.restrict(&subset).unwrap();
            for (local, row) in report.fixed_point.binding.iter().enumerate() {
                let rows = sub.blocks[local].dot(&q) - &sub.floors[local];
                assert!(
                    rows[*row].abs() <= 1e-6,
                    "reported binding row {row} of link {} is loose: {:.3e}",
                    subset[local],
                    rows[*row]
                );
            }
        }
    }
    let elapsed = t.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "took {elapsed:.1}s, budget 1min");
    println!(
        "[PASS] balancing held at {fixed_points} feasible fixed points and {served_links} served links ({elapsed:.1}s)"
    );
}

#[test]
fn a08_single_sample_benchmark_reproduces_reference_mean() {
    let t = Instant::now();
    let config = BenchConfig {
        links: vec![4],
        spreads: vec![0.0],
        runs: 200,
        samples: Some(1),
        algos: vec![Algo::Benchmark],
        ..BenchConfig::default()
    };
    let (records, summaries) = run_montecarlo(&config).unwrap();
    assert_eq!(records.len(), 200);
    let mean = summaries[0].mean_supported;
    assert!(
        (mean - 3.32).abs() <= 0.20,
        "mean supported links {mean:.3} falls outside 3.32 +/- 0.20"
    );
    let elapsed = t.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "took {elapsed:.1}s, budget 1min");
    println!(
        "[PASS] four-link single-sample benchmark mean {mean:.3} within 3.32 +/- 0.20 ({elapsed:.1}s)"
    );
}

#[test]
fn a09_support_declines_as_channel_spread_grows() {
    let t = Instant::now();
    let config = BenchConfig {
        links: vec![4, 12],
        spreads: vec![0.0, 0.1, 0.2],
        runs: 200,
        algos: vec![Algo::PabbDeflate],
        ..BenchConfig::default()
    };
    let (_, summaries) = run_montecarlo(&config).unwrap();
    for k in [4usize, 12] {
        let mean = |s: f64| {
            summaries
                .iter()
                .find(|cell| cell.links == k && cell.spread == s)
                .expect("summary cell exists")
                .mean_supported
        };
        let (flat, mid, wide) = (mean(0.0), mean(0.1), mean(0.2));
        assert!(
            flat >= mid && mid >= wide,
            "k={k}: means {flat:.3} -> {mid:.3} -> {wide:.3} are not declining"
        );
        println!("[PASS] k={k}: mean served links decline {flat:.3} >= {mid:.3} >= {wide:.3}");
    }
    let elapsed = t.elapsed().as_secs_f64();
    assert!(elapsed < 1200.0, "took {elapsed:.1}s, budget 20min");
}

#[test]
fn a10_feasible_subsets_always_pass_the_necessary_condition() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let mut feasible = 0usize;
    let mut instances = 0u64;
    while feasible < 1000 {
        let k = rng.gen_range(2..=6usize);
        let n = rng.gen_range(1..=10usize);
        let s = [0.0, 0.1, 0.2][rng.gen_range(0..3usize)];
        let problem = random_problem(k, n, s, derive_seed(1001, instances));
        instances += 1;
        for mask in 1u32..(1 << k) {
            let subset: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
            if !check_feasibility(&problem, &subset).unwrap().feasible {
                continue;
            }
            feasible += 1;
            let report = necessary_condition(&problem, &subset).unwrap();
            assert!(
                report.holds,
                "feasible subset {subset:?} fails the certificate with slack {:.3e}",
                report.slack
            );
        }
    }
    let elapsed = t.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "took {elapsed:.1}s, budget 1min");
    println!(
        "[PASS] necessary condition held on {feasible} feasible subsets from {instances} instances ({elapsed:.1}s)"
    );
}

#[test]
fn a11_served_links_keep_outage_within_the_design_target() {
    let t = Instant::now();
    let mut pairs = 0usize;
    let mut within = 0usize;
    let mut worst = 0.0f64;
    for j in 0..50u64 {
        let seed = derive_seed(1100, j);
        let nominal = generate_nominal(&GenConfig::new(4), derive_seed(seed, 0)).unwrap();
        let samples = sample_perturbed(&nominal, 200, 0.1, derive_seed(seed, 1)).unwrap();
        let problem = normalize(&nominal, &samples).unwrap();
        let result = deflate(&problem, &DeflateConfig::default()).unwrap();
        assert_served_links_balanced(&problem, &result.supported, &result.q);
        let outage = estimate_outage(
            &nominal,
            &result.supported,
            &result.q,
            0.1,
            10_000,
            derive_seed(1101, j),
        )
        .unwrap();
        for value in outage {
            pairs += 1;
            if value <= 0.1 {
                within += 1;
            }
            worst = worst.max(value);
        }
    }
    assert!(
        within * 20 >= pairs * 19,
        "outage within target on only {within}/{pairs} served links"
    );
    let elapsed = t.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "took {elapsed:.1}s, budget 5min");
    println!(
        "[PASS] outage within 0.1 on {within}/{pairs} served links, worst {worst:.4} ({elapsed:.1}s)"
    );
}
