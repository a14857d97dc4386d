//! On-disk formats: instance JSON, solve reports, results CSV, summary JSON,
//! and plain two-column figure data.
//!
//! Link indices are 0-based everywhere in the API and 1-based in files and
//! printed text. Floats are written in shortest-round-trip form, so reading
//! a file back reproduces every value bit for bit.

use crate::bench::{BenchRecord, BenchSummary};
use crate::channel::{db_to_linear, NominalChannel, SampleSet};
use crate::deflation::{DeflationResult, RemovalKind, RemovalPhase};
use crate::error::{Error, Result};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

/// Serialized channel instance: the nominal system plus every drawn sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub k: usize,
    pub n: usize,
    pub spread: f64,
    pub seed: u64,
    pub gamma_db: f64,
    pub noise_dbm: f64,
    pub gains_hat: Vec<Vec<f64>>,
    pub noise_hat: Vec<f64>,
    pub budget: Vec<f64>,
    pub samples: SampleSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleSection {
    pub gains: Vec<Vec<Vec<f64>>>,
    pub noise: Vec<Vec<f64>>,
}

/// An instance rebuilt from disk.
#[derive(Debug, Clone)]
pub struct LoadedInstance {
    pub meta: InstanceFile,
    pub nominal: NominalChannel,
    pub samples: SampleSet,
}

/// Packs a generated instance for writing.
pub fn instance_file(
    nominal: &NominalChannel,
    samples: &SampleSet,
    seed: u64,
    gamma_db: f64,
    noise_dbm: f64,
) -> InstanceFile {
    let k = nominal.links();
    InstanceFile {
        k,
        n: samples.len(),
        spread: samples.spread,
        seed,
        gamma_db,
        noise_dbm,
        gains_hat: (0..k)
            .map(|r| (0..k).map(|c| nominal.gains[(r, c)]).collect())
            .collect(),
        noise_hat: nominal.noise.to_vec(),
        budget: nominal.budget.to_vec(),
        samples: SampleSection {
            gains: samples
                .gains
                .iter()
                .map(|g| (0..k).map(|r| (0..k).map(|c| g[(r, c)]).collect()).collect())
                .collect(),
            noise: samples.noise.iter().map(|v| v.to_vec()).collect(),
        },
    }
}

pub fn write_instance(path: &Path, file: &InstanceFile) -> Result<()> {
    let text = serde_json::to_string_pretty(file)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn matrix(rows: &[Vec<f64>], k: usize, what: &str) -> Result<Array2<f64>> {
    if rows.len() != k || rows.iter().any(|r| r.len() != k) {
        return Err(Error::Invalid(format!("{what} must be a {k}x{k} matrix")));
    }
    Ok(Array2::from_shape_fn((k, k), |(r, c)| rows[r][c]))
}

/// Reads and validates an instance file, rebuilding the in-memory types.
pub fn read_instance(path: &Path) -> Result<LoadedInstance> {
    let text = fs::read_to_string(path)?;
    let meta: InstanceFile = serde_json::from_str(&text)?;
    let k = meta.k;
    if k == 0 {
        return Err(Error::Invalid("instance must have at least one link".into()));
    }
    let gains = matrix(&meta.gains_hat, k, "gains_hat")?;
    if meta.noise_hat.len() != k || meta.budget.len() != k {
        return Err(Error::Invalid("noise_hat and budget must have one entry per link".into()));
    }
    let target = Array1::from_elem(k, db_to_linear(meta.gamma_db));
    let nominal = NominalChannel::new(
        gains,
        Array1::from_vec(meta.noise_hat.clone()),
        target,
        Array1::from_vec(meta.budget.clone()),
        None,
    )?;
    if meta.samples.gains.len() != meta.n || meta.samples.noise.len() != meta.n || meta.n == 0 {
        return Err(Error::Invalid(format!(
            "instance declares {} samples but carries {} gain and {} noise slices",
            meta.n,
            meta.samples.gains.len(),
            meta.samples.noise.len()
        )));
    }
    let mut gains_slices = Vec::with_capacity(meta.n);
    for slice in &meta.samples.gains {
        gains_slices.push(matrix(slice, k, "sample gains")?);
    }
    let mut noise_slices = Vec::with_capacity(meta.n);
    for slice in &meta.samples.noise {
        if slice.len() != k {
            return Err(Error::Invalid("sample noise slices must have one entry per link".into()));
        }
        noise_slices.push(Array1::from_vec(slice.clone()));
    }
    let samples = SampleSet { gains: gains_slices, noise: noise_slices, spread: meta.spread };
    Ok(LoadedInstance { meta, nominal, samples })
}

/// One removal in a solve report, 1-based link id.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RemovalEntry {
    pub link: usize,
    pub phase: String,
    pub kind: String,
    pub score: f64,
}

/// Oracle comparison appended by `--oracle-check`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleSection {
    pub m_star: usize,
    /// `m_star` minus the number of links the pipeline served.
    pub gap: i64,
    pub min_power_w: f64,
}

/// Serialized outcome of one deflation run, 1-based link ids.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub supported: Vec<usize>,
    pub q: Vec<f64>,
    pub power_w: Vec<f64>,
    pub total_power_w: f64,
    pub removals: Vec<RemovalEntry>,
    pub readmitted: Vec<usize>,
    pub stage_objectives: Vec<f64>,
    pub wall_time_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
}

/// Converts a pipeline result into its file form. `budget` is the full
/// per-link budget vector in watts.
pub fn solve_report(result: &DeflationResult, budget: &Array1<f64>) -> SolveReport {
    SolveReport {
        supported: result.supported.iter().map(|&l| l + 1).collect(),
        q: result.q.to_vec(),
        power_w: result
            .supported
            .iter()
            .zip(result.q.iter())
            .map(|(&l, &q)| q * budget[l])
            .collect(),
        total_power_w: result.total_power,
        removals: result
            .removals
            .iter()
            .map(|r| RemovalEntry {
                link: r.link + 1,
                phase: match r.phase {
                    RemovalPhase::Preprocess => "preprocess".into(),
                    RemovalPhase::Admission => "admission".into(),
                },
                kind: match r.kind {
                    RemovalKind::Ceiling => "ceiling".into(),
                    RemovalKind::Smart => "smart".into(),
                    RemovalKind::Rule(rule) => rule.as_str().into(),
                },
                score: r.score,
            })
            .collect(),
        readmitted: result.readmitted.iter().map(|&l| l + 1).collect(),
        stage_objectives: result.stage_objectives.clone(),
        wall_time_s: result.wall_time,
        oracle: None,
    }
}

pub fn write_report(path: &Path, report: &SolveReport) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Renders records as CSV with a fixed header. Times round to milliseconds;
/// every other number keeps full precision.
pub fn csv_string(records: &[BenchRecord]) -> String {
    let mut out = String::from("k,spread,run,seed,algo,supported,power_w,time_s\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{:.3}\n",
            r.links,
            r.spread,
            r.run,
            r.seed,
            r.algo.as_str(),
            r.supported,
            r.power,
            r.wall_time
        ));
    }
    out
}

pub fn write_csv(path: &Path, records: &[BenchRecord]) -> Result<()> {
    fs::write(path, csv_string(records))?;
    Ok(())
}

/// One summary cell in the summary JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryCell {
    pub k: usize,
    pub spread: f64,
    pub algo: String,
    pub runs: usize,
    pub distribution: String,
    pub mean_supported: f64,
    pub mean_power_w: f64,
    pub mean_time_s: f64,
}

pub fn summary_cells(summaries: &[BenchSummary]) -> Vec<SummaryCell> {
    summaries
        .iter()
        .map(|s| SummaryCell {
            k: s.links,
            spread: s.spread,
            algo: s.algo.as_str().into(),
            runs: s.runs,
            distribution: s.distribution.clone(),
            mean_supported: s.mean_supported,
            mean_power_w: s.mean_power,
            mean_time_s: s.mean_time,
        })
        .collect()
}

pub fn write_summary(path: &Path, summaries: &[BenchSummary]) -> Result<()> {
    let text = serde_json::to_string_pretty(&summary_cells(summaries))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Writes one two-column file per (metric, algorithm, spread) series: link
/// count then the metric mean, one row per link count, ready for any plotting
/// tool. Returns the created paths.
pub fn write_figure_data(dir: &Path, summaries: &[BenchSummary]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut series: Vec<(crate::bench::Algo, f64)> = Vec::new();
    for s in summaries {
        if !series.iter().any(|&(a, sp)| a == s.algo && sp == s.spread) {
            series.push((s.algo, s.spread));
        }
    }
    let metrics: [(&str, fn(&BenchSummary) -> f64); 3] = [
        ("supported", |s| s.mean_supported),
        ("power", |s| s.mean_power),
        ("time", |s| s.mean_time),
    ];
    let mut paths = Vec::new();
    for (name, pick) in metrics {
        for &(algo, spread) in &series {
            let mut body = String::new();
            for s in summaries.iter().filter(|s| s.algo == algo && s.spread == spread) {
                body.push_str(&format!("{} {}\n", s.links, pick(s)));
            }
            let path = dir.join(format!("fig_{name}_{}_S{spread}.dat", algo.as_str()));
            fs::write(&path, body)?;
            paths.push(path);
        }
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::Algo;
    use crate::channel::{generate_nominal, normalize, sample_perturbed, GenConfig};
    use crate::deflation::{deflate, DeflateConfig};
    use crate::fixtures::two_link;

    #[test]
    fn instances_round_trip_bit_for_bit() {
        let nominal = generate_nominal(&GenConfig::new(3), 21).unwrap();
        let samples = sample_perturbed(&nominal, 4, 0.2, 8).unwrap();
        let file = instance_file(&nominal, &samples, 21, 2.0, -90.0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        write_instance(&path, &file).unwrap();
        let loaded = read_instance(&path).unwrap();
        assert_eq!(loaded.meta.k, 3);
        assert_eq!(loaded.meta.n, 4);
        assert_eq!(loaded.nominal.gains, nominal.gains);
        assert_eq!(loaded.nominal.noise, nominal.noise);
        assert_eq!(loaded.nominal.budget, nominal.budget);
        assert_eq!(loaded.samples.gains, samples.gains);
        assert_eq!(loaded.samples.noise, samples.noise);
        assert_eq!(loaded.samples.spread, 0.2);
        let a = normalize(&nominal, &samples).unwrap();
        let b = normalize(&loaded.nominal, &loaded.samples).unwrap();
        for k in 0..3 {
            assert_eq!(a.blocks[k], b.blocks[k]);
            assert_eq!(a.floors[k], b.floors[k]);
        }
    }

    #[test]
    fn malformed_instances_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        fs::write(&path, "{}").unwrap();
        assert!(read_instance(&path).is_err());
        fs::write(
            &path,
            r#"{"k":2,"n":1,"spread":0.0,"seed":0,"gamma_db":0.0,"noise_dbm":0.0,
               "gains_hat":[[1.0]],"noise_hat":[1.0,1.0],"budget":[1.0,1.0],
               "samples":{"gains":[],"noise":[]}}"#,
        )
        .unwrap();
        assert!(read_instance(&path).is_err());
        assert!(read_instance(&dir.path().join("missing.json")).is_err());
    }

    #[test]
    fn reports_use_one_based_links() {
        let prob = two_link(0.8);
        let result = deflate(&prob, &DeflateConfig::default()).unwrap();
        let report = solve_report(&result, &prob.budget);
        assert_eq!(report.supported, vec![2]);
        assert_eq!(report.removals.len(), 1);
        assert_eq!(report.removals[0].link, 1);
        assert_eq!(report.removals[0].phase, "preprocess");
        assert_eq!(report.removals[0].kind, "smart");
        assert_eq!(report.power_w.len(), 1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        write_report(&path, &report).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let parsed: SolveReport = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed.supported, vec![2]);
        assert!(parsed.oracle.is_none());
        assert!(!text.contains("\"oracle\""));
    }

    #[test]
    fn csv_lines_match_the_contract() {
        let records = vec![BenchRecord {
            links: 4,
            spread: 0.1,
            run: 7,
            seed: 99,
            algo: Algo::PabbDeflate,
            supported: 3,
            power: 0.125,
            wall_time: 0.0123456,
        }];
        let text = csv_string(&records);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "k,spread,run,seed,algo,supported,power_w,time_s");
        assert_eq!(lines.next().unwrap(), "4,0.1,7,99,pabb-d,3,0.125,0.012");
        assert!(lines.next().is_none());
    }

    #[test]
    fn figure_files_hold_two_columns() {
        let mk = |links: usize, algo: Algo, mean: f64| BenchSummary {
            links,
            spread: 0.1,
            algo,
            runs: 2,
            distribution: String::new(),
            mean_supported: mean,
            mean_power: 1.5,
            mean_time: 0.25,
        };
        let summaries = vec![
            mk(4, Algo::PabbDeflate, 3.5),
            mk(12, Algo::PabbDeflate, 9.0),
            mk(4, Algo::Benchmark, 4.0),
        ];
        let dir = tempfile::tempdir().unwrap();
        let paths = write_figure_data(dir.path(), &summaries).unwrap();
        assert_eq!(paths.len(), 6);
        let supported = dir.path().join("fig_supported_pabb-d_S0.1.dat");
        assert_eq!(fs::read_to_string(supported).unwrap(), "4 3.5\n12 9\n");
        let bench_power = dir.path().join("fig_power_benchmark-nlpd_S0.1.dat");
        assert_eq!(fs::read_to_string(bench_power).unwrap(), "4 1.5\n");
    }

    #[test]
    fn summary_cells_mirror_the_inputs() {
        let summaries = vec![BenchSummary {
            links: 4,
            spread: 0.0,
            algo: Algo::Benchmark,
            runs: 200,
            distribution: "664=2*20+3*96+4*84".into(),
            mean_supported: 3.32,
            mean_power: 0.5,
            mean_time: 0.001,
        }];
        let cells = summary_cells(&summaries);
        assert_eq!(cells[0].algo, "benchmark-nlpd");
        assert_eq!(cells[0].distribution, "664=2*20+3*96+4*84");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("summary.json");
        write_summary(&path, &summaries).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("664=2*20+3*96+4*84"));
    }
}
