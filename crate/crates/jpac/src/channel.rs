//! Interference-channel instances and their sampled SINR constraint systems.
//!
//! A `K`-link instance is a crosstalk gain matrix, per-link noise floors,
//! SINR targets, and power budgets. Chance constraints on the SINR are
//! approximated by drawing `N` channel realizations; `normalize` rewrites the
//! resulting `N * K` linear constraints in budget-relative power units
//! `q = p / budget`, one `N x K` block per link, so that link `k` is served by
//! a power vector `q` exactly when `A_k q >= c_k` holds row-wise.
//!
//! All internal quantities are linear (watts); dB and dBm appear only at the
//! configuration boundary.

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Converts a dBm level to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Converts a dB ratio to a linear ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Number of channel samples that makes the sampled program a valid
/// approximation of the chance constraints: with probability at least
/// `1 - delta`, any power vector serving all links under every sample
/// violates each true SINR chance constraint with probability at most
/// `epsilon`. `k_supported` is the assumed number of served links (the
/// decision dimension of the certificate).
pub fn required_sample_size(epsilon: f64, delta: f64, k_supported: usize) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    if k_supported == 0 {
        return Err(Error::Domain("k_supported must be at least 1".into()));
    }
    let d = (k_supported - 1) as f64;
    let l = (1.0 / delta).ln();
    let raw = (d + l + (2.0 * d * l + l * l).sqrt()) / epsilon;
    // Guard the ceiling against float noise: a value within 1e-12 relative of
    // an integer is that integer, so exact boundaries are not bumped up.
    Ok((raw - raw * 1e-12).ceil() as usize)
}

/// Geometry and radio parameters for random instance generation.
#[derive(Debug, Clone)]
pub struct GenConfig {
    /// Number of links.
    pub links: usize,
    /// Side length of the square deployment area in meters.
    pub area_side: f64,
    /// Minimum transmitter-receiver separation in meters.
    pub rx_min: f64,
    /// Maximum transmitter-receiver separation in meters.
    pub rx_max: f64,
    /// Common SINR target in dB.
    pub sinr_target_db: f64,
    /// Common noise floor in dBm.
    pub noise_dbm: f64,
}

impl GenConfig {
    pub fn new(links: usize) -> Self {
        GenConfig {
            links,
            area_side: 2000.0,
            rx_min: 10.0,
            rx_max: 400.0,
            sinr_target_db: 2.0,
            noise_dbm: -90.0,
        }
    }
}

/// Transmitter and receiver coordinates of one link, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub tx: (f64, f64),
    pub rx: (f64, f64),
}

/// A nominal (unperturbed) channel instance.
#[derive(Debug, Clone)]
pub struct NominalChannel {
    /// Crosstalk gains; entry `(k, j)` is the gain from transmitter `j` to
    /// receiver `k`.
    pub gains: Array2<f64>,
    /// Noise power at each receiver, watts.
    pub noise: Array1<f64>,
    /// Linear SINR target of each link.
    pub sinr_target: Array1<f64>,
    /// Power budget of each transmitter, watts.
    pub budget: Array1<f64>,
    /// Deployment geometry when the instance was generated rather than loaded.
    pub positions: Option<Vec<LinkGeometry>>,
}

impl NominalChannel {
    pub fn new(
        gains: Array2<f64>,
        noise: Array1<f64>,
        sinr_target: Array1<f64>,
        budget: Array1<f64>,
        positions: Option<Vec<LinkGeometry>>,
    ) -> Result<Self> {
        let k = gains.nrows();
        if gains.ncols() != k {
            return Err(Error::Invalid(format!(
                "gain matrix must be square, got {}x{}",
                gains.nrows(),
                gains.ncols()
            )));
        }
        if noise.len() != k || sinr_target.len() != k || budget.len() != k {
            return Err(Error::Invalid("per-link vectors must match the gain matrix size".into()));
        }
        if let Some(p) = &positions {
            if p.len() != k {
                return Err(Error::Invalid("positions must list every link".into()));
            }
        }
        let all_pos = gains.iter().all(|g| g.is_finite() && *g > 0.0)
            && noise.iter().all(|v| v.is_finite() && *v > 0.0)
            && sinr_target.iter().all(|v| v.is_finite() && *v > 0.0)
            && budget.iter().all(|v| v.is_finite() && *v > 0.0);
        if !all_pos {
            return Err(Error::Invalid("gains, noise, targets and budgets must be positive and finite".into()));
        }
        Ok(NominalChannel { gains, noise, sinr_target, budget, positions })
    }

    pub fn links(&self) -> usize {
        self.budget.len()
    }
}

/// Draws a random instance: transmitters uniform over the square, each
/// receiver uniform over the annulus `[rx_min, rx_max]` around its
/// transmitter, path gain `1 / d^4`, and budget set to twice the power a link
/// needs to meet its target in the absence of interference.
pub fn generate_nominal(cfg: &GenConfig, seed: u64) -> Result<NominalChannel> {
    if cfg.links == 0 {
        return Err(Error::Domain("need at least one link".into()));
    }
    if !(cfg.rx_min > 0.0 && cfg.rx_min < cfg.rx_max && cfg.area_side > 0.0) {
        return Err(Error::Domain("geometry bounds must satisfy 0 < rx_min < rx_max and area_side > 0".into()));
    }
    let k = cfg.links;
    let mut rng = rng_from_seed(seed);
    let mut positions = Vec::with_capacity(k);
    for _ in 0..k {
        let tx = (cfg.area_side * rng.gen::<f64>(), cfg.area_side * rng.gen::<f64>());
        let r = (cfg.rx_min * cfg.rx_min
            + rng.gen::<f64>() * (cfg.rx_max * cfg.rx_max - cfg.rx_min * cfg.rx_min))
            .sqrt();
        let theta = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
        let rx = (tx.0 + r * theta.cos(), tx.1 + r * theta.sin());
        positions.push(LinkGeometry { tx, rx });
    }
    let mut gains = Array2::zeros((k, k));
    for rx_link in 0..k {
        for tx_link in 0..k {
            let dx = positions[rx_link].rx.0 - positions[tx_link].tx.0;
            let dy = positions[rx_link].rx.1 - positions[tx_link].tx.1;
            let d2 = dx * dx + dy * dy;
            gains[(rx_link, tx_link)] = 1.0 / (d2 * d2);
        }
    }
    let noise = Array1::from_elem(k, dbm_to_watts(cfg.noise_dbm));
    let target = Array1::from_elem(k, db_to_linear(cfg.sinr_target_db));
    let budget = Array1::from_shape_fn(k, |i| 2.0 * target[i] * noise[i] / gains[(i, i)]);
    NominalChannel::new(gains, noise, target, budget, Some(positions))
}

/// A batch of channel realizations. Slice `0` is always the nominal channel;
/// slices `1..` carry the perturbed draws.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub gains: Vec<Array2<f64>>,
    pub noise: Vec<Array1<f64>>,
    /// Relative perturbation magnitude the set was drawn with.
    pub spread: f64,
}

impl SampleSet {
    /// Number of realizations, the nominal slice included.
    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    pub fn links(&self) -> usize {
        self.noise.first().map_or(0, |v| v.len())
    }

    /// SINR of `link` in realization `slice` under transmit powers `p` (watts).
    pub fn sinr(&self, slice: usize, link: usize, p: &Array1<f64>) -> f64 {
        let g = &self.gains[slice];
        let mut interference = self.noise[slice][link];
        for j in 0..p.len() {
            if j != link {
                interference += g[(link, j)] * p[j];
            }
        }
        g[(link, link)] * p[link] / interference
    }
}

/// Draws `n` channel realizations around `nominal` with relative spread
/// `spread` in `[0, 1)`.
///
/// Each crosstalk entry and each noise entry gets its own standard-normal
/// sequence `xi_2, ..., xi_n`; realization `i >= 2` scales the nominal value
/// by `1 + spread * xi_i / max_i |xi_i|`, so deviations stay inside
/// `[-spread, +spread]` and every realization remains positive. Draw order is
/// fixed (gain entries row-major, then noise entries), which makes sets drawn
/// with the same seed but different spreads share their underlying sequences.
pub fn sample_perturbed(
    nominal: &NominalChannel,
    n: usize,
    spread: f64,
    seed: u64,
) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::Domain("need at least one realization".into()));
    }
    if !(0.0..1.0).contains(&spread) || !spread.is_finite() {
        return Err(Error::Domain(format!("spread must lie in [0, 1), got {spread}")));
    }
    let k = nominal.links();
    let mut gains = vec![nominal.gains.clone()];
    let mut noise = vec![nominal.noise.clone()];
    for _ in 1..n {
        gains.push(nominal.gains.clone());
        noise.push(nominal.noise.clone());
    }
    if n > 1 {
        let mut rng = rng_from_seed(seed);
        let mut draws = vec![0.0; n - 1];
        let fill = |rng: &mut rand_chacha::ChaCha8Rng, draws: &mut Vec<f64>| {
            let mut peak = 0.0f64;
            for d in draws.iter_mut() {
                *d = StandardNormal.sample(rng);
                peak = peak.max(d.abs());
            }
            peak
        };
        for row in 0..k {
            for col in 0..k {
                let peak = fill(&mut rng, &mut draws);
                if peak > 0.0 {
                    for (i, d) in draws.iter().enumerate() {
                        gains[i + 1][(row, col)] *= 1.0 + spread * d / peak;
                    }
                }
            }
        }
        for link in 0..k {
            let peak = fill(&mut rng, &mut draws);
            if peak > 0.0 {
                for (i, d) in draws.iter().enumerate() {
                    noise[i + 1][link] *= 1.0 + spread * d / peak;
                }
            }
        }
    }
    Ok(SampleSet { gains, noise, spread })
}

/// The sampled SINR constraints in budget-relative units.
///
/// Link `k` is served by `q` in `[0, 1]^K` exactly when `A_k q >= c_k`
/// row-wise, where row `n` of `A_k` has `1` in column `k` and
/// `-target_k * g^n_{k,j} * budget_j / (g^n_{k,k} * budget_k)` in column
/// `j != k`, and `c_k[n] = target_k * noise^n_k / (g^n_{k,k} * budget_k)`.
#[derive(Debug, Clone)]
pub struct NormalizedProblem {
    /// One `N x K` constraint block per link.
    pub blocks: Vec<Array2<f64>>,
    /// Per link, the `N` normalized noise floors.
    pub floors: Vec<Array1<f64>>,
    /// Power budgets in watts, kept for de-normalization and power weighting.
    pub budget: Array1<f64>,
}

impl NormalizedProblem {
    pub fn links(&self) -> usize {
        self.budget.len()
    }

    pub fn samples(&self) -> usize {
        self.blocks.first().map_or(0, |b| b.nrows())
    }

    /// Restriction to `links` (strictly increasing original indices): rows of
    /// excluded links are dropped and their columns removed, which is the
    /// subproblem in which excluded transmitters are silent.
    pub fn restrict(&self, links: &[usize]) -> Result<NormalizedProblem> {
        let k = self.links();
        if links.windows(2).any(|w| w[0] >= w[1]) || links.iter().any(|&l| l >= k) {
            return Err(Error::Shape(format!("subset {links:?} is not a strictly increasing set of links below {k}")));
        }
        let blocks = links
            .iter()
            .map(|&kk| {
                let src = &self.blocks[kk];
                Array2::from_shape_fn((src.nrows(), links.len()), |(n, j)| src[(n, links[j])])
            })
            .collect();
        let floors = links.iter().map(|&kk| self.floors[kk].clone()).collect();
        let budget = Array1::from_iter(links.iter().map(|&kk| self.budget[kk]));
        Ok(NormalizedProblem { blocks, floors, budget })
    }
}

/// Builds the normalized constraint system for `samples` drawn around
/// `nominal`. Diagonal entries are exactly `1`.
pub fn normalize(nominal: &NominalChannel, samples: &SampleSet) -> Result<NormalizedProblem> {
    let k = nominal.links();
    if samples.links() != k {
        return Err(Error::Shape("sample set and nominal channel disagree on link count".into()));
    }
    let n = samples.len();
    let mut blocks = Vec::with_capacity(k);
    let mut floors = Vec::with_capacity(k);
    for link in 0..k {
        let target = nominal.sinr_target[link];
        let own_budget = nominal.budget[link];
        let mut block = Array2::zeros((n, k));
        let mut floor = Array1::zeros(n);
        for slice in 0..n {
            let g = &samples.gains[slice];
            let own = g[(link, link)] * own_budget;
            for j in 0..k {
                block[(slice, j)] = if j == link {
                    1.0
                } else {
                    -target * g[(link, j)] * nominal.budget[j] / own
                };
            }
            floor[slice] = target * samples.noise[slice][link] / own;
        }
        blocks.push(block);
        floors.push(floor);
    }
    Ok(NormalizedProblem { blocks, floors, budget: nominal.budget.clone() })
}
