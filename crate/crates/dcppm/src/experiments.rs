//! Experiment drivers: the expected-adjacency eigenvalue check and the
//! threshold sweep with deterministic CSV output.
//!
//! The sweep walks a grid of rate pairs (given directly, or derived from
//! requested threshold-statistic values at a fixed rate sum), samples
//! graphs at each size, scores the selected spectral estimators against
//! the planted labels, and writes one CSV row per cell. Every cell seeds
//! its own generator from a stable hash of the cell coordinates, so rows
//! are reproducible independently and the whole CSV is byte-identical
//! across reruns. Timestamps live in a JSON sidecar, never in the CSV.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{largest_component_fraction, sample_dcppm};
use crate::inference::overlap;
use crate::model::{ModelParams, Spin, WeightLaw};
use crate::spectral::{power_iteration, spectral_bisection, SpectralMethod};
use crate::stats::{dispersion_band95, mean, stable_hash64};
use crate::{Error, Result};

/// Largest n for which the expected-adjacency matrix is built densely.
pub const DENSE_EIGENCHECK_MAX_N: usize = 4000;

/// Iteration budget for the dense eigencheck; its spectral gaps are wide,
/// so this converges far past the reported precision.
const EIGENCHECK_ITERATIONS: u32 = 200;

/// The fixed CSV header every sweep writes.
pub const SWEEP_CSV_HEADER: &str =
    "a,b,phi2,stat,n,estimator,overlap_mean,overlap_lo,overlap_hi,giant_frac,seed";

/// Comparison of the conditional-expectation adjacency spectrum against its
/// large-n limit.
#[derive(Clone, Debug, Serialize)]
pub struct EigencheckReport {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub phi2: f64,
    /// Largest-magnitude eigenvalue of the sampled expectation matrix.
    pub lambda1: f64,
    /// Second largest-magnitude eigenvalue.
    pub lambda2: f64,
    /// Limit of lambda1: (a + b) / 2 times the second weight moment.
    pub theory1: f64,
    /// Limit of lambda2: (a - b) / 2 times the second weight moment.
    pub theory2: f64,
    /// Cosine between the leading eigenvector and the weight vector, whose
    /// direction the limit predicts.
    pub cosine_with_weights: f64,
    pub seed: u64,
}

/// Samples spins and weights, assembles the n-by-n matrix of conditional
/// edge probabilities entry by entry (zero diagonal), and extracts its two
/// leading eigenvalues by shifted power iteration with deflation.
pub fn expected_matrix_eigencheck(
    n: usize,
    params: &ModelParams,
    seed: u64,
) -> Result<EigencheckReport> {
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if n > DENSE_EIGENCHECK_MAX_N {
        return Err(Error::TooManyVertices {
            n,
            cap: DENSE_EIGENCHECK_MAX_N,
        });
    }
    if params.kappa_max() >= n as f64 {
        return Err(Error::EdgeProbabilityOverflow {
            kappa_max: params.kappa_max(),
            n,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spins: Vec<Spin> = (0..n).map(|_| Spin::sample(&mut rng)).collect();
    let weights: Vec<f64> = (0..n).map(|_| params.law().sample(&mut rng)).collect();
    let mut matrix = vec![0.0f64; n * n];
    for u in 0..n {
        for v in (u + 1)..n {
            let entry = params.edge_rate(spins[u], spins[v]) * weights[u] * weights[v] / n as f64;
            matrix[u * n + v] = entry;
            matrix[v * n + u] = entry;
        }
    }
    // Shift by the identity so the dominant eigenvalue is strictly largest
    // in magnitude; the shift cancels out of the reported values.
    let op = |x: &[f64], y: &mut [f64]| {
        for u in 0..n {
            let row = &matrix[u * n..(u + 1) * n];
            y[u] = x[u] + crate::spectral::dot(row, x);
        }
    };
    let (first, leading) = power_iteration(op, n, None, EIGENCHECK_ITERATIONS, &mut rng);
    let (second, _) = power_iteration(op, n, Some(&leading), EIGENCHECK_ITERATIONS, &mut rng);
    let cosine = crate::spectral::dot(&leading, &weights).abs()
        / (crate::spectral::norm(&leading) * crate::spectral::norm(&weights));
    let second_moment = params.law().second_moment();
    Ok(EigencheckReport {
        n,
        a: params.a(),
        b: params.b(),
        phi2: second_moment,
        lambda1: first - 1.0,
        lambda2: second - 1.0,
        theory1: 0.5 * (params.a() + params.b()) * second_moment,
        theory2: 0.5 * (params.a() - params.b()) * second_moment,
        cosine_with_weights: cosine,
        seed,
    })
}

/// The rate grid a sweep walks: explicit rate pairs, or threshold-statistic
/// values realized at a fixed rate sum.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepGrid {
    AbPairs { pairs: Vec<(f64, f64)> },
    ThresholdStats { values: Vec<f64>, rate_sum: f64 },
}

impl SweepGrid {
    fn len(&self) -> usize {
        match self {
            SweepGrid::AbPairs { pairs } => pairs.len(),
            SweepGrid::ThresholdStats { values, .. } => values.len(),
        }
    }
}

/// Solves for the rate pair with the given rate sum whose threshold
/// statistic equals `stat`: the rate gap is sqrt(2 * stat * rate_sum / m2)
/// where m2 is the law's second moment. Fails when the gap exceeds the sum,
/// which would need a negative cross-class rate.
pub fn rates_for_stat(stat: f64, rate_sum: f64, law: &WeightLaw) -> Result<(f64, f64)> {
    if !(stat >= 0.0 && stat.is_finite()) {
        return Err(Error::SweepConfig(format!(
            "threshold statistic must be finite and nonnegative, got {stat}"
        )));
    }
    if !(rate_sum > 0.0 && rate_sum.is_finite()) {
        return Err(Error::SweepConfig(format!(
            "rate sum must be positive and finite, got {rate_sum}"
        )));
    }
    let gap = (2.0 * stat * rate_sum / law.second_moment()).sqrt();
    if gap > rate_sum {
        return Err(Error::SweepConfig(format!(
            "statistic {stat} is infeasible at rate sum {rate_sum}: the required \
             rate gap {gap} exceeds the sum"
        )));
    }
    Ok((0.5 * (rate_sum + gap), 0.5 * (rate_sum - gap)))
}

/// Full description of a threshold sweep. Mirrored one-to-one by the JSON
/// config the CLI consumes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepConfig {
    pub law: WeightLaw,
    pub grid: SweepGrid,
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub estimators: Vec<SpectralMethod>,
    pub master_seed: u64,
    /// CSV destination; the metadata sidecar appends ".meta.json" to it.
    pub output: String,
}

/// One sweep cell. The overlap interval is a dispersion band over single
/// trials (mean plus or minus 1.96 standard deviations), not a standard
/// error interval: it describes where individual runs land and does not
/// narrow as trials grow, which keeps "does the interval contain one half"
/// a statement about the estimator rather than about the trial count.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub a: f64,
    pub b: f64,
    pub phi2: f64,
    pub stat: f64,
    pub n: usize,
    pub estimator: String,
    pub overlap_mean: f64,
    pub overlap_lo: f64,
    pub overlap_hi: f64,
    pub giant_frac: f64,
    pub seed: u64,
    /// Set when the cell could not run; numeric fields are NaN then.
    pub failure: Option<String>,
}

/// Sidecar metadata for one sweep run. Everything time-dependent lives
/// here so the CSV stays byte-stable across reruns.
#[derive(Clone, Debug, Serialize)]
pub struct SweepMetadata {
    pub created_unix_seconds: u64,
    pub master_seed: u64,
    pub law: WeightLaw,
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub estimators: Vec<SpectralMethod>,
    pub row_count: usize,
    pub failures: Vec<String>,
}

/// Paths and rows produced by [`run_sweep_to_files`].
#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub csv_path: PathBuf,
    pub metadata_path: PathBuf,
}

fn estimator_id(method: SpectralMethod) -> u64 {
    match method {
        SpectralMethod::Adjacency => 0,
        SpectralMethod::NonBacktracking => 1,
    }
}

/// Deterministic per-cell seed from the sweep coordinates. Grids over rate
/// pairs use the pair index for both rate coordinates; statistic grids use
/// the value index and zero.
pub fn cell_seed(
    master_seed: u64,
    a_index: u64,
    b_index: u64,
    n: usize,
    estimator: SpectralMethod,
) -> u64 {
    stable_hash64(&[master_seed, a_index, b_index, n as u64, estimator_id(estimator)])
}

struct CellPlan {
    a_index: u64,
    b_index: u64,
    rates: std::result::Result<(f64, f64), String>,
    requested_stat: Option<f64>,
    n: usize,
    estimator: SpectralMethod,
}

fn failure_row(plan: &CellPlan, seed: u64, message: String) -> SweepRow {
    let (a, b) = plan.rates.clone().unwrap_or((f64::NAN, f64::NAN));
    SweepRow {
        a,
        b,
        phi2: f64::NAN,
        stat: plan.requested_stat.unwrap_or(f64::NAN),
        n: plan.n,
        estimator: plan.estimator.label().to_string(),
        overlap_mean: f64::NAN,
        overlap_lo: f64::NAN,
        overlap_hi: f64::NAN,
        giant_frac: f64::NAN,
        seed,
        failure: Some(message),
    }
}

fn run_cell(plan: &CellPlan, law: &WeightLaw, trials: usize, master_seed: u64) -> SweepRow {
    let seed = cell_seed(master_seed, plan.a_index, plan.b_index, plan.n, plan.estimator);
    let (a, b) = match &plan.rates {
        Ok(pair) => *pair,
        Err(message) => return failure_row(plan, seed, message.clone()),
    };
    match cell_measurement(a, b, plan, law, trials, seed) {
        Ok(row) => row,
        Err(error) => failure_row(plan, seed, error.to_string()),
    }
}

fn cell_measurement(
    a: f64,
    b: f64,
    plan: &CellPlan,
    law: &WeightLaw,
    trials: usize,
    seed: u64,
) -> Result<SweepRow> {
    let params = ModelParams::new(a, b, law.clone())?;
    let stat = params.kesten_stigum_stat()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut overlaps = Vec::with_capacity(trials);
    let mut giants = Vec::with_capacity(trials);
    for _ in 0..trials {
        let graph = sample_dcppm(plan.n, &params, &mut rng)?;
        let estimator_seed = rng.random::<u64>();
        let report = spectral_bisection(&graph, plan.estimator, estimator_seed)?;
        overlaps.push(overlap(graph.spins(), &report.estimate.assignment)?);
        giants.push(largest_component_fraction(&graph));
    }
    let band = dispersion_band95(&overlaps);
    Ok(SweepRow {
        a,
        b,
        phi2: law.second_moment(),
        stat,
        n: plan.n,
        estimator: plan.estimator.label().to_string(),
        overlap_mean: band.mean,
        overlap_lo: band.lower,
        overlap_hi: band.upper,
        giant_frac: mean(&giants),
        seed,
        failure: None,
    })
}

fn validate_config(config: &SweepConfig) -> Result<()> {
    if config.trials == 0 {
        return Err(Error::ZeroTrials);
    }
    if config.n_values.is_empty() {
        return Err(Error::SweepConfig("no graph sizes requested".into()));
    }
    if config.n_values.contains(&0) {
        return Err(Error::SweepConfig("graph sizes must be positive".into()));
    }
    if config.estimators.is_empty() {
        return Err(Error::SweepConfig("no estimators requested".into()));
    }
    if config.grid.len() == 0 {
        return Err(Error::SweepConfig("empty grid".into()));
    }
    Ok(())
}

/// Runs every cell of the sweep and returns the rows in grid order (grid
/// point, then size, then estimator). Cells run in parallel; a failing
/// cell produces a row with its message and the run continues.
pub fn threshold_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    validate_config(config)?;
    struct GridPoint {
        a_index: u64,
        b_index: u64,
        rates: std::result::Result<(f64, f64), String>,
        requested_stat: Option<f64>,
    }
    let points: Vec<GridPoint> = match &config.grid {
        SweepGrid::AbPairs { pairs } => pairs
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| GridPoint {
                a_index: i as u64,
                b_index: i as u64,
                rates: Ok((a, b)),
                requested_stat: None,
            })
            .collect(),
        SweepGrid::ThresholdStats { values, rate_sum } => values
            .iter()
            .enumerate()
            .map(|(i, &stat)| GridPoint {
                a_index: i as u64,
                b_index: 0,
                rates: rates_for_stat(stat, *rate_sum, &config.law).map_err(|e| e.to_string()),
                requested_stat: Some(stat),
            })
            .collect(),
    };
    let mut plans = Vec::new();
    for point in &points {
        for &n in &config.n_values {
            for &estimator in &config.estimators {
                plans.push(CellPlan {
                    a_index: point.a_index,
                    b_index: point.b_index,
                    rates: point.rates.clone(),
                    requested_stat: point.requested_stat,
                    n,
                    estimator,
                });
            }
        }
    }
    Ok(plans
        .par_iter()
        .map(|plan| run_cell(plan, &config.law, config.trials, config.master_seed))
        .collect())
}

fn csv_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        "nan".to_string()
    }
}

/// Writes the fixed-schema CSV. Field order matches [`SWEEP_CSV_HEADER`];
/// non-finite values print as `nan`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            csv_float(row.a),
            csv_float(row.b),
            csv_float(row.phi2),
            csv_float(row.stat),
            row.n,
            row.estimator,
            csv_float(row.overlap_mean),
            csv_float(row.overlap_lo),
            csv_float(row.overlap_hi),
            csv_float(row.giant_frac),
            row.seed,
        )?;
    }
    Ok(())
}

/// Runs the sweep and writes the CSV plus a JSON metadata sidecar next to
/// it. Only the sidecar carries the timestamp.
pub fn run_sweep_to_files(config: &SweepConfig) -> Result<SweepOutcome> {
    let rows = threshold_sweep(config)?;
    let csv_path = PathBuf::from(&config.output);
    let mut csv = Vec::new();
    write_sweep_csv(&rows, &mut csv)?;
    std::fs::write(&csv_path, csv)?;
    let metadata = SweepMetadata {
        created_unix_seconds: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        master_seed: config.master_seed,
        law: config.law.clone(),
        n_values: config.n_values.clone(),
        trials: config.trials,
        estimators: config.estimators.clone(),
        row_count: rows.len(),
        failures: rows
            .iter()
            .filter_map(|row| {
                row.failure.as_ref().map(|message| {
                    format!(
                        "a={}, b={}, n={}, estimator={}: {message}",
                        csv_float(row.a),
                        csv_float(row.b),
                        row.n,
                        row.estimator
                    )
                })
            })
            .collect(),
    };
    let metadata_path = sidecar_path(&csv_path);
    let encoded =
        serde_json::to_vec_pretty(&metadata).expect("sweep metadata serializes");
    std::fs::write(&metadata_path, encoded)?;
    Ok(SweepOutcome {
        rows,
        csv_path,
        metadata_path,
    })
}

/// The metadata path for a CSV path: the same name with ".meta.json"
/// appended.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut name = csv_path.as_os_str().to_os_string();
    name.push(".meta.json");
    PathBuf::from(name)
}
