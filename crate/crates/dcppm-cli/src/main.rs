//! Command-line front end for the dcppm library. Every subcommand prints a
//! single JSON document to stdout so runs compose with analysis scripts.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use dcppm::coupling::{coupling_experiment, CouplingConfig};
use dcppm::experiments::{expected_matrix_eigencheck, run_sweep_to_files, SweepConfig};
use dcppm::graph::{largest_component_fraction, sample_dcppm_with, EdgeSampling, LabeledGraph};
use dcppm::inference::{estimate_expected_delta, graph_posterior_bruteforce, overlap};
use dcppm::model::{ModelParams, Spin, WeightLaw};
use dcppm::spectral::{spectral_bisection, SpectralMethod};

#[derive(Parser)]
#[command(
    name = "dcppm",
    version,
    about = "Simulation and inference for the degree-corrected planted-partition model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Rates and weight law shared by the sampling subcommands.
#[derive(Args)]
struct ModelArgs {
    /// Same-spin rate.
    #[arg(long)]
    a: f64,
    /// Cross-spin rate.
    #[arg(long)]
    b: f64,
    /// Weight law: a bare number for a point mass, inline JSON of the form
    /// {"atoms": [[weight, probability], ...]}, or a path to a JSON file.
    #[arg(long, default_value = "1")]
    law: String,
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams> {
        Ok(ModelParams::new(self.a, self.b, parse_law(&self.law)?)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Adjacency,
    #[value(name = "nonbacktracking")]
    NonBacktracking,
}

impl From<MethodArg> for SpectralMethod {
    fn from(value: MethodArg) -> SpectralMethod {
        match value {
            MethodArg::Adjacency => SpectralMethod::Adjacency,
            MethodArg::NonBacktracking => SpectralMethod::NonBacktracking,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplingArg {
    Auto,
    Pairwise,
    ClassBinomial,
}

impl From<SamplingArg> for EdgeSampling {
    fn from(value: SamplingArg) -> EdgeSampling {
        match value {
            SamplingArg::Auto => EdgeSampling::Auto,
            SamplingArg::Pairwise => EdgeSampling::PairwiseBernoulli,
            SamplingArg::ClassBinomial => EdgeSampling::ClassBinomial,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample a graph and write it to the text format.
    Gen {
        /// Number of vertices.
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Destination path for the graph file.
        #[arg(long, value_name = "PATH")]
        graph_out: PathBuf,
        /// Edge sampling method.
        #[arg(long, value_enum, default_value_t = SamplingArg::Auto)]
        method: SamplingArg,
    },
    /// Compare graph neighborhoods against the limiting branching process.
    Couple {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        model: ModelArgs,
        /// Neighborhood radius to explore.
        #[arg(long)]
        radius: u32,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Bootstrap resamples for the TV confidence intervals.
        #[arg(long, default_value_t = 1000)]
        resamples: usize,
    },
    /// Estimate the expected root-reconstruction gap at a boundary depth.
    DeltaM {
        #[command(flatten)]
        model: ModelArgs,
        /// Boundary depth.
        #[arg(long)]
        m: u32,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exact label posterior of one vertex given a stored graph.
    Posterior {
        /// Graph file to read; its header carries the rates.
        #[arg(long, value_name = "PATH")]
        graph_in: PathBuf,
        /// Target vertex.
        #[arg(long)]
        u: u32,
        /// Condition on a vertex label; repeatable. Example: --anchor 3 +
        #[arg(long, num_args = 2, value_names = ["VERTEX", "SPIN"], action = clap::ArgAction::Append)]
        anchor: Vec<String>,
    },
    /// Spectral bisection of a stored graph, scored against its labels.
    Estimate {
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long, value_name = "PATH")]
        graph_in: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Eigenvalues of the conditional-expectation matrix against theory.
    Eigencheck {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a threshold sweep described by a JSON config file.
    Sweep {
        /// Path to a JSON document mirroring the sweep configuration.
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
    },
}

/// Accepts a bare number (point mass), inline JSON, or a path to JSON.
fn parse_law(text: &str) -> Result<WeightLaw> {
    let trimmed = text.trim();
    if let Ok(value) = trimmed.parse::<f64>() {
        return Ok(WeightLaw::point_mass(value)?);
    }
    if trimmed.starts_with('{') {
        return serde_json::from_str(trimmed).context("parsing inline weight law");
    }
    let body = std::fs::read_to_string(trimmed)
        .with_context(|| format!("reading weight law file {trimmed}"))?;
    serde_json::from_str(&body).with_context(|| format!("parsing weight law file {trimmed}"))
}

fn parse_anchors(raw: &[String]) -> Result<Vec<(u32, Spin)>> {
    let mut anchors = Vec::with_capacity(raw.len() / 2);
    for pair in raw.chunks(2) {
        let [vertex, spin] = pair else {
            bail!("--anchor needs a vertex and a spin");
        };
        let vertex: u32 = vertex
            .parse()
            .with_context(|| format!("anchor vertex {vertex}"))?;
        let spin: Spin = spin
            .parse()
            .with_context(|| format!("anchor spin {spin}"))?;
        anchors.push((vertex, spin));
    }
    Ok(anchors)
}

fn emit<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

#[derive(Serialize)]
struct GenSummary {
    n: usize,
    edge_count: usize,
    giant_component_fraction: f64,
    path: PathBuf,
}

#[derive(Serialize)]
struct PosteriorSummary {
    target: u32,
    a: f64,
    b: f64,
    anchors: Vec<(u32, Spin)>,
    prob_plus: f64,
    delta: f64,
}

#[derive(Serialize)]
struct EstimateSummary {
    overlap_with_stored_labels: f64,
    report: dcppm::spectral::SpectralReport,
}

#[derive(Serialize)]
struct SweepSummary {
    csv: PathBuf,
    metadata: PathBuf,
    rows: usize,
    failed_cells: usize,
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Gen {
            n,
            model,
            seed,
            graph_out,
            method,
        } => {
            let params = model.params()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let graph = sample_dcppm_with(n, &params, method.into(), &mut rng)?;
            graph.save(&graph_out, params.a(), params.b())?;
            emit(&GenSummary {
                n: graph.n(),
                edge_count: graph.edge_count(),
                giant_component_fraction: largest_component_fraction(&graph),
                path: graph_out,
            })
        }
        Command::Couple {
            n,
            model,
            radius,
            trials,
            seed,
            resamples,
        } => {
            let mut config = CouplingConfig::new(n, model.params()?, radius, trials, seed);
            config.bootstrap_resamples = resamples;
            emit(&coupling_experiment(&config)?)
        }
        Command::DeltaM {
            model,
            m,
            trials,
            seed,
        } => emit(&estimate_expected_delta(&model.params()?, m, trials, seed)?),
        Command::Posterior { graph_in, u, anchor } => {
            let (graph, a, b) = LabeledGraph::load(&graph_in)?;
            let anchors = parse_anchors(&anchor)?;
            // The posterior depends only on the rates and the stored
            // weights; the law is rebuilt from the file for validation.
            let law = WeightLaw::uniform_over(graph.weights())?;
            let params = ModelParams::new(a, b, law)?;
            let posterior = graph_posterior_bruteforce(&graph, &params, u, &anchors)?;
            emit(&PosteriorSummary {
                target: u,
                a,
                b,
                anchors,
                prob_plus: posterior.prob_plus,
                delta: posterior.delta,
            })
        }
        Command::Estimate {
            method,
            graph_in,
            seed,
        } => {
            let (graph, _, _) = LabeledGraph::load(&graph_in)?;
            let report = spectral_bisection(&graph, method.into(), seed)?;
            emit(&EstimateSummary {
                overlap_with_stored_labels: overlap(graph.spins(), &report.estimate.assignment)?,
                report,
            })
        }
        Command::Eigencheck { n, model, seed } => {
            emit(&expected_matrix_eigencheck(n, &model.params()?, seed)?)
        }
        Command::Sweep { config } => {
            let body = std::fs::read_to_string(&config)
                .with_context(|| format!("reading sweep config {}", config.display()))?;
            let config: SweepConfig = serde_json::from_str(&body).context("parsing sweep config")?;
            let outcome = run_sweep_to_files(&config)?;
            emit(&SweepSummary {
                csv: outcome.csv_path,
                metadata: outcome.metadata_path,
                rows: outcome.rows.len(),
                failed_cells: outcome
                    .rows
                    .iter()
                    .filter(|row| row.failure.is_some())
                    .count(),
            })
        }
    }
}

fn main() {
    if let Err(error) = run() {
        eprintln!("error: {error:#}");
        std::process::exit(1);
    }
}
