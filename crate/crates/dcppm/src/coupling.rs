//! Exact reservoir and neighbour laws during exploration, the certified
//! coupling radius, and the graph-versus-tree coupling experiment.
//!
//! While a BFS explores a graph, the label of a fresh vertex is no longer a
//! uniform draw: each already-explored vertex has failed to connect to it,
//! which tilts the law by a product of non-edge factors. The reservoir law
//! is that tilted distribution; the neighbour law further tilts it by the
//! connection kernel of the vertex being expanded. Both stay within an
//! explicit total-variation distance of their infinite-graph limits, which
//! is what makes radius-bounded neighborhoods and branching trees couple.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::graph::{neighborhood, sample_dcppm};
use crate::model::{ModelParams, SignedType, SignedTypeLaw, WeightLaw};
use crate::stats::{bootstrap_tv_ci95, stable_hash64, tv_distance, KeyedSample, StatKey};
use crate::tree::{sample_branching_tree, LabeledTree, RootLaw};
use crate::{Error, Result};

/// Default number of bootstrap resamples for coupling confidence intervals.
pub const DEFAULT_BOOTSTRAP_RESAMPLES: usize = 1_000;

/// The law of an unexplored vertex's type after `explored` vertices have
/// been revealed, together with the untilted base law it drifts from.
#[derive(Clone, Debug)]
pub struct ReservoirLaw {
    n: usize,
    explored: Vec<SignedType>,
    law: SignedTypeLaw,
    base: SignedTypeLaw,
    params: ModelParams,
}

/// Computes the reservoir law exactly: the base type law reweighted by the
/// probability that none of the explored vertices connects to the fresh one.
pub fn reservoir_law(
    params: &ModelParams,
    n: usize,
    explored: &[SignedType],
) -> Result<ReservoirLaw> {
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if params.kappa_max() >= n as f64 && params.kappa_max() > 0.0 {
        return Err(Error::EdgeProbabilityOverflow {
            kappa_max: params.kappa_max(),
            n,
        });
    }
    let base = params.base_type_law();
    let mut atoms = Vec::with_capacity(base.atoms().len());
    let mut normalizer = 0.0;
    for &(y, prob) in base.atoms() {
        let mut non_edge = 1.0;
        for &x in explored {
            let factor = 1.0 - params.kernel(x, y) / n as f64;
            if factor <= 0.0 {
                // Explored types outside the law's support can push a
                // connection probability to one; that breaks the tilt.
                return Err(Error::EdgeProbabilityOverflow {
                    kappa_max: params.kernel(x, y),
                    n,
                });
            }
            non_edge *= factor;
        }
        let mass = prob * non_edge;
        atoms.push((y, mass));
        normalizer += mass;
    }
    for atom in &mut atoms {
        atom.1 /= normalizer;
    }
    let law = SignedTypeLaw::from_atoms(atoms);
    Ok(ReservoirLaw {
        n,
        explored: explored.to_vec(),
        law,
        base,
        params: params.clone(),
    })
}

impl ReservoirLaw {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn explored(&self) -> &[SignedType] {
        &self.explored
    }

    /// The tilted law itself.
    pub fn law(&self) -> &SignedTypeLaw {
        &self.law
    }

    /// The untilted base law.
    pub fn base(&self) -> &SignedTypeLaw {
        &self.base
    }

    /// Exact total variation distance from the base law. Bounded by
    /// 2 * kappa_max * m / n after m explored vertices.
    pub fn tv_to_base(&self) -> f64 {
        self.law.tv_distance(&self.base)
    }

    /// The law of the type of a fresh neighbour of `x`: the reservoir law
    /// tilted by the connection kernel of `x` and renormalized.
    pub fn neighbour_type_law(&self, x: SignedType) -> Result<SignedTypeLaw> {
        let mut atoms = Vec::with_capacity(self.law.atoms().len());
        let mut normalizer = 0.0;
        for &(y, prob) in self.law.atoms() {
            let mass = self.params.kernel(x, y) * prob;
            atoms.push((y, mass));
            normalizer += mass;
        }
        if normalizer <= 0.0 {
            return Err(Error::DegenerateRates);
        }
        for atom in &mut atoms {
            atom.1 /= normalizer;
        }
        Ok(SignedTypeLaw::from_atoms(atoms))
    }

    /// The neighbour law of the infinite-graph limit, for comparison: the
    /// base law tilted by the kernel of `x`. Bounded total variation
    /// distance 4 * kappa_max^3 / kappa_min^2 * m / n from the finite-n law.
    pub fn limit_neighbour_type_law(&self, x: SignedType) -> Result<SignedTypeLaw> {
        let mut atoms = Vec::with_capacity(self.base.atoms().len());
        let mut normalizer = 0.0;
        for &(y, prob) in self.base.atoms() {
            let mass = self.params.kernel(x, y) * prob;
            atoms.push((y, mass));
            normalizer += mass;
        }
        if normalizer <= 0.0 {
            return Err(Error::DegenerateRates);
        }
        for atom in &mut atoms {
            atom.1 /= normalizer;
        }
        Ok(SignedTypeLaw::from_atoms(atoms))
    }
}

/// Largest BFS depth at which the graph neighborhood and the limiting tree
/// stay coupled with high probability, as a fraction `safety` of the
/// certified budget. Undefined when 2 * kappa_max <= 1; the budget constant
/// keeps ball growth logarithmic, so supercriticality of the doubled kernel
/// is required.
pub fn coupling_radius(n: usize, params: &ModelParams, safety: f64) -> Result<u32> {
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::SafetyFactor(safety));
    }
    let kappa = params.kappa_max();
    if 2.0 * kappa <= 1.0 {
        return Err(Error::RadiusUndefined(kappa));
    }
    let numerator = 1.0 - (4.0 / std::f64::consts::E).ln();
    let budget = numerator / (3.0 * (2.0 * kappa).ln());
    Ok((safety * budget * (n as f64).ln()).floor().max(0.0) as u32)
}

/// Which scalar statistic of a depth-r neighborhood is compared between the
/// graph and the tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborhoodStatistic {
    /// Number of root children.
    RootDegree,
    /// Root children count split by spin agreement with the root.
    RootDegreeSameSpin,
    /// Sizes of generations one and two.
    GenerationSizes,
    /// Histogram of root-child weights over the law's atoms.
    ChildWeightHistogram,
}

impl NeighborhoodStatistic {
    pub const ALL: [NeighborhoodStatistic; 4] = [
        NeighborhoodStatistic::RootDegree,
        NeighborhoodStatistic::RootDegreeSameSpin,
        NeighborhoodStatistic::GenerationSizes,
        NeighborhoodStatistic::ChildWeightHistogram,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            NeighborhoodStatistic::RootDegree => "root_degree",
            NeighborhoodStatistic::RootDegreeSameSpin => "root_degree_same_spin",
            NeighborhoodStatistic::GenerationSizes => "generation_sizes",
            NeighborhoodStatistic::ChildWeightHistogram => "child_weight_histogram",
        }
    }

    /// Discrete key of this statistic on a tree.
    pub fn key(&self, tree: &LabeledTree, law: &WeightLaw) -> StatKey {
        match self {
            NeighborhoodStatistic::RootDegree => {
                vec![tree.generation_range(1).len() as u32]
            }
            NeighborhoodStatistic::RootDegreeSameSpin => {
                let root_spin = tree.root().spin;
                let children = tree.generation(1);
                let same = children.iter().filter(|c| c.spin == root_spin).count();
                vec![children.len() as u32, same as u32]
            }
            NeighborhoodStatistic::GenerationSizes => vec![
                tree.generation_range(1).len() as u32,
                tree.generation_range(2).len() as u32,
            ],
            NeighborhoodStatistic::ChildWeightHistogram => {
                let mut counts = vec![0u32; law.atom_count() + 1];
                for child in tree.generation(1) {
                    match law.atom_index(child.weight) {
                        Some(i) => counts[i] += 1,
                        None => counts[law.atom_count()] += 1,
                    }
                }
                counts
            }
        }
    }
}

/// Configuration of one coupling experiment.
#[derive(Clone, Debug)]
pub struct CouplingConfig {
    pub n: usize,
    pub params: ModelParams,
    pub radius: u32,
    pub trials: usize,
    pub seed: u64,
    pub statistics: Vec<NeighborhoodStatistic>,
    pub bootstrap_resamples: usize,
}

impl CouplingConfig {
    pub fn new(
        n: usize,
        params: ModelParams,
        radius: u32,
        trials: usize,
        seed: u64,
    ) -> CouplingConfig {
        CouplingConfig {
            n,
            params,
            radius,
            trials,
            seed,
            statistics: NeighborhoodStatistic::ALL.to_vec(),
            bootstrap_resamples: DEFAULT_BOOTSTRAP_RESAMPLES,
        }
    }
}

/// Per-statistic comparison between graph neighborhoods and sampled trees.
#[derive(Clone, Debug, Serialize)]
pub struct StatisticSummary {
    pub statistic: NeighborhoodStatistic,
    pub tv: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

/// Outcome of a coupling experiment.
#[derive(Clone, Debug, Serialize)]
pub struct CouplingReport {
    pub n: usize,
    pub radius: u32,
    pub trials: usize,
    pub seed: u64,
    /// Certified radius at this n, when defined.
    pub certified_radius: Option<u32>,
    /// True when the requested radius exceeds the certified one, in which
    /// case the observed distances carry no guarantee.
    pub radius_exceeds_certified: bool,
    pub statistics: Vec<StatisticSummary>,
    /// Fraction of graph neighborhoods that were not trees.
    pub truncation_frequency: f64,
    /// Fraction of graph neighborhoods with a generation larger than the
    /// logarithmic growth bound (2 kappa_max)^depth * ln n.
    pub growth_bound_violation_frequency: f64,
    /// Tree sampling attempts discarded for exceeding the node cap.
    pub tree_discards: u64,
}

struct TrialOutcome {
    graph_keys: Vec<StatKey>,
    tree_keys: Vec<StatKey>,
    truncated: bool,
    growth_violation: bool,
    discarded: u64,
}

/// Samples `trials` independent (graph neighborhood, tree) pairs and
/// compares the per-statistic empirical distributions in total variation,
/// with percentile bootstrap intervals. Graph and tree randomness derive
/// from distinct per-trial seeds, so two runs differing only in `n` share
/// their tree stream.
pub fn coupling_experiment(config: &CouplingConfig) -> Result<CouplingReport> {
    if config.trials == 0 {
        return Err(Error::ZeroTrials);
    }
    if config.n == 0 {
        return Err(Error::EmptyGraph);
    }
    if config.statistics.is_empty() {
        return Err(Error::SweepConfig("no statistics requested".into()));
    }
    let certified = coupling_radius(config.n, &config.params, 1.0).ok();
    let radius_exceeds_certified = certified.is_none_or(|c| config.radius > c);
    let growth_limit: Vec<f64> = (0..=config.radius)
        .map(|s| (2.0 * config.params.kappa_max()).powi(s as i32) * (config.n as f64).ln())
        .collect();
    let outcomes: Vec<Result<TrialOutcome>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut graph_rng =
                ChaCha8Rng::seed_from_u64(stable_hash64(&[config.seed, trial, 0]));
            let mut tree_rng =
                ChaCha8Rng::seed_from_u64(stable_hash64(&[config.seed, trial, 1]));
            let graph = sample_dcppm(config.n, &config.params, &mut graph_rng)?;
            let root = graph_rng.random_range(0..config.n as u32);
            let ball = neighborhood(&graph, root, config.radius)?;
            let tree_sample = sample_branching_tree(
                &config.params,
                config.radius,
                RootLaw::Base,
                &mut tree_rng,
            )?;
            let growth_violation = (0..=config.radius).any(|s| {
                ball.tree.generation_range(s).len() as f64 > growth_limit[s as usize]
            });
            let graph_keys = config
                .statistics
                .iter()
                .map(|stat| stat.key(&ball.tree, config.params.law()))
                .collect();
            let tree_keys = config
                .statistics
                .iter()
                .map(|stat| stat.key(&tree_sample.tree, config.params.law()))
                .collect();
            Ok(TrialOutcome {
                graph_keys,
                tree_keys,
                truncated: ball.truncated,
                growth_violation,
                discarded: tree_sample.discarded as u64,
            })
        })
        .collect();
    let mut graph_samples = vec![KeyedSample::new(); config.statistics.len()];
    let mut tree_samples = vec![KeyedSample::new(); config.statistics.len()];
    let mut truncated = 0u64;
    let mut growth_violations = 0u64;
    let mut discards = 0u64;
    for outcome in outcomes {
        let outcome = outcome?;
        for (i, key) in outcome.graph_keys.into_iter().enumerate() {
            graph_samples[i].push(key);
        }
        for (i, key) in outcome.tree_keys.into_iter().enumerate() {
            tree_samples[i].push(key);
        }
        truncated += u64::from(outcome.truncated);
        growth_violations += u64::from(outcome.growth_violation);
        discards += outcome.discarded;
    }
    let mut bootstrap_rng = ChaCha8Rng::seed_from_u64(stable_hash64(&[config.seed, 2]));
    let statistics = config
        .statistics
        .iter()
        .enumerate()
        .map(|(i, &statistic)| {
            let tv = tv_distance(&graph_samples[i], &tree_samples[i]);
            let (ci_lower, ci_upper) = bootstrap_tv_ci95(
                &graph_samples[i],
                &tree_samples[i],
                config.bootstrap_resamples,
                &mut bootstrap_rng,
            );
            StatisticSummary {
                statistic,
                tv,
                ci_lower,
                ci_upper,
            }
        })
        .collect();
    Ok(CouplingReport {
        n: config.n,
        radius: config.radius,
        trials: config.trials,
        seed: config.seed,
        certified_radius: certified,
        radius_exceeds_certified,
        statistics,
        truncation_frequency: truncated as f64 / config.trials as f64,
        growth_bound_violation_frequency: growth_violations as f64 / config.trials as f64,
        tree_discards: discards,
    })
}
