//! Exact root reconstruction on trees, exact brute-force posteriors on
//! small graphs, and agreement metrics for label estimates.
//!
//! The tree posterior follows the broadcast channel: conditioned on a
//! parent's label, a child keeps it with probability 1 - epsilon and flips
//! otherwise. Messages travel leaf-to-root in log domain with per-node
//! renormalization, so deep trees neither underflow nor drift.
//!
//! The graph posterior enumerates spin configurations and weighs each by a
//! product of pairwise factors (edge or non-edge, agreeing or disagreeing
//! endpoints). It is an oracle for small n, not an estimator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::graph::LabeledGraph;
use crate::model::{ModelParams, Spin};
use crate::stats::{mean_ci95, stable_hash64};
use crate::tree::{sample_branching_tree, LabeledTree, RootLaw};
use crate::{Error, Result};

/// Largest vertex count the brute-force graph posterior will enumerate.
pub const BRUTEFORCE_VERTEX_CAP: usize = 24;

/// Spin configurations per parallel enumeration block.
const ENUMERATION_BLOCK: u64 = 1 << 12;

/// A posterior over the two root labels, reported as the probability of
/// plus together with the gap between the two label probabilities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RootPosterior {
    pub prob_plus: f64,
    /// Always equals |2 * prob_plus - 1|.
    pub delta: f64,
}

impl RootPosterior {
    pub fn new(prob_plus: f64) -> RootPosterior {
        debug_assert!((0.0..=1.0).contains(&prob_plus));
        RootPosterior {
            prob_plus,
            delta: (2.0 * prob_plus - 1.0).abs(),
        }
    }

    /// The uninformative posterior.
    pub fn even() -> RootPosterior {
        RootPosterior::new(0.5)
    }

    pub fn prob(&self, spin: Spin) -> f64 {
        match spin {
            Spin::Plus => self.prob_plus,
            Spin::Minus => 1.0 - self.prob_plus,
        }
    }
}

/// log(exp(x) + exp(y)) without overflow; minus infinity passes through.
fn mix_log(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Exact posterior of the root label given the labels of every node at
/// depth `boundary_depth`, under the flip-noise channel with the given
/// epsilon. The tree supplies shape only; its stored spins are ignored and
/// `observed` lists the boundary labels in node-index order. An empty
/// boundary generation carries no information and yields the even
/// posterior. Nodes deeper than the boundary are unobserved descendants of
/// observed ones and drop out of the computation exactly.
pub fn tree_root_posterior(
    tree: &LabeledTree,
    boundary_depth: u32,
    observed: &[Spin],
    epsilon: f64,
) -> Result<RootPosterior> {
    if !(epsilon.is_finite() && (0.0..=0.5).contains(&epsilon)) {
        return Err(Error::PosteriorEpsilon(epsilon));
    }
    let boundary = tree.generation_range(boundary_depth);
    if observed.len() != boundary.len() {
        return Err(Error::BoundaryMismatch);
    }
    if boundary.is_empty() {
        return Ok(RootPosterior::even());
    }
    let ln_stay = (1.0 - epsilon).ln();
    let ln_flip = epsilon.ln();
    // Per-node upward messages in log domain: the probability of the
    // observed labels below the node, given the node's own label.
    let mut log_plus = vec![0.0f64; boundary.end];
    let mut log_minus = vec![0.0f64; boundary.end];
    for (offset, index) in boundary.clone().enumerate() {
        match observed[offset] {
            Spin::Plus => log_minus[index] = f64::NEG_INFINITY,
            Spin::Minus => log_plus[index] = f64::NEG_INFINITY,
        }
    }
    for index in (1..boundary.end).rev() {
        // All children have higher indexes, so this node's message is
        // complete. Renormalize before passing it up.
        let shift = log_plus[index].max(log_minus[index]);
        if shift != f64::NEG_INFINITY {
            log_plus[index] -= shift;
            log_minus[index] -= shift;
        }
        let parent = tree.node(index).parent.expect("non-root node") as usize;
        log_plus[parent] += mix_log(ln_stay + log_plus[index], ln_flip + log_minus[index]);
        log_minus[parent] += mix_log(ln_flip + log_plus[index], ln_stay + log_minus[index]);
    }
    let (root_plus, root_minus) = (log_plus[0], log_minus[0]);
    if root_plus == f64::NEG_INFINITY && root_minus == f64::NEG_INFINITY {
        return Err(Error::InconsistentBoundary);
    }
    // The uniform root prior cancels in the normalization.
    Ok(RootPosterior::new(1.0 / (1.0 + (root_minus - root_plus).exp())))
}

/// Monte Carlo estimate of the expected root-posterior gap at one boundary
/// depth, with the flip noise implied by the rates.
#[derive(Clone, Debug, Serialize)]
pub struct DeltaEstimate {
    pub boundary_depth: u32,
    pub trials: usize,
    pub epsilon: f64,
    pub mean: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    /// Fraction of trials whose tree died out before the boundary depth;
    /// those contribute a gap of zero.
    pub extinct_fraction: f64,
    /// Oversized tree attempts discarded across all trials.
    pub tree_discards: u64,
    pub seed: u64,
}

/// Samples independent labeled trees to `boundary_depth`, reads the labels
/// of the boundary generation, and averages the exact posterior gap at the
/// root. The per-trial flip probability is b / (a + b), which is exactly
/// the label noise the tree sampler induces; rates with b > a would need a
/// flip probability above one half and are rejected.
pub fn estimate_expected_delta(
    params: &ModelParams,
    boundary_depth: u32,
    trials: usize,
    seed: u64,
) -> Result<DeltaEstimate> {
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let epsilon = params.flip_probability()?;
    if epsilon > 0.5 {
        return Err(Error::PosteriorEpsilon(epsilon));
    }
    let outcomes: Vec<Result<(f64, bool, u64)>> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(stable_hash64(&[seed, trial]));
            let sample = sample_branching_tree(params, boundary_depth, RootLaw::Base, &mut rng)?;
            let tree = &sample.tree;
            let boundary = tree.generation_range(boundary_depth);
            let extinct = boundary.is_empty();
            let observed: Vec<Spin> = boundary.map(|i| tree.node(i).spin).collect();
            let posterior = tree_root_posterior(tree, boundary_depth, &observed, epsilon)?;
            Ok((posterior.delta, extinct, sample.discarded as u64))
        })
        .collect();
    let mut gaps = Vec::with_capacity(trials);
    let mut extinct = 0u64;
    let mut discards = 0u64;
    for outcome in outcomes {
        let (gap, was_extinct, discarded) = outcome?;
        gaps.push(gap);
        extinct += u64::from(was_extinct);
        discards += discarded;
    }
    let interval = mean_ci95(&gaps);
    Ok(DeltaEstimate {
        boundary_depth,
        trials,
        epsilon,
        mean: interval.mean,
        ci_lower: interval.lower,
        ci_upper: interval.upper,
        extinct_fraction: extinct as f64 / trials as f64,
        tree_discards: discards,
        seed,
    })
}

/// The four likelihood factors one vertex pair can contribute: an edge or
/// its absence, with agreeing or disagreeing endpoint labels.
#[derive(Clone, Copy, Debug)]
pub struct PairwiseFactor {
    pub edge_agree: f64,
    pub edge_disagree: f64,
    pub non_edge_agree: f64,
    pub non_edge_disagree: f64,
}

impl PairwiseFactor {
    /// Builds the factor for a pair with the given weights in a graph on n
    /// vertices. Fails when either connection probability reaches one,
    /// which would make a non-edge factor nonpositive.
    pub fn new(params: &ModelParams, weight_u: f64, weight_v: f64, n: usize) -> Result<PairwiseFactor> {
        let p_agree = weight_u * weight_v * params.a() / n as f64;
        let p_disagree = weight_u * weight_v * params.b() / n as f64;
        if p_agree >= 1.0 || p_disagree >= 1.0 {
            return Err(Error::EdgeProbabilityOverflow {
                kappa_max: params.kappa_max(),
                n,
            });
        }
        Ok(PairwiseFactor {
            edge_agree: p_agree,
            edge_disagree: p_disagree,
            non_edge_agree: 1.0 - p_agree,
            non_edge_disagree: 1.0 - p_disagree,
        })
    }

    pub fn value(&self, connected: bool, agree: bool) -> f64 {
        match (connected, agree) {
            (true, true) => self.edge_agree,
            (true, false) => self.edge_disagree,
            (false, true) => self.non_edge_agree,
            (false, false) => self.non_edge_disagree,
        }
    }
}

/// Compensated accumulator, so configuration sums lose almost nothing to
/// rounding regardless of term count.
#[derive(Clone, Copy, Default)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

/// Exact posterior probability that `target` has label plus given the whole
/// graph, the weights, and any anchored labels, by enumeration over all
/// consistent spin configurations. Anchors may repeat if they agree;
/// conflicting anchors are rejected. Enumeration runs over fixed-size blocks
/// combined in block order, so the result does not depend on scheduling.
pub fn graph_posterior_bruteforce(
    graph: &LabeledGraph,
    params: &ModelParams,
    target: u32,
    anchors: &[(u32, Spin)],
) -> Result<RootPosterior> {
    let n = graph.n();
    if n > BRUTEFORCE_VERTEX_CAP {
        return Err(Error::TooManyVertices {
            n,
            cap: BRUTEFORCE_VERTEX_CAP,
        });
    }
    if target as usize >= n {
        return Err(Error::VertexOutOfRange { vertex: target, n });
    }
    let mut anchored: Vec<Option<Spin>> = vec![None; n];
    for &(vertex, spin) in anchors {
        if vertex as usize >= n {
            return Err(Error::VertexOutOfRange { vertex, n });
        }
        match anchored[vertex as usize] {
            Some(previous) if previous != spin => {
                return Err(Error::BadAnchor(format!(
                    "vertex {vertex} anchored to both labels"
                )))
            }
            _ => anchored[vertex as usize] = Some(spin),
        }
    }
    // Pair table in (u, v) order with u < v.
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n as u32 {
        for v in (u + 1)..n as u32 {
            let factor = PairwiseFactor::new(params, graph.weight(u), graph.weight(v), n)?;
            pairs.push((u, v, graph.has_edge(u, v), factor));
        }
    }
    let free: Vec<u32> = (0..n as u32)
        .filter(|&v| anchored[v as usize].is_none())
        .collect();
    let fixed_word: u32 = anchored
        .iter()
        .enumerate()
        .filter(|(_, s)| **s == Some(Spin::Plus))
        .map(|(v, _)| 1u32 << v)
        .sum();
    let configurations: u64 = 1u64 << free.len();
    let blocks = configurations.div_ceil(ENUMERATION_BLOCK);
    let partials: Vec<(KahanSum, KahanSum)> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut z_plus = KahanSum::default();
            let mut z_minus = KahanSum::default();
            let start = block * ENUMERATION_BLOCK;
            let end = (start + ENUMERATION_BLOCK).min(configurations);
            for mask in start..end {
                let mut word = fixed_word;
                for (bit, &vertex) in free.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        word |= 1 << vertex;
                    }
                }
                let mut likelihood = 1.0;
                for &(u, v, connected, factor) in &pairs {
                    let agree = (word >> u ^ word >> v) & 1 == 0;
                    likelihood *= factor.value(connected, agree);
                }
                if word >> target & 1 == 1 {
                    z_plus.add(likelihood);
                } else {
                    z_minus.add(likelihood);
                }
            }
            (z_plus, z_minus)
        })
        .collect();
    let mut z_plus = KahanSum::default();
    let mut z_minus = KahanSum::default();
    for (block_plus, block_minus) in partials {
        z_plus.add(block_plus.value());
        z_minus.add(block_minus.value());
    }
    let total = z_plus.value() + z_minus.value();
    if total <= 0.0 {
        return Err(Error::DegenerateEvidence);
    }
    Ok(RootPosterior::new(z_plus.value() / total))
}

/// Agreement fraction between two label sequences, maximized over the
/// global flip. The two classes are exchangeable, so only this flip-fixed
/// agreement is meaningful; it always lands in [1/2, 1].
pub fn overlap(truth: &[Spin], estimate: &[Spin]) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::EmptyGraph);
    }
    if truth.len() != estimate.len() {
        return Err(Error::LengthMismatch(truth.len(), estimate.len()));
    }
    let agree = truth
        .iter()
        .zip(estimate)
        .filter(|(t, e)| t == e)
        .count();
    Ok(agree.max(truth.len() - agree) as f64 / truth.len() as f64)
}

/// Monte Carlo estimate of the probability that two distinct uniformly
/// chosen vertices, both estimated plus, share the same true label. An
/// estimate that beats random guessing concentrates same-label pairs inside
/// its classes, which this probability exposes.
pub fn pair_agreement_given_estimate(
    truth: &[Spin],
    estimate: &[Spin],
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if truth.len() != estimate.len() {
        return Err(Error::LengthMismatch(truth.len(), estimate.len()));
    }
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let plus_vertices: Vec<usize> = (0..truth.len())
        .filter(|&v| estimate[v] == Spin::Plus)
        .collect();
    if plus_vertices.len() < 2 {
        return Err(Error::TooFewPlusEstimates(plus_vertices.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut same = 0u64;
    for _ in 0..trials {
        let i = rng.random_range(0..plus_vertices.len());
        let j = loop {
            let j = rng.random_range(0..plus_vertices.len());
            if j != i {
                break j;
            }
        };
        if truth[plus_vertices[i]] == truth[plus_vertices[j]] {
            same += 1;
        }
    }
    Ok(same as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::WeightLaw;

    fn chain(len: usize) -> LabeledTree {
        let raw: Vec<(Option<u32>, Spin, f64)> = (0..len)
            .map(|i| {
                let parent = if i == 0 { None } else { Some(i as u32 - 1) };
                (parent, Spin::Plus, 1.0)
            })
            .collect();
        LabeledTree::from_nodes(&raw).unwrap()
    }

    fn unit_params(a: f64, b: f64) -> ModelParams {
        ModelParams::new(a, b, WeightLaw::point_mass(1.0).unwrap()).unwrap()
    }

    #[test]
    fn single_observed_child_tilts_by_the_channel() {
        let tree = chain(2);
        for epsilon in [0.1, 0.25, 0.4] {
            let posterior = tree_root_posterior(&tree, 1, &[Spin::Plus], epsilon).unwrap();
            assert!((posterior.prob_plus - (1.0 - epsilon)).abs() < 1e-12);
            let flipped = tree_root_posterior(&tree, 1, &[Spin::Minus], epsilon).unwrap();
            assert!((flipped.prob_plus - epsilon).abs() < 1e-12);
        }
    }

    #[test]
    fn two_agreeing_children_compound_the_evidence() {
        let star = LabeledTree::from_nodes(&[
            (None, Spin::Plus, 1.0),
            (Some(0), Spin::Plus, 1.0),
            (Some(0), Spin::Plus, 1.0),
        ])
        .unwrap();
        let posterior = tree_root_posterior(&star, 1, &[Spin::Plus, Spin::Plus], 0.1).unwrap();
        // 0.81 against 0.01.
        assert!((posterior.prob_plus - 81.0 / 82.0).abs() < 1e-12);
        // Disagreeing children cancel exactly.
        let split = tree_root_posterior(&star, 1, &[Spin::Plus, Spin::Minus], 0.1).unwrap();
        assert!((split.prob_plus - 0.5).abs() < 1e-12);
    }

    #[test]
    fn depth_two_chain_hand_value() {
        let tree = chain(3);
        let posterior = tree_root_posterior(&tree, 2, &[Spin::Plus], 0.25).unwrap();
        // Two channel steps: 0.75^2 + 0.25^2 = 0.625.
        assert!((posterior.prob_plus - 0.625).abs() < 1e-12);
    }

    #[test]
    fn pure_noise_gives_the_even_posterior_bitwise() {
        let tree = LabeledTree::from_nodes(&[
            (None, Spin::Plus, 1.0),
            (Some(0), Spin::Minus, 2.0),
            (Some(0), Spin::Plus, 1.0),
            (Some(1), Spin::Plus, 1.5),
            (Some(2), Spin::Minus, 1.0),
        ])
        .unwrap();
        let posterior =
            tree_root_posterior(&tree, 2, &[Spin::Plus, Spin::Minus], 0.5).unwrap();
        assert_eq!(posterior.prob_plus, 0.5);
        assert_eq!(posterior.delta, 0.0);
    }

    #[test]
    fn empty_boundary_is_uninformative() {
        let tree = chain(2);
        let posterior = tree_root_posterior(&tree, 5, &[], 0.3).unwrap();
        assert_eq!(posterior.prob_plus, 0.5);
        assert_eq!(posterior.delta, 0.0);
    }

    #[test]
    fn boundary_and_epsilon_validation() {
        let tree = chain(3);
        assert!(matches!(
            tree_root_posterior(&tree, 1, &[], 0.25),
            Err(Error::BoundaryMismatch)
        ));
        assert!(matches!(
            tree_root_posterior(&tree, 5, &[Spin::Plus], 0.25),
            Err(Error::BoundaryMismatch)
        ));
        for bad in [-0.1, 0.6, f64::NAN] {
            assert!(matches!(
                tree_root_posterior(&tree, 1, &[Spin::Plus], bad),
                Err(Error::PosteriorEpsilon(_))
            ));
        }
    }

    #[test]
    fn noiseless_channel_is_deterministic_or_inconsistent() {
        let tree = chain(3);
        let sure = tree_root_posterior(&tree, 2, &[Spin::Minus], 0.0).unwrap();
        assert_eq!(sure.prob_plus, 0.0);
        assert_eq!(sure.delta, 1.0);
        let star = LabeledTree::from_nodes(&[
            (None, Spin::Plus, 1.0),
            (Some(0), Spin::Plus, 1.0),
            (Some(0), Spin::Plus, 1.0),
        ])
        .unwrap();
        assert!(matches!(
            tree_root_posterior(&star, 1, &[Spin::Plus, Spin::Minus], 0.0),
            Err(Error::InconsistentBoundary)
        ));
    }

    #[test]
    fn nodes_below_the_boundary_change_nothing() {
        // Same root-to-boundary structure, one extra unobserved grandchild.
        let bare = chain(2);
        let extended = LabeledTree::from_nodes(&[
            (None, Spin::Plus, 1.0),
            (Some(0), Spin::Plus, 1.0),
            (Some(1), Spin::Minus, 1.0),
        ])
        .unwrap();
        let p_bare = tree_root_posterior(&bare, 1, &[Spin::Plus], 0.2).unwrap();
        let p_extended = tree_root_posterior(&extended, 1, &[Spin::Plus], 0.2).unwrap();
        assert_eq!(p_bare.prob_plus, p_extended.prob_plus);
    }

    #[test]
    fn equal_rates_estimate_is_exactly_zero() {
        let params = unit_params(2.0, 2.0);
        let estimate = estimate_expected_delta(&params, 3, 50, 17).unwrap();
        assert_eq!(estimate.mean, 0.0);
        assert_eq!(estimate.ci_lower, 0.0);
        assert_eq!(estimate.ci_upper, 0.0);
        assert_eq!(estimate.epsilon, 0.5);
    }

    #[test]
    fn delta_estimate_is_deterministic_and_validates() {
        let params = unit_params(3.0, 1.0);
        let first = estimate_expected_delta(&params, 2, 200, 5).unwrap();
        let second = estimate_expected_delta(&params, 2, 200, 5).unwrap();
        assert_eq!(first.mean, second.mean);
        assert!(first.mean > 0.0 && first.mean <= 1.0);
        assert!(first.ci_lower <= first.mean && first.mean <= first.ci_upper);
        assert!(matches!(
            estimate_expected_delta(&params, 2, 0, 5),
            Err(Error::ZeroTrials)
        ));
        let reversed = unit_params(1.0, 3.0);
        assert!(matches!(
            estimate_expected_delta(&reversed, 2, 10, 5),
            Err(Error::PosteriorEpsilon(_))
        ));
    }

    #[test]
    fn subcritical_trees_mostly_die_out() {
        // Offspring mean 0.3: extinction by depth 4 is overwhelming.
        let params = unit_params(0.4, 0.2);
        let estimate = estimate_expected_delta(&params, 4, 400, 23).unwrap();
        assert!(estimate.extinct_fraction > 0.8, "{}", estimate.extinct_fraction);
    }

    #[test]
    fn pairwise_factor_cases_and_validation() {
        let params = unit_params(3.0, 1.0);
        let factor = PairwiseFactor::new(&params, 1.0, 2.0, 10).unwrap();
        assert!((factor.value(true, true) - 0.6).abs() < 1e-15);
        assert!((factor.value(true, false) - 0.2).abs() < 1e-15);
        assert!((factor.value(false, true) - 0.4).abs() < 1e-15);
        assert!((factor.value(false, false) - 0.8).abs() < 1e-15);
        assert!(matches!(
            PairwiseFactor::new(&params, 1.0, 1.0, 2),
            Err(Error::EdgeProbabilityOverflow { .. })
        ));
    }

    #[test]
    fn unanchored_posterior_is_even_by_symmetry() {
        let params = unit_params(3.0, 1.0);
        let spins = vec![Spin::Plus, Spin::Minus, Spin::Plus, Spin::Minus];
        let weights = vec![1.0; 4];
        let graph =
            LabeledGraph::from_parts(spins, weights, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        for target in 0..4 {
            let posterior = graph_posterior_bruteforce(&graph, &params, target, &[]).unwrap();
            assert!(
                (posterior.prob_plus - 0.5).abs() < 1e-12,
                "vertex {target}: {}",
                posterior.prob_plus
            );
        }
    }

    #[test]
    fn two_vertex_anchored_edge_matches_the_rate_ratio() {
        // Rates must keep a * w * w / n below one, so n = 2 needs a < 2.
        // These rates make every likelihood factor and the final ratio exact
        // in binary, so the comparison needs no tolerance.
        let params = unit_params(1.5, 0.5);
        let graph = LabeledGraph::from_parts(
            vec![Spin::Plus, Spin::Plus],
            vec![1.0, 1.0],
            &[(0, 1)],
        )
        .unwrap();
        let expected = params.a() / (params.a() + params.b());
        let agree = graph_posterior_bruteforce(&graph, &params, 0, &[(1, Spin::Plus)]).unwrap();
        assert_eq!(agree.prob_plus, expected);
        let disagree =
            graph_posterior_bruteforce(&graph, &params, 0, &[(1, Spin::Minus)]).unwrap();
        assert_eq!(disagree.prob_plus, 1.0 - expected);
    }

    #[test]
    fn anchoring_the_target_pins_the_posterior() {
        let params = unit_params(2.0, 1.0);
        let graph = LabeledGraph::from_parts(
            vec![Spin::Plus, Spin::Minus, Spin::Plus],
            vec![1.0, 1.0, 1.0],
            &[(0, 1), (0, 2)],
        )
        .unwrap();
        let pinned =
            graph_posterior_bruteforce(&graph, &params, 1, &[(1, Spin::Minus)]).unwrap();
        assert_eq!(pinned.prob_plus, 0.0);
        // A repeated agreeing anchor is accepted; a conflicting one is not.
        let repeated = graph_posterior_bruteforce(
            &graph,
            &params,
            0,
            &[(1, Spin::Minus), (1, Spin::Minus)],
        )
        .unwrap();
        assert!(repeated.prob_plus > 0.0);
        assert!(matches!(
            graph_posterior_bruteforce(&graph, &params, 0, &[(1, Spin::Plus), (1, Spin::Minus)]),
            Err(Error::BadAnchor(_))
        ));
    }

    #[test]
    fn bruteforce_input_validation() {
        let params = unit_params(3.0, 1.0);
        let big = LabeledGraph::from_parts(
            vec![Spin::Plus; BRUTEFORCE_VERTEX_CAP + 1],
            vec![1.0; BRUTEFORCE_VERTEX_CAP + 1],
            &[],
        )
        .unwrap();
        assert!(matches!(
            graph_posterior_bruteforce(&big, &params, 0, &[]),
            Err(Error::TooManyVertices { .. })
        ));
        let small =
            LabeledGraph::from_parts(vec![Spin::Plus; 3], vec![1.0; 3], &[]).unwrap();
        assert!(matches!(
            graph_posterior_bruteforce(&small, &params, 7, &[]),
            Err(Error::VertexOutOfRange { .. })
        ));
        assert!(matches!(
            graph_posterior_bruteforce(&small, &params, 0, &[(9, Spin::Plus)]),
            Err(Error::VertexOutOfRange { .. })
        ));
        // Zero rates with an observed edge leave no consistent configuration.
        let degenerate = ModelParams::new(0.0, 0.0, WeightLaw::point_mass(1.0).unwrap()).unwrap();
        let edge = LabeledGraph::from_parts(
            vec![Spin::Plus, Spin::Plus],
            vec![1.0, 1.0],
            &[(0, 1)],
        )
        .unwrap();
        assert!(matches!(
            graph_posterior_bruteforce(&edge, &degenerate, 0, &[]),
            Err(Error::DegenerateEvidence)
        ));
    }

    #[test]
    fn anchored_neighbor_pulls_toward_agreement() {
        let params = unit_params(2.0, 0.5);
        let triangle = LabeledGraph::from_parts(
            vec![Spin::Plus, Spin::Plus, Spin::Minus],
            vec![1.0, 1.0, 1.0],
            &[(0, 1), (1, 2), (0, 2)],
        )
        .unwrap();
        let posterior =
            graph_posterior_bruteforce(&triangle, &params, 0, &[(1, Spin::Plus)]).unwrap();
        assert!(posterior.prob_plus > 0.5);
        // Conditioning on the opposite label mirrors it exactly.
        let mirrored =
            graph_posterior_bruteforce(&triangle, &params, 0, &[(1, Spin::Minus)]).unwrap();
        assert!((posterior.prob_plus + mirrored.prob_plus - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlap_hand_values() {
        use Spin::{Minus, Plus};
        let truth = [Plus, Minus, Plus, Minus];
        assert_eq!(overlap(&truth, &truth).unwrap(), 1.0);
        let flipped = [Minus, Plus, Minus, Plus];
        assert_eq!(overlap(&truth, &flipped).unwrap(), 1.0);
        let one_off = [Plus, Minus, Plus, Plus];
        assert_eq!(overlap(&truth, &one_off).unwrap(), 0.75);
        assert!(overlap(&truth, &[Plus]).is_err());
        assert!(overlap(&[], &[]).is_err());
    }

    #[test]
    fn overlap_never_drops_below_half() {
        use Spin::{Minus, Plus};
        // Three agreements out of eight: the flip maximum takes over.
        let truth = [Plus; 8];
        let estimate = [Plus, Plus, Plus, Minus, Minus, Minus, Minus, Minus];
        assert_eq!(overlap(&truth, &estimate).unwrap(), 0.625);
    }

    #[test]
    fn pair_agreement_extremes() {
        use Spin::{Minus, Plus};
        let truth = [Plus, Plus, Minus, Minus];
        assert_eq!(
            pair_agreement_given_estimate(&truth, &truth, 500, 3).unwrap(),
            1.0
        );
        let lopsided = [Plus, Minus, Minus, Minus];
        assert!(matches!(
            pair_agreement_given_estimate(&truth, &lopsided, 10, 3),
            Err(Error::TooFewPlusEstimates(1))
        ));
        assert!(matches!(
            pair_agreement_given_estimate(&truth, &truth, 0, 3),
            Err(Error::ZeroTrials)
        ));
        assert!(matches!(
            pair_agreement_given_estimate(&truth, &[Plus], 10, 3),
            Err(Error::LengthMismatch(4, 1))
        ));
    }

    #[test]
    fn pair_agreement_matches_the_quadratic_overlap_law() {
        use Spin::{Minus, Plus};
        // Balanced truth on 1000 vertices; estimate agrees on exactly 0.7.
        let n = 1000;
        let epsilon = 0.2;
        let truth: Vec<Spin> = (0..n).map(|v| if v < n / 2 { Plus } else { Minus }).collect();
        let mismatches = (n / 4) as f64 * (1.0 - 2.0 * epsilon);
        let k = mismatches.round() as usize;
        let mut estimate = truth.clone();
        for v in 0..k {
            estimate[v] = Minus;
            estimate[n / 2 + v] = Plus;
        }
        assert_eq!(overlap(&truth, &estimate).unwrap(), 0.5 + epsilon);
        let trials = 40_000;
        let agreement =
            pair_agreement_given_estimate(&truth, &estimate, trials, 11).unwrap();
        let expected = 0.5 + 2.0 * epsilon * epsilon;
        let sigma = (expected * (1.0 - expected) / trials as f64).sqrt();
        assert!(
            (agreement - expected).abs() < 3.0 * sigma + 0.002,
            "agreement {agreement} vs {expected}"
        );
    }

    #[test]
    fn independent_bisection_pairs_agree_half_the_time() {
        use Spin::{Minus, Plus};
        let n = 2000;
        let truth: Vec<Spin> = (0..n).map(|v| if v < n / 2 { Plus } else { Minus }).collect();
        // A bisection interleaved against the truth blocks: exactly half of
        // the estimated-plus vertices carry each true label.
        let estimate: Vec<Spin> = (0..n)
            .map(|v| if v % 2 == 0 { Plus } else { Minus })
            .collect();
        let trials = 40_000;
        let agreement =
            pair_agreement_given_estimate(&truth, &estimate, trials, 13).unwrap();
        let sigma = (0.25f64 / trials as f64).sqrt();
        assert!(
            (agreement - 0.5).abs() < 3.0 * sigma + 0.002,
            "agreement {agreement}"
        );
    }
}
