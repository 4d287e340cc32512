//! The limiting two-type branching process and broadcast relabeling.
//!
//! Trees are stored generation-major: node 0 is the root, every node's
//! parent has a smaller index, and depths are nondecreasing along the node
//! list. Two samplers grow the same process: one draws same-spin and
//! opposite-spin child counts separately, the other draws one total count
//! and assigns child types independently. Their output distributions agree.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::model::{ModelParams, Spin};
use crate::{Error, Result};

/// Default cap on the number of nodes grown per attempt.
pub const DEFAULT_NODE_CAP: usize = 1_000_000;

/// How many capped attempts are made before reporting failure.
const MAX_SAMPLE_ATTEMPTS: u32 = 64;

/// One tree node: parent index (None for the root), depth, spin, weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TreeNode {
    pub parent: Option<u32>,
    pub depth: u32,
    pub spin: Spin,
    pub weight: f64,
}

#[derive(Serialize, Deserialize)]
struct TreeNodeRepr {
    parent: Option<u32>,
    spin: Spin,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct TreeRepr {
    nodes: Vec<TreeNodeRepr>,
}

/// A finite spin-and-weight labeled tree in generation-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TreeRepr", into = "TreeRepr")]
pub struct LabeledTree {
    nodes: Vec<TreeNode>,
    // generation_ends[d] is one past the last index of generation d.
    generation_ends: Vec<usize>,
}

impl LabeledTree {
    /// Validates and assembles a tree from (parent, spin, weight) triples in
    /// node-index order. Node 0 must be the only root, parents must precede
    /// children, weights must be positive, and depths must be nondecreasing
    /// (generation-major order).
    pub fn from_nodes(raw: &[(Option<u32>, Spin, f64)]) -> Result<LabeledTree> {
        if raw.is_empty() {
            return Err(Error::TreeFormat("tree needs at least one node".into()));
        }
        let mut nodes: Vec<TreeNode> = Vec::with_capacity(raw.len());
        for (i, &(parent, spin, weight)) in raw.iter().enumerate() {
            if !(weight.is_finite() && weight > 0.0) {
                return Err(Error::TreeFormat(format!(
                    "node {i} has invalid weight {weight}"
                )));
            }
            let depth = match (i, parent) {
                (0, None) => 0,
                (0, Some(_)) => {
                    return Err(Error::TreeFormat("node 0 must have no parent".into()))
                }
                (_, None) => {
                    return Err(Error::TreeFormat(format!(
                        "node {i} has no parent but is not the root"
                    )))
                }
                (_, Some(p)) => {
                    if p as usize >= i {
                        return Err(Error::TreeFormat(format!(
                            "node {i} has parent {p}, parents must precede children"
                        )));
                    }
                    nodes[p as usize].depth + 1
                }
            };
            if let Some(last) = nodes.last() {
                if depth < last.depth {
                    return Err(Error::TreeFormat(format!(
                        "node {i} breaks generation-major order"
                    )));
                }
            }
            nodes.push(TreeNode {
                parent,
                depth,
                spin,
                weight,
            });
        }
        let generation_ends = compute_generation_ends(&nodes);
        Ok(LabeledTree {
            nodes,
            generation_ends,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, index: usize) -> &TreeNode {
        &self.nodes[index]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    /// Largest depth present.
    pub fn depth(&self) -> u32 {
        (self.generation_ends.len() - 1) as u32
    }

    /// Index range of generation `d`; empty past the deepest generation.
    pub fn generation_range(&self, d: u32) -> std::ops::Range<usize> {
        let d = d as usize;
        if d >= self.generation_ends.len() {
            return self.nodes.len()..self.nodes.len();
        }
        let start = if d == 0 { 0 } else { self.generation_ends[d - 1] };
        start..self.generation_ends[d]
    }

    pub fn generation(&self, d: u32) -> &[TreeNode] {
        &self.nodes[self.generation_range(d)]
    }

    /// Number of children of each node.
    pub fn child_counts(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.nodes.len()];
        for node in &self.nodes[1..] {
            counts[node.parent.expect("non-root nodes have parents") as usize] += 1;
        }
        counts
    }

    /// Spins in node-index order.
    pub fn spins(&self) -> Vec<Spin> {
        self.nodes.iter().map(|n| n.spin).collect()
    }

    /// The same shape with spins replaced.
    pub fn with_spins(&self, spins: &[Spin]) -> Result<LabeledTree> {
        if spins.len() != self.nodes.len() {
            return Err(Error::LengthMismatch(spins.len(), self.nodes.len()));
        }
        let mut tree = self.clone();
        for (node, &spin) in tree.nodes.iter_mut().zip(spins) {
            node.spin = spin;
        }
        Ok(tree)
    }
}

fn compute_generation_ends(nodes: &[TreeNode]) -> Vec<usize> {
    let max_depth = nodes.last().expect("tree is nonempty").depth as usize;
    let mut ends = vec![0usize; max_depth + 1];
    for node in nodes {
        ends[node.depth as usize] += 1;
    }
    let mut acc = 0;
    for end in &mut ends {
        acc += *end;
        *end = acc;
    }
    ends
}

impl TryFrom<TreeRepr> for LabeledTree {
    type Error = Error;

    fn try_from(repr: TreeRepr) -> Result<LabeledTree> {
        let raw: Vec<(Option<u32>, Spin, f64)> = repr
            .nodes
            .iter()
            .map(|n| (n.parent, n.spin, n.weight))
            .collect();
        LabeledTree::from_nodes(&raw)
    }
}

impl From<LabeledTree> for TreeRepr {
    fn from(tree: LabeledTree) -> TreeRepr {
        TreeRepr {
            nodes: tree
                .nodes
                .into_iter()
                .map(|n| TreeNodeRepr {
                    parent: n.parent,
                    spin: n.spin,
                    weight: n.weight,
                })
                .collect(),
        }
    }
}

/// Which law the root weight is drawn from: the plain weight law, or its
/// size-biased version (the weight law seen from an edge endpoint).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootLaw {
    Base,
    SizeBiased,
}

/// A sampled tree together with how many oversized attempts were discarded
/// before this one fit under the node cap.
#[derive(Clone, Debug)]
pub struct TreeSample {
    pub tree: LabeledTree,
    pub discarded: u32,
}

struct TreeBuilder {
    nodes: Vec<TreeNode>,
    cap: usize,
}

impl TreeBuilder {
    fn new(cap: usize, root_spin: Spin, root_weight: f64) -> TreeBuilder {
        let nodes = vec![TreeNode {
            parent: None,
            depth: 0,
            spin: root_spin,
            weight: root_weight,
        }];
        TreeBuilder { nodes, cap }
    }

    /// Appends a child; false when the cap is hit.
    fn try_push(&mut self, parent: u32, spin: Spin, weight: f64) -> bool {
        if self.nodes.len() >= self.cap {
            return false;
        }
        let depth = self.nodes[parent as usize].depth + 1;
        self.nodes.push(TreeNode {
            parent: Some(parent),
            depth,
            spin,
            weight,
        });
        true
    }

    fn finish(self) -> LabeledTree {
        let generation_ends = compute_generation_ends(&self.nodes);
        LabeledTree {
            nodes: self.nodes,
            generation_ends,
        }
    }
}

fn poisson_count<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> u64 {
    if rate <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(rate).expect("rate is positive and finite");
    dist.sample(rng) as u64
}

/// Samples the limiting tree to the given depth with the default node cap.
/// Each node of spin s and weight w gets an independent Poisson number of
/// same-spin children with rate (a/2) * (mean weight) * w and of
/// opposite-spin children with rate (b/2) * (mean weight) * w; child weights
/// are i.i.d. size-biased draws. The root spin is uniform.
pub fn sample_branching_tree<R: Rng + ?Sized>(
    params: &ModelParams,
    depth: u32,
    root_law: RootLaw,
    rng: &mut R,
) -> Result<TreeSample> {
    sample_branching_tree_with_cap(params, depth, root_law, DEFAULT_NODE_CAP, rng)
}

/// Same as [`sample_branching_tree`] with an explicit node cap. Attempts
/// that outgrow the cap are discarded and counted; after too many in a row
/// the call fails rather than loop forever.
pub fn sample_branching_tree_with_cap<R: Rng + ?Sized>(
    params: &ModelParams,
    depth: u32,
    root_law: RootLaw,
    cap: usize,
    rng: &mut R,
) -> Result<TreeSample> {
    if cap == 0 {
        return Err(Error::PopulationCap {
            cap,
            attempts: 0,
        });
    }
    let mean_weight = params.law().first_moment();
    let same_rate = 0.5 * params.a() * mean_weight;
    let opposite_rate = 0.5 * params.b() * mean_weight;
    let biased = params.law().size_biased();
    for attempt in 0..MAX_SAMPLE_ATTEMPTS {
        let root_weight = match root_law {
            RootLaw::Base => params.law().sample(rng),
            RootLaw::SizeBiased => biased.sample(rng),
        };
        let mut builder = TreeBuilder::new(cap, Spin::sample(rng), root_weight);
        let mut generation_start = 0usize;
        let mut fits = true;
        'growth: for _ in 0..depth {
            let generation_end = builder.nodes.len();
            if generation_start == generation_end {
                break;
            }
            for parent in generation_start..generation_end {
                let (spin, weight) = {
                    let node = &builder.nodes[parent];
                    (node.spin, node.weight)
                };
                let same = poisson_count(same_rate * weight, rng);
                let opposite = poisson_count(opposite_rate * weight, rng);
                for _ in 0..same {
                    if !builder.try_push(parent as u32, spin, biased.sample(rng)) {
                        fits = false;
                        break 'growth;
                    }
                }
                for _ in 0..opposite {
                    if !builder.try_push(parent as u32, spin.flip(), biased.sample(rng)) {
                        fits = false;
                        break 'growth;
                    }
                }
            }
            generation_start = generation_end;
        }
        if fits {
            return Ok(TreeSample {
                tree: builder.finish(),
                discarded: attempt,
            });
        }
    }
    Err(Error::PopulationCap {
        cap,
        attempts: MAX_SAMPLE_ATTEMPTS,
    })
}

/// Samples the same process in typed form: each node of type x gets a
/// Poisson([`ModelParams::lambda_total`]) number of children whose types are
/// i.i.d. draws from [`ModelParams::offspring_type_law`]. The root type is
/// uniform in spin with a plain weight-law draw.
pub fn sample_branching_tree_typed<R: Rng + ?Sized>(
    params: &ModelParams,
    depth: u32,
    rng: &mut R,
) -> Result<TreeSample> {
    sample_branching_tree_typed_with_cap(params, depth, DEFAULT_NODE_CAP, rng)
}

/// Typed-form sampler with an explicit node cap.
pub fn sample_branching_tree_typed_with_cap<R: Rng + ?Sized>(
    params: &ModelParams,
    depth: u32,
    cap: usize,
    rng: &mut R,
) -> Result<TreeSample> {
    if cap == 0 {
        return Err(Error::PopulationCap {
            cap,
            attempts: 0,
        });
    }
    let total = params.a() + params.b();
    let same_prob = if total > 0.0 { params.a() / total } else { 0.0 };
    let mean_weight = params.law().first_moment();
    let rate_per_weight = 0.5 * total * mean_weight;
    let biased = params.law().size_biased();
    for attempt in 0..MAX_SAMPLE_ATTEMPTS {
        let mut builder = TreeBuilder::new(cap, Spin::sample(rng), params.law().sample(rng));
        let mut generation_start = 0usize;
        let mut fits = true;
        'growth: for _ in 0..depth {
            let generation_end = builder.nodes.len();
            if generation_start == generation_end {
                break;
            }
            for parent in generation_start..generation_end {
                let (spin, weight) = {
                    let node = &builder.nodes[parent];
                    (node.spin, node.weight)
                };
                let count = poisson_count(rate_per_weight * weight, rng);
                for _ in 0..count {
                    let child_spin = if rng.random_bool(same_prob) {
                        spin
                    } else {
                        spin.flip()
                    };
                    if !builder.try_push(parent as u32, child_spin, biased.sample(rng)) {
                        fits = false;
                        break 'growth;
                    }
                }
            }
            generation_start = generation_end;
        }
        if fits {
            return Ok(TreeSample {
                tree: builder.finish(),
                discarded: attempt,
            });
        }
    }
    Err(Error::PopulationCap {
        cap,
        attempts: MAX_SAMPLE_ATTEMPTS,
    })
}

/// Broadcast noise level: the probability that a child's label flips.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BroadcastParams {
    epsilon: f64,
}

impl BroadcastParams {
    /// Flip probability in [0, 1).
    pub fn new(epsilon: f64) -> Result<BroadcastParams> {
        if !(epsilon.is_finite() && (0.0..1.0).contains(&epsilon)) {
            return Err(Error::BroadcastEpsilon(epsilon));
        }
        Ok(BroadcastParams { epsilon })
    }

    /// The noise level matching the model's rates: b/(a + b).
    pub fn from_rates(params: &ModelParams) -> Result<BroadcastParams> {
        BroadcastParams::new(params.flip_probability()?)
    }

    pub fn epsilon(self) -> f64 {
        self.epsilon
    }
}

/// Runs a broadcast on the tree shape, ignoring its stored spins: the root
/// label is uniform and every child independently flips its parent's label
/// with probability epsilon. Returns labels in node-index order.
pub fn broadcast_labels<R: Rng + ?Sized>(
    tree: &LabeledTree,
    noise: BroadcastParams,
    rng: &mut R,
) -> Vec<Spin> {
    let mut labels: Vec<Spin> = Vec::with_capacity(tree.len());
    for node in tree.nodes() {
        let label = match node.parent {
            None => Spin::sample(rng),
            Some(p) => {
                let parent_label = labels[p as usize];
                if rng.random_bool(noise.epsilon) {
                    parent_label.flip()
                } else {
                    parent_label
                }
            }
        };
        labels.push(label);
    }
    labels
}

/// Observed boundary of a tree at the given depth: (node index, spin) pairs
/// in index order, taken from the tree's own labels.
pub fn boundary_observations(tree: &LabeledTree, depth: u32) -> Vec<(u32, Spin)> {
    tree.generation_range(depth)
        .map(|i| (i as u32, tree.node(i).spin))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::WeightLaw;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn uniform_one_two() -> WeightLaw {
        WeightLaw::uniform_over(&[1.0, 2.0]).unwrap()
    }

    fn params_3_1() -> ModelParams {
        ModelParams::new(3.0, 1.0, uniform_one_two()).unwrap()
    }

    #[test]
    fn zero_rates_give_root_only_trees() {
        let params = ModelParams::new(0.0, 0.0, uniform_one_two()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sample = sample_branching_tree(&params, 5, RootLaw::Base, &mut rng).unwrap();
        assert_eq!(sample.tree.len(), 1);
        assert_eq!(sample.discarded, 0);
        let typed = sample_branching_tree_typed(&params, 5, &mut rng).unwrap();
        assert_eq!(typed.tree.len(), 1);
    }

    #[test]
    fn generation_bookkeeping_is_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sample = sample_branching_tree(&params_3_1(), 4, RootLaw::Base, &mut rng).unwrap();
        let tree = &sample.tree;
        let mut seen = 0;
        for d in 0..=tree.depth() {
            let range = tree.generation_range(d);
            assert_eq!(range.start, seen);
            for i in range.clone() {
                assert_eq!(tree.node(i).depth, d);
            }
            seen = range.end;
        }
        assert_eq!(seen, tree.len());
        assert!(tree.generation_range(tree.depth() + 3).is_empty());
        let counts = tree.child_counts();
        assert_eq!(counts.iter().sum::<u32>() as usize, tree.len() - 1);
    }

    #[test]
    fn root_law_controls_root_weight_mean() {
        let params = params_3_1();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let trials = 40_000;
        let mut base_sum = 0.0;
        let mut biased_sum = 0.0;
        for _ in 0..trials {
            base_sum += sample_branching_tree(&params, 0, RootLaw::Base, &mut rng)
                .unwrap()
                .tree
                .root()
                .weight;
            biased_sum += sample_branching_tree(&params, 0, RootLaw::SizeBiased, &mut rng)
                .unwrap()
                .tree
                .root()
                .weight;
        }
        let base_mean = base_sum / trials as f64;
        let biased_mean = biased_sum / trials as f64;
        // Base mean 1.5 (sd 0.5), size-biased mean 5/3 (sd ~0.47).
        let sigma = 0.5 / (trials as f64).sqrt();
        assert!((base_mean - 1.5).abs() < 4.0 * sigma, "base mean {base_mean}");
        assert!(
            (biased_mean - 5.0 / 3.0).abs() < 4.0 * sigma,
            "biased mean {biased_mean}"
        );
    }

    #[test]
    fn first_generation_spin_split_matches_rates() {
        let params = params_3_1();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let trials = 30_000;
        let mut same = 0u64;
        let mut total = 0u64;
        for _ in 0..trials {
            let sample = sample_branching_tree(&params, 1, RootLaw::Base, &mut rng).unwrap();
            let tree = &sample.tree;
            let root_spin = tree.root().spin;
            for node in tree.generation(1) {
                total += 1;
                if node.spin == root_spin {
                    same += 1;
                }
            }
        }
        let frac = same as f64 / total as f64;
        let sigma = (0.75f64 * 0.25 / total as f64).sqrt();
        assert!((frac - 0.75).abs() < 4.0 * sigma, "same-spin fraction {frac}");
    }

    #[test]
    fn typed_sampler_matches_first_generation_mean() {
        let params = params_3_1();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let trials = 30_000;
        let mut count = 0u64;
        for _ in 0..trials {
            let sample = sample_branching_tree_typed(&params, 1, &mut rng).unwrap();
            count += sample.tree.generation(1).len() as u64;
        }
        let mean = count as f64 / trials as f64;
        // Children arrive at rate (a + b)/2 * m1 * w = 3w and the base-law
        // root weight has mean 1.5, so the first generation averages 4.5.
        let sigma = (4.5f64 / trials as f64).sqrt() * 1.5;
        assert!((mean - 4.5).abs() < 4.0 * sigma, "mean first generation {mean}");
    }

    #[test]
    fn node_cap_failure_and_recovery() {
        let params = ModelParams::new(12.0, 4.0, uniform_one_two()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        // Cap far below the typical population: every attempt overflows.
        let result =
            sample_branching_tree_with_cap(&params, 8, RootLaw::Base, 4, &mut rng);
        assert!(matches!(result, Err(Error::PopulationCap { cap: 4, .. })));
        // A generous cap succeeds without discards.
        let ok = sample_branching_tree_with_cap(
            &params,
            2,
            RootLaw::Base,
            100_000,
            &mut rng,
        )
        .unwrap();
        assert_eq!(ok.discarded, 0);
    }

    #[test]
    fn serde_roundtrip_preserves_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sample = sample_branching_tree(&params_3_1(), 3, RootLaw::Base, &mut rng).unwrap();
        let json = serde_json::to_string(&sample.tree).unwrap();
        let back: LabeledTree = serde_json::from_str(&json).unwrap();
        assert_eq!(back, sample.tree);
    }

    #[test]
    fn malformed_trees_are_rejected() {
        // Root with a parent.
        assert!(LabeledTree::from_nodes(&[(Some(0), Spin::Plus, 1.0)]).is_err());
        // Second root.
        assert!(LabeledTree::from_nodes(&[
            (None, Spin::Plus, 1.0),
            (None, Spin::Plus, 1.0),
        ])
        .is_err());
        // Parent after child.
        assert!(LabeledTree::from_nodes(&[
            (None, Spin::Plus, 1.0),
            (Some(2), Spin::Plus, 1.0),
            (Some(0), Spin::Plus, 1.0),
        ])
        .is_err());
        // Depth order violated: node 3 at depth 1 after node 2 at depth 2.
        assert!(LabeledTree::from_nodes(&[
            (None, Spin::Plus, 1.0),
            (Some(0), Spin::Plus, 1.0),
            (Some(1), Spin::Plus, 1.0),
            (Some(0), Spin::Plus, 1.0),
        ])
        .is_err());
        // Bad weight.
        assert!(LabeledTree::from_nodes(&[(None, Spin::Plus, 0.0)]).is_err());
        // Valid two-generation tree.
        assert!(LabeledTree::from_nodes(&[
            (None, Spin::Plus, 1.0),
            (Some(0), Spin::Minus, 2.0),
            (Some(0), Spin::Plus, 1.0),
            (Some(1), Spin::Plus, 1.0),
        ])
        .is_ok());
    }

    #[test]
    fn broadcast_zero_noise_copies_the_root() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let sample = sample_branching_tree(&params_3_1(), 3, RootLaw::Base, &mut rng).unwrap();
        let labels = broadcast_labels(
            &sample.tree,
            BroadcastParams::new(0.0).unwrap(),
            &mut rng,
        );
        assert!(labels.iter().all(|&s| s == labels[0]));
    }

    #[test]
    fn broadcast_star_agreement_frequency() {
        let star = LabeledTree::from_nodes(&[
            (None, Spin::Plus, 1.0),
            (Some(0), Spin::Plus, 1.0),
            (Some(0), Spin::Plus, 1.0),
            (Some(0), Spin::Plus, 1.0),
        ])
        .unwrap();
        let noise = BroadcastParams::new(0.25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let trials = 40_000;
        let mut agree = 0u64;
        for _ in 0..trials {
            let labels = broadcast_labels(&star, noise, &mut rng);
            for &leaf in &labels[1..] {
                if leaf == labels[0] {
                    agree += 1;
                }
            }
        }
        let frac = agree as f64 / (3 * trials) as f64;
        let sigma = (0.75f64 * 0.25 / (3.0 * trials as f64)).sqrt();
        assert!((frac - 0.75).abs() < 4.0 * sigma, "agreement {frac}");
    }

    #[test]
    fn broadcast_epsilon_validation() {
        assert!(BroadcastParams::new(-0.1).is_err());
        assert!(BroadcastParams::new(1.0).is_err());
        assert!(BroadcastParams::new(0.0).is_ok());
        let params = params_3_1();
        assert!((BroadcastParams::from_rates(&params).unwrap().epsilon() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn with_spins_replaces_labels() {
        let tree = LabeledTree::from_nodes(&[
            (None, Spin::Plus, 1.0),
            (Some(0), Spin::Plus, 1.0),
        ])
        .unwrap();
        let relabeled = tree.with_spins(&[Spin::Minus, Spin::Plus]).unwrap();
        assert_eq!(relabeled.root().spin, Spin::Minus);
        assert!(tree.with_spins(&[Spin::Plus]).is_err());
    }

    #[test]
    fn boundary_observations_cover_the_generation() {
        let tree = LabeledTree::from_nodes(&[
            (None, Spin::Plus, 1.0),
            (Some(0), Spin::Minus, 1.0),
            (Some(0), Spin::Plus, 1.0),
        ])
        .unwrap();
        let boundary = boundary_observations(&tree, 1);
        assert_eq!(boundary, vec![(1, Spin::Minus), (2, Spin::Plus)]);
        assert!(boundary_observations(&tree, 5).is_empty());
    }

    #[test]
    fn sampling_is_deterministic_given_the_seed() {
        let params = params_3_1();
        let mut rng1 = ChaCha8Rng::seed_from_u64(10);
        let mut rng2 = ChaCha8Rng::seed_from_u64(10);
        let t1 = sample_branching_tree(&params, 3, RootLaw::Base, &mut rng1).unwrap();
        let t2 = sample_branching_tree(&params, 3, RootLaw::Base, &mut rng2).unwrap();
        assert_eq!(t1.tree, t2.tree);
    }
}
