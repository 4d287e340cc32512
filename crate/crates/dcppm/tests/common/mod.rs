//! Shared helpers for the integration suites: an independent enumeration
//! oracle for the tree posterior and generators for random trees, laws,
//! and parameters.

// Each integration target compiles this module separately and uses its own
// subset of the helpers.
#![allow(dead_code)]

use dcppm::model::{ModelParams, Spin, WeightLaw};
use dcppm::tree::LabeledTree;
use rand::Rng;

/// Exhaustive root posterior on a small tree: sums the joint weight of
/// every spin assignment of the non-boundary nodes, with boundary spins
/// pinned to `observed`. Nodes below the boundary are summed over rather
/// than skipped, so this shares no structure with the message-passing
/// implementation. Returns the probability that the root is plus, or
/// `None` when no assignment is consistent with the evidence.
pub fn enumeration_root_posterior(
    tree: &LabeledTree,
    boundary_depth: u32,
    observed: &[Spin],
    epsilon: f64,
) -> Option<f64> {
    let boundary = tree.generation_range(boundary_depth);
    assert_eq!(observed.len(), boundary.len(), "oracle misuse");
    let free: Vec<usize> = (0..tree.len()).filter(|i| !boundary.contains(i)).collect();
    assert!(free.len() <= 20, "oracle is exponential in free nodes");
    let mut z_plus = 0.0;
    let mut z_minus = 0.0;
    let mut spins = vec![Spin::Plus; tree.len()];
    for (slot, node) in boundary.clone().enumerate() {
        spins[node] = observed[slot];
    }
    for mask in 0u32..(1 << free.len()) {
        for (bit, &node) in free.iter().enumerate() {
            spins[node] = if mask >> bit & 1 == 1 {
                Spin::Plus
            } else {
                Spin::Minus
            };
        }
        let mut weight = 1.0;
        for i in 1..tree.len() {
            let parent = tree.node(i).parent.expect("non-root node") as usize;
            weight *= if spins[parent] == spins[i] {
                1.0 - epsilon
            } else {
                epsilon
            };
        }
        if spins[0] == Spin::Plus {
            z_plus += weight;
        } else {
            z_minus += weight;
        }
    }
    let total = z_plus + z_minus;
    (total > 0.0).then(|| z_plus / total)
}

/// A random generation-major tree with at most `max_nodes` nodes: each new
/// generation draws its size and attaches every node to a uniformly random
/// parent in the previous generation. Spins and weights are uniform noise,
/// unrelated to any broadcast process.
pub fn random_shape_tree<R: Rng>(rng: &mut R, max_nodes: usize, law: &WeightLaw) -> LabeledTree {
    let total = rng.random_range(1..=max_nodes);
    let mut raw: Vec<(Option<u32>, Spin, f64)> =
        vec![(None, Spin::sample(rng), law.sample(rng))];
    let mut previous: Vec<u32> = vec![0];
    while raw.len() < total {
        let budget = total - raw.len();
        let size = rng.random_range(1..=budget);
        let mut current = Vec::with_capacity(size);
        for _ in 0..size {
            let parent = previous[rng.random_range(0..previous.len())];
            current.push(raw.len() as u32);
            raw.push((Some(parent), Spin::sample(rng), law.sample(rng)));
        }
        previous = current;
    }
    LabeledTree::from_nodes(&raw).expect("generation-major construction")
}

/// A random finite weight law with one to three atoms.
pub fn random_weight_law<R: Rng>(rng: &mut R) -> WeightLaw {
    let atom_count = rng.random_range(1..=3);
    let atoms: Vec<(f64, f64)> = (0..atom_count)
        .map(|_| {
            (
                rng.random_range(0.2..3.0),
                rng.random_range(0.1..1.0),
            )
        })
        .collect();
    WeightLaw::new(&atoms).expect("atoms are valid by construction")
}

/// Random supercritical-ish parameters with a >= b, kept small enough that
/// modest graphs respect the edge-probability cap.
pub fn random_small_params<R: Rng>(rng: &mut R) -> ModelParams {
    let law = WeightLaw::uniform_over(&[
        rng.random_range(0.5..0.9),
        rng.random_range(0.9..1.2),
    ])
    .expect("two positive atoms");
    let b = rng.random_range(0.3..1.0);
    let a = b + rng.random_range(0.0..1.0);
    ModelParams::new(a, b, law).expect("positive rates")
}
