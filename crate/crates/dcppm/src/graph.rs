//! Graph sampling, BFS neighborhoods, component sizes, and text IO.
//!
//! Given spins and weights, every unordered vertex pair {u, v} carries an
//! independent edge with probability w_u * w_v * rate / n, where the rate is
//! `a` for equal spins and `b` otherwise. Two samplers realize this law: a
//! per-row skip sampler for moderate n, and a class-pair binomial sampler
//! that scales to large n by grouping vertices with equal (spin, weight).

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::model::{ModelParams, Spin};
use crate::tree::LabeledTree;
use crate::{Error, Result};

/// Above this vertex count the automatic method switches from the per-row
/// sampler to the class-pair binomial sampler.
pub const PAIRWISE_SAMPLING_MAX_N: usize = 20_000;

/// How the edge set is drawn. Both methods sample the same distribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeSampling {
    /// Pick by graph size.
    Auto,
    /// Row-by-row skip sampling with acceptance thinning.
    PairwiseBernoulli,
    /// Binomial edge counts per (spin, weight)-class pair.
    ClassBinomial,
}

/// An undirected graph with a spin and a weight on every vertex. Adjacency
/// lists are kept sorted; edges are unordered pairs without multiplicity.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledGraph {
    spins: Vec<Spin>,
    weights: Vec<f64>,
    adjacency: Vec<Vec<u32>>,
    edge_count: usize,
}

impl LabeledGraph {
    /// Assembles a graph from labels and an edge list, rejecting self-loops,
    /// duplicate edges, out-of-range endpoints, and invalid weights.
    pub fn from_parts(
        spins: Vec<Spin>,
        weights: Vec<f64>,
        edges: &[(u32, u32)],
    ) -> Result<LabeledGraph> {
        let n = spins.len();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if weights.len() != n {
            return Err(Error::LengthMismatch(spins.len(), weights.len()));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::GraphStructure(format!(
                    "vertex {i} has invalid weight {w}"
                )));
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u as usize >= n {
                return Err(Error::VertexOutOfRange { vertex: u, n });
            }
            if v as usize >= n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
            if u == v {
                return Err(Error::GraphStructure(format!("self-loop at vertex {u}")));
            }
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
        for (u, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::GraphStructure(format!(
                    "duplicate edge at vertex {u}"
                )));
            }
        }
        Ok(LabeledGraph {
            spins,
            weights,
            adjacency,
            edge_count: edges.len(),
        })
    }

    pub fn n(&self) -> usize {
        self.spins.len()
    }

    pub fn spin(&self, u: u32) -> Spin {
        self.spins[u as usize]
    }

    pub fn weight(&self, u: u32) -> f64 {
        self.weights[u as usize]
    }

    pub fn spins(&self) -> &[Spin] {
        &self.spins
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn degree(&self, u: u32) -> usize {
        self.adjacency[u as usize].len()
    }

    /// Neighbors of `u` in ascending order.
    pub fn neighbors(&self, u: u32) -> &[u32] {
        &self.adjacency[u as usize]
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adjacency[u as usize].binary_search(&v).is_ok()
    }

    /// All edges as (u, v) with u < v, sorted.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (u, list) in self.adjacency.iter().enumerate() {
            for &v in list {
                if v > u as u32 {
                    out.push((u as u32, v));
                }
            }
        }
        out
    }

    /// Writes the text format: a header line `n a b`, one `id spin weight`
    /// line per vertex, then one `u v` line per edge with u < v.
    pub fn write_text<W: Write>(&self, a: f64, b: f64, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "{} {} {}", self.n(), a, b)?;
        for (i, (&spin, &weight)) in self.spins.iter().zip(&self.weights).enumerate() {
            writeln!(out, "{i} {spin} {weight}")?;
        }
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }

    /// Parses the text format written by [`LabeledGraph::write_text`] and
    /// returns the graph with the header rates.
    pub fn read_text<R: BufRead>(reader: R) -> Result<(LabeledGraph, f64, f64)> {
        let mut lines = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if !line.trim().is_empty() {
                lines.push((i + 1, line));
            }
        }
        if lines.is_empty() {
            return Err(Error::GraphFormat {
                line: 1,
                message: "missing header".into(),
            });
        }
        let (header_line, header) = &lines[0];
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::GraphFormat {
                line: *header_line,
                message: "header must be 'n a b'".into(),
            });
        }
        let n: usize = parse_field(fields[0], *header_line, "vertex count")?;
        let a: f64 = parse_field(fields[1], *header_line, "rate a")?;
        let b: f64 = parse_field(fields[2], *header_line, "rate b")?;
        if lines.len() < 1 + n {
            return Err(Error::GraphFormat {
                line: lines.last().map(|&(l, _)| l).unwrap_or(1),
                message: format!("expected {n} vertex lines"),
            });
        }
        let mut spins = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (i, &(line_no, ref line)) in lines[1..1 + n].iter().enumerate() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::GraphFormat {
                    line: line_no,
                    message: "vertex line must be 'id spin weight'".into(),
                });
            }
            let id: usize = parse_field(fields[0], line_no, "vertex id")?;
            if id != i {
                return Err(Error::GraphFormat {
                    line: line_no,
                    message: format!("vertex ids must be sequential, expected {i} got {id}"),
                });
            }
            let spin: Spin = fields[1].parse().map_err(|e| Error::GraphFormat {
                line: line_no,
                message: format!("{e}"),
            })?;
            let weight: f64 = parse_field(fields[2], line_no, "weight")?;
            spins.push(spin);
            weights.push(weight);
        }
        let mut edges = Vec::new();
        for &(line_no, ref line) in &lines[1 + n..] {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(Error::GraphFormat {
                    line: line_no,
                    message: "edge line must be 'u v'".into(),
                });
            }
            let u: u32 = parse_field(fields[0], line_no, "edge endpoint")?;
            let v: u32 = parse_field(fields[1], line_no, "edge endpoint")?;
            edges.push((u, v));
        }
        let graph = LabeledGraph::from_parts(spins, weights, &edges)?;
        Ok((graph, a, b))
    }

    /// Writes the text format to a file.
    pub fn save<P: AsRef<Path>>(&self, path: P, a: f64, b: f64) -> Result<()> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_text(a, b, &mut file)?;
        Ok(())
    }

    /// Reads the text format from a file.
    pub fn load<P: AsRef<Path>>(path: P) -> Result<(LabeledGraph, f64, f64)> {
        let file = BufReader::new(std::fs::File::open(path)?);
        LabeledGraph::read_text(file)
    }
}

fn parse_field<T: std::str::FromStr>(field: &str, line: usize, what: &str) -> Result<T> {
    field.parse().map_err(|_| Error::GraphFormat {
        line,
        message: format!("cannot parse {what} from {field:?}"),
    })
}

/// Samples a graph: uniform spins, i.i.d. weights, independent edges, with
/// the sampling method picked by size.
pub fn sample_dcppm<R: Rng + ?Sized>(
    n: usize,
    params: &ModelParams,
    rng: &mut R,
) -> Result<LabeledGraph> {
    sample_dcppm_with(n, params, EdgeSampling::Auto, rng)
}

/// Samples a graph with an explicit edge-sampling method.
pub fn sample_dcppm_with<R: Rng + ?Sized>(
    n: usize,
    params: &ModelParams,
    method: EdgeSampling,
    rng: &mut R,
) -> Result<LabeledGraph> {
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let spins: Vec<Spin> = (0..n).map(|_| Spin::sample(rng)).collect();
    let weights: Vec<f64> = (0..n).map(|_| params.law().sample(rng)).collect();
    let edges = sample_edges_given_labels(&spins, &weights, params, method, rng)?;
    LabeledGraph::from_parts(spins, weights, &edges)
}

/// Draws the edge set conditional on fixed labels. Exposed so conditional
/// distribution tests can compare the two methods on identical labels.
pub fn sample_edges_given_labels<R: Rng + ?Sized>(
    spins: &[Spin],
    weights: &[f64],
    params: &ModelParams,
    method: EdgeSampling,
    rng: &mut R,
) -> Result<Vec<(u32, u32)>> {
    let n = spins.len();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if weights.len() != n {
        return Err(Error::LengthMismatch(spins.len(), weights.len()));
    }
    let max_weight = weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let cap = params.a().max(params.b()) * max_weight * max_weight;
    if cap >= n as f64 && cap > 0.0 {
        return Err(Error::EdgeProbabilityOverflow { kappa_max: cap, n });
    }
    let method = match method {
        EdgeSampling::Auto => {
            if n <= PAIRWISE_SAMPLING_MAX_N {
                EdgeSampling::PairwiseBernoulli
            } else {
                EdgeSampling::ClassBinomial
            }
        }
        explicit => explicit,
    };
    let edges = match method {
        EdgeSampling::PairwiseBernoulli => {
            pairwise_bernoulli(spins, weights, params, max_weight, rng)
        }
        EdgeSampling::ClassBinomial => class_binomial(spins, weights, params, rng),
        EdgeSampling::Auto => unreachable!("resolved above"),
    };
    Ok(edges)
}

/// Row sampler. For each vertex u the candidate positions v > u follow a
/// Bernoulli(cap_u) skip process with cap_u an upper bound on every edge
/// probability in the row; candidates are then kept with probability
/// p_uv / cap_u. Thinning a Bernoulli process this way reproduces
/// independent edges with the exact probabilities.
fn pairwise_bernoulli<R: Rng + ?Sized>(
    spins: &[Spin],
    weights: &[f64],
    params: &ModelParams,
    max_weight: f64,
    rng: &mut R,
) -> Vec<(u32, u32)> {
    let n = spins.len();
    let rate_max = params.a().max(params.b());
    let mut edges = Vec::new();
    for u in 0..n.saturating_sub(1) {
        let cap = weights[u] * max_weight * rate_max / n as f64;
        if cap <= 0.0 {
            continue;
        }
        if cap >= 0.99 {
            // Dense row: plain Bernoulli per pair.
            for v in u + 1..n {
                let p = weights[u] * weights[v] * params.edge_rate(spins[u], spins[v])
                    / n as f64;
                if rng.random::<f64>() < p {
                    edges.push((u as u32, v as u32));
                }
            }
            continue;
        }
        let ln_stay = (-cap).ln_1p();
        let mut v = u;
        loop {
            let draw: f64 = rng.random();
            let skip = (draw.ln() / ln_stay).floor();
            if !skip.is_finite() || skip >= (n - v) as f64 {
                break;
            }
            v += 1 + skip as usize;
            if v >= n {
                break;
            }
            let accept = (weights[v] / max_weight)
                * (params.edge_rate(spins[u], spins[v]) / rate_max);
            if rng.random::<f64>() < accept {
                edges.push((u as u32, v as u32));
            }
        }
    }
    edges
}

/// Class sampler. Vertices with equal (spin, weight) share one edge
/// probability, so the edge count between two classes is binomial; the
/// edges are then placed uniformly without repetition.
fn class_binomial<R: Rng + ?Sized>(
    spins: &[Spin],
    weights: &[f64],
    params: &ModelParams,
    rng: &mut R,
) -> Vec<(u32, u32)> {
    let n = spins.len();
    let mut classes: BTreeMap<(u8, u64), Vec<u32>> = BTreeMap::new();
    for i in 0..n {
        let key = (
            match spins[i] {
                Spin::Plus => 0u8,
                Spin::Minus => 1u8,
            },
            weights[i].to_bits(),
        );
        classes.entry(key).or_default().push(i as u32);
    }
    let class_list: Vec<(Spin, f64, Vec<u32>)> = classes
        .into_iter()
        .map(|((s, w), members)| {
            let spin = if s == 0 { Spin::Plus } else { Spin::Minus };
            (spin, f64::from_bits(w), members)
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..class_list.len() {
        for j in i..class_list.len() {
            let (spin_i, weight_i, members_i) = &class_list[i];
            let (spin_j, weight_j, members_j) = &class_list[j];
            let p = weight_i * weight_j * params.edge_rate(*spin_i, *spin_j) / n as f64;
            if p <= 0.0 {
                continue;
            }
            let pair_count = if i == j {
                let m = members_i.len() as u64;
                m * (m - 1) / 2
            } else {
                members_i.len() as u64 * members_j.len() as u64
            };
            if pair_count == 0 {
                continue;
            }
            let draw = Binomial::new(pair_count, p.min(1.0))
                .expect("binomial arguments are valid")
                .sample(rng);
            let mut placed: HashSet<(u32, u32)> = HashSet::with_capacity(draw as usize);
            while (placed.len() as u64) < draw {
                let (x, y) = if i == j {
                    let m = members_i.len();
                    let x = rng.random_range(0..m);
                    let mut y = rng.random_range(0..m - 1);
                    if y >= x {
                        y += 1;
                    }
                    (members_i[x], members_i[y])
                } else {
                    (
                        members_i[rng.random_range(0..members_i.len())],
                        members_j[rng.random_range(0..members_j.len())],
                    )
                };
                let edge = (x.min(y), x.max(y));
                placed.insert(edge);
            }
            let mut batch: Vec<(u32, u32)> = placed.into_iter().collect();
            batch.sort_unstable();
            edges.extend(batch);
        }
    }
    edges
}

/// A BFS ball extracted from a graph, shaped as a labeled tree, plus a flag
/// recording whether the ball failed to be a tree (a cross edge or a shared
/// child was found inside it).
#[derive(Clone, Debug)]
pub struct LabeledNeighborhood {
    pub tree: LabeledTree,
    pub root_vertex: u32,
    pub radius: u32,
    pub truncated: bool,
}

/// Extracts the radius-r BFS ball around `root`. Vertices at equal distance
/// are visited in ascending id order, and a vertex reachable from several
/// frontier vertices is attached to the smallest-id one.
pub fn neighborhood(
    graph: &LabeledGraph,
    root: u32,
    radius: u32,
) -> Result<LabeledNeighborhood> {
    let n = graph.n();
    if root as usize >= n {
        return Err(Error::VertexOutOfRange { vertex: root, n });
    }
    const UNSEEN: u32 = u32::MAX;
    let mut depth_of = vec![UNSEEN; n];
    let mut parent_of = vec![UNSEEN; n];
    let mut tree_index = vec![UNSEEN; n];
    depth_of[root as usize] = 0;
    tree_index[root as usize] = 0;
    let mut raw: Vec<(Option<u32>, Spin, f64)> =
        vec![(None, graph.spin(root), graph.weight(root))];
    let mut ball = vec![root];
    let mut frontier = vec![root];
    for d in 0..radius {
        let mut next = Vec::new();
        for &u in &frontier {
            for &v in graph.neighbors(u) {
                if depth_of[v as usize] == UNSEEN {
                    depth_of[v as usize] = d + 1;
                    parent_of[v as usize] = u;
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort_unstable();
        for &v in &next {
            let parent_tree = tree_index[parent_of[v as usize] as usize];
            tree_index[v as usize] = raw.len() as u32;
            raw.push((Some(parent_tree), graph.spin(v), graph.weight(v)));
        }
        ball.extend_from_slice(&next);
        frontier = next;
    }
    // The ball is a tree exactly when its induced edge count is one less
    // than its vertex count.
    let mut induced_edges = 0usize;
    for &u in &ball {
        for &v in graph.neighbors(u) {
            if v > u && depth_of[v as usize] != UNSEEN {
                induced_edges += 1;
            }
        }
    }
    let truncated = induced_edges != ball.len() - 1;
    let tree = LabeledTree::from_nodes(&raw).expect("BFS construction is generation-major");
    Ok(LabeledNeighborhood {
        tree,
        root_vertex: root,
        radius,
        truncated,
    })
}

/// Fraction of vertices in the largest connected component.
pub fn largest_component_fraction(graph: &LabeledGraph) -> f64 {
    let n = graph.n();
    let mut seen = vec![false; n];
    let mut stack = Vec::new();
    let mut largest = 0usize;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start as u32);
        let mut size = 0usize;
        while let Some(u) = stack.pop() {
            size += 1;
            for &v in graph.neighbors(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    stack.push(v);
                }
            }
        }
        largest = largest.max(size);
    }
    largest as f64 / n as f64
}
