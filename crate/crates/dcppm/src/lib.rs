//! A simulation and inference laboratory for the degree-corrected
//! planted-partition model: two hidden vertex classes, i.i.d. finite-support
//! vertex weights, and sparse within/across-class edge rates `a` and `b`.
//!
//! Modules:
//! - [`model`]: weight laws, model parameters, signed types, and their
//!   offspring calculus.
//! - [`graph`]: graph sampling, BFS neighborhoods, component sizes, text IO.
//! - [`tree`]: the limiting two-type branching process and broadcast labels.
//! - [`coupling`]: exact reservoir and neighbour laws, the certified coupling
//!   radius, and the graph-versus-tree coupling experiment.
//! - [`inference`]: exact tree and graph posteriors, spectral bisection, and
//!   overlap scoring.
//! - [`experiments`]: expectation-matrix eigenvalue checks and threshold
//!   sweeps with deterministic CSV output.
//! - [`stats`]: shared Monte Carlo plumbing (intervals, total variation,
//!   bootstrap, chi-square, stable seed hashing).

pub mod coupling;
pub mod experiments;
pub mod graph;
pub mod inference;
pub mod model;
pub mod spectral;
pub mod stats;
pub mod tree;

/// Unified error type for constructors, samplers, and experiment drivers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("weight law needs at least one atom")]
    EmptyWeightLaw,
    #[error("weight atom value must be a positive finite number, got {0}")]
    AtomValue(f64),
    #[error("atom probability must be finite and nonnegative, got {0}")]
    AtomProbability(f64),
    #[error("weight law probabilities sum to zero")]
    ZeroMassWeightLaw,
    #[error("edge rate must be finite and nonnegative, got {0}")]
    EdgeRate(f64),
    #[error("edge rates a and b are both zero")]
    DegenerateRates,
    #[error("spin must be '+' or '-', got {0:?}")]
    SpinParse(String),
    #[error("graph needs at least one vertex")]
    EmptyGraph,
    #[error("edge probability cap {kappa_max} is at least n = {n}; increase n or shrink rates")]
    EdgeProbabilityOverflow { kappa_max: f64, n: usize },
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: u32, n: usize },
    #[error("invalid graph structure: {0}")]
    GraphStructure(String),
    #[error("graph file parse error at line {line}: {message}")]
    GraphFormat { line: usize, message: String },
    #[error("invalid tree encoding: {0}")]
    TreeFormat(String),
    #[error("tree population cap {cap} exceeded in {attempts} consecutive attempts")]
    PopulationCap { cap: usize, attempts: u32 },
    #[error("broadcast flip probability must lie in [0, 1), got {0}")]
    BroadcastEpsilon(f64),
    #[error("posterior flip probability must lie in [0, 1/2], got {0}")]
    PosteriorEpsilon(f64),
    #[error("observed spins must cover exactly the boundary generation, in index order")]
    BoundaryMismatch,
    #[error("observed boundary has zero likelihood under both root spins")]
    InconsistentBoundary,
    #[error("{n} vertices exceed the cap of {cap} for this operation")]
    TooManyVertices { n: usize, cap: usize },
    #[error("anchor list is invalid: {0}")]
    BadAnchor(String),
    #[error("posterior weights vanish for every configuration")]
    DegenerateEvidence,
    #[error("spin sequences have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("estimate is not a bisection (expected {expected} plus labels, found {found})")]
    NotABisection { expected: usize, found: usize },
    #[error("need at least two vertices estimated plus, found {0}")]
    TooFewPlusEstimates(usize),
    #[error("coupling radius is undefined for 2*kappa_max <= 1 (kappa_max = {0})")]
    RadiusUndefined(f64),
    #[error("safety factor must lie in (0, 1], got {0}")]
    SafetyFactor(f64),
    #[error("need at least one trial")]
    ZeroTrials,
    #[error("sweep config invalid: {0}")]
    SweepConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
