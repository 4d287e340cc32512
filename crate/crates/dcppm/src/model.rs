//! Weight laws, edge rates, and the signed-type calculus.
//!
//! A weight law is a finite-support distribution on positive vertex weights.
//! A signed type pairs a hidden spin with a weight; the kernel gives the
//! pairwise connection rate between two types before the 1/n sparsity
//! scaling, and the offspring law describes the children of a type in the
//! limiting branching process.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Hidden class label of a vertex or tree node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Spin {
    /// The opposite label.
    pub fn flip(self) -> Spin {
        match self {
            Spin::Plus => Spin::Minus,
            Spin::Minus => Spin::Plus,
        }
    }

    /// Numeric sign, +1 or -1.
    pub fn sign(self) -> f64 {
        match self {
            Spin::Plus => 1.0,
            Spin::Minus => -1.0,
        }
    }

    /// Uniformly random label.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Spin {
        if rng.random::<bool>() {
            Spin::Plus
        } else {
            Spin::Minus
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Spin::Plus => '+',
            Spin::Minus => '-',
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl FromStr for Spin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Spin> {
        match s {
            "+" => Ok(Spin::Plus),
            "-" => Ok(Spin::Minus),
            other => Err(Error::SpinParse(other.to_string())),
        }
    }
}

/// A spin paired with a positive weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedType {
    spin: Spin,
    weight: f64,
}

impl SignedType {
    /// Pairs a spin with a weight. The weight must be positive and finite.
    pub fn new(spin: Spin, weight: f64) -> SignedType {
        assert!(
            weight.is_finite() && weight > 0.0,
            "signed type weight must be positive and finite, got {weight}"
        );
        SignedType { spin, weight }
    }

    pub fn spin(self) -> Spin {
        self.spin
    }

    pub fn weight(self) -> f64 {
        self.weight
    }

    /// Signed value: weight with the spin's sign attached.
    pub fn value(self) -> f64 {
        self.spin.sign() * self.weight
    }
}

#[derive(Serialize, Deserialize)]
struct WeightLawRepr {
    atoms: Vec<(f64, f64)>,
}

/// Finite-support distribution on positive weights, kept in canonical form:
/// atoms sorted by weight, duplicate weights merged, zero-probability atoms
/// dropped, probabilities normalized to sum one. First and second moments
/// are cached at construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightLawRepr", into = "WeightLawRepr")]
pub struct WeightLaw {
    atoms: Vec<(f64, f64)>,
    cumulative: Vec<f64>,
    first_moment: f64,
    second_moment: f64,
}

impl WeightLaw {
    /// Builds the canonical form from (weight, probability) pairs. The
    /// probabilities may be given as unnormalized positive masses.
    pub fn new(atoms: &[(f64, f64)]) -> Result<WeightLaw> {
        if atoms.is_empty() {
            return Err(Error::EmptyWeightLaw);
        }
        for &(value, prob) in atoms {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::AtomValue(value));
            }
            if !(prob.is_finite() && prob >= 0.0) {
                return Err(Error::AtomProbability(prob));
            }
        }
        let mut sorted = atoms.to_vec();
        sorted.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("weights are finite"));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
        for (value, prob) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == value => last.1 += prob,
                _ => merged.push((value, prob)),
            }
        }
        merged.retain(|&(_, prob)| prob > 0.0);
        let total: f64 = merged.iter().map(|&(_, prob)| prob).sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::ZeroMassWeightLaw);
        }
        for atom in &mut merged {
            atom.1 /= total;
        }
        Ok(WeightLaw::from_canonical(merged))
    }

    /// Degenerate law putting all mass on one weight.
    pub fn point_mass(value: f64) -> Result<WeightLaw> {
        WeightLaw::new(&[(value, 1.0)])
    }

    /// Uniform law over the listed weights.
    pub fn uniform_over(values: &[f64]) -> Result<WeightLaw> {
        let atoms: Vec<(f64, f64)> = values.iter().map(|&v| (v, 1.0)).collect();
        WeightLaw::new(&atoms)
    }

    fn from_canonical(atoms: Vec<(f64, f64)>) -> WeightLaw {
        let first_moment = atoms.iter().map(|&(v, p)| v * p).sum();
        let second_moment = atoms.iter().map(|&(v, p)| v * v * p).sum();
        let mut cumulative = Vec::with_capacity(atoms.len());
        let mut acc = 0.0;
        for &(_, p) in &atoms {
            acc += p;
            cumulative.push(acc);
        }
        // Guard the sampler against rounding in the final partial sum.
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        WeightLaw {
            atoms,
            cumulative,
            first_moment,
            second_moment,
        }
    }

    /// Atoms as (weight, probability), sorted by weight.
    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_point_mass(&self) -> bool {
        self.atoms.len() == 1
    }

    pub fn min_weight(&self) -> f64 {
        self.atoms[0].0
    }

    pub fn max_weight(&self) -> f64 {
        self.atoms[self.atoms.len() - 1].0
    }

    /// Mean weight.
    pub fn first_moment(&self) -> f64 {
        self.first_moment
    }

    /// Mean squared weight.
    pub fn second_moment(&self) -> f64 {
        self.second_moment
    }

    /// The size-biased law: each atom's probability is reweighted by its
    /// weight and renormalized. Its mean is `second_moment / first_moment`.
    pub fn size_biased(&self) -> WeightLaw {
        let reweighted: Vec<(f64, f64)> =
            self.atoms.iter().map(|&(v, p)| (v, v * p)).collect();
        WeightLaw::new(&reweighted).expect("canonical atoms stay valid under reweighting")
    }

    /// Draws one weight.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        for (i, &c) in self.cumulative.iter().enumerate() {
            if u < c {
                return self.atoms[i].0;
            }
        }
        self.atoms[self.atoms.len() - 1].0
    }

    /// Index of the atom with exactly this weight, if any.
    pub fn atom_index(&self, weight: f64) -> Option<usize> {
        self.atoms.iter().position(|&(v, _)| v == weight)
    }
}

impl TryFrom<WeightLawRepr> for WeightLaw {
    type Error = Error;

    fn try_from(repr: WeightLawRepr) -> Result<WeightLaw> {
        WeightLaw::new(&repr.atoms)
    }
}

impl From<WeightLaw> for WeightLawRepr {
    fn from(law: WeightLaw) -> WeightLawRepr {
        WeightLawRepr { atoms: law.atoms }
    }
}

#[derive(Serialize, Deserialize)]
struct ModelParamsRepr {
    a: f64,
    b: f64,
    law: WeightLaw,
}

/// Model parameters: within-class rate `a`, across-class rate `b`, and the
/// weight law. Both rates must be finite and nonnegative; `a = b = 0` is
/// allowed and produces empty graphs and childless trees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelParamsRepr", into = "ModelParamsRepr")]
pub struct ModelParams {
    a: f64,
    b: f64,
    law: WeightLaw,
}

impl ModelParams {
    pub fn new(a: f64, b: f64, law: WeightLaw) -> Result<ModelParams> {
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::EdgeRate(a));
        }
        if !(b.is_finite() && b >= 0.0) {
            return Err(Error::EdgeRate(b));
        }
        Ok(ModelParams { a, b, law })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn law(&self) -> &WeightLaw {
        &self.law
    }

    /// Rate between two spins: `a` if they agree, `b` otherwise.
    pub fn edge_rate(&self, s: Spin, t: Spin) -> f64 {
        if s == t {
            self.a
        } else {
            self.b
        }
    }

    /// Pairwise connection rate between two types before the 1/n scaling.
    pub fn kernel(&self, x: SignedType, y: SignedType) -> f64 {
        x.weight() * y.weight() * self.edge_rate(x.spin(), y.spin())
    }

    /// Largest kernel value over the support.
    pub fn kappa_max(&self) -> f64 {
        self.a.max(self.b) * self.law.max_weight() * self.law.max_weight()
    }

    /// Smallest kernel value over the support.
    pub fn kappa_min(&self) -> f64 {
        self.a.min(self.b) * self.law.min_weight() * self.law.min_weight()
    }

    /// Expected number of children of a type in the limiting branching
    /// process: weight times (a + b)/2 times the mean weight.
    pub fn lambda_total(&self, x: SignedType) -> f64 {
        x.weight() * 0.5 * (self.a + self.b) * self.law.first_moment()
    }

    /// Mean offspring count of a non-root node: (a + b)/2 times the mean
    /// squared weight. This is the branching number of the limiting tree.
    pub fn offspring_mean(&self) -> f64 {
        0.5 * (self.a + self.b) * self.law.second_moment()
    }

    /// Probability that a child's spin differs from its parent's: b/(a + b).
    pub fn flip_probability(&self) -> Result<f64> {
        let total = self.a + self.b;
        if total <= 0.0 {
            return Err(Error::DegenerateRates);
        }
        Ok(self.b / total)
    }

    /// Law of one child's type given the parent type `x`: the child keeps
    /// the parent's spin with probability a/(a + b), and its weight is an
    /// independent draw from the size-biased weight law.
    pub fn offspring_type_law(&self, x: SignedType) -> Result<SignedTypeLaw> {
        let total = self.a + self.b;
        if total <= 0.0 {
            return Err(Error::DegenerateRates);
        }
        let same = self.a / total;
        let biased = self.law.size_biased();
        let mut atoms = Vec::with_capacity(2 * biased.atom_count());
        for spin in [Spin::Plus, Spin::Minus] {
            let spin_prob = if spin == x.spin() { same } else { 1.0 - same };
            for &(value, prob) in biased.atoms() {
                atoms.push((SignedType::new(spin, value), spin_prob * prob));
            }
        }
        Ok(SignedTypeLaw::from_atoms(atoms))
    }

    /// Law of a uniformly random vertex type: spin uniform on {+, -}, weight
    /// an independent draw from the weight law.
    pub fn base_type_law(&self) -> SignedTypeLaw {
        let mut atoms = Vec::with_capacity(2 * self.law.atom_count());
        for spin in [Spin::Plus, Spin::Minus] {
            for &(value, prob) in self.law.atoms() {
                atoms.push((SignedType::new(spin, value), 0.5 * prob));
            }
        }
        SignedTypeLaw::from_atoms(atoms)
    }

    /// The detectability statistic (a - b)^2 * (mean squared weight) divided
    /// by 2(a + b). Detection is impossible at or below one.
    pub fn kesten_stigum_stat(&self) -> Result<f64> {
        let total = self.a + self.b;
        if total <= 0.0 {
            return Err(Error::DegenerateRates);
        }
        let gap = self.a - self.b;
        Ok(gap * gap * self.law.second_moment() / (2.0 * total))
    }
}

impl TryFrom<ModelParamsRepr> for ModelParams {
    type Error = Error;

    fn try_from(repr: ModelParamsRepr) -> Result<ModelParams> {
        ModelParams::new(repr.a, repr.b, repr.law)
    }
}

impl From<ModelParams> for ModelParamsRepr {
    fn from(params: ModelParams) -> ModelParamsRepr {
        ModelParamsRepr {
            a: params.a,
            b: params.b,
            law: params.law,
        }
    }
}

/// Finite-support distribution on signed types. Atoms are stored spin-major
/// (all plus atoms by ascending weight, then all minus atoms) with strictly
/// positive probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedTypeLaw {
    atoms: Vec<(SignedType, f64)>,
    cumulative: Vec<f64>,
}

impl SignedTypeLaw {
    /// Internal constructor. Callers pass atoms in canonical order with
    /// probabilities summing to one; zero-probability atoms are dropped.
    pub(crate) fn from_atoms(atoms: Vec<(SignedType, f64)>) -> SignedTypeLaw {
        let atoms: Vec<(SignedType, f64)> =
            atoms.into_iter().filter(|&(_, p)| p > 0.0).collect();
        debug_assert!(
            (atoms.iter().map(|&(_, p)| p).sum::<f64>() - 1.0).abs() < 1e-9,
            "signed type law probabilities must sum to one"
        );
        let mut cumulative = Vec::with_capacity(atoms.len());
        let mut acc = 0.0;
        for &(_, p) in &atoms {
            acc += p;
            cumulative.push(acc);
        }
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        SignedTypeLaw { atoms, cumulative }
    }

    pub fn atoms(&self) -> &[(SignedType, f64)] {
        &self.atoms
    }

    /// Probability of exactly this type (zero if absent from the support).
    pub fn prob(&self, x: SignedType) -> f64 {
        self.atoms
            .iter()
            .find(|&&(t, _)| t.spin() == x.spin() && t.weight() == x.weight())
            .map(|&(_, p)| p)
            .unwrap_or(0.0)
    }

    /// Total mass carried by the given spin.
    pub fn spin_mass(&self, spin: Spin) -> f64 {
        self.atoms
            .iter()
            .filter(|&&(t, _)| t.spin() == spin)
            .map(|&(_, p)| p)
            .sum()
    }

    /// Draws one type.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SignedType {
        let u: f64 = rng.random();
        for (i, &c) in self.cumulative.iter().enumerate() {
            if u < c {
                return self.atoms[i].0;
            }
        }
        self.atoms[self.atoms.len() - 1].0
    }

    /// Exact total variation distance to another law on signed types.
    pub fn tv_distance(&self, other: &SignedTypeLaw) -> f64 {
        let mut diff: BTreeMap<(u8, u64), f64> = BTreeMap::new();
        for &(t, p) in &self.atoms {
            *diff.entry(type_key(t)).or_insert(0.0) += p;
        }
        for &(t, p) in &other.atoms {
            *diff.entry(type_key(t)).or_insert(0.0) -= p;
        }
        0.5 * diff.values().map(|d| d.abs()).sum::<f64>()
    }
}

fn type_key(t: SignedType) -> (u8, u64) {
    let spin = match t.spin() {
        Spin::Plus => 0u8,
        Spin::Minus => 1u8,
    };
    (spin, t.weight().to_bits())
}
