//! Shared statistics plumbing: summary intervals, plug-in total variation
//! between empirical discrete distributions with bootstrap confidence
//! intervals, a two-sample chi-square test, and a stable seed hash.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Two-sided 95% normal quantile used throughout.
pub const Z_95: f64 = 1.96;

/// Discrete statistic value; histograms key on these.
pub type StatKey = Vec<u32>;

/// Arithmetic mean; zero on empty input.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation with the n - 1 denominator; zero below two
/// observations.
pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|&x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// A point estimate with a symmetric 95% interval.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Interval95 {
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Standard-error interval for the mean: mean +/- 1.96 sd / sqrt(n).
pub fn mean_ci95(xs: &[f64]) -> Interval95 {
    let m = mean(xs);
    let half = if xs.is_empty() {
        0.0
    } else {
        Z_95 * sample_sd(xs) / (xs.len() as f64).sqrt()
    };
    Interval95 {
        mean: m,
        lower: m - half,
        upper: m + half,
    }
}

/// Dispersion band for individual observations: mean +/- 1.96 sd. Unlike
/// [`mean_ci95`] this does not shrink with the sample count; it describes
/// where single draws fall.
pub fn dispersion_band95(xs: &[f64]) -> Interval95 {
    let m = mean(xs);
    let half = Z_95 * sample_sd(xs);
    Interval95 {
        mean: m,
        lower: m - half,
        upper: m + half,
    }
}

/// Histogram of discrete statistic values.
#[derive(Clone, Debug, Default)]
pub struct KeyedSample {
    counts: BTreeMap<StatKey, u64>,
    total: u64,
}

impl KeyedSample {
    pub fn new() -> KeyedSample {
        KeyedSample::default()
    }

    pub fn from_keys<I: IntoIterator<Item = StatKey>>(keys: I) -> KeyedSample {
        let mut sample = KeyedSample::new();
        for key in keys {
            sample.push(key);
        }
        sample
    }

    pub fn push(&mut self, key: StatKey) {
        *self.counts.entry(key).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &BTreeMap<StatKey, u64> {
        &self.counts
    }

    fn frequencies_over(&self, keys: &[StatKey]) -> Vec<f64> {
        keys.iter()
            .map(|k| *self.counts.get(k).unwrap_or(&0) as f64 / self.total as f64)
            .collect()
    }
}

fn union_keys(p: &KeyedSample, q: &KeyedSample) -> Vec<StatKey> {
    let mut keys: Vec<StatKey> = p.counts.keys().cloned().collect();
    for k in q.counts.keys() {
        if !p.counts.contains_key(k) {
            keys.push(k.clone());
        }
    }
    keys.sort();
    keys
}

/// Plug-in total variation distance between two empirical distributions.
/// Both samples must be nonempty.
pub fn tv_distance(p: &KeyedSample, q: &KeyedSample) -> f64 {
    assert!(p.total > 0 && q.total > 0, "tv_distance needs nonempty samples");
    let keys = union_keys(p, q);
    let fp = p.frequencies_over(&keys);
    let fq = q.frequencies_over(&keys);
    0.5 * fp
        .iter()
        .zip(fq.iter())
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
}

/// Draws multinomial counts with the cell probabilities implied by `counts`,
/// using a chain of binomials so the draw is deterministic given the rng.
fn resample_counts<R: Rng + ?Sized>(counts: &[u64], total: u64, rng: &mut R) -> Vec<u64> {
    let mut out = Vec::with_capacity(counts.len());
    let mut remaining_n = total;
    let mut remaining_mass = total as f64;
    for (i, &c) in counts.iter().enumerate() {
        if i + 1 == counts.len() {
            out.push(remaining_n);
            break;
        }
        if remaining_n == 0 || remaining_mass <= 0.0 {
            out.push(0);
            continue;
        }
        let p = (c as f64 / remaining_mass).clamp(0.0, 1.0);
        let draw = Binomial::new(remaining_n, p)
            .expect("binomial arguments are valid")
            .sample(rng);
        out.push(draw);
        remaining_n -= draw;
        remaining_mass -= c as f64;
    }
    out
}

/// Percentile bootstrap 95% interval for the plug-in total variation
/// distance, resampling both histograms independently.
pub fn bootstrap_tv_ci95<R: Rng + ?Sized>(
    p: &KeyedSample,
    q: &KeyedSample,
    resamples: usize,
    rng: &mut R,
) -> (f64, f64) {
    assert!(resamples >= 2, "need at least two bootstrap resamples");
    let keys = union_keys(p, q);
    let pc: Vec<u64> = keys.iter().map(|k| *p.counts.get(k).unwrap_or(&0)).collect();
    let qc: Vec<u64> = keys.iter().map(|k| *q.counts.get(k).unwrap_or(&0)).collect();
    let mut tvs = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let rp = resample_counts(&pc, p.total, rng);
        let rq = resample_counts(&qc, q.total, rng);
        let tv = 0.5
            * rp.iter()
                .zip(rq.iter())
                .map(|(&x, &y)| (x as f64 / p.total as f64 - y as f64 / q.total as f64).abs())
                .sum::<f64>();
        tvs.push(tv);
    }
    tvs.sort_by(|x, y| x.partial_cmp(y).expect("tv values are finite"));
    let pick = |q: f64| tvs[((tvs.len() - 1) as f64 * q).round() as usize];
    (pick(0.025), pick(0.975))
}

/// Result of a two-sample chi-square homogeneity test.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Two-sample chi-square test on pooled cells. Cells whose smaller expected
/// count falls below `min_expected` are merged into one bucket. Returns None
/// when fewer than two cells remain.
pub fn chi_square_two_sample(
    p: &KeyedSample,
    q: &KeyedSample,
    min_expected: f64,
) -> Option<ChiSquareTest> {
    assert!(p.total > 0 && q.total > 0, "chi-square needs nonempty samples");
    let keys = union_keys(p, q);
    let n1 = p.total as f64;
    let n2 = q.total as f64;
    let grand = n1 + n2;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0f64, 0.0f64);
    for k in &keys {
        let o1 = *p.counts.get(k).unwrap_or(&0) as f64;
        let o2 = *q.counts.get(k).unwrap_or(&0) as f64;
        let row = o1 + o2;
        let min_exp = (row * n1 / grand).min(row * n2 / grand);
        if min_exp < min_expected {
            pooled.0 += o1;
            pooled.1 += o2;
        } else {
            cells.push((o1, o2));
        }
    }
    if pooled.0 + pooled.1 > 0.0 {
        cells.push(pooled);
    }
    if cells.len() < 2 {
        return None;
    }
    let mut statistic = 0.0;
    for &(o1, o2) in &cells {
        let row = o1 + o2;
        let e1 = row * n1 / grand;
        let e2 = row * n2 / grand;
        statistic += (o1 - e1) * (o1 - e1) / e1 + (o2 - e2) * (o2 - e2) / e2;
    }
    let dof = cells.len() - 1;
    let dist = ChiSquared::new(dof as f64).expect("dof is positive");
    let p_value = dist.sf(statistic);
    Some(ChiSquareTest {
        statistic,
        dof,
        p_value,
    })
}

/// Stable 64-bit hash of a part list, built from the splitmix64 finalizer.
/// The algorithm is fixed here so seeds derived from it stay reproducible
/// across platforms and releases.
pub fn stable_hash64(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x9E37_79B9_7F4A_7C15;
    for &part in parts {
        h = splitmix64(h.wrapping_add(part));
    }
    h
}

fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
