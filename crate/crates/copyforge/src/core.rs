//! Shared domain types and the seeded-randomness contract.
//!
//! Every operation that consumes randomness takes an explicit [`RngSeed`];
//! there is no global RNG state anywhere in the crate. All types here are
//! immutable after construction and safe to share across threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A query point: one real-valued feature vector in standardized units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Point(coords)
    }
}

/// A hard class label: an integer in `[0, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label(pub usize);

impl Label {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A labelled dataset: the original training/test data `D = {(x_i, t_i)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub points: Vec<Point>,
    pub labels: Vec<Label>,
    /// Number of classes; every label is `< k`.
    pub k: usize,
    pub class_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(points: Vec<Point>, labels: Vec<Label>, k: usize) -> Result<Self> {
        let ds = Dataset {
            points,
            labels,
            k,
            class_names: None,
        };
        let violations = validate_dataset(&ds);
        if violations.is_empty() {
            Ok(ds)
        } else {
            Err(Error::InvalidArgument(violations.join("; ")))
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Point::dim)
    }

    /// Indices of all points carrying `label`.
    pub fn class_indices(&self, label: Label) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == label)
            .map(|(i, _)| i)
            .collect()
    }

    /// New dataset holding the given row indices, in order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            points: indices.iter().map(|&i| self.points[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            k: self.k,
            class_names: self.class_names.clone(),
        }
    }
}

/// Axis-aligned box defining the attribute representation `X`:
/// one closed interval per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub bounds: Vec<(f64, f64)>,
}

impl Domain {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidArgument("domain needs dimension >= 1".into()));
        }
        for (j, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidArgument(format!(
                    "domain bound {j} invalid: [{lo}, {hi}]"
                )));
            }
        }
        Ok(Domain { bounds })
    }

    /// Default box for standardized data: `[-3.5, 3.5]` per dimension.
    pub fn default_for_dim(d: usize) -> Self {
        Domain {
            bounds: vec![(-3.5, 3.5); d.max(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.dim() == self.dim()
            && p.0
                .iter()
                .zip(&self.bounds)
                .all(|(v, &(lo, hi))| (lo..=hi).contains(v))
    }
}

/// Seed for the deterministic RNG contract. Two calls with identical
/// inputs and the same seed produce bit-identical output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// A fixed-algorithm RNG; ChaCha8 streams are stable across
    /// platforms and releases.
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Derive an independent seed for a sub-task (SplitMix64 step over
    /// `seed ^ stream`).
    pub fn derive(self, stream: u64) -> RngSeed {
        let mut z = self.0 ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        RngSeed(z ^ (z >> 31))
    }
}

impl From<u64> for RngSeed {
    fn from(seed: u64) -> Self {
        RngSeed(seed)
    }
}

/// Check every [`Dataset`] invariant, returning one entry per violation.
/// Empty result means the dataset is well formed.
pub fn validate_dataset(dataset: &Dataset) -> Vec<String> {
    let mut violations = Vec::new();
    if dataset.points.is_empty() {
        violations.push("dataset has no points".to_string());
    }
    if dataset.points.len() != dataset.labels.len() {
        violations.push(format!(
            "length mismatch: {} points vs {} labels",
            dataset.points.len(),
            dataset.labels.len()
        ));
    }
    if dataset.k == 0 {
        violations.push("class count k is zero".to_string());
    }
    let d = dataset.dim();
    for (i, p) in dataset.points.iter().enumerate() {
        if p.dim() != d {
            violations.push(format!(
                "point {i} has dimension {} but point 0 has {d}",
                p.dim()
            ));
        }
        for (j, v) in p.0.iter().enumerate() {
            if !v.is_finite() {
                violations.push(format!("non-finite coordinate at ({i},{j})"));
            }
        }
    }
    for (i, l) in dataset.labels.iter().enumerate() {
        if l.0 >= dataset.k {
            violations.push(format!(
                "label {} at row {i} out of range for k={}",
                l.0, dataset.k
            ));
        }
    }
    if let Some(names) = &dataset.class_names {
        if names.len() != dataset.k {
            violations.push(format!(
                "{} class names for k={} classes",
                names.len(),
                dataset.k
            ));
        }
    }
    violations
}
