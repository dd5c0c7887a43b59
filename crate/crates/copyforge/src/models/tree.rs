//! CART-style decision tree classifier.
//!
//! Splits minimize weighted Gini impurity of the children; thresholds are
//! midpoints between sorted adjacent distinct feature values. Ties between
//! equally good splits resolve to the lowest feature index, then the lowest
//! threshold. With no depth cap the tree grows until every leaf is pure (or
//! featureless), so any label-consistent training set is fit exactly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core::{Label, Point};
use crate::error::{Error, Result};

/// One node of the flattened tree. Children are indices into
/// [`TreeModel::nodes`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        label: Label,
    },
}

/// Binary axis-aligned decision tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub nodes: Vec<TreeNode>,
    pub dim: usize,
    pub k: usize,
    pub max_depth: Option<usize>,
}

impl TreeModel {
    pub fn predict_one(&self, point: &Point) -> Label {
        let mut idx = 0usize;
        loop {
            match &self.nodes[idx] {
                TreeNode::Leaf { label } => return *label,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if point.0[*feature] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        // Iterative because grown trees can be deep.
        let mut best = 0usize;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((idx, d)) = stack.pop() {
            match &self.nodes[idx] {
                TreeNode::Leaf { .. } => best = best.max(d),
                TreeNode::Split { left, right, .. } => {
                    stack.push((*left as usize, d + 1));
                    stack.push((*right as usize, d + 1));
                }
            }
        }
        best
    }
}

/// Candidate split for one node.
#[derive(Debug, Clone, Copy)]
struct Split {
    feature: usize,
    threshold: f64,
    /// Sum over children of (sum of squared class counts) / child size.
    /// Maximizing this minimizes the weighted Gini impurity.
    score: f64,
}

/// Train a CART tree. `max_depth: None` grows to purity.
pub fn train_tree(
    points: &[Point],
    labels: &[Label],
    k: usize,
    max_depth: Option<usize>,
) -> Result<TreeModel> {
    let dim = check_training_data(points, labels, k)?;
    let allowed: Vec<usize> = (0..dim).collect();
    let nodes = grow(points, labels, k, max_depth, &allowed);
    Ok(TreeModel {
        nodes,
        dim,
        k,
        max_depth,
    })
}

pub(crate) fn check_training_data(points: &[Point], labels: &[Label], k: usize) -> Result<usize> {
    if points.is_empty() {
        return Err(Error::EmptyInput("training points"));
    }
    if points.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: points.len(),
            right: labels.len(),
        });
    }
    let dim = points[0].dim();
    for p in points {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.dim(),
            });
        }
    }
    for l in labels {
        if l.0 >= k {
            return Err(Error::LabelOutOfRange { label: l.0, k });
        }
    }
    Ok(dim)
}

/// Grow a tree over `allowed` feature indices only (forests restrict this).
pub(crate) fn grow(
    points: &[Point],
    labels: &[Label],
    k: usize,
    max_depth: Option<usize>,
    allowed: &[usize],
) -> Vec<TreeNode> {
    let mut nodes: Vec<TreeNode> = Vec::new();
    let all: Vec<u32> = (0..points.len() as u32).collect();
    // Worklist of (node slot, member indices, depth); explicit because
    // degenerate splits can chain O(n) deep.
    nodes.push(TreeNode::Leaf { label: Label(0) });
    let mut work: Vec<(usize, Vec<u32>, usize)> = vec![(0, all, 0)];

    while let Some((slot, members, depth)) = work.pop() {
        let counts = class_counts(labels, &members, k);
        let majority = majority_label(&counts);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_ok = max_depth.map_or(true, |cap| depth < cap);

        let split = if pure || !depth_ok {
            None
        } else {
            best_split(points, labels, &members, k, allowed)
        };

        match split {
            None => {
                nodes[slot] = TreeNode::Leaf { label: majority };
            }
            Some(s) => {
                let (left_members, right_members): (Vec<u32>, Vec<u32>) = members
                    .iter()
                    .partition(|&&i| points[i as usize].0[s.feature] <= s.threshold);
                debug_assert!(!left_members.is_empty() && !right_members.is_empty());
                let left = nodes.len() as u32;
                nodes.push(TreeNode::Leaf { label: Label(0) });
                let right = nodes.len() as u32;
                nodes.push(TreeNode::Leaf { label: Label(0) });
                nodes[slot] = TreeNode::Split {
                    feature: s.feature,
                    threshold: s.threshold,
                    left,
                    right,
                };
                work.push((left as usize, left_members, depth + 1));
                work.push((right as usize, right_members, depth + 1));
            }
        }
    }
    nodes
}

fn class_counts(labels: &[Label], members: &[u32], k: usize) -> Vec<u64> {
    let mut counts = vec![0u64; k];
    for &i in members {
        counts[labels[i as usize].0] += 1;
    }
    counts
}

/// Majority class, ties to the lowest index.
fn majority_label(counts: &[u64]) -> Label {
    let mut best = 0usize;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    Label(best)
}

/// Best split over the allowed features, or None when every allowed
/// feature is constant on the node. An impure node with any non-constant
/// feature always yields a split, even at zero impurity decrease;
/// otherwise XOR-like label patterns would stall before reaching purity.
fn best_split(
    points: &[Point],
    labels: &[Label],
    members: &[u32],
    k: usize,
    allowed: &[usize],
) -> Option<Split> {
    let n = members.len();
    let total_counts = class_counts(labels, members, k);

    let per_feature: Vec<Option<Split>> = allowed
        .par_iter()
        .map(|&feature| scan_feature(points, labels, members, k, feature, &total_counts, n))
        .collect();

    // Deterministic reduction: higher score wins; ties prefer the lowest
    // feature (scan order), then the lowest threshold (scan_feature picks it).
    let mut best: Option<Split> = None;
    for cand in per_feature.into_iter().flatten() {
        match &best {
            None => best = Some(cand),
            Some(b) if cand.score > b.score => best = Some(cand),
            _ => {}
        }
    }
    best
}

fn scan_feature(
    points: &[Point],
    labels: &[Label],
    members: &[u32],
    k: usize,
    feature: usize,
    total_counts: &[u64],
    n: usize,
) -> Option<Split> {
    let mut order: Vec<u32> = members.to_vec();
    order.sort_unstable_by(|&a, &b| {
        points[a as usize].0[feature].total_cmp(&points[b as usize].0[feature])
    });

    let mut left_counts = vec![0u64; k];
    let mut left_sq: u64 = 0; // sum of squared left class counts, exact
    let mut right_sq: u64 = total_counts.iter().map(|&c| c * c).sum();
    let mut best: Option<Split> = None;

    for i in 0..n - 1 {
        let idx = order[i] as usize;
        let c = labels[idx].0;
        // Move point i from right to left, keeping squared sums exact.
        let lc = left_counts[c];
        let rc = total_counts[c] - lc;
        left_sq += 2 * lc + 1;
        right_sq -= 2 * rc - 1;
        left_counts[c] = lc + 1;

        let a = points[idx].0[feature];
        let b = points[order[i + 1] as usize].0[feature];
        if a < b {
            let n_left = (i + 1) as f64;
            let n_right = (n - i - 1) as f64;
            let score = left_sq as f64 / n_left + right_sq as f64 / n_right;
            let mut threshold = (a + b) / 2.0;
            // Adjacent floats can round the midpoint up to b; the split
            // predicate is `<=`, so the threshold must stay below b.
            if threshold >= b {
                threshold = a;
            }
            let better = match &best {
                None => true,
                Some(cur) => score > cur.score,
            };
            if better {
                best = Some(Split {
                    feature,
                    threshold,
                    score,
                });
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::RngSeed;
    use rand::Rng;

    fn xor_data() -> (Vec<Point>, Vec<Label>) {
        (
            vec![
                Point(vec![0.0, 0.0]),
                Point(vec![0.0, 1.0]),
                Point(vec![1.0, 0.0]),
                Point(vec![1.0, 1.0]),
            ],
            vec![Label(0), Label(1), Label(1), Label(0)],
        )
    }

    fn training_accuracy(tree: &TreeModel, points: &[Point], labels: &[Label]) -> f64 {
        let hits = points
            .iter()
            .zip(labels)
            .filter(|(p, l)| tree.predict_one(p) == **l)
            .count();
        hits as f64 / points.len() as f64
    }

    #[test]
    fn xor_is_fit_exactly() {
        // Every single split has zero Gini gain here; growth must not stall.
        let (points, labels) = xor_data();
        let tree = train_tree(&points, &labels, 2, None).unwrap();
        assert_eq!(training_accuracy(&tree, &points, &labels), 1.0);
    }

    #[test]
    fn single_class_data_yields_single_leaf() {
        let points = vec![Point(vec![1.0]), Point(vec![2.0]), Point(vec![3.0])];
        let labels = vec![Label(1); 3];
        let tree = train_tree(&points, &labels, 2, None).unwrap();
        assert_eq!(tree.nodes.len(), 1);
        assert_eq!(tree.predict_one(&Point(vec![-100.0])), Label(1));
    }

    #[test]
    fn threshold_oracle_is_recovered() {
        // 200 random points labelled by x0 > 0.3: the root region's
        // thresholds should land near 0.3 and fresh points classify well.
        let mut rng = RngSeed(11).rng();
        let points: Vec<Point> = (0..200)
            .map(|_| Point(vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]))
            .collect();
        let labels: Vec<Label> = points
            .iter()
            .map(|p| Label(usize::from(p.0[0] > 0.3)))
            .collect();
        let tree = train_tree(&points, &labels, 2, None).unwrap();

        let TreeNode::Split {
            feature, threshold, ..
        } = &tree.nodes[0]
        else {
            panic!("expected a split at the root");
        };
        assert_eq!(*feature, 0);
        assert!((threshold - 0.3).abs() < 0.1, "root threshold {threshold}");

        let fresh: Vec<Point> = (0..1000)
            .map(|_| Point(vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]))
            .collect();
        let fresh_labels: Vec<Label> = fresh
            .iter()
            .map(|p| Label(usize::from(p.0[0] > 0.3)))
            .collect();
        assert!(training_accuracy(&tree, &fresh, &fresh_labels) >= 0.95);
    }

    #[test]
    fn label_consistent_data_reaches_zero_training_error() {
        let mut rng = RngSeed(5).rng();
        let points: Vec<Point> = (0..500)
            .map(|_| Point(vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]))
            .collect();
        let labels: Vec<Label> = points
            .iter()
            .map(|p| Label(usize::from(p.0[0] * p.0[1] > 0.0)))
            .collect();
        let tree = train_tree(&points, &labels, 2, None).unwrap();
        assert_eq!(training_accuracy(&tree, &points, &labels), 1.0);
    }

    #[test]
    fn conflicting_duplicates_resolve_to_majority_then_lowest() {
        let points = vec![Point(vec![1.0]); 4];
        let labels = vec![Label(2), Label(1), Label(2), Label(1)];
        let tree = train_tree(&points, &labels, 3, None).unwrap();
        // 2/2 tie resolves to the lower class index.
        assert_eq!(tree.predict_one(&Point(vec![1.0])), Label(1));

        let labels = vec![Label(2), Label(1), Label(2), Label(2)];
        let tree = train_tree(&points, &labels, 3, None).unwrap();
        assert_eq!(tree.predict_one(&Point(vec![1.0])), Label(2));
    }

    #[test]
    fn max_depth_caps_growth() {
        let (points, labels) = xor_data();
        let tree = train_tree(&points, &labels, 2, Some(1)).unwrap();
        assert!(tree.depth() <= 1);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let points = vec![Point(vec![1.0, 2.0]), Point(vec![1.0])];
        let labels = vec![Label(0), Label(1)];
        assert!(matches!(
            train_tree(&points, &labels, 2, None),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn adjacent_float_values_still_split() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let points = vec![Point(vec![a]), Point(vec![b])];
        let labels = vec![Label(0), Label(1)];
        let tree = train_tree(&points, &labels, 2, None).unwrap();
        assert_eq!(tree.predict_one(&Point(vec![a])), Label(0));
        assert_eq!(tree.predict_one(&Point(vec![b])), Label(1));
    }
}
