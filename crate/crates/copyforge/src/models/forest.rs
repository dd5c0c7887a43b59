//! Random forest built from bootstrap-resampled CART trees over random
//! feature subsets. Prediction is a plurality vote with ties broken by
//! the lowest class index.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core::{Label, Point, RngSeed};
use crate::error::{Error, Result};
use crate::models::tree::{check_training_data, grow, TreeModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub trees_count: usize,
    /// Fraction of features offered to each tree; `None` uses sqrt(d)/d.
    pub feature_fraction: Option<f64>,
    /// Bootstrap rows with replacement; disabled, every tree sees all rows.
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            trees_count: 25,
            feature_fraction: None,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
    pub params: ForestParams,
    pub seed: RngSeed,
    pub dim: usize,
    pub k: usize,
}

impl ForestModel {
    pub fn predict_one(&self, point: &Point) -> Label {
        let mut votes = vec![0u32; self.k];
        for tree in &self.trees {
            votes[tree.predict_one(point).0] += 1;
        }
        let mut best = 0usize;
        for (c, &v) in votes.iter().enumerate() {
            if v > votes[best] {
                best = c;
            }
        }
        Label(best)
    }
}

pub fn train_forest(
    points: &[Point],
    labels: &[Label],
    k: usize,
    params: ForestParams,
    seed: RngSeed,
) -> Result<ForestModel> {
    let dim = check_training_data(points, labels, k)?;
    if params.trees_count == 0 {
        return Err(Error::InvalidArgument("trees_count must be >= 1".into()));
    }
    let fraction = match params.feature_fraction {
        Some(f) if f > 0.0 && f <= 1.0 => f,
        Some(f) => {
            return Err(Error::InvalidArgument(format!(
                "feature_fraction {f} outside (0, 1]"
            )))
        }
        None => (dim as f64).sqrt() / dim as f64,
    };
    let features_per_tree = ((dim as f64 * fraction).ceil() as usize).clamp(1, dim);

    // Draw every tree's bootstrap rows and feature subset up front from the
    // forest seed, so member trees can train in parallel deterministically.
    let n = points.len();
    let plans: Vec<(Vec<u32>, Vec<usize>)> = (0..params.trees_count)
        .map(|t| {
            let mut rng = seed.derive(t as u64).rng();
            let rows: Vec<u32> = if params.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n) as u32).collect()
            } else {
                (0..n as u32).collect()
            };
            let mut feats: Vec<usize> = (0..dim).collect();
            feats.shuffle(&mut rng);
            feats.truncate(features_per_tree);
            feats.sort_unstable();
            (rows, feats)
        })
        .collect();

    let trees: Vec<TreeModel> = plans
        .into_par_iter()
        .map(|(rows, feats)| {
            let sub_points: Vec<Point> = rows.iter().map(|&i| points[i as usize].clone()).collect();
            let sub_labels: Vec<Label> = rows.iter().map(|&i| labels[i as usize]).collect();
            let nodes = grow(&sub_points, &sub_labels, k, None, &feats);
            TreeModel {
                nodes,
                dim,
                k,
                max_depth: None,
            }
        })
        .collect();

    Ok(ForestModel {
        trees,
        params,
        seed,
        dim,
        k,
    })
}
