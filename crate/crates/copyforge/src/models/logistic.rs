//! Multinomial logistic regression trained by full-batch gradient descent
//! on the softmax cross-entropy loss.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::core::{Label, Point, RngSeed};
use crate::error::{Error, Result};
use crate::models::tree::check_training_data;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            learning_rate: 0.5,
            epochs: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    /// Row-major `k x d` weight matrix.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub dim: usize,
    pub k: usize,
    pub params: LogisticParams,
    pub final_loss: f64,
}

impl LogisticModel {
    /// Affine class scores for one point.
    pub fn scores(&self, point: &Point) -> Vec<f64> {
        (0..self.k)
            .map(|c| {
                let row = &self.weights[c * self.dim..(c + 1) * self.dim];
                row.iter().zip(&point.0).map(|(w, x)| w * x).sum::<f64>() + self.bias[c]
            })
            .collect()
    }

    pub fn predict_one(&self, point: &Point) -> Label {
        argmax_lowest(&self.scores(point))
    }
}

/// Index of the maximum score; ties resolve to the lowest index.
pub(crate) fn argmax_lowest(scores: &[f64]) -> Label {
    let mut best = 0usize;
    for (c, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = c;
        }
    }
    Label(best)
}

pub fn train_logistic(
    points: &[Point],
    labels: &[Label],
    k: usize,
    params: LogisticParams,
    seed: RngSeed,
) -> Result<LogisticModel> {
    let dim = check_training_data(points, labels, k)?;
    if params.epochs == 0 {
        return Err(Error::InvalidArgument("epochs must be >= 1".into()));
    }
    if !(params.learning_rate > 0.0) {
        return Err(Error::InvalidArgument("learning_rate must be > 0".into()));
    }

    let n = points.len();
    let mut rng = seed.rng();
    let mut weights: Vec<f64> = (0..k * dim).map(|_| rng.gen_range(-1e-3..1e-3)).collect();
    let mut bias = vec![0.0f64; k];

    let mut grad_w = vec![0.0f64; k * dim];
    let mut grad_b = vec![0.0f64; k];
    let mut final_loss = f64::INFINITY;

    for epoch in 0..params.epochs {
        grad_w.iter_mut().for_each(|g| *g = 0.0);
        grad_b.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0f64;

        for (p, l) in points.iter().zip(labels) {
            let mut scores: Vec<f64> = (0..k)
                .map(|c| {
                    let row = &weights[c * dim..(c + 1) * dim];
                    row.iter().zip(&p.0).map(|(w, x)| w * x).sum::<f64>() + bias[c]
                })
                .collect();
            let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut denom = 0.0;
            for s in scores.iter_mut() {
                *s = (*s - max).exp();
                denom += *s;
            }
            loss -= (scores[l.0] / denom).ln();
            for c in 0..k {
                let p_c = scores[c] / denom;
                let err = p_c - f64::from(u8::from(c == l.0));
                for (g, x) in grad_w[c * dim..(c + 1) * dim].iter_mut().zip(&p.0) {
                    *g += err * x;
                }
                grad_b[c] += err;
            }
        }

        loss /= n as f64;
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        final_loss = loss;

        let step = params.learning_rate / n as f64;
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w -= step * g;
        }
        for (b, g) in bias.iter_mut().zip(&grad_b) {
            *b -= step * g;
        }
    }

    if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
        return Err(Error::Divergence {
            epoch: params.epochs - 1,
        });
    }

    Ok(LogisticModel {
        weights,
        bias,
        dim,
        k,
        params,
        final_loss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable_1d() -> (Vec<Point>, Vec<Label>) {
        let points: Vec<Point> = (-10..10)
            .filter(|&v| v != 0)
            .map(|v| Point(vec![v as f64 / 2.0]))
            .collect();
        let labels: Vec<Label> = points
            .iter()
            .map(|p| Label(usize::from(p.0[0] > 0.0)))
            .collect();
        (points, labels)
    }

    fn accuracy(m: &LogisticModel, points: &[Point], labels: &[Label]) -> f64 {
        let hits = points
            .iter()
            .zip(labels)
            .filter(|(p, l)| m.predict_one(p) == **l)
            .count();
        hits as f64 / points.len() as f64
    }

    #[test]
    fn separable_data_is_fit_perfectly() {
        let (points, labels) = separable_1d();
        let m = train_logistic(&points, &labels, 2, LogisticParams::default(), RngSeed(0)).unwrap();
        assert_eq!(accuracy(&m, &points, &labels), 1.0);
    }

    #[test]
    fn zero_epochs_is_a_precondition_error() {
        let (points, labels) = separable_1d();
        let params = LogisticParams {
            learning_rate: 0.5,
            epochs: 0,
        };
        assert!(matches!(
            train_logistic(&points, &labels, 2, params, RngSeed(0)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn feature_scaling_keeps_decisions_on_separable_data() {
        let (points, labels) = separable_1d();
        let scaled: Vec<Point> = points
            .iter()
            .map(|p| Point(p.0.iter().map(|v| v * 2.0).collect()))
            .collect();
        let m1 = train_logistic(&points, &labels, 2, LogisticParams::default(), RngSeed(1)).unwrap();
        let m2 = train_logistic(&scaled, &labels, 2, LogisticParams::default(), RngSeed(1)).unwrap();
        for (p, q) in points.iter().zip(&scaled) {
            assert_eq!(m1.predict_one(p), m2.predict_one(q));
        }
    }

    #[test]
    fn zero_model_predicts_class_zero() {
        let m = LogisticModel {
            weights: vec![0.0; 6],
            bias: vec![0.0; 3],
            dim: 2,
            k: 3,
            params: LogisticParams::default(),
            final_loss: 0.0,
        };
        assert_eq!(m.predict_one(&Point(vec![5.0, -2.0])), Label(0));
    }

    #[test]
    fn loss_does_not_increase_between_runs_of_more_epochs() {
        let (points, labels) = separable_1d();
        let short = train_logistic(
            &points,
            &labels,
            2,
            LogisticParams {
                learning_rate: 0.1,
                epochs: 20,
            },
            RngSeed(2),
        )
        .unwrap();
        let long = train_logistic(
            &points,
            &labels,
            2,
            LogisticParams {
                learning_rate: 0.1,
                epochs: 200,
            },
            RngSeed(2),
        )
        .unwrap();
        assert!(long.final_loss <= short.final_loss + 1e-12);
    }

    #[test]
    fn determinism_under_seed() {
        let (points, labels) = separable_1d();
        let a = train_logistic(&points, &labels, 2, LogisticParams::default(), RngSeed(4)).unwrap();
        let b = train_logistic(&points, &labels, 2, LogisticParams::default(), RngSeed(4)).unwrap();
        assert_eq!(a, b);
    }
}
