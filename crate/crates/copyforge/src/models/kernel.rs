//! RBF kernel machine: `K(x, x') = exp(-gamma * ||x - x'||^2)`.
//!
//! Trained in the primal with hinge loss by Pegasos-style stochastic
//! subgradient descent. `gamma` is the capacity knob: larger values shrink
//! the radius of influence of each support point and raise complexity.
//! Binary problems use a single +/-1 machine; multiclass trains one machine
//! per class and takes the argmax.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core::{Label, Point, RngSeed};
use crate::error::{Error, Result};
use crate::models::logistic::argmax_lowest;
use crate::models::tree::check_training_data;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub gamma: f64,
    /// Pegasos regularization strength (lambda).
    pub regularization: f64,
    pub epochs: usize,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams {
            gamma: 1.0,
            regularization: 1e-4,
            epochs: 10,
        }
    }
}

/// One binary machine: `f(x) = sum_j coeff_j * K(support_j, x) + bias`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMachine {
    pub support: Vec<Point>,
    pub coefficients: Vec<f64>,
    pub bias: f64,
}

impl KernelMachine {
    pub fn decision(&self, gamma: f64, point: &Point) -> f64 {
        let mut sum = self.bias;
        for (s, c) in self.support.iter().zip(&self.coefficients) {
            sum += c * rbf(gamma, s, point);
        }
        sum
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelModel {
    pub gamma: f64,
    /// One machine for k = 2, one per class otherwise.
    pub machines: Vec<KernelMachine>,
    pub dim: usize,
    pub k: usize,
    pub params: KernelParams,
    /// Misclassified fraction on the training set after training.
    pub train_error: f64,
    /// Training points left with hinge margin < 1; grows as gamma shrinks
    /// below what the data needs, a cheap capacity diagnostic.
    pub margin_violations: usize,
}

impl KernelModel {
    pub fn predict_one(&self, point: &Point) -> Label {
        if self.k == 2 {
            let f = self.machines[0].decision(self.gamma, point);
            Label(usize::from(f > 0.0))
        } else {
            let scores: Vec<f64> = self
                .machines
                .iter()
                .map(|m| m.decision(self.gamma, point))
                .collect();
            argmax_lowest(&scores)
        }
    }
}

#[inline]
pub fn rbf(gamma: f64, a: &Point, b: &Point) -> f64 {
    let mut d2 = 0.0;
    for (x, y) in a.0.iter().zip(&b.0) {
        let diff = x - y;
        d2 += diff * diff;
    }
    (-gamma * d2).exp()
}

pub fn train_rbf(
    points: &[Point],
    labels: &[Label],
    k: usize,
    params: KernelParams,
    seed: RngSeed,
) -> Result<KernelModel> {
    let dim = check_training_data(points, labels, k)?;
    if !(params.gamma > 0.0) {
        return Err(Error::InvalidArgument("gamma must be > 0".into()));
    }
    if !(params.regularization > 0.0) {
        return Err(Error::InvalidArgument("regularization must be > 0".into()));
    }
    if params.epochs == 0 {
        return Err(Error::InvalidArgument("epochs must be >= 1".into()));
    }
    if k < 2 {
        return Err(Error::InvalidArgument("kernel machine needs k >= 2".into()));
    }

    let machine_targets: Vec<Vec<f64>> = if k == 2 {
        vec![labels.iter().map(|l| if l.0 == 1 { 1.0 } else { -1.0 }).collect()]
    } else {
        (0..k)
            .map(|c| labels.iter().map(|l| if l.0 == c { 1.0 } else { -1.0 }).collect())
            .collect()
    };

    let mut machines = Vec::with_capacity(machine_targets.len());
    let mut decisions: Vec<Vec<f64>> = Vec::with_capacity(machine_targets.len());
    for (c, targets) in machine_targets.iter().enumerate() {
        let (machine, final_decisions) =
            pegasos(points, targets, &params, seed.derive(c as u64))?;
        machines.push(machine);
        decisions.push(final_decisions);
    }

    // Training error and margin diagnostics from the per-point decisions.
    let n = points.len();
    let mut wrong = 0usize;
    let mut violations = 0usize;
    for i in 0..n {
        let predicted = if k == 2 {
            Label(usize::from(decisions[0][i] > 0.0))
        } else {
            let scores: Vec<f64> = decisions.iter().map(|d| d[i]).collect();
            argmax_lowest(&scores)
        };
        if predicted != labels[i] {
            wrong += 1;
        }
        for (targets, dec) in machine_targets.iter().zip(&decisions) {
            if targets[i] * dec[i] < 1.0 {
                violations += 1;
                break;
            }
        }
    }

    Ok(KernelModel {
        gamma: params.gamma,
        machines,
        dim,
        k,
        params,
        train_error: wrong as f64 / n as f64,
        margin_violations: violations,
    })
}

/// Train one binary machine; returns it plus its final decision value on
/// every training point.
fn pegasos(
    points: &[Point],
    targets: &[f64],
    params: &KernelParams,
    seed: RngSeed,
) -> Result<(KernelMachine, Vec<f64>)> {
    let n = points.len();
    let lambda = params.regularization;
    let gamma = params.gamma;
    let total_steps = (params.epochs * n) as f64;

    let mut rng = seed.rng();
    let mut alpha = vec![0.0f64; n];
    // Unnormalized kernel expansion value at each training point:
    // fvals[m] = sum_j alpha_j * y_j * K(x_j, x_m).
    let mut fvals = vec![0.0f64; n];
    let mut bias = 0.0f64;
    let mut order: Vec<u32> = (0..n as u32).collect();

    let mut t = 0u64;
    for _epoch in 0..params.epochs {
        // Sampling without replacement inside each epoch visits every
        // point, which pins down the memorization regime at large gamma.
        order.shuffle(&mut rng);
        for &oi in &order {
            t += 1;
            let i = oi as usize;
            let scale = 1.0 / (lambda * t as f64);
            let margin = targets[i] * (fvals[i] * scale + bias);
            if margin < 1.0 {
                alpha[i] += 1.0;
                bias += targets[i] * scale;
                let yi = targets[i];
                let xi = &points[i];
                fvals
                    .par_iter_mut()
                    .enumerate()
                    .for_each(|(m, f)| *f += yi * rbf(gamma, xi, &points[m]));
            }
        }
    }

    if !bias.is_finite() || fvals.iter().any(|f| !f.is_finite()) {
        return Err(Error::Divergence {
            epoch: params.epochs - 1,
        });
    }

    let norm = 1.0 / (lambda * total_steps);
    let mut support = Vec::new();
    let mut coefficients = Vec::new();
    for i in 0..n {
        if alpha[i] > 0.0 {
            support.push(points[i].clone());
            coefficients.push(alpha[i] * targets[i] * norm);
        }
    }
    let final_decisions: Vec<f64> = fvals.iter().map(|f| f * norm + bias).collect();

    Ok((
        KernelMachine {
            support,
            coefficients,
            bias,
        },
        final_decisions,
    ))
}
