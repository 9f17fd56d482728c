//! One-vs-rest linear SVMs trained with stochastic subgradient descent.
//!
//! Each binary problem minimizes
//! `(lambda / 2) * ||w||^2 + (1 / W) * sum_i w_i * max(0, 1 - y_i (w.x_i + b))`
//! with `lambda = 1 / (C * W)`. The step size decays as
//! `lr / (1 + lr * lambda * t)`. The weight vector is kept as `scale * v`
//! so the shrink step costs O(1) and each update touches only the nonzero
//! features of one example.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{require_nonzero, require_positive, sample_weights, ClassWeight, Dataset};
use crate::error::{Error, Result};
use crate::features::SparseVector;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub c: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    #[serde(default)]
    pub class_weight: ClassWeight,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            epochs: 10,
            learning_rate: 0.1,
            class_weight: ClassWeight::None,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        require_positive("c", self.c)?;
        require_nonzero("epochs", self.epochs)?;
        require_positive("learning_rate", self.learning_rate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub weights: [Vec<f64>; 3],
    pub bias: [f64; 3],
}

impl SvmModel {
    /// Signed margins, one per class.
    pub fn scores(&self, x: &SparseVector) -> [f64; 3] {
        [
            self.bias[0] + x.dot(&self.weights[0]),
            self.bias[1] + x.dot(&self.weights[1]),
            self.bias[2] + x.dot(&self.weights[2]),
        ]
    }
}

struct Scaled {
    v: Vec<f64>,
    scale: f64,
    bias: f64,
}

impl Scaled {
    fn margin(&self, x: &SparseVector) -> f64 {
        self.scale * x.dot(&self.v) + self.bias
    }

    fn into_weights(self) -> (Vec<f64>, f64) {
        let s = self.scale;
        (self.v.into_iter().map(|v| v * s).collect(), self.bias)
    }
}

pub(crate) fn fit(data: &Dataset, cfg: &SvmConfig, seed: u64) -> Result<SvmModel> {
    let n = data.len();
    let weights = sample_weights(data, cfg.class_weight);
    let mass: f64 = weights.iter().sum();
    let lambda = 1.0 / (cfg.c * mass);
    let mut machines: Vec<Scaled> = (0..3)
        .map(|_| Scaled {
            v: vec![0.0; data.dimension()],
            scale: 1.0,
            bias: 0.0,
        })
        .collect();
    let mut rng = seed::rng_for(seed, "svm");
    let mut order: Vec<usize> = (0..n).collect();
    let mut t = 0u64;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = cfg.learning_rate / (1.0 + cfg.learning_rate * lambda * t as f64);
            let x = &data.vectors()[i];
            let label = data.labels()[i].index();
            // Unbiased estimate of the weighted mean hinge term.
            let step = eta * weights[i] * n as f64 / mass;
            for (k, m) in machines.iter_mut().enumerate() {
                let y = if k == label { 1.0 } else { -1.0 };
                let violated = y * m.margin(x) < 1.0;
                m.scale *= 1.0 - eta * lambda;
                if m.scale < 1e-9 {
                    let s = m.scale;
                    m.v.iter_mut().for_each(|v| *v *= s);
                    m.scale = 1.0;
                }
                if violated {
                    let delta = step * y / m.scale;
                    for &(j, value) in x.pairs() {
                        m.v[j as usize] += delta * value;
                    }
                    m.bias += step * y;
                }
            }
        }
        let finite = machines
            .iter()
            .all(|m| m.bias.is_finite() && m.scale.is_finite() && m.v.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(Error::Training(format!(
                "svm parameters became non-finite in epoch {epoch} (learning_rate {}, c {})",
                cfg.learning_rate, cfg.c
            )));
        }
    }
    let mut out_w: [Vec<f64>; 3] = Default::default();
    let mut out_b = [0.0; 3];
    for (k, m) in machines.into_iter().enumerate() {
        let (w, b) = m.into_weights();
        out_w[k] = w;
        out_b[k] = b;
    }
    Ok(SvmModel {
        weights: out_w,
        bias: out_b,
    })
}
