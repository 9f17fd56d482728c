//! Random forest: bagged Gini trees with per-split feature sampling and a
//! majority vote.
//!
//! Tree `t` draws from its own RNG stream derived from `(seed, t)`, so the
//! model does not depend on how trees are scheduled across threads.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{self, Criterion, FeatureSampling, GrowInput, GrowParams, Stats, Tree};
use super::{require_nonzero, sample_weights, ClassWeight, Dataset};
use crate::error::{Error, Result};
use crate::features::SparseVector;
use crate::label::argmax_label;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// `None` grows every tree until its leaves are pure.
    pub max_depth: Option<usize>,
    /// `None` means `ceil(sqrt(dimension))`.
    pub features_per_split: Option<usize>,
    pub min_leaf: usize,
    pub bootstrap: bool,
    #[serde(default)]
    pub class_weight: ClassWeight,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: None,
            features_per_split: None,
            min_leaf: 1,
            bootstrap: true,
            class_weight: ClassWeight::None,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        require_nonzero("n_trees", self.n_trees)?;
        if let Some(d) = self.max_depth {
            require_nonzero("max_depth", d)?;
        }
        require_nonzero("min_leaf", self.min_leaf)?;
        if let Some(m) = self.features_per_split {
            require_nonzero("features_per_split", m)?;
        }
        Ok(())
    }

    pub fn features_for(&self, dimension: usize) -> usize {
        self.features_per_split
            .unwrap_or_else(|| (dimension as f64).sqrt().ceil() as usize)
            .clamp(1, dimension.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
}

impl ForestModel {
    pub fn from_trees(trees: Vec<Tree>, dimension: usize) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::InvalidArgument("a forest needs at least one tree".into()));
        }
        for t in &trees {
            t.validate(dimension, 3)?;
        }
        Ok(ForestModel { trees })
    }

    /// The class each tree votes for.
    pub fn votes(&self, x: &SparseVector) -> [usize; 3] {
        let mut votes = [0; 3];
        for t in &self.trees {
            let v = t.leaf(x);
            votes[argmax_label(&[v[0], v[1], v[2]]).index()] += 1;
        }
        votes
    }

    /// Vote fractions.
    pub fn scores(&self, x: &SparseVector) -> [f64; 3] {
        let n = self.trees.len() as f64;
        self.votes(x).map(|v| v as f64 / n)
    }
}

pub(crate) fn fit(data: &Dataset, cfg: &ForestConfig, seed: u64) -> Result<ForestModel> {
    let n = data.len();
    let weights = sample_weights(data, cfg.class_weight);
    let all_entries = tree::sorted_entries(data);
    let params = GrowParams {
        criterion: Criterion::Gini,
        max_depth: cfg.max_depth.unwrap_or(usize::MAX),
        min_leaf: cfg.min_leaf as u64,
        sampling: FeatureSampling::Random {
            m: cfg.features_for(data.dimension()),
            dimension: data.dimension(),
        },
    };
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng_indexed(seed, "forest-tree", t as u64);
            let mut counts = vec![0u64; n];
            if cfg.bootstrap {
                for _ in 0..n {
                    counts[rng.gen_range(0..n)] += 1;
                }
            } else {
                counts.fill(1);
            }
            let stats: Vec<Stats> = data
                .labels()
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    let mut s = Stats {
                        w: [0.0; 3],
                        count: counts[i],
                    };
                    s.w[l.index()] = weights[i] * counts[i] as f64;
                    s
                })
                .collect();
            let samples: Vec<u32> = (0..n as u32).filter(|&i| counts[i as usize] > 0).collect();
            let entries = all_entries.iter().filter(|e| counts[e.sample()] > 0).copied().collect();
            tree::grow(
                GrowInput {
                    stats: &stats,
                    target: None,
                    samples,
                    entries,
                },
                &params,
                Some(&mut rng),
            )
        })
        .collect();
    Ok(ForestModel { trees })
}
