//! CART trees over sparse vectors, shared by the random forest (Gini
//! criterion) and gradient boosting (squared-error criterion).
//!
//! The builder keeps each node's nonzero entries sorted by `(feature,
//! value)`; children receive stable partitions, so no node re-sorts. A
//! feature's implicit zeros form one extra group in the value order.
//! Candidate thresholds are midpoints between adjacent distinct values and
//! an example goes left when `x[feature] <= threshold`.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::features::SparseVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    /// Class fractions (classification) or a single value (regression).
    Leaf { value: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn constant(value: Vec<f64>) -> Self {
        Tree {
            nodes: vec![Node::Leaf { value }],
        }
    }

    pub fn from_nodes(nodes: Vec<Node>, dimension: usize, leaf_len: usize) -> Result<Self> {
        let t = Tree { nodes };
        t.validate(dimension, leaf_len)?;
        Ok(t)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn leaf(&self, x: &SparseVector) -> &[f64] {
        match &self.nodes[self.leaf_index(x)] {
            Node::Leaf { value } => value,
            Node::Split { .. } => unreachable!("leaf_index stops at leaves"),
        }
    }

    /// Node index of the leaf reached by `x`.
    pub(crate) fn leaf_index(&self, x: &SparseVector) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x.get(*feature) <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
                Node::Leaf { .. } => return i,
            }
        }
    }

    /// Replaces the value of the leaf at node `index`.
    pub(crate) fn set_leaf(&mut self, index: usize, value: Vec<f64>) {
        if let Node::Leaf { value: v } = &mut self.nodes[index] {
            *v = value;
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Split { left, right, .. } => 1 + go(nodes, *left as usize).max(go(nodes, *right as usize)),
                Node::Leaf { .. } => 0,
            }
        }
        go(&self.nodes, 0)
    }

    /// Checks that children point forward (so evaluation terminates),
    /// features are in range and leaves have the expected width.
    pub(crate) fn validate(&self, dimension: usize, leaf_len: usize) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::CorruptModel("tree has no nodes".into()));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            match node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if *feature as usize >= dimension {
                        return Err(Error::CorruptModel(format!(
                            "node {i} splits on feature {feature} but dimension is {dimension}"
                        )));
                    }
                    if threshold.is_nan() {
                        return Err(Error::CorruptModel(format!("node {i} has a NaN threshold")));
                    }
                    for child in [*left as usize, *right as usize] {
                        if child <= i || child >= self.nodes.len() {
                            return Err(Error::CorruptModel(format!("node {i} has invalid child {child}")));
                        }
                    }
                }
                Node::Leaf { value } => {
                    if value.len() != leaf_len || value.iter().any(|v| !v.is_finite()) {
                        return Err(Error::CorruptModel(format!("node {i} has a malformed leaf")));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Entry {
    feature: u32,
    value: f64,
    sample: u32,
}

impl Entry {
    pub(crate) fn sample(&self) -> usize {
        self.sample as usize
    }
}

/// All nonzero entries of `data` sorted by `(feature, value, sample)`.
pub(crate) fn sorted_entries(data: &Dataset) -> Vec<Entry> {
    let mut entries: Vec<Entry> = data
        .vectors()
        .iter()
        .enumerate()
        .flat_map(|(i, x)| {
            x.pairs().iter().map(move |&(f, v)| Entry {
                feature: f,
                value: v,
                sample: i as u32,
            })
        })
        .collect();
    entries.sort_by(|a, b| {
        a.feature
            .cmp(&b.feature)
            .then(a.value.total_cmp(&b.value))
            .then(a.sample.cmp(&b.sample))
    });
    entries
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Criterion {
    /// `stats` hold per-class weights.
    Gini,
    /// `stats[0]` holds the weight, `stats[1]` the weighted target sum.
    SquaredError,
}

/// Sufficient statistics of a set of examples.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Stats {
    pub w: [f64; 3],
    /// Example count including bootstrap multiplicity.
    pub count: u64,
}

impl Stats {
    fn add(&mut self, o: &Stats) {
        for c in 0..3 {
            self.w[c] += o.w[c];
        }
        self.count += o.count;
    }

    fn minus(&self, o: &Stats) -> Stats {
        Stats {
            w: [self.w[0] - o.w[0], self.w[1] - o.w[1], self.w[2] - o.w[2]],
            count: self.count - o.count,
        }
    }

    /// Larger is purer; split gain is `score(L) + score(R) - score(parent)`.
    fn score(&self, criterion: Criterion) -> f64 {
        match criterion {
            Criterion::Gini => {
                let total: f64 = self.w.iter().sum();
                if total <= 0.0 {
                    0.0
                } else {
                    self.w.iter().map(|w| w * w).sum::<f64>() / total
                }
            }
            Criterion::SquaredError => {
                if self.w[0] <= 0.0 {
                    0.0
                } else {
                    self.w[1] * self.w[1] / self.w[0]
                }
            }
        }
    }

    fn leaf_value(&self, criterion: Criterion) -> Vec<f64> {
        match criterion {
            Criterion::Gini => {
                let total: f64 = self.w.iter().sum();
                self.w.iter().map(|w| w / total).collect()
            }
            Criterion::SquaredError => vec![self.w[1] / self.w[0]],
        }
    }
}

/// How many candidate features each split examines.
#[derive(Debug, Clone, Copy)]
pub(crate) enum FeatureSampling {
    All,
    /// Draw `m` features without replacement out of `dimension`, skipping
    /// ones that are constant in the node; if every drawn feature is
    /// constant, keep drawing until a non-constant one turns up.
    Random {
        m: usize,
        dimension: usize,
    },
}

pub(crate) struct GrowParams {
    pub criterion: Criterion,
    pub max_depth: usize,
    pub min_leaf: u64,
    pub sampling: FeatureSampling,
}

/// Per-example inputs to the builder. `stats[i]` is example `i`'s
/// contribution; `target[i]` is used only to detect constant regression
/// targets. Examples not listed in `samples` are ignored.
pub(crate) struct GrowInput<'a> {
    pub stats: &'a [Stats],
    pub target: Option<&'a [f64]>,
    pub samples: Vec<u32>,
    pub entries: Vec<Entry>,
}

// Floating-point slack for accepting zero-gain splits.
const GAIN_TOLERANCE: f64 = 1e-12;

struct Work {
    node: usize,
    depth: usize,
    samples: Vec<u32>,
    entries: Vec<Entry>,
}

struct Candidate {
    feature: u32,
    threshold: f64,
    gain: f64,
}

pub(crate) fn grow(input: GrowInput<'_>, params: &GrowParams, mut rng: Option<&mut ChaCha8Rng>) -> Tree {
    let n_all = input.stats.len();
    let mut goes_left = vec![false; n_all];
    let mut nodes: Vec<Node> = vec![Node::Leaf { value: Vec::new() }];
    let mut stack = vec![Work {
        node: 0,
        depth: 0,
        samples: input.samples,
        entries: input.entries,
    }];
    while let Some(work) = stack.pop() {
        let mut total = Stats::default();
        for &s in &work.samples {
            total.add(&input.stats[s as usize]);
        }
        let split = if work.depth >= params.max_depth
            || total.count < 2 * params.min_leaf
            || is_pure(&work.samples, &total, input.target, params.criterion)
        {
            None
        } else {
            best_split(&work, &total, input.stats, params, rng.as_deref_mut())
        };
        let Some(split) = split else {
            nodes[work.node] = Node::Leaf {
                value: total.leaf_value(params.criterion),
            };
            continue;
        };

        let zero_left = 0.0 <= split.threshold;
        for &s in &work.samples {
            goes_left[s as usize] = zero_left;
        }
        let run = feature_run(&work.entries, split.feature);
        for e in &work.entries[run] {
            goes_left[e.sample as usize] = e.value <= split.threshold;
        }
        let (ls, rs): (Vec<u32>, Vec<u32>) = work.samples.iter().partition(|&&s| goes_left[s as usize]);
        let (le, re): (Vec<Entry>, Vec<Entry>) = work.entries.iter().partition(|e| goes_left[e.sample as usize]);

        let left = nodes.len();
        nodes.push(Node::Leaf { value: Vec::new() });
        nodes.push(Node::Leaf { value: Vec::new() });
        nodes[work.node] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: left as u32,
            right: left as u32 + 1,
        };
        stack.push(Work {
            node: left + 1,
            depth: work.depth + 1,
            samples: rs,
            entries: re,
        });
        stack.push(Work {
            node: left,
            depth: work.depth + 1,
            samples: ls,
            entries: le,
        });
    }
    Tree { nodes }
}

fn is_pure(samples: &[u32], total: &Stats, target: Option<&[f64]>, criterion: Criterion) -> bool {
    match criterion {
        Criterion::Gini => total.w.iter().filter(|&&w| w > 0.0).count() <= 1,
        Criterion::SquaredError => {
            let Some(target) = target else { return false };
            let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
                let t = target[s as usize];
                (lo.min(t), hi.max(t))
            });
            hi - lo <= 1e-12
        }
    }
}

fn feature_run(entries: &[Entry], feature: u32) -> std::ops::Range<usize> {
    let start = entries.partition_point(|e| e.feature < feature);
    let end = entries.partition_point(|e| e.feature <= feature);
    start..end
}

fn best_split(
    work: &Work,
    total: &Stats,
    stats: &[Stats],
    params: &GrowParams,
    rng: Option<&mut ChaCha8Rng>,
) -> Option<Candidate> {
    // Runs of entries per feature that are not constant within the node.
    let n_node = work.samples.len();
    let mut runs: Vec<std::ops::Range<usize>> = Vec::new();
    let mut start = 0;
    while start < work.entries.len() {
        let f = work.entries[start].feature;
        let mut end = start + 1;
        while end < work.entries.len() && work.entries[end].feature == f {
            end += 1;
        }
        let constant = end - start == n_node && work.entries[start].value == work.entries[end - 1].value;
        if !constant {
            runs.push(start..end);
        }
        start = end;
    }
    if let (FeatureSampling::Random { m, dimension }, Some(rng)) = (params.sampling, rng) {
        let keep = sampled_count(runs.len(), m, dimension, rng);
        let (chosen, _) = runs.partial_shuffle(rng, keep);
        runs = chosen.to_vec();
    }
    let parent = total.score(params.criterion);
    let mut best: Option<Candidate> = None;
    for run in runs {
        if let Some(c) = scan_feature(&work.entries[run], n_node, total, parent, stats, params) {
            if best.as_ref().is_none_or(|b| c.gain > b.gain) {
                best = Some(c);
            }
        }
    }
    best.filter(|b| b.gain >= -GAIN_TOLERANCE)
}

/// Number of non-constant features among `m` draws without replacement from
/// `dimension` features, of which `q` are non-constant; at least one if
/// `q > 0`.
fn sampled_count(q: usize, m: usize, dimension: usize, rng: &mut ChaCha8Rng) -> usize {
    if q == 0 {
        return 0;
    }
    let mut population = dimension.max(q);
    let mut successes = q;
    let mut hits = 0;
    for _ in 0..m.min(population) {
        if rng.gen_range(0..population) < successes {
            hits += 1;
            successes -= 1;
        }
        population -= 1;
    }
    hits.max(1)
}

/// Best threshold on one feature. `run` is the feature's entries in the
/// node, sorted by value; examples without an entry sit at zero.
fn scan_feature(
    run: &[Entry],
    n_node: usize,
    total: &Stats,
    parent: f64,
    stats: &[Stats],
    params: &GrowParams,
) -> Option<Candidate> {
    let mut run_total = Stats::default();
    for e in run {
        run_total.add(&stats[e.sample as usize]);
    }
    let zeros = total.minus(&run_total);
    let has_zeros = run.len() < n_node;

    let mut left = Stats::default();
    let mut prev: Option<f64> = None;
    let mut best: Option<Candidate> = None;
    let consider = |value: f64, left: &Stats, prev: Option<f64>, best: &mut Option<Candidate>| {
        let Some(p) = prev else { return };
        if p == value {
            return;
        }
        let right = total.minus(left);
        if left.count < params.min_leaf || right.count < params.min_leaf {
            return;
        }
        let gain = left.score(params.criterion) + right.score(params.criterion) - parent;
        if best.as_ref().is_none_or(|b| gain > b.gain) {
            let mid = p + (value - p) / 2.0;
            let threshold = if mid < value { mid } else { p };
            *best = Some(Candidate {
                feature: run[0].feature,
                threshold,
                gain,
            });
        }
    };
    let mut zeros_done = !has_zeros;
    for e in run {
        if !zeros_done && e.value > 0.0 {
            consider(0.0, &left, prev, &mut best);
            left.add(&zeros);
            prev = Some(0.0);
            zeros_done = true;
        }
        consider(e.value, &left, prev, &mut best);
        left.add(&stats[e.sample as usize]);
        prev = Some(e.value);
    }
    if !zeros_done {
        consider(0.0, &left, prev, &mut best);
    }
    best
}
