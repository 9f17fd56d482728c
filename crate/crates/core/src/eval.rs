//! Train/test splits, k-fold assignment, confusion matrices, metrics and the
//! models-by-splits experiment harness.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::label::SentimentLabel;
use crate::models::{self, ClassifierModel, Dataset, Hyperparams, ModelKind};
use crate::seed;
use crate::table::TextTable;

/// Fraction of the data used for training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatio {
    train_fraction: f64,
}

impl SplitRatio {
    pub const P60_40: SplitRatio = SplitRatio { train_fraction: 0.6 };
    pub const P70_30: SplitRatio = SplitRatio { train_fraction: 0.7 };
    pub const P80_20: SplitRatio = SplitRatio { train_fraction: 0.8 };
    pub const PRESETS: [SplitRatio; 3] = [Self::P60_40, Self::P70_30, Self::P80_20];

    pub fn new(train_fraction: f64) -> Result<Self> {
        if train_fraction > 0.0 && train_fraction < 1.0 {
            Ok(SplitRatio { train_fraction })
        } else {
            Err(Error::InvalidArgument(format!(
                "train fraction must be strictly between 0 and 1, got {train_fraction}"
            )))
        }
    }

    pub fn train_fraction(self) -> f64 {
        self.train_fraction
    }

    /// `70-30` style name.
    pub fn name(self) -> String {
        let train = (self.train_fraction * 100.0).round() as i64;
        format!("{}-{}", train, 100 - train)
    }
}

impl fmt::Display for SplitRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for SplitRatio {
    type Err = Error;

    /// Accepts `70-30`, `70/30` or a fraction such as `0.7`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once(['-', '/', ':']) {
            let parse = |t: &str| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("bad split {s:?}")))
            };
            let (a, b) = (parse(a)?, parse(b)?);
            if a <= 0.0 || b <= 0.0 {
                return Err(Error::InvalidArgument(format!("bad split {s:?}")));
            }
            return SplitRatio::new(a / (a + b));
        }
        let f: f64 = s
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad split {s:?}")))?;
        SplitRatio::new(f)
    }
}

/// Groups of indices split together: one per class with at least two
/// examples, plus one pooled group for the rest.
fn strata(labels: &[SentimentLabel]) -> Vec<Vec<usize>> {
    let mut by_class: [Vec<usize>; 3] = Default::default();
    for (i, l) in labels.iter().enumerate() {
        by_class[l.index()].push(i);
    }
    let mut out = Vec::new();
    let mut pooled = Vec::new();
    for (c, idx) in by_class.into_iter().enumerate() {
        match idx.len() {
            0 => {}
            1 => {
                log::warn!(
                    "class {} has a single example; splitting it without stratification",
                    SentimentLabel::ALL[c]
                );
                pooled.extend(idx);
            }
            _ => out.push(idx),
        }
    }
    if !pooled.is_empty() {
        out.push(pooled);
    }
    out
}

/// Stratified shuffled split. Returns sorted `(train, test)` index lists with
/// `|train| = round(n * fraction)`; per-stratum quotas use largest
/// remainders.
pub fn split_indices(labels: &[SentimentLabel], ratio: SplitRatio, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = labels.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("cannot split {n} examples")));
    }
    let target = (n as f64 * ratio.train_fraction).round() as usize;
    let mut groups = strata(labels);
    let mut quotas: Vec<usize> = groups.iter().map(|g| g.len() * target / n).collect();
    let assigned: usize = quotas.iter().sum();
    let mut order: Vec<usize> = (0..groups.len()).collect();
    // Largest remainder first; earlier groups win ties.
    order.sort_by_key(|&g| std::cmp::Reverse((groups[g].len() * target) % n));
    for &g in order.iter().take(target - assigned) {
        quotas[g] += 1;
    }
    let mut rng = seed::rng_for(seed, "split");
    let (mut train, mut test) = (Vec::with_capacity(target), Vec::with_capacity(n - target));
    for (g, q) in groups.iter_mut().zip(quotas) {
        g.shuffle(&mut rng);
        train.extend_from_slice(&g[..q]);
        test.extend_from_slice(&g[q..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split(data: &Dataset, ratio: SplitRatio, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(data.labels(), ratio, seed)?;
    Ok((data.subset(&train), data.subset(&test)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub fold_of: Vec<usize>,
    pub k: usize,
}

impl FoldAssignment {
    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] != fold).collect()
    }
}

/// Stratified k-fold assignment: each class is shuffled, then classes are
/// dealt round-robin across folds in canonical order, continuing the deal
/// from one class to the next.
pub fn kfold(labels: &[SentimentLabel], k: usize, seed: u64) -> Result<FoldAssignment> {
    let n = labels.len();
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k must be at least 2, got {k}")));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds the {n} examples")));
    }
    let mut rng = seed::rng_for(seed, "kfold");
    let mut fold_of = vec![0; n];
    let mut next = 0;
    for c in SentimentLabel::ALL {
        let mut idx: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            fold_of[i] = next % k;
            next += 1;
        }
    }
    Ok(FoldAssignment { fold_of, k })
}

/// Rows are actual labels, columns predicted labels, both in canonical
/// order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 3]; 3],
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[u64; 3]; 3]) -> Self {
        ConfusionMatrix { counts }
    }

    pub fn get(&self, actual: SentimentLabel, predicted: SentimentLabel) -> u64 {
        self.counts[actual.index()][predicted.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..3).map(|c| self.counts[c][c]).sum()
    }

    pub fn row_sums(&self) -> [u64; 3] {
        self.counts.map(|r| r.iter().sum())
    }

    pub fn col_sums(&self) -> [u64; 3] {
        let mut out = [0; 3];
        for row in &self.counts {
            for c in 0..3 {
                out[c] += row[c];
            }
        }
        out
    }

    /// Aligned table with rows and columns in `order`.
    pub fn text_table(&self, order: &[SentimentLabel; 3]) -> String {
        let mut header = vec!["Actual/Predicted".to_string()];
        header.extend(order.iter().map(|l| capitalized(*l)));
        let mut t = TextTable::new(header);
        for &a in order {
            let mut row = vec![capitalized(a)];
            row.extend(order.iter().map(|&p| self.get(a, p).to_string()));
            t.push(row);
        }
        t.render()
    }

    /// CSV `actual,negative,neutral,positive`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["actual", "negative", "neutral", "positive"])?;
        for a in SentimentLabel::ALL {
            let row = self.counts[a.index()];
            w.write_record([
                a.as_str().to_string(),
                row[0].to_string(),
                row[1].to_string(),
                row[2].to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))
    }
}

pub(crate) fn capitalized(l: SentimentLabel) -> String {
    let s = l.as_str();
    s[..1].to_ascii_uppercase() + &s[1..]
}

/// Display order used by the published tables.
pub const DISPLAY_ORDER: [SentimentLabel; 3] = [
    SentimentLabel::Positive,
    SentimentLabel::Neutral,
    SentimentLabel::Negative,
];

pub fn confusion(truth: &[SentimentLabel], pred: &[SentimentLabel]) -> Result<ConfusionMatrix> {
    if truth.len() != pred.len() {
        return Err(Error::InvalidArgument(format!(
            "{} true labels but {} predictions",
            truth.len(),
            pred.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::InvalidArgument("no labels to compare".into()));
    }
    let mut cm = ConfusionMatrix::default();
    for (t, p) in truth.iter().zip(pred) {
        cm.counts[t.index()][p.index()] += 1;
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub accuracy: f64,
    /// Canonical label order.
    pub per_class: [ClassMetrics; 3],
    pub macro_f1: f64,
}

impl MetricsReport {
    pub fn class(&self, label: SentimentLabel) -> &ClassMetrics {
        &self.per_class[label.index()]
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Accuracy, per-class precision/recall/F1 (zero when a denominator is
/// zero) and macro F1.
pub fn metrics(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::InvalidArgument("confusion matrix is empty".into()));
    }
    let rows = cm.row_sums();
    let cols = cm.col_sums();
    let per_class = [0, 1, 2].map(|c| {
        let tp = cm.counts[c][c];
        let precision = ratio(tp, cols[c]);
        let recall = ratio(tp, rows[c]);
        ClassMetrics {
            precision,
            recall,
            f1: harmonic(precision, recall),
            support: rows[c],
        }
    });
    Ok(MetricsReport {
        accuracy: ratio(cm.trace(), total),
        macro_f1: per_class.iter().map(|m| m.f1).sum::<f64>() / 3.0,
        per_class,
    })
}

/// F1 from pooled true/false positive and negative counts.
pub fn micro_f1(cm: &ConfusionMatrix) -> f64 {
    let tp = cm.trace();
    let fp: u64 = cm.col_sums().iter().sum::<u64>() - tp;
    let fn_: u64 = cm.row_sums().iter().sum::<u64>() - tp;
    harmonic(ratio(tp, tp + fp), ratio(tp, tp + fn_))
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub models: Vec<Hyperparams>,
    pub splits: Vec<SplitRatio>,
    /// Folds for cross-validation on each training part; `None` skips it.
    pub k: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvSummary {
    pub fold_accuracy: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std: f64,
}

impl CvSummary {
    fn from_folds(fold_accuracy: Vec<f64>) -> Self {
        let n = fold_accuracy.len() as f64;
        let mean = fold_accuracy.iter().sum::<f64>() / n;
        let var = if n > 1.0 {
            fold_accuracy.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        CvSummary {
            fold_accuracy,
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub model: ModelKind,
    pub split: SplitRatio,
    pub confusion: Option<ConfusionMatrix>,
    pub metrics: Option<MetricsReport>,
    pub cv: Option<CvSummary>,
    /// Training or evaluation failures for this cell.
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub cells: Vec<CellResult>,
}

fn evaluate_model(model: &ClassifierModel, test: &Dataset) -> Result<ConfusionMatrix> {
    let pred = model.predict_labels(test.vectors())?;
    confusion(test.labels(), &pred)
}

/// Runs every model on every split, plus k-fold CV on each training part.
/// `on_model` receives each train-part model as soon as it is fitted.
pub fn run_experiment_with(
    data: &Dataset,
    cfg: &ExperimentConfig,
    mut on_model: impl FnMut(&CellResult, &ClassifierModel) -> Result<()>,
) -> Result<ExperimentReport> {
    if cfg.models.is_empty() || cfg.splits.is_empty() {
        return Err(Error::InvalidArgument("need at least one model and one split".into()));
    }
    let mut cells = Vec::new();
    for split_ratio in &cfg.splits {
        let (train, test) = split(data, *split_ratio, cfg.seed)?;
        let folds = cfg.k.map(|k| kfold(train.labels(), k, cfg.seed));
        for hp in &cfg.models {
            let mut cell = CellResult {
                model: hp.kind(),
                split: *split_ratio,
                confusion: None,
                metrics: None,
                cv: None,
                errors: Vec::new(),
            };
            match models::fit(&train, hp, cfg.seed).and_then(|m| {
                let cm = evaluate_model(&m, &test)?;
                Ok((m, cm))
            }) {
                Ok((model, cm)) => {
                    cell.metrics = Some(metrics(&cm)?);
                    cell.confusion = Some(cm);
                    on_model(&cell, &model)?;
                }
                Err(e) => cell.errors.push(format!("train/test: {e}")),
            }
            match &folds {
                Some(Ok(f)) => {
                    let accs: Vec<Result<f64>> = (0..f.k)
                        .into_par_iter()
                        .map(|fold| {
                            let tr = train.subset(&f.train_indices(fold));
                            let te = train.subset(&f.test_indices(fold));
                            let m = models::fit(&tr, hp, seed::derive_indexed(cfg.seed, "cv-fold", fold as u64))?;
                            Ok(metrics(&evaluate_model(&m, &te)?)?.accuracy)
                        })
                        .collect();
                    match accs.into_iter().collect::<Result<Vec<f64>>>() {
                        Ok(a) => cell.cv = Some(CvSummary::from_folds(a)),
                        Err(e) => cell.errors.push(format!("cross-validation: {e}")),
                    }
                }
                Some(Err(e)) => cell.errors.push(format!("cross-validation: {e}")),
                None => {}
            }
            for e in &cell.errors {
                log::error!("{} {}: {e}", cell.model, cell.split);
            }
            cells.push(cell);
        }
    }
    Ok(ExperimentReport { cells })
}

pub fn run_experiment(data: &Dataset, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_with(data, cfg, |_, _| Ok(()))
}

fn pct(v: f64) -> String {
    format!("{:.2}%", v * 100.0)
}

impl ExperimentReport {
    pub fn cell(&self, model: ModelKind, split: SplitRatio) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.model == model && c.split == split)
    }

    pub fn has_failures(&self) -> bool {
        self.cells.iter().any(|c| !c.errors.is_empty())
    }

    fn models(&self) -> Vec<ModelKind> {
        let mut out: Vec<ModelKind> = Vec::new();
        for c in &self.cells {
            if !out.contains(&c.model) {
                out.push(c.model);
            }
        }
        out
    }

    fn splits(&self) -> Vec<SplitRatio> {
        let mut out: Vec<SplitRatio> = Vec::new();
        for c in &self.cells {
            if !out.contains(&c.split) {
                out.push(c.split);
            }
        }
        out
    }

    /// CSV with one row per model, split and metric:
    /// `model,split,metric,class,value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["model", "split", "metric", "class", "value"])?;
        for c in &self.cells {
            let (m, s) = (c.model.as_str(), c.split.name());
            let mut row = |metric: &str, class: &str, value: String| w.write_record([m, &s, metric, class, &value]);
            if let Some(r) = &c.metrics {
                row("accuracy", "all", format!("{:.6}", r.accuracy))?;
                for l in SentimentLabel::ALL {
                    let cm = r.class(l);
                    row("precision", l.as_str(), format!("{:.6}", cm.precision))?;
                    row("recall", l.as_str(), format!("{:.6}", cm.recall))?;
                    row("f1", l.as_str(), format!("{:.6}", cm.f1))?;
                }
                row("macro_f1", "all", format!("{:.6}", r.macro_f1))?;
            }
            if let Some(cv) = &c.cv {
                row("cv_accuracy_mean", "all", format!("{:.6}", cv.mean))?;
                row("cv_accuracy_std", "all", format!("{:.6}", cv.std))?;
            }
            for e in &c.errors {
                row("error", "all", e.clone())?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv>", e))
    }

    /// Test accuracy, models by splits.
    pub fn accuracy_table(&self) -> String {
        let splits = self.splits();
        let mut header = vec!["Model".to_string()];
        header.extend(splits.iter().map(|s| s.name()));
        let mut t = TextTable::new(header);
        for m in self.models() {
            let mut row = vec![m.display_name().to_string()];
            for s in &splits {
                row.push(match self.cell(m, *s).and_then(|c| c.metrics.as_ref()) {
                    Some(r) => pct(r.accuracy),
                    None => "failed".into(),
                });
            }
            t.push(row);
        }
        t.render()
    }

    /// Cross-validated accuracy (mean ± sample std), models by splits.
    pub fn cv_table(&self) -> String {
        let splits = self.splits();
        let mut header = vec!["Model".to_string()];
        header.extend(splits.iter().map(|s| format!("{} CV", s.name())));
        let mut t = TextTable::new(header);
        for m in self.models() {
            let mut row = vec![m.display_name().to_string()];
            for s in &splits {
                row.push(match self.cell(m, *s) {
                    Some(CellResult { cv: Some(cv), .. }) => {
                        format!("{:.2}% ± {:.2}", cv.mean * 100.0, cv.std * 100.0)
                    }
                    Some(c) if c.errors.is_empty() => "-".into(),
                    _ => "failed".into(),
                });
            }
            t.push(row);
        }
        t.render()
    }

    /// The split used for the per-class table: 70-30 when present,
    /// otherwise the first split.
    pub fn detail_split(&self) -> Option<SplitRatio> {
        let splits = self.splits();
        splits
            .iter()
            .find(|s| **s == SplitRatio::P70_30)
            .or(splits.first())
            .copied()
    }

    /// Per-class precision, recall and F1 at [`Self::detail_split`].
    pub fn per_class_table(&self) -> String {
        let mut header = vec!["Model".to_string()];
        for l in DISPLAY_ORDER {
            let short = &capitalized(l)[..3];
            header.extend([format!("{short}-P"), format!("{short}-R"), format!("{short}-F")]);
        }
        let mut t = TextTable::new(header);
        let Some(split) = self.detail_split() else {
            return t.render();
        };
        for m in self.models() {
            let mut row = vec![m.display_name().to_string()];
            match self.cell(m, split).and_then(|c| c.metrics.as_ref()) {
                Some(r) => {
                    for l in DISPLAY_ORDER {
                        let c = r.class(l);
                        row.extend([pct(c.precision), pct(c.recall), pct(c.f1)]);
                    }
                }
                None => row.extend(std::iter::repeat_n("failed".to_string(), 9)),
            }
            t.push(row);
        }
        t.render()
    }
}
