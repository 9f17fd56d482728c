use std::fs::File;
use std::io::BufReader;

use rayon::prelude::*;

use super::pipeline::load_labeled;
use super::{
    create_dir, parse_models, require_file, write_file, write_text, EvaluateArgs, HyperArgs, TrainArgs,
    TruncationWeight,
};
use crate::error::{Error, Result};
use crate::eval::{confusion, metrics, run_experiment_with, ExperimentConfig, SplitRatio, DISPLAY_ORDER};
use crate::features::{
    build_vocabulary, rank_and_truncate, TfidfVectorizer, TruncationPolicy, Vocabulary, WeightSource,
};
use crate::label::SentimentLabel;
use crate::models::{
    load_model, save_model, ClassWeight, Dataset, ForestConfig, GbtConfig, Hyperparams, ModelKind, NaiveBayesConfig,
    SoftmaxConfig, SvmConfig,
};
use crate::textpipe::ProcessedDoc;

pub(crate) fn hyperparams(kind: ModelKind, h: &HyperArgs, cw: ClassWeight) -> Hyperparams {
    let hp = match kind {
        ModelKind::NaiveBayes => {
            let d = NaiveBayesConfig::default();
            Hyperparams::NaiveBayes(NaiveBayesConfig {
                laplace_alpha: h.nb_alpha.unwrap_or(d.laplace_alpha),
                ..d
            })
        }
        ModelKind::Softmax => {
            let d = SoftmaxConfig::default();
            Hyperparams::Softmax(SoftmaxConfig {
                learning_rate: h.mlr_learning_rate.unwrap_or(d.learning_rate),
                l2: h.mlr_l2.unwrap_or(d.l2),
                epochs: h.mlr_epochs.unwrap_or(d.epochs),
                batch: h.mlr_batch.unwrap_or(d.batch),
                ..d
            })
        }
        ModelKind::Svm => {
            let d = SvmConfig::default();
            Hyperparams::Svm(SvmConfig {
                c: h.svm_c.unwrap_or(d.c),
                epochs: h.svm_epochs.unwrap_or(d.epochs),
                learning_rate: h.svm_learning_rate.unwrap_or(d.learning_rate),
                ..d
            })
        }
        ModelKind::RandomForest => {
            let d = ForestConfig::default();
            Hyperparams::RandomForest(ForestConfig {
                n_trees: h.rf_trees.unwrap_or(d.n_trees),
                max_depth: h.rf_max_depth.or(d.max_depth),
                features_per_split: h.rf_features_per_split.or(d.features_per_split),
                min_leaf: h.rf_min_leaf.unwrap_or(d.min_leaf),
                bootstrap: !h.rf_no_bootstrap,
                ..d
            })
        }
        ModelKind::Gbt => {
            let d = GbtConfig::default();
            Hyperparams::Gbt(GbtConfig {
                n_rounds: h.gbt_rounds.unwrap_or(d.n_rounds),
                depth: h.gbt_depth.unwrap_or(d.depth),
                shrinkage: h.gbt_shrinkage.unwrap_or(d.shrinkage),
                ..d
            })
        }
    };
    hp.with_class_weight(cw)
}

fn parse_splits(names: &[String]) -> Result<Vec<SplitRatio>> {
    let mut out: Vec<SplitRatio> = Vec::new();
    for n in names {
        if n.trim().eq_ignore_ascii_case("all") {
            out.extend(SplitRatio::PRESETS);
        } else {
            out.push(n.parse()?);
        }
    }
    let mut dedup: Vec<SplitRatio> = Vec::new();
    for s in out {
        if !dedup.contains(&s) {
            dedup.push(s);
        }
    }
    Ok(dedup)
}

/// Featurizes the labeled corpus, runs every model on every split and
/// writes:
/// - `report.csv` (`model,split,metric,class,value`),
/// - `confusion.csv` (`model,split,actual,negative,neutral,positive`),
/// - `accuracy_table.txt`, `cv_table.txt`, `per_class_table.txt`,
/// - `vocab.tsv` and `models/{model}_{split}.json`.
///
/// A model that fails to train is reported in place of its results; the
/// command then fails with a training error after writing everything else.
pub fn cmd_train_eval(args: &TrainArgs, seed: u64) -> Result<()> {
    let models = parse_models(&args.models)?;
    let splits = parse_splits(&args.splits)?;
    let docs = load_labeled(&args.io.input, args.labels)?;
    let pipeline = args.pipeline.config();
    let lex = args.lexicon.load(&pipeline)?;

    let weight_source = match args.truncation {
        TruncationWeight::Valence => Some(WeightSource::AbsValence),
        TruncationWeight::Polarity => Some(WeightSource::AbsPolarity),
        TruncationWeight::Off => None,
    };
    let tokens: Vec<Vec<String>> = match weight_source {
        Some(ws) => {
            let policy = TruncationPolicy::draw(seed, ws);
            println!("truncation threshold: {:.6}", policy.threshold());
            docs.par_iter()
                .map(|d| rank_and_truncate(&d.doc, &lex, &policy).tokens)
                .collect()
        }
        None => docs.iter().map(|d| d.doc.tokens.clone()).collect(),
    };
    let vocab = build_vocabulary(&tokens, args.min_df)?;
    let vectorizer = TfidfVectorizer::new(vocab);
    let vectors = tokens.par_iter().map(|t| vectorizer.transform(t)).collect();
    let labels: Vec<SentimentLabel> = docs.iter().map(|d| d.label).collect();
    let data = Dataset::new(vectors, labels, vectorizer.dimension())?;
    println!("documents: {}, features: {}", data.len(), data.dimension());

    let out = &args.io.output_dir;
    let model_dir = out.join("models");
    create_dir(out)?;
    if !args.no_save_models {
        create_dir(&model_dir)?;
    }
    write_file(&out.join("vocab.tsv"), |buf| {
        vectorizer
            .vocabulary()
            .write_tsv(buf)
            .map_err(|e| Error::io("vocab.tsv", e))
    })?;

    let config = ExperimentConfig {
        models: models
            .iter()
            .map(|&m| hyperparams(m, &args.hyper, args.class_weight))
            .collect(),
        splits,
        k: (args.k > 0).then_some(args.k),
        seed,
    };
    let report = run_experiment_with(&data, &config, |cell, model| {
        if args.no_save_models {
            return Ok(());
        }
        save_model(model, &model_dir.join(format!("{}_{}.json", cell.model, cell.split)))
    })?;

    write_file(&out.join("report.csv"), |buf| report.write_csv(buf))?;
    write_file(&out.join("confusion.csv"), |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["model", "split", "actual", "negative", "neutral", "positive"])?;
        for c in &report.cells {
            if let Some(cm) = &c.confusion {
                for a in SentimentLabel::ALL {
                    let row = cm.counts[a.index()];
                    w.write_record([
                        c.model.as_str().to_string(),
                        c.split.name(),
                        a.as_str().to_string(),
                        row[0].to_string(),
                        row[1].to_string(),
                        row[2].to_string(),
                    ])?;
                }
            }
        }
        w.flush().map_err(|e| Error::io("confusion.csv", e))
    })?;
    let accuracy = report.accuracy_table();
    let cv = report.cv_table();
    let per_class = report.per_class_table();
    write_text(&out.join("accuracy_table.txt"), &accuracy)?;
    write_text(&out.join("cv_table.txt"), &cv)?;
    write_text(&out.join("per_class_table.txt"), &per_class)?;

    println!("Test accuracy\n{accuracy}");
    if config.k.is_some() {
        println!("Cross-validated accuracy\n{cv}");
    }
    if let Some(s) = report.detail_split() {
        println!("Per-class scores at {s}\n{per_class}");
    }
    let failed: Vec<String> = report
        .cells
        .iter()
        .filter(|c| !c.errors.is_empty())
        .map(|c| format!("{} {}: {}", c.model, c.split, c.errors.join("; ")))
        .collect();
    if !failed.is_empty() {
        return Err(Error::Training(format!(
            "{} of {} cells failed: {}",
            failed.len(),
            report.cells.len(),
            failed.join(" | ")
        )));
    }
    Ok(())
}

/// Scores a saved model on a labeled corpus; writes `evaluation.csv`
/// (`metric,class,value`) and `evaluation_confusion.csv`.
pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    require_file(&args.model)?;
    require_file(&args.vocab)?;
    let model = load_model(&args.model)?;
    let file = File::open(&args.vocab).map_err(|e| Error::io(&args.vocab, e))?;
    let vocab = Vocabulary::read_tsv(BufReader::new(file))?;
    if vocab.len() != model.dimension {
        return Err(Error::DimensionMismatch {
            expected: model.dimension,
            actual: vocab.len(),
        });
    }
    let docs = load_labeled(&args.io.input, args.labels)?;
    let vectorizer = TfidfVectorizer::new(vocab);
    let vectors: Vec<_> = docs.par_iter().map(|d| vectorizer.transform(&d.doc.tokens)).collect();
    let predicted = model.predict_labels(&vectors)?;
    let truth: Vec<SentimentLabel> = docs.iter().map(|d| d.label).collect();
    let cm = confusion(&truth, &predicted)?;
    let r = metrics(&cm)?;

    create_dir(&args.io.output_dir)?;
    write_file(&args.io.output_dir.join("evaluation.csv"), |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["metric", "class", "value"])?;
        w.write_record(["accuracy", "all", &format!("{:.6}", r.accuracy)])?;
        for l in SentimentLabel::ALL {
            let c = r.class(l);
            w.write_record(["precision", l.as_str(), &format!("{:.6}", c.precision)])?;
            w.write_record(["recall", l.as_str(), &format!("{:.6}", c.recall)])?;
            w.write_record(["f1", l.as_str(), &format!("{:.6}", c.f1)])?;
        }
        w.write_record(["macro_f1", "all", &format!("{:.6}", r.macro_f1)])?;
        w.flush().map_err(|e| Error::io("evaluation.csv", e))
    })?;
    write_file(&args.io.output_dir.join("evaluation_confusion.csv"), |buf| {
        cm.write_csv(buf)
    })?;
    println!(
        "{} on {} documents: accuracy {:.2}%, macro F1 {:.4}",
        model.kind().display_name(),
        docs.len(),
        r.accuracy * 100.0,
        r.macro_f1
    );
    println!("{}", cm.text_table(&DISPLAY_ORDER));
    Ok(())
}

/// Vectorizes processed documents with a saved vocabulary.
pub(crate) fn vectorize_with(
    vocab_path: &std::path::Path,
    docs: &[ProcessedDoc],
) -> Result<(Vec<crate::features::SparseVector>, usize)> {
    let file = File::open(vocab_path).map_err(|e| Error::io(vocab_path, e))?;
    let vectorizer = TfidfVectorizer::new(Vocabulary::read_tsv(BufReader::new(file))?);
    let vectors = docs.par_iter().map(|d| vectorizer.transform(&d.tokens)).collect();
    Ok((vectors, vectorizer.dimension()))
}
