use std::path::Path;

use rayon::prelude::*;

use super::{create_dir, require_file, write_file, ExploreArgs, InputFormat, LabelSource, PreprocessArgs, RelabelArgs};
use crate::corpus::{
    frequency_text_table, load_sentiment140, load_tweet_dump, read_corpus_file, word_frequency, write_corpus,
    CorpusDoc, FrequencyMode, LabeledDoc,
};
use crate::error::{Error, Result};
use crate::eval::DISPLAY_ORDER;
use crate::label::SentimentLabel;
use crate::lexicon::{relabel_corpus_with, RelabelOptions};
use crate::textpipe::preprocess;

/// Writes `processed.csv`: one row per input record, labels left empty.
pub fn cmd_preprocess(args: &PreprocessArgs) -> Result<()> {
    require_file(&args.io.input)?;
    let (records, stats) = match args.format {
        InputFormat::Sentiment140 => load_sentiment140(&args.io.input, args.limit)?,
        InputFormat::Dump => {
            let (mut r, s) = load_tweet_dump(&args.io.input)?;
            if let Some(n) = args.limit {
                r.truncate(n);
            }
            (r, s)
        }
    };
    let config = args.pipeline.config();
    let docs: Vec<CorpusDoc> = records
        .par_iter()
        .map(|r| CorpusDoc {
            doc: preprocess(r, &config),
            original: r.original_label,
            label: None,
        })
        .collect();
    create_dir(&args.io.output_dir)?;
    let out = args.io.output_dir.join("processed.csv");
    write_file(&out, |buf| write_corpus(buf, &docs))?;
    let emptied = docs.iter().filter(|d| d.doc.dropped_all).count();
    println!("{stats}");
    println!("documents with no tokens left: {emptied}");
    println!("wrote {}", out.display());
    Ok(())
}

/// Writes `labeled_{method}.csv` and the before/after distribution
/// `relabel_{method}.csv`.
pub fn cmd_relabel(args: &RelabelArgs) -> Result<()> {
    require_file(&args.io.input)?;
    let pipeline = args.pipeline.config();
    let lex = args.lexicon.load(&pipeline)?;
    let thresholds = args.lexicon.thresholds()?;
    let docs = read_corpus_file(&args.io.input)?;
    let pairs: Vec<_> = docs.into_iter().map(|d| (d.doc, d.original)).collect();
    let opts = RelabelOptions {
        drop_objective: args.drop_objective,
    };
    let (labeled, report) = relabel_corpus_with(&pairs, args.method, &lex, &thresholds, opts)?;
    let corpus: Vec<CorpusDoc> = labeled
        .into_iter()
        .map(|d| CorpusDoc {
            doc: d.doc,
            original: d.original,
            label: Some(d.label),
        })
        .collect();
    create_dir(&args.io.output_dir)?;
    let method = args.method.as_str();
    let labeled_path = args.io.output_dir.join(format!("labeled_{method}.csv"));
    write_file(&labeled_path, |buf| write_corpus(buf, &corpus))?;
    let report_path = args.io.output_dir.join(format!("relabel_{method}.csv"));
    write_file(&report_path, |buf| report.write_csv(buf))?;
    println!("{}", report.text_table());
    println!("wrote {} and {}", labeled_path.display(), report_path.display());
    Ok(())
}

/// Labeled documents from a corpus file, using either the assigned label or
/// the original one. Documents without the requested label are skipped.
pub(crate) fn load_labeled(path: &Path, source: LabelSource) -> Result<Vec<LabeledDoc>> {
    require_file(path)?;
    let docs = read_corpus_file(path)?;
    let out: Vec<LabeledDoc> = docs
        .into_iter()
        .filter_map(|d| {
            let label = match source {
                LabelSource::Relabeled => d.label,
                LabelSource::Original => d.original.known(),
            }?;
            Some(LabeledDoc {
                doc: d.doc,
                original: d.original,
                label,
            })
        })
        .collect();
    if out.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{} has no documents with {} labels",
            path.display(),
            match source {
                LabelSource::Relabeled => "assigned",
                LabelSource::Original => "original",
            }
        )));
    }
    Ok(out)
}

/// Writes `words_{class}_{common|unique}.csv` for every class and returns
/// the rendered tables.
pub(crate) fn write_word_tables(docs: &[LabeledDoc], dir: &Path, top_k: usize) -> Result<String> {
    let mut rendered = String::new();
    for mode in [FrequencyMode::Common, FrequencyMode::Unique] {
        let tables: Vec<_> = DISPLAY_ORDER
            .iter()
            .map(|&c| word_frequency(docs, c, mode).truncated(top_k))
            .collect();
        for t in &tables {
            let path = dir.join(format!("words_{}_{}.csv", t.class, mode.as_str()));
            write_file(&path, |buf| t.write_csv(buf))?;
        }
        let refs: Vec<_> = tables.iter().collect();
        rendered.push_str(&frequency_text_table(&refs, top_k));
        rendered.push('\n');
    }
    Ok(rendered)
}

pub fn cmd_explore(args: &ExploreArgs) -> Result<()> {
    let docs = load_labeled(&args.io.input, args.labels)?;
    create_dir(&args.io.output_dir)?;
    let tables = write_word_tables(&docs, &args.io.output_dir, args.top_k)?;
    let mut counts = [0usize; 3];
    for d in &docs {
        counts[d.label.index()] += 1;
    }
    for l in SentimentLabel::ALL {
        println!("{l}: {} documents", counts[l.index()]);
    }
    print!("{tables}");
    Ok(())
}
