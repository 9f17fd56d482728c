//! Corpus ingestion (Sentiment140 CSV, newline-delimited JSON dumps), the
//! on-disk document format used between pipeline stages, and per-class word
//! frequency tables.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::label::{OriginalLabel, SentimentLabel};
use crate::table::TextTable;
use crate::textpipe::ProcessedDoc;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TweetRecord {
    pub id: String,
    pub raw_text: String,
    pub original_label: OriginalLabel,
    pub user: Option<String>,
    pub timestamp: Option<String>,
}

impl TweetRecord {
    pub fn unlabeled(id: impl Into<String>, raw_text: impl Into<String>) -> Self {
        TweetRecord {
            id: id.into(),
            raw_text: raw_text.into(),
            original_label: OriginalLabel::Unknown,
            user: None,
            timestamp: None,
        }
    }

    pub fn labeled(id: impl Into<String>, raw_text: impl Into<String>, label: SentimentLabel) -> Self {
        TweetRecord {
            original_label: OriginalLabel::Known(label),
            ..Self::unlabeled(id, raw_text)
        }
    }
}

/// Counts gathered while loading a corpus. `total_records` counts records
/// actually yielded; malformed rows are skipped and counted separately.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub total_records: usize,
    pub per_class_counts: [usize; 3],
    pub unknown_label: usize,
    pub malformed_rows: usize,
}

impl CorpusStats {
    fn record(&mut self, label: OriginalLabel) {
        self.total_records += 1;
        match label {
            OriginalLabel::Known(l) => self.per_class_counts[l.index()] += 1,
            OriginalLabel::Unknown => self.unknown_label += 1,
        }
    }

    pub fn count(&self, label: SentimentLabel) -> usize {
        self.per_class_counts[label.index()]
    }
}

impl std::fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "records={} negative={} neutral={} positive={} unknown={} malformed={}",
            self.total_records,
            self.per_class_counts[0],
            self.per_class_counts[1],
            self.per_class_counts[2],
            self.unknown_label,
            self.malformed_rows
        )
    }
}

fn latin1(bytes: &[u8]) -> String {
    bytes.iter().map(|&b| b as char).collect()
}

/// Streaming reader over a Sentiment140 CSV
/// (`polarity,id,date,query,user,text`, Latin-1 encoded).
pub struct Sentiment140Reader<R: Read> {
    reader: csv::Reader<R>,
    record: csv::ByteRecord,
    limit: Option<usize>,
    stats: CorpusStats,
    path: PathBuf,
}

impl Sentiment140Reader<File> {
    pub fn open(path: &Path, limit: Option<usize>) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::from_reader(file, limit, path))
    }
}

impl<R: Read> Sentiment140Reader<R> {
    pub fn from_reader(inner: R, limit: Option<usize>, path: &Path) -> Self {
        let reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(inner);
        Sentiment140Reader {
            reader,
            record: csv::ByteRecord::new(),
            limit,
            stats: CorpusStats::default(),
            path: path.to_path_buf(),
        }
    }

    pub fn stats(&self) -> &CorpusStats {
        &self.stats
    }

    fn next_record(&mut self) -> Result<Option<TweetRecord>> {
        loop {
            if self.limit.is_some_and(|l| self.stats.total_records >= l) {
                return Ok(None);
            }
            match self.reader.read_byte_record(&mut self.record) {
                Ok(false) => return Ok(None),
                Ok(true) => {}
                Err(e) if e.is_io_error() => {
                    let csv::ErrorKind::Io(io) = e.into_kind() else {
                        unreachable!()
                    };
                    return Err(Error::io(&self.path, io));
                }
                Err(e) => {
                    log::warn!("{}: skipping unparsable row: {e}", self.path.display());
                    self.stats.malformed_rows += 1;
                    continue;
                }
            }
            if self.record.len() != 6 {
                self.stats.malformed_rows += 1;
                continue;
            }
            let code = latin1(&self.record[0]);
            let label = SentimentLabel::from_polarity_code(&code)
                .map(OriginalLabel::Known)
                .unwrap_or(OriginalLabel::Unknown);
            let rec = TweetRecord {
                id: latin1(&self.record[1]),
                raw_text: latin1(&self.record[5]),
                original_label: label,
                user: Some(latin1(&self.record[4])).filter(|u| !u.is_empty()),
                timestamp: Some(latin1(&self.record[2])).filter(|t| !t.is_empty()),
            };
            self.stats.record(label);
            return Ok(Some(rec));
        }
    }
}

impl<R: Read> Iterator for Sentiment140Reader<R> {
    type Item = Result<TweetRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_record().transpose()
    }
}

/// Loads up to `limit` records from a Sentiment140 CSV, in file order.
pub fn load_sentiment140(path: &Path, limit: Option<usize>) -> Result<(Vec<TweetRecord>, CorpusStats)> {
    let mut reader = Sentiment140Reader::open(path, limit)?;
    let records = reader.by_ref().collect::<Result<Vec<_>>>()?;
    Ok((records, reader.stats.clone()))
}

fn json_string(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Loads a newline-delimited JSON dump, one object per line with at least a
/// `text` field. Optional fields: `id`, `user`, `timestamp` (or
/// `created_at`) and a gold `label` (`negative|neutral|positive` or
/// `0|2|4`). Records without a gold label get [`OriginalLabel::Unknown`].
pub fn load_tweet_dump(path: &Path) -> Result<(Vec<TweetRecord>, CorpusStats)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    let mut stats = CorpusStats::default();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let obj: Value = match serde_json::from_str(&line) {
            Ok(v @ Value::Object(_)) => v,
            _ => {
                stats.malformed_rows += 1;
                continue;
            }
        };
        let Some(text) = obj.get("text").and_then(Value::as_str) else {
            stats.malformed_rows += 1;
            continue;
        };
        let label = obj
            .get("label")
            .and_then(json_string)
            .and_then(|s| s.parse::<SentimentLabel>().ok())
            .map(OriginalLabel::Known)
            .unwrap_or(OriginalLabel::Unknown);
        let rec = TweetRecord {
            id: obj
                .get("id")
                .and_then(json_string)
                .unwrap_or_else(|| (i + 1).to_string()),
            raw_text: text.to_string(),
            original_label: label,
            user: obj.get("user").and_then(json_string),
            timestamp: obj
                .get("timestamp")
                .or_else(|| obj.get("created_at"))
                .and_then(json_string),
        };
        stats.record(label);
        records.push(rec);
    }
    Ok((records, stats))
}

/// A preprocessed document with its original and assigned labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDoc {
    pub doc: ProcessedDoc,
    pub original: OriginalLabel,
    pub label: SentimentLabel,
}

impl LabeledDoc {
    pub fn new(tokens: &[&str], label: SentimentLabel) -> Self {
        LabeledDoc {
            doc: ProcessedDoc::new("", tokens.iter().map(|s| s.to_string()).collect()),
            original: OriginalLabel::Unknown,
            label,
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.doc.tokens
    }
}

/// A row of the inter-stage document file: `id,original_label,label,tokens`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusDoc {
    pub doc: ProcessedDoc,
    pub original: OriginalLabel,
    pub label: Option<SentimentLabel>,
}

#[derive(Serialize, Deserialize)]
struct DocRow {
    id: String,
    original_label: String,
    label: String,
    tokens: String,
}

pub fn write_corpus<W: Write>(out: W, docs: &[CorpusDoc]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for d in docs {
        w.serialize(DocRow {
            id: d.doc.source_id.clone(),
            original_label: d.original.as_str().to_string(),
            label: d.label.map(|l| l.as_str().to_string()).unwrap_or_default(),
            tokens: d.doc.tokens.join(" "),
        })?;
    }
    w.flush().map_err(|e| Error::io("<corpus output>", e))?;
    Ok(())
}

pub fn write_corpus_file(path: &Path, docs: &[CorpusDoc]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_corpus(std::io::BufWriter::new(file), docs)
}

pub fn read_corpus_file(path: &Path) -> Result<Vec<CorpusDoc>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(BufReader::new(file));
    let mut docs = Vec::new();
    for (i, row) in r.deserialize::<DocRow>().enumerate() {
        let row = row?;
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 2,
            message,
        };
        let original = row
            .original_label
            .parse::<OriginalLabel>()
            .map_err(|e| parse_err(e.to_string()))?;
        let label = if row.label.trim().is_empty() {
            None
        } else {
            Some(
                row.label
                    .parse::<SentimentLabel>()
                    .map_err(|e| parse_err(e.to_string()))?,
            )
        };
        docs.push(CorpusDoc {
            doc: ProcessedDoc::new(row.id, row.tokens.split_whitespace().map(str::to_string).collect()),
            original,
            label,
        });
    }
    Ok(docs)
}

/// Documents of a corpus file that carry an assigned label.
pub fn labeled_docs(docs: Vec<CorpusDoc>) -> Vec<LabeledDoc> {
    docs.into_iter()
        .filter_map(|d| {
            d.label.map(|label| LabeledDoc {
                doc: d.doc,
                original: d.original,
                label,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrequencyMode {
    /// All token occurrences in the class.
    Common,
    /// Occurrences of tokens that appear in no document of another class.
    Unique,
}

impl FrequencyMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FrequencyMode::Common => "common",
            FrequencyMode::Unique => "unique",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordFrequencyTable {
    pub class: SentimentLabel,
    pub mode: FrequencyMode,
    /// Sorted by count descending, then token ascending.
    pub rows: Vec<(String, u64)>,
}

impl WordFrequencyTable {
    pub fn truncated(mut self, k: usize) -> Self {
        self.rows.truncate(k);
        self
    }

    pub fn total(&self) -> u64 {
        self.rows.iter().map(|(_, c)| c).sum()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["token", "count"])?;
        for (tok, count) in &self.rows {
            w.write_record([tok.as_str(), &count.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<table output>", e))?;
        Ok(())
    }
}

/// Per-class token counts. See [`FrequencyMode`] for the two counting rules.
pub fn word_frequency(docs: &[LabeledDoc], class: SentimentLabel, mode: FrequencyMode) -> WordFrequencyTable {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    let mut elsewhere: HashSet<&str> = HashSet::new();
    for d in docs {
        if d.label == class {
            for t in d.tokens() {
                *counts.entry(t.as_str()).or_default() += 1;
            }
        } else if mode == FrequencyMode::Unique {
            elsewhere.extend(d.tokens().iter().map(String::as_str));
        }
    }
    let mut rows: Vec<(String, u64)> = counts
        .into_iter()
        .filter(|(t, _)| !elsewhere.contains(t))
        .map(|(t, c)| (t.to_string(), c))
        .collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    WordFrequencyTable { class, mode, rows }
}

/// Positive, negative and neutral columns side by side, one `Sr.` row per rank.
pub fn frequency_text_table(tables: &[&WordFrequencyTable], k: usize) -> String {
    let mut header = vec!["Sr.".to_string()];
    for t in tables {
        header.push(format!("{} ({})", t.class, t.mode.as_str()));
        header.push("Count".to_string());
    }
    let mut table = TextTable::new(header);
    let depth = tables.iter().map(|t| t.rows.len().min(k)).max().unwrap_or(0);
    for i in 0..depth {
        let mut row = vec![(i + 1).to_string()];
        for t in tables {
            match t.rows.get(i) {
                Some((tok, c)) => {
                    row.push(tok.clone());
                    row.push(c.to_string());
                }
                None => {
                    row.push(String::new());
                    row.push(String::new());
                }
            }
        }
        table.push(row);
    }
    table.render()
}

#[cfg(test)]
mod tests {
    use super::*;
    use SentimentLabel::*;

    fn fixture_docs() -> Vec<LabeledDoc> {
        vec![
            LabeledDoc::new(&["good", "day"], Positive),
            LabeledDoc::new(&["good"], Positive),
            LabeledDoc::new(&["bad", "day"], Negative),
        ]
    }

    #[test]
    fn common_words_hand_count() {
        let t = word_frequency(&fixture_docs(), Positive, FrequencyMode::Common);
        assert_eq!(t.rows, vec![("good".into(), 2), ("day".into(), 1)]);
    }

    #[test]
    fn unique_words_exclude_tokens_seen_in_other_classes() {
        let t = word_frequency(&fixture_docs(), Positive, FrequencyMode::Unique);
        assert_eq!(t.rows, vec![("good".into(), 2)]);
    }

    #[test]
    fn empty_collection_gives_empty_table() {
        let t = word_frequency(&[], Neutral, FrequencyMode::Common);
        assert!(t.rows.is_empty());
    }

    #[test]
    fn ties_sort_lexicographically() {
        let docs = vec![LabeledDoc::new(&["b", "a", "c", "c"], Neutral)];
        let t = word_frequency(&docs, Neutral, FrequencyMode::Common);
        assert_eq!(t.rows, vec![("c".into(), 2), ("a".into(), 1), ("b".into(), 1)]);
    }

    #[test]
    fn sentiment140_row_maps_zero_to_negative() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, r#""0","1","d","q","u","sad day""#).unwrap();
        writeln!(f, r#""4","2","d","q","u","happy""#).unwrap();
        writeln!(f, r#""2","3","d","q","u","meh""#).unwrap();
        let (recs, stats) = load_sentiment140(f.path(), None).unwrap();
        assert_eq!(recs[0].original_label, OriginalLabel::Known(Negative));
        assert_eq!(recs[0].raw_text, "sad day");
        assert_eq!(recs[0].id, "1");
        assert_eq!(recs[1].original_label, OriginalLabel::Known(Positive));
        assert_eq!(recs[2].original_label, OriginalLabel::Known(Neutral));
        assert_eq!(stats.total_records, 3);
    }

    #[test]
    fn malformed_rows_counted_and_skipped() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, r#""0","1","d","q","u","ok""#).unwrap();
        writeln!(f, r#""0","1","d""#).unwrap();
        writeln!(f, r#""4","2","d","q","u","fine""#).unwrap();
        let (recs, stats) = load_sentiment140(f.path(), None).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(stats.malformed_rows, 1);
    }

    #[test]
    fn latin1_bytes_decode_losslessly() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"\"4\",\"1\",\"d\",\"q\",\"u\",\"caf\xe9 time\"\n")
            .unwrap();
        let (recs, _) = load_sentiment140(f.path(), None).unwrap();
        assert_eq!(recs[0].raw_text, "caf\u{e9} time");
    }

    #[test]
    fn empty_file_yields_nothing() {
        let f = tempfile::NamedTempFile::new().unwrap();
        let (recs, stats) = load_sentiment140(f.path(), None).unwrap();
        assert!(recs.is_empty());
        assert_eq!(stats.total_records, 0);
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = load_sentiment140(Path::new("/nonexistent/x.csv"), None).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn dump_lines_map_text_and_skip_missing_text() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, r#"{{"id":"1","text":"great rally"}}"#).unwrap();
        writeln!(f, r#"{{"id":"2","body":"no text here"}}"#).unwrap();
        writeln!(f, r#"{{"id":3,"text":"bad","label":"negative"}}"#).unwrap();
        let (recs, stats) = load_tweet_dump(f.path()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].raw_text, "great rally");
        assert_eq!(recs[0].original_label, OriginalLabel::Unknown);
        assert_eq!(recs[1].id, "3");
        assert_eq!(recs[1].original_label, OriginalLabel::Known(Negative));
        assert_eq!(stats.malformed_rows, 1);
    }

    #[test]
    fn corpus_file_round_trip() {
        let docs = vec![
            CorpusDoc {
                doc: ProcessedDoc::new("a", vec!["good".into(), "day".into()]),
                original: OriginalLabel::Known(Positive),
                label: Some(Neutral),
            },
            CorpusDoc {
                doc: ProcessedDoc::new("b", vec![]),
                original: OriginalLabel::Unknown,
                label: None,
            },
        ];
        let f = tempfile::NamedTempFile::new().unwrap();
        write_corpus_file(f.path(), &docs).unwrap();
        assert_eq!(read_corpus_file(f.path()).unwrap(), docs);
    }

    #[test]
    fn frequency_csv_has_header() {
        let t = word_frequency(&fixture_docs(), Positive, FrequencyMode::Common);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "token,count\ngood,2\nday,1\n");
    }
}
