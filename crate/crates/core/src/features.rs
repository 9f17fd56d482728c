//! TF-IDF feature space and lexicon-ranked token truncation.

use std::collections::{HashMap, HashSet};
use std::hash::Hash;
use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::seed;
use crate::textpipe::ProcessedDoc;

/// Sparse vector with strictly increasing indices and finite nonzero weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    pairs: Vec<(u32, f64)>,
    dimension: usize,
}

impl SparseVector {
    pub fn new(pairs: Vec<(u32, f64)>, dimension: usize) -> Result<Self> {
        for w in pairs.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::InvalidArgument(format!(
                    "sparse indices not strictly increasing: {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        if let Some(&(i, _)) = pairs.iter().find(|(i, _)| *i as usize >= dimension) {
            return Err(Error::InvalidArgument(format!("index {i} >= dimension {dimension}")));
        }
        if let Some(&(i, w)) = pairs.iter().find(|(_, w)| !w.is_finite() || *w == 0.0) {
            return Err(Error::InvalidArgument(format!(
                "weight {w} at index {i} must be finite and nonzero"
            )));
        }
        Ok(SparseVector { pairs, dimension })
    }

    /// Builds from unsorted `(index, weight)` pairs, summing duplicates and
    /// dropping zeros.
    pub fn from_unsorted(mut pairs: Vec<(u32, f64)>, dimension: usize) -> Result<Self> {
        pairs.sort_by_key(|p| p.0);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(pairs.len());
        for (i, w) in pairs {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += w,
                _ => merged.push((i, w)),
            }
        }
        merged.retain(|p| p.1 != 0.0);
        Self::new(merged, dimension)
    }

    pub fn zeros(dimension: usize) -> Self {
        SparseVector {
            pairs: Vec::new(),
            dimension,
        }
    }

    pub fn dense(values: &[f64]) -> Self {
        let pairs = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i as u32, *v))
            .collect();
        SparseVector {
            pairs,
            dimension: values.len(),
        }
    }

    pub fn pairs(&self) -> &[(u32, f64)] {
        &self.pairs
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn nnz(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn get(&self, index: u32) -> f64 {
        self.pairs
            .binary_search_by_key(&index, |p| p.0)
            .map(|i| self.pairs[i].1)
            .unwrap_or(0.0)
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.pairs.iter().map(|&(i, w)| w * dense[i as usize]).sum()
    }

    pub fn norm(&self) -> f64 {
        self.pairs.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    /// `index:weight` pairs separated by spaces.
    pub fn to_line(&self) -> String {
        let parts: Vec<String> = self.pairs.iter().map(|(i, w)| format!("{i}:{w}")).collect();
        parts.join(" ")
    }

    pub fn parse_line(line: &str, dimension: usize) -> Result<Self> {
        let mut pairs = Vec::new();
        for part in line.split_whitespace() {
            let parsed = part
                .split_once(':')
                .and_then(|(i, w)| Some((i.parse::<u32>().ok()?, w.parse::<f64>().ok()?)));
            match parsed {
                Some(p) => pairs.push(p),
                None => return Err(Error::InvalidArgument(format!("bad sparse pair {part:?}"))),
            }
        }
        Self::new(pairs, dimension)
    }
}

/// Writes vectors as a `dim=V` header followed by one sparse line each.
pub fn write_vectors<W: Write>(mut out: W, vectors: &[SparseVector], dimension: usize) -> std::io::Result<()> {
    writeln!(out, "dim={dimension}")?;
    for v in vectors {
        writeln!(out, "{}", v.to_line())?;
    }
    out.flush()
}

pub fn read_vectors<R: BufRead>(input: R) -> Result<(Vec<SparseVector>, usize)> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .transpose()
        .map_err(|e| Error::io("<vectors>", e))?
        .unwrap_or_default();
    let dim = header
        .trim()
        .strip_prefix("dim=")
        .and_then(|d| d.parse::<usize>().ok())
        .ok_or_else(|| Error::InvalidArgument(format!("bad vector header {header:?}")))?;
    let mut out = Vec::new();
    for line in lines {
        let line = line.map_err(|e| Error::io("<vectors>", e))?;
        out.push(SparseVector::parse_line(&line, dim)?);
    }
    Ok((out, dim))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    token_to_index: HashMap<String, usize>,
    tokens: Vec<String>,
    document_frequency: Vec<usize>,
    n_documents: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index(&self, token: &str) -> Option<usize> {
        self.token_to_index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> &str {
        &self.tokens[index]
    }

    pub fn df(&self, index: usize) -> usize {
        self.document_frequency[index]
    }

    pub fn n_documents(&self) -> usize {
        self.n_documents
    }

    /// Smoothed inverse document frequency, `ln((1 + N) / (1 + df)) + 1`.
    pub fn idf(&self, index: usize) -> f64 {
        ((1.0 + self.n_documents as f64) / (1.0 + self.document_frequency[index] as f64)).ln() + 1.0
    }

    /// TSV `token<TAB>index<TAB>df`, preceded by `# n_documents=N`.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# n_documents={}", self.n_documents)?;
        for (i, tok) in self.tokens.iter().enumerate() {
            writeln!(out, "{tok}\t{i}\t{}", self.document_frequency[i])?;
        }
        out.flush()
    }

    pub fn read_tsv<R: BufRead>(input: R) -> Result<Self> {
        let mut vocab = Vocabulary::default();
        for (ln, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<vocabulary>", e))?;
            if let Some(c) = line.strip_prefix('#') {
                if let Some(n) = c.trim().strip_prefix("n_documents=") {
                    vocab.n_documents = n
                        .parse()
                        .map_err(|_| Error::InvalidArgument(format!("bad n_documents {n:?}")))?;
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            let bad = || Error::InvalidArgument(format!("vocabulary line {}: {line:?}", ln + 1));
            if f.len() != 3 {
                return Err(bad());
            }
            let index: usize = f[1].parse().map_err(|_| bad())?;
            let df: usize = f[2].parse().map_err(|_| bad())?;
            if index != vocab.tokens.len() {
                return Err(bad());
            }
            vocab.token_to_index.insert(f[0].to_string(), index);
            vocab.tokens.push(f[0].to_string());
            vocab.document_frequency.push(df);
        }
        Ok(vocab)
    }
}

/// Vocabulary of tokens with document frequency `>= min_df`, indexed in
/// order of first occurrence.
pub fn build_vocabulary<D: AsRef<[String]>>(docs: &[D], min_df: usize) -> Result<Vocabulary> {
    if min_df == 0 {
        return Err(Error::InvalidArgument("min_df must be >= 1".into()));
    }
    let mut df: HashMap<&str, usize> = HashMap::new();
    let mut order: Vec<&str> = Vec::new();
    for doc in docs {
        let mut seen = HashSet::new();
        for t in doc.as_ref() {
            if seen.insert(t.as_str()) {
                let e = df.entry(t.as_str()).or_insert_with(|| {
                    order.push(t.as_str());
                    0
                });
                *e += 1;
            }
        }
    }
    let mut vocab = Vocabulary {
        n_documents: docs.len(),
        ..Default::default()
    };
    for tok in order {
        let d = df[tok];
        if d >= min_df {
            vocab.token_to_index.insert(tok.to_string(), vocab.tokens.len());
            vocab.tokens.push(tok.to_string());
            vocab.document_frequency.push(d);
        }
    }
    Ok(vocab)
}

/// Vocabulary plus cached idf values.
#[derive(Debug, Clone)]
pub struct TfidfVectorizer {
    vocab: Vocabulary,
    idf: Vec<f64>,
}

impl TfidfVectorizer {
    pub fn new(vocab: Vocabulary) -> Self {
        let idf = (0..vocab.len()).map(|i| vocab.idf(i)).collect();
        TfidfVectorizer { vocab, idf }
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dimension(&self) -> usize {
        self.vocab.len()
    }

    /// Raw term count times idf, L2-normalized. Out-of-vocabulary tokens are
    /// ignored; an all-OOV document gives the zero vector.
    pub fn transform(&self, tokens: &[String]) -> SparseVector {
        let mut counts: HashMap<usize, f64> = HashMap::new();
        for t in tokens {
            if let Some(i) = self.vocab.index(t) {
                *counts.entry(i).or_default() += 1.0;
            }
        }
        let mut pairs: Vec<(u32, f64)> = counts.into_iter().map(|(i, tf)| (i as u32, tf * self.idf[i])).collect();
        pairs.sort_by_key(|p| p.0);
        let norm = pairs.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for p in &mut pairs {
                p.1 /= norm;
            }
        }
        SparseVector {
            pairs,
            dimension: self.vocab.len(),
        }
    }
}

pub fn tfidf_vectorize(tokens: &[String], vocab: &Vocabulary) -> SparseVector {
    TfidfVectorizer::new(vocab.clone()).transform(tokens)
}

/// `|a ∩ b| / |a ∪ b|`, with two empty sets counting as identical.
pub fn jaccard<T: Eq + Hash>(a: &HashSet<T>, b: &HashSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightSource {
    AbsValence,
    AbsPolarity,
}

pub const MIN_TRUNCATION_THRESHOLD: f64 = 0.6;
pub const MAX_TRUNCATION_THRESHOLD: f64 = 0.8;

/// How far [`rank_and_truncate`] may shrink a document: the truncated token
/// set keeps a Jaccard similarity of at least `threshold` with the original.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    threshold: f64,
    seed: u64,
    pub weight_source: WeightSource,
}

impl TruncationPolicy {
    /// Draws the threshold uniformly from `[0.6, 0.8]`. One draw per run.
    pub fn draw(seed: u64, weight_source: WeightSource) -> Self {
        let mut rng = seed::rng_for(seed, "truncation");
        let threshold = rng.gen_range(MIN_TRUNCATION_THRESHOLD..=MAX_TRUNCATION_THRESHOLD);
        TruncationPolicy {
            threshold,
            seed,
            weight_source,
        }
    }

    pub fn with_threshold(threshold: f64, seed: u64, weight_source: WeightSource) -> Result<Self> {
        if !(MIN_TRUNCATION_THRESHOLD..=MAX_TRUNCATION_THRESHOLD).contains(&threshold) {
            return Err(Error::InvalidArgument(format!(
                "truncation threshold {threshold} outside [0.6, 0.8]"
            )));
        }
        Ok(TruncationPolicy {
            threshold,
            seed,
            weight_source,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

fn token_weight(token: &str, lex: &Lexicon, source: WeightSource) -> f64 {
    lex.get(token)
        .map(|e| match source {
            WeightSource::AbsValence => e.valence.abs(),
            WeightSource::AbsPolarity => e.polarity.abs(),
        })
        .unwrap_or(0.0)
}

/// Drops the lowest-impact distinct tokens (by lexicon weight, ties in
/// lexicographic order) for as long as the remaining token set stays at
/// least `policy.threshold` Jaccard-similar to the original. Surviving
/// tokens keep their order and multiplicity.
pub fn rank_and_truncate(doc: &ProcessedDoc, lex: &Lexicon, policy: &TruncationPolicy) -> ProcessedDoc {
    let original: HashSet<&str> = doc.tokens.iter().map(String::as_str).collect();
    let mut ranked: Vec<(f64, &str)> = original
        .iter()
        .map(|t| (token_weight(t, lex, policy.weight_source), *t))
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));

    let mut remaining = original.clone();
    for (_, tok) in ranked {
        remaining.remove(tok);
        if jaccard(&original, &remaining) < policy.threshold {
            remaining.insert(tok);
            break;
        }
    }
    let tokens: Vec<String> = doc
        .tokens
        .iter()
        .filter(|t| remaining.contains(t.as_str()))
        .cloned()
        .collect();
    ProcessedDoc {
        source_id: doc.source_id.clone(),
        dropped_all: tokens.is_empty(),
        tokens,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::LexiconEntry;

    fn toks(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn set(v: &[&'static str]) -> HashSet<&'static str> {
        v.iter().copied().collect()
    }

    #[test]
    fn vocabulary_first_occurrence_and_df() {
        let docs = vec![toks(&["a", "b"]), toks(&["b"])];
        let v = build_vocabulary(&docs, 1).unwrap();
        assert_eq!(v.index("a"), Some(0));
        assert_eq!(v.index("b"), Some(1));
        assert_eq!(v.df(1), 2);
        let v2 = build_vocabulary(&docs, 2).unwrap();
        assert_eq!(v2.len(), 1);
        assert_eq!(v2.index("b"), Some(0));
        let empty: Vec<Vec<String>> = vec![];
        assert!(build_vocabulary(&empty, 1).unwrap().is_empty());
        assert!(build_vocabulary(&docs, 0).is_err());
    }

    #[test]
    fn tfidf_two_document_hand_check() {
        let docs = vec![toks(&["good", "movie"]), toks(&["bad", "movie"])];
        let vocab = build_vocabulary(&docs, 1).unwrap();
        assert!((vocab.idf(vocab.index("movie").unwrap()) - 1.0).abs() < 1e-12);
        assert!((vocab.idf(vocab.index("good").unwrap()) - 1.405465).abs() < 1e-6);
        let v = tfidf_vectorize(&docs[0], &vocab);
        assert_eq!(v.pairs().len(), 2);
        assert!((v.get(0) - 0.814802).abs() < 1e-6);
        assert!((v.get(1) - 0.579739).abs() < 1e-6);
    }

    #[test]
    fn tfidf_single_token_and_oov() {
        let docs = vec![toks(&["good", "movie"]), toks(&["bad", "movie"])];
        let vocab = build_vocabulary(&docs, 1).unwrap();
        let v = tfidf_vectorize(&toks(&["bad"]), &vocab);
        assert_eq!(v.pairs(), &[(2, 1.0)]);
        let z = tfidf_vectorize(&toks(&["zzz"]), &vocab);
        assert!(z.is_empty());
        assert_eq!(z.dimension(), 3);
    }

    #[test]
    fn jaccard_examples() {
        assert_eq!(jaccard(&set(&["a", "b", "c"]), &set(&["b", "c", "d"])), 0.5);
        assert_eq!(jaccard(&set(&["a", "b"]), &set(&["a", "b"])), 1.0);
        assert_eq!(jaccard(&set(&["a"]), &set(&["b"])), 0.0);
        assert_eq!(jaccard::<&str>(&HashSet::new(), &HashSet::new()), 1.0);
    }

    fn five_token_doc() -> ProcessedDoc {
        ProcessedDoc::new("d", toks(&["a", "b", "c", "d", "e"]))
    }

    #[test]
    fn truncation_at_point_eight_drops_one() {
        let lex = Lexicon::from_entries("t", "1", [LexiconEntry::sentiment("a", 0.5, 0.5, 2.0)]);
        let p = TruncationPolicy::with_threshold(0.8, 0, WeightSource::AbsValence).unwrap();
        let out = rank_and_truncate(&five_token_doc(), &lex, &p);
        // Lowest weight (0) and lexicographically first among ties: "b".
        assert_eq!(out.tokens, toks(&["a", "c", "d", "e"]));
    }

    #[test]
    fn truncation_at_point_six_drops_two() {
        let lex = Lexicon::from_entries("t", "1", [LexiconEntry::sentiment("b", 0.5, 0.5, 2.0)]);
        let p = TruncationPolicy::with_threshold(0.6, 0, WeightSource::AbsValence).unwrap();
        let out = rank_and_truncate(&five_token_doc(), &lex, &p);
        assert_eq!(out.tokens, toks(&["b", "d", "e"]));
    }

    #[test]
    fn truncation_keeps_everything_when_any_drop_breaks_threshold() {
        let lex = Lexicon::from_entries("t", "1", []);
        let p = TruncationPolicy::with_threshold(0.6, 0, WeightSource::AbsPolarity).unwrap();
        let doc = ProcessedDoc::new("d", toks(&["x", "y", "x"]));
        assert_eq!(rank_and_truncate(&doc, &lex, &p).tokens, doc.tokens);
    }

    #[test]
    fn policy_threshold_range() {
        assert!(TruncationPolicy::with_threshold(0.59, 0, WeightSource::AbsValence).is_err());
        assert!(TruncationPolicy::with_threshold(0.81, 0, WeightSource::AbsValence).is_err());
        for s in 0..100 {
            let t = TruncationPolicy::draw(s, WeightSource::AbsValence).threshold();
            assert!((0.6..=0.8).contains(&t));
        }
        assert_eq!(
            TruncationPolicy::draw(9, WeightSource::AbsValence),
            TruncationPolicy::draw(9, WeightSource::AbsValence)
        );
    }

    #[test]
    fn sparse_vector_validation() {
        assert!(SparseVector::new(vec![(1, 1.0), (1, 2.0)], 3).is_err());
        assert!(SparseVector::new(vec![(3, 1.0)], 3).is_err());
        assert!(SparseVector::new(vec![(0, 0.0)], 3).is_err());
        assert!(SparseVector::new(vec![(0, f64::NAN)], 3).is_err());
        assert!(SparseVector::new(vec![(0, 1.0), (2, -1.0)], 3).is_ok());
    }

    #[test]
    fn vector_and_vocab_text_formats() {
        let docs = vec![toks(&["good", "movie"]), toks(&["bad", "movie"])];
        let vocab = build_vocabulary(&docs, 1).unwrap();
        let mut buf = Vec::new();
        vocab.write_tsv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "# n_documents=2\ngood\t0\t1\nmovie\t1\t2\nbad\t2\t1\n");
        assert_eq!(Vocabulary::read_tsv(&buf[..]).unwrap(), vocab);

        let vz = TfidfVectorizer::new(vocab);
        let vecs: Vec<SparseVector> = docs.iter().map(|d| vz.transform(d)).collect();
        let mut buf = Vec::new();
        write_vectors(&mut buf, &vecs, 3).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("dim=3\n0:"));
        let (back, dim) = read_vectors(&buf[..]).unwrap();
        assert_eq!(dim, 3);
        assert_eq!(back, vecs);
    }
}
