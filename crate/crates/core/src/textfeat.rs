//! Tokenization, vocabularies and n-gram presence features.

use std::collections::HashMap;
use std::io::Write;
use std::sync::OnceLock;

use regex::Regex;

use crate::dataset::{LabeledDataset, TextCorpus};
use crate::error::{Error, Result};

/// Default per-document token cap applied before n-gram extraction.
pub const DEFAULT_MAX_TOKENS: usize = 400;
pub const UNK: &str = "<unk>";

fn punctuation() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\p{P}").expect("valid pattern"))
}

/// Lowercase, strip Unicode punctuation, split on whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    punctuation()
        .replace_all(&lower, "")
        .split_whitespace()
        .map(str::to_owned)
        .collect()
}

/// Token/index map with index 0 reserved for out-of-vocabulary tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn unk_index(&self) -> u32 {
        0
    }

    pub fn token(&self, i: u32) -> &str {
        &self.tokens[i as usize]
    }

    pub fn get(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(0)
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<u32> {
        tokens.iter().map(|t| self.get(t)).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "token,index")?;
        for (i, t) in self.tokens.iter().enumerate() {
            writeln!(w, "{t},{i}")?;
        }
        Ok(())
    }
}

/// Keep the `max_size - 1` most frequent tokens (ties lexicographic) after `<unk>`.
pub fn build_vocab(corpus: &TextCorpus, max_size: usize) -> Result<Vocabulary> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if max_size == 0 {
        return Err(Error::InvalidArgument("vocabulary size must be at least 1".into()));
    }
    let mut counts: HashMap<String, usize> = HashMap::new();
    for doc in corpus.documents() {
        for tok in tokenize(&doc.text) {
            if tok != UNK {
                *counts.entry(tok).or_insert(0) += 1;
            }
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let mut tokens = vec![UNK.to_owned()];
    tokens.extend(ranked.into_iter().take(max_size - 1).map(|(t, _)| t));
    let index = tokens
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i as u32))
        .collect();
    Ok(Vocabulary { tokens, index })
}

/// Every contiguous window of length `n`, in order.
pub fn extract_ngrams<T: Clone>(tokens: &[T], n: usize) -> Result<Vec<Vec<T>>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n-gram order must be at least 1".into()));
    }
    Ok(tokens.windows(n).map(<[T]>::to_vec).collect())
}

/// Presence matrix of the most frequent n-grams of one order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramFeatureSet {
    pub n: usize,
    /// N-gram identities as token-index tuples.
    pub columns: Vec<Vec<u32>>,
    /// Space-joined token strings, one per column.
    pub names: Vec<String>,
    /// Column-major presence codes: `presence[col][doc]` is 1 iff the n-gram occurs.
    pub presence: Vec<Vec<u8>>,
    pub labels: Vec<u8>,
}

impl NGramFeatureSet {
    pub fn documents(&self) -> usize {
        self.labels.len()
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn get(&self, doc: usize, col: usize) -> u8 {
        self.presence[col][doc]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VectorizeConfig {
    pub n: usize,
    pub max_features: usize,
    pub max_tokens: usize,
}

impl VectorizeConfig {
    pub fn new(n: usize, max_features: usize) -> Self {
        Self {
            n,
            max_features,
            max_tokens: DEFAULT_MAX_TOKENS,
        }
    }
}

/// Encode each document once: tokenize, truncate to `max_tokens`, map to indices.
pub fn encode_corpus(corpus: &TextCorpus, vocab: &Vocabulary, max_tokens: usize) -> Vec<Vec<u32>> {
    corpus
        .documents()
        .iter()
        .map(|d| {
            let mut toks = tokenize(&d.text);
            toks.truncate(max_tokens);
            vocab.encode(&toks)
        })
        .collect()
}

pub fn vectorize(corpus: &TextCorpus, vocab: &Vocabulary, cfg: &VectorizeConfig) -> Result<NGramFeatureSet> {
    let encoded = encode_corpus(corpus, vocab, cfg.max_tokens);
    vectorize_encoded(&encoded, &corpus.labels(), vocab, cfg)
}

/// [`vectorize`] over documents already produced by [`encode_corpus`].
pub fn vectorize_encoded(
    encoded: &[Vec<u32>],
    labels: &[u8],
    vocab: &Vocabulary,
    cfg: &VectorizeConfig,
) -> Result<NGramFeatureSet> {
    if cfg.max_features == 0 {
        return Err(Error::InvalidArgument("max_features must be at least 1".into()));
    }
    if cfg.n == 0 {
        return Err(Error::InvalidArgument("n-gram order must be at least 1".into()));
    }
    if encoded.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} documents for {} labels",
            encoded.len(),
            labels.len()
        )));
    }
    let mut counts: HashMap<&[u32], usize> = HashMap::new();
    for doc in encoded {
        for w in doc.windows(cfg.n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    let name = |g: &[u32]| g.iter().map(|&i| vocab.token(i)).collect::<Vec<_>>().join(" ");
    let mut ranked: Vec<(&[u32], usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| {
        b.1.cmp(&a.1).then_with(|| {
            let ta = a.0.iter().map(|&i| vocab.token(i));
            let tb = b.0.iter().map(|&i| vocab.token(i));
            ta.cmp(tb)
        })
    });
    ranked.truncate(cfg.max_features);

    let columns: Vec<Vec<u32>> = ranked.iter().map(|(g, _)| g.to_vec()).collect();
    let names = columns.iter().map(|g| name(g)).collect();
    let col_of: HashMap<&[u32], usize> = columns.iter().enumerate().map(|(c, g)| (g.as_slice(), c)).collect();
    let mut presence = vec![vec![0u8; encoded.len()]; columns.len()];
    for (d, doc) in encoded.iter().enumerate() {
        for w in doc.windows(cfg.n) {
            if let Some(&c) = col_of.get(w) {
                presence[c][d] = 1;
            }
        }
    }
    Ok(NGramFeatureSet {
        n: cfg.n,
        columns,
        names,
        presence,
        labels: labels.to_vec(),
    })
}

/// Column-wise concatenation into a dataset; names become `<n>g:<tokens>`.
pub fn concat_grams(sets: &[NGramFeatureSet]) -> Result<LabeledDataset<f64>> {
    let first = sets
        .first()
        .ok_or_else(|| Error::InvalidArgument("no feature sets to concatenate".into()))?;
    if let Some(bad) = sets.iter().find(|s| s.labels != first.labels) {
        return Err(Error::DimensionMismatch(format!(
            "feature sets cover different documents ({} vs {})",
            first.documents(),
            bad.documents()
        )));
    }
    let mut names = Vec::new();
    let mut columns = Vec::new();
    for s in sets {
        for (name, col) in s.names.iter().zip(&s.presence) {
            names.push(format!("{}g:{}", s.n, name));
            columns.push(col.iter().map(|&v| f64::from(v)).collect());
        }
    }
    LabeledDataset::new(names, columns, first.labels.iter().map(|&l| f64::from(l)).collect())
}
