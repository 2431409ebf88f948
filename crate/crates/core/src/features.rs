//! N-gram feature extraction and the weighted sparse document-term matrix.
//!
//! The supported tokenization grid is word unigrams/bigrams and character
//! 3/4/5-grams; character grams slide across word boundaries with spaces
//! included and no padding. Vocabularies are frozen on training documents
//! and re-applied closed-world to anything evaluated later.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::ingest::Document;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("unsupported n-gram spec: ({unit}, {n}); supported: word 1-2, char 3-5")]
    InvalidSpec { unit: String, n: usize },
    #[error("no term occurs in at least {min_df} training documents")]
    EmptyVocabulary { min_df: usize },
    #[error("author {0:?} missing from the class index")]
    UnknownAuthor(String),
    #[error("invalid document-term matrix: {0}")]
    InvalidMatrix(String),
    #[error("line {line}: bad vocabulary file: {reason}")]
    VocabParse { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NGramUnit {
    Word,
    Char,
}

impl std::fmt::Display for NGramUnit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NGramUnit::Word => "word",
            NGramUnit::Char => "char",
        })
    }
}

/// A validated tokenization scheme. Only the five pairs the experiment grid
/// uses can be constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NGramSpec {
    unit: NGramUnit,
    n: usize,
}

impl NGramSpec {
    pub fn new(unit: NGramUnit, n: usize) -> Result<Self, FeatureError> {
        let ok = matches!(
            (unit, n),
            (NGramUnit::Word, 1) | (NGramUnit::Word, 2) | (NGramUnit::Char, 3..=5)
        );
        if ok {
            Ok(Self { unit, n })
        } else {
            Err(FeatureError::InvalidSpec {
                unit: unit.to_string(),
                n,
            })
        }
    }

    pub fn unit(&self) -> NGramUnit {
        self.unit
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The full grid, in canonical order.
    pub fn all() -> [NGramSpec; 5] {
        [
            Self { unit: NGramUnit::Word, n: 1 },
            Self { unit: NGramUnit::Word, n: 2 },
            Self { unit: NGramUnit::Char, n: 3 },
            Self { unit: NGramUnit::Char, n: 4 },
            Self { unit: NGramUnit::Char, n: 5 },
        ]
    }

    /// Parses compact tokens like `word1` or `char3`.
    pub fn parse(token: &str) -> Result<Self, FeatureError> {
        let err = || FeatureError::InvalidSpec {
            unit: token.to_string(),
            n: 0,
        };
        let (unit, digits) = if let Some(d) = token.strip_prefix("word") {
            (NGramUnit::Word, d)
        } else if let Some(d) = token.strip_prefix("char") {
            (NGramUnit::Char, d)
        } else {
            return Err(err());
        };
        let n: usize = digits.parse().map_err(|_| err())?;
        Self::new(unit, n)
    }
}

impl std::fmt::Display for NGramSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", self.unit, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WeightScheme {
    Tf,
    TfIdf,
    Binary,
}

impl WeightScheme {
    pub fn all() -> [WeightScheme; 3] {
        [Self::Tf, Self::TfIdf, Self::Binary]
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token {
            "tf" => Some(Self::Tf),
            "tfidf" => Some(Self::TfIdf),
            "binary" => Some(Self::Binary),
            _ => None,
        }
    }
}

impl std::fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WeightScheme::Tf => "tf",
            WeightScheme::TfIdf => "tfidf",
            WeightScheme::Binary => "binary",
        })
    }
}

/// NFC-normalizes, lowercases, collapses whitespace runs to single spaces,
/// and trims.
pub fn normalize_text(text: &str) -> String {
    normalize_text_opts(text, false)
}

/// `normalize_text` with lowercasing optionally disabled (`--keep-case`).
pub fn normalize_text_opts(text: &str, keep_case: bool) -> String {
    let nfc: String = text.nfc().collect();
    let cased = if keep_case { nfc } else { nfc.to_lowercase() };
    let mut out = String::with_capacity(cased.len());
    for word in cased.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Word n-grams of already-normalized text; consecutive tokens joined by a
/// single space. Fewer than `n` tokens yields an empty list.
pub fn word_ngrams(text: &str, n: usize) -> Vec<String> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() < n {
        return Vec::new();
    }
    tokens.windows(n).map(|w| w.join(" ")).collect()
}

/// Character n-grams over Unicode scalar values, spaces included, stride 1,
/// no padding.
pub fn char_ngrams(text: &str, n: usize) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    if chars.len() < n {
        return Vec::new();
    }
    chars.windows(n).map(|w| w.iter().collect()).collect()
}

fn doc_terms(text: &str, spec: NGramSpec, keep_case: bool) -> Vec<String> {
    let normalized = normalize_text_opts(text, keep_case);
    match spec.unit() {
        NGramUnit::Word => word_ngrams(&normalized, spec.n()),
        NGramUnit::Char => char_ngrams(&normalized, spec.n()),
    }
}

/// The feature-index mapping frozen on training data.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    spec: NGramSpec,
    terms: Vec<String>,
    index: HashMap<String, usize>,
    doc_freq: Vec<usize>,
    n_train_docs: usize,
}

impl Vocabulary {
    /// Builds the vocabulary over the training documents: every term seen in
    /// at least `min_df` of them, sorted lexicographically.
    pub fn build(
        train_docs: &[&Document],
        spec: NGramSpec,
        min_df: usize,
        keep_case: bool,
    ) -> Result<Self, FeatureError> {
        assert!(min_df >= 1, "min_df must be positive");
        let mut df: HashMap<String, usize> = HashMap::new();
        for doc in train_docs {
            let mut seen: HashSet<String> = HashSet::new();
            for term in doc_terms(&doc.text, spec, keep_case) {
                seen.insert(term);
            }
            for term in seen {
                *df.entry(term).or_insert(0) += 1;
            }
        }
        let mut terms: Vec<String> = df
            .iter()
            .filter(|(_, &count)| count >= min_df)
            .map(|(t, _)| t.clone())
            .collect();
        if terms.is_empty() {
            return Err(FeatureError::EmptyVocabulary { min_df });
        }
        terms.sort_unstable();
        let doc_freq = terms.iter().map(|t| df[t]).collect();
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Self {
            spec,
            terms,
            index,
            doc_freq,
            n_train_docs: train_docs.len(),
        })
    }

    pub fn spec(&self) -> NGramSpec {
        self.spec
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn doc_freq(&self) -> &[usize] {
        &self.doc_freq
    }

    pub fn n_train_docs(&self) -> usize {
        self.n_train_docs
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// Text export: header `unit n n_train_docs`, then `term \t doc_freq`
    /// rows in column order.
    pub fn to_export_string(&self) -> String {
        let mut out = format!("{} {} {}\n", self.spec.unit(), self.spec.n(), self.n_train_docs);
        for (term, df) in self.terms.iter().zip(&self.doc_freq) {
            out.push_str(term);
            out.push('\t');
            out.push_str(&df.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_export_str(text: &str) -> Result<Self, FeatureError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(FeatureError::VocabParse {
            line: 1,
            reason: "empty file".into(),
        })?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(FeatureError::VocabParse {
                line: 1,
                reason: "header must be `unit n n_train_docs`".into(),
            });
        }
        let unit = match parts[0] {
            "word" => NGramUnit::Word,
            "char" => NGramUnit::Char,
            other => {
                return Err(FeatureError::VocabParse {
                    line: 1,
                    reason: format!("unknown unit {other:?}"),
                })
            }
        };
        let bad_header = |reason: &str| FeatureError::VocabParse {
            line: 1,
            reason: reason.into(),
        };
        let n: usize = parts[1].parse().map_err(|_| bad_header("bad n"))?;
        let n_train_docs: usize = parts[2]
            .parse()
            .map_err(|_| bad_header("bad n_train_docs"))?;
        let spec = NGramSpec::new(unit, n)?;

        let mut terms = Vec::new();
        let mut doc_freq = Vec::new();
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let (term, df) = line.split_once('\t').ok_or(FeatureError::VocabParse {
                line: i + 1,
                reason: "expected `term \\t doc_freq`".into(),
            })?;
            let df: usize = df.parse().map_err(|_| FeatureError::VocabParse {
                line: i + 1,
                reason: "doc_freq is not an integer".into(),
            })?;
            terms.push(term.to_string());
            doc_freq.push(df);
        }
        if terms.is_empty() {
            return Err(FeatureError::VocabParse {
                line: 1,
                reason: "no terms".into(),
            });
        }
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Self {
            spec,
            terms,
            index,
            doc_freq,
            n_train_docs,
        })
    }
}

/// A sparse row: strictly increasing column ids with nonzero weights.
pub type SparseRow = Vec<(usize, f64)>;

/// Documents-by-terms weights under one scheme, plus per-document labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DocTermMatrix {
    n_terms: usize,
    rows: Vec<SparseRow>,
    labels: Vec<usize>,
    scheme: WeightScheme,
}

impl DocTermMatrix {
    /// Validating constructor for externally assembled matrices.
    pub fn from_parts(
        rows: Vec<SparseRow>,
        labels: Vec<usize>,
        n_terms: usize,
        scheme: WeightScheme,
    ) -> Result<Self, FeatureError> {
        if rows.len() != labels.len() {
            return Err(FeatureError::InvalidMatrix(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            let mut last: Option<usize> = None;
            let mut sum = 0.0;
            for &(col, w) in row {
                if col >= n_terms {
                    return Err(FeatureError::InvalidMatrix(format!(
                        "row {i}: column {col} out of range"
                    )));
                }
                if last.is_some_and(|l| col <= l) {
                    return Err(FeatureError::InvalidMatrix(format!(
                        "row {i}: columns not strictly increasing"
                    )));
                }
                last = Some(col);
                if !(w.is_finite() && w > 0.0) {
                    return Err(FeatureError::InvalidMatrix(format!(
                        "row {i}: weight {w} at column {col} must be finite and positive"
                    )));
                }
                if scheme == WeightScheme::Binary && w != 1.0 {
                    return Err(FeatureError::InvalidMatrix(format!(
                        "row {i}: binary weight {w} != 1"
                    )));
                }
                sum += w;
            }
            if scheme == WeightScheme::Tf && !row.is_empty() && (sum - 1.0).abs() > 1e-9 {
                return Err(FeatureError::InvalidMatrix(format!(
                    "row {i}: tf weights sum to {sum}"
                )));
            }
        }
        Ok(Self {
            n_terms,
            rows,
            labels,
            scheme,
        })
    }

    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &SparseRow {
        &self.rows[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn scheme(&self) -> WeightScheme {
        self.scheme
    }

    /// One past the highest label; classes are dense by construction.
    pub fn n_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| m + 1)
    }

    /// Coordinate-format export: header `n_docs n_terms scheme`, then
    /// `doc_id col weight` triplets sorted by (doc_id, col), 9 significant
    /// digits.
    pub fn to_coordinate_string(&self) -> String {
        let mut out = format!("{} {} {}\n", self.n_docs(), self.n_terms, self.scheme);
        for (doc_id, row) in self.rows.iter().enumerate() {
            for &(col, w) in row {
                out.push_str(&format!("{doc_id} {col} {:.8e}\n", w));
            }
        }
        out
    }
}

/// Sparse weighted feature row for one text against a frozen vocabulary.
/// Out-of-vocabulary terms are ignored (closed-world evaluation).
pub fn doc_row(text: &str, vocab: &Vocabulary, scheme: WeightScheme, keep_case: bool) -> SparseRow {
    let mut counts: HashMap<usize, u64> = HashMap::new();
    for term in doc_terms(text, vocab.spec(), keep_case) {
        if let Some(col) = vocab.column(&term) {
            *counts.entry(col).or_insert(0) += 1;
        }
    }
    let total: u64 = counts.values().sum();
    let mut row: SparseRow = Vec::with_capacity(counts.len());
    for (col, count) in counts {
        let weight = match scheme {
            WeightScheme::Binary => 1.0,
            WeightScheme::Tf => count as f64 / total as f64,
            WeightScheme::TfIdf => {
                let tf = count as f64 / total as f64;
                let idf = (vocab.n_train_docs() as f64 / vocab.doc_freq()[col] as f64).ln();
                tf * idf
            }
        };
        if weight != 0.0 {
            row.push((col, weight));
        }
    }
    row.sort_unstable_by_key(|&(col, _)| col);
    row
}

/// Vectorizes documents against a frozen vocabulary.
///
/// Term frequency divides by the count of in-vocabulary occurrences only;
/// rows with no in-vocabulary term stay empty. TF-IDF multiplies TF by
/// `ln(n_train_docs / doc_freq)` and drops entries that become exactly zero.
pub fn vectorize(
    docs: &[&Document],
    vocab: &Vocabulary,
    scheme: WeightScheme,
    class_index: &HashMap<String, usize>,
    keep_case: bool,
) -> Result<DocTermMatrix, FeatureError> {
    let mut rows = Vec::with_capacity(docs.len());
    let mut labels = Vec::with_capacity(docs.len());
    for doc in docs {
        let label = class_index
            .get(&doc.author)
            .copied()
            .ok_or_else(|| FeatureError::UnknownAuthor(doc.author.clone()))?;
        labels.push(label);
        rows.push(doc_row(&doc.text, vocab, scheme, keep_case));
    }
    DocTermMatrix::from_parts(rows, labels, vocab.len(), scheme)
}

/// Per-class ranked term lists: score is the mean weight inside the class
/// minus the mean weight outside it; ties break lexicographically.
pub fn top_distinctive_terms(
    matrix: &DocTermMatrix,
    vocab: &Vocabulary,
    k: usize,
) -> Vec<Vec<(String, f64)>> {
    let n_classes = matrix.n_classes();
    let n_terms = matrix.n_terms();
    let mut class_sums = vec![vec![0.0f64; n_terms]; n_classes];
    let mut total_sums = vec![0.0f64; n_terms];
    let mut class_docs = vec![0usize; n_classes];
    for (row, &label) in matrix.rows().iter().zip(matrix.labels()) {
        class_docs[label] += 1;
        for &(col, w) in row {
            class_sums[label][col] += w;
            total_sums[col] += w;
        }
    }
    let n_docs = matrix.n_docs();

    let mut out = Vec::with_capacity(n_classes);
    for c in 0..n_classes {
        let inside_n = class_docs[c];
        let outside_n = n_docs - inside_n;
        let mut scored: Vec<(usize, f64)> = (0..n_terms)
            .map(|t| {
                let inside = if inside_n == 0 {
                    0.0
                } else {
                    class_sums[c][t] / inside_n as f64
                };
                let outside = if outside_n == 0 {
                    0.0
                } else {
                    (total_sums[t] - class_sums[c][t]) / outside_n as f64
                };
                (t, inside - outside)
            })
            .collect();
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("scores are finite")
                .then_with(|| vocab.terms()[a.0].cmp(&vocab.terms()[b.0]))
        });
        scored.truncate(k);
        out.push(
            scored
                .into_iter()
                .map(|(t, s)| (vocab.terms()[t].clone(), s))
                .collect(),
        );
    }
    out
}
