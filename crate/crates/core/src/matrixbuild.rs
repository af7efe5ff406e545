//! Blog–word characteristic matrix and its labeled-link adjacency tensor.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensorops::{Matrix, SparseTensor3, TensorError};
use crate::textprep::BlogsContent;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("blog content is empty")]
    EmptyContent,
    #[error("no word survives frequency filtering")]
    NoWordsSurvive,
    #[error("invalid filter bounds: lower {lower}, upper {upper}")]
    InvalidBounds { lower: f64, upper: f64 },
    #[error("matrix file: {0}")]
    MatrixFormat(String),
    #[error("tensor file line {line}: {reason}")]
    TensorFormat { line: usize, reason: String },
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Document-frequency window: a word is kept when the fraction of blogs
/// counting it lies strictly between `lower` and `upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterBounds {
    pub lower: f64,
    pub upper: f64,
}

impl Default for FilterBounds {
    fn default() -> Self {
        Self {
            lower: 0.1,
            upper: 0.25,
        }
    }
}

impl FilterBounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self, BuildError> {
        let b = Self { lower, upper };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), BuildError> {
        let ok = (0.0..1.0).contains(&self.lower) && self.upper > 0.0 && self.upper <= 1.0 && self.lower < self.upper;
        if ok {
            Ok(())
        } else {
            Err(BuildError::InvalidBounds {
                lower: self.lower,
                upper: self.upper,
            })
        }
    }
}

/// Which occurrences count toward a word's document frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DocFrequencyRule {
    /// A blog counts only if the word's weight there exceeds 1.
    #[default]
    WeightAboveOne,
    /// Any occurrence counts.
    AnyOccurrence,
}

impl DocFrequencyRule {
    fn counts(self, weight: u64) -> bool {
        match self {
            DocFrequencyRule::WeightAboveOne => weight > 1,
            DocFrequencyRule::AnyOccurrence => weight >= 1,
        }
    }
}

/// N×M weighted counts with row (blog) and column (word) labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharMatrix {
    pub blog_labels: Vec<String>,
    pub word_labels: Vec<String>,
    pub values: Array2<u64>,
}

impl CharMatrix {
    pub fn n_blogs(&self) -> usize {
        self.blog_labels.len()
    }

    pub fn n_words(&self) -> usize {
        self.word_labels.len()
    }

    pub fn to_real(&self) -> Matrix {
        self.values.mapv(|v| v as f64)
    }

    /// CSV with a header row `blog,<word>...` and one labelled row per blog.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), BuildError> {
        let mut w = csv::Writer::from_writer(out);
        let fmt = |e: csv::Error| BuildError::MatrixFormat(e.to_string());
        w.write_record(std::iter::once("blog").chain(self.word_labels.iter().map(String::as_str)))
            .map_err(fmt)?;
        for (label, row) in self.blog_labels.iter().zip(self.values.rows()) {
            let mut record = vec![label.clone()];
            record.extend(row.iter().map(u64::to_string));
            w.write_record(&record).map_err(fmt)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self, BuildError> {
        let fmt = |e: String| BuildError::MatrixFormat(e);
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header = r.headers().map_err(|e| fmt(e.to_string()))?.clone();
        let word_labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut blog_labels = Vec::new();
        let mut flat = Vec::new();
        for (row, record) in r.records().enumerate() {
            let record = record.map_err(|e| fmt(e.to_string()))?;
            if record.len() != word_labels.len() + 1 {
                return Err(fmt(format!("row {} has {} fields", row + 2, record.len())));
            }
            blog_labels.push(record[0].to_string());
            for field in record.iter().skip(1) {
                flat.push(field.parse::<u64>().map_err(|e| fmt(format!("row {}: {e}", row + 2)))?);
            }
        }
        let values =
            Array2::from_shape_vec((blog_labels.len(), word_labels.len()), flat).map_err(|e| fmt(e.to_string()))?;
        Ok(Self {
            blog_labels,
            word_labels,
            values,
        })
    }
}

pub fn build_char_matrix(
    content: &BlogsContent,
    bounds: &FilterBounds,
    rule: DocFrequencyRule,
) -> Result<CharMatrix, BuildError> {
    if content.is_empty() {
        return Err(BuildError::EmptyContent);
    }
    bounds.validate()?;
    let n = content.len();

    let mut doc_freq: BTreeMap<&str, usize> = BTreeMap::new();
    for counts in content.entries.values() {
        for (word, &weight) in counts {
            let slot = doc_freq.entry(word).or_insert(0);
            if rule.counts(weight) {
                *slot += 1;
            }
        }
    }
    let word_labels: Vec<String> = doc_freq
        .into_iter()
        .filter(|&(_, count)| {
            let pct = count as f64 / n as f64;
            bounds.lower < pct && pct < bounds.upper
        })
        .map(|(w, _)| w.to_string())
        .collect();
    if word_labels.is_empty() {
        return Err(BuildError::NoWordsSurvive);
    }

    let blog_labels: Vec<String> = content.entries.keys().cloned().collect();
    let values = Array2::from_shape_fn((n, word_labels.len()), |(i, j)| {
        content.entries[&blog_labels[i]]
            .get(&word_labels[j])
            .copied()
            .unwrap_or(0)
    });
    Ok(CharMatrix {
        blog_labels,
        word_labels,
        values,
    })
}

/// `X(i, j, k) = C(i, k) + C(j, k)` when `i != j` and both blogs use word
/// `k`; zero otherwise. Every frontal slice is symmetric with zero diagonal.
///
/// Panics if the matrix has no rows or no columns.
pub fn to_adjacency_tensor(cm: &CharMatrix) -> SparseTensor3 {
    let (n, m) = cm.values.dim();
    let mut entries = Vec::new();
    for k in 0..m {
        let users: Vec<(usize, u64)> = (0..n).map(|i| (i, cm.values[[i, k]])).filter(|&(_, c)| c > 0).collect();
        for &(i, ci) in &users {
            for &(j, cj) in &users {
                if i != j {
                    entries.push((i, j, k, (ci + cj) as f64));
                }
            }
        }
    }
    SparseTensor3::from_entries([n, n, m], entries)
        .expect("non-empty matrix; indices in range and unique by construction")
}

/// Text format: a header line `I1 I2 I3`, then one `i j k value` line per
/// stored entry (0-based), in storage order.
pub fn write_tensor<W: Write>(tensor: &SparseTensor3, mut out: W) -> std::io::Result<()> {
    let [a, b, c] = tensor.dims();
    writeln!(out, "{a} {b} {c}")?;
    for e in tensor.entries() {
        writeln!(out, "{} {} {} {}", e.i, e.j, e.k, e.value)?;
    }
    out.flush()
}

pub fn read_tensor<R: BufRead>(input: R) -> Result<SparseTensor3, BuildError> {
    let bad = |line: usize, reason: String| BuildError::TensorFormat { line, reason };
    let mut lines = input
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
    let (_, header) = lines.next().ok_or_else(|| bad(1, "missing dims header".into()))?;
    let dims: Vec<usize> = header?
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|e| bad(1, format!("{e}")))?;
    let dims: [usize; 3] = dims
        .try_into()
        .map_err(|_| bad(1, "dims header needs three sizes".into()))?;
    let mut entries = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(bad(idx + 1, format!("expected 4 fields, got {}", f.len())));
        }
        let parse_idx = |s: &str| s.parse::<usize>().map_err(|e| bad(idx + 1, e.to_string()));
        let value = f[3].parse::<f64>().map_err(|e| bad(idx + 1, e.to_string()))?;
        entries.push((parse_idx(f[0])?, parse_idx(f[1])?, parse_idx(f[2])?, value));
    }
    Ok(SparseTensor3::from_entries(dims, entries)?)
}
