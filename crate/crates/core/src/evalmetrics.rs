//! Evaluation without ground-truth clusters: query-based similarity between
//! standard and decomposition result vectors, top-k fraction of overlap
//! between group rankings, and ranked cluster tables.

use std::collections::HashSet;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensorops::{Matrix, Vector};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("task must be 1, 2, 3 or 4, got {0}")]
    UnknownTask(u8),
    #[error("k = {k} exceeds the shortest ranking ({len})")]
    KTooLarge { k: usize, len: usize },
    #[error("k must be positive")]
    ZeroK,
    #[error("fraction of overlap needs at least two groups")]
    SingleGroup,
}

/// Cosine similarity; `(0.0, true)` when either vector is all zero.
pub fn cosine(a: &Vector, b: &Vector) -> (f64, bool) {
    let na = a.dot(a).sqrt();
    let nb = b.dot(b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return (0.0, true);
    }
    (a.dot(b) / (na * nb), false)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimMatrices {
    /// N×N cosine similarity between blog rows.
    pub blogs: Matrix,
    /// M×M cosine similarity between word columns.
    pub words: Matrix,
    pub zero_blogs: Vec<usize>,
    pub zero_words: Vec<usize>,
}

fn row_cosines(rows: &Matrix) -> (Matrix, Vec<usize>) {
    let norms: Vec<f64> = rows.rows().into_iter().map(|r| r.dot(&r).sqrt()).collect();
    let gram = rows.dot(&rows.t());
    let n = rows.nrows();
    let sim = Matrix::from_shape_fn((n, n), |(i, j)| {
        if norms[i] == 0.0 || norms[j] == 0.0 {
            0.0
        } else if i == j {
            1.0
        } else {
            gram[[i, j]] / (norms[i] * norms[j])
        }
    });
    let zeros = (0..n).filter(|&i| norms[i] == 0.0).collect();
    (sim, zeros)
}

pub fn similarity_matrices(c: &Matrix) -> SimMatrices {
    let (blogs, zero_blogs) = row_cosines(c);
    let (words, zero_words) = row_cosines(&c.t().to_owned());
    SimMatrices {
        blogs,
        words,
        zero_blogs,
        zero_words,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryVectors {
    pub blog: Vector,
    pub word: Vector,
}

impl QueryVectors {
    pub fn all_ones(n_blogs: usize, n_words: usize) -> Self {
        Self {
            blog: Vector::ones(n_blogs),
            word: Vector::ones(n_words),
        }
    }
}

/// How the task-1 decomposition vector is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task1Formula {
    /// `H Tᵀ q_word`, an N-vector comparable with `C q_word`.
    #[default]
    Consistent,
    /// The literal `Hᵀ T q_word`, defined only when the shapes happen to line up.
    Literal,
}

/// Blog factors (H or U) and term factors (T or V) of one decomposition.
#[derive(Debug, Clone, Copy)]
pub struct Factors<'a> {
    pub blog: &'a Matrix,
    pub term: &'a Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskResult {
    pub task: u8,
    pub v_std: Vector,
    pub v_dec: Vector,
    pub similarity: f64,
    /// One of the vectors was all zero and the similarity defaulted to 0.
    pub degenerate: bool,
}

fn mismatch(msg: String) -> EvalError {
    EvalError::DimensionMismatch(msg)
}

pub fn task_vectors(
    task: u8,
    c: &Matrix,
    sims: &SimMatrices,
    factors: Factors<'_>,
    q: &QueryVectors,
    formula: Task1Formula,
) -> Result<TaskResult, EvalError> {
    let (n, m) = c.dim();
    let (h, t) = (factors.blog, factors.term);
    if h.nrows() != n || t.nrows() != m || h.ncols() != t.ncols() {
        return Err(mismatch(format!(
            "C is {n}x{m}, blog factors {:?}, term factors {:?}",
            h.dim(),
            t.dim()
        )));
    }
    if q.blog.len() != n || q.word.len() != m {
        return Err(mismatch(format!(
            "query lengths ({}, {}) for a {n}x{m} matrix",
            q.blog.len(),
            q.word.len()
        )));
    }
    if sims.blogs.dim() != (n, n) || sims.words.dim() != (m, m) {
        return Err(mismatch("similarity matrices do not match C".into()));
    }

    let (v_std, v_dec) = match task {
        1 => {
            let v_dec = match formula {
                Task1Formula::Consistent => h.dot(&t.t().dot(&q.word)),
                Task1Formula::Literal => {
                    // Hᵀ (R×N) · T (M×R) needs N == M; the product (R×R) then
                    // multiplies q_word (M) and must come out N long.
                    let r = h.ncols();
                    if n != m || r != m {
                        return Err(mismatch(format!(
                            "literal task-1 product undefined for N={n}, M={m}, R={r}"
                        )));
                    }
                    h.t().dot(t).dot(&q.word)
                }
            };
            (c.dot(&q.word), v_dec)
        }
        2 => (c.t().dot(&q.blog), t.dot(&h.t().dot(&q.blog))),
        3 => (sims.blogs.dot(&q.blog), h.dot(&h.t().dot(&q.blog))),
        4 => (sims.words.dot(&q.word), t.dot(&t.t().dot(&q.word))),
        other => return Err(EvalError::UnknownTask(other)),
    };
    let (similarity, degenerate) = cosine(&v_std, &v_dec);
    Ok(TaskResult {
        task,
        v_std,
        v_dec,
        similarity,
        degenerate,
    })
}

/// How top-k lists of different groups are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapDefinition {
    /// Mean over group pairs of `|top_k(r) ∩ top_k(s)| / k`.
    #[default]
    Pairwise,
    /// `|∩_r top_k(r)| / k`.
    Intersection,
}

pub fn fraction_overlap<T: Eq + Hash>(
    rankings: &[Vec<T>],
    k: usize,
    definition: OverlapDefinition,
) -> Result<f64, EvalError> {
    if rankings.len() < 2 {
        return Err(EvalError::SingleGroup);
    }
    if k == 0 {
        return Err(EvalError::ZeroK);
    }
    let shortest = rankings.iter().map(Vec::len).min().unwrap_or(0);
    if k > shortest {
        return Err(EvalError::KTooLarge { k, len: shortest });
    }
    let tops: Vec<HashSet<&T>> = rankings.iter().map(|r| r[..k].iter().collect()).collect();
    let frac = match definition {
        OverlapDefinition::Pairwise => {
            let mut total = 0.0;
            let mut pairs = 0usize;
            for a in 0..tops.len() {
                for b in a + 1..tops.len() {
                    total += tops[a].intersection(&tops[b]).count() as f64 / k as f64;
                    pairs += 1;
                }
            }
            total / pairs as f64
        }
        OverlapDefinition::Intersection => {
            let common = tops[0]
                .iter()
                .filter(|x| tops[1..].iter().all(|s| s.contains(*x)))
                .count();
            common as f64 / k as f64
        }
    };
    Ok(frac)
}

/// Indices sorted by descending score, ties broken by ascending label.
pub fn rank_by_score(scores: &[f64], labels: &[String]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then_with(|| labels[a].cmp(&labels[b])));
    idx
}

/// Blog rankings (labels) for every group, from the blog factor columns.
pub fn group_rankings(blog_factors: &Matrix, labels: &[String]) -> Vec<Vec<String>> {
    blog_factors
        .columns()
        .into_iter()
        .map(|col| {
            rank_by_score(&col.to_vec(), labels)
                .into_iter()
                .map(|i| labels[i].clone())
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterTable {
    pub group: usize,
    pub blogs: Vec<(String, f64)>,
    pub words: Vec<(String, f64)>,
}

fn top_entries(scores: &[f64], labels: &[String], top: usize) -> Vec<(String, f64)> {
    rank_by_score(scores, labels)
        .into_iter()
        .take(top)
        .map(|i| (labels[i].clone(), scores[i]))
        .collect()
}

/// One table per group: blogs ranked by the blog factor column, words by the
/// term factor column. Requests larger than the label lists are truncated.
pub fn extract_cluster_tables(
    factors: Factors<'_>,
    blog_labels: &[String],
    word_labels: &[String],
    top_blogs: usize,
    top_words: usize,
) -> Result<Vec<ClusterTable>, EvalError> {
    if factors.blog.nrows() != blog_labels.len() || factors.term.nrows() != word_labels.len() {
        return Err(mismatch(format!(
            "factors {:?}/{:?} vs {} blog and {} word labels",
            factors.blog.dim(),
            factors.term.dim(),
            blog_labels.len(),
            word_labels.len()
        )));
    }
    if factors.blog.ncols() != factors.term.ncols() {
        return Err(mismatch("blog and term factors differ in rank".into()));
    }
    Ok((0..factors.blog.ncols())
        .map(|r| ClusterTable {
            group: r + 1,
            blogs: top_entries(&factors.blog.column(r).to_vec(), blog_labels, top_blogs),
            words: top_entries(&factors.term.column(r).to_vec(), word_labels, top_words),
        })
        .collect())
}
