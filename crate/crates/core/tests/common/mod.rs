//! Reference implementations and generators shared by the integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use blogtensor::tensorops::{Matrix, Mode, SparseTensor3, Vector};
use ndarray::{Array2, Array3};
use rand::Rng;

/// `X ×_mode u` by explicit loops; the result is indexed by the two
/// remaining modes in ascending order.
pub fn dense_contract(x: &Array3<f64>, mode: Mode, u: &Vector) -> Matrix {
    let (a, b, c) = x.dim();
    match mode {
        Mode::One => Matrix::from_shape_fn((b, c), |(j, k)| (0..a).map(|i| x[[i, j, k]] * u[i]).sum()),
        Mode::Two => Matrix::from_shape_fn((a, c), |(i, k)| (0..b).map(|j| x[[i, j, k]] * u[j]).sum()),
        Mode::Three => Matrix::from_shape_fn((a, b), |(i, j)| (0..c).map(|k| x[[i, j, k]] * u[k]).sum()),
    }
}

/// `X ×_m u ×_n v` by a triple loop over every coordinate.
pub fn dense_contract_seq(x: &Array3<f64>, m: Mode, u: &Vector, n: Mode, v: &Vector) -> Vector {
    let dims = [x.dim().0, x.dim().1, x.dim().2];
    let free = Mode::ALL.into_iter().find(|&p| p != m && p != n).unwrap();
    let mut out = Vector::zeros(dims[free.axis()]);
    for i in 0..dims[0] {
        for j in 0..dims[1] {
            for k in 0..dims[2] {
                let idx = [i, j, k];
                out[idx[free.axis()]] += x[[i, j, k]] * u[idx[m.axis()]] * v[idx[n.axis()]];
            }
        }
    }
    out
}

/// Line-by-line transcription of the published matrix-to-tensor routine:
/// copy column k into every row i, zero the diagonal and rows whose blog
/// lacks the word, then add the transposed copy wherever an entry survives.
pub fn literal_matrix_to_tensor(c: &Array2<u64>) -> Array3<f64> {
    let (big_i, big_k) = c.dim();
    let mut adj = Array3::<f64>::zeros((big_i, big_i, big_k));
    for k in 0..big_k {
        for i in 0..big_i {
            for j in 0..big_i {
                adj[[i, j, k]] = c[[j, k]] as f64;
            }
            adj[[i, i, k]] = 0.0;
            if c[[i, k]] == 0 {
                for j in 0..big_i {
                    adj[[i, j, k]] = 0.0;
                }
            }
        }
    }
    let temp = adj.clone();
    for k in 0..big_k {
        for j in 0..big_i {
            for i in 0..big_i {
                if adj[[i, j, k]] != 0.0 {
                    adj[[i, j, k]] += temp[[j, i, k]];
                }
            }
        }
    }
    adj
}

pub fn random_sparse<R: Rng>(rng: &mut R, dims: [usize; 3], density: f64) -> SparseTensor3 {
    let mut entries = Vec::new();
    for i in 0..dims[0] {
        for j in 0..dims[1] {
            for k in 0..dims[2] {
                if rng.random::<f64>() < density {
                    entries.push((i, j, k, rng.random_range(0.1..10.0)));
                }
            }
        }
    }
    SparseTensor3::from_entries(dims, entries).unwrap()
}

pub fn random_vector<R: Rng>(rng: &mut R, len: usize) -> Vector {
    Vector::from_shape_fn(len, |_| rng.random_range(-2.0..2.0))
}

pub fn random_nonneg_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_shape_fn((rows, cols), |_| {
        if rng.random::<f64>() < 0.3 {
            0.0
        } else {
            rng.random_range(0.0..5.0)
        }
    })
}

pub fn max_abs_diff<'a>(a: impl IntoIterator<Item = &'a f64>, b: impl IntoIterator<Item = &'a f64>) -> f64 {
    a.into_iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn toy_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/toy")
}

/// Copies the bundled toy corpus into `dest` so runs never write into the
/// source tree.
pub fn copy_toy(dest: &Path) {
    let src = toy_dir();
    std::fs::create_dir_all(dest.join("feeds")).unwrap();
    for name in ["blogfeedlist", "stopwords", "config.toml"] {
        std::fs::copy(src.join(name), dest.join(name)).unwrap();
    }
    for entry in std::fs::read_dir(src.join("feeds")).unwrap() {
        let path = entry.unwrap().path();
        std::fs::copy(&path, dest.join("feeds").join(path.file_name().unwrap())).unwrap();
    }
}

pub const ASTRONOMY_BLOGS: [&str; 7] = [
    "Backyard Skies",
    "Dark Site Diaries",
    "Orbit Notes",
    "The Comet Chaser",
    "Jupiter at Midnight",
    "Deep Field Journal",
    "Meteor Watch",
];
pub const COOKING_BLOGS: [&str; 5] = [
    "Flour and Butter",
    "Simmer Down",
    "The Garlic Press",
    "Sunday Roast Club",
    "Skillet Stories",
];
pub const ASTRONOMY_WORDS: [&str; 14] = [
    "telescope",
    "galaxy",
    "nebula",
    "orbit",
    "planet",
    "comet",
    "eclipse",
    "asteroid",
    "observatory",
    "constellation",
    "meteor",
    "jupiter",
    "saturn",
    "lunar",
];
pub const COOKING_WORDS: [&str; 14] = [
    "recipe", "oven", "flour", "butter", "garlic", "simmer", "sauce", "pastry", "dough", "onion", "roast", "spice",
    "skillet", "vinegar",
];

/// Rows of a cluster-table CSV as (group, blog, word), skipping empty cells.
pub fn read_cluster_csv(path: &Path) -> Vec<(usize, Option<String>, Option<String>)> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            let cell = |i: usize| Some(r[i].to_string()).filter(|s| !s.is_empty());
            (r[0].parse().unwrap(), cell(2), cell(4))
        })
        .collect()
}

/// Checks that every group's top-3 blogs share one topic and its top-3
/// words come from that topic's vocabulary. Returns the topic of each group,
/// or a description of the first violation.
pub fn check_topic_purity(rows: &[(usize, Option<String>, Option<String>)]) -> Result<Vec<&'static str>, String> {
    let mut topics = Vec::new();
    let astro_stems: Vec<String> = ASTRONOMY_WORDS
        .iter()
        .map(|w| blogtensor::textprep::porter_stem(w))
        .collect();
    let cook_stems: Vec<String> = COOKING_WORDS
        .iter()
        .map(|w| blogtensor::textprep::porter_stem(w))
        .collect();
    let mut groups: Vec<usize> = rows.iter().map(|r| r.0).collect();
    groups.dedup();
    if groups.len() != 2 {
        return Err(format!("expected 2 groups, found {groups:?}"));
    }
    for g in groups {
        let blogs: Vec<&str> = rows
            .iter()
            .filter(|r| r.0 == g)
            .filter_map(|r| r.1.as_deref())
            .take(3)
            .collect();
        let words: Vec<&str> = rows
            .iter()
            .filter(|r| r.0 == g)
            .filter_map(|r| r.2.as_deref())
            .take(3)
            .collect();
        if blogs.len() < 3 || words.len() < 3 {
            return Err(format!("group {g} lists fewer than 3 blogs or words"));
        }
        let (topic, vocab) = if blogs.iter().all(|b| ASTRONOMY_BLOGS.contains(b)) {
            ("astronomy", &astro_stems)
        } else if blogs.iter().all(|b| COOKING_BLOGS.contains(b)) {
            ("cooking", &cook_stems)
        } else {
            return Err(format!("group {g} mixes topics in its top blogs: {blogs:?}"));
        };
        if let Some(w) = words.iter().find(|w| !vocab.iter().any(|s| s == *w)) {
            return Err(format!("group {g} ({topic}) has off-topic top word {w:?}"));
        }
        topics.push(topic);
    }
    Ok(topics)
}
