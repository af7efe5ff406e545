//! NMF baseline: column-scaled (NCW) input, Euclidean multiplicative
//! updates, best of several seeded trials.

use ndarray::Zip;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::DecompError;
use crate::exec::{self, Exec};
use crate::tensorops::{Matrix, Vector};

/// Added to every multiplicative-update denominator.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

/// `C (diag(Cᵀ C e))^{-1/2}`: column `j` is divided by the square root of
/// `Σ_i C(i, j) · rowsum_i`.
pub fn ncw_normalize(c: &Matrix) -> Result<Matrix, DecompError> {
    check_nonnegative(c)?;
    let row_sums: Vector = c.sum_axis(ndarray::Axis(1));
    let weights = c.t().dot(&row_sums);
    if let Some(j) = weights.iter().position(|&w| w <= 0.0) {
        return Err(DecompError::ZeroColumn(j));
    }
    let scale = weights.mapv(|w| 1.0 / w.sqrt());
    Ok(c * &scale)
}

fn check_nonnegative(c: &Matrix) -> Result<(), DecompError> {
    if let Some(((i, j), &v)) = c.indexed_iter().find(|(_, &v)| !v.is_finite() || v < 0.0) {
        return Err(DecompError::NegativeInput {
            row: i,
            col: j,
            value: v,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NmfConfig {
    pub rank: usize,
    pub trials: usize,
    pub max_iters: usize,
    /// Stop once the relative objective decrease falls below this.
    pub tol: f64,
    #[serde(skip)]
    pub exec: Exec,
}

impl NmfConfig {
    pub fn new(rank: usize) -> Self {
        Self {
            rank,
            trials: 10,
            max_iters: 300,
            tol: 1e-6,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmfFactors {
    /// N×R blog factors.
    pub u: Matrix,
    /// M×R term factors.
    pub v: Matrix,
    /// Final `‖C − U Vᵀ‖_F`.
    pub objective: f64,
    pub trial_seed: u64,
    pub iterations: usize,
    /// Objective at initialization followed by one value per iteration.
    pub history: Vec<f64>,
}

pub fn frob_objective(c: &Matrix, u: &Matrix, v: &Matrix) -> f64 {
    let approx = u.dot(&v.t());
    Zip::from(c)
        .and(&approx)
        .fold(0.0, |acc, &a, &b| acc + (a - b) * (a - b))
        .sqrt()
}

fn random_factor(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    // uniform on (0, 1]
    Matrix::from_shape_simple_fn((rows, cols), || 1.0 - rng.random::<f64>())
}

/// One Lee–Seung update of `U` then `V`, in place.
pub fn multiplicative_step(c: &Matrix, u: &mut Matrix, v: &mut Matrix) {
    let num_u = c.dot(&*v);
    let den_u = u.dot(&v.t().dot(&*v));
    Zip::from(&mut *u)
        .and(&num_u)
        .and(&den_u)
        .for_each(|x, &n, &d| *x *= n / (d + DENOMINATOR_FLOOR));

    let num_v = c.t().dot(&*u);
    let den_v = v.dot(&u.t().dot(&*u));
    Zip::from(&mut *v)
        .and(&num_v)
        .and(&den_v)
        .for_each(|x, &n, &d| *x *= n / (d + DENOMINATOR_FLOOR));
}

/// A single seeded run.
pub fn nmf_trial(c: &Matrix, rank: usize, seed: u64, max_iters: usize, tol: f64) -> NmfFactors {
    let (n, m) = c.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = random_factor(&mut rng, n, rank);
    let mut v = random_factor(&mut rng, m, rank);
    let mut history = vec![frob_objective(c, &u, &v)];
    let mut iterations = 0;
    while iterations < max_iters {
        multiplicative_step(c, &mut u, &mut v);
        iterations += 1;
        let prev = *history.last().expect("history starts non-empty");
        let obj = frob_objective(c, &u, &v);
        history.push(obj);
        if obj == 0.0 || (prev > 0.0 && (prev - obj) / prev < tol) {
            break;
        }
    }
    NmfFactors {
        u,
        v,
        objective: *history.last().expect("non-empty"),
        trial_seed: seed,
        iterations,
        history,
    }
}

/// Runs trials with seeds `1..=trials` and keeps the lowest final objective
/// (ties go to the smaller seed).
pub fn nmf_multiplicative(c: &Matrix, config: &NmfConfig) -> Result<NmfFactors, DecompError> {
    if config.rank < 1 {
        return Err(DecompError::InvalidRank(config.rank));
    }
    if config.trials < 1 {
        return Err(DecompError::InvalidTrials);
    }
    check_nonnegative(c)?;
    let seeds: Vec<u64> = (1..=config.trials as u64).collect();
    let runs = exec::map_ordered(config.exec, &seeds, |&seed| {
        nmf_trial(c, config.rank, seed, config.max_iters, config.tol)
    });
    Ok(runs
        .into_iter()
        .min_by(|a, b| {
            a.objective
                .total_cmp(&b.objective)
                .then(a.trial_seed.cmp(&b.trial_seed))
        })
        .expect("at least one trial"))
}
