//! Greedy PARAFAC: rank-1 groups extracted one at a time by a deflated
//! higher-order power iteration.

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use super::DecompError;
use crate::exec::Exec;
use crate::tensorops::{contract_seq_with, l2_norm, Matrix, Mode, SparseTensor3, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParafacConfig {
    pub rank: usize,
    /// A group stops once two successive weight estimates differ by less
    /// than `epsilon` times the newer one.
    pub epsilon: f64,
    pub max_iters: usize,
    #[serde(skip)]
    pub exec: Exec,
}

impl ParafacConfig {
    pub fn new(rank: usize) -> Self {
        Self {
            rank,
            epsilon: 1e-9,
            max_iters: 500,
            exec: Exec::default(),
        }
    }
}

/// Per-group convergence record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupTrace {
    pub iterations: usize,
    pub converged: bool,
    /// The residual vanished; the group's columns are arbitrary unit vectors.
    pub degenerate: bool,
    /// `|θ − δ| / δ` for each sweep after the first.
    pub gaps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParafacFactors {
    /// Hub factors, I1×R, unit columns.
    pub hubs: Matrix,
    /// Authority factors, I2×R, unit columns.
    pub authorities: Matrix,
    /// Term factors, I3×R, unit columns.
    pub terms: Matrix,
    /// Group weights λ_r.
    pub psi: Vector,
    pub epsilon: f64,
    pub traces: Vec<GroupTrace>,
}

impl ParafacFactors {
    pub fn rank(&self) -> usize {
        self.psi.len()
    }
}

/// Previously extracted groups, used to deflate the power-iteration updates.
struct Deflation<'a> {
    hubs: &'a [Vector],
    authorities: &'a [Vector],
    terms: &'a [Vector],
    psi: &'a [f64],
}

impl Deflation<'_> {
    /// Subtracts `Σ_r ψ_r · target_r · (p · P_r) · (q · Q_r)` from `out`.
    fn apply(&self, out: &mut Vector, target: &[Vector], p: (&Vector, &[Vector]), q: (&Vector, &[Vector])) {
        for (((&psi, t), pr), qr) in self.psi.iter().zip(target).zip(p.1).zip(q.1) {
            let coef = psi * p.0.dot(pr) * q.0.dot(qr);
            if coef != 0.0 {
                out.scaled_add(-coef, t);
            }
        }
    }
}

fn unit_ones(n: usize) -> Vector {
    Vector::from_elem(n, 1.0 / (n as f64).sqrt())
}

pub fn greedy_parafac(tensor: &SparseTensor3, config: &ParafacConfig) -> Result<ParafacFactors, DecompError> {
    if config.rank < 1 {
        return Err(DecompError::InvalidRank(config.rank));
    }
    if config.epsilon.is_nan() || config.epsilon <= 0.0 {
        return Err(DecompError::InvalidTolerance(config.epsilon));
    }
    if config.max_iters < 1 {
        return Err(DecompError::InvalidIterations);
    }
    let exec = config.exec;
    let [n1, n2, n3] = tensor.dims();

    let mut hubs: Vec<Vector> = Vec::with_capacity(config.rank);
    let mut auths: Vec<Vector> = Vec::with_capacity(config.rank);
    let mut terms: Vec<Vector> = Vec::with_capacity(config.rank);
    let mut psi: Vec<f64> = Vec::with_capacity(config.rank);
    let mut traces = Vec::with_capacity(config.rank);

    for group in 0..config.rank {
        let prior = Deflation {
            hubs: &hubs,
            authorities: &auths,
            terms: &terms,
            psi: &psi,
        };
        let mut x = unit_ones(n1);
        let mut y = unit_ones(n2);
        let mut z = unit_ones(n3);
        // weight estimate: geometric mean of the three raw update norms
        let mut delta = f64::NAN;
        let mut trace = GroupTrace {
            iterations: 0,
            converged: false,
            degenerate: false,
            gaps: Vec::new(),
        };

        loop {
            let theta = delta;

            let mut x_raw = contract_seq_with(exec, tensor, Mode::Two, &y, Mode::Three, &z)?;
            prior.apply(&mut x_raw, prior.hubs, (&y, prior.authorities), (&z, prior.terms));
            let nx = l2_norm(&x_raw);
            if nx == 0.0 {
                trace.degenerate = true;
                break;
            }
            x = x_raw / nx;

            let mut y_raw = contract_seq_with(exec, tensor, Mode::One, &x, Mode::Three, &z)?;
            prior.apply(&mut y_raw, prior.authorities, (&x, prior.hubs), (&z, prior.terms));
            let ny = l2_norm(&y_raw);
            if ny == 0.0 {
                trace.degenerate = true;
                break;
            }
            y = y_raw / ny;

            let mut z_raw = contract_seq_with(exec, tensor, Mode::One, &x, Mode::Two, &y)?;
            prior.apply(&mut z_raw, prior.terms, (&x, prior.hubs), (&y, prior.authorities));
            let nz = l2_norm(&z_raw);
            if nz == 0.0 {
                trace.degenerate = true;
                break;
            }
            z = z_raw / nz;

            delta = (nx * ny * nz).cbrt();
            trace.iterations += 1;
            if trace.iterations > 1 {
                let gap = (theta - delta).abs() / delta;
                trace.gaps.push(gap);
                if gap < config.epsilon {
                    trace.converged = true;
                    break;
                }
            }
            if trace.iterations >= config.max_iters {
                break;
            }
        }

        let lambda = if trace.degenerate {
            x = unit_ones(n1);
            y = unit_ones(n2);
            z = unit_ones(n3);
            0.0
        } else {
            delta
        };
        if !trace.converged && !trace.degenerate {
            warn!(
                "group {group}: no convergence after {} iterations (last gap {:.3e})",
                trace.iterations,
                trace.gaps.last().copied().unwrap_or(f64::NAN)
            );
        }
        debug!(
            "group {group}: lambda {lambda:.6} after {} iterations",
            trace.iterations
        );

        hubs.push(x);
        auths.push(y);
        terms.push(z);
        psi.push(lambda);
        traces.push(trace);
    }

    if psi.windows(2).any(|w| w[1] > w[0]) {
        warn!("group weights are not in decreasing order: {psi:?}");
    }

    Ok(ParafacFactors {
        hubs: columns(&hubs, n1),
        authorities: columns(&auths, n2),
        terms: columns(&terms, n3),
        psi: Vector::from(psi),
        epsilon: config.epsilon,
        traces,
    })
}

fn columns(cols: &[Vector], rows: usize) -> Matrix {
    Matrix::from_shape_fn((rows, cols.len()), |(i, r)| cols[r][i])
}
