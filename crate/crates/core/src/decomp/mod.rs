//! Factorizations: greedy PARAFAC on the adjacency tensor and the NMF
//! baseline on the characteristic matrix, plus the factor file format.

mod nmf;
mod parafac;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensorops::{Matrix, TensorError, Vector};

pub use nmf::{
    frob_objective, multiplicative_step, ncw_normalize, nmf_multiplicative, nmf_trial, NmfConfig, NmfFactors,
    DENOMINATOR_FLOOR,
};
pub use parafac::{greedy_parafac, GroupTrace, ParafacConfig, ParafacFactors};

#[derive(Debug, Error)]
pub enum DecompError {
    #[error("rank must be at least 1, got {0}")]
    InvalidRank(usize),
    #[error("convergence tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("iteration limit must be at least 1")]
    InvalidIterations,
    #[error("at least one trial is required")]
    InvalidTrials,
    #[error("input entry ({row}, {col}) is negative or not finite: {value}")]
    NegativeInput { row: usize, col: usize, value: f64 },
    #[error("column {0} is all zero")]
    ZeroColumn(usize),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("factor file: {0}")]
    Format(String),
}

/// Column-major dense matrix as stored in factor files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl From<&Matrix> for StoredMatrix {
    fn from(m: &Matrix) -> Self {
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.t().iter().copied().collect(),
        }
    }
}

impl StoredMatrix {
    pub fn to_matrix(&self) -> Result<Matrix, DecompError> {
        if self.data.len() != self.rows * self.cols {
            return Err(DecompError::Format(format!(
                "{}x{} matrix with {} values",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        Ok(Matrix::from_shape_vec((self.cols, self.rows), self.data.clone())
            .expect("length checked")
            .reversed_axes()
            .as_standard_layout()
            .into_owned())
    }
}

/// Contents of one factor file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum FactorRecord {
    Parafac {
        dims: [usize; 3],
        rank: usize,
        epsilon: f64,
        h: StoredMatrix,
        a: StoredMatrix,
        t: StoredMatrix,
        psi: Vec<f64>,
        groups: Vec<GroupTrace>,
    },
    Nmf {
        dims: [usize; 2],
        rank: usize,
        u: StoredMatrix,
        v: StoredMatrix,
        objective: f64,
        trial_seed: u64,
        iterations: usize,
    },
}

impl FactorRecord {
    pub fn rank(&self) -> usize {
        match self {
            FactorRecord::Parafac { rank, .. } | FactorRecord::Nmf { rank, .. } => *rank,
        }
    }

    pub fn method(&self) -> &'static str {
        match self {
            FactorRecord::Parafac { .. } => "parafac",
            FactorRecord::Nmf { .. } => "nmf",
        }
    }

    /// The (blog factors, term factors) pair used for evaluation: H and T
    /// for PARAFAC, U and V for NMF.
    pub fn blog_term_factors(&self) -> Result<(Matrix, Matrix), DecompError> {
        match self {
            FactorRecord::Parafac { h, t, .. } => Ok((h.to_matrix()?, t.to_matrix()?)),
            FactorRecord::Nmf { u, v, .. } => Ok((u.to_matrix()?, v.to_matrix()?)),
        }
    }

    pub fn write<W: Write>(&self, out: W) -> Result<(), DecompError> {
        serde_json::to_writer_pretty(out, self).map_err(|e| DecompError::Format(e.to_string()))
    }

    pub fn read<R: Read>(input: R) -> Result<Self, DecompError> {
        serde_json::from_reader(input).map_err(|e| DecompError::Format(e.to_string()))
    }

    pub fn to_parafac(&self) -> Result<ParafacFactors, DecompError> {
        match self {
            FactorRecord::Parafac {
                epsilon,
                h,
                a,
                t,
                psi,
                groups,
                ..
            } => Ok(ParafacFactors {
                hubs: h.to_matrix()?,
                authorities: a.to_matrix()?,
                terms: t.to_matrix()?,
                psi: Vector::from(psi.clone()),
                epsilon: *epsilon,
                traces: groups.clone(),
            }),
            FactorRecord::Nmf { .. } => Err(DecompError::Format("not a PARAFAC record".into())),
        }
    }
}

impl From<&ParafacFactors> for FactorRecord {
    fn from(f: &ParafacFactors) -> Self {
        FactorRecord::Parafac {
            dims: [f.hubs.nrows(), f.authorities.nrows(), f.terms.nrows()],
            rank: f.rank(),
            epsilon: f.epsilon,
            h: (&f.hubs).into(),
            a: (&f.authorities).into(),
            t: (&f.terms).into(),
            psi: f.psi.to_vec(),
            groups: f.traces.clone(),
        }
    }
}

impl From<&NmfFactors> for FactorRecord {
    fn from(f: &NmfFactors) -> Self {
        FactorRecord::Nmf {
            dims: [f.u.nrows(), f.v.nrows()],
            rank: f.u.ncols(),
            u: (&f.u).into(),
            v: (&f.v).into(),
            objective: f.objective,
            trial_seed: f.trial_seed,
            iterations: f.iterations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensorops::SparseTensor3;
    use ndarray::array;

    #[test]
    fn stored_matrix_is_column_major() {
        let m = array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]];
        let s = StoredMatrix::from(&m);
        assert_eq!(s.data, vec![1.0, 3.0, 5.0, 2.0, 4.0, 6.0]);
        assert_eq!(s.to_matrix().unwrap(), m);
        let bad = StoredMatrix {
            rows: 2,
            cols: 2,
            data: vec![1.0],
        };
        assert!(bad.to_matrix().is_err());
    }

    #[test]
    fn parafac_record_round_trip() {
        let x = SparseTensor3::from_entries(
            [3, 3, 2],
            vec![(0, 1, 0, 5.0), (1, 0, 0, 5.0), (1, 2, 1, 9.0), (2, 1, 1, 9.0)],
        )
        .unwrap();
        let f = greedy_parafac(&x, &ParafacConfig::new(2)).unwrap();
        let rec = FactorRecord::from(&f);
        let mut buf = Vec::new();
        rec.write(&mut buf).unwrap();
        let back = FactorRecord::read(buf.as_slice()).unwrap();
        assert_eq!(back, rec);
        assert_eq!(back.to_parafac().unwrap(), f);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\"method\": \"parafac\""));
    }
}
