//! Sparse 3-way tensors and the vector contractions used by greedy PARAFAC.
//!
//! Tensors are stored in coordinate format sorted by `(k, i, j)` so that each
//! frontal slice `X(:, :, k)` is contiguous. Contraction results are dense.

use std::fmt;

use ndarray::{Array1, Array2, Array3};
use thiserror::Error;

use crate::exec::{self, Exec};

pub type Vector = Array1<f64>;
pub type Matrix = Array2<f64>;

#[derive(Debug, Error, PartialEq)]
pub enum TensorError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("contraction modes must differ (got mode {0} twice)")]
    SameMode(Mode),
    #[error("cannot normalize a zero vector")]
    ZeroVector,
    #[error("coordinate ({0}, {1}, {2}) out of range")]
    OutOfRange(usize, usize, usize),
    #[error("coordinate ({0}, {1}, {2}) given more than once")]
    DuplicateCoordinate(usize, usize, usize),
    #[error("non-finite value at ({0}, {1}, {2})")]
    NonFinite(usize, usize, usize),
    #[error("tensor dimensions must be positive, got {0:?}")]
    EmptyDimension([usize; 3]),
}

/// One of the three tensor modes, numbered from 1 as in the usual notation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    One,
    Two,
    Three,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::One, Mode::Two, Mode::Three];

    pub fn from_number(n: usize) -> Option<Mode> {
        match n {
            1 => Some(Mode::One),
            2 => Some(Mode::Two),
            3 => Some(Mode::Three),
            _ => None,
        }
    }

    pub fn number(self) -> usize {
        self.axis() + 1
    }

    /// Zero-based axis index.
    pub fn axis(self) -> usize {
        match self {
            Mode::One => 0,
            Mode::Two => 1,
            Mode::Three => 2,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub value: f64,
}

impl Entry {
    #[inline]
    fn index(&self, axis: usize) -> usize {
        match axis {
            0 => self.i,
            1 => self.j,
            _ => self.k,
        }
    }
}

/// Coordinate-format 3-way tensor. Stored values are nonzero and finite,
/// coordinates are unique, and entries are sorted by `(k, i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseTensor3 {
    dims: [usize; 3],
    entries: Vec<Entry>,
}

impl SparseTensor3 {
    pub fn zeros(dims: [usize; 3]) -> Result<Self, TensorError> {
        Self::from_entries(dims, Vec::new())
    }

    /// Builds a tensor from `(i, j, k, value)` quadruples. Explicit zeros are
    /// dropped.
    pub fn from_entries<I>(dims: [usize; 3], entries: I) -> Result<Self, TensorError>
    where
        I: IntoIterator<Item = (usize, usize, usize, f64)>,
    {
        if dims.contains(&0) {
            return Err(TensorError::EmptyDimension(dims));
        }
        let mut out = Vec::new();
        for (i, j, k, value) in entries {
            if i >= dims[0] || j >= dims[1] || k >= dims[2] {
                return Err(TensorError::OutOfRange(i, j, k));
            }
            if !value.is_finite() {
                return Err(TensorError::NonFinite(i, j, k));
            }
            if value != 0.0 {
                out.push(Entry { i, j, k, value });
            }
        }
        out.sort_unstable_by_key(|e| (e.k, e.i, e.j));
        if let Some(w) = out
            .windows(2)
            .find(|w| (w[0].k, w[0].i, w[0].j) == (w[1].k, w[1].i, w[1].j))
        {
            return Err(TensorError::DuplicateCoordinate(w[0].i, w[0].j, w[0].k));
        }
        Ok(Self { dims, entries: out })
    }

    pub fn from_dense(dense: &Array3<f64>) -> Result<Self, TensorError> {
        let (a, b, c) = dense.dim();
        Self::from_entries([a, b, c], dense.indexed_iter().map(|((i, j, k), &v)| (i, j, k, v)))
    }

    pub fn to_dense(&self) -> Array3<f64> {
        let mut out = Array3::zeros((self.dims[0], self.dims[1], self.dims[2]));
        for e in &self.entries {
            out[[e.i, e.j, e.k]] = e.value;
        }
        out
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn dim(&self, mode: Mode) -> usize {
        self.dims[mode.axis()]
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.entries
            .binary_search_by_key(&(k, i, j), |e| (e.k, e.i, e.j))
            .map(|pos| self.entries[pos].value)
            .unwrap_or(0.0)
    }

    /// Multiplies every stored value by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self::from_entries(self.dims, self.entries.iter().map(|e| (e.i, e.j, e.k, e.value * c)))
            .expect("scaling preserves coordinates")
    }
}

fn check_len(tensor: &SparseTensor3, mode: Mode, len: usize) -> Result<(), TensorError> {
    let want = tensor.dim(mode);
    if want != len {
        return Err(TensorError::DimensionMismatch(format!(
            "mode {mode} has size {want}, vector has length {len}"
        )));
    }
    Ok(())
}

/// The two modes that survive a contraction along `mode`, ascending.
fn surviving(mode: Mode) -> (Mode, Mode) {
    match mode {
        Mode::One => (Mode::Two, Mode::Three),
        Mode::Two => (Mode::One, Mode::Three),
        Mode::Three => (Mode::One, Mode::Two),
    }
}

/// Tensor-times-vector along `mode`. The result is indexed by the two
/// remaining modes in ascending order.
pub fn contract(tensor: &SparseTensor3, mode: Mode, u: &Vector) -> Result<Matrix, TensorError> {
    contract_with(Exec::default(), tensor, mode, u)
}

pub fn contract_with(exec: Exec, tensor: &SparseTensor3, mode: Mode, u: &Vector) -> Result<Matrix, TensorError> {
    check_len(tensor, mode, u.len())?;
    let (rows, cols) = surviving(mode);
    let (nr, nc) = (tensor.dim(rows), tensor.dim(cols));
    let (ax, ar, ac) = (mode.axis(), rows.axis(), cols.axis());
    let u = u.as_slice().expect("contiguous vector");
    let flat = exec::chunked_accumulate(exec, tensor.entries(), nr * nc, |e, acc| {
        acc[e.index(ar) * nc + e.index(ac)] += e.value * u[e.index(ax)];
    });
    Ok(Matrix::from_shape_vec((nr, nc), flat).expect("shape matches buffer"))
}

/// Sequence multiplication `X ×̄m u ×̄n v`, returning a vector over the one
/// remaining mode.
///
/// When `m < n` the second contraction is applied to mode `n - 1` of the
/// intermediate matrix (the first contraction removed a lower axis); when
/// `m > n` it is applied to mode `n`. Both orders reduce to summing over the
/// two named modes of the original tensor, which is what this computes in a
/// single pass over the stored entries.
pub fn contract_seq(tensor: &SparseTensor3, m: Mode, u: &Vector, n: Mode, v: &Vector) -> Result<Vector, TensorError> {
    contract_seq_with(Exec::default(), tensor, m, u, n, v)
}

pub fn contract_seq_with(
    exec: Exec,
    tensor: &SparseTensor3,
    m: Mode,
    u: &Vector,
    n: Mode,
    v: &Vector,
) -> Result<Vector, TensorError> {
    if m == n {
        return Err(TensorError::SameMode(m));
    }
    check_len(tensor, m, u.len())?;
    check_len(tensor, n, v.len())?;
    let free = Mode::ALL.into_iter().find(|&x| x != m && x != n).expect("three modes");
    let (am, an, af) = (m.axis(), n.axis(), free.axis());
    let u = u.as_slice().expect("contiguous vector");
    let v = v.as_slice().expect("contiguous vector");
    let out = exec::chunked_accumulate(exec, tensor.entries(), tensor.dim(free), |e, acc| {
        acc[e.index(af)] += e.value * u[e.index(am)] * v[e.index(an)];
    });
    Ok(Vector::from(out))
}

/// Contracts a matrix produced by [`contract`] along its `axis` (0 = rows,
/// 1 = columns). This is the second step of the two-step sequence product.
pub fn contract_matrix(mat: &Matrix, axis: usize, v: &Vector) -> Result<Vector, TensorError> {
    let len = mat.len_of(ndarray::Axis(axis));
    if len != v.len() {
        return Err(TensorError::DimensionMismatch(format!(
            "matrix axis {axis} has size {len}, vector has length {}",
            v.len()
        )));
    }
    Ok(match axis {
        0 => mat.t().dot(v),
        _ => mat.dot(v),
    })
}

/// `Σ_r λ_r h_r ∘ a_r ∘ t_r` as a dense array.
pub fn cp_reconstruct_dense(
    hubs: &Matrix,
    authorities: &Matrix,
    terms: &Matrix,
    lambdas: &Vector,
) -> Result<Array3<f64>, TensorError> {
    let rank = lambdas.len();
    for (name, m) in [("H", hubs), ("A", authorities), ("T", terms)] {
        if m.ncols() != rank {
            return Err(TensorError::DimensionMismatch(format!(
                "{name} has {} columns, expected rank {rank}",
                m.ncols()
            )));
        }
    }
    let (n1, n2, n3) = (hubs.nrows(), authorities.nrows(), terms.nrows());
    let mut out = Array3::zeros((n1, n2, n3));
    for r in 0..rank {
        let lambda = lambdas[r];
        if lambda == 0.0 {
            continue;
        }
        for i in 0..n1 {
            let hi = lambda * hubs[[i, r]];
            if hi == 0.0 {
                continue;
            }
            for j in 0..n2 {
                let hij = hi * authorities[[j, r]];
                for k in 0..n3 {
                    out[[i, j, k]] += hij * terms[[k, r]];
                }
            }
        }
    }
    Ok(out)
}

pub fn cp_reconstruct(
    hubs: &Matrix,
    authorities: &Matrix,
    terms: &Matrix,
    lambdas: &Vector,
) -> Result<SparseTensor3, TensorError> {
    let dense = cp_reconstruct_dense(hubs, authorities, terms, lambdas)?;
    SparseTensor3::from_dense(&dense)
}

pub fn frob_norm(tensor: &SparseTensor3) -> f64 {
    tensor.entries().iter().map(|e| e.value * e.value).sum::<f64>().sqrt()
}

/// `‖X − Y‖_F` where `Y` is dense.
pub fn frob_distance(tensor: &SparseTensor3, dense: &Array3<f64>) -> Result<f64, TensorError> {
    let (a, b, c) = dense.dim();
    if [a, b, c] != tensor.dims() {
        return Err(TensorError::DimensionMismatch(format!(
            "{:?} vs {:?}",
            tensor.dims(),
            [a, b, c]
        )));
    }
    let mut diff = dense.clone();
    for e in tensor.entries() {
        diff[[e.i, e.j, e.k]] -= e.value;
    }
    Ok(diff.iter().map(|v| v * v).sum::<f64>().sqrt())
}

pub fn l2_norm(u: &Vector) -> f64 {
    u.dot(u).sqrt()
}

pub fn normalize(u: &Vector) -> Result<Vector, TensorError> {
    let norm = l2_norm(u);
    if norm == 0.0 || !norm.is_finite() {
        return Err(TensorError::ZeroVector);
    }
    Ok(u / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn dense_contract(x: &Array3<f64>, mode: Mode, u: &Vector) -> Matrix {
        let (a, b, c) = x.dim();
        match mode {
            Mode::One => Matrix::from_shape_fn((b, c), |(j, k)| (0..a).map(|i| x[[i, j, k]] * u[i]).sum()),
            Mode::Two => Matrix::from_shape_fn((a, c), |(i, k)| (0..b).map(|j| x[[i, j, k]] * u[j]).sum()),
            Mode::Three => Matrix::from_shape_fn((a, b), |(i, j)| (0..c).map(|k| x[[i, j, k]] * u[k]).sum()),
        }
    }

    fn algorithm4_example() -> SparseTensor3 {
        SparseTensor3::from_entries(
            [3, 3, 2],
            vec![(0, 1, 0, 5.0), (1, 0, 0, 5.0), (1, 2, 1, 9.0), (2, 1, 1, 9.0)],
        )
        .unwrap()
    }

    #[test]
    fn zero_vector_gives_zero_matrix() {
        let x = algorithm4_example();
        for mode in Mode::ALL {
            let u = Vector::zeros(x.dim(mode));
            assert!(contract(&x, mode, &u).unwrap().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn all_ones_mode_one() {
        let ones = Array3::from_elem((2, 2, 2), 1.0);
        let x = SparseTensor3::from_dense(&ones).unwrap();
        let got = contract(&x, Mode::One, &array![1.0, 1.0]).unwrap();
        assert_eq!(got, Matrix::from_elem((2, 2), 2.0));
    }

    #[test]
    fn matrix_layout_follows_surviving_modes() {
        let x = SparseTensor3::from_entries([2, 3, 4], vec![(1, 2, 3, 2.0)]).unwrap();
        assert_eq!(contract(&x, Mode::One, &array![0.0, 1.0]).unwrap().dim(), (3, 4));
        assert_eq!(contract(&x, Mode::Two, &array![0.0, 0.0, 1.0]).unwrap().dim(), (2, 4));
        let m3 = contract(&x, Mode::Three, &array![0.0, 0.0, 0.0, 3.0]).unwrap();
        assert_eq!(m3.dim(), (2, 3));
        assert_eq!(m3[[1, 2]], 6.0);
    }

    #[test]
    fn contraction_matches_dense_loops() {
        let dense = Array3::from_shape_fn((5, 4, 3), |(i, j, k)| {
            if (i * 7 + j * 3 + k) % 3 == 0 {
                (i + 2 * j + 3 * k) as f64 * 0.25 - 1.0
            } else {
                0.0
            }
        });
        let x = SparseTensor3::from_dense(&dense).unwrap();
        for mode in Mode::ALL {
            let u = Vector::from_shape_fn(x.dim(mode), |i| 0.3 * i as f64 - 0.4);
            let got = contract(&x, mode, &u).unwrap();
            let want = dense_contract(&dense, mode, &u);
            for (g, w) in got.iter().zip(want.iter()) {
                assert!((g - w).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn dimension_checks() {
        let x = algorithm4_example();
        assert!(matches!(
            contract(&x, Mode::Three, &array![1.0]),
            Err(TensorError::DimensionMismatch(_))
        ));
        let u = Vector::ones(3);
        assert_eq!(
            contract_seq(&x, Mode::Two, &u, Mode::Two, &u),
            Err(TensorError::SameMode(Mode::Two))
        );
    }

    #[test]
    fn sequence_on_rank_one_tensor() {
        let h = array![1.0, 2.0, 0.5];
        let a = array![0.0, 1.0, 3.0];
        let t = array![2.0, -1.0];
        let dense = Array3::from_shape_fn((3, 3, 2), |(i, j, k)| h[i] * a[j] * t[k]);
        let x = SparseTensor3::from_dense(&dense).unwrap();
        let y = array![0.5, 0.25, -1.0];
        let z = array![1.5, 2.0];
        let got = contract_seq(&x, Mode::Two, &y, Mode::Three, &z).unwrap();
        let scale = y.dot(&a) * z.dot(&t);
        for i in 0..3 {
            assert!((got[i] - h[i] * scale).abs() < 1e-12);
        }
        let zero = contract_seq(&x, Mode::Two, &Vector::zeros(3), Mode::Three, &z).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn two_step_routes_agree_with_fused_kernel() {
        let dense = Array3::from_shape_fn((4, 4, 3), |(i, j, k)| ((i * 5 + j * 3 + k * 7) % 4) as f64);
        let x = SparseTensor3::from_dense(&dense).unwrap();
        let v1 = Vector::from_shape_fn(4, |i| i as f64 + 0.5);
        let v3 = Vector::from_shape_fn(3, |i| 1.0 - i as f64);
        let fused = contract_seq(&x, Mode::One, &v1, Mode::Three, &v3).unwrap();
        // m < n: contract mode 1, then mode 3 has become axis 1 of the matrix
        let stepped = contract_matrix(&contract(&x, Mode::One, &v1).unwrap(), 1, &v3).unwrap();
        // m > n: contract mode 3, then mode 1 is still axis 0
        let reversed = contract_matrix(&contract(&x, Mode::Three, &v3).unwrap(), 0, &v1).unwrap();
        for i in 0..4 {
            assert!((fused[i] - stepped[i]).abs() < 1e-12);
            assert!((fused[i] - reversed[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn reconstruct_basis_and_zero_weights() {
        let e1 = Matrix::from_shape_fn((2, 1), |(i, _)| if i == 0 { 1.0 } else { 0.0 });
        let x = cp_reconstruct(&e1, &e1, &e1, &array![1.0]).unwrap();
        assert_eq!(x.nnz(), 1);
        assert_eq!(x.get(0, 0, 0), 1.0);
        let zero = cp_reconstruct(&e1, &e1, &e1, &array![0.0]).unwrap();
        assert_eq!(zero.nnz(), 0);
    }

    #[test]
    fn reconstruct_matches_outer_product_sum() {
        let h = Matrix::from_shape_fn((3, 2), |(i, r)| (i + r) as f64 * 0.3 + 0.1);
        let a = Matrix::from_shape_fn((4, 2), |(i, r)| (i * 2 + r) as f64 * 0.2 - 0.3);
        let t = Matrix::from_shape_fn((2, 2), |(i, r)| 1.0 + (i * r) as f64);
        let l = array![2.0, -0.5];
        let got = cp_reconstruct_dense(&h, &a, &t, &l).unwrap();
        for ((i, j, k), &v) in got.indexed_iter() {
            let want: f64 = (0..2).map(|r| l[r] * h[[i, r]] * a[[j, r]] * t[[k, r]]).sum();
            assert!((v - want).abs() < 1e-12);
        }
        assert!(cp_reconstruct(&h, &a, &t, &array![1.0]).is_err());
    }

    #[test]
    fn norms() {
        let n = normalize(&array![3.0, 4.0]).unwrap();
        assert!((n[0] - 0.6).abs() < 1e-15 && (n[1] - 0.8).abs() < 1e-15);
        assert!((l2_norm(&Vector::ones(9)) - 3.0).abs() < 1e-15);
        assert_eq!(normalize(&Vector::zeros(3)), Err(TensorError::ZeroVector));
        assert!((frob_norm(&algorithm4_example()) - 212f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(
            SparseTensor3::from_entries([2, 2, 2], vec![(2, 0, 0, 1.0)]),
            Err(TensorError::OutOfRange(..))
        ));
        assert!(matches!(
            SparseTensor3::from_entries([2, 2, 2], vec![(0, 0, 0, 1.0), (0, 0, 0, 2.0)]),
            Err(TensorError::DuplicateCoordinate(..))
        ));
        assert!(matches!(
            SparseTensor3::from_entries([2, 2, 2], vec![(0, 0, 0, f64::NAN)]),
            Err(TensorError::NonFinite(..))
        ));
        assert!(SparseTensor3::zeros([0, 1, 1]).is_err());
        let x = SparseTensor3::from_entries([2, 2, 2], vec![(1, 1, 1, 0.0)]).unwrap();
        assert_eq!(x.nnz(), 0);
    }
}
