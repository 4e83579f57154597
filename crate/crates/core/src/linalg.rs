//! Dense complex matrix helpers with explicit tensor-leg bookkeeping.
//!
//! Multi-leg indices are row-major: for leg dimensions `[d0, d1, ..., dk]` the
//! flat index of digits `(i0, ..., ik)` is `((i0 * d1 + i1) * d2 + i2) ...`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Builds a complex matrix from real entries given row by row.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> CMatrix {
    assert_eq!(entries.len(), rows * cols);
    CMatrix::from_fn(rows, cols, |i, j| c(entries[i * cols + j], 0.0))
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    factors
        .into_iter()
        .fold(CMatrix::identity(1, 1), |acc, f| kron(&acc, f))
}

/// `|v⟩⟨v|` for a column vector given as a slice.
pub fn projector(v: &[C64]) -> CMatrix {
    CMatrix::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
}

/// Canonical basis projector `|k⟩⟨k|` in dimension `d`.
pub fn basis_projector(d: usize, k: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(k, k)] = ONE;
    m
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut vals: Vec<f64> = SymmetricEigen::new(hermitian_part(m))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    vals.sort_by(f64::total_cmp);
    vals
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)
        .first()
        .copied()
        .unwrap_or(f64::INFINITY)
}

/// Eigen-decomposition of the Hermitian part: `(eigenvalues, eigenvectors as columns)`.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Clips negative eigenvalues of the Hermitian part and rescales to unit trace.
pub fn nearest_density(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let d = m.nrows();
    let mut out = CMatrix::zeros(d, d);
    for (k, &v) in vals.iter().enumerate() {
        if v > 0.0 {
            let col = vecs.column(k);
            out += col * col.adjoint() * c(v, 0.0);
        }
    }
    let tr = trace(&out).re;
    out / c(tr, 0.0)
}

pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for l in (0..dims.len().saturating_sub(1)).rev() {
        s[l] = s[l + 1] * dims[l + 1];
    }
    s
}

pub fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for l in (0..dims.len()).rev() {
        out[l] = index % dims[l];
        index /= dims[l];
    }
    out
}

pub fn flat_index(digits: &[usize], dims: &[usize]) -> usize {
    digits
        .iter()
        .zip(dims)
        .fold(0, |acc, (&i, &d)| acc * d + i)
}

/// Traces out every leg not listed in `keep` (leg indices, ascending).
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> CMatrix {
    let n: usize = dims.iter().product();
    assert_eq!(m.nrows(), n);
    let traced: Vec<usize> = (0..dims.len()).filter(|l| !keep.contains(l)).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&l| dims[l]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&l| dims[l]).collect();
    let split: Vec<(usize, usize)> = (0..n)
        .map(|i| {
            let d = digits(i, dims);
            let k: Vec<usize> = keep.iter().map(|&l| d[l]).collect();
            let t: Vec<usize> = traced.iter().map(|&l| d[l]).collect();
            (flat_index(&k, &keep_dims), flat_index(&t, &traced_dims))
        })
        .collect();
    let out_dim: usize = keep_dims.iter().product();
    let mut out = CMatrix::zeros(out_dim, out_dim);
    for i in 0..n {
        let (ki, ti) = split[i];
        for j in 0..n {
            let (kj, tj) = split[j];
            if ti == tj {
                out[(ki, kj)] += m[(i, j)];
            }
        }
    }
    out
}

/// Transposes the listed legs, leaving the others in place.
pub fn partial_transpose(m: &CMatrix, dims: &[usize], legs: &[usize]) -> CMatrix {
    let n: usize = dims.iter().product();
    assert_eq!(m.nrows(), n);
    let all_digits: Vec<Vec<usize>> = (0..n).map(|i| digits(i, dims)).collect();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut di = all_digits[i].clone();
            let mut dj = all_digits[j].clone();
            for &l in legs {
                std::mem::swap(&mut di[l], &mut dj[l]);
            }
            out[(flat_index(&di, dims), flat_index(&dj, dims))] = m[(i, j)];
        }
    }
    out
}

/// Zeroes every entry whose row and column disagree on the digit of one of `legs`.
pub fn pinch(m: &CMatrix, dims: &[usize], legs: &[usize]) -> CMatrix {
    let n: usize = dims.iter().product();
    let all_digits: Vec<Vec<usize>> = (0..n).map(|i| digits(i, dims)).collect();
    CMatrix::from_fn(n, n, |i, j| {
        if legs.iter().all(|&l| all_digits[i][l] == all_digits[j][l]) {
            m[(i, j)]
        } else {
            ZERO
        }
    })
}

/// Permutation unitary sending a vector with legs in `dims` order to one whose
/// leg `t` is source leg `perm[t]`.
pub fn permutation_matrix(dims: &[usize], perm: &[usize]) -> CMatrix {
    let n: usize = dims.iter().product();
    let target_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        let d = digits(i, dims);
        let td: Vec<usize> = perm.iter().map(|&p| d[p]).collect();
        out[(flat_index(&td, &target_dims), i)] = ONE;
    }
    out
}
