//! Complex matrix storage and the product kernels used by the iteration map.
//!
//! Everything is complex double precision. Real inputs are promoted on
//! construction so that the same code path serves complex perturbation
//! parameters.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::{c64, C64};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MatrixError {
    #[error("{op}: shape mismatch {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("{op}: matrix must be square, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("entry ({row}, {col}) out of bounds for {rows}x{cols} matrix")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("expected {expected} entries, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("matrix must be nonempty")]
    Empty,
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c64(1.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::LengthMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Promotes a row-major real array.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self, MatrixError> {
        Self::from_vec(rows, cols, data.iter().map(|&x| c64(x)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix whose rows are the given vectors.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self, MatrixError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(MatrixError::LengthMismatch {
                    expected: cols,
                    actual: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [C64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix, MatrixError> {
        if self.cols != rhs.rows {
            return Err(MatrixError::ShapeMismatch {
                op: "matmul",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[C64]) -> Result<Vec<C64>, MatrixError> {
        if x.len() != self.cols {
            return Err(MatrixError::ShapeMismatch {
                op: "matvec",
                left: self.shape(),
                right: (x.len(), 1),
            });
        }
        let mut y = vec![C64::new(0.0, 0.0); self.rows];
        self.matvec_into(x, &mut y);
        Ok(y)
    }

    /// `y = self * x` without shape checks beyond debug assertions.
    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(self.row(i), x);
        }
    }

    /// `y = self^† * x`.
    pub fn matvec_adjoint_into(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(y.len(), self.cols);
        y.fill(C64::new(0.0, 0.0));
        for (i, &xi) in x.iter().enumerate() {
            for (yj, a) in y.iter_mut().zip(self.row(i)) {
                *yj += a.conj() * xi;
            }
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn add(&self, rhs: &DenseMatrix) -> Result<Self, MatrixError> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> Result<Self, MatrixError> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        rhs: &DenseMatrix,
        op: &'static str,
        f: impl Fn(C64, C64) -> C64,
    ) -> Result<Self, MatrixError> {
        if self.shape() != rhs.shape() {
            return Err(MatrixError::ShapeMismatch {
                op,
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest entry modulus of `self - rhs`; shapes must agree.
    pub fn max_abs_diff(&self, rhs: &DenseMatrix) -> f64 {
        assert_eq!(self.shape(), rhs.shape(), "max_abs_diff shape mismatch");
        self.data
            .iter()
            .zip(&rhs.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn to_sparse(&self) -> SparseMatrix {
        let mut offsets = Vec::with_capacity(self.rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        offsets.push(0);
        for i in 0..self.rows {
            for (j, &v) in self.row(i).iter().enumerate() {
                if v != C64::new(0.0, 0.0) {
                    indices.push(j);
                    values.push(v);
                }
            }
            offsets.push(indices.len());
        }
        SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            offsets,
            indices,
            values,
        }
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter()
        .zip(b)
        .fold(C64::new(0.0, 0.0), |acc, (&x, &y)| acc + x * y)
}

/// Compressed-row sparse complex matrix. Column indices are strictly
/// increasing within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            offsets: vec![0; rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Assembles from `(row, col, value)` triplets in any order; duplicates are summed.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        mut triplets: Vec<(usize, usize, C64)>,
    ) -> Result<Self, MatrixError> {
        for &(i, j, _) in &triplets {
            if i >= rows || j >= cols {
                return Err(MatrixError::IndexOutOfBounds {
                    row: i,
                    col: j,
                    rows,
                    cols,
                });
            }
        }
        triplets.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut offsets = vec![0usize; rows + 1];
        let mut indices: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            indices.push(j);
            values.push(v);
            offsets[i + 1] += 1;
            last = Some((i, j));
        }
        for i in 0..rows {
            offsets[i + 1] += offsets[i];
        }
        Ok(Self {
            rows,
            cols,
            offsets,
            indices,
            values,
        })
    }

    /// Raw CSR constructor; validates the layout invariants.
    pub fn from_csr(
        rows: usize,
        cols: usize,
        offsets: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<C64>,
    ) -> Result<Self, MatrixError> {
        if offsets.len() != rows + 1 {
            return Err(MatrixError::LengthMismatch {
                expected: rows + 1,
                actual: offsets.len(),
            });
        }
        if indices.len() != values.len() || offsets[rows] != indices.len() || offsets[0] != 0 {
            return Err(MatrixError::LengthMismatch {
                expected: offsets[rows],
                actual: indices.len(),
            });
        }
        for i in 0..rows {
            if offsets[i] > offsets[i + 1] {
                return Err(MatrixError::LengthMismatch {
                    expected: offsets[i],
                    actual: offsets[i + 1],
                });
            }
            let row = &indices[offsets[i]..offsets[i + 1]];
            for (k, &j) in row.iter().enumerate() {
                if j >= cols || (k > 0 && row[k - 1] >= j) {
                    return Err(MatrixError::IndexOutOfBounds {
                        row: i,
                        col: j,
                        rows,
                        cols,
                    });
                }
            }
        }
        Ok(Self {
            rows,
            cols,
            offsets,
            indices,
            values,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[C64]) {
        let r = self.offsets[i]..self.offsets[i + 1];
        (&self.indices[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let (idx, vals) = self.row(i);
        match idx.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// Iterates `(row, col, value)` in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.rows).flat_map(move |i| {
            let (idx, vals) = self.row(i);
            idx.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    #[inline]
    pub fn row_dot(&self, i: usize, x: &[C64]) -> C64 {
        let (idx, vals) = self.row(i);
        idx.iter()
            .zip(vals)
            .fold(C64::new(0.0, 0.0), |acc, (&j, &v)| acc + v * x[j])
    }

    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row_dot(i, x);
        }
    }

    pub fn matvec_adjoint_into(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(y.len(), self.cols);
        y.fill(C64::new(0.0, 0.0));
        for (i, &xi) in x.iter().enumerate() {
            let (idx, vals) = self.row(i);
            for (&j, v) in idx.iter().zip(vals) {
                y[j] += v.conj() * xi;
            }
        }
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    /// Copy with the diagonal entries removed from the pattern.
    pub fn without_diagonal(&self) -> Self {
        let mut offsets = Vec::with_capacity(self.rows + 1);
        let mut indices = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        offsets.push(0);
        for i in 0..self.rows {
            let (idx, vals) = self.row(i);
            for (&j, &v) in idx.iter().zip(vals) {
                if j != i {
                    indices.push(j);
                    values.push(v);
                }
            }
            offsets.push(indices.len());
        }
        Self {
            rows: self.rows,
            cols: self.cols,
            offsets,
            indices,
            values,
        }
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.cols, self.rows, t).expect("transposed indices are in bounds")
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    /// Sparse-sparse product (Gustavson).
    pub fn matmul(&self, rhs: &SparseMatrix) -> Result<SparseMatrix, MatrixError> {
        if self.cols != rhs.rows {
            return Err(MatrixError::ShapeMismatch {
                op: "sparse matmul",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut acc = vec![C64::new(0.0, 0.0); rhs.cols];
        let mut marker = vec![usize::MAX; rhs.cols];
        let mut offsets = Vec::with_capacity(self.rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        offsets.push(0);
        let mut touched: Vec<usize> = Vec::new();
        for i in 0..self.rows {
            touched.clear();
            let (ai, av) = self.row(i);
            for (&k, &a) in ai.iter().zip(av) {
                let (bk, bv) = rhs.row(k);
                for (&j, &b) in bk.iter().zip(bv) {
                    if marker[j] != i {
                        marker[j] = i;
                        acc[j] = C64::new(0.0, 0.0);
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                indices.push(j);
                values.push(acc[j]);
            }
            offsets.push(indices.len());
        }
        Ok(SparseMatrix {
            rows: self.rows,
            cols: rhs.cols,
            offsets,
            indices,
            values,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// Diagonal matrix holding unperturbed eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMatrix {
    entries: Vec<C64>,
}

impl DiagonalMatrix {
    pub fn new(entries: Vec<C64>) -> Self {
        Self { entries }
    }

    pub fn from_real(entries: &[f64]) -> Self {
        Self::new(entries.iter().map(|&x| c64(x)).collect())
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_diagonal(&self.entries)
    }
}

impl Index<usize> for DiagonalMatrix {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.entries[i]
    }
}

/// A matrix in either storage.
#[derive(Debug, Clone, PartialEq)]
pub enum Matrix {
    Dense(DenseMatrix),
    Sparse(SparseMatrix),
}

impl From<DenseMatrix> for Matrix {
    fn from(m: DenseMatrix) -> Self {
        Matrix::Dense(m)
    }
}

impl From<SparseMatrix> for Matrix {
    fn from(m: SparseMatrix) -> Self {
        Matrix::Sparse(m)
    }
}

impl Matrix {
    pub fn rows(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.rows(),
            Matrix::Sparse(m) => m.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.cols(),
            Matrix::Sparse(m) => m.cols(),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows(), self.cols())
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Matrix::Sparse(_))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        match self {
            Matrix::Dense(m) => m[(i, j)],
            Matrix::Sparse(m) => m.get(i, j),
        }
    }

    /// Stored entries (every entry for dense storage).
    pub fn nnz(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.rows() * m.cols(),
            Matrix::Sparse(m) => m.nnz(),
        }
    }

    #[inline]
    pub fn row_dot(&self, i: usize, x: &[C64]) -> C64 {
        match self {
            Matrix::Dense(m) => dot(m.row(i), x),
            Matrix::Sparse(m) => m.row_dot(i, x),
        }
    }

    #[inline]
    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        match self {
            Matrix::Dense(m) => m.matvec_into(x, y),
            Matrix::Sparse(m) => m.matvec_into(x, y),
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Result<Vec<C64>, MatrixError> {
        if x.len() != self.cols() {
            return Err(MatrixError::ShapeMismatch {
                op: "matvec",
                left: self.shape(),
                right: (x.len(), 1),
            });
        }
        let mut y = vec![C64::new(0.0, 0.0); self.rows()];
        self.matvec_into(x, &mut y);
        Ok(y)
    }

    pub fn matvec_adjoint_into(&self, x: &[C64], y: &mut [C64]) {
        match self {
            Matrix::Dense(m) => m.matvec_adjoint_into(x, y),
            Matrix::Sparse(m) => m.matvec_adjoint_into(x, y),
        }
    }

    pub fn diagonal(&self) -> Vec<C64> {
        match self {
            Matrix::Dense(m) => m.diagonal(),
            Matrix::Sparse(m) => m.diagonal(),
        }
    }

    /// Copy with zeroed diagonal; sparse storage also drops it from the pattern.
    pub fn without_diagonal(&self) -> Matrix {
        match self {
            Matrix::Dense(m) => {
                let mut out = m.clone();
                for i in 0..m.rows().min(m.cols()) {
                    out[(i, i)] = C64::new(0.0, 0.0);
                }
                Matrix::Dense(out)
            }
            Matrix::Sparse(m) => Matrix::Sparse(m.without_diagonal()),
        }
    }

    pub fn scale(&self, s: C64) -> Matrix {
        match self {
            Matrix::Dense(m) => Matrix::Dense(m.scale(s)),
            Matrix::Sparse(m) => Matrix::Sparse(m.scale(s)),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Matrix::Dense(m) => m.clone(),
            Matrix::Sparse(m) => m.to_dense(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        match self {
            Matrix::Dense(m) => Matrix::Dense(m.transpose()),
            Matrix::Sparse(m) => Matrix::Sparse(m.transpose()),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            Matrix::Dense(m) => m.max_abs(),
            Matrix::Sparse(m) => m.max_abs(),
        }
    }

    /// `self * rhs` in the storage of `self` (dense when either side is dense).
    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix, MatrixError> {
        match (self, rhs) {
            (Matrix::Sparse(a), Matrix::Sparse(b)) => a.matmul(b).map(Matrix::Sparse),
            (a, b) => a.to_dense().matmul(&b.to_dense()).map(Matrix::Dense),
        }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows() != self.cols() {
            return false;
        }
        match self {
            Matrix::Dense(m) => {
                (0..m.rows()).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).norm() <= tol))
            }
            Matrix::Sparse(m) => m
                .triplets()
                .all(|(i, j, v)| (v - m.get(j, i)).norm() <= tol),
        }
    }
}

/// Element-wise product. When either operand is sparse the result keeps the
/// sparse pattern.
pub fn hadamard(a: &Matrix, b: &Matrix) -> Result<Matrix, MatrixError> {
    if a.shape() != b.shape() {
        return Err(MatrixError::ShapeMismatch {
            op: "hadamard",
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(match (a, b) {
        (Matrix::Dense(x), Matrix::Dense(y)) => Matrix::Dense(hadamard_dense(x, y)?),
        (Matrix::Sparse(s), other) | (other, Matrix::Sparse(s)) => {
            let mut out = s.clone();
            let SparseMatrix {
                offsets,
                indices,
                values,
                ..
            } = &mut out;
            for i in 0..s.rows() {
                for k in offsets[i]..offsets[i + 1] {
                    values[k] *= other.get(i, indices[k]);
                }
            }
            Matrix::Sparse(out)
        }
    })
}

pub fn hadamard_dense(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix, MatrixError> {
    a.zip_with(b, "hadamard", |x, y| x * y)
}

/// `a ▷ b = (I ⋆ a) b`: row `m` of `b` scaled by `a[m][m]`.
pub fn triangle(a: &Matrix, b: &Matrix) -> Result<Matrix, MatrixError> {
    if a.rows() != a.cols() {
        return Err(MatrixError::NotSquare {
            op: "triangle",
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if a.cols() != b.rows() {
        return Err(MatrixError::ShapeMismatch {
            op: "triangle",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let diag = a.diagonal();
    Ok(match b {
        Matrix::Dense(b) => Matrix::Dense(scale_rows(&diag, b)),
        Matrix::Sparse(b) => {
            let mut out = b.clone();
            for (i, &d) in diag.iter().enumerate() {
                let r = out.offsets[i]..out.offsets[i + 1];
                out.values[r].iter_mut().for_each(|v| *v *= d);
            }
            Matrix::Sparse(out)
        }
    })
}

/// Dense form of [`triangle`].
pub fn triangle_dense(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix, MatrixError> {
    if !a.is_square() {
        return Err(MatrixError::NotSquare {
            op: "triangle",
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if a.cols() != b.rows() {
        return Err(MatrixError::ShapeMismatch {
            op: "triangle",
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(scale_rows(&a.diagonal(), b))
}

fn scale_rows(diag: &[C64], b: &DenseMatrix) -> DenseMatrix {
    let mut out = b.clone();
    for (i, &d) in diag.iter().enumerate() {
        out.row_mut(i).iter_mut().for_each(|v| *v *= d);
    }
    out
}

/// `a Δ'` (product with the transpose of `delta`): row `n` of the result is
/// `Δ` applied to row `n` of `a`.
pub fn mul_transpose(a: &DenseMatrix, delta: &Matrix) -> Result<DenseMatrix, MatrixError> {
    if a.cols() != delta.cols() {
        return Err(MatrixError::ShapeMismatch {
            op: "mul_transpose",
            left: a.shape(),
            right: delta.shape(),
        });
    }
    let mut out = DenseMatrix::zeros(a.rows(), delta.rows());
    for n in 0..a.rows() {
        let (src, dst) = (a.row(n), n);
        let mut buf = vec![C64::new(0.0, 0.0); delta.rows()];
        delta.matvec_into(src, &mut buf);
        out.row_mut(dst).copy_from_slice(&buf);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralNormError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("spectral norm did not converge in {iterations} iterations (best estimate {best})")]
    NotConverged { best: f64, iterations: usize },
}

pub const SPECTRAL_NORM_TOL: f64 = 1e-10;
pub const SPECTRAL_NORM_MAX_ITER: usize = 10_000;

/// Largest singular value by power iteration on `a^† a`, starting from the
/// normalized all-ones vector.
///
/// If the start vector happens to lie in the null space of `a`, the iteration
/// restarts from the basis vector of the column with the largest norm.
pub fn spectral_norm(a: &Matrix, tol: f64, max_iter: usize) -> Result<f64, SpectralNormError> {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return Err(MatrixError::Empty.into());
    }
    let mut v = vec![c64(1.0 / libm::sqrt(cols as f64)); cols];
    let mut av = vec![C64::new(0.0, 0.0); rows];
    let mut w = vec![C64::new(0.0, 0.0); cols];
    let mut sigma = 0.0;
    let mut restarted = false;
    for it in 0..max_iter {
        a.matvec_into(&v, &mut av);
        let next = norm2(&av);
        if next == 0.0 {
            if restarted || a.max_abs() == 0.0 {
                return Ok(0.0);
            }
            restarted = true;
            let dense = a.to_dense();
            let best = (0..cols)
                .max_by(|&x, &y| {
                    let nx = norm2(&dense.column(x));
                    let ny = norm2(&dense.column(y));
                    nx.total_cmp(&ny)
                })
                .unwrap_or(0);
            v.fill(C64::new(0.0, 0.0));
            v[best] = c64(1.0);
            continue;
        }
        if it > 0 && (next - sigma).abs() <= tol * next {
            return Ok(next);
        }
        sigma = next;
        a.matvec_adjoint_into(&av, &mut w);
        let wn = norm2(&w);
        if wn == 0.0 {
            return Ok(sigma);
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / wn;
        }
    }
    Err(SpectralNormError::NotConverged {
        best: sigma,
        iterations: max_iter,
    })
}

/// Spectral norm with the default tolerance and iteration budget.
pub fn spectral_norm_default(a: &Matrix) -> Result<f64, SpectralNormError> {
    spectral_norm(a, SPECTRAL_NORM_TOL, SPECTRAL_NORM_MAX_ITER)
}

pub fn norm2(x: &[C64]) -> f64 {
    libm::sqrt(x.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

pub fn norm_inf(x: &[C64]) -> f64 {
    x.iter().fold(0.0, |m, z| m.max(z.norm()))
}
