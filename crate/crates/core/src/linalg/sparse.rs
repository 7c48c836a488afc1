use super::LinalgError;
use crate::Real;

/// Compressed sparse row matrix.
///
/// Column indices within each row are strictly increasing and duplicates are
/// summed at construction time. Explicitly stored zeros are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> SparseMatrix<T> {
    /// Builds a matrix from unordered (row, col, value) triplets; duplicate
    /// positions are summed.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, T)],
    ) -> Self {
        let mut builder = SparseBuilder::new(n_rows, n_cols);
        for &(r, c, v) in triplets {
            builder.add(r, c, v);
        }
        builder.build()
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        SparseMatrix {
            n_rows,
            n_cols,
            row_ptr: vec![0; n_rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Entries of one row as parallel (column, value) slices.
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    /// Stored value at (i, j), or zero.
    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => T::zero(),
        }
    }

    /// Iterates stored entries as (row, col, value).
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.n_rows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals.iter()).map(move |(&c, &v)| (i, c, v))
        })
    }

    /// y = M x.
    pub fn multiply(&self, x: &[T]) -> Result<Vec<T>, LinalgError> {
        if x.len() != self.n_cols {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n_cols,
                got: x.len(),
            });
        }
        let mut y = vec![T::zero(); self.n_rows];
        self.multiply_into(x, &mut y);
        Ok(y)
    }

    /// y = M x without allocation; panics on mismatched lengths.
    pub fn multiply_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(y.len(), self.n_rows);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            let mut acc = T::zero();
            for (&c, &v) in cols.iter().zip(vals.iter()) {
                acc += v * x[c];
            }
            y[i] = acc;
        }
    }

    /// y = Mᵀ x without allocation.
    pub fn multiply_transpose_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n_rows);
        assert_eq!(y.len(), self.n_cols);
        for v in y.iter_mut() {
            *v = T::zero();
        }
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals.iter()) {
                y[c] += v * x[i];
            }
        }
    }

    pub fn multiply_transpose(&self, x: &[T]) -> Result<Vec<T>, LinalgError> {
        if x.len() != self.n_rows {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n_rows,
                got: x.len(),
            });
        }
        let mut y = vec![T::zero(); self.n_cols];
        self.multiply_transpose_into(x, &mut y);
        Ok(y)
    }

    pub fn transpose(&self) -> SparseMatrix<T> {
        let mut builder = SparseBuilder::new(self.n_cols, self.n_rows);
        for (i, j, v) in self.iter() {
            builder.add(j, i, v);
        }
        builder.build()
    }

    /// Checks symmetry of pattern and values to a relative tolerance.
    pub fn symmetry_error(&self) -> Option<(usize, usize)> {
        if self.n_rows != self.n_cols {
            return Some((self.n_rows, self.n_cols));
        }
        let scale = self.max_abs();
        let tol = T::of(1e-12) * if scale > T::zero() { scale } else { T::one() };
        let t = self.transpose();
        for i in 0..self.n_rows {
            let (ca, va) = self.row(i);
            let (cb, vb) = t.row(i);
            let mut a = 0;
            let mut b = 0;
            while a < ca.len() || b < cb.len() {
                let (col, da, db) = match (ca.get(a), cb.get(b)) {
                    (Some(&x), Some(&y)) if x == y => {
                        let r = (x, va[a], vb[b]);
                        a += 1;
                        b += 1;
                        r
                    }
                    (Some(&x), Some(&y)) if x < y => {
                        let r = (x, va[a], T::zero());
                        a += 1;
                        r
                    }
                    (Some(_), Some(&y)) => {
                        let r = (y, T::zero(), vb[b]);
                        b += 1;
                        r
                    }
                    (Some(&x), None) => {
                        let r = (x, va[a], T::zero());
                        a += 1;
                        r
                    }
                    (None, Some(&y)) => {
                        let r = (y, T::zero(), vb[b]);
                        b += 1;
                        r
                    }
                    (None, None) => unreachable!(),
                };
                if (da - db).abs() > tol {
                    return Some((i, col));
                }
            }
        }
        None
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |m, &v| if v.abs() > m { v.abs() } else { m })
    }

    /// Dense copy, for small oracles and debugging only.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.n_cols]; self.n_rows];
        for (i, j, v) in self.iter() {
            d[i][j] += v;
        }
        d
    }
}

/// Accumulates triplets and produces a deduplicated CSR matrix.
#[derive(Debug, Clone)]
pub struct SparseBuilder<T> {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Real> SparseBuilder<T> {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        SparseBuilder {
            n_rows,
            n_cols,
            entries: Vec::new(),
        }
    }

    pub fn add(&mut self, row: usize, col: usize, value: T) {
        assert!(row < self.n_rows && col < self.n_cols, "entry out of bounds");
        self.entries.push((row, col, value));
    }

    pub fn build(mut self) -> SparseMatrix<T> {
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.n_rows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<T> = Vec::with_capacity(self.entries.len());
        let mut last = None;
        for &(r, c, v) in &self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                last = Some((r, c));
            }
            row_ptr[r + 1] = col_idx.len();
        }
        // forward-fill row pointers across empty rows
        for i in 1..=self.n_rows {
            if row_ptr[i] < row_ptr[i - 1] {
                row_ptr[i] = row_ptr[i - 1];
            }
        }
        SparseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }
}
