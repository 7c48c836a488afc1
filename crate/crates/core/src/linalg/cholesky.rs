use super::{LinalgError, SparseMatrix};
use crate::Real;

/// Sparse Cholesky factorization A = L Lᵀ of a symmetric positive definite
/// matrix, in natural (assembly) order.
///
/// Built up-looking row by row: the pattern of row k of L is the union of
/// elimination-tree paths from the nonzeros of the strict upper part of
/// column k, which keeps the symbolic work proportional to the fill.
#[derive(Debug, Clone)]
pub struct SpdFactor<T> {
    n: usize,
    // L in compressed column form; each column stores the diagonal entry
    // first, then strictly increasing row indices.
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> SpdFactor<T> {
    /// Factors a symmetric positive definite matrix.
    pub fn new(a: &SparseMatrix<T>) -> Result<Self, LinalgError> {
        if a.n_rows() != a.n_cols() {
            return Err(LinalgError::NotSquare {
                rows: a.n_rows(),
                cols: a.n_cols(),
            });
        }
        if let Some((row, col)) = a.symmetry_error() {
            return Err(LinalgError::NotSymmetric { row, col });
        }
        let n = a.n_rows();
        let parent = etree(a);

        // Symbolic pass: column counts of L (diagonal included).
        let mut counts = vec![1usize; n];
        {
            let mut mark = vec![usize::MAX; n];
            for k in 0..n {
                mark[k] = k;
                let (cols, _) = a.row(k);
                for &j in cols.iter().filter(|&&j| j < k) {
                    let mut i = j;
                    while mark[i] != k {
                        counts[i] += 1;
                        mark[i] = k;
                        i = parent[i];
                    }
                }
            }
        }
        let mut col_ptr = vec![0usize; n + 1];
        for i in 0..n {
            col_ptr[i + 1] = col_ptr[i] + counts[i];
        }
        let nnz = col_ptr[n];
        let mut row_idx = vec![0usize; nnz];
        let mut values = vec![T::zero(); nnz];
        // next free slot per column; slot 0 of each column is the diagonal
        let mut head: Vec<usize> = (0..n).map(|i| col_ptr[i] + 1).collect();
        for (i, &p) in col_ptr.iter().take(n).enumerate() {
            row_idx[p] = i;
        }

        // Numeric pass, up-looking.
        let mut x = vec![T::zero(); n]; // dense scatter of row k
        let mut pattern = Vec::with_capacity(n);
        let mut mark = vec![usize::MAX; n];
        for k in 0..n {
            // reach(k): pattern of row k of L, in ascending column order
            pattern.clear();
            mark[k] = k;
            let (cols, vals) = a.row(k);
            let mut diag = T::zero();
            for (&j, &v) in cols.iter().zip(vals.iter()) {
                if j > k {
                    continue;
                }
                if j == k {
                    diag = v;
                    continue;
                }
                x[j] = v;
                let mut len = 0;
                let mut i = j;
                while mark[i] != k {
                    pattern.push(i);
                    len += 1;
                    mark[i] = k;
                    i = parent[i];
                }
                // the freshly walked path is root-ward; reverse it in place so
                // the full pattern stays in topological (ascending) order once
                // sorted below
                let s = pattern.len();
                pattern[s - len..].reverse();
            }
            pattern.sort_unstable();

            for &j in &pattern {
                // L[k,j] = (A[k,j] − Σ_i L[k,i] L[j,i]) / L[j,j];
                // the subtraction was accumulated into x[j] already.
                let lkj = x[j] / values[col_ptr[j]];
                x[j] = T::zero();
                for p in col_ptr[j] + 1..head[j] {
                    x[row_idx[p]] -= values[p] * lkj;
                }
                diag -= lkj * lkj;
                let slot = head[j];
                head[j] += 1;
                row_idx[slot] = k;
                values[slot] = lkj;
            }
            if diag <= T::zero() || !diag.is_finite() {
                return Err(LinalgError::NotPositiveDefinite { row: k });
            }
            values[col_ptr[k]] = diag.sqrt();
        }

        Ok(SpdFactor {
            n,
            col_ptr,
            row_idx,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves A x = r.
    pub fn solve(&self, r: &[T]) -> Result<Vec<T>, LinalgError> {
        if r.len() != self.n {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n,
                got: r.len(),
            });
        }
        let mut x = r.to_vec();
        self.solve_in_place(&mut x);
        Ok(x)
    }

    pub fn solve_in_place(&self, x: &mut [T]) {
        assert_eq!(x.len(), self.n);
        // forward: L y = r
        for j in 0..self.n {
            let d = self.values[self.col_ptr[j]];
            x[j] /= d;
            let xj = x[j];
            for p in self.col_ptr[j] + 1..self.col_ptr[j + 1] {
                x[self.row_idx[p]] -= self.values[p] * xj;
            }
        }
        // backward: Lᵀ x = y
        for j in (0..self.n).rev() {
            let mut acc = x[j];
            for p in self.col_ptr[j] + 1..self.col_ptr[j + 1] {
                acc -= self.values[p] * x[self.row_idx[p]];
            }
            x[j] = acc / self.values[self.col_ptr[j]];
        }
    }
}

/// Elimination tree of a symmetric matrix given by its full pattern.
fn etree<T: Real>(a: &SparseMatrix<T>) -> Vec<usize> {
    let n = a.n_rows();
    let none = usize::MAX;
    let mut parent = vec![none; n];
    let mut ancestor = vec![none; n];
    for k in 0..n {
        let (cols, _) = a.row(k);
        for &i0 in cols.iter().filter(|&&j| j < k) {
            let mut i = i0;
            while i != none && i != k {
                let next = ancestor[i];
                ancestor[i] = k;
                if next == none {
                    parent[i] = k;
                }
                i = next;
            }
        }
    }
    parent
}
