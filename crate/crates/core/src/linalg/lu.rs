use super::{LinalgError, SparseMatrix};
use crate::Real;

/// Sparse LU factorization with partial pivoting for general square matrices.
///
/// The matrix is first symmetrically permuted by reverse Cuthill-McKee on the
/// pattern of M + Mᵀ to keep fill local, then factored left-looking: each
/// column is obtained by a sparse triangular solve whose nonzero pattern is
/// found by depth-first search through the columns of L computed so far.
#[derive(Debug, Clone)]
pub struct GeneralFactor<T> {
    n: usize,
    /// fill-reducing preorder: position k of the permuted system holds
    /// original index `order[k]`
    order: Vec<usize>,
    /// pivot row (in preordered indexing) chosen at elimination step k
    pivot_row: Vec<usize>,
    l_col_ptr: Vec<usize>,
    l_row_idx: Vec<usize>,
    l_values: Vec<T>,
    u_col_ptr: Vec<usize>,
    u_row_idx: Vec<usize>,
    u_values: Vec<T>,
}

impl<T: Real> GeneralFactor<T> {
    /// Factors a general square matrix. Reports `Singular` with the original
    /// column index at which no usable pivot exists.
    pub fn new(a: &SparseMatrix<T>) -> Result<Self, LinalgError> {
        if a.n_rows() != a.n_cols() {
            return Err(LinalgError::NotSquare {
                rows: a.n_rows(),
                cols: a.n_cols(),
            });
        }
        let n = a.n_rows();
        let order = reverse_cuthill_mckee(a);
        let mut rank = vec![0usize; n];
        for (k, &i) in order.iter().enumerate() {
            rank[i] = k;
        }

        // permuted matrix in compressed column form
        let mut ac_ptr = vec![0usize; n + 1];
        let mut ac_row = vec![0usize; a.nnz()];
        let mut ac_val = vec![T::zero(); a.nnz()];
        for (_, c, _) in a.iter() {
            ac_ptr[rank[c] + 1] += 1;
        }
        for k in 0..n {
            ac_ptr[k + 1] += ac_ptr[k];
        }
        let mut fill = ac_ptr.clone();
        for (r, c, v) in a.iter() {
            let slot = fill[rank[c]];
            fill[rank[c]] += 1;
            ac_row[slot] = rank[r];
            ac_val[slot] = v;
        }

        let none = usize::MAX;
        // pinv[r] = elimination step at which permuted row r became pivotal
        let mut pinv = vec![none; n];
        let mut pivot_row = vec![0usize; n];
        let mut l_col_ptr = vec![0usize; n + 1];
        let mut l_row_idx = Vec::new();
        let mut l_values: Vec<T> = Vec::new();
        let mut u_col_ptr = vec![0usize; n + 1];
        let mut u_row_idx = Vec::new();
        let mut u_values: Vec<T> = Vec::new();

        let mut x = vec![T::zero(); n];
        let mut mark = vec![none; n];
        let mut post = Vec::with_capacity(n);
        let mut stack: Vec<(usize, usize)> = Vec::new();

        for k in 0..n {
            // pattern of L⁻¹ a_k by DFS through columns of L; children of a
            // pivotal row are the off-diagonal rows of its L column
            post.clear();
            for p in ac_ptr[k]..ac_ptr[k + 1] {
                let start = ac_row[p];
                if mark[start] == k {
                    continue;
                }
                stack.push((start, 0));
                mark[start] = k;
                while let Some(top) = stack.len().checked_sub(1) {
                    let (node, mut child) = stack[top];
                    let step = pinv[node];
                    let (lo, hi) = if step == none {
                        (0, 0)
                    } else {
                        (l_col_ptr[step] + 1, l_col_ptr[step + 1])
                    };
                    let mut descended = false;
                    while lo + child < hi {
                        let next = l_row_idx[lo + child];
                        child += 1;
                        if mark[next] != k {
                            mark[next] = k;
                            stack[top].1 = child;
                            stack.push((next, 0));
                            descended = true;
                            break;
                        }
                    }
                    if !descended {
                        post.push(node);
                        stack.pop();
                    }
                }
            }

            for p in ac_ptr[k]..ac_ptr[k + 1] {
                x[ac_row[p]] = ac_val[p];
            }
            // reverse postorder is a topological order of the solve DAG
            for &j in post.iter().rev() {
                let step = pinv[j];
                if step == none {
                    continue;
                }
                let xj = x[j];
                for p in l_col_ptr[step] + 1..l_col_ptr[step + 1] {
                    x[l_row_idx[p]] -= l_values[p] * xj;
                }
            }

            // partial pivoting over the not-yet-pivotal rows of the pattern
            let mut best = none;
            let mut best_mag = T::zero();
            for &j in &post {
                if pinv[j] == none {
                    let mag = x[j].abs();
                    if best == none || mag > best_mag {
                        best = j;
                        best_mag = mag;
                    }
                }
            }
            if best == none || best_mag.is_zero() || !best_mag.is_finite() {
                for &j in &post {
                    x[j] = T::zero();
                }
                return Err(LinalgError::Singular { col: order[k] });
            }
            let pivot = x[best];

            l_row_idx.push(best);
            l_values.push(T::one());
            for &j in &post {
                if pinv[j] == none && j != best {
                    l_row_idx.push(j);
                    l_values.push(x[j] / pivot);
                } else if pinv[j] != none {
                    u_row_idx.push(pinv[j]);
                    u_values.push(x[j]);
                }
                x[j] = T::zero();
            }
            x[best] = T::zero();
            u_row_idx.push(k);
            u_values.push(pivot);
            l_col_ptr[k + 1] = l_row_idx.len();
            u_col_ptr[k + 1] = u_row_idx.len();
            pinv[best] = k;
            pivot_row[k] = best;
        }

        Ok(GeneralFactor {
            n,
            order,
            pivot_row,
            l_col_ptr,
            l_row_idx,
            l_values,
            u_col_ptr,
            u_row_idx,
            u_values,
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
        let n = self.n;
        let mut w: Vec<T> = self.order.iter().map(|&i| r[i]).collect();
        // forward solve L z = P w, in place; pivotal slots are never touched
        // by later columns, so each holds its finished z component
        let mut z = vec![T::zero(); n];
        for k in 0..n {
            let zk = w[self.pivot_row[k]];
            z[k] = zk;
            for p in self.l_col_ptr[k] + 1..self.l_col_ptr[k + 1] {
                w[self.l_row_idx[p]] -= self.l_values[p] * zk;
            }
        }
        // backward solve U y = z; the diagonal is the last entry per column
        for k in (0..n).rev() {
            let yk = z[k] / self.u_values[self.u_col_ptr[k + 1] - 1];
            z[k] = yk;
            for p in self.u_col_ptr[k]..self.u_col_ptr[k + 1] - 1 {
                z[self.u_row_idx[p]] -= self.u_values[p] * yk;
            }
        }
        let mut out = vec![T::zero(); n];
        for k in 0..n {
            out[self.order[k]] = z[k];
        }
        Ok(out)
    }
}

/// Reverse Cuthill-McKee order on the pattern of M + Mᵀ. Deterministic: each
/// component starts at its vertex of least (degree, index) and neighbors are
/// visited sorted the same way.
fn reverse_cuthill_mckee<T: Real>(m: &SparseMatrix<T>) -> Vec<usize> {
    let n = m.n_rows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (r, c, _) in m.iter() {
        if r != c {
            adj[r].push(c);
            adj[c].push(r);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();

    let mut visited = vec![false; n];
    let mut ordered = Vec::with_capacity(n);
    let mut queue = std::collections::VecDeque::new();
    let mut starts: Vec<usize> = (0..n).collect();
    starts.sort_unstable_by_key(|&i| (degree[i], i));
    let mut frontier = Vec::new();
    for &s in &starts {
        if visited[s] {
            continue;
        }
        visited[s] = true;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            ordered.push(v);
            frontier.clear();
            frontier.extend(adj[v].iter().copied().filter(|&w| !visited[w]));
            frontier.sort_unstable_by_key(|&w| (degree[w], w));
            for &w in &frontier {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    ordered.reverse();
    ordered
}
