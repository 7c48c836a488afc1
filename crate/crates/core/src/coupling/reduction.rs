use crate::linalg::{SparseBuilder, SparseMatrix};
use crate::Real;

/// Partition of a DOF range into free and prescribed indices, with the
/// restriction maps Dirichlet elimination needs.
#[derive(Debug, Clone)]
pub(crate) struct Reduction {
    free: Vec<usize>,
    fixed: Vec<usize>,
    to_free: Vec<Option<usize>>,
    to_fixed: Vec<Option<usize>>,
}

impl Reduction {
    /// `fixed` must be sorted, duplicate-free and within range.
    pub fn new(n: usize, fixed: Vec<usize>) -> Self {
        debug_assert!(fixed.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(fixed.last().map_or(true, |&d| d < n));
        let mut to_fixed = vec![None; n];
        for (k, &dof) in fixed.iter().enumerate() {
            to_fixed[dof] = Some(k);
        }
        let mut to_free = vec![None; n];
        let mut free = Vec::with_capacity(n - fixed.len());
        for (dof, slot) in to_free.iter_mut().enumerate() {
            if to_fixed[dof].is_none() {
                *slot = Some(free.len());
                free.push(dof);
            }
        }
        Reduction {
            free,
            fixed,
            to_free,
            to_fixed,
        }
    }

    pub fn n_full(&self) -> usize {
        self.to_free.len()
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn fixed(&self) -> &[usize] {
        &self.fixed
    }

    /// Keeps every row, splits the columns into (free, fixed) parts.
    pub fn split_columns<T: Real>(
        &self,
        m: &SparseMatrix<T>,
    ) -> (SparseMatrix<T>, SparseMatrix<T>) {
        debug_assert_eq!(m.n_cols(), self.n_full());
        let mut free = SparseBuilder::new(m.n_rows(), self.n_free());
        let mut fixed = SparseBuilder::new(m.n_rows(), self.fixed.len());
        for (i, j, value) in m.iter() {
            match self.to_free[j] {
                Some(jf) => free.add(i, jf, value),
                None => fixed.add(i, self.to_fixed[j].expect("partition"), value),
            }
        }
        (free.build(), fixed.build())
    }

    /// Restricts the rows to the free set and splits the columns, giving the
    /// (free × free, free × fixed) pair an elimination needs.
    pub fn reduce_square<T: Real>(
        &self,
        m: &SparseMatrix<T>,
    ) -> (SparseMatrix<T>, SparseMatrix<T>) {
        debug_assert_eq!(m.n_rows(), self.n_full());
        debug_assert_eq!(m.n_cols(), self.n_full());
        let mut free = SparseBuilder::new(self.n_free(), self.n_free());
        let mut fixed = SparseBuilder::new(self.n_free(), self.fixed.len());
        for (i, j, value) in m.iter() {
            let Some(fi) = self.to_free[i] else { continue };
            match self.to_free[j] {
                Some(jf) => free.add(fi, jf, value),
                None => fixed.add(fi, self.to_fixed[j].expect("partition"), value),
            }
        }
        (free.build(), fixed.build())
    }

    pub fn gather<T: Copy>(&self, full: &[T]) -> Vec<T> {
        debug_assert_eq!(full.len(), self.n_full());
        self.free.iter().map(|&dof| full[dof]).collect()
    }

    /// Rebuilds a full vector from free entries and prescribed values.
    pub fn scatter<T: Real>(&self, free: &[T], fixed_values: &[T]) -> Vec<T> {
        debug_assert_eq!(free.len(), self.n_free());
        debug_assert_eq!(fixed_values.len(), self.fixed.len());
        let mut full = vec![T::zero(); self.n_full()];
        for (&dof, &value) in self.free.iter().zip(free) {
            full[dof] = value;
        }
        for (&dof, &value) in self.fixed.iter().zip(fixed_values) {
            full[dof] = value;
        }
        full
    }
}
