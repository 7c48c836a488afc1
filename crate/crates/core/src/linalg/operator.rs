use super::SparseMatrix;
use crate::Real;

/// A square linear map given by its action on vectors.
///
/// `apply` must be linear to machine precision; implementors that count
/// applications (the implicit dual Hessian does) may keep interior-mutable
/// counters, but the returned values must not depend on call history.
pub trait LinearOperator<T: Real> {
    fn dim(&self) -> usize;

    /// y = A x. Both slices have length `dim`.
    fn apply(&self, x: &[T], y: &mut [T]);

    fn apply_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.dim()];
        self.apply(x, &mut y);
        y
    }
}

impl<T: Real> LinearOperator<T> for SparseMatrix<T> {
    fn dim(&self) -> usize {
        assert_eq!(self.n_rows(), self.n_cols(), "operator must be square");
        self.n_rows()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        self.multiply_into(x, y);
    }
}

impl<T: Real, O: LinearOperator<T> + ?Sized> LinearOperator<T> for &O {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        (**self).apply(x, y)
    }
}
