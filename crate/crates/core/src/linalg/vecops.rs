//! Small dense vector helpers shared by the solvers.

use crate::Real;

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).map(|(&x, &y)| x * y).sum()
}

pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// y += alpha * x
pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x.iter()) {
        *yi += alpha * xi;
    }
}

/// Relative difference ‖a − b‖ / max(‖b‖, floor); floor guards zero vectors.
pub fn rel_diff<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut num = T::zero();
    for (&x, &y) in a.iter().zip(b.iter()) {
        num += (x - y) * (x - y);
    }
    let den = norm2(b);
    let den = if den > T::zero() { den } else { T::one() };
    num.sqrt() / den
}
