use super::{vecops, LinearOperator};
use crate::Real;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Estimates ‖A‖₂ of a symmetric positive semidefinite operator by power
/// iteration from a seeded random start. Returns a value that approaches the
/// largest eigenvalue from below as the iteration count grows.
pub fn estimate_spectral_norm<T: Real>(
    op: &impl LinearOperator<T>,
    iterations: usize,
    seed: u64,
) -> T {
    let n = op.dim();
    if n == 0 {
        return T::zero();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<T> = (0..n).map(|_| T::of(rng.gen::<f64>() - 0.5)).collect();
    let mut y = vec![T::zero(); n];

    let norm = vecops::norm2(&x);
    if norm.is_zero() {
        x[0] = T::one();
    } else {
        for xi in &mut x {
            *xi /= norm;
        }
    }
    for _ in 0..iterations {
        op.apply(&x, &mut y);
        let ny = vecops::norm2(&y);
        if ny.is_zero() {
            // the start landed in the kernel; probe coordinate directions
            return probe_basis(op, &mut y);
        }
        for (xi, &yi) in x.iter_mut().zip(y.iter()) {
            *xi = yi / ny;
        }
    }
    op.apply(&x, &mut y);
    vecops::norm2(&y)
}

fn probe_basis<T: Real>(op: &impl LinearOperator<T>, scratch: &mut [T]) -> T {
    let n = op.dim();
    let mut best = T::zero();
    let mut e = vec![T::zero(); n];
    for i in 0..n {
        e[i] = T::one();
        op.apply(&e, scratch);
        let ny = vecops::norm2(scratch);
        if ny > best {
            best = ny;
        }
        e[i] = T::zero();
    }
    best
}
