//! Dense triangular solves for the small interpolation matrices.
//!
//! Matrices are row-major `n * n` slices. Only the lower triangle (including
//! the diagonal) is read.

use crate::scalar::Scalar;

/// Solves `L x = rhs` by forward substitution.
pub fn forward_substitution<S: Scalar>(lower: &[S], n: usize, rhs: &[S]) -> Vec<S> {
    assert_eq!(lower.len(), n * n);
    assert_eq!(rhs.len(), n);
    let mut x = Vec::with_capacity(n);
    for i in 0..n {
        let row = &lower[i * n..i * n + i];
        let mut acc = rhs[i];
        for (l, xj) in row.iter().zip(&x) {
            acc -= *l * *xj;
        }
        x.push(acc / lower[i * n + i]);
    }
    x
}

/// Solves `Lᵀ x = rhs` by backward substitution, without forming `Lᵀ`.
pub fn transpose_backward_substitution<S: Scalar>(lower: &[S], n: usize, rhs: &[S]) -> Vec<S> {
    assert_eq!(lower.len(), n * n);
    assert_eq!(rhs.len(), n);
    let mut x = rhs.to_vec();
    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in i + 1..n {
            // (Lᵀ)_{ij} = L_{ji}
            acc -= lower[j * n + i] * x[j];
        }
        x[i] = acc / lower[i * n + i];
    }
    x
}

/// Copies the leading `k * k` block of an `n * n` row-major matrix.
pub fn leading_block<S: Scalar>(matrix: &[S], n: usize, k: usize) -> Vec<S> {
    assert!(k <= n);
    let mut out = Vec::with_capacity(k * k);
    for row in matrix.chunks(n).take(k) {
        out.extend_from_slice(&row[..k]);
    }
    out
}
