//! Spectral functions, spectrum enclosure and Chebyshev matrix functions.

mod chebyshev;
mod function;
mod matern;

use serde::{Deserialize, Serialize};

use crate::sparse::SymmetricSparseMatrix;

pub use chebyshev::{
    apply_chebyshev, chebyshev_fit, choose_order, ChebyshevExpansion, ChebyshevOperator,
    OrderChoice, MAX_ORDER,
};
pub use function::{
    fractional_symbol, from_spde_symbol, matern_normalization, matern_spectral, SpectralFunction,
};
pub use matern::{bessel_k, matern_correlation, matern_covariance, practical_range};

/// Closed interval `[lo, hi]` on the spectral axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralInterval {
    pub lo: f64,
    pub hi: f64,
}

impl SpectralInterval {
    pub fn contains(&self, x: f64) -> bool {
        (self.lo..=self.hi).contains(&x)
    }

    /// Widens a (near-)degenerate interval to `[lo, lo + eps]` with
    /// `eps = 1e-8 * max(1, |lo|)` so that a Chebyshev map exists.
    pub fn widened(self) -> Self {
        let eps = 1e-8 * self.lo.abs().max(1.0);
        if self.hi - self.lo < eps {
            SpectralInterval {
                lo: self.lo,
                hi: self.lo + eps,
            }
        } else {
            self
        }
    }
}

/// Gershgorin enclosure `[max(0, min_i(S_ii - R_i)), max_i(S_ii + R_i)]`
/// with `R_i = sum_{j != i} |S_ij|`. The lower end is clamped at zero since
/// `S` is positive semi-definite.
pub fn gershgorin_bound(s: &SymmetricSparseMatrix) -> SpectralInterval {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..s.n() {
        let (mut diag, mut radius) = (0.0, 0.0);
        for (j, v) in s.row(i) {
            if j == i {
                diag = v;
            } else {
                radius += v.abs();
            }
        }
        lo = lo.min(diag - radius);
        hi = hi.max(diag + radius);
    }
    if s.n() == 0 {
        return SpectralInterval { lo: 0.0, hi: 0.0 };
    }
    SpectralInterval {
        lo: lo.max(0.0),
        hi: hi.max(0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_and_two_by_two() {
        let s = SymmetricSparseMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        assert_eq!(gershgorin_bound(&s), SpectralInterval { lo: 1.0, hi: 3.0 });
        let s = SymmetricSparseMatrix::from_dense(&DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]));
        assert_eq!(gershgorin_bound(&s), SpectralInterval { lo: 1.0, hi: 3.0 });
    }

    #[test]
    fn zero_matrix_is_widened() {
        let g = gershgorin_bound(&SymmetricSparseMatrix::zeros(4));
        assert_eq!(g, SpectralInterval { lo: 0.0, hi: 0.0 });
        let w = g.widened();
        assert_eq!(w.lo, 0.0);
        assert!(w.hi > 0.0);
    }

    #[test]
    fn negative_lower_bound_is_clamped() {
        let s = SymmetricSparseMatrix::from_dense(&DMatrix::from_row_slice(2, 2, &[1.0, -3.0, -3.0, 10.0]));
        assert_eq!(gershgorin_bound(&s).lo, 0.0);
    }

    #[test]
    fn encloses_dense_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [5, 40, 120] {
            let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let a = &b * b.transpose();
            let s = SymmetricSparseMatrix::from_dense(&a);
            let g = gershgorin_bound(&s);
            for &l in SymmetricEigen::new(s.to_dense()).eigenvalues.iter() {
                assert!(l >= g.lo - 1e-10 && l <= g.hi + 1e-10);
            }
        }
    }
}
