//! Block-tridiagonal solve for chain-structured normal equations.
//!
//! With odometry only between consecutive poses, `H` has 6×6 blocks on the
//! diagonal and first off-diagonal, so block elimination costs O(n).

use nalgebra::Cholesky;

use crate::geometry::{Mat6, Vec6};

/// Pivots smaller than this fraction of the block's diagonal scale are
/// treated as rank deficiency.
const PIVOT_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockTridiagonal {
    pub diag: Vec<Mat6>,
    /// `upper[k]` is the block `H[k][k+1]`; the lower block is its transpose.
    pub upper: Vec<Mat6>,
}

impl BlockTridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            diag: vec![Mat6::zeros(); n],
            upper: vec![Mat6::zeros(); n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Solves `H x = b`; `None` if `H` is not positive definite.
    pub fn solve(&self, b: &[Vec6]) -> Option<Vec<Vec6>> {
        let n = self.len();
        assert_eq!(b.len(), n);
        let mut factors: Vec<Cholesky<f64, nalgebra::Const<6>>> = Vec::with_capacity(n);
        let mut y: Vec<Vec6> = Vec::with_capacity(n);
        for k in 0..n {
            let mut s = self.diag[k];
            let mut rhs = b[k];
            if k > 0 {
                let prev = &factors[k - 1];
                let bt = self.upper[k - 1].transpose();
                // S_k = D_k − Bᵀ S⁻¹ B, y_k = b_k − Bᵀ S⁻¹ y_{k−1}
                s -= bt * prev.solve(&self.upper[k - 1]);
                rhs -= bt * prev.solve(&y[k - 1]);
            }
            let scale = self.diag[k].diagonal().amax().max(f64::MIN_POSITIVE);
            let chol = Cholesky::new(s)?;
            let min_pivot = chol
                .l_dirty()
                .diagonal()
                .iter()
                .fold(f64::INFINITY, |m, v| m.min(v * v));
            if min_pivot < PIVOT_RATIO * scale {
                return None;
            }
            factors.push(chol);
            y.push(rhs);
        }
        let mut x = vec![Vec6::zeros(); n];
        for k in (0..n).rev() {
            let mut rhs = y[k];
            if k + 1 < n {
                rhs -= self.upper[k] * x[k + 1];
            }
            x[k] = factors[k].solve(&rhs);
        }
        Some(x)
    }
}
