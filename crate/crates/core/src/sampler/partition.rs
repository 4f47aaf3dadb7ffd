use crate::error::{Error, Result};
use crate::matrix::{quad_form_unchecked, spd_inverse, swap_to_last_order, SymMatrix};

use super::state::GibbsState;

/// Blocks of the state after moving column `column` to the last position.
///
/// `order[..p-1]` lists the original indices of the leading block in the
/// order used by every vector field here; `order[p-1] == column`.
#[derive(Clone, Debug)]
pub struct ColumnPartition {
    pub column: usize,
    pub order: Vec<usize>,
    pub omega11_inv: SymMatrix,
    pub s12: Vec<f64>,
    pub s22: f64,
    pub tau12: Vec<f64>,
    pub lambda12: Vec<f64>,
    pub lambda22: f64,
    /// Current off-diagonal column `ω₁₂`.
    pub beta: Vec<f64>,
    /// Current Schur complement `ω₂₂ − βᵀΩ₁₁⁻¹β`.
    pub gamma: f64,
}

impl ColumnPartition {
    pub fn leading(&self) -> &[usize] {
        &self.order[..self.order.len() - 1]
    }

    /// `ω₂₂` implied by the stored `(β, γ)`.
    pub fn omega22(&self) -> f64 {
        self.gamma + quad_form_unchecked(&self.beta, &self.omega11_inv)
    }

    fn assemble(state: &GibbsState, column: usize, omega11_inv: SymMatrix) -> Self {
        let p = state.dim();
        let order = swap_to_last_order(p, column);
        let lead = &order[..p - 1];
        let beta: Vec<f64> = lead.iter().map(|&j| state.omega.get(j, column)).collect();
        let gamma = state.omega.get(column, column) - quad_form_unchecked(&beta, &omega11_inv);
        ColumnPartition {
            column,
            s12: lead.iter().map(|&j| state.scatter.get(j, column)).collect(),
            s22: state.scatter.get(column, column),
            tau12: lead.iter().map(|&j| state.tau.get(j, column)).collect(),
            lambda12: lead.iter().map(|&j| state.lambda.get(j, column)).collect(),
            lambda22: state.lambda.get(column, column),
            beta,
            gamma,
            omega11_inv,
            order,
        }
    }

    /// Builds the partition from the cached `Σ = Ω⁻¹` using
    /// `Ω₁₁⁻¹ = Σ₁₁ − σ₁₂σ₁₂ᵀ / σ₂₂`, which costs O(p²).
    pub(crate) fn from_cached_inverse(state: &GibbsState, column: usize) -> Result<Self> {
        let p = state.dim();
        let order = swap_to_last_order(p, column);
        let lead = &order[..p - 1];
        let sigma = &state.covariance;
        let sigma22 = sigma.get(column, column);
        if !(sigma22 > 0.0) {
            return Err(Error::LeadingBlockNotPd);
        }
        let sigma12: Vec<f64> = lead.iter().map(|&j| sigma.get(j, column)).collect();
        let mut inv = SymMatrix::zeros(p - 1);
        for (a, &i) in lead.iter().enumerate() {
            for (b, &j) in lead.iter().enumerate().skip(a) {
                inv.set(a, b, sigma.get(i, j) - sigma12[a] * sigma12[b] / sigma22);
            }
        }
        Ok(Self::assemble(state, column, inv))
    }
}

/// Partitions the state around column `column` (0-based), inverting `Ω₁₁`
/// directly.
pub fn make_partition(state: &GibbsState, column: usize) -> Result<ColumnPartition> {
    let p = state.dim();
    if column >= p {
        return Err(Error::IndexOutOfRange { index: column, dim: p });
    }
    let order = swap_to_last_order(p, column);
    let omega11 = state.omega.submatrix(&order[..p - 1]);
    let inv = spd_inverse(&omega11).map_err(|_| Error::LeadingBlockNotPd)?;
    Ok(ColumnPartition::assemble(state, column, inv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::permute_to_last;

    fn state_with_omega(omega: SymMatrix) -> GibbsState {
        let p = omega.dim();
        let tau = SymMatrix::from_fn(p, |i, j| if i == j { 0.0 } else { 1.0 + (i + j) as f64 });
        let lambda = SymMatrix::from_fn(p, |i, j| 0.5 + (i * p + j) as f64);
        let scatter = SymMatrix::from_fn(p, |i, j| if i == j { 3.0 + i as f64 } else { 0.3 });
        GibbsState::new(omega, tau, lambda, scatter, 20, 0.01, 1e-6).unwrap()
    }

    #[test]
    fn identity_partition() {
        let st = state_with_omega(SymMatrix::identity(2));
        let part = make_partition(&st, 0).unwrap();
        assert_eq!(part.beta, vec![0.0]);
        assert_eq!(part.gamma, 1.0);
        assert_eq!(part.omega11_inv, SymMatrix::identity(1));
    }

    #[test]
    fn scalar_schur_complement() {
        let omega = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let part = make_partition(&state_with_omega(omega), 1).unwrap();
        assert_eq!(part.beta, vec![1.0]);
        assert!((part.gamma - (2.0 - 1.0 * 0.5 * 1.0)).abs() < 1e-15);
    }

    #[test]
    fn blocks_follow_swap_permutation() {
        let omega = SymMatrix::from_fn(4, |i, j| if i == j { 3.0 } else { 0.1 * (i + j) as f64 });
        let st = state_with_omega(omega.clone());
        for col in 0..4 {
            let part = make_partition(&st, col).unwrap();
            let permuted = permute_to_last(&omega, col).unwrap();
            for k in 0..3 {
                assert_eq!(part.beta[k], permuted.get(k, 3));
                assert_eq!(part.s12[k], permute_to_last(&st.scatter, col).unwrap().get(k, 3));
                assert_eq!(part.tau12[k], permute_to_last(&st.tau, col).unwrap().get(k, 3));
                assert_eq!(part.lambda12[k], permute_to_last(&st.lambda, col).unwrap().get(k, 3));
            }
            assert_eq!(part.lambda22, st.lambda.get(col, col));
            assert_eq!(part.s22, st.scatter.get(col, col));
            // (β, γ) → ω₂₂ reproduces the diagonal
            assert!((part.omega22() - omega.get(col, col)).abs() < 1e-14);
        }
    }

    #[test]
    fn cached_inverse_agrees_with_direct_inverse() {
        let omega = SymMatrix::from_fn(5, |i, j| if i == j { 2.0 } else { 0.7f64.powi((i as i32 - j as i32).abs()) });
        let st = state_with_omega(omega);
        for col in 0..5 {
            let direct = make_partition(&st, col).unwrap();
            let cached = ColumnPartition::from_cached_inverse(&st, col).unwrap();
            assert!(direct.omega11_inv.max_abs_diff(&cached.omega11_inv) < 1e-12);
            assert!((direct.gamma - cached.gamma).abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_column() {
        let st = state_with_omega(SymMatrix::identity(3));
        assert!(matches!(make_partition(&st, 3), Err(Error::IndexOutOfRange { .. })));
    }
}
