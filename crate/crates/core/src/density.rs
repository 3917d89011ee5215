//! Density matrices over qudit registers.

use crate::eigen::hermitian_eigen;
use crate::error::{Error, Result};
use crate::matrix::{c64, ComplexMatrix, Ket};
use crate::policy::NumericPolicy;

/// Positive semi-definite, unit-trace Hermitian matrix on `(C^q)^{(x) sites}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    q: usize,
    sites: usize,
    matrix: ComplexMatrix,
}

/// Worst violations observed by a density-matrix validity check.
#[derive(Debug, Clone, Copy)]
pub struct DensityCheck {
    pub hermiticity_violation: f64,
    pub min_eigenvalue: f64,
    pub trace_deviation: f64,
}

impl DensityCheck {
    pub fn is_valid(&self, policy: &NumericPolicy) -> bool {
        self.hermiticity_violation <= policy.eq_tol
            && self.min_eigenvalue >= policy.psd_floor
            && self.trace_deviation <= policy.eq_tol
    }
}

impl DensityMatrix {
    /// Wrap a matrix without checking the state invariants (shape only).
    pub fn new(q: usize, sites: usize, matrix: ComplexMatrix) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidState("qudit dimension must be at least 2".into()));
        }
        let dim = q
            .checked_pow(sites as u32)
            .ok_or_else(|| Error::InvalidState("q^sites overflows".into()))?;
        if matrix.rows() != dim || matrix.cols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "density matrix over {sites} sites with q={q} must be {dim}x{dim}, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self { q, sites, matrix })
    }

    /// Wrap a matrix and enforce the full invariants under the given policy.
    pub fn validated(q: usize, sites: usize, matrix: ComplexMatrix, policy: &NumericPolicy) -> Result<Self> {
        let dm = Self::new(q, sites, matrix)?;
        let check = dm.check(policy)?;
        if !check.is_valid(policy) {
            return Err(Error::InvalidState(format!(
                "density invariants violated: hermiticity {:.3e}, min eigenvalue {:.3e}, trace deviation {:.3e}",
                check.hermiticity_violation, check.min_eigenvalue, check.trace_deviation
            )));
        }
        Ok(dm)
    }

    /// Pure state `|psi><psi|`.
    pub fn from_pure(q: usize, sites: usize, psi: &Ket) -> Result<Self> {
        let dm = Self::new(q, sites, psi.outer(psi))?;
        if psi.unit_norm_violation() > 1e-8 {
            return Err(Error::InvalidState(format!(
                "pure state has norm deviation {:.3e}",
                psi.unit_norm_violation()
            )));
        }
        Ok(dm)
    }

    /// The maximally mixed one-qudit state `I_q / q`.
    pub fn maximally_mixed(q: usize) -> Self {
        let matrix = ComplexMatrix::identity(q).scale(c64(1.0 / q as f64, 0.0));
        Self { q, sites: 1, matrix }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Measure the worst violation of each invariant.
    pub fn check(&self, _policy: &NumericPolicy) -> Result<DensityCheck> {
        let hermiticity_violation = self.matrix.hermiticity_violation();
        let trace_deviation = (self.matrix.trace()?.re - 1.0).abs()
            + self.matrix.trace()?.im.abs();
        let (values, _) = hermitian_eigen(&self.matrix)?;
        let min_eigenvalue = values.first().copied().unwrap_or(0.0);
        Ok(DensityCheck {
            hermiticity_violation,
            min_eigenvalue,
            trace_deviation,
        })
    }
}

/// Tensor product of one-qudit density matrices.
#[derive(Debug, Clone)]
pub struct SeparableState {
    factors: Vec<DensityMatrix>,
}

impl SeparableState {
    pub fn new(factors: Vec<DensityMatrix>) -> Result<Self> {
        for (i, f) in factors.iter().enumerate() {
            if f.sites() != 1 {
                return Err(Error::InvalidState(format!(
                    "separable factor {i} spans {} sites; each factor must be one qudit",
                    f.sites()
                )));
            }
        }
        if let Some(q) = factors.first().map(|f| f.q()) {
            if factors.iter().any(|f| f.q() != q) {
                return Err(Error::InvalidState("separable factors disagree on q".into()));
            }
        }
        Ok(Self { factors })
    }

    /// Product of `t` copies of the maximally mixed qudit.
    pub fn maximally_mixed(q: usize, t: usize) -> Self {
        Self {
            factors: (0..t).map(|_| DensityMatrix::maximally_mixed(q)).collect(),
        }
    }

    pub fn factors(&self) -> &[DensityMatrix] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }
}

/// Spectral decomposition of a one-qudit density matrix.
///
/// Returns `(probability, eigenvector)` pairs with probabilities summing to
/// one, orthonormal eigenvectors, and components below the truncation
/// threshold dropped. The pairs reconstruct the input as
/// `sum_i c_i |psi_i><psi_i|`.
pub fn spectral_decompose(sigma: &DensityMatrix) -> Result<Vec<(f64, Ket)>> {
    spectral_decompose_with(sigma, &NumericPolicy::default())
}

pub fn spectral_decompose_with(
    sigma: &DensityMatrix,
    policy: &NumericPolicy,
) -> Result<Vec<(f64, Ket)>> {
    if sigma.sites() != 1 {
        return Err(Error::Precondition(format!(
            "spectral decomposition expects a one-qudit state, got {} sites",
            sigma.sites()
        )));
    }
    let check = sigma.check(policy)?;
    if !check.is_valid(policy) {
        return Err(Error::InvalidState(format!(
            "not a density matrix within tolerance: hermiticity {:.3e}, min eigenvalue {:.3e}, trace deviation {:.3e}",
            check.hermiticity_violation, check.min_eigenvalue, check.trace_deviation
        )));
    }
    let (values, vectors) = hermitian_eigen(sigma.matrix())?;
    let mut pairs = Vec::new();
    // Ascending eigenvalues; emit descending so the dominant component leads.
    for i in (0..values.len()).rev() {
        let lambda = values[i];
        if lambda <= policy.spectral_cutoff {
            continue;
        }
        pairs.push((lambda, vectors.column(i)));
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::c64;

    #[test]
    fn pure_basis_state_decomposes_to_itself() {
        let sigma = DensityMatrix::from_pure(2, 1, &Ket::basis(2, 0)).unwrap();
        let pairs = spectral_decompose(&sigma).unwrap();
        assert_eq!(pairs.len(), 1);
        assert!((pairs[0].0 - 1.0).abs() < 1e-12);
        assert!(pairs[0].1.max_abs_diff(&Ket::basis(2, 0)) < 1e-12);
    }

    #[test]
    fn maximally_mixed_qubit_splits_evenly() {
        let sigma = DensityMatrix::maximally_mixed(2);
        let pairs = spectral_decompose(&sigma).unwrap();
        assert_eq!(pairs.len(), 2);
        for (p, _) in &pairs {
            assert!((p - 0.5).abs() < 1e-12);
        }
        let overlap = pairs[0].1.inner(&pairs[1].1).unwrap().norm();
        assert!(overlap < 1e-12);
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let mut m = ComplexMatrix::identity(2).scale(c64(0.5, 0.0));
        m.set(0, 1, c64(0.4, 0.0));
        let dm = DensityMatrix::new(2, 1, m).unwrap();
        assert!(spectral_decompose(&dm).is_err());
    }

    #[test]
    fn validated_rejects_negative_eigenvalues() {
        let mut m = ComplexMatrix::zeros(2, 2);
        m.set(0, 0, c64(1.5, 0.0));
        m.set(1, 1, c64(-0.5, 0.0));
        let policy = NumericPolicy::default();
        assert!(DensityMatrix::validated(2, 1, m, &policy).is_err());
    }
}
