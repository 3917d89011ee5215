//! Numeric tolerances and run parameters.
//!
//! All identities checked by this crate are exact in exact arithmetic; the
//! tolerances below exist only to absorb floating-point error. Validity
//! checks report the worst observed violation rather than a bare pass/fail
//! so that marginal cases are visible in reports.

/// Absolute numeric tolerances shared by all validity checks.
#[derive(Debug, Clone, Copy)]
pub struct NumericPolicy {
    /// Entrywise absolute tolerance for equality checks.
    pub eq_tol: f64,
    /// Eigenvalues at or above this floor count as non-negative.
    pub psd_floor: f64,
    /// Spectral components at or below this threshold are truncated.
    pub spectral_cutoff: f64,
    /// Largest matrix order any construction may produce.
    pub dim_cap: usize,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self {
            eq_tol: 1e-10,
            psd_floor: -1e-10,
            spectral_cutoff: 1e-12,
            dim_cap: 1 << 14,
        }
    }
}

/// Parameters for a verification run, shared by the CLI and the test suites.
#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    /// Tolerance applied to Gram-matrix violations.
    pub tolerance: f64,
    /// Maximum number of Kraus words a family enumeration may produce.
    pub enumeration_cap: usize,
    /// Number of random states drawn by recovery verification.
    pub samples: usize,
    /// Seed for all randomized behavior.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            enumeration_cap: 100_000,
            samples: 50,
            seed: 1,
        }
    }
}
