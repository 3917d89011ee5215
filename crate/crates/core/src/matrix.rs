//! Dense complex matrices and state vectors.
//!
//! Everything in this crate operates on qudit registers, so matrix orders are
//! powers of a base dimension `q` and tensor factors are ordered big-endian:
//! site 1 is the most significant factor, i.e. the basis state
//! `|x_1 x_2 ... x_n>` has index `x_1 q^{n-1} + x_2 q^{n-2} + ... + x_n`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::policy::NumericPolicy;

/// Shorthand constructor for a complex scalar.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Index of the basis string obtained by inserting digit `s` at site `p`
/// (1-based) into the length-`sites` basis string with index `i`.
#[inline]
pub(crate) fn insert_digit(i: usize, sites: usize, p: usize, s: usize, q: usize) -> usize {
    debug_assert!(p >= 1 && p <= sites + 1);
    let low_pow = q.pow((sites + 1 - p) as u32);
    let high = i / low_pow;
    let low = i % low_pow;
    (high * q + s) * low_pow + low
}

/// Digit at site `p` of the length-`sites` basis string with index `j`,
/// together with the index of the string with that site removed.
#[inline]
pub(crate) fn extract_digit(j: usize, sites: usize, p: usize, q: usize) -> (usize, usize) {
    debug_assert!(p >= 1 && p <= sites);
    let low_pow = q.pow((sites - p) as u32);
    let digit = (j / low_pow) % q;
    let rest = (j / (low_pow * q)) * low_pow + j % low_pow;
    (digit, rest)
}

/// Dense complex matrix with row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            entries: vec![ZERO; rows * cols],
        }
    }

    /// Identity matrix of the given order.
    pub fn identity(order: usize) -> Self {
        let mut m = Self::zeros(order, order);
        for i in 0..order {
            m.entries[i * order + i] = ONE;
        }
        m
    }

    /// Build from a row-major entry list.
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {}x{} matrix",
                entries.len(),
                rows,
                cols
            )));
        }
        if !entries.iter().all(|e| e.re.is_finite() && e.im.is_finite()) {
            return Err(Error::InvalidState("matrix entry is not finite".into()));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// Build by evaluating `f(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.entries[r * cols + c] = f(r, c);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.entries[r * self.cols + c] = v;
    }

    #[inline]
    pub(crate) fn add_at(&mut self, r: usize, c: usize, v: Complex64) {
        self.entries[r * self.cols + c] += v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.entries[c * self.rows + r] = self.entries[r * self.cols + c].conj();
            }
        }
        out
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = i * rhs.cols;
            for k in 0..self.cols {
                let a = self.entries[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = k * rhs.cols;
                for j in 0..rhs.cols {
                    out.entries[out_row + j] += a * rhs.entries[rhs_row + j];
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product `self * v`.
    pub fn mul_ket(&self, v: &Ket) -> Result<Ket> {
        if self.cols != v.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot apply {}x{} to ket of dim {}",
                self.rows,
                self.cols,
                v.dim()
            )));
        }
        let mut out = vec![ZERO; self.rows];
        for i in 0..self.rows {
            let row = i * self.cols;
            let mut acc = ZERO;
            for j in 0..self.cols {
                acc += self.entries[row + j] * v.amplitudes()[j];
            }
            out[i] = acc;
        }
        Ok(Ket::new(out))
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch("matrix add".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch("matrix sub".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e * s).collect(),
        }
    }

    /// Kronecker product with standard block ordering: the entry block at
    /// `(i, j)` of the result is `self[i, j] * rhs`.
    pub fn kron(&self, rhs: &Self) -> Result<Self> {
        self.kron_capped(rhs, NumericPolicy::default().dim_cap)
    }

    /// Kronecker product with an explicit cap on the resulting order.
    pub fn kron_capped(&self, rhs: &Self, cap: usize) -> Result<Self> {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        let order = rows.max(cols);
        if order > cap {
            return Err(Error::DimensionCapExceeded { order, cap });
        }
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.entries[i * self.cols + j];
                if a == ZERO {
                    continue;
                }
                for r in 0..rhs.rows {
                    let dst = (i * rhs.rows + r) * cols + j * rhs.cols;
                    let src = r * rhs.cols;
                    for c in 0..rhs.cols {
                        out.entries[dst + c] = a * rhs.entries[src + c];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> Result<Complex64> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("trace of non-square matrix".into()));
        }
        Ok((0..self.rows).map(|i| self.entries[i * self.cols + i]).sum())
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise difference `|self - rhs|`; shapes must match.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!(self.rows, rhs.rows, "max_abs_diff row mismatch");
        assert_eq!(self.cols, rhs.cols, "max_abs_diff col mismatch");
        self.entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest deviation from the conjugate transpose.
    pub fn hermiticity_violation(&self) -> f64 {
        assert!(self.is_square(), "hermiticity of non-square matrix");
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let d = (self.get(r, c) - self.get(c, r).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Hermitian part `(self + self^dagger) / 2`.
    pub fn hermitize(&self) -> Self {
        assert!(self.is_square(), "hermitize of non-square matrix");
        let dag = self.dagger();
        let mut out = self.clone();
        for (e, d) in out.entries.iter_mut().zip(&dag.entries) {
            *e = (*e + d) * 0.5;
        }
        out
    }

    /// Flatten to a column-major-independent row-major vector view.
    pub fn vectorize(&self) -> &[Complex64] {
        &self.entries
    }

    /// Column `c` as a ket.
    pub fn column(&self, c: usize) -> Ket {
        Ket::new((0..self.rows).map(|r| self.get(r, c)).collect())
    }
}

/// Trace out site `p` (1-based) of a `q^sites`-order square matrix,
/// producing the `q^{sites-1}`-order reduction. The trace is preserved.
pub fn partial_trace_site(m: &ComplexMatrix, q: usize, sites: usize, p: usize) -> Result<ComplexMatrix> {
    let dim = q.checked_pow(sites as u32).ok_or(Error::DimensionCapExceeded {
        order: usize::MAX,
        cap: NumericPolicy::default().dim_cap,
    })?;
    if m.rows() != dim || m.cols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "expected {dim}x{dim} matrix for {sites} sites with q={q}, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if p < 1 || p > sites {
        return Err(Error::PositionOutOfRange {
            position: p,
            context: format!("partial trace over {sites} sites"),
        });
    }
    let out_dim = dim / q;
    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    for r in 0..dim {
        let (dr, rr) = extract_digit(r, sites, p, q);
        for c in 0..dim {
            let (dc, cc) = extract_digit(c, sites, p, q);
            if dr == dc {
                out.add_at(rr, cc, m.get(r, c));
            }
        }
    }
    Ok(out)
}

/// Complex state vector over a qudit register.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amplitudes: Vec<Complex64>,
}

impl Ket {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        assert!(!amplitudes.is_empty(), "ket must have positive dimension");
        Self { amplitudes }
    }

    /// Computational basis state `|index>` in the given dimension.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index out of range");
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Self { amplitudes }
    }

    /// Basis state of a multi-site register from per-site digits.
    pub fn basis_string(q: usize, digits: &[usize]) -> Self {
        let dim = q.pow(digits.len() as u32);
        let mut index = 0usize;
        for &d in digits {
            assert!(d < q, "digit out of range");
            index = index * q + d;
        }
        Self::basis(dim, index)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0);
        Self {
            amplitudes: vec![ZERO; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Unit-norm copy; errors on (near-)zero vectors.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n < 1e-15 {
            return Err(Error::InvalidState("cannot normalize a zero ket".into()));
        }
        Ok(self.scale(c64(1.0 / n, 0.0)))
    }

    /// Worst deviation from unit norm.
    pub fn unit_norm_violation(&self) -> f64 {
        (self.norm() - 1.0).abs()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a * s).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch("ket add".into()));
        }
        Ok(Self {
            amplitudes: self
                .amplitudes
                .iter()
                .zip(&rhs.amplitudes)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Inner product `<self|rhs>`, conjugate-linear in `self`.
    pub fn inner(&self, rhs: &Self) -> Result<Complex64> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch("inner product".into()));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&rhs.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Tensor product `|self> (x) |rhs>`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let mut amplitudes = Vec::with_capacity(self.dim() * rhs.dim());
        for a in &self.amplitudes {
            for b in &rhs.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Self { amplitudes }
    }

    /// Outer product `|self><rhs|`.
    pub fn outer(&self, rhs: &Self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim(), rhs.dim(), |r, c| {
            self.amplitudes[r] * rhs.amplitudes[c].conj()
        })
    }

    /// The ket as a single-column matrix.
    pub fn as_column(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim(), 1, |r, _| self.amplitudes[r])
    }

    /// The bra `<self|` as a single-row matrix (conjugated entries).
    pub fn as_bra_row(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(1, self.dim(), |_, c| self.amplitudes[c].conj())
    }

    pub fn conj(&self) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a.conj()).collect(),
        }
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!(self.dim(), rhs.dim(), "ket dim mismatch");
        self.amplitudes
            .iter()
            .zip(&rhs.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2);
        let i4 = i2.kron(&i2).unwrap();
        assert_eq!(i4, ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_of_basis_kets_matches_big_endian_order() {
        let zero = Ket::basis(2, 0);
        let one = Ket::basis(2, 1);
        let zo = zero.kron(&one);
        assert_eq!(zo.amplitudes(), Ket::basis(4, 1).amplitudes());
        assert_eq!(
            Ket::basis_string(2, &[0, 1]).amplitudes(),
            zo.amplitudes()
        );
    }

    #[test]
    fn kron_respects_dim_cap() {
        let big = ComplexMatrix::identity(200);
        let err = big.kron_capped(&big, 1 << 14).unwrap_err();
        assert!(matches!(err, Error::DimensionCapExceeded { .. }));
    }

    #[test]
    fn dagger_of_basis_ket_is_bra() {
        let col = Ket::basis(2, 0).as_column();
        let bra = col.dagger();
        assert_eq!(bra.rows(), 1);
        assert_eq!(bra.cols(), 2);
        assert_eq!(bra.get(0, 0), c64(1.0, 0.0));
        assert_eq!(bra.get(0, 1), c64(0.0, 0.0));
    }

    #[test]
    fn dagger_conjugates_scalars() {
        let m = ComplexMatrix::identity(2).scale(c64(0.0, 1.0));
        let d = m.dagger();
        assert_eq!(d.get(0, 0), c64(0.0, -1.0));
        assert_eq!(d.dagger(), m);
    }

    #[test]
    fn partial_trace_of_pure_product_state() {
        // Tracing site 1 of |00><00| leaves |0><0|.
        let v = Ket::basis_string(2, &[0, 0]);
        let rho = v.outer(&v);
        let out = partial_trace_site(&rho, 2, 2, 1).unwrap();
        let expect = Ket::basis(2, 0).outer(&Ket::basis(2, 0));
        assert!(out.max_abs_diff(&expect) == 0.0);
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        // Expanding the definition by hand on (|00> + |11>)/sqrt(2) gives
        // I/2 regardless of which site is traced.
        let s = 1.0 / 2.0f64.sqrt();
        let bell = Ket::basis_string(2, &[0, 0])
            .scale(c64(s, 0.0))
            .add(&Ket::basis_string(2, &[1, 1]).scale(c64(s, 0.0)))
            .unwrap();
        let rho = bell.outer(&bell);
        let expect = ComplexMatrix::identity(2).scale(c64(0.5, 0.0));
        for p in [1, 2] {
            let out = partial_trace_site(&rho, 2, 2, p).unwrap();
            assert!(out.max_abs_diff(&expect) < 1e-15);
        }
    }

    #[test]
    fn partial_trace_rejects_bad_site() {
        let rho = ComplexMatrix::identity(4);
        assert!(partial_trace_site(&rho, 2, 2, 0).is_err());
        assert!(partial_trace_site(&rho, 2, 2, 3).is_err());
        assert!(partial_trace_site(&rho, 2, 3, 1).is_err());
    }

    #[test]
    fn digit_helpers_roundtrip() {
        let q = 3usize;
        for sites in 1..5usize {
            let dim = q.pow(sites as u32);
            for p in 1..=sites {
                for j in 0..dim {
                    let (d, rest) = extract_digit(j, sites, p, q);
                    assert_eq!(insert_digit(rest, sites - 1, p, d, q), j);
                }
            }
        }
    }

    #[test]
    fn from_entries_rejects_non_finite() {
        let err =
            ComplexMatrix::from_entries(1, 1, vec![c64(f64::NAN, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::InvalidState(_)));
    }
}
