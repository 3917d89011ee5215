//! Structured insertion and deletion operators on qudit registers.
//!
//! An insertion operator splices fixed one-qudit states into a register at a
//! strictly increasing set of positions; a deletion operator is its adjoint,
//! contracting sites against fixed bras. Counting identity factors by `n`,
//! an insertion over positions `P` with `|P| = t` is the `q^{n+t} x q^n`
//! tensor product that places a ket at each position of `P` and the identity
//! elsewhere; the matching deletion is the `q^n x q^{n+t}` product with bras
//! in place of kets.
//!
//! Every operator exists in three forms: a dense build by composing
//! single-position factors, an independent dense build straight from the
//! tensor-factor definition (kept as a test oracle), and a matrix-free
//! application that never materializes the operator.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{extract_digit, insert_digit, ComplexMatrix, Ket};

/// Strictly increasing list of 1-based site positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionSet {
    positions: Vec<usize>,
}

impl PositionSet {
    pub fn new(positions: Vec<usize>) -> Result<Self> {
        for w in positions.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidPositionSet(format!(
                    "positions must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if positions.first().is_some_and(|&p| p == 0) {
            return Err(Error::InvalidPositionSet("positions are 1-based".into()));
        }
        Ok(Self { positions })
    }

    pub fn empty() -> Self {
        Self { positions: Vec::new() }
    }

    pub fn single(p: usize) -> Result<Self> {
        Self::new(vec![p])
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn contains(&self, p: usize) -> bool {
        self.positions.binary_search(&p).is_ok()
    }

    pub fn max(&self) -> Option<usize> {
        self.positions.last().copied()
    }
}

/// Check `P` fits inside `[n + t]` for an operator with `n` identity factors.
fn check_span(posset: &PositionSet, n: usize, what: &str) -> Result<()> {
    let t = posset.len();
    if let Some(max) = posset.max() {
        if max > n + t {
            return Err(Error::PositionOutOfRange {
                position: max,
                context: format!("{what} with {n} identity factors and {t} positions"),
            });
        }
    }
    Ok(())
}

/// Insertion operator descriptor: kets at `positions`, identities elsewhere.
#[derive(Debug, Clone)]
pub struct InsertionOp {
    n: usize,
    posset: PositionSet,
    kets: Vec<Ket>,
}

impl InsertionOp {
    pub fn new(n: usize, posset: PositionSet, kets: Vec<Ket>) -> Result<Self> {
        if kets.len() != posset.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} kets for {} positions",
                kets.len(),
                posset.len()
            )));
        }
        check_span(&posset, n, "insertion")?;
        for (i, k) in kets.iter().enumerate() {
            if k.unit_norm_violation() > 1e-8 {
                return Err(Error::InvalidState(format!(
                    "inserted ket {i} has norm deviation {:.3e}",
                    k.unit_norm_violation()
                )));
            }
        }
        if let Some(d) = kets.first().map(Ket::dim) {
            if kets.iter().any(|k| k.dim() != d) {
                return Err(Error::DimensionMismatch(
                    "inserted kets disagree on qudit dimension".into(),
                ));
            }
        }
        Ok(Self { n, posset, kets })
    }

    /// Identity descriptor on `n` sites (no insertions).
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            posset: PositionSet::empty(),
            kets: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.posset.len()
    }

    pub fn posset(&self) -> &PositionSet {
        &self.posset
    }

    pub fn kets(&self) -> &[Ket] {
        &self.kets
    }

    /// The operator whose matrix is the conjugate transpose of this one.
    pub fn adjoint(&self) -> DeletionOp {
        DeletionOp {
            n: self.n,
            posset: self.posset.clone(),
            bras: self.kets.clone(),
        }
    }
}

/// Deletion operator descriptor: bras at `positions`, identities elsewhere.
/// The bras are stored as kets and conjugated on application.
#[derive(Debug, Clone)]
pub struct DeletionOp {
    n: usize,
    posset: PositionSet,
    bras: Vec<Ket>,
}

impl DeletionOp {
    pub fn new(n: usize, posset: PositionSet, bras: Vec<Ket>) -> Result<Self> {
        let ins = InsertionOp::new(n, posset, bras)?;
        Ok(ins.adjoint())
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            posset: PositionSet::empty(),
            bras: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.posset.len()
    }

    pub fn posset(&self) -> &PositionSet {
        &self.posset
    }

    pub fn bras(&self) -> &[Ket] {
        &self.bras
    }

    pub fn adjoint(&self) -> InsertionOp {
        InsertionOp {
            n: self.n,
            posset: self.posset.clone(),
            kets: self.bras.clone(),
        }
    }
}

/// Dense matrix of the single-position insertion with `m` identity factors:
/// identities on sites `1..p-1`, the ket at `p`, identities on the rest.
/// Shape `q^{m+1} x q^m`.
pub fn single_insertion_matrix(m: usize, p: usize, ket: &Ket, q: usize) -> Result<ComplexMatrix> {
    if p < 1 || p > m + 1 {
        return Err(Error::PositionOutOfRange {
            position: p,
            context: format!("single insertion with {m} identity factors"),
        });
    }
    if ket.dim() != q {
        return Err(Error::DimensionMismatch(format!(
            "inserted ket dim {} != q = {q}",
            ket.dim()
        )));
    }
    let cols = q.pow(m as u32);
    let rows = cols * q;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for x in 0..cols {
        for (s, amp) in ket.amplitudes().iter().enumerate() {
            if *amp != Complex64::new(0.0, 0.0) {
                out.set(insert_digit(x, m, p, s, q), x, *amp);
            }
        }
    }
    Ok(out)
}

/// Dense matrix of the single-position deletion: shape `q^m x q^{m+1}`.
pub fn single_deletion_matrix(m: usize, p: usize, bra: &Ket, q: usize) -> Result<ComplexMatrix> {
    if p < 1 || p > m + 1 {
        return Err(Error::PositionOutOfRange {
            position: p,
            context: format!("single deletion with {m} identity factors"),
        });
    }
    if bra.dim() != q {
        return Err(Error::DimensionMismatch(format!(
            "deleted bra dim {} != q = {q}",
            bra.dim()
        )));
    }
    let rows = q.pow(m as u32);
    let cols = rows * q;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for j in 0..cols {
        let (s, x) = extract_digit(j, m + 1, p, q);
        let amp = bra.amplitudes()[s].conj();
        if amp != Complex64::new(0.0, 0.0) {
            out.set(x, j, amp);
        }
    }
    Ok(out)
}

/// Dense build of a multi-position insertion by composing single-position
/// factors: the position-`p_t` factor acts last on the widest register.
pub fn build_insertion(op: &InsertionOp, q: usize) -> Result<ComplexMatrix> {
    let mut acc = ComplexMatrix::identity(q.pow(op.n as u32));
    // Insert lowest position first; factor k acts on n + k sites.
    for (k, (&p, ket)) in op.posset.positions().iter().zip(&op.kets).enumerate() {
        let factor = single_insertion_matrix(op.n + k, p, ket, q)?;
        acc = factor.mul(&acc)?;
    }
    Ok(acc)
}

/// Dense build of a multi-position deletion by composing single-position
/// factors, mirroring [`build_insertion`].
pub fn build_deletion(op: &DeletionOp, q: usize) -> Result<ComplexMatrix> {
    let mut acc = ComplexMatrix::identity(q.pow(op.n as u32));
    for (k, (&p, bra)) in op.posset.positions().iter().zip(&op.bras).enumerate() {
        let factor = single_deletion_matrix(op.n + k, p, bra, q)?;
        acc = acc.mul(&factor)?;
    }
    Ok(acc)
}

/// Direct dense build of a multi-position insertion as one tensor product of
/// per-site factors. Independent of [`build_insertion`]; used as its oracle.
pub fn build_insertion_direct(op: &InsertionOp, q: usize) -> Result<ComplexMatrix> {
    let total = op.n + op.t();
    let mut acc = ComplexMatrix::identity(1);
    let mut next_ket = 0usize;
    for site in 1..=total {
        if op.posset.contains(site) {
            acc = acc.kron(&op.kets[next_ket].as_column())?;
            next_ket += 1;
        } else {
            acc = acc.kron(&ComplexMatrix::identity(q))?;
        }
    }
    if total == 0 {
        acc = ComplexMatrix::identity(1);
    }
    Ok(acc)
}

/// Direct dense build of a multi-position deletion as one tensor product.
pub fn build_deletion_direct(op: &DeletionOp, q: usize) -> Result<ComplexMatrix> {
    let total = op.n + op.t();
    let mut acc = ComplexMatrix::identity(1);
    let mut next_bra = 0usize;
    for site in 1..=total {
        if op.posset.contains(site) {
            acc = acc.kron(&op.bras[next_bra].as_bra_row())?;
            next_bra += 1;
        } else {
            acc = acc.kron(&ComplexMatrix::identity(q))?;
        }
    }
    if total == 0 {
        acc = ComplexMatrix::identity(1);
    }
    Ok(acc)
}

/// Apply an insertion operator to a ket without materializing the matrix.
/// Output index digits at the operator's positions come from the inserted
/// kets; the remaining digits are the input's.
pub fn apply_insertion(op: &InsertionOp, v: &Ket, q: usize) -> Result<Ket> {
    let n = op.n;
    let t = op.t();
    let in_dim = q.pow(n as u32);
    if v.dim() != in_dim {
        return Err(Error::DimensionMismatch(format!(
            "insertion expects input dim {in_dim}, got {}",
            v.dim()
        )));
    }
    let out_sites = n + t;
    let out_dim = q.pow(out_sites as u32);
    let mut out = Ket::zeros(out_dim);
    let positions = op.posset.positions();
    for y in 0..out_dim {
        let mut amp = Complex64::new(1.0, 0.0);
        let mut x = 0usize;
        let mut rem = y;
        let mut next_pos = 0usize;
        let mut pow = out_dim;
        for site in 1..=out_sites {
            pow /= q;
            let digit = rem / pow;
            rem %= pow;
            if next_pos < t && positions[next_pos] == site {
                amp *= op.kets[next_pos].amplitudes()[digit];
                next_pos += 1;
            } else {
                x = x * q + digit;
            }
        }
        if amp != Complex64::new(0.0, 0.0) {
            out.amplitudes_mut()[y] = amp * v.amplitudes()[x];
        }
    }
    Ok(out)
}

/// Apply a deletion operator to a ket without materializing the matrix.
/// Digits at the operator's positions are contracted against the bras.
pub fn apply_deletion(op: &DeletionOp, v: &Ket, q: usize) -> Result<Ket> {
    let n = op.n;
    let t = op.t();
    let in_sites = n + t;
    let in_dim = q.pow(in_sites as u32);
    if v.dim() != in_dim {
        return Err(Error::DimensionMismatch(format!(
            "deletion expects input dim {in_dim}, got {}",
            v.dim()
        )));
    }
    let out_dim = q.pow(n as u32);
    let mut out = Ket::zeros(out_dim);
    let positions = op.posset.positions();
    for j in 0..in_dim {
        let amp_in = v.amplitudes()[j];
        if amp_in == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut amp = amp_in;
        let mut x = 0usize;
        let mut rem = j;
        let mut next_pos = 0usize;
        let mut pow = in_dim;
        for site in 1..=in_sites {
            pow /= q;
            let digit = rem / pow;
            rem %= pow;
            if next_pos < t && positions[next_pos] == site {
                amp *= op.bras[next_pos].amplitudes()[digit].conj();
                next_pos += 1;
            } else {
                x = x * q + digit;
            }
        }
        out.amplitudes_mut()[x] += amp;
    }
    Ok(out)
}
