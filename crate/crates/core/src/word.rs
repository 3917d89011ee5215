//! Symbolic words in the insertion/deletion letters and their rewriting.
//!
//! A [`Letter`] is a single-position insertion `I` or deletion `D` carrying
//! its position `p`, its identity-factor count `n`, and the one-qudit vector
//! it inserts or contracts against. A [`KrausWord`] is a scalar times an
//! ordered product of letters, stored in matrix order: the first list element
//! is the leftmost matrix factor, so the *last* element acts first on a state.
//!
//! Four local rewrites preserve the word's dense materialization exactly:
//!
//! - [`KrausWord::swap_ii`] / [`KrausWord::swap_dd`] reorder two adjacent
//!   letters of the same kind, shifting one position by one;
//! - [`KrausWord::contract_di`] moves a deletion right past an insertion, or
//!   annihilates the pair into the scalar inner product when they collide on
//!   the same position;
//! - [`KrausWord::swap_id`] moves a deletion left past an insertion.
//!
//! [`KrausWord::normalize`] drives these rules to the canonical shape
//! `scalar * (insertion block) * (deletion block)` with strictly increasing
//! positions inside each block; [`regroup_as_pair`] factors a canonical word
//! back into an adjoint pair of insertion-then-deletion Kraus words.
//!
//! Words have a textual debug rendering used in CLI reports, e.g.
//! `(1+0i) D[p1,n1] I[p2,n1]`: the scalar followed by the letters
//! left-to-right in application order (leftmost rendered letter acts first).
//! The grammar is `WORD := '(' SCALAR ')' (' ' LETTER)*` with
//! `LETTER := ('I' | 'D') '[p' INT ',n' INT ']'`; it is a diagnostic surface,
//! not a stability-guaranteed interface.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kraus::{
    single_deletion_matrix, single_insertion_matrix, DeletionOp, InsertionOp, PositionSet,
};
use crate::matrix::{c64, ComplexMatrix, Ket};
use crate::policy::NumericPolicy;

/// Which operator a letter stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LetterKind {
    Insertion,
    Deletion,
}

/// Single-position insertion or deletion letter.
#[derive(Debug, Clone, PartialEq)]
pub struct Letter {
    kind: LetterKind,
    /// Number of identity tensor factors.
    n: usize,
    /// 1-based position, in `[n + 1]`.
    p: usize,
    /// The inserted ket, or the bra vector stored as a ket.
    vector: Ket,
}

impl Letter {
    pub fn insertion(n: usize, p: usize, vector: Ket) -> Result<Self> {
        Self::new(LetterKind::Insertion, n, p, vector)
    }

    pub fn deletion(n: usize, p: usize, vector: Ket) -> Result<Self> {
        Self::new(LetterKind::Deletion, n, p, vector)
    }

    fn new(kind: LetterKind, n: usize, p: usize, vector: Ket) -> Result<Self> {
        if p < 1 || p > n + 1 {
            return Err(Error::PositionOutOfRange {
                position: p,
                context: format!("letter with {n} identity factors"),
            });
        }
        if vector.unit_norm_violation() > 1e-8 {
            return Err(Error::InvalidState(format!(
                "letter vector has norm deviation {:.3e}",
                vector.unit_norm_violation()
            )));
        }
        Ok(Self { kind, n, p, vector })
    }

    pub fn kind(&self) -> LetterKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn vector(&self) -> &Ket {
        &self.vector
    }

    /// Register exponent the letter consumes: `n` for insertions, `n + 1`
    /// for deletions.
    pub fn input_exp(&self) -> usize {
        match self.kind {
            LetterKind::Insertion => self.n,
            LetterKind::Deletion => self.n + 1,
        }
    }

    /// Register exponent the letter produces.
    pub fn output_exp(&self) -> usize {
        match self.kind {
            LetterKind::Insertion => self.n + 1,
            LetterKind::Deletion => self.n,
        }
    }

    /// Dense matrix of the letter.
    pub fn materialize(&self, q: usize) -> Result<ComplexMatrix> {
        match self.kind {
            LetterKind::Insertion => single_insertion_matrix(self.n, self.p, &self.vector, q),
            LetterKind::Deletion => single_deletion_matrix(self.n, self.p, &self.vector, q),
        }
    }

    /// The adjoint letter: same position and superscript, opposite kind.
    pub fn adjoint(&self) -> Self {
        Self {
            kind: match self.kind {
                LetterKind::Insertion => LetterKind::Deletion,
                LetterKind::Deletion => LetterKind::Insertion,
            },
            n: self.n,
            p: self.p,
            vector: self.vector.clone(),
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            LetterKind::Insertion => 'I',
            LetterKind::Deletion => 'D',
        };
        write!(f, "{k}[p{},n{}]", self.p, self.n)
    }
}

/// Statistics of a normalization run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RewriteTrace {
    /// Same-position deletion-insertion pairs annihilated into scalars.
    pub contractions: usize,
    /// Deletion letters commuted right past insertion letters.
    pub commutations: usize,
    /// Same-kind adjacent swaps spent sorting the blocks.
    pub block_swaps: usize,
}

/// Scalar times an ordered product of letters, stored in matrix order.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausWord {
    scalar: Complex64,
    letters: Vec<Letter>,
    /// Register exponent consumed by the word (sites of the input space).
    sites_in: usize,
    /// Register exponent produced by the word.
    sites_out: usize,
}

impl KrausWord {
    /// Validate the letter chain and compute the endpoint exponents.
    pub fn new(scalar: Complex64, letters: Vec<Letter>, sites_in: usize) -> Result<Self> {
        let mut exp = sites_in;
        for (i, letter) in letters.iter().enumerate().rev() {
            if letter.input_exp() != exp {
                return Err(Error::InconsistentWord(format!(
                    "letter {i} ({letter}) consumes exponent {}, but the chain provides {exp}",
                    letter.input_exp()
                )));
            }
            exp = letter.output_exp();
        }
        if let Some(d) = letters.first().map(|l| l.vector.dim()) {
            if letters.iter().any(|l| l.vector.dim() != d) {
                return Err(Error::InconsistentWord(
                    "letters disagree on qudit dimension".into(),
                ));
            }
        }
        Ok(Self {
            scalar,
            letters,
            sites_in,
            sites_out: exp,
        })
    }

    /// The empty word `scalar * identity` on a register of `sites` qudits.
    pub fn empty(scalar: Complex64, sites: usize) -> Self {
        Self {
            scalar,
            letters: Vec::new(),
            sites_in: sites,
            sites_out: sites,
        }
    }

    pub fn scalar(&self) -> Complex64 {
        self.scalar
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn sites_in(&self) -> usize {
        self.sites_in
    }

    pub fn sites_out(&self) -> usize {
        self.sites_out
    }

    /// Multiply the scalar prefactor.
    pub fn scaled(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.scalar *= s;
        out
    }

    /// Matrix product `self * rhs` (so `rhs` acts first).
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        if self.sites_in != rhs.sites_out {
            return Err(Error::InconsistentWord(format!(
                "cannot compose: left word consumes exponent {}, right word produces {}",
                self.sites_in, rhs.sites_out
            )));
        }
        let mut letters = self.letters.clone();
        letters.extend(rhs.letters.iter().cloned());
        KrausWord::new(self.scalar * rhs.scalar, letters, rhs.sites_in)
    }

    /// Adjoint word: reversed letters with kinds flipped, scalar conjugated.
    pub fn adjoint(&self) -> Self {
        let letters = self.letters.iter().rev().map(Letter::adjoint).collect();
        Self {
            scalar: self.scalar.conj(),
            letters,
            sites_in: self.sites_out,
            sites_out: self.sites_in,
        }
    }

    /// Dense matrix of the word: the scalar times the product of the letter
    /// matrices, of shape `q^sites_out x q^sites_in`.
    pub fn materialize(&self, q: usize) -> Result<ComplexMatrix> {
        self.materialize_capped(q, NumericPolicy::default().dim_cap)
    }

    pub fn materialize_capped(&self, q: usize, cap: usize) -> Result<ComplexMatrix> {
        let max_exp = self
            .letters
            .iter()
            .map(Letter::output_exp)
            .chain([self.sites_in, self.sites_out])
            .max()
            .unwrap_or(self.sites_in);
        let order = q
            .checked_pow(max_exp as u32)
            .ok_or(Error::DimensionCapExceeded { order: usize::MAX, cap })?;
        if order > cap {
            return Err(Error::DimensionCapExceeded { order, cap });
        }
        let mut acc = ComplexMatrix::identity(q.pow(self.sites_in as u32));
        for letter in self.letters.iter().rev() {
            acc = letter.materialize(q)?.mul(&acc)?;
        }
        Ok(acc.scale(self.scalar))
    }

    /// Apply the word to a ket without materializing any matrices.
    pub fn apply(&self, v: &Ket, q: usize) -> Result<Ket> {
        if v.dim() != q.pow(self.sites_in as u32) {
            return Err(Error::DimensionMismatch(format!(
                "word consumes dim {}, got ket of dim {}",
                q.pow(self.sites_in as u32),
                v.dim()
            )));
        }
        let mut cur = v.clone();
        for letter in self.letters.iter().rev() {
            cur = match letter.kind {
                LetterKind::Insertion => crate::kraus::apply_insertion(
                    &InsertionOp::new(
                        letter.n,
                        PositionSet::single(letter.p)?,
                        vec![letter.vector.clone()],
                    )?,
                    &cur,
                    q,
                )?,
                LetterKind::Deletion => crate::kraus::apply_deletion(
                    &DeletionOp::new(
                        letter.n,
                        PositionSet::single(letter.p)?,
                        vec![letter.vector.clone()],
                    )?,
                    &cur,
                    q,
                )?,
            };
        }
        Ok(cur.scale(self.scalar))
    }

    fn pair(&self, i: usize) -> Result<(&Letter, &Letter)> {
        if i + 1 >= self.letters.len() {
            return Err(Error::RuleNotApplicable {
                index: i,
                reason: "no adjacent pair at this index".into(),
            });
        }
        Ok((&self.letters[i], &self.letters[i + 1]))
    }

    fn with_pair_replaced(&self, i: usize, a: Letter, b: Letter) -> Result<Self> {
        let mut letters = self.letters.clone();
        letters[i] = a;
        letters[i + 1] = b;
        KrausWord::new(self.scalar, letters, self.sites_in)
    }

    /// Reorder two adjacent insertion letters. The applicable orientation of
    /// the reordering identity is detected from the positions; applying the
    /// rewrite twice returns the original word.
    pub fn swap_ii(&self, i: usize) -> Result<Self> {
        let (outer, inner) = self.pair(i)?;
        if outer.kind != LetterKind::Insertion || inner.kind != LetterKind::Insertion {
            return Err(Error::RuleNotApplicable {
                index: i,
                reason: format!("expected two insertions, got {outer} {inner}"),
            });
        }
        debug_assert_eq!(outer.n, inner.n + 1);
        let (new_outer, new_inner) = if outer.p <= inner.p {
            // Forward orientation: positions (a, b) with a <= b become
            // (b + 1, a).
            (
                Letter::insertion(outer.n, inner.p + 1, inner.vector.clone())?,
                Letter::insertion(inner.n, outer.p, outer.vector.clone())?,
            )
        } else {
            // Mirror orientation: positions (a, b) with a > b become
            // (b, a - 1).
            (
                Letter::insertion(outer.n, inner.p, inner.vector.clone())?,
                Letter::insertion(inner.n, outer.p - 1, outer.vector.clone())?,
            )
        };
        self.with_pair_replaced(i, new_outer, new_inner)
    }

    /// Reorder two adjacent deletion letters; dual of [`Self::swap_ii`].
    pub fn swap_dd(&self, i: usize) -> Result<Self> {
        let (outer, inner) = self.pair(i)?;
        if outer.kind != LetterKind::Deletion || inner.kind != LetterKind::Deletion {
            return Err(Error::RuleNotApplicable {
                index: i,
                reason: format!("expected two deletions, got {outer} {inner}"),
            });
        }
        debug_assert_eq!(inner.n, outer.n + 1);
        let (new_outer, new_inner) = if inner.p <= outer.p {
            // Forward orientation: positions (a, b) with b <= a become
            // (b, a + 1).
            (
                Letter::deletion(outer.n, inner.p, inner.vector.clone())?,
                Letter::deletion(inner.n, outer.p + 1, outer.vector.clone())?,
            )
        } else {
            (
                Letter::deletion(outer.n, inner.p - 1, inner.vector.clone())?,
                Letter::deletion(inner.n, outer.p, outer.vector.clone())?,
            )
        };
        self.with_pair_replaced(i, new_outer, new_inner)
    }

    /// Rewrite a deletion acting after an insertion (matrix pattern `D I`).
    /// Distinct positions commute with a shift; equal positions annihilate
    /// the pair into the scalar inner product of the two vectors.
    pub fn contract_di(&self, i: usize) -> Result<Self> {
        let (del, ins) = self.pair(i)?;
        if del.kind != LetterKind::Deletion || ins.kind != LetterKind::Insertion {
            return Err(Error::RuleNotApplicable {
                index: i,
                reason: format!("expected deletion then insertion, got {del} {ins}"),
            });
        }
        debug_assert_eq!(del.n, ins.n);
        let n = del.n;
        let (p_ins, p_del) = (ins.p, del.p);
        if p_ins == p_del {
            let overlap = del.vector.inner(&ins.vector)?;
            let mut letters = self.letters.clone();
            letters.drain(i..=i + 1);
            return KrausWord::new(self.scalar * overlap, letters, self.sites_in);
        }
        let (new_ins, new_del) = if p_ins < p_del {
            (
                Letter::insertion(n - 1, p_ins, ins.vector.clone())?,
                Letter::deletion(n - 1, p_del - 1, del.vector.clone())?,
            )
        } else {
            (
                Letter::insertion(n - 1, p_ins - 1, ins.vector.clone())?,
                Letter::deletion(n - 1, p_del, del.vector.clone())?,
            )
        };
        self.with_pair_replaced(i, new_ins, new_del)
    }

    /// Rewrite an insertion acting after a deletion (matrix pattern `I D`)
    /// into the `D I` form. At equal positions both orientations are valid
    /// and materialization-equal; the first is chosen for determinism.
    pub fn swap_id(&self, i: usize) -> Result<Self> {
        let (ins, del) = self.pair(i)?;
        if ins.kind != LetterKind::Insertion || del.kind != LetterKind::Deletion {
            return Err(Error::RuleNotApplicable {
                index: i,
                reason: format!("expected insertion then deletion, got {ins} {del}"),
            });
        }
        debug_assert_eq!(ins.n, del.n);
        let n = ins.n;
        let (new_del, new_ins) = if ins.p <= del.p {
            (
                Letter::deletion(n + 1, del.p + 1, del.vector.clone())?,
                Letter::insertion(n + 1, ins.p, ins.vector.clone())?,
            )
        } else {
            (
                Letter::deletion(n + 1, del.p, del.vector.clone())?,
                Letter::insertion(n + 1, ins.p + 1, ins.vector.clone())?,
            )
        };
        self.with_pair_replaced(i, new_del, new_ins)
    }

    /// Drive the word to its canonical form: eliminate every deletion that
    /// acts after an insertion (leftmost pattern first), then sort each
    /// remaining block by position.
    ///
    /// Termination: each contraction shortens the word, each commutation
    /// strictly reduces the number of deletion-before-insertion inversions,
    /// and each block swap strictly increases the bounded sum of positions
    /// within its block.
    pub fn normalize(&self) -> (CanonicalForm, RewriteTrace) {
        let mut trace = RewriteTrace::default();
        let mut word = self.clone();

        // Phase 1: no deletion may remain to the left of an insertion.
        'elim: loop {
            for i in 0..word.letters.len().saturating_sub(1) {
                if word.letters[i].kind == LetterKind::Deletion
                    && word.letters[i + 1].kind == LetterKind::Insertion
                {
                    let same = word.letters[i].p == word.letters[i + 1].p;
                    word = word.contract_di(i).expect("pattern checked");
                    if same {
                        trace.contractions += 1;
                    } else {
                        trace.commutations += 1;
                    }
                    continue 'elim;
                }
            }
            break;
        }

        let split = word
            .letters
            .iter()
            .position(|l| l.kind == LetterKind::Deletion)
            .unwrap_or(word.letters.len());
        debug_assert!(word.letters[split..]
            .iter()
            .all(|l| l.kind == LetterKind::Deletion));

        // Phase 2: insertion block positions strictly decrease left-to-right.
        'sort_i: loop {
            for i in 0..split.saturating_sub(1) {
                if word.letters[i].p <= word.letters[i + 1].p {
                    word = word.swap_ii(i).expect("pattern checked");
                    trace.block_swaps += 1;
                    continue 'sort_i;
                }
            }
            break;
        }

        // Phase 3: deletion block positions strictly increase left-to-right.
        'sort_d: loop {
            for i in split..word.letters.len().saturating_sub(1) {
                if word.letters[i].p >= word.letters[i + 1].p {
                    word = word.swap_dd(i).expect("pattern checked");
                    trace.block_swaps += 1;
                    continue 'sort_d;
                }
            }
            break;
        }

        let canonical = CanonicalForm::from_sorted_word(&word, split);
        (canonical, trace)
    }
}

impl fmt::Display for KrausWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.scalar)?;
        for letter in self.letters.iter().rev() {
            write!(f, " {letter}")?;
        }
        Ok(())
    }
}

/// Decompose a multi-position insertion into single-position letters: the
/// lowest position acts first on the narrowest register.
pub fn decompose_multi(ins: &InsertionOp) -> KrausWord {
    let t = ins.t();
    let letters: Vec<Letter> = ins
        .posset()
        .positions()
        .iter()
        .zip(ins.kets())
        .enumerate()
        .rev()
        .map(|(k, (&p, ket))| {
            Letter::insertion(ins.n() + k, p, ket.clone()).expect("validated by the operator")
        })
        .collect();
    debug_assert_eq!(letters.len(), t);
    KrausWord::new(c64(1.0, 0.0), letters, ins.n()).expect("letters chain by construction")
}

/// Decompose a multi-position deletion into single-position letters: the
/// highest position acts first on the widest register.
pub fn decompose_multi_deletion(del: &DeletionOp) -> KrausWord {
    let letters: Vec<Letter> = del
        .posset()
        .positions()
        .iter()
        .zip(del.bras())
        .enumerate()
        .map(|(k, (&p, bra))| {
            Letter::deletion(del.n() + k, p, bra.clone()).expect("validated by the operator")
        })
        .collect();
    KrausWord::new(c64(1.0, 0.0), letters, del.n() + del.t())
        .expect("letters chain by construction")
}

/// Canonical word shape: `scalar * insertion block * deletion block` with
/// strictly increasing positions in each block.
#[derive(Debug, Clone)]
pub struct CanonicalForm {
    scalar: Complex64,
    insertion_block: InsertionOp,
    deletion_block: DeletionOp,
}

impl CanonicalForm {
    fn from_sorted_word(word: &KrausWord, split: usize) -> Self {
        let ins_letters = &word.letters[..split];
        let del_letters = &word.letters[split..];

        // Innermost insertion letter carries the block's identity count.
        let n_ins = ins_letters
            .last()
            .map(Letter::input_exp)
            .unwrap_or(word.sites_in - del_letters.len());
        let mut positions = Vec::with_capacity(ins_letters.len());
        let mut kets = Vec::with_capacity(ins_letters.len());
        for letter in ins_letters.iter().rev() {
            positions.push(letter.p);
            kets.push(letter.vector.clone());
        }
        let insertion_block = InsertionOp::new(
            n_ins,
            PositionSet::new(positions).expect("sorted by normalization"),
            kets,
        )
        .expect("block letters are valid");

        let n_del = del_letters
            .first()
            .map(Letter::output_exp)
            .unwrap_or(word.sites_in);
        let positions: Vec<usize> = del_letters.iter().map(|l| l.p).collect();
        let bras: Vec<Ket> = del_letters.iter().map(|l| l.vector.clone()).collect();
        let deletion_block = DeletionOp::new(
            n_del,
            PositionSet::new(positions).expect("sorted by normalization"),
            bras,
        )
        .expect("block letters are valid");

        debug_assert_eq!(n_ins, n_del, "blocks must meet at the same register");
        Self {
            scalar: word.scalar,
            insertion_block,
            deletion_block,
        }
    }

    pub fn scalar(&self) -> Complex64 {
        self.scalar
    }

    pub fn insertion_block(&self) -> &InsertionOp {
        &self.insertion_block
    }

    pub fn deletion_block(&self) -> &DeletionOp {
        &self.deletion_block
    }

    pub fn sites_in(&self) -> usize {
        self.deletion_block.n() + self.deletion_block.t()
    }

    pub fn sites_out(&self) -> usize {
        self.insertion_block.n() + self.insertion_block.t()
    }

    /// Expand back into a word of single-position letters.
    pub fn to_word(&self) -> KrausWord {
        let ins = decompose_multi(&self.insertion_block);
        let del = decompose_multi_deletion(&self.deletion_block);
        ins.compose(&del)
            .expect("blocks meet at the same register")
            .scaled(self.scalar)
    }

    pub fn materialize(&self, q: usize) -> Result<ComplexMatrix> {
        self.to_word().materialize(q)
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_word())
    }
}

/// Factor a canonical word with `t1 + t2` insertion letters and `t1 + t2`
/// deletion letters into Kraus words `(a, b)`, each of insertion-then-deletion
/// shape with `t1` insertions and `t2` deletions, such that
/// `adjoint(a) * b` materializes equal to the input. This runs the reordering
/// rules from the canonical form back toward a four-block pattern.
pub fn regroup_as_pair(
    canon: &CanonicalForm,
    t1: usize,
    t2: usize,
) -> Result<(KrausWord, KrausWord)> {
    let m = t1 + t2;
    if canon.insertion_block.t() != m || canon.deletion_block.t() != m {
        return Err(Error::Precondition(format!(
            "regroup target ({t1},{t2}) needs {m} letters per block, found {} insertions and {} deletions",
            canon.insertion_block.t(),
            canon.deletion_block.t()
        )));
    }
    let mut word = canon.to_word();
    // Move the k-th deletion letter leftward past t1 insertion letters,
    // assembling the matrix pattern I^t2 D^t1 I^t1 D^t2.
    for k in 0..t1 {
        let from = m + k;
        let to = t2 + k;
        for i in (to..from).rev() {
            word = word.swap_id(i)?;
        }
    }
    let boundary_exp = word
        .letters
        .get(t2 + t1)
        .map(Letter::output_exp)
        .unwrap_or(word.sites_in);
    let prefix = KrausWord::new(c64(1.0, 0.0), word.letters[..t2 + t1].to_vec(), boundary_exp)?;
    let suffix = KrausWord::new(word.scalar, word.letters[t2 + t1..].to_vec(), word.sites_in)?;

    // Canonicalize both factors; neither contains a deletion-before-insertion
    // pattern, so this only sorts the blocks.
    let a = prefix.adjoint().normalize().0.to_word();
    let b = suffix.normalize().0.to_word();
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kq(amps: &[(f64, f64)]) -> Ket {
        Ket::new(amps.iter().map(|&(re, im)| c64(re, im)).collect())
            .normalized()
            .unwrap()
    }

    fn psi() -> Ket {
        kq(&[(0.6, 0.0), (0.8, 0.0)])
    }

    fn phi() -> Ket {
        kq(&[(1.0, 0.5), (-0.3, 0.2)])
    }

    #[test]
    fn word_chain_validation_rejects_gaps() {
        let bad = KrausWord::new(
            c64(1.0, 0.0),
            vec![
                Letter::insertion(3, 1, psi()).unwrap(),
                Letter::insertion(1, 1, psi()).unwrap(),
            ],
            1,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn empty_word_materializes_to_scaled_identity() {
        let w = KrausWord::empty(c64(0.0, 2.0), 2);
        let m = w.materialize(2).unwrap();
        let expect = ComplexMatrix::identity(4).scale(c64(0.0, 2.0));
        assert!(m.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn single_letter_word_matches_letter_matrix() {
        let letter = Letter::insertion(2, 2, psi()).unwrap();
        let w = KrausWord::new(c64(1.0, 0.0), vec![letter.clone()], 2).unwrap();
        assert!(
            w.materialize(2)
                .unwrap()
                .max_abs_diff(&letter.materialize(2).unwrap())
                < 1e-15
        );
    }

    #[test]
    fn adjoint_of_insertion_letter_is_matching_deletion() {
        let letter = Letter::insertion(1, 2, phi()).unwrap();
        let w = KrausWord::new(c64(1.0, 0.0), vec![letter.clone()], 1).unwrap();
        let adj = w.adjoint();
        assert_eq!(adj.letters().len(), 1);
        assert_eq!(adj.letters()[0].kind(), LetterKind::Deletion);
        assert_eq!(adj.letters()[0].p(), letter.p());
        assert_eq!(adj.letters()[0].n(), letter.n());
        let dense = w.materialize(2).unwrap().dagger();
        assert!(adj.materialize(2).unwrap().max_abs_diff(&dense) < 1e-15);
    }

    #[test]
    fn adjoint_is_an_involution() {
        let w = KrausWord::new(
            c64(0.3, -0.4),
            vec![
                Letter::deletion(1, 1, phi()).unwrap(),
                Letter::insertion(1, 2, psi()).unwrap(),
            ],
            1,
        )
        .unwrap();
        assert_eq!(w.adjoint().adjoint(), w);
    }

    #[test]
    fn word_apply_matches_dense_action() {
        let w = KrausWord::new(
            c64(0.5, 0.25),
            vec![
                Letter::deletion(1, 1, phi()).unwrap(),
                Letter::insertion(1, 2, psi()).unwrap(),
            ],
            1,
        )
        .unwrap();
        let dense = w.materialize(2).unwrap();
        for x in 0..2usize {
            let v = Ket::basis(2, x);
            let fast = w.apply(&v, 2).unwrap();
            let slow = dense.mul_ket(&v).unwrap();
            assert!(fast.max_abs_diff(&slow) < 1e-15);
        }
    }

    #[test]
    fn decompose_single_position_is_identity_transformation() {
        let op = InsertionOp::new(2, PositionSet::single(2).unwrap(), vec![psi()]).unwrap();
        let w = decompose_multi(&op);
        assert_eq!(w.letters().len(), 1);
        assert_eq!(w.letters()[0].p(), 2);
        assert_eq!(w.letters()[0].n(), 2);
    }

    #[test]
    fn decompose_multi_orders_letters_as_prescribed() {
        // Positions {2, 3, 5} over two identity factors: the letter list in
        // matrix order carries positions 5, 3, 2 with descending superscripts.
        let op = InsertionOp::new(
            2,
            PositionSet::new(vec![2, 3, 5]).unwrap(),
            vec![psi(), phi(), psi()],
        )
        .unwrap();
        let w = decompose_multi(&op);
        let seen: Vec<(usize, usize)> = w.letters().iter().map(|l| (l.p(), l.n())).collect();
        assert_eq!(seen, vec![(5, 4), (3, 3), (2, 2)]);

        let dense = crate::kraus::build_insertion_direct(&op, 2).unwrap();
        assert!(w.materialize(2).unwrap().max_abs_diff(&dense) < 1e-14);
    }

    #[test]
    fn decompose_multi_deletion_orders_letters_as_prescribed() {
        let op = DeletionOp::new(
            2,
            PositionSet::new(vec![1, 3]).unwrap(),
            vec![psi(), phi()],
        )
        .unwrap();
        let w = decompose_multi_deletion(&op);
        let seen: Vec<(usize, usize)> = w.letters().iter().map(|l| (l.p(), l.n())).collect();
        assert_eq!(seen, vec![(1, 2), (3, 3)]);

        let dense = crate::kraus::build_deletion_direct(&op, 2).unwrap();
        assert!(w.materialize(2).unwrap().max_abs_diff(&dense) < 1e-14);
    }

    #[test]
    fn worked_example_word_materializes_to_tensor_chain() {
        // Insertions at {2, 3, 5} over two identities composed with deletions
        // at {1, 3}: the product is
        // <phi1| (x) I (x) |psi1> (x) |psi2> (x) <phi2| (x) I (x) |psi3>,
        // a 32 x 16 matrix for qubits.
        let psi1 = psi();
        let psi2 = kq(&[(0.3, 0.1), (0.2, -0.9)]);
        let psi3 = phi();
        let phi1 = kq(&[(0.8, 0.0), (0.0, 0.6)]);
        let phi2 = kq(&[(0.5, -0.5), (0.5, 0.5)]);

        let ins = InsertionOp::new(
            2,
            PositionSet::new(vec![2, 3, 5]).unwrap(),
            vec![psi1.clone(), psi2.clone(), psi3.clone()],
        )
        .unwrap();
        let del = DeletionOp::new(
            2,
            PositionSet::new(vec![1, 3]).unwrap(),
            vec![phi1.clone(), phi2.clone()],
        )
        .unwrap();
        let word = decompose_multi(&ins)
            .compose(&decompose_multi_deletion(&del))
            .unwrap();
        let m = word.materialize(2).unwrap();
        assert_eq!(m.rows(), 32);
        assert_eq!(m.cols(), 16);

        let i2 = ComplexMatrix::identity(2);
        let expect = phi1
            .as_bra_row()
            .kron(&i2)
            .unwrap()
            .kron(&psi1.as_column())
            .unwrap()
            .kron(&psi2.as_column())
            .unwrap()
            .kron(&phi2.as_bra_row())
            .unwrap()
            .kron(&i2)
            .unwrap()
            .kron(&psi3.as_column())
            .unwrap();
        assert!(m.max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn swap_ii_shifts_positions_and_preserves_materialization() {
        // Two stacked front insertions: positions (1, 1) become (2, 1) with
        // the vectors exchanged.
        let w = KrausWord::new(
            c64(1.0, 0.0),
            vec![
                Letter::insertion(1, 1, psi()).unwrap(),
                Letter::insertion(0, 1, phi()).unwrap(),
            ],
            0,
        )
        .unwrap();
        let swapped = w.swap_ii(0).unwrap();
        let seen: Vec<(usize, usize)> = swapped.letters().iter().map(|l| (l.p(), l.n())).collect();
        assert_eq!(seen, vec![(2, 1), (1, 0)]);
        assert_eq!(swapped.letters()[0].vector(), &phi());
        assert_eq!(swapped.letters()[1].vector(), &psi());
        assert!(
            swapped
                .materialize(2)
                .unwrap()
                .max_abs_diff(&w.materialize(2).unwrap())
                < 1e-15
        );
        // Applying the rewrite again returns the original word.
        assert_eq!(swapped.swap_ii(0).unwrap(), w);
    }

    #[test]
    fn swap_dd_mirrors_swap_ii() {
        let w = KrausWord::new(
            c64(1.0, 0.0),
            vec![
                Letter::deletion(1, 2, psi()).unwrap(),
                Letter::deletion(2, 1, phi()).unwrap(),
            ],
            3,
        )
        .unwrap();
        let swapped = w.swap_dd(0).unwrap();
        assert!(
            swapped
                .materialize(2)
                .unwrap()
                .max_abs_diff(&w.materialize(2).unwrap())
                < 1e-15
        );
        assert_eq!(swapped.swap_dd(0).unwrap(), w);
    }

    #[test]
    fn contract_di_same_position_yields_scalar_times_identity() {
        let w = KrausWord::new(
            c64(1.0, 0.0),
            vec![
                Letter::deletion(1, 1, phi()).unwrap(),
                Letter::insertion(1, 1, psi()).unwrap(),
            ],
            1,
        )
        .unwrap();
        let contracted = w.contract_di(0).unwrap();
        assert!(contracted.is_empty());
        let overlap = phi().inner(&psi()).unwrap();
        assert!((contracted.scalar() - overlap).norm() < 1e-15);
        let expect = ComplexMatrix::identity(2).scale(overlap);
        assert!(contracted.materialize(2).unwrap().max_abs_diff(&expect) < 1e-15);
        assert!(w.materialize(2).unwrap().max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn contract_di_distinct_positions_commutes_with_shift() {
        let w = KrausWord::new(
            c64(1.0, 0.0),
            vec![
                Letter::deletion(1, 2, phi()).unwrap(),
                Letter::insertion(1, 1, psi()).unwrap(),
            ],
            1,
        )
        .unwrap();
        let rewritten = w.contract_di(0).unwrap();
        let seen: Vec<(LetterKind, usize, usize)> = rewritten
            .letters()
            .iter()
            .map(|l| (l.kind(), l.p(), l.n()))
            .collect();
        assert_eq!(
            seen,
            vec![(LetterKind::Insertion, 1, 0), (LetterKind::Deletion, 1, 0)]
        );
        assert!(
            rewritten
                .materialize(2)
                .unwrap()
                .max_abs_diff(&w.materialize(2).unwrap())
                < 1e-15
        );
    }

    #[test]
    fn swap_id_both_orientations_agree_at_equal_positions() {
        let w = KrausWord::new(
            c64(1.0, 0.0),
            vec![
                Letter::insertion(0, 1, psi()).unwrap(),
                Letter::deletion(0, 1, phi()).unwrap(),
            ],
            1,
        )
        .unwrap();
        // Chosen orientation at the tie.
        let first = w.swap_id(0).unwrap();
        let seen: Vec<(LetterKind, usize, usize)> = first
            .letters()
            .iter()
            .map(|l| (l.kind(), l.p(), l.n()))
            .collect();
        assert_eq!(
            seen,
            vec![(LetterKind::Deletion, 2, 1), (LetterKind::Insertion, 1, 1)]
        );
        // The mirror orientation is also materialization-equal.
        let second = KrausWord::new(
            c64(1.0, 0.0),
            vec![
                Letter::deletion(1, 1, phi()).unwrap(),
                Letter::insertion(1, 2, psi()).unwrap(),
            ],
            1,
        )
        .unwrap();
        let dense = w.materialize(2).unwrap();
        assert!(first.materialize(2).unwrap().max_abs_diff(&dense) < 1e-15);
        assert!(second.materialize(2).unwrap().max_abs_diff(&dense) < 1e-15);
    }

    #[test]
    fn rewrites_reject_wrong_patterns() {
        let w = KrausWord::new(
            c64(1.0, 0.0),
            vec![
                Letter::insertion(1, 1, psi()).unwrap(),
                Letter::insertion(0, 1, phi()).unwrap(),
            ],
            0,
        )
        .unwrap();
        assert!(matches!(
            w.contract_di(0),
            Err(Error::RuleNotApplicable { .. })
        ));
        assert!(matches!(w.swap_dd(0), Err(Error::RuleNotApplicable { .. })));
        assert!(matches!(w.swap_id(5), Err(Error::RuleNotApplicable { .. })));
    }

    #[test]
    fn normalize_keeps_canonical_words_fixed() {
        let ins = InsertionOp::new(1, PositionSet::new(vec![2, 3]).unwrap(), vec![psi(), phi()])
            .unwrap();
        let del = DeletionOp::new(1, PositionSet::single(1).unwrap(), vec![phi()]).unwrap();
        let w = decompose_multi(&ins)
            .compose(&decompose_multi_deletion(&del))
            .unwrap();
        let (canon, trace) = w.normalize();
        assert_eq!(trace, RewriteTrace::default());
        assert_eq!(canon.to_word(), w);
        assert!((canon.scalar() - c64(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn normalize_orders_all_insertions_before_deletions() {
        let w = KrausWord::new(
            c64(1.0, 0.0),
            vec![
                Letter::deletion(1, 1, phi()).unwrap(),
                Letter::insertion(1, 2, psi()).unwrap(),
                Letter::insertion(0, 1, phi()).unwrap(),
                Letter::deletion(0, 1, psi()).unwrap(),
            ],
            1,
        )
        .unwrap();
        let (canon, _) = w.normalize();
        let dense = w.materialize(2).unwrap();
        assert!(canon.materialize(2).unwrap().max_abs_diff(&dense) < 1e-13);
    }

    #[test]
    fn normalize_carries_contraction_scalars() {
        // A same-position deletion-insertion pair buried in a longer word.
        let w = KrausWord::new(
            c64(2.0, 0.0),
            vec![
                Letter::insertion(1, 1, psi()).unwrap(),
                Letter::deletion(1, 2, phi()).unwrap(),
                Letter::insertion(1, 2, psi()).unwrap(),
            ],
            1,
        )
        .unwrap();
        let (canon, trace) = w.normalize();
        assert_eq!(trace.contractions, 1);
        let dense = w.materialize(2).unwrap();
        assert!(canon.materialize(2).unwrap().max_abs_diff(&dense) < 1e-13);
        let expected_scalar = c64(2.0, 0.0) * phi().inner(&psi()).unwrap();
        assert!((canon.scalar() - expected_scalar).norm() < 1e-15);
    }

    #[test]
    fn regroup_recovers_an_adjoint_pair() {
        // Build two insertion-then-deletion words with one insertion and one
        // deletion each, normalize their adjoint product, regroup, and check
        // the factored pair reproduces it.
        let b_u = KrausWord::new(
            c64(1.0, 0.0),
            vec![
                Letter::insertion(2, 1, psi()).unwrap(),
                Letter::deletion(2, 2, phi()).unwrap(),
            ],
            3,
        )
        .unwrap();
        let b_v = KrausWord::new(
            c64(1.0, 0.0),
            vec![
                Letter::insertion(2, 3, phi()).unwrap(),
                Letter::deletion(2, 1, psi()).unwrap(),
            ],
            3,
        )
        .unwrap();
        let product = b_u.adjoint().compose(&b_v).unwrap();
        let (canon, _) = product.normalize();
        let dense = product.materialize(2).unwrap();
        assert!(canon.materialize(2).unwrap().max_abs_diff(&dense) < 1e-13);

        let (a, b) = regroup_as_pair(&canon, 1, 1).unwrap();
        let rebuilt = a.adjoint().compose(&b).unwrap().materialize(2).unwrap();
        assert!(rebuilt.max_abs_diff(&dense) < 1e-13);
    }

    #[test]
    fn display_renders_application_order() {
        let w = KrausWord::new(
            c64(1.0, 0.0),
            vec![
                Letter::insertion(1, 2, psi()).unwrap(),
                Letter::deletion(1, 1, phi()).unwrap(),
            ],
            2,
        )
        .unwrap();
        assert_eq!(format!("{w}"), "(1+0i) D[p1,n1] I[p2,n1]");
    }
}
