//! Insertion, deletion, and insdel channels on density matrices.
//!
//! An insertion error splices a separable state into a register at a strictly
//! increasing set of positions; a deletion (erasure at hidden positions)
//! traces sites out. Channels are finite convex mixtures of such errors.
//! Each error map has two independent computation paths: the defining one
//! (splice or iterated partial trace) and a Kraus-operator sum; their
//! agreement is a core test surface of this crate.
//!
//! Continuous mixtures over insertion states are replaced everywhere by
//! finite term lists. This is sound for error-correction checking because
//! the Knill-Laflamme conditions depend only on the linear span of the Kraus
//! operators, each operator is linear in its inserted vectors, and the
//! computational-basis family therefore spans every operator of the channel;
//! [`spanning_kraus_family`] enumerates that family and the span property is
//! itself verified by the test suites.

use num_complex::Complex64;

use crate::density::{spectral_decompose, DensityMatrix, SeparableState};
use crate::error::{Error, Result};
use crate::kraus::{build_deletion, build_insertion, DeletionOp, InsertionOp, PositionSet};
use crate::matrix::{insert_digit, ComplexMatrix, Ket};
use crate::word::{decompose_multi, decompose_multi_deletion, KrausWord};

/// Splice a one-qudit state into a density matrix at position `p`
/// (1-based, `1 <= p <= sites + 1`).
pub fn insert_one(rho: &DensityMatrix, p: usize, sigma: &DensityMatrix) -> Result<DensityMatrix> {
    let q = rho.q();
    let n = rho.sites();
    if sigma.sites() != 1 || sigma.q() != q {
        return Err(Error::Precondition(
            "inserted state must be a single qudit of matching dimension".into(),
        ));
    }
    if p < 1 || p > n + 1 {
        return Err(Error::PositionOutOfRange {
            position: p,
            context: format!("insertion into {n} sites"),
        });
    }
    let dim = rho.dim();
    let out_dim = dim * q;
    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    for x in 0..dim {
        for y in 0..dim {
            let m = rho.matrix().get(x, y);
            if m == Complex64::new(0.0, 0.0) {
                continue;
            }
            for s in 0..q {
                let r_out = insert_digit(x, n, p, s, q);
                for s2 in 0..q {
                    let c_out = insert_digit(y, n, p, s2, q);
                    out.add_at(r_out, c_out, m * sigma.matrix().get(s, s2));
                }
            }
        }
    }
    DensityMatrix::new(q, n + 1, out)
}

/// Insertion error: splice the factors of a separable state at the given
/// positions, lowest position first.
pub fn ins_error(
    rho: &DensityMatrix,
    positions: &PositionSet,
    sigma: &SeparableState,
) -> Result<DensityMatrix> {
    let t = positions.len();
    if sigma.len() != t {
        return Err(Error::Precondition(format!(
            "separable state has {} factors for {t} positions",
            sigma.len()
        )));
    }
    if let Some(max) = positions.max() {
        if max > rho.sites() + t {
            return Err(Error::PositionOutOfRange {
                position: max,
                context: format!("insertion into {} sites at {t} positions", rho.sites()),
            });
        }
    }
    let mut cur = rho.clone();
    for (&p, factor) in positions.positions().iter().zip(sigma.factors()) {
        cur = insert_one(&cur, p, factor)?;
    }
    Ok(cur)
}

/// Erasure error: trace out the given positions, highest position first so
/// the remaining positions stay valid.
pub fn era_error(rho: &DensityMatrix, positions: &PositionSet) -> Result<DensityMatrix> {
    if let Some(max) = positions.max() {
        if max > rho.sites() {
            return Err(Error::PositionOutOfRange {
                position: max,
                context: format!("erasure on {} sites", rho.sites()),
            });
        }
    }
    let q = rho.q();
    let mut matrix = rho.matrix().clone();
    let mut sites = rho.sites();
    for &p in positions.positions().iter().rev() {
        matrix = crate::matrix::partial_trace_site(&matrix, q, sites, p)?;
        sites -= 1;
    }
    DensityMatrix::new(q, sites, matrix)
}

/// Kraus-sum route for [`ins_error`]: spectrally decompose each inserted
/// factor and sum the conjugations by the resulting insertion operators.
pub fn ins_error_kraus_sum(
    rho: &DensityMatrix,
    positions: &PositionSet,
    sigma: &SeparableState,
) -> Result<DensityMatrix> {
    let q = rho.q();
    let n = rho.sites();
    let t = positions.len();
    let spectra: Vec<Vec<(f64, Ket)>> = sigma
        .factors()
        .iter()
        .map(spectral_decompose)
        .collect::<Result<_>>()?;
    let out_dim = q.pow((n + t) as u32);
    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    if t == 0 {
        return DensityMatrix::new(q, n, rho.matrix().clone());
    }
    let mut index = vec![0usize; t];
    loop {
        let mut weight = 1.0f64;
        let mut kets = Vec::with_capacity(t);
        for (k, &i) in index.iter().enumerate() {
            let (c, ref ket) = spectra[k][i];
            weight *= c;
            kets.push(ket.clone());
        }
        let op = InsertionOp::new(n, positions.clone(), kets)?;
        let kraus = build_insertion(&op, q)?;
        let term = kraus.mul(rho.matrix())?.mul(&kraus.dagger())?;
        out = out.add(&term.scale(Complex64::new(weight, 0.0)))?;

        // Advance the mixed-radix index over the spectra.
        let mut k = t;
        loop {
            if k == 0 {
                return DensityMatrix::new(q, n + t, out);
            }
            k -= 1;
            index[k] += 1;
            if index[k] < spectra[k].len() {
                break;
            }
            index[k] = 0;
        }
    }
}

/// Kraus-sum route for [`era_error`]: sum conjugations by the deletion
/// operators over all computational-basis bras.
pub fn era_error_kraus_sum(rho: &DensityMatrix, positions: &PositionSet) -> Result<DensityMatrix> {
    let q = rho.q();
    let n_out = rho.sites() - positions.len();
    let t = positions.len();
    let out_dim = q.pow(n_out as u32);
    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    for flat in 0..q.pow(t as u32) {
        let digits = basis_digits(flat, t, q);
        let bras: Vec<Ket> = digits.iter().map(|&d| Ket::basis(q, d)).collect();
        let op = DeletionOp::new(n_out, positions.clone(), bras)?;
        let kraus = build_deletion(&op, q)?;
        let term = kraus.mul(rho.matrix())?.mul(&kraus.dagger())?;
        out = out.add(&term)?;
    }
    DensityMatrix::new(q, n_out, out)
}

/// Which error family a mixture draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Insertion,
    Deletion,
}

/// One weighted error in a mixture channel.
#[derive(Debug, Clone)]
pub struct MixtureTerm {
    pub weight: f64,
    pub positions: PositionSet,
    /// Inserted state; present exactly for insertion terms.
    pub state: Option<SeparableState>,
}

/// Finite convex combination of insertion or erasure errors with a common
/// position count `t`.
#[derive(Debug, Clone)]
pub struct MixtureChannel {
    kind: ChannelKind,
    t: usize,
    terms: Vec<MixtureTerm>,
}

impl MixtureChannel {
    pub fn new(kind: ChannelKind, t: usize, terms: Vec<MixtureTerm>) -> Result<Self> {
        let mut total = 0.0f64;
        for (i, term) in terms.iter().enumerate() {
            if term.weight < 0.0 {
                return Err(Error::InvalidState(format!(
                    "mixture weight {i} is negative: {}",
                    term.weight
                )));
            }
            total += term.weight;
            if term.positions.len() != t {
                return Err(Error::InvalidState(format!(
                    "mixture term {i} has {} positions, channel expects {t}",
                    term.positions.len()
                )));
            }
            match (kind, &term.state) {
                (ChannelKind::Insertion, Some(s)) if s.len() == t => {}
                (ChannelKind::Insertion, Some(s)) => {
                    return Err(Error::InvalidState(format!(
                        "insertion term {i} carries {} state factors for {t} positions",
                        s.len()
                    )));
                }
                (ChannelKind::Insertion, None) => {
                    return Err(Error::InvalidState(format!(
                        "insertion term {i} is missing its inserted state"
                    )));
                }
                (ChannelKind::Deletion, None) => {}
                (ChannelKind::Deletion, Some(_)) => {
                    return Err(Error::InvalidState(format!(
                        "deletion term {i} must not carry an inserted state"
                    )));
                }
            }
        }
        if !terms.is_empty() && (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { kind, t, terms })
    }

    /// The identity channel expressed as a zero-position mixture.
    pub fn identity(kind: ChannelKind) -> Self {
        let state = match kind {
            ChannelKind::Insertion => Some(SeparableState::new(vec![]).expect("empty state")),
            ChannelKind::Deletion => None,
        };
        Self {
            kind,
            t: 0,
            terms: vec![MixtureTerm {
                weight: 1.0,
                positions: PositionSet::empty(),
                state,
            }],
        }
    }

    /// Uniform mixture over all `t`-position erasures on `sites` sites.
    pub fn uniform_deletion(sites: usize, t: usize) -> Result<Self> {
        if t >= sites && t > 0 {
            return Err(Error::Precondition(format!(
                "deletion channel needs t < sites, got t = {t}, sites = {sites}"
            )));
        }
        if t == 0 {
            return Ok(Self::identity(ChannelKind::Deletion));
        }
        let sets = combinations(sites, t);
        let w = 1.0 / sets.len() as f64;
        let terms = sets
            .into_iter()
            .map(|positions| {
                Ok(MixtureTerm {
                    weight: w,
                    positions: PositionSet::new(positions)?,
                    state: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(ChannelKind::Deletion, t, terms)
    }

    /// Uniform mixture over all `t`-position insertions of a fixed separable
    /// state into `sites` sites.
    pub fn uniform_insertion(sites: usize, t: usize, state: SeparableState) -> Result<Self> {
        if state.len() != t {
            return Err(Error::Precondition(format!(
                "state has {} factors for t = {t}",
                state.len()
            )));
        }
        if t == 0 {
            return Ok(Self::identity(ChannelKind::Insertion));
        }
        let sets = combinations(sites + t, t);
        let w = 1.0 / sets.len() as f64;
        let terms = sets
            .into_iter()
            .map(|positions| {
                Ok(MixtureTerm {
                    weight: w,
                    positions: PositionSet::new(positions)?,
                    state: Some(state.clone()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(ChannelKind::Insertion, t, terms)
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn terms(&self) -> &[MixtureTerm] {
        &self.terms
    }
}

/// Apply a mixture channel to a density matrix.
pub fn apply_channel(rho: &DensityMatrix, channel: &MixtureChannel) -> Result<DensityMatrix> {
    if channel.kind == ChannelKind::Deletion && channel.t >= rho.sites() && channel.t > 0 {
        return Err(Error::Precondition(format!(
            "cannot delete {} of {} sites",
            channel.t,
            rho.sites()
        )));
    }
    let q = rho.q();
    let out_sites = match channel.kind {
        ChannelKind::Insertion => rho.sites() + channel.t,
        ChannelKind::Deletion => rho.sites() - channel.t,
    };
    let out_dim = q.pow(out_sites as u32);
    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    for term in &channel.terms {
        let mapped = match channel.kind {
            ChannelKind::Insertion => ins_error(
                rho,
                &term.positions,
                term.state.as_ref().expect("validated insertion term"),
            )?,
            ChannelKind::Deletion => era_error(rho, &term.positions)?,
        };
        out = out.add(&mapped.matrix().scale(Complex64::new(term.weight, 0.0)))?;
    }
    DensityMatrix::new(q, out_sites, out)
}

/// A deletion channel followed by an insertion channel.
#[derive(Debug, Clone)]
pub struct InsdelSpec {
    t1: usize,
    t2: usize,
    del_mixture: MixtureChannel,
    ins_mixture: MixtureChannel,
}

impl InsdelSpec {
    pub fn new(
        t1: usize,
        t2: usize,
        del_mixture: MixtureChannel,
        ins_mixture: MixtureChannel,
    ) -> Result<Self> {
        if del_mixture.kind() != ChannelKind::Deletion || del_mixture.t() != t2 {
            return Err(Error::Precondition(
                "deletion slot must hold a deletion mixture with t = t2".into(),
            ));
        }
        if ins_mixture.kind() != ChannelKind::Insertion || ins_mixture.t() != t1 {
            return Err(Error::Precondition(
                "insertion slot must hold an insertion mixture with t = t1".into(),
            ));
        }
        Ok(Self {
            t1,
            t2,
            del_mixture,
            ins_mixture,
        })
    }

    /// Uniform-position insdel channel inserting maximally mixed qudits.
    pub fn uniform(sites: usize, q: usize, t1: usize, t2: usize) -> Result<Self> {
        if t2 >= sites {
            return Err(Error::Precondition(format!(
                "insdel channel needs t2 < sites, got t2 = {t2}, sites = {sites}"
            )));
        }
        let del = MixtureChannel::uniform_deletion(sites, t2)?;
        let ins = MixtureChannel::uniform_insertion(
            sites - t2,
            t1,
            SeparableState::maximally_mixed(q, t1),
        )?;
        Self::new(t1, t2, del, ins)
    }

    pub fn t1(&self) -> usize {
        self.t1
    }

    pub fn t2(&self) -> usize {
        self.t2
    }

    pub fn del_mixture(&self) -> &MixtureChannel {
        &self.del_mixture
    }

    pub fn ins_mixture(&self) -> &MixtureChannel {
        &self.ins_mixture
    }
}

/// Apply an insdel channel: delete `t2` sites, then insert `t1`.
pub fn apply_insdel(rho: &DensityMatrix, spec: &InsdelSpec) -> Result<DensityMatrix> {
    if spec.t2 >= rho.sites() {
        return Err(Error::Precondition(format!(
            "insdel channel needs t2 < sites, got t2 = {}, sites = {}",
            spec.t2,
            rho.sites()
        )));
    }
    let deleted = apply_channel(rho, &spec.del_mixture)?;
    apply_channel(&deleted, &spec.ins_mixture)
}

/// All size-`t` subsets of `{1, ..., max}` in lexicographic order.
pub fn combinations(max: usize, t: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, max: usize, t: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == t {
            out.push(cur.clone());
            return;
        }
        let remaining = t - cur.len();
        for p in start..=(max + 1 - remaining) {
            cur.push(p);
            rec(p + 1, max, t, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if t == 0 {
        out.push(Vec::new());
        return out;
    }
    if t > max {
        return out;
    }
    let mut cur = Vec::with_capacity(t);
    rec(1, max, t, &mut cur, &mut out);
    out
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Number of words [`spanning_kraus_family`] produces.
pub fn spanning_family_count(sites: usize, q: usize, t1: usize, t2: usize) -> usize {
    binomial(sites - t2 + t1, t1) * binomial(sites, t2) * q.pow((t1 + t2) as u32)
}

/// Enumerate the computational-basis Kraus words of the `(t1, t2)` insdel
/// channel on `sites` qudits: every insertion block over a `t1`-subset of the
/// post-deletion register paired with every deletion block over a `t2`-subset
/// of the input register, with basis-vector insertions and contractions.
/// Mixture weights are dropped (set to 1); error-correction checks are
/// scale-invariant per Kraus element.
pub fn spanning_kraus_family(
    sites: usize,
    q: usize,
    t1: usize,
    t2: usize,
    cap: usize,
) -> Result<Vec<KrausWord>> {
    if t2 >= sites {
        return Err(Error::Precondition(format!(
            "spanning family needs t2 < sites, got t2 = {t2}, sites = {sites}"
        )));
    }
    let count = spanning_family_count(sites, q, t1, t2);
    if count > cap {
        return Err(Error::EnumerationCapExceeded { count, cap });
    }
    let inner = sites - t2;
    let mut out = Vec::with_capacity(count);
    for p_set in combinations(inner + t1, t1) {
        for q_set in combinations(sites, t2) {
            for a_flat in 0..q.pow(t1 as u32) {
                let kets = basis_digits(a_flat, t1, q);
                for b_flat in 0..q.pow(t2 as u32) {
                    let bras = basis_digits(b_flat, t2, q);
                    let ins = InsertionOp::new(
                        inner,
                        PositionSet::new(p_set.clone())?,
                        kets.iter().map(|&d| Ket::basis(q, d)).collect(),
                    )?;
                    let del = DeletionOp::new(
                        inner,
                        PositionSet::new(q_set.clone())?,
                        bras.iter().map(|&d| Ket::basis(q, d)).collect(),
                    )?;
                    let word = decompose_multi(&ins).compose(&decompose_multi_deletion(&del))?;
                    out.push(word);
                }
            }
        }
    }
    debug_assert_eq!(out.len(), count);
    Ok(out)
}

fn basis_digits(flat: usize, t: usize, q: usize) -> Vec<usize> {
    let mut digits = vec![0usize; t];
    let mut rem = flat;
    for k in (0..t).rev() {
        digits[k] = rem % q;
        rem /= q;
    }
    digits
}
