//! Knill-Laflamme checks, capability sweeps, and recovery channels.
//!
//! A code corrects a Kraus family exactly when every pair `(E_u, E_v)` has a
//! Gram matrix `G[a, b] = <a_L| E_u^dagger E_v |b_L>` that is a scalar
//! multiple of the identity: vanishing off-diagonal entries (orthogonality)
//! and equal diagonal entries (non-deformation). The checker measures the
//! worst violation of each condition over the family.
//!
//! Verdict thresholds are absolute tolerances applied after normalizing each
//! word to unit operator norm on the code subspace, which makes the tolerance
//! meaningful across arbitrarily scaled families; words that annihilate the
//! code contribute nothing and are left unscaled. Gram matrices are computed
//! matrix-free by applying words to codewords; pairs are embarrassingly
//! parallel and reduced in a fixed order, so reports are identical at any
//! worker count.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{apply_channel, apply_insdel, spanning_kraus_family, InsdelSpec, MixtureChannel};
use crate::code::QuantumCode;
use crate::density::DensityMatrix;
use crate::eigen::hermitian_eigen;
use crate::error::{Error, Result};
use crate::matrix::{c64, ComplexMatrix, Ket};
use crate::policy::{NumericPolicy, RunConfig};
use crate::sampling::Sampler;
use crate::word::KrausWord;

/// Gram data of one Kraus pair `(u, v)`, after per-word normalization.
#[derive(Debug, Clone)]
pub struct PairGram {
    pub u: usize,
    pub v: usize,
    /// The `d x d` matrix `<a_L| E_u^dagger E_v |b_L>`.
    pub gram: ComplexMatrix,
    /// Mean of the diagonal entries; the scalar the pair must collapse to.
    pub g: Complex64,
    /// Largest off-diagonal magnitude (orthogonality violation).
    pub max_offdiag: f64,
    /// Largest deviation of a diagonal entry from the mean (non-deformation
    /// violation).
    pub diag_spread: f64,
}

/// All pair data of a Knill-Laflamme check, with the worst violations.
#[derive(Debug, Clone)]
pub struct GramReport {
    /// One entry per unordered pair `u <= v`; the transposed pairs follow by
    /// conjugate symmetry.
    pub pairs: Vec<PairGram>,
    pub max_offdiag: f64,
    pub max_diag_spread: f64,
    /// Pair achieving the overall worst violation.
    pub worst_pair: Option<(usize, usize)>,
}

/// Outcome of a Knill-Laflamme check.
#[derive(Debug, Clone)]
pub struct KLVerdict {
    pub passed: bool,
    pub tolerance: f64,
    pub family_size: usize,
    pub report: GramReport,
}

/// Raw Gram matrix `<a_L| E_u^dagger E_v |b_L>` of a pair of words, computed
/// matrix-free on the codewords without normalization.
pub fn gram_matrix(code: &QuantumCode, eu: &KrausWord, ev: &KrausWord) -> Result<ComplexMatrix> {
    check_word_against_code(code, eu)?;
    check_word_against_code(code, ev)?;
    if eu.sites_out() != ev.sites_out() {
        return Err(Error::DimensionMismatch(format!(
            "pair maps the code into different registers: {} vs {} sites",
            eu.sites_out(),
            ev.sites_out()
        )));
    }
    let q = code.q();
    let applied_u: Vec<Ket> = code
        .codewords()
        .iter()
        .map(|w| eu.apply(w, q))
        .collect::<Result<_>>()?;
    let applied_v: Vec<Ket> = code
        .codewords()
        .iter()
        .map(|w| ev.apply(w, q))
        .collect::<Result<_>>()?;
    gram_from_applied(&applied_u, &applied_v)
}

fn gram_from_applied(applied_u: &[Ket], applied_v: &[Ket]) -> Result<ComplexMatrix> {
    let d = applied_u.len();
    let mut gram = ComplexMatrix::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            gram.set(a, b, applied_u[a].inner(&applied_v[b])?);
        }
    }
    Ok(gram)
}

fn check_word_against_code(code: &QuantumCode, word: &KrausWord) -> Result<()> {
    if word.sites_in() != code.sites() {
        return Err(Error::DimensionMismatch(format!(
            "word consumes {} sites, code has {}",
            word.sites_in(),
            code.sites()
        )));
    }
    Ok(())
}

fn pair_stats(gram: &ComplexMatrix) -> (Complex64, f64, f64) {
    let d = gram.rows();
    let mean: Complex64 =
        (0..d).map(|a| gram.get(a, a)).sum::<Complex64>() / c64(d as f64, 0.0);
    let mut max_offdiag = 0.0f64;
    let mut diag_spread = 0.0f64;
    for a in 0..d {
        diag_spread = diag_spread.max((gram.get(a, a) - mean).norm());
        for b in 0..d {
            if a != b {
                max_offdiag = max_offdiag.max(gram.get(a, b).norm());
            }
        }
    }
    (mean, max_offdiag, diag_spread)
}

/// Check the Knill-Laflamme conditions for a code against a Kraus family.
pub fn check_kl(code: &QuantumCode, family: &[KrausWord], tol: f64) -> Result<KLVerdict> {
    if family.is_empty() {
        return Err(Error::Precondition("empty Kraus family".into()));
    }
    for word in family {
        check_word_against_code(code, word)?;
    }
    let out_sites = family[0].sites_out();
    if family.iter().any(|w| w.sites_out() != out_sites) {
        return Err(Error::DimensionMismatch(
            "family words map the code into different registers".into(),
        ));
    }

    let q = code.q();
    // Apply every word to every codeword, in parallel over words; the
    // collected order is the family order, independent of scheduling.
    let applied: Vec<Vec<Ket>> = family
        .par_iter()
        .map(|word| {
            code.codewords()
                .iter()
                .map(|w| word.apply(w, q))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    // Normalize each word to unit operator norm on the code: divide by the
    // largest singular value of its applied-codeword block.
    let cutoff = NumericPolicy::default().spectral_cutoff;
    let scales: Vec<f64> = applied
        .iter()
        .map(|kets| {
            let gram = gram_from_applied(kets, kets)?;
            let (values, _) = hermitian_eigen(&gram)?;
            let top = values.last().copied().unwrap_or(0.0).max(0.0);
            let s = top.sqrt();
            Ok(if s <= cutoff { 1.0 } else { s })
        })
        .collect::<Result<_>>()?;

    let m = family.len();
    let index_pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|u| (u..m).map(move |v| (u, v)))
        .collect();
    let pairs: Vec<PairGram> = index_pairs
        .par_iter()
        .map(|&(u, v)| {
            let raw = gram_from_applied(&applied[u], &applied[v])?;
            let gram = raw.scale(c64(1.0 / (scales[u] * scales[v]), 0.0));
            let (g, max_offdiag, diag_spread) = pair_stats(&gram);
            Ok(PairGram {
                u,
                v,
                gram,
                g,
                max_offdiag,
                diag_spread,
            })
        })
        .collect::<Result<_>>()?;

    let mut max_offdiag = 0.0f64;
    let mut max_diag_spread = 0.0f64;
    let mut worst_pair = None;
    let mut worst_violation = -1.0f64;
    for pair in &pairs {
        max_offdiag = max_offdiag.max(pair.max_offdiag);
        max_diag_spread = max_diag_spread.max(pair.diag_spread);
        let violation = pair.max_offdiag.max(pair.diag_spread);
        if violation > worst_violation {
            worst_violation = violation;
            worst_pair = Some((pair.u, pair.v));
        }
    }

    let report = GramReport {
        pairs,
        max_offdiag,
        max_diag_spread,
        worst_pair,
    };
    Ok(KLVerdict {
        passed: max_offdiag <= tol && max_diag_spread <= tol,
        tolerance: tol,
        family_size: m,
        report,
    })
}

/// Check correctability of the `(t1, t2)` insdel channel by running the
/// Knill-Laflamme conditions against the spanning Kraus family. Since the
/// family spans every Kraus operator of the channel, a pass certifies the
/// full channel.
pub fn check_insdel_code(
    code: &QuantumCode,
    t1: usize,
    t2: usize,
    tol: f64,
    cap: usize,
) -> Result<KLVerdict> {
    if t2 >= code.sites() {
        return Err(Error::Precondition(format!(
            "need t2 < N, got t2 = {t2}, N = {}",
            code.sites()
        )));
    }
    let family = spanning_kraus_family(code.sites(), code.q(), t1, t2, cap)?;
    check_kl(code, &family, tol)
}

/// One row of a capability sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub s1: usize,
    pub s2: usize,
    pub verdict: KLVerdict,
}

/// Check every split `(s1, s2)` with `s1 + s2 = total`. The insertion/
/// deletion equivalence predicts that all rows agree.
pub fn theorem_sweep(
    code: &QuantumCode,
    total: usize,
    tol: f64,
    cap: usize,
) -> Result<Vec<SweepRow>> {
    if total >= code.sites() {
        return Err(Error::Precondition(format!(
            "sweep needs total < N so every split is valid; got total = {total}, N = {}",
            code.sites()
        )));
    }
    let mut rows = Vec::with_capacity(total + 1);
    for s2 in 0..=total {
        let s1 = total - s2;
        let verdict = check_insdel_code(code, s1, s2, tol, cap)?;
        rows.push(SweepRow { s1, s2, verdict });
    }
    Ok(rows)
}

/// Whether all sweep rows share one verdict.
pub fn sweep_agreement(rows: &[SweepRow]) -> bool {
    rows.windows(2)
        .all(|w| w[0].verdict.passed == w[1].verdict.passed)
}

/// Construct the recovery channel of a passing check.
///
/// With the pair Grams collapsing to `g[u, v] * I_d`, the Hermitian matrix
/// `g` is diagonalized as `g = W diag(d_k) W^dagger`; the transformed
/// operators `F_k = sum_u W[u, k] E_u` then satisfy
/// `P F_k^dagger F_l P = delta_{kl} d_k P` on the code projector `P`, and
/// `R_k = P F_k^dagger / sqrt(d_k)` maps the k-th error space isometrically
/// back onto the code. Appending rank-one elements `|e_0><chi_j|` over an
/// orthonormal basis of the unrecovered complement completes the channel:
/// `sum R^dagger R = I`.
pub fn build_recovery(
    code: &QuantumCode,
    family: &[KrausWord],
    tol: f64,
) -> Result<Vec<ComplexMatrix>> {
    let verdict = check_kl(code, family, tol)?;
    if !verdict.passed {
        return Err(Error::Precondition(format!(
            "recovery requires a passing check; worst violations are {:.3e} (orthogonality) and {:.3e} (non-deformation)",
            verdict.report.max_offdiag, verdict.report.max_diag_spread
        )));
    }
    let q = code.q();
    let d = code.dimension();
    let m = family.len();
    let out_dim = q.pow(family[0].sites_out() as u32);
    let in_dim = q.pow(code.sites() as u32);

    // Raw (unnormalized) g matrix: g[u, v] = mean_a <a_L|E_u^dag E_v|a_L>.
    let applied: Vec<Vec<Ket>> = family
        .iter()
        .map(|word| {
            code.codewords()
                .iter()
                .map(|w| word.apply(w, q))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut g = ComplexMatrix::zeros(m, m);
    for u in 0..m {
        for v in 0..m {
            let mut acc = c64(0.0, 0.0);
            for a in 0..d {
                acc += applied[u][a].inner(&applied[v][a])?;
            }
            g.set(u, v, acc / c64(d as f64, 0.0));
        }
    }

    let (values, vectors) = hermitian_eigen(&g)?;
    let dense: Vec<ComplexMatrix> = family
        .iter()
        .map(|w| w.materialize(q))
        .collect::<Result<_>>()?;
    let projector = code.projector();

    let cutoff = NumericPolicy::default().spectral_cutoff;
    let mut recovery = Vec::new();
    for (k, &dk) in values.iter().enumerate() {
        if dk <= cutoff {
            continue;
        }
        let mut f_k = ComplexMatrix::zeros(out_dim, in_dim);
        for u in 0..m {
            let w = vectors.get(u, k);
            if w != c64(0.0, 0.0) {
                f_k = f_k.add(&dense[u].scale(w))?;
            }
        }
        let r_k = projector
            .mul(&f_k.dagger())?
            .scale(c64(1.0 / dk.sqrt(), 0.0));
        recovery.push(r_k);
    }

    // Completion: map an orthonormal basis of the unrecovered complement to
    // a fixed code-register basis state so the Kraus elements sum to I.
    let mut pi = ComplexMatrix::zeros(out_dim, out_dim);
    for r in &recovery {
        pi = pi.add(&r.dagger().mul(r)?)?;
    }
    let complement = ComplexMatrix::identity(out_dim).sub(&pi)?;
    let mut basis: Vec<Ket> = Vec::new();
    for j in 0..out_dim {
        let mut v = complement.column(j);
        for b in &basis {
            let overlap = b.inner(&v)?;
            v = v.add(&b.scale(-overlap))?;
        }
        if v.norm() > 1e-6 {
            basis.push(v.normalized()?);
        }
    }
    let e0 = Ket::basis(in_dim, 0);
    for chi in basis {
        recovery.push(e0.outer(&chi));
    }
    Ok(recovery)
}

/// A channel a recovery can be verified against.
#[derive(Debug, Clone)]
pub enum ChannelSpec {
    Mixture(MixtureChannel),
    Insdel(InsdelSpec),
}

impl ChannelSpec {
    fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        match self {
            ChannelSpec::Mixture(ch) => apply_channel(rho, ch),
            ChannelSpec::Insdel(spec) => apply_insdel(rho, spec),
        }
    }
}

/// Outcome of a recovery verification run.
#[derive(Debug, Clone, Copy)]
pub struct RecoveryReport {
    pub samples: usize,
    /// Largest entrywise deviation of recovered states from their inputs.
    pub max_deviation: f64,
    /// Deviation of `sum R^dagger R` from the identity.
    pub completeness_violation: f64,
}

/// Draw seeded random code-supported states, push them through the channel
/// and the recovery, and report the worst deviation from the identity map.
pub fn verify_recovery(
    code: &QuantumCode,
    channel: &ChannelSpec,
    recovery: &[ComplexMatrix],
    config: &RunConfig,
) -> Result<RecoveryReport> {
    if recovery.is_empty() {
        return Err(Error::Precondition("empty recovery family".into()));
    }
    let q = code.q();
    let noise_dim = recovery[0].cols();
    let mut completeness = ComplexMatrix::zeros(noise_dim, noise_dim);
    for r in recovery {
        if r.cols() != noise_dim || r.rows() != q.pow(code.sites() as u32) {
            return Err(Error::DimensionMismatch(
                "recovery elements have inconsistent shapes".into(),
            ));
        }
        completeness = completeness.add(&r.dagger().mul(r)?)?;
    }
    let completeness_violation =
        completeness.max_abs_diff(&ComplexMatrix::identity(noise_dim));

    let mut sampler = Sampler::derive(config.seed, 0x7ec0);
    let mut max_deviation = 0.0f64;
    for _ in 0..config.samples {
        let rho = sampler.code_density(code);
        let noisy = channel.apply(&rho)?;
        if noisy.dim() != noise_dim {
            return Err(Error::DimensionMismatch(format!(
                "channel output dim {} does not match recovery input dim {noise_dim}",
                noisy.dim()
            )));
        }
        let mut recovered = ComplexMatrix::zeros(rho.dim(), rho.dim());
        for r in recovery {
            let term = r.mul(noisy.matrix())?.mul(&r.dagger())?;
            recovered = recovered.add(&term)?;
        }
        max_deviation = max_deviation.max(recovered.max_abs_diff(rho.matrix()));
    }
    Ok(RecoveryReport {
        samples: config.samples,
        max_deviation,
        completeness_violation,
    })
}
