//! Seeded randomized property suites.
//!
//! Each suite draws a fixed number of random instances, computes a symbolic
//! or structured result and an independent dense-matrix result, and records
//! the worst entrywise deviation together with the first counterexample if
//! any instance exceeds its tolerance. Suites derive independent generator
//! streams from the run seed, so results are identical across suite order
//! and worker counts.

use crate::channel::{
    apply_channel, apply_insdel, era_error, era_error_kraus_sum, ins_error, ins_error_kraus_sum,
    spanning_kraus_family, ChannelKind, InsdelSpec, MixtureChannel, MixtureTerm,
};
use crate::eigen::least_squares;
use crate::error::Result;
use crate::kraus::{
    build_deletion, build_deletion_direct, build_insertion, build_insertion_direct, DeletionOp,
    InsertionOp, PositionSet,
};
use crate::matrix::{c64, ComplexMatrix, Ket};
use crate::sampling::Sampler;
use crate::word::{decompose_multi, decompose_multi_deletion, regroup_as_pair, KrausWord, Letter};

/// Outcome of one suite.
#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub instances: usize,
    pub failures: usize,
    pub worst_deviation: f64,
    pub tolerance: f64,
    /// First failing instance, serialized for reproduction.
    pub counterexample: Option<String>,
    /// Count of scalar contractions exercised, where meaningful.
    pub contractions: usize,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct SuiteAcc {
    name: &'static str,
    tolerance: f64,
    instances: usize,
    failures: usize,
    worst: f64,
    counterexample: Option<String>,
    contractions: usize,
}

impl SuiteAcc {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            tolerance,
            instances: 0,
            failures: 0,
            worst: 0.0,
            counterexample: None,
            contractions: 0,
        }
    }

    fn record(&mut self, deviation: f64, describe: impl FnOnce() -> String) {
        self.instances += 1;
        if deviation > self.worst {
            self.worst = deviation;
        }
        // Negated comparison so NaN counts as a failure.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(deviation <= self.tolerance) {
            self.failures += 1;
            if self.counterexample.is_none() {
                self.counterexample = Some(describe());
            }
        }
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            name: self.name,
            instances: self.instances,
            failures: self.failures,
            worst_deviation: self.worst,
            tolerance: self.tolerance,
            counterexample: self.counterexample,
            contractions: self.contractions,
        }
    }
}

/// Instance counts and the seed for a selftest run. Defaults match the
/// crate's acceptance thresholds.
#[derive(Debug, Clone, Copy)]
pub struct SelftestConfig {
    pub seed: u64,
    /// Instances per operator-identity suite.
    pub lemma_instances: usize,
    /// Instances per channel-form suite.
    pub channel_instances: usize,
    /// Instances per span-certificate suite.
    pub span_instances: usize,
    /// Instances per (t1, t2) split in the normal-form and regroup suites.
    pub normal_form_instances: usize,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            lemma_instances: 500,
            channel_instances: 200,
            span_instances: 100,
            normal_form_instances: 200,
        }
    }
}

/// Draw a qudit dimension and identity-factor count with the expensive
/// corners (large registers at q = 3) sampled but rare.
fn draw_q_n(s: &mut Sampler) -> (usize, usize) {
    let q = if s.uniform() < 0.75 { 2 } else { 3 };
    let n = if q == 2 {
        s.range(0, 4)
    } else {
        let r = s.uniform();
        if r < 0.85 {
            s.range(0, 2)
        } else if r < 0.97 {
            3
        } else {
            4
        }
    };
    (q, n)
}

/// Multi-position insertion equals the product of its single-position
/// letters, checked against the direct tensor-factor build.
pub fn suite_compose_insertion(cfg: &SelftestConfig) -> SuiteResult {
    let mut s = Sampler::derive(cfg.seed, 0x31a);
    let mut acc = SuiteAcc::new("compose-insertion", 1e-12);
    for _ in 0..cfg.lemma_instances {
        let (q, n) = draw_q_n(&mut s);
        let t = s.range(1, 3);
        let positions = s.position_set(t, n + t);
        let kets: Vec<Ket> = (0..t).map(|_| s.ket(q)).collect();
        let op = InsertionOp::new(n, positions, kets).expect("valid instance");
        let direct = build_insertion_direct(&op, q).expect("within cap");
        let word = decompose_multi(&op);
        let dev1 = word
            .materialize(q)
            .expect("within cap")
            .max_abs_diff(&direct);
        let dev2 = build_insertion(&op, q).expect("within cap").max_abs_diff(&direct);
        acc.record(dev1.max(dev2), || {
            format!("q={q} n={n} word {word}")
        });
    }
    acc.finish()
}

/// Dual of [`suite_compose_insertion`] for deletions.
pub fn suite_compose_deletion(cfg: &SelftestConfig) -> SuiteResult {
    let mut s = Sampler::derive(cfg.seed, 0x31b);
    let mut acc = SuiteAcc::new("compose-deletion", 1e-12);
    for _ in 0..cfg.lemma_instances {
        let (q, n) = draw_q_n(&mut s);
        let t = s.range(1, 3);
        let positions = s.position_set(t, n + t);
        let bras: Vec<Ket> = (0..t).map(|_| s.ket(q)).collect();
        let op = DeletionOp::new(n, positions, bras).expect("valid instance");
        let direct = build_deletion_direct(&op, q).expect("within cap");
        let word = decompose_multi_deletion(&op);
        let dev1 = word
            .materialize(q)
            .expect("within cap")
            .max_abs_diff(&direct);
        let dev2 = build_deletion(&op, q).expect("within cap").max_abs_diff(&direct);
        acc.record(dev1.max(dev2), || {
            format!("q={q} n={n} word {word}")
        });
    }
    acc.finish()
}

/// Adjacent insertion letters reorder with a position shift.
pub fn suite_insertion_swap(cfg: &SelftestConfig) -> SuiteResult {
    let mut s = Sampler::derive(cfg.seed, 0x32a);
    let mut acc = SuiteAcc::new("insertion-swap", 1e-12);
    for _ in 0..cfg.lemma_instances {
        let (q, n) = draw_q_n(&mut s);
        let inner = Letter::insertion(n, s.range(1, n + 1), s.ket(q)).expect("valid");
        let outer = Letter::insertion(n + 1, s.range(1, n + 2), s.ket(q)).expect("valid");
        let word = KrausWord::new(c64(1.0, 0.0), vec![outer, inner], n).expect("chains");
        let swapped = word.swap_ii(0).expect("pattern");
        let dev = swapped
            .materialize(q)
            .expect("within cap")
            .max_abs_diff(&word.materialize(q).expect("within cap"));
        let roundtrip = swapped.swap_ii(0).expect("pattern");
        let dev = if roundtrip == word { dev } else { f64::INFINITY };
        acc.record(dev, || format!("q={q} word {word}"));
    }
    acc.finish()
}

/// Adjacent deletion letters reorder with a position shift.
pub fn suite_deletion_swap(cfg: &SelftestConfig) -> SuiteResult {
    let mut s = Sampler::derive(cfg.seed, 0x32b);
    let mut acc = SuiteAcc::new("deletion-swap", 1e-12);
    for _ in 0..cfg.lemma_instances {
        let (q, n) = draw_q_n(&mut s);
        let outer = Letter::deletion(n, s.range(1, n + 1), s.ket(q)).expect("valid");
        let inner = Letter::deletion(n + 1, s.range(1, n + 2), s.ket(q)).expect("valid");
        let word = KrausWord::new(c64(1.0, 0.0), vec![outer, inner], n + 2).expect("chains");
        let swapped = word.swap_dd(0).expect("pattern");
        let dev = swapped
            .materialize(q)
            .expect("within cap")
            .max_abs_diff(&word.materialize(q).expect("within cap"));
        let roundtrip = swapped.swap_dd(0).expect("pattern");
        let dev = if roundtrip == word { dev } else { f64::INFINITY };
        acc.record(dev, || format!("q={q} word {word}"));
    }
    acc.finish()
}

/// A deletion acting after an insertion commutes past it or contracts to a
/// scalar; all three position cases are cycled.
pub fn suite_deletion_insertion_commute(cfg: &SelftestConfig) -> SuiteResult {
    let mut s = Sampler::derive(cfg.seed, 0x33);
    let mut acc = SuiteAcc::new("deletion-insertion-commute", 1e-12);
    for i in 0..cfg.lemma_instances {
        let (q, n_raw) = draw_q_n(&mut s);
        let case = i % 3;
        let n = if case == 1 { n_raw } else { n_raw.max(1) };
        let (p_ins, p_del) = match case {
            0 => {
                let p1 = s.range(1, n);
                (p1, s.range(p1 + 1, n + 1))
            }
            1 => {
                let p = s.range(1, n + 1);
                (p, p)
            }
            _ => {
                let p1 = s.range(2, n + 1);
                (p1, s.range(1, p1 - 1))
            }
        };
        let word = KrausWord::new(
            c64(1.0, 0.0),
            vec![
                Letter::deletion(n, p_del, s.ket(q)).expect("valid"),
                Letter::insertion(n, p_ins, s.ket(q)).expect("valid"),
            ],
            n,
        )
        .expect("chains");
        let rewritten = word.contract_di(0).expect("pattern");
        if rewritten.is_empty() {
            acc.contractions += 1;
        }
        let dev = rewritten
            .materialize(q)
            .expect("within cap")
            .max_abs_diff(&word.materialize(q).expect("within cap"));
        acc.record(dev, || format!("q={q} case={case} word {word}"));
    }
    acc.finish()
}

/// An insertion acting after a deletion moves past it; at equal positions
/// both orientations must produce the same matrix.
pub fn suite_insertion_deletion_commute(cfg: &SelftestConfig) -> SuiteResult {
    let mut s = Sampler::derive(cfg.seed, 0x34);
    let mut acc = SuiteAcc::new("insertion-deletion-commute", 1e-12);
    for i in 0..cfg.lemma_instances {
        let (q, n) = draw_q_n(&mut s);
        let tie = i % 3 == 2;
        let p_ins = s.range(1, n + 1);
        let p_del = if tie { p_ins } else { s.range(1, n + 1) };
        let ins_vec = s.ket(q);
        let del_vec = s.ket(q);
        let word = KrausWord::new(
            c64(1.0, 0.0),
            vec![
                Letter::insertion(n, p_ins, ins_vec.clone()).expect("valid"),
                Letter::deletion(n, p_del, del_vec.clone()).expect("valid"),
            ],
            n + 1,
        )
        .expect("chains");
        let dense = word.materialize(q).expect("within cap");
        let rewritten = word.swap_id(0).expect("pattern");
        let mut dev = rewritten
            .materialize(q)
            .expect("within cap")
            .max_abs_diff(&dense);
        if p_ins == p_del {
            // The mirror orientation shifts the other letter.
            let mirror = KrausWord::new(
                c64(1.0, 0.0),
                vec![
                    Letter::deletion(n + 1, p_del, del_vec).expect("valid"),
                    Letter::insertion(n + 1, p_ins + 1, ins_vec).expect("valid"),
                ],
                n + 1,
            )
            .expect("chains");
            dev = dev.max(mirror.materialize(q).expect("within cap").max_abs_diff(&dense));
        }
        acc.record(dev, || format!("q={q} word {word}"));
    }
    acc.finish()
}

/// The adjoint of an insertion is the deletion with the same positions and
/// conjugated vectors, for multi-position builds and for whole words.
pub fn suite_adjoint_pairing(cfg: &SelftestConfig) -> SuiteResult {
    let mut s = Sampler::derive(cfg.seed, 0x1);
    let mut acc = SuiteAcc::new("adjoint-pairing", 1e-12);
    for _ in 0..cfg.lemma_instances {
        let (q, n) = draw_q_n(&mut s);
        let t = s.range(1, 3);
        let positions = s.position_set(t, n + t);
        let kets: Vec<Ket> = (0..t).map(|_| s.ket(q)).collect();
        let op = InsertionOp::new(n, positions, kets).expect("valid instance");
        let dev1 = build_insertion_direct(&op, q)
            .expect("within cap")
            .dagger()
            .max_abs_diff(&build_deletion_direct(&op.adjoint(), q).expect("within cap"));

        let len = s.range(1, 5);
        let sites_in = s.range(0, 2);
        let word = s.arbitrary_word(sites_in, len, q, 5);
        let dev2 = word
            .adjoint()
            .materialize(q)
            .expect("within cap")
            .max_abs_diff(&word.materialize(q).expect("within cap").dagger());
        acc.record(dev1.max(dev2), || format!("q={q} n={n} word {word}"));
    }
    acc.finish()
}

/// Splice route equals the Kraus-sum route for insertion errors.
pub fn suite_insertion_channel_kraus(cfg: &SelftestConfig) -> SuiteResult {
    let mut s = Sampler::derive(cfg.seed, 0x41);
    let mut acc = SuiteAcc::new("insertion-channel-kraus", 1e-12);
    for _ in 0..cfg.channel_instances {
        let q = if s.uniform() < 0.75 { 2 } else { 3 };
        let sites = s.range(1, 3);
        let t = s.range(1, 2);
        let rho = s.density(q, sites);
        let sigma = s.separable(q, t);
        let positions = s.position_set(t, sites + t);
        let a = ins_error(&rho, &positions, &sigma).expect("valid instance");
        let b = ins_error_kraus_sum(&rho, &positions, &sigma).expect("valid instance");
        let dev = a.matrix().max_abs_diff(b.matrix());
        acc.record(dev, || {
            format!("q={q} sites={sites} positions {:?}", positions.positions())
        });
    }
    acc.finish()
}

/// Iterated partial trace equals the Kraus-sum route for erasure errors.
pub fn suite_deletion_channel_kraus(cfg: &SelftestConfig) -> SuiteResult {
    let mut s = Sampler::derive(cfg.seed, 0x42);
    let mut acc = SuiteAcc::new("deletion-channel-kraus", 1e-12);
    for _ in 0..cfg.channel_instances {
        let q = if s.uniform() < 0.75 { 2 } else { 3 };
        let sites = s.range(2, 3);
        let t = s.range(1, 2.min(sites));
        let rho = s.density(q, sites);
        let positions = s.position_set(t, sites);
        let a = era_error(&rho, &positions).expect("valid instance");
        let b = era_error_kraus_sum(&rho, &positions).expect("valid instance");
        let dev = a.matrix().max_abs_diff(b.matrix());
        acc.record(dev, || {
            format!("q={q} sites={sites} positions {:?}", positions.positions())
        });
    }
    acc.finish()
}

/// Deleting a freshly inserted qudit restores the original state exactly.
pub fn suite_delete_inserted_identity(cfg: &SelftestConfig) -> SuiteResult {
    let mut s = Sampler::derive(cfg.seed, 0x43);
    let mut acc = SuiteAcc::new("delete-inserted-identity", 1e-13);
    for _ in 0..cfg.channel_instances {
        let q = if s.uniform() < 0.75 { 2 } else { 3 };
        let sites = s.range(1, 3);
        let rho = s.density(q, sites);
        let sigma = s.separable(q, 1);
        let p = s.range(1, sites + 1);
        let positions = PositionSet::single(p).expect("valid");
        let inserted = ins_error(&rho, &positions, &sigma).expect("valid instance");
        let restored = era_error(&inserted, &positions).expect("valid instance");
        let dev = restored.matrix().max_abs_diff(rho.matrix());
        acc.record(dev, || format!("q={q} sites={sites} p={p}"));
    }
    acc.finish()
}

/// Channels preserve the trace.
pub fn suite_trace_preservation(cfg: &SelftestConfig) -> SuiteResult {
    let mut s = Sampler::derive(cfg.seed, 0x44);
    let mut acc = SuiteAcc::new("trace-preservation", 1e-11);
    for i in 0..cfg.channel_instances {
        let q = if s.uniform() < 0.75 { 2 } else { 3 };
        let sites = s.range(2, 3);
        let rho = s.density(q, sites);
        let out = match i % 3 {
            0 => {
                let channel = random_mixture(&mut s, ChannelKind::Deletion, q, sites, 1);
                apply_channel(&rho, &channel).expect("valid instance")
            }
            1 => {
                let t = s.range(1, 2);
                let channel = random_mixture(&mut s, ChannelKind::Insertion, q, sites, t);
                apply_channel(&rho, &channel).expect("valid instance")
            }
            _ => {
                let spec = InsdelSpec::uniform(sites, q, s.range(0, 1), s.range(0, 1))
                    .expect("valid instance");
                apply_insdel(&rho, &spec).expect("valid instance")
            }
        };
        let trace = out.matrix().trace().expect("square");
        let dev = (trace.re - 1.0).abs().max(trace.im.abs());
        acc.record(dev, || format!("q={q} sites={sites} variant={}", i % 3));
    }
    acc.finish()
}

fn random_mixture(
    s: &mut Sampler,
    kind: ChannelKind,
    q: usize,
    sites: usize,
    t: usize,
) -> MixtureChannel {
    let k = s.range(1, 3);
    let weights = s.probabilities(k);
    let max = match kind {
        ChannelKind::Insertion => sites + t,
        ChannelKind::Deletion => sites,
    };
    let terms = weights
        .into_iter()
        .map(|weight| MixtureTerm {
            weight,
            positions: s.position_set(t, max),
            state: match kind {
                ChannelKind::Insertion => Some(s.separable(q, t)),
                ChannelKind::Deletion => None,
            },
        })
        .collect();
    MixtureChannel::new(kind, t, terms).expect("valid mixture")
}

/// Insertion operators with arbitrary unitary-rotated vectors lie in the
/// span of the computational-basis insertions (least-squares residual).
pub fn suite_insertion_span(cfg: &SelftestConfig) -> SuiteResult {
    let mut s = Sampler::derive(cfg.seed, 0x51);
    let mut acc = SuiteAcc::new("insertion-span", 1e-10);
    for i in 0..cfg.span_instances {
        let q = if s.uniform() < 0.5 { 2 } else { 3 };
        let sites = s.range(1, 3);
        let t = s.range(1, 2);
        let positions = s.position_set(t, sites + t);
        // Rotate basis kets by independent random unitaries per factor.
        let kets: Vec<Ket> = (0..t)
            .map(|_| {
                let u = s.unitary(q);
                u.column(s.range(0, q - 1))
            })
            .collect();
        let target = build_insertion_direct(
            &InsertionOp::new(sites, positions.clone(), kets).expect("valid"),
            q,
        )
        .expect("within cap");

        let residual = if q == 2 && i % 5 == 0 {
            // Solve against the full spanning family of the channel.
            let family = spanning_kraus_family(sites, q, t, 0, 100_000).expect("small family");
            let columns: Vec<ComplexMatrix> = family
                .iter()
                .map(|w| w.materialize(q).expect("within cap"))
                .collect();
            span_residual(&columns, &target)
        } else {
            // Solve against the same-position basis insertions.
            let mut columns = Vec::new();
            for flat in 0..q.pow(t as u32) {
                let mut digits = vec![0usize; t];
                let mut rem = flat;
                for k in (0..t).rev() {
                    digits[k] = rem % q;
                    rem /= q;
                }
                let op = InsertionOp::new(
                    sites,
                    positions.clone(),
                    digits.iter().map(|&d| Ket::basis(q, d)).collect(),
                )
                .expect("valid");
                columns.push(build_insertion_direct(&op, q).expect("within cap"));
            }
            span_residual(&columns, &target)
        };
        acc.record(residual, || {
            format!("q={q} sites={sites} positions {:?}", positions.positions())
        });
    }
    acc.finish()
}

/// Deletion operators with unitary-rotated bras lie in the span of the
/// computational-basis deletions.
pub fn suite_deletion_span(cfg: &SelftestConfig) -> SuiteResult {
    let mut s = Sampler::derive(cfg.seed, 0x52);
    let mut acc = SuiteAcc::new("deletion-span", 1e-10);
    for i in 0..cfg.span_instances {
        let q = if s.uniform() < 0.5 { 2 } else { 3 };
        let inner = s.range(1, 2);
        let t = s.range(1, 2);
        let sites = inner + t;
        let positions = s.position_set(t, sites);
        let bras: Vec<Ket> = (0..t)
            .map(|_| {
                let u = s.unitary(q);
                u.column(s.range(0, q - 1))
            })
            .collect();
        let target = build_deletion_direct(
            &DeletionOp::new(inner, positions.clone(), bras).expect("valid"),
            q,
        )
        .expect("within cap");

        let residual = if q == 2 && i % 5 == 0 {
            let family = spanning_kraus_family(sites, q, 0, t, 100_000).expect("small family");
            let columns: Vec<ComplexMatrix> = family
                .iter()
                .map(|w| w.materialize(q).expect("within cap"))
                .collect();
            span_residual(&columns, &target)
        } else {
            let mut columns = Vec::new();
            for flat in 0..q.pow(t as u32) {
                let mut digits = vec![0usize; t];
                let mut rem = flat;
                for k in (0..t).rev() {
                    digits[k] = rem % q;
                    rem /= q;
                }
                let op = DeletionOp::new(
                    inner,
                    positions.clone(),
                    digits.iter().map(|&d| Ket::basis(q, d)).collect(),
                )
                .expect("valid");
                columns.push(build_deletion_direct(&op, q).expect("within cap"));
            }
            span_residual(&columns, &target)
        };
        acc.record(residual, || {
            format!("q={q} sites={sites} positions {:?}", positions.positions())
        });
    }
    acc.finish()
}

/// Least-squares residual of `target` against the span of `columns`.
fn span_residual(columns: &[ComplexMatrix], target: &ComplexMatrix) -> f64 {
    let rows = target.rows() * target.cols();
    let a = ComplexMatrix::from_fn(rows, columns.len(), |r, c| columns[c].vectorize()[r]);
    let b = Ket::new(target.vectorize().to_vec());
    match least_squares(&a, &b, 1e-14) {
        Ok((_, residual)) => residual,
        Err(_) => f64::INFINITY,
    }
}

/// Every split `(t1, t2)` of a total error budget, used by the word suites.
fn splits(total_max: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for total in 0..=total_max {
        for t2 in 0..=total {
            out.push((total - t2, t2));
        }
    }
    out
}

/// Adjoint products of random Kraus words normalize to the canonical
/// insertion-block/deletion-block shape with unchanged materialization,
/// including the scalar-contraction branches.
pub fn suite_normal_form(cfg: &SelftestConfig) -> SuiteResult {
    let mut s = Sampler::derive(cfg.seed, 0x5f);
    let mut acc = SuiteAcc::new("normal-form", 1e-12);
    for (t1, t2) in splits(3) {
        for i in 0..cfg.normal_form_instances {
            let total = t1 + t2;
            let q = if total >= 3 || s.uniform() < 0.6 { 2 } else { 3 };
            let n_min = (t2 + 1).max(1);
            let n_max = if q == 3 { 3.max(n_min) } else { 4 };
            let sites = s.range(n_min, n_max.max(n_min));
            let b_u = s.insdel_word(sites, t1, t2, q);
            let b_v = if i % 4 == 0 {
                b_u.clone()
            } else {
                s.insdel_word(sites, t1, t2, q)
            };
            let product = b_u.adjoint().compose(&b_v).expect("same shape");
            let dense = product.materialize(q).expect("within cap");
            let (canon, trace) = product.normalize();
            acc.contractions += trace.contractions;
            let mut dev = canon
                .materialize(q)
                .expect("within cap")
                .max_abs_diff(&dense);
            // Canonical shape: equal block sizes on a square word.
            if canon.insertion_block().t() != canon.deletion_block().t() {
                dev = f64::INFINITY;
            }
            acc.record(dev, || format!("q={q} t1={t1} t2={t2} word {product}"));
        }
    }
    acc.finish()
}

// The insertion count m - min(t2, m) never exceeds t1 because contractions
// only shrink the word below t1 + t2 letters per block.
fn regroup_target(m: usize, t2: usize) -> (usize, usize) {
    let b = m.min(t2);
    (m - b, b)
}

/// Adjoint products of deletion-heavy Kraus pairs regroup into pairs with
/// one more insertion and one fewer deletion.
pub fn suite_regroup_deletion_heavy(cfg: &SelftestConfig) -> SuiteResult {
    let mut s = Sampler::derive(cfg.seed, 0x5a);
    let mut acc = SuiteAcc::new("regroup-deletion-heavy", 1e-12);
    let instances = (cfg.normal_form_instances / 2).max(1);
    for (t1, t2) in splits(3) {
        if t1 == 0 {
            continue;
        }
        // Pairs drawn from the channel with one fewer insertion and one more
        // deletion than the regrouping target.
        let (p1, p2) = (t1 - 1, t2 + 1);
        for _ in 0..instances {
            let q = 2;
            let sites = s.range(p2 + 1, 4.max(p2 + 1));
            let b_u = s.insdel_word(sites, p1, p2, q);
            let b_v = s.insdel_word(sites, p1, p2, q);
            let dev = regroup_deviation(&b_u, &b_v, q, t1, t2, &mut acc);
            acc.record(dev, || format!("t1={t1} t2={t2} pair ({b_u}, {b_v})"));
        }
    }
    acc.finish()
}

/// Adjoint products of insertion-heavy Kraus pairs regroup into pairs with
/// one fewer insertion and one more deletion, exercising the contraction
/// branch that produces scalar factors.
pub fn suite_regroup_insertion_heavy(cfg: &SelftestConfig) -> SuiteResult {
    let mut s = Sampler::derive(cfg.seed, 0x5b);
    let mut acc = SuiteAcc::new("regroup-insertion-heavy", 1e-12);
    let instances = (cfg.normal_form_instances / 2).max(1);
    for (t1, t2) in splits(3) {
        if t2 == 0 {
            continue;
        }
        let (p1, p2) = (t1 + 1, t2 - 1);
        for i in 0..instances {
            let q = 2;
            let sites = s.range((p2 + 1).max(1), 4.max(p2 + 1));
            let b_u = s.insdel_word(sites, p1, p2, q);
            let b_v = if i % 4 == 0 {
                b_u.clone()
            } else {
                s.insdel_word(sites, p1, p2, q)
            };
            let dev = regroup_deviation(&b_u, &b_v, q, t1, t2, &mut acc);
            acc.record(dev, || format!("t1={t1} t2={t2} pair ({b_u}, {b_v})"));
        }
    }
    acc.finish()
}

/// Normalize `adjoint(b_u) * b_v`, regroup the canonical form as an adjoint
/// pair within the `(t1, t2)` budget, and measure the worst deviation of
/// both the canonical form and the regrouped pair from the original product.
fn regroup_deviation(
    b_u: &KrausWord,
    b_v: &KrausWord,
    q: usize,
    t1: usize,
    t2: usize,
    acc: &mut SuiteAcc,
) -> f64 {
    let product = match b_u.adjoint().compose(b_v) {
        Ok(p) => p,
        Err(_) => return f64::INFINITY,
    };
    let dense = match product.materialize(q) {
        Ok(m) => m,
        Err(_) => return f64::INFINITY,
    };
    let (canon, trace) = product.normalize();
    acc.contractions += trace.contractions;
    let mut dev = match canon.materialize(q) {
        Ok(m) => m.max_abs_diff(&dense),
        Err(_) => return f64::INFINITY,
    };

    let m = canon.insertion_block().t();
    if canon.deletion_block().t() != m {
        return f64::INFINITY;
    }
    // Contractions shrink the word; fall back to the largest split that
    // still fits the budget.
    let (a_t1, a_t2) = regroup_target(m, t2);
    if a_t1 > t1 || a_t2 > t2 {
        return f64::INFINITY;
    }
    match regroup_as_pair(&canon, a_t1, a_t2) {
        Ok((a, b)) => {
            let rebuilt = a
                .adjoint()
                .compose(&b)
                .and_then(|w| w.materialize(q));
            match rebuilt {
                Ok(mat) => dev = dev.max(mat.max_abs_diff(&dense)),
                Err(_) => return f64::INFINITY,
            }
        }
        Err(_) => return f64::INFINITY,
    }
    dev
}

/// Run every suite with streams derived from the configured seed.
pub fn run_all(cfg: &SelftestConfig) -> Vec<SuiteResult> {
    vec![
        suite_compose_insertion(cfg),
        suite_compose_deletion(cfg),
        suite_insertion_swap(cfg),
        suite_deletion_swap(cfg),
        suite_deletion_insertion_commute(cfg),
        suite_insertion_deletion_commute(cfg),
        suite_adjoint_pairing(cfg),
        suite_insertion_channel_kraus(cfg),
        suite_deletion_channel_kraus(cfg),
        suite_delete_inserted_identity(cfg),
        suite_trace_preservation(cfg),
        suite_insertion_span(cfg),
        suite_deletion_span(cfg),
        suite_normal_form(cfg),
        suite_regroup_deletion_heavy(cfg),
        suite_regroup_insertion_heavy(cfg),
    ]
}

/// Validate the bundled code shipped in the repository's data directory
/// against its advertised single-deletion capability.
pub fn validate_bundled_code(text: &str, tol: f64, cap: usize) -> Result<crate::kl::KLVerdict> {
    let code = crate::code::parse_code_file(text)?;
    crate::kl::check_insdel_code(&code, 0, 1, tol, cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_cfg() -> SelftestConfig {
        SelftestConfig {
            seed: 7,
            lemma_instances: 40,
            channel_instances: 12,
            span_instances: 10,
            normal_form_instances: 8,
        }
    }

    #[test]
    fn all_suites_pass_at_reduced_counts() {
        for suite in run_all(&quick_cfg()) {
            assert!(
                suite.passed(),
                "{} failed: worst {:.3e} > {:.3e}, counterexample {:?}",
                suite.name,
                suite.worst_deviation,
                suite.tolerance,
                suite.counterexample
            );
        }
    }

    #[test]
    fn suites_are_seed_deterministic() {
        let a = suite_normal_form(&quick_cfg());
        let b = suite_normal_form(&quick_cfg());
        assert_eq!(a.worst_deviation, b.worst_deviation);
        assert_eq!(a.contractions, b.contractions);
    }

    #[test]
    fn contraction_branches_are_exercised() {
        let nf = suite_normal_form(&quick_cfg());
        assert!(nf.contractions > 0, "no contractions hit in normal-form");
        let rg = suite_regroup_insertion_heavy(&quick_cfg());
        assert!(rg.contractions > 0, "no contractions hit in regroup");
    }

    #[test]
    fn bundled_code_data_file_validates() {
        let verdict = validate_bundled_code(
            include_str!("../../../data/four_qubit_deletion.code"),
            1e-10,
            100_000,
        )
        .unwrap();
        assert!(verdict.passed);
    }
}
