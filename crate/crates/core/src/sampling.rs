//! Seeded random generators for states, operators, and words.
//!
//! Everything randomized in the crate flows through [`Sampler`], a ChaCha
//! generator with an explicit seed and stream, so identical configurations
//! reproduce identical values regardless of thread count or suite order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::code::QuantumCode;
use crate::density::{DensityMatrix, SeparableState};
use crate::kraus::PositionSet;
use crate::matrix::{c64, ComplexMatrix, Ket};
use crate::word::{Letter, KrausWord};

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent generator for a named sub-task of a seeded run.
    pub fn derive(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.gen_range(lo..=hi)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn complex_normal(&mut self) -> Complex64 {
        c64(self.standard_normal(), self.standard_normal())
    }

    /// Haar-ish random unit vector: normalized complex Gaussian components.
    pub fn ket(&mut self, dim: usize) -> Ket {
        loop {
            let v = Ket::new((0..dim).map(|_| self.complex_normal()).collect());
            if let Ok(unit) = v.normalized() {
                return unit;
            }
        }
    }

    /// Random unitary via modified Gram-Schmidt on a Gaussian matrix.
    pub fn unitary(&mut self, dim: usize) -> ComplexMatrix {
        loop {
            let mut cols: Vec<Ket> = Vec::with_capacity(dim);
            let mut ok = true;
            'outer: for _ in 0..dim {
                let mut v = Ket::new((0..dim).map(|_| self.complex_normal()).collect());
                for basis in &cols {
                    let overlap = basis.inner(&v).expect("same dim");
                    v = v
                        .add(&basis.scale(-overlap))
                        .expect("same dim");
                }
                match v.normalized() {
                    Ok(unit) => cols.push(unit),
                    Err(_) => {
                        ok = false;
                        break 'outer;
                    }
                }
            }
            if ok {
                return ComplexMatrix::from_fn(dim, dim, |r, c| cols[c].amplitudes()[r]);
            }
        }
    }

    /// Probability vector of length `k` (uniform draws, normalized).
    pub fn probabilities(&mut self, k: usize) -> Vec<f64> {
        let mut probs: Vec<f64> = (0..k).map(|_| self.uniform() + 1e-6).collect();
        let total: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total;
        }
        probs
    }

    /// Random density matrix built from a random unitary conjugating random
    /// eigenvalue probabilities.
    pub fn density(&mut self, q: usize, sites: usize) -> DensityMatrix {
        let dim = q.pow(sites as u32);
        let u = self.unitary(dim);
        let probs = self.probabilities(dim);
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (i, &p) in probs.iter().enumerate() {
            let col = u.column(i);
            m = m
                .add(&col.outer(&col).scale(c64(p, 0.0)))
                .expect("same dims");
        }
        DensityMatrix::new(q, sites, m).expect("constructed to shape")
    }

    pub fn separable(&mut self, q: usize, t: usize) -> SeparableState {
        SeparableState::new((0..t).map(|_| self.density(q, 1)).collect())
            .expect("one-qudit factors")
    }

    /// Strictly increasing `t`-subset of `{1, ..., max}`.
    pub fn position_set(&mut self, t: usize, max: usize) -> PositionSet {
        assert!(t <= max, "cannot choose {t} positions out of {max}");
        let mut pool: Vec<usize> = (1..=max).collect();
        let mut chosen = Vec::with_capacity(t);
        for _ in 0..t {
            let idx = self.range(0, pool.len() - 1);
            chosen.push(pool.swap_remove(idx));
        }
        chosen.sort_unstable();
        PositionSet::new(chosen).expect("distinct sorted positions")
    }

    /// Random canonical-shape Kraus word of the `(t1, t2)` insdel channel on
    /// `sites` qudits: an insertion block over random positions and vectors
    /// composed with a deletion block.
    pub fn insdel_word(&mut self, sites: usize, t1: usize, t2: usize, q: usize) -> KrausWord {
        assert!(t2 < sites || t2 == 0, "need t2 < sites");
        let inner = sites - t2;
        let ins_positions = self.position_set(t1, inner + t1);
        let del_positions = self.position_set(t2, sites);
        let ins = crate::kraus::InsertionOp::new(
            inner,
            ins_positions,
            (0..t1).map(|_| self.ket(q)).collect(),
        )
        .expect("valid positions");
        let del = crate::kraus::DeletionOp::new(
            inner,
            del_positions,
            (0..t2).map(|_| self.ket(q)).collect(),
        )
        .expect("valid positions");
        crate::word::decompose_multi(&ins)
            .compose(&crate::word::decompose_multi_deletion(&del))
            .expect("blocks chain")
    }

    /// Random well-formed word from a random walk over letter kinds, with the
    /// register exponent kept inside `[0, max_exp]`.
    pub fn arbitrary_word(
        &mut self,
        sites_in: usize,
        len: usize,
        q: usize,
        max_exp: usize,
    ) -> KrausWord {
        let mut exp = sites_in;
        let mut letters_app_order: Vec<Letter> = Vec::with_capacity(len);
        for _ in 0..len {
            let can_delete = exp >= 1;
            let can_insert = exp < max_exp;
            let insert = match (can_insert, can_delete) {
                (true, true) => self.range(0, 1) == 0,
                (true, false) => true,
                (false, true) => false,
                (false, false) => break,
            };
            if insert {
                let p = self.range(1, exp + 1);
                letters_app_order
                    .push(Letter::insertion(exp, p, self.ket(q)).expect("valid position"));
                exp += 1;
            } else {
                let p = self.range(1, exp);
                letters_app_order
                    .push(Letter::deletion(exp - 1, p, self.ket(q)).expect("valid position"));
                exp -= 1;
            }
        }
        letters_app_order.reverse();
        KrausWord::new(c64(1.0, 0.0), letters_app_order, sites_in).expect("chained by walk")
    }

    /// Random unit vector supported on the code subspace.
    pub fn code_state(&mut self, code: &QuantumCode) -> Ket {
        loop {
            let coeffs: Vec<Complex64> = (0..code.dimension())
                .map(|_| self.complex_normal())
                .collect();
            let mut v = Ket::zeros(code.codewords()[0].dim());
            for (c, w) in coeffs.iter().zip(code.codewords()) {
                v = v.add(&w.scale(*c)).expect("same dims");
            }
            if let Ok(unit) = v.normalized() {
                return unit;
            }
        }
    }

    /// Random mixed state supported on the code subspace.
    pub fn code_density(&mut self, code: &QuantumCode) -> DensityMatrix {
        let k = code.dimension() + 1;
        let probs = self.probabilities(k);
        let dim = code.codewords()[0].dim();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for &p in &probs {
            let v = self.code_state(code);
            m = m.add(&v.outer(&v).scale(c64(p, 0.0))).expect("same dims");
        }
        DensityMatrix::new(code.q(), code.sites(), m).expect("shape by construction")
    }

    /// Random orthonormal `d`-set in dimension `dim`, as a code.
    pub fn random_code(&mut self, label: &str, q: usize, sites: usize, d: usize) -> QuantumCode {
        let dim = q.pow(sites as u32);
        assert!(d <= dim);
        loop {
            let u = self.unitary(dim);
            let words: Vec<Ket> = (0..d).map(|i| u.column(i)).collect();
            if let Ok(code) = QuantumCode::new(label, q, sites, words) {
                return code;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::NumericPolicy;

    #[test]
    fn same_seed_reproduces_values() {
        let mut a = Sampler::new(7);
        let mut b = Sampler::new(7);
        for _ in 0..16 {
            assert_eq!(a.complex_normal(), b.complex_normal());
        }
    }

    #[test]
    fn streams_are_independent() {
        let mut a = Sampler::derive(7, 1);
        let mut b = Sampler::derive(7, 2);
        let xs: Vec<Complex64> = (0..8).map(|_| a.complex_normal()).collect();
        let ys: Vec<Complex64> = (0..8).map(|_| b.complex_normal()).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn unitary_is_unitary() {
        let mut s = Sampler::new(3);
        for dim in [2, 3, 5] {
            let u = s.unitary(dim);
            let gram = u.dagger().mul(&u).unwrap();
            assert!(gram.max_abs_diff(&ComplexMatrix::identity(dim)) < 1e-12);
        }
    }

    #[test]
    fn random_density_is_valid() {
        let mut s = Sampler::new(4);
        let policy = NumericPolicy::default();
        for _ in 0..4 {
            let rho = s.density(2, 2);
            let check = rho.check(&policy).unwrap();
            assert!(check.is_valid(&policy), "{check:?}");
        }
    }

    #[test]
    fn insdel_word_has_expected_shape() {
        let mut s = Sampler::new(5);
        let w = s.insdel_word(4, 2, 1, 2);
        assert_eq!(w.sites_in(), 4);
        assert_eq!(w.sites_out(), 5);
        assert_eq!(w.len(), 3);
    }

    #[test]
    fn arbitrary_word_is_well_formed() {
        let mut s = Sampler::new(6);
        for _ in 0..32 {
            let w = s.arbitrary_word(2, 6, 2, 5);
            assert!(w.materialize(2).is_ok());
        }
    }

    #[test]
    fn code_density_is_supported_on_code() {
        let mut s = Sampler::new(8);
        let code = s.random_code("rand", 2, 3, 2);
        let rho = s.code_density(&code);
        let p = code.projector();
        let projected = p.mul(rho.matrix()).unwrap().mul(&p).unwrap();
        assert!(projected.max_abs_diff(rho.matrix()) < 1e-12);
    }
}
