//! Dense state-vector simulation over `2^N` computational basis amplitudes.
//!
//! Strings act on basis states through their bitmasks:
//! `P |b> = i^{#Y} (-1)^{popcount(b & z)} |b ^ x>`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum, Phase, PhasedString};
use crate::scalar::{cplx, creal, czero, Cplx, Real};

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 24;

/// Dense `N`-qubit pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState<T: Real> {
    n_sites: usize,
    amplitudes: Vec<Cplx<T>>,
}

fn check_qubits(n_sites: usize) -> Result<()> {
    if n_sites == 0 || n_sites > MAX_QUBITS {
        Err(Error::Domain(format!("n_sites = {n_sites} must lie in 1..={MAX_QUBITS}")))
    } else {
        Ok(())
    }
}

#[inline]
fn sign_of(b: usize, z: u64) -> bool {
    (b as u64 & z).count_ones() % 2 == 1
}

impl<T: Real> QuantumState<T> {
    /// Computational basis state `|i>`.
    pub fn basis_state(index: usize, n_sites: usize) -> Result<Self> {
        check_qubits(n_sites)?;
        let dim = 1usize << n_sites;
        if index >= dim {
            return Err(Error::Domain(format!("basis index {index} out of range for {n_sites} sites")));
        }
        let mut amplitudes = vec![czero(); dim];
        amplitudes[index] = creal(T::one());
        Ok(Self { n_sites, amplitudes })
    }

    /// Wraps raw amplitudes; they must have length `2^n_sites` and unit norm.
    pub fn from_amplitudes(n_sites: usize, amplitudes: Vec<Cplx<T>>) -> Result<Self> {
        check_qubits(n_sites)?;
        if amplitudes.len() != 1usize << n_sites {
            return Err(Error::Domain(format!(
                "{} amplitudes given for {n_sites} sites",
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|a| !a.re.finite() || !a.im.finite()) {
            return Err(Error::NonFinite("state amplitudes".into()));
        }
        let state = Self { n_sites, amplitudes };
        let norm = state.norm();
        if (norm - T::one()).abs() > T::lit(1e-6) {
            return Err(Error::Domain(format!("state norm {norm} is not 1")));
        }
        Ok(state)
    }

    /// Normalizes arbitrary nonzero amplitudes into a state.
    pub fn normalized(n_sites: usize, mut amplitudes: Vec<Cplx<T>>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).fold(T::zero(), |s, x| s + x).sqrt();
        if !(norm > T::zero()) || !norm.finite() {
            return Err(Error::Numerical(format!("cannot normalize vector of norm {norm}")));
        }
        for a in &mut amplitudes {
            *a = a.unscale(norm);
        }
        Self::from_amplitudes(n_sites, amplitudes)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Cplx<T>] {
        &self.amplitudes
    }

    pub fn norm(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).fold(T::zero(), |s, x| s + x).sqrt()
    }

    pub fn renormalize(&mut self) -> Result<()> {
        let norm = self.norm();
        if !(norm > T::zero()) || !norm.finite() {
            return Err(Error::Numerical(format!("state norm {norm} cannot be renormalized")));
        }
        for a in &mut self.amplitudes {
            *a = a.unscale(norm);
        }
        Ok(())
    }

    /// Largest imaginary part among the amplitudes.
    pub fn max_imag(&self) -> T {
        self.amplitudes.iter().fold(T::zero(), |m, a| m.max(a.im.abs()))
    }

    pub fn is_real(&self, tol: T) -> bool {
        self.max_imag() <= tol
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Cplx<T>> {
        self.check_sites(other.n_sites)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(czero(), |s, (a, b)| s + a.conj() * b))
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_sites(&self, n: usize) -> Result<()> {
        if n != self.n_sites {
            Err(Error::SizeMismatch { expected: self.n_sites, found: n })
        } else {
            Ok(())
        }
    }

    /// Returns `P |self>` without a global phase.
    fn string_image(&self, p: &PauliString) -> Vec<Cplx<T>> {
        let (x, z) = (p.x_mask() as usize, p.z_mask());
        let y_phase = Phase::i_pow(p.y_count()).to_complex::<T>();
        let mut out = vec![czero(); self.dim()];
        for (b, a) in self.amplitudes.iter().enumerate() {
            let v = if sign_of(b, z) { -*a } else { *a };
            out[b ^ x] = v * y_phase;
        }
        out
    }

    pub fn apply_phased_string(&mut self, ps: &PhasedString) -> Result<()> {
        self.check_sites(ps.string.n_sites())?;
        let phase = ps.phase.to_complex::<T>();
        self.amplitudes = self.string_image(&ps.string).into_iter().map(|a| a * phase).collect();
        Ok(())
    }

    pub fn apply_string(&mut self, p: &PauliString) -> Result<()> {
        self.apply_phased_string(&PhasedString::from(*p))
    }

    /// Applies `exp(-i theta P) = cos(theta) - i sin(theta) P` exactly.
    pub fn apply_rotation(&mut self, p: &PauliString, theta: T) -> Result<()> {
        self.check_sites(p.n_sites())?;
        if !theta.finite() {
            return Err(Error::NonFinite(format!("rotation angle {theta}")));
        }
        let (c, s) = (theta.cos(), theta.sin());
        let minus_i_sin = cplx(T::zero(), -s);
        let image = self.string_image(p);
        for (a, pa) in self.amplitudes.iter_mut().zip(image) {
            *a = a.scale(c) + pa * minus_i_sin;
        }
        Ok(())
    }

    /// `<self| P |self>` for a single string.
    pub fn expectation_string(&self, p: &PauliString) -> Result<Cplx<T>> {
        self.check_sites(p.n_sites())?;
        let (x, z) = (p.x_mask() as usize, p.z_mask());
        let mut acc = czero::<T>();
        for (b, a) in self.amplitudes.iter().enumerate() {
            let prod = self.amplitudes[b ^ x].conj() * a;
            acc = if sign_of(b, z) { acc - prod } else { acc + prod };
        }
        Ok(acc * Phase::i_pow(p.y_count()).to_complex::<T>())
    }

    pub fn expectation_phased(&self, ps: &PhasedString) -> Result<Cplx<T>> {
        Ok(self.expectation_string(&ps.string)? * ps.phase.to_complex::<T>())
    }

    /// `<self| O |self>`; real for Hermitian `O`.
    pub fn expectation(&self, op: &PauliSum<T>) -> Result<Cplx<T>> {
        self.check_sites(op.n_sites())?;
        op.terms().try_fold(czero(), |acc, (p, c)| Ok(acc + self.expectation_string(p)? * *c))
    }

    /// Real part of `<self| O |self>` for a Hermitian operator.
    pub fn expectation_real(&self, op: &PauliSum<T>) -> Result<T> {
        Ok(self.expectation(op)?.re)
    }

    /// Draws `shots` computational-basis outcomes from `|amplitude|^2`.
    ///
    /// The generator is ChaCha8 seeded with `seed` on stream `stream`, so any
    /// draw is reproducible from `(seed, stream)`.
    pub fn sample(&self, shots: usize, seed: u64, stream: u64) -> Result<ShotCounts> {
        if shots == 0 {
            return Err(Error::Domain("shots must be positive".into()));
        }
        let mut cumulative = Vec::with_capacity(self.dim());
        let mut total = 0.0f64;
        for p in self.probabilities() {
            total += p.as_f64();
            cumulative.push(total);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let u: f64 = rng.random::<f64>() * total;
            let idx = cumulative.partition_point(|&c| c <= u).min(self.dim() - 1);
            *counts.entry(idx as u64).or_insert(0u64) += 1;
        }
        Ok(ShotCounts { n_sites: self.n_sites, shots, counts, seed, stream })
    }

    /// Exact mean and variance of a diagonal observable's eigenvalue under `|amplitude|^2`.
    pub fn diagonal_moments(&self, op: &PauliSum<T>) -> Result<(T, T)> {
        let diag = DiagonalObservable::new(op)?;
        self.check_sites(op.n_sites())?;
        let (mut m1, mut m2) = (T::zero(), T::zero());
        for (b, p) in self.probabilities().into_iter().enumerate() {
            let v = diag.eigenvalue(b as u64);
            m1 += p * v;
            m2 += p * v * v;
        }
        Ok((m1, (m2 - m1 * m1).max(T::zero())))
    }
}

/// Sampled computational-basis outcomes. Keys are basis indices (bit `n` = site `n`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotCounts {
    pub n_sites: usize,
    pub shots: usize,
    pub counts: BTreeMap<u64, u64>,
    pub seed: u64,
    pub stream: u64,
}

impl ShotCounts {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Outcome as a bit string, site 0 first.
    pub fn bitstring(&self, outcome: u64) -> String {
        (0..self.n_sites).map(|n| if outcome >> n & 1 == 1 { '1' } else { '0' }).collect()
    }
}

/// Z/identity-only observable with real coefficients, evaluated on basis outcomes.
#[derive(Clone, Debug)]
pub struct DiagonalObservable<T: Real> {
    n_sites: usize,
    terms: Vec<(u64, T)>,
}

impl<T: Real> DiagonalObservable<T> {
    pub fn new(op: &PauliSum<T>) -> Result<Self> {
        if !op.is_diagonal() {
            return Err(Error::Contract(
                "shot estimation needs an observable built from I and Z letters only".into(),
            ));
        }
        let terms = op.real_terms()?.into_iter().map(|(p, c)| (p.z_mask(), c)).collect();
        Ok(Self { n_sites: op.n_sites(), terms })
    }

    pub fn eigenvalue(&self, outcome: u64) -> T {
        self.terms.iter().fold(T::zero(), |acc, &(z, c)| {
            if (outcome & z).count_ones() % 2 == 1 {
                acc - c
            } else {
                acc + c
            }
        })
    }

    /// Sample mean and the standard error of that mean.
    pub fn estimate(&self, counts: &ShotCounts) -> Result<(T, T)> {
        if counts.n_sites != self.n_sites {
            return Err(Error::SizeMismatch { expected: self.n_sites, found: counts.n_sites });
        }
        let shots = T::from_count(counts.shots);
        let (mut m1, mut m2) = (T::zero(), T::zero());
        for (&outcome, &n) in &counts.counts {
            let v = self.eigenvalue(outcome);
            let w = T::from_count(n as usize);
            m1 += w * v;
            m2 += w * v * v;
        }
        let mean = m1 / shots;
        let var = (m2 / shots - mean * mean).max(T::zero());
        Ok((mean, (var / shots).sqrt()))
    }
}

/// Counts-weighted average of the diagonal eigenvalues of `op`.
pub fn estimate_diagonal<T: Real>(counts: &ShotCounts, op: &PauliSum<T>) -> Result<T> {
    Ok(DiagonalObservable::new(op)?.estimate(counts)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model;
    use crate::pauli::Letter;
    use std::f64::consts::FRAC_PI_2;

    fn s(text: &str) -> PauliString {
        text.parse().unwrap()
    }

    #[test]
    fn basis_state_bit_convention() {
        let st = QuantumState::<f64>::basis_state(5, 4).unwrap();
        for (n, expect) in [(0, -1.0), (1, 1.0), (2, -1.0), (3, 1.0)] {
            let z = PauliString::single(4, n, Letter::Z).unwrap();
            assert_eq!(st.expectation_string(&z).unwrap().re, expect);
        }
        let all = QuantumState::<f64>::basis_state(15, 4).unwrap();
        let total: f64 = (0..4)
            .map(|n| all.expectation_string(&PauliString::single(4, n, Letter::Z).unwrap()).unwrap().re)
            .sum();
        assert_eq!(total, -4.0);
        assert!(QuantumState::<f64>::basis_state(16, 4).is_err());
    }

    #[test]
    fn x_on_site_zero_flips_bit_zero() {
        let mut st = QuantumState::<f64>::basis_state(0, 4).unwrap();
        st.apply_string(&s("XIII")).unwrap();
        assert_eq!(st, QuantumState::basis_state(1, 4).unwrap());
        let before = st.clone();
        st.apply_string(&s("IIII")).unwrap();
        assert_eq!(st, before);
    }

    #[test]
    fn z_rotation_by_half_pi_is_a_global_phase() {
        let mut st = QuantumState::<f64>::basis_state(0, 1).unwrap();
        st.apply_rotation(&s("Z"), FRAC_PI_2).unwrap();
        assert!((st.amplitudes()[0] - cplx(0.0, -1.0)).norm() < 1e-15);
        let mut id = QuantumState::<f64>::basis_state(3, 2).unwrap();
        id.apply_rotation(&s("XY"), 0.0).unwrap();
        assert_eq!(id, QuantumState::basis_state(3, 2).unwrap());
        assert!(matches!(id.apply_rotation(&s("XY"), f64::NAN), Err(Error::NonFinite(_))));
    }

    #[test]
    fn staggered_mass_expectations() {
        let h2 = model::build_h2::<f64>(4).unwrap();
        let zero = QuantumState::<f64>::basis_state(0, 4).unwrap();
        assert_eq!(zero.expectation_real(&h2).unwrap(), 0.0);
        // |0101> read site 3..0: sites 0 and 2 are flipped (index 0b0101 = 5).
        let alt = QuantumState::<f64>::basis_state(5, 4).unwrap();
        assert_eq!(alt.expectation_real(&h2).unwrap(), 2.0);
    }

    #[test]
    fn size_mismatches() {
        let mut st = QuantumState::<f64>::basis_state(0, 2).unwrap();
        assert!(matches!(st.apply_string(&s("XXX")), Err(Error::SizeMismatch { .. })));
        assert!(st.expectation_string(&s("X")).is_err());
    }

    #[test]
    fn basis_state_sampling_is_exact() {
        let st = QuantumState::<f64>::basis_state(6, 4).unwrap();
        let counts = st.sample(1024, 7, 0).unwrap();
        assert_eq!(counts.counts.len(), 1);
        assert_eq!(counts.counts[&6], 1024);
        assert_eq!(counts.bitstring(6), "0110");
        let h2 = model::build_h2::<f64>(4).unwrap();
        assert_eq!(estimate_diagonal(&counts, &h2).unwrap(), st.expectation_real(&h2).unwrap());
    }

    #[test]
    fn sampling_rejects_offdiagonal_observable() {
        let st = QuantumState::<f64>::basis_state(0, 2).unwrap();
        let counts = st.sample(8, 1, 0).unwrap();
        let x = PauliSum::from_real_terms(2, [(s("XI"), 1.0)]).unwrap();
        assert!(matches!(estimate_diagonal(&counts, &x), Err(Error::Contract(_))));
        assert!(st.sample(0, 1, 0).is_err());
    }

    #[test]
    fn uniform_superposition_z_average_vanishes() {
        let amp = creal(0.5f64);
        let st = QuantumState::from_amplitudes(2, vec![amp; 4]).unwrap();
        let z0 = PauliSum::from_real_terms(2, [(s("ZI"), 1.0)]).unwrap();
        let counts = st.sample(200_000, 3, 0).unwrap();
        assert!(estimate_diagonal::<f64>(&counts, &z0).unwrap().abs() < 0.01);
    }

    #[test]
    fn same_seed_same_counts() {
        let amp = creal(0.5f64);
        let st = QuantumState::from_amplitudes(2, vec![amp; 4]).unwrap();
        assert_eq!(st.sample(100, 9, 4).unwrap(), st.sample(100, 9, 4).unwrap());
        assert_ne!(st.sample(100, 9, 4).unwrap(), st.sample(100, 9, 5).unwrap());
    }

    #[test]
    fn f32_state_runs() {
        let mut st = QuantumState::<f32>::basis_state(0, 3).unwrap();
        st.apply_rotation(&s("YII"), 0.3).unwrap();
        assert!((st.norm() - 1.0).abs() < 1e-6);
    }
}
