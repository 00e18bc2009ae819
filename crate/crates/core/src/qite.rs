//! Quantum imaginary-time evolution.
//!
//! One step replaces the non-unitary `e^{-dbeta H}` by a unitary
//! `e^{-i A dbeta}` with `A = sum_j a_j sigma_j` over an operator pool. The
//! coefficients solve `(S + S^T) a = b` where
//!
//! * `(S + S^T)_{j1 j2} = <phi| sigma_j1 sigma_j2 + sigma_j2 sigma_j1 |phi>`
//! * `b_j = sum_j' h_j' <phi| -i (sigma_j sigma_j' - sigma_j' sigma_j) |phi> / sqrt(C)`
//!
//! and `H = sum_j' h_j' sigma_j'`. The unitary is applied as a first-order
//! Trotter product over the kept pool strings in ascending packed-index order,
//! repeated `t` times.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::oracle::{self, SpectralData};
use crate::pauli::{self, PauliString, PauliSum, PhasedString, SiteTables};
use crate::scalar::{Cplx, Real};
use crate::statevector::{DiagonalObservable, QuantumState};

/// Tolerance for treating a state as real-amplitude.
pub const REAL_STATE_TOL: f64 = 1e-8;

/// Which Pauli strings may appear in the generator `A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PoolKind {
    /// Strings with an odd number of `Y` letters; lossless for real states and real `H`.
    OddY,
    /// Every non-identity string.
    FullMinusIdentity,
}

impl PoolKind {
    pub fn name(self) -> &'static str {
        match self {
            PoolKind::OddY => "odd-y",
            PoolKind::FullMinusIdentity => "full",
        }
    }
}

impl std::str::FromStr for PoolKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "odd-y" => Ok(PoolKind::OddY),
            "full" | "full-minus-identity" => Ok(PoolKind::FullMinusIdentity),
            other => Err(Error::Domain(format!("unknown pool kind {other:?}"))),
        }
    }
}

/// Ordered pool of generator strings with its pairwise products cached.
#[derive(Clone, Debug)]
pub struct OperatorPool {
    kind: PoolKind,
    n_sites: usize,
    strings: Vec<PauliString>,
    // Upper triangle, row-major: (a, b) for a <= b.
    products: Vec<PhasedString>,
}

impl OperatorPool {
    pub fn new(kind: PoolKind, n_sites: usize) -> Result<Self> {
        if n_sites == 0 || n_sites > 8 {
            return Err(Error::Resource(format!("operator pool for {n_sites} sites is too large")));
        }
        let strings = (1..1u64 << (2 * n_sites))
            .map(|j| PauliString::from_index(j, n_sites))
            .filter(|p| match (kind, p) {
                (PoolKind::OddY, Ok(p)) => p.y_count() % 2 == 1,
                _ => true,
            })
            .collect::<Result<Vec<_>>>()?;
        Self::build(kind, n_sites, strings)
    }

    fn build(kind: PoolKind, n_sites: usize, strings: Vec<PauliString>) -> Result<Self> {
        let mut products = Vec::with_capacity(strings.len() * (strings.len() + 1) / 2);
        for (a, pa) in strings.iter().enumerate() {
            for pb in &strings[a..] {
                products.push(pauli::multiply(pa, pb)?);
            }
        }
        Ok(Self { kind, n_sites, strings, products })
    }

    /// Expected odd-Y pool size: `(4^N - 2^N) / 2`.
    pub fn odd_y_size(n_sites: usize) -> usize {
        ((1usize << (2 * n_sites)) - (1usize << n_sites)) / 2
    }

    pub fn kind(&self) -> PoolKind {
        self.kind
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn strings(&self) -> &[PauliString] {
        &self.strings
    }

    fn product(&self, a: usize, b: usize) -> &PhasedString {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let n = self.strings.len();
        &self.products[a * n - a * (a + 1) / 2 + b]
    }
}

fn check_state<T: Real>(state: &QuantumState<T>, pool: &OperatorPool) -> Result<()> {
    if state.n_sites() != pool.n_sites {
        return Err(Error::SizeMismatch { expected: pool.n_sites, found: state.n_sites() });
    }
    if pool.kind == PoolKind::OddY && !state.is_real(T::lit(REAL_STATE_TOL)) {
        return Err(Error::Contract(format!(
            "odd-Y pool needs a real-amplitude state (max |imag| = {})",
            state.max_imag()
        )));
    }
    Ok(())
}

/// `(S + S^T)` with entries `<phi| {sigma_a, sigma_b} |phi>`.
pub fn build_gram<T: Real>(state: &QuantumState<T>, pool: &OperatorPool) -> Result<DMatrix<T>> {
    check_state(state, pool)?;
    let n = pool.len();
    let two = T::lit(2.0);
    let mut gram = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let ps = pool.product(a, b);
            // Anticommuting pairs (imaginary phase) have a vanishing anticommutator.
            let v = if ps.phase.is_real() { two * state.expectation_phased(ps)?.re } else { T::zero() };
            gram[(a, b)] = v;
            gram[(b, a)] = v;
        }
    }
    Ok(gram)
}

/// The same matrix built from the `P1 P2 + (P1 P2)^T` reduction formula.
///
/// Equals [`build_gram`] on real-amplitude states when every product
/// `sigma_a sigma_b` is a real matrix, which holds for the odd-Y pool.
pub fn build_gram_transpose_route<T: Real>(
    tables: &SiteTables,
    state: &QuantumState<T>,
    pool: &OperatorPool,
) -> Result<DMatrix<Cplx<T>>> {
    if state.n_sites() != pool.n_sites {
        return Err(Error::SizeMismatch { expected: pool.n_sites, found: state.n_sites() });
    }
    let n = pool.len();
    let mut gram = DMatrix::from_element(n, n, crate::scalar::czero());
    for a in 0..n {
        for b in 0..n {
            let op = pauli::sym_transpose_product_with::<T>(tables, &pool.strings[a], &pool.strings[b])?;
            gram[(a, b)] = state.expectation(&op)?;
        }
    }
    Ok(gram)
}

fn check_weight<T: Real>(c_step: T) -> Result<()> {
    if !c_step.finite() || c_step <= T::zero() {
        Err(Error::Domain(format!("step weight C = {c_step} must be positive")))
    } else {
        Ok(())
    }
}

/// `b_j = sum_j' h_j' <phi| -i [sigma_j, sigma_j'] |phi> / sqrt(C)`.
pub fn build_rhs<T: Real>(
    state: &QuantumState<T>,
    pool: &OperatorPool,
    ah: &PauliSum<T>,
    c_step: T,
) -> Result<DVector<T>> {
    check_state(state, pool)?;
    check_weight(c_step)?;
    let h = ah.real_terms()?;
    let scale = T::one() / c_step.sqrt();
    let mut b = DVector::zeros(pool.len());
    for (j, sigma) in pool.strings.iter().enumerate() {
        let mut acc = T::zero();
        for (hp, hc) in &h {
            let comm = pauli::minus_i_commutator::<T>(sigma, hp)?;
            acc += *hc * state.expectation(&comm)?.re;
        }
        b[j] = acc * scale;
    }
    Ok(b)
}

/// Minimum-norm least-squares solution and its residual norm.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution<T: Real> {
    pub a: DVector<T>,
    pub residual: T,
    pub rank: usize,
}

/// Solves `gram a = b` by SVD, dropping singular values below `cutoff * max`.
pub fn solve<T: Real>(gram: &DMatrix<T>, b: &DVector<T>, cutoff: T) -> Result<Solution<T>> {
    if !gram.is_square() || gram.nrows() != b.len() {
        return Err(Error::Domain(format!(
            "system is {}x{} with right-hand side of length {}",
            gram.nrows(),
            gram.ncols(),
            b.len()
        )));
    }
    if gram.iter().chain(b.iter()).any(|v| !v.finite()) {
        return Err(Error::NonFinite("linear system entries".into()));
    }
    if b.is_empty() {
        return Ok(Solution { a: DVector::zeros(0), residual: T::zero(), rank: 0 });
    }
    let svd = gram.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if smax == T::zero() {
        return Ok(Solution { a: DVector::zeros(b.len()), residual: b.norm(), rank: 0 });
    }
    let eps = smax * cutoff;
    let rank = svd.singular_values.iter().filter(|s| **s > eps).count();
    let a = svd.solve(b, eps).map_err(|e| Error::Numerical(e.to_string()))?;
    let residual = (gram * &a - b).norm();
    Ok(Solution { a, residual, rank })
}

/// How the per-step weight `C` is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CMode {
    /// `1 - 2 dbeta <H>`; fails when non-positive.
    Linear,
    /// `exp(-2 dbeta <H>)`.
    Exponential,
    /// `||e^{-dbeta H} phi||^2` from the exact spectrum.
    ExactNorm,
}

impl CMode {
    pub fn name(self) -> &'static str {
        match self {
            CMode::Linear => "linear",
            CMode::Exponential => "exponential",
            CMode::ExactNorm => "exact-norm",
        }
    }
}

impl std::str::FromStr for CMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(CMode::Linear),
            "exponential" | "exp" => Ok(CMode::Exponential),
            "exact-norm" | "exact" => Ok(CMode::ExactNorm),
            other => Err(Error::Domain(format!("unknown weight mode {other:?}"))),
        }
    }
}

/// Normalization of the right-hand side `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RhsScaling {
    /// Divide the commutator expectations by `sqrt(C)`.
    InverseSqrtC,
    /// Leave them unscaled; the step then follows the normalized imaginary-time flow.
    Unit,
}

impl RhsScaling {
    pub fn name(self) -> &'static str {
        match self {
            RhsScaling::InverseSqrtC => "inverse-sqrt-c",
            RhsScaling::Unit => "unit",
        }
    }
}

impl std::str::FromStr for RhsScaling {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inverse-sqrt-c" => Ok(RhsScaling::InverseSqrtC),
            "unit" => Ok(RhsScaling::Unit),
            other => Err(Error::Domain(format!("unknown rhs scaling {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QiteOptions<T: Real> {
    pub dbeta: T,
    pub trotter_steps: usize,
    /// Coefficients with `|a_j| <= threshold` are dropped before the unitary.
    pub threshold: T,
    pub c_mode: CMode,
    pub rhs_scaling: RhsScaling,
    /// Relative singular-value cutoff of the linear solve.
    pub svd_cutoff: T,
}

impl<T: Real> Default for QiteOptions<T> {
    fn default() -> Self {
        Self {
            dbeta: T::lit(0.25),
            trotter_steps: 10,
            threshold: T::lit(0.001),
            c_mode: CMode::ExactNorm,
            rhs_scaling: RhsScaling::Unit,
            svd_cutoff: T::lit(1e-8),
        }
    }
}

impl<T: Real> QiteOptions<T> {
    pub fn validate(&self) -> Result<()> {
        if !self.dbeta.finite() || self.dbeta < T::zero() {
            return Err(Error::Domain(format!("dbeta = {} must be non-negative", self.dbeta)));
        }
        if self.trotter_steps == 0 {
            return Err(Error::Domain("trotter steps must be at least 1".into()));
        }
        if !self.threshold.finite() || self.threshold < T::zero() {
            return Err(Error::Domain(format!("threshold = {} must be non-negative", self.threshold)));
        }
        if !self.svd_cutoff.finite() || self.svd_cutoff < T::zero() {
            return Err(Error::Domain(format!("svd cutoff = {} must be non-negative", self.svd_cutoff)));
        }
        Ok(())
    }
}

/// Output of one imaginary-time step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord<T: Real> {
    /// Truncated generator coefficients, one per pool string.
    pub a: Vec<T>,
    pub c_step: T,
    /// `<phi|aH|phi>` before the step.
    pub energy: T,
    pub kept_terms: usize,
    pub residual: T,
}

/// Anything that advances a state by one imaginary-time step.
pub trait Propagator<T: Real>: Sync {
    fn n_sites(&self) -> usize;
    fn dbeta(&self) -> T;
    fn real_preserving(&self) -> bool {
        true
    }
    fn step(&self, state: &QuantumState<T>) -> Result<(QuantumState<T>, StepRecord<T>)>;
}

/// QITE propagator for a fixed Hamiltonian and pool.
#[derive(Clone, Debug)]
pub struct Qite<T: Real> {
    ah: PauliSum<T>,
    pool: OperatorPool,
    // For each pool string: the nonzero terms of sum_j' h_j' (-i [sigma_j, sigma_j']).
    rhs_table: Vec<Vec<(PauliString, T)>>,
    spectrum: Option<SpectralData<T>>,
    options: QiteOptions<T>,
}

impl<T: Real> Qite<T> {
    pub fn new(ah: PauliSum<T>, pool: OperatorPool, options: QiteOptions<T>) -> Result<Self> {
        options.validate()?;
        if ah.n_sites() != pool.n_sites() {
            return Err(Error::SizeMismatch { expected: pool.n_sites(), found: ah.n_sites() });
        }
        let h = ah.real_terms()?;
        let mut rhs_table = Vec::with_capacity(pool.len());
        for sigma in pool.strings() {
            let mut acc = PauliSum::zero(ah.n_sites());
            for (hp, hc) in &h {
                acc = acc + pauli::minus_i_commutator::<T>(sigma, hp)?.scale_real(*hc);
            }
            rhs_table.push(acc.real_terms()?);
        }
        let spectrum = match options.c_mode {
            CMode::ExactNorm => Some(SpectralData::of(&ah)?),
            _ => None,
        };
        Ok(Self { ah, pool, rhs_table, spectrum, options })
    }

    pub fn with_defaults(ah: PauliSum<T>) -> Result<Self> {
        let pool = OperatorPool::new(PoolKind::OddY, ah.n_sites())?;
        Self::new(ah, pool, QiteOptions::default())
    }

    pub fn hamiltonian(&self) -> &PauliSum<T> {
        &self.ah
    }

    pub fn pool(&self) -> &OperatorPool {
        &self.pool
    }

    pub fn options(&self) -> &QiteOptions<T> {
        &self.options
    }

    /// Table-driven right-hand side with an explicit `1/sqrt(C)` factor.
    pub fn rhs(&self, state: &QuantumState<T>, c_step: T) -> Result<DVector<T>> {
        check_state(state, &self.pool)?;
        check_weight(c_step)?;
        let scale = T::one() / c_step.sqrt();
        let mut b = DVector::zeros(self.pool.len());
        for (j, terms) in self.rhs_table.iter().enumerate() {
            let mut acc = T::zero();
            for (p, c) in terms {
                acc += *c * state.expectation_string(p)?.re;
            }
            b[j] = acc * scale;
        }
        Ok(b)
    }

    fn step_weight(&self, state: &QuantumState<T>, energy: T) -> Result<T> {
        let dbeta = self.options.dbeta;
        let two = T::lit(2.0);
        match self.options.c_mode {
            CMode::Linear => {
                let c = T::one() - two * dbeta * energy;
                if c <= T::zero() {
                    Err(Error::NonPositiveWeight { c: c.as_f64(), energy: energy.as_f64() })
                } else {
                    Ok(c)
                }
            }
            CMode::Exponential => Ok((-(two * dbeta * energy)).exp()),
            CMode::ExactNorm => {
                let spectrum = self.spectrum.as_ref().expect("spectrum built for exact-norm mode");
                Ok(oracle::exact_imaginary_time_state(spectrum, state, dbeta)?.1)
            }
        }
    }

    /// Applies `(prod_j exp(-i a_j dbeta/t sigma_j))^t` over the nonzero `a_j`.
    pub fn apply_generator(&self, state: &mut QuantumState<T>, a: &[T]) -> Result<()> {
        let t = self.options.trotter_steps;
        let factor = self.options.dbeta / T::from_count(t);
        let kept: Vec<(&PauliString, T)> = self
            .pool
            .strings()
            .iter()
            .zip(a)
            .filter(|(_, aj)| **aj != T::zero())
            .map(|(p, aj)| (p, *aj * factor))
            .collect();
        for _ in 0..t {
            for (p, theta) in &kept {
                state.apply_rotation(p, *theta)?;
            }
        }
        Ok(())
    }
}

impl<T: Real> Propagator<T> for Qite<T> {
    fn n_sites(&self) -> usize {
        self.ah.n_sites()
    }

    fn dbeta(&self) -> T {
        self.options.dbeta
    }

    fn real_preserving(&self) -> bool {
        self.pool.kind() == PoolKind::OddY
    }

    fn step(&self, state: &QuantumState<T>) -> Result<(QuantumState<T>, StepRecord<T>)> {
        let energy = state.expectation_real(&self.ah)?;
        let opts = &self.options;
        if opts.dbeta == T::zero() {
            let record = StepRecord {
                a: vec![T::zero(); self.pool.len()],
                c_step: T::one(),
                energy,
                kept_terms: 0,
                residual: T::zero(),
            };
            return Ok((state.clone(), record));
        }
        let c_step = self.step_weight(state, energy)?;
        let gram = build_gram(state, &self.pool)?;
        let rhs_c = match opts.rhs_scaling {
            RhsScaling::InverseSqrtC => c_step,
            RhsScaling::Unit => T::one(),
        };
        let b = self.rhs(state, rhs_c)?;
        let sol = solve(&gram, &b, opts.svd_cutoff)?;
        let a: Vec<T> = sol
            .a
            .iter()
            .map(|&aj| if aj.abs() > opts.threshold { aj } else { T::zero() })
            .collect();
        if a.iter().any(|v| !v.finite()) {
            return Err(Error::Numerical(format!("non-finite generator coefficients at energy {energy}")));
        }
        let kept_terms = a.iter().filter(|v| **v != T::zero()).count();
        let mut next = state.clone();
        self.apply_generator(&mut next, &a)?;
        next.renormalize()?;
        Ok((next, StepRecord { a, c_step, energy, kept_terms, residual: sol.residual }))
    }
}

/// Exact imaginary-time propagation through the dense spectrum.
#[derive(Clone, Debug)]
pub struct ExactPropagator<T: Real> {
    ah: PauliSum<T>,
    spectrum: SpectralData<T>,
    dbeta: T,
}

impl<T: Real> ExactPropagator<T> {
    pub fn new(ah: PauliSum<T>, dbeta: T) -> Result<Self> {
        if !dbeta.finite() || dbeta < T::zero() {
            return Err(Error::Domain(format!("dbeta = {dbeta} must be non-negative")));
        }
        let spectrum = SpectralData::of(&ah)?;
        Ok(Self { ah, spectrum, dbeta })
    }
}

impl<T: Real> Propagator<T> for ExactPropagator<T> {
    fn n_sites(&self) -> usize {
        self.ah.n_sites()
    }

    fn dbeta(&self) -> T {
        self.dbeta
    }

    fn step(&self, state: &QuantumState<T>) -> Result<(QuantumState<T>, StepRecord<T>)> {
        let energy = state.expectation_real(&self.ah)?;
        let (next, c_step) = oracle::exact_imaginary_time_state(&self.spectrum, state, self.dbeta)?;
        let record = StepRecord { a: Vec::new(), c_step, energy, kept_terms: 0, residual: T::zero() };
        Ok((next, record))
    }
}

/// How the per-step observables `O_i` are read off the evolved state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measurement {
    Exact,
    /// Computational-basis sampling; observables must be diagonal.
    Shots { shots: usize, seed: u64 },
}

impl Measurement {
    pub fn name(&self) -> &'static str {
        match self {
            Measurement::Exact => "exact",
            Measurement::Shots { .. } => "shots",
        }
    }
}

/// Shot-sampling stream for step `k` of the trajectory tagged `stream_base`.
pub fn sample_stream(stream_base: u64, k: usize) -> u64 {
    (stream_base << 12) | (k as u64 & 0xfff)
}

/// A chain of imaginary-time steps from one initial state.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T: Real> {
    pub initial_index: Option<usize>,
    pub records: Vec<StepRecord<T>>,
    /// `C_phi` after each step: the running product of the step weights.
    pub cumulative_weights: Vec<T>,
    /// `observables[o][k-1]` is observable `o` after `k` steps.
    pub observables: Vec<Vec<T>>,
    /// Shot standard error of each entry of `observables` (zero in exact mode).
    pub stderr: Vec<Vec<T>>,
    /// Largest imaginary amplitude seen along the trajectory.
    pub max_imag: T,
    pub final_state: QuantumState<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn steps(&self) -> usize {
        self.records.len()
    }
}

/// Runs `k_steps` steps from `initial`, recording weights and observables after every step.
pub fn run_trajectory<T: Real, P: Propagator<T> + ?Sized>(
    propagator: &P,
    initial: QuantumState<T>,
    observables: &[PauliSum<T>],
    k_steps: usize,
    measurement: Measurement,
    stream_base: u64,
) -> Result<Trajectory<T>> {
    if k_steps == 0 {
        return Err(Error::Domain("a trajectory needs at least one step".into()));
    }
    if k_steps > 0xfff {
        return Err(Error::Domain(format!("{k_steps} steps exceed the sampler stream layout")));
    }
    let diagonal = match measurement {
        Measurement::Exact => None,
        Measurement::Shots { shots, .. } => {
            if shots == 0 {
                return Err(Error::Domain("shots must be positive".into()));
            }
            Some(observables.iter().map(DiagonalObservable::new).collect::<Result<Vec<_>>>()?)
        }
    };
    let mut state = initial;
    let mut weight = T::one();
    let mut max_imag = state.max_imag();
    let mut records = Vec::with_capacity(k_steps);
    let mut cumulative_weights = Vec::with_capacity(k_steps);
    let mut values = vec![Vec::with_capacity(k_steps); observables.len()];
    let mut errors = vec![Vec::with_capacity(k_steps); observables.len()];
    for k in 1..=k_steps {
        let (next, record) = propagator.step(&state).map_err(|e| Error::AtStep { k, source: Box::new(e) })?;
        weight *= record.c_step;
        if !weight.finite() || weight <= T::zero() {
            return Err(Error::Numerical(format!("cumulative weight {weight} after step {k}")));
        }
        state = next;
        max_imag = max_imag.max(state.max_imag());
        match (&diagonal, measurement) {
            (Some(diag), Measurement::Shots { shots, seed }) => {
                let counts = state.sample(shots, seed, sample_stream(stream_base, k))?;
                for (o, d) in diag.iter().enumerate() {
                    let (mean, se) = d.estimate(&counts)?;
                    values[o].push(mean);
                    errors[o].push(se);
                }
            }
            _ => {
                for (o, op) in observables.iter().enumerate() {
                    values[o].push(state.expectation_real(op)?);
                    errors[o].push(T::zero());
                }
            }
        }
        cumulative_weights.push(weight);
        records.push(record);
    }
    Ok(Trajectory {
        initial_index: None,
        records,
        cumulative_weights,
        observables: values,
        stderr: errors,
        max_imag,
        final_state: state,
    })
}

/// [`run_trajectory`] from the computational basis state `|index>`.
pub fn run_trajectory_from_basis<T: Real, P: Propagator<T> + ?Sized>(
    propagator: &P,
    index: usize,
    observables: &[PauliSum<T>],
    k_steps: usize,
    measurement: Measurement,
    stream_base: u64,
) -> Result<Trajectory<T>> {
    let initial = QuantumState::basis_state(index, propagator.n_sites())?;
    let mut traj = run_trajectory(propagator, initial, observables, k_steps, measurement, stream_base)?;
    traj.initial_index = Some(index);
    Ok(traj)
}
