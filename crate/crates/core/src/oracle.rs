//! Exact-diagonalization ground truth.
//!
//! Every Hamiltonian and observable here is real symmetric in the
//! computational basis, so the oracle works with dense real matrices and a
//! symmetric eigensolver.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::model::{self, ModelParams};
use crate::pauli::PauliSum;
use crate::scalar::{cplx, Real};
use crate::statevector::QuantumState;

/// Dense oracle dimension cap is `2^MAX_ORACLE_SITES`.
pub const MAX_ORACLE_SITES: usize = 12;

/// Temperature at which plateau steps are located.
pub const LOW_TEMPERATURE_BETA: f64 = 100.0;

/// Real-symmetric dense matrix of a Hermitian sum with no odd-Y content.
pub fn real_symmetric_matrix<T: Real>(op: &PauliSum<T>) -> Result<DMatrix<T>> {
    let m = op.to_matrix_capped(MAX_ORACLE_SITES)?;
    let tol = T::lit(1e-12);
    if m.iter().any(|c| c.im.abs() > tol) {
        return Err(Error::Contract("operator is not real in the computational basis".into()));
    }
    let re = m.map(|c| c.re);
    if (re.transpose() - &re).amax() > tol {
        return Err(Error::Contract("operator is not Hermitian".into()));
    }
    Ok(re)
}

/// Ascending eigenvalues with orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct SpectralData<T: Real> {
    pub eigenvalues: DVector<T>,
    pub eigenvectors: DMatrix<T>,
}

impl<T: Real> SpectralData<T> {
    pub fn of_matrix(m: DMatrix<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Domain("eigendecomposition needs a square matrix".into()));
        }
        let eig = SymmetricEigen::new(m);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).expect("finite"));
        let eigenvalues = DVector::from_iterator(order.len(), order.iter().map(|&k| eig.eigenvalues[k]));
        let eigenvectors = DMatrix::from_columns(
            &order.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect::<Vec<_>>(),
        );
        Ok(Self { eigenvalues, eigenvectors })
    }

    pub fn of(op: &PauliSum<T>) -> Result<Self> {
        Self::of_matrix(real_symmetric_matrix(op)?)
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn ground_energy(&self) -> T {
        self.eigenvalues[0]
    }

    /// `||H - V diag(lambda) V^T||` (max-abs entry) against a reference matrix.
    pub fn reconstruction_error(&self, m: &DMatrix<T>) -> T {
        let rebuilt = &self.eigenvectors
            * DMatrix::from_diagonal(&self.eigenvalues)
            * self.eigenvectors.transpose();
        (rebuilt - m).amax()
    }

    pub fn orthonormality_error(&self) -> T {
        let gram = self.eigenvectors.transpose() * &self.eigenvectors;
        (gram - DMatrix::identity(self.dim(), self.dim())).amax()
    }

    /// Boltzmann weights `exp(-beta (E_k - E_0))`, shifted by the ground energy.
    fn shifted_weights(&self, beta: T) -> DVector<T> {
        let e0 = self.ground_energy();
        self.eigenvalues.map(|e| (-(beta * (e - e0))).exp())
    }
}

/// Thermal expectations of fixed observables for one Hamiltonian.
///
/// Observables are projected on the eigenbasis once, so a whole temperature
/// grid costs one dot product per point.
#[derive(Clone, Debug)]
pub struct ThermalOracle<T: Real> {
    spectrum: SpectralData<T>,
    diagonals: Vec<DVector<T>>,
}

impl<T: Real> ThermalOracle<T> {
    pub fn new(ah: &PauliSum<T>, observables: &[PauliSum<T>]) -> Result<Self> {
        let spectrum = SpectralData::of(ah)?;
        let diagonals = observables
            .iter()
            .map(|o| {
                let m = real_symmetric_matrix(o)?;
                if m.nrows() != spectrum.dim() {
                    return Err(Error::SizeMismatch { expected: ah.n_sites(), found: o.n_sites() });
                }
                let v = &spectrum.eigenvectors;
                Ok((v.transpose() * m * v).diagonal())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { spectrum, diagonals })
    }

    pub fn spectrum(&self) -> &SpectralData<T> {
        &self.spectrum
    }

    /// `tr(e^{-beta H} O) / tr(e^{-beta H})` for observable `which`.
    pub fn expectation(&self, which: usize, beta: T) -> Result<T> {
        check_beta(beta)?;
        let w = self.spectrum.shifted_weights(beta);
        Ok(w.dot(&self.diagonals[which]) / w.sum())
    }

    /// Shifted partition function `tr e^{-beta (H - E_0)}`.
    pub fn partition_function(&self, beta: T) -> Result<T> {
        check_beta(beta)?;
        Ok(self.spectrum.shifted_weights(beta).sum())
    }
}

fn check_beta<T: Real>(beta: T) -> Result<()> {
    if !beta.finite() || beta < T::zero() {
        Err(Error::Domain(format!("beta = {beta} must be finite and non-negative")))
    } else {
        Ok(())
    }
}

/// Exact thermal expectation `tr(e^{-beta H} O) / tr(e^{-beta H})`.
pub fn thermal_expectation<T: Real>(ah: &PauliSum<T>, op: &PauliSum<T>, beta: T) -> Result<T> {
    ThermalOracle::new(ah, std::slice::from_ref(op))?.expectation(0, beta)
}

/// Normalized `e^{-dbeta H} |phi>` and its squared norm before normalization.
pub fn exact_imaginary_time_state<T: Real>(
    spectrum: &SpectralData<T>,
    phi: &QuantumState<T>,
    dbeta: T,
) -> Result<(QuantumState<T>, T)> {
    if phi.dim() != spectrum.dim() {
        return Err(Error::SizeMismatch { expected: spectrum.dim(), found: phi.dim() });
    }
    if !dbeta.finite() {
        return Err(Error::NonFinite(format!("dbeta = {dbeta}")));
    }
    let v = &spectrum.eigenvectors;
    let amps = phi.amplitudes();
    let re = DVector::from_iterator(amps.len(), amps.iter().map(|a| a.re));
    let im = DVector::from_iterator(amps.len(), amps.iter().map(|a| a.im));
    let decay = spectrum.eigenvalues.map(|e| (-(dbeta * e)).exp());
    let evolve = |x: DVector<T>| v * (v.transpose() * x).component_mul(&decay);
    let (re, im) = (evolve(re), evolve(im));
    let c = re.norm_squared() + im.norm_squared();
    let out: Vec<_> = re.iter().zip(im.iter()).map(|(&r, &i)| cplx(r, i)).collect();
    Ok((QuantumState::normalized(phi.n_sites(), out)?, c))
}

/// One exact-diagonalization grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct OraclePoint<T: Real> {
    pub g2: T,
    pub temperature: T,
    pub beta: T,
    pub chiral: T,
    pub fermion_number: T,
    /// Shifted partition function at this point.
    pub partition: T,
}

/// Exact observables over a `(g2, T)` grid.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleSweep<T: Real> {
    /// Parameters shared by every point; `g2` is replaced along the grid.
    pub base: ModelParams<T>,
    pub points: Vec<OraclePoint<T>>,
}

/// Tabulates both observables for every `(g2, T)` pair, `g2` outer.
pub fn coupling_sweep<T: Real>(base: &ModelParams<T>, temperatures: &[T], g2_grid: &[T]) -> Result<OracleSweep<T>> {
    if temperatures.is_empty() || g2_grid.is_empty() {
        return Err(Error::Domain("oracle sweep grids must be non-empty".into()));
    }
    if let Some(t) = temperatures.iter().find(|t| !(**t > T::zero())) {
        return Err(Error::Domain(format!("temperature {t} must be positive")));
    }
    let n_sites = base.n_sites;
    let observables = [model::observable_chiral(n_sites)?, model::observable_fermion_number(n_sites)?];
    let mut points = Vec::with_capacity(temperatures.len() * g2_grid.len());
    for &g2 in g2_grid {
        let ah = model::assemble(&base.with_coupling(g2))?.ah;
        let oracle = ThermalOracle::new(&ah, &observables)?;
        for &temperature in temperatures {
            let beta = T::one() / temperature;
            points.push(OraclePoint {
                g2,
                temperature,
                beta,
                chiral: oracle.expectation(0, beta)?,
                fermion_number: oracle.expectation(1, beta)?,
                partition: oracle.partition_function(beta)?,
            });
        }
    }
    Ok(OracleSweep { base: *base, points })
}

/// Thermal fermion number at inverse temperature `beta`.
pub fn fermion_number_at<T: Real>(params: &ModelParams<T>, beta: T) -> Result<T> {
    let ah = model::assemble(params)?.ah;
    thermal_expectation(&ah, &model::observable_fermion_number(params.n_sites)?, beta)
}

/// Locates the jumps of the low-temperature fermion number along a `g2` grid.
///
/// A step lies between adjacent grid points whose rounded fermion numbers
/// differ; its position is refined by bisection on the half-integer crossing.
pub fn plateau_steps<T: Real>(base: &ModelParams<T>, g2_grid: &[T], beta: T) -> Result<Vec<T>> {
    let at = |g: T| fermion_number_at(&base.with_coupling(g), beta);
    let values = g2_grid.iter().map(|&g| at(g)).collect::<Result<Vec<_>>>()?;
    let mut steps = Vec::new();
    for w in 0..g2_grid.len().saturating_sub(1) {
        let (lo_n, hi_n) = (values[w].round(), values[w + 1].round());
        if lo_n == hi_n {
            continue;
        }
        // Each unit of change gets its own crossing.
        let (first, last) = if lo_n < hi_n { (lo_n, hi_n) } else { (hi_n, lo_n) };
        let mut level = first + T::lit(0.5);
        while level < last {
            let (mut lo, mut hi) = (g2_grid[w], g2_grid[w + 1]);
            let f_lo = values[w] - level;
            for _ in 0..60 {
                let mid = (lo + hi) * T::lit(0.5);
                let f_mid = at(mid)? - level;
                if (f_mid < T::zero()) == (f_lo < T::zero()) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            steps.push((lo + hi) * T::lit(0.5));
            level += T::one();
        }
    }
    Ok(steps)
}

/// True when `g2` lies within `half_width` of any step.
pub fn near_step<T: Real>(g2: T, steps: &[T], half_width: T) -> bool {
    steps.iter().any(|&s| (g2 - s).abs() <= half_width)
}
