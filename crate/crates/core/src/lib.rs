//! Imaginary-time thermal simulation of small staggered-fermion lattices.
//!
//! The crate builds qubit Hamiltonians for the massive Thirring model (and its
//! Gross-Neveu dual), evolves basis states in imaginary time with QITE on a
//! dense state vector, and averages the trajectories into finite-temperature
//! expectation values. An exact-diagonalization oracle provides reference
//! values.
//!
//! Numerical code is generic over [`Real`]; the `*64` aliases fix `f64`.

pub mod error;
pub mod model;
pub mod oracle;
pub mod pauli;
pub mod qite;
pub mod scalar;
pub mod statevector;
pub mod thermal;

pub use error::{Error, Result};
pub use model::{HamiltonianSet, ModelParams, Variant};
pub use oracle::{SpectralData, ThermalOracle};
pub use pauli::{Letter, PauliString, PauliSum, Phase, PhasedString, SiteTables};
pub use qite::{CMode, ExactPropagator, Measurement, OperatorPool, PoolKind, Propagator, Qite, QiteOptions, RhsScaling};
pub use scalar::{Cplx, Real};
pub use statevector::{QuantumState, ShotCounts};
pub use thermal::{BasisSet, ThermalRow, ThermalTable};

pub type PauliSum64 = PauliSum<f64>;
pub type QuantumState64 = QuantumState<f64>;
pub type ModelParams64 = ModelParams<f64>;
pub type HamiltonianSet64 = HamiltonianSet<f64>;
pub type Qite64 = Qite<f64>;
pub type QiteOptions64 = QiteOptions<f64>;
pub type ThermalTable64 = ThermalTable<f64>;
pub type SpectralData64 = SpectralData<f64>;
