//! Thermal averages from imaginary-time trajectories.
//!
//! Each initial state `phi_i` is evolved for `K` steps. After `k` steps the
//! trajectory carries a weight `C_i(k)` (product of step weights) and an
//! observable value `O_i(k)`, and
//!
//! `<O>_beta = sum_i C_i(k) O_i(k) / sum_i C_i(k)`, `beta = 2 k dbeta`.
//!
//! One pass therefore yields every temperature on the grid.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pauli::PauliSum;
use crate::qite::{run_trajectory, Measurement, Propagator, Trajectory};
use crate::scalar::{creal, Real};
use crate::statevector::QuantumState;

/// Named observable.
pub type NamedObservable<T> = (String, PauliSum<T>);

/// One `(observable, k)` entry of a [`ThermalTable`].
#[derive(Clone, Debug, PartialEq)]
pub struct ThermalRow<T: Real> {
    pub observable: String,
    pub k: usize,
    pub beta: T,
    pub temperature: T,
    pub value: T,
    pub weight_sum: T,
    pub n_states: usize,
    /// Shot noise in complete-basis runs, spread across states in stochastic runs.
    pub stderr: T,
}

/// Thermal expectation values, observable-major and ascending in `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThermalTable<T: Real> {
    pub rows: Vec<ThermalRow<T>>,
}

impl<T: Real> ThermalTable<T> {
    pub fn rows(&self) -> &[ThermalRow<T>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, observable: &str, k: usize) -> Option<&ThermalRow<T>> {
        self.rows.iter().find(|r| r.k == k && r.observable == observable)
    }

    pub fn value(&self, observable: &str, k: usize) -> Option<T> {
        self.get(observable, k).map(|r| r.value)
    }

    /// Largest absolute difference of `value` over rows present in both tables.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.rows
            .iter()
            .filter_map(|r| other.get(&r.observable, r.k).map(|o| (r.value - o.value).abs()))
            .fold(T::zero(), |m, d| m.max(d))
    }
}

/// Initial states of the trace.
#[derive(Clone, Debug, PartialEq)]
pub enum BasisSet<T: Real> {
    /// All `2^N` computational basis states.
    Computational,
    /// A subset of computational basis states.
    Indices(Vec<usize>),
    /// Arbitrary states, e.g. a rotated orthonormal basis.
    States(Vec<QuantumState<T>>),
}

fn initial_states<T: Real>(basis: &BasisSet<T>, n_sites: usize) -> Result<Vec<(Option<usize>, QuantumState<T>)>> {
    let from_indices = |idx: &mut dyn Iterator<Item = usize>| {
        idx.map(|i| Ok((Some(i), QuantumState::basis_state(i, n_sites)?))).collect::<Result<Vec<_>>>()
    };
    let states = match basis {
        BasisSet::Computational => from_indices(&mut (0..1usize << n_sites))?,
        BasisSet::Indices(idx) => from_indices(&mut idx.iter().copied())?,
        BasisSet::States(s) => s.iter().map(|st| (None, st.clone())).collect(),
    };
    if states.is_empty() {
        return Err(Error::Domain("basis set is empty".into()));
    }
    if let Some((_, s)) = states.iter().find(|(_, s)| s.n_sites() != n_sites) {
        return Err(Error::SizeMismatch { expected: n_sites, found: s.n_sites() });
    }
    Ok(states)
}

/// Runs one trajectory per state, in parallel, returned in input order.
///
/// Shot sampling for state `i` uses stream base `i`.
pub fn run_trajectories<T: Real, P: Propagator<T> + ?Sized>(
    propagator: &P,
    observables: &[NamedObservable<T>],
    basis: &BasisSet<T>,
    k_steps: usize,
    measurement: Measurement,
) -> Result<Vec<Trajectory<T>>> {
    let states = initial_states(basis, propagator.n_sites())?;
    let ops: Vec<PauliSum<T>> = observables.iter().map(|(_, o)| o.clone()).collect();
    states
        .into_par_iter()
        .enumerate()
        .map(|(i, (index, st))| {
            let mut traj = run_trajectory(propagator, st, &ops, k_steps, measurement, i as u64)?;
            traj.initial_index = index;
            Ok(traj)
        })
        .collect()
}

fn zero_weight_dump<T: Real>(trajs: &[Trajectory<T>], k: usize, sum: T) -> Error {
    let weights: Vec<String> = trajs.iter().map(|t| format!("{:e}", t.cumulative_weights[k - 1])).collect();
    Error::Numerical(format!(
        "weight sum {sum} at k = {k} is not positive; per-state weights [{}]",
        weights.join(", ")
    ))
}

fn check_shapes<T: Real>(trajs: &[Trajectory<T>], n_obs: usize) -> Result<usize> {
    let first = trajs.first().ok_or_else(|| Error::Domain("no trajectories to average".into()))?;
    let k_steps = first.steps();
    if trajs.iter().any(|t| t.steps() != k_steps || t.observables.len() != n_obs) {
        return Err(Error::Domain("trajectories differ in length or observable count".into()));
    }
    Ok(k_steps)
}

fn grid_point<T: Real>(dbeta: T, k: usize) -> (T, T) {
    let beta = T::lit(2.0) * T::from_count(k) * dbeta;
    (beta, T::one() / beta)
}

/// Weighted average over trajectories at every `k`, summed in input order.
pub fn aggregate<T: Real>(
    names: &[String],
    trajs: &[Trajectory<T>],
    dbeta: T,
) -> Result<ThermalTable<T>> {
    let k_steps = check_shapes(trajs, names.len())?;
    let mut rows = Vec::with_capacity(names.len() * k_steps);
    for (o, name) in names.iter().enumerate() {
        for k in 1..=k_steps {
            let (mut wsum, mut acc, mut var) = (T::zero(), T::zero(), T::zero());
            for t in trajs {
                let c = t.cumulative_weights[k - 1];
                let se = t.stderr[o][k - 1];
                wsum += c;
                acc += c * t.observables[o][k - 1];
                var += c * c * se * se;
            }
            if !(wsum > T::zero()) || !wsum.finite() {
                return Err(zero_weight_dump(trajs, k, wsum));
            }
            let value = acc / wsum;
            if !value.finite() {
                return Err(Error::Numerical(format!("non-finite thermal value for {name} at k = {k}")));
            }
            let (beta, temperature) = grid_point(dbeta, k);
            rows.push(ThermalRow {
                observable: name.clone(),
                k,
                beta,
                temperature,
                value,
                weight_sum: wsum,
                n_states: trajs.len(),
                stderr: var.sqrt() / wsum,
            });
        }
    }
    Ok(ThermalTable { rows })
}

/// Complete-basis thermal average at every `k = 1..=k_steps`.
pub fn qmetts_average<T: Real, P: Propagator<T> + ?Sized>(
    propagator: &P,
    observables: &[NamedObservable<T>],
    basis: &BasisSet<T>,
    k_steps: usize,
    measurement: Measurement,
) -> Result<ThermalTable<T>> {
    let trajs = run_trajectories(propagator, observables, basis, k_steps, measurement)?;
    let names: Vec<String> = observables.iter().map(|(n, _)| n.clone()).collect();
    aggregate(&names, &trajs, propagator.dbeta())
}

/// Haar-random real unit vectors, reproducible from `seed`.
pub fn random_real_states<T: Real>(n_states: usize, n_sites: usize, seed: u64) -> Result<Vec<QuantumState<T>>> {
    let dim = QuantumState::<T>::basis_state(0, n_sites)?.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_states)
        .map(|_| {
            let amps = (0..dim)
                .map(|_| {
                    let x: f64 = StandardNormal.sample(&mut rng);
                    creal(T::lit(x))
                })
                .collect();
            QuantumState::normalized(n_sites, amps)
        })
        .collect()
}

/// A random real orthonormal basis of the full `2^N` space.
pub fn random_real_basis<T: Real>(n_sites: usize, seed: u64) -> Result<Vec<QuantumState<T>>> {
    let states = random_real_states::<T>(1usize << n_sites, n_sites, seed)?;
    let dim = states.len();
    let m = DMatrix::from_fn(dim, dim, |r, c| states[c].amplitudes()[r].re);
    let q = m.qr().q();
    (0..dim)
        .map(|c| QuantumState::normalized(n_sites, q.column(c).iter().map(|&x| creal(x)).collect()))
        .collect()
}

/// Random-state trace estimator with a ratio-estimator standard error per row.
///
/// States are Haar-random on the real sphere, drawn from `seed`. With a single
/// state the spread is undefined and `stderr` is infinite.
pub fn stochastic_trace_average<T: Real, P: Propagator<T> + ?Sized>(
    propagator: &P,
    observables: &[NamedObservable<T>],
    n_states: usize,
    k_steps: usize,
    measurement: Measurement,
    seed: u64,
) -> Result<ThermalTable<T>> {
    if n_states == 0 {
        return Err(Error::Domain("need at least one random state".into()));
    }
    let states = random_real_states(n_states, propagator.n_sites(), seed)?;
    let trajs = run_trajectories(propagator, observables, &BasisSet::States(states), k_steps, measurement)?;
    let names: Vec<String> = observables.iter().map(|(n, _)| n.clone()).collect();
    let mut table = aggregate(&names, &trajs, propagator.dbeta())?;
    let n = T::from_count(n_states);
    for row in &mut table.rows {
        let o = names.iter().position(|nm| *nm == row.observable).expect("known observable");
        row.stderr = if n_states < 2 {
            T::lit(f64::INFINITY)
        } else {
            let mut ss = T::zero();
            for t in &trajs {
                let c = t.cumulative_weights[row.k - 1];
                let d = c * (t.observables[o][row.k - 1] - row.value);
                ss += d * d;
            }
            (n / (n - T::one()) * ss).sqrt() / row.weight_sum
        };
    }
    Ok(table)
}
