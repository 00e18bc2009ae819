//! QITE linear system and step against brute-force and matrix-exponential oracles.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;
use qmetts::oracle::SpectralData;
use qmetts::pauli::{PauliString, SiteTables};
use qmetts::qite::{self, build_gram, build_gram_transpose_route, build_rhs, CMode, Measurement, OperatorPool, PoolKind};
use qmetts::thermal::random_real_states;
use qmetts::{model, Cplx, ModelParams, PauliSum, Propagator, QuantumState, Qite, QiteOptions, Variant};

fn thirring(variant: Variant, g2: f64) -> PauliSum<f64> {
    model::assemble(&ModelParams::new(variant, 4, 0.5, g2)).unwrap().ah
}

fn dense_vec(st: &QuantumState<f64>) -> DVector<Cplx<f64>> {
    DVector::from_column_slice(st.amplitudes())
}

#[test]
fn gram_equals_twice_real_brute_force_gram() {
    let pool = OperatorPool::new(PoolKind::OddY, 4).unwrap();
    for st in random_real_states::<f64>(3, 4, 17).unwrap() {
        let gram = build_gram(&st, &pool).unwrap();
        let phi = dense_vec(&st);
        let vecs: Vec<_> = pool.strings().iter().map(|p| p.to_matrix::<f64>().unwrap() * &phi).collect();
        let brute = DMatrix::from_fn(pool.len(), pool.len(), |a, b| 2.0 * vecs[a].dotc(&vecs[b]).re);
        assert!((gram.clone() - brute).amax() < 1e-12);
        assert!(SymmetricEigen::new(gram).eigenvalues.min() >= -1e-10);
    }
}

#[test]
fn transpose_route_agrees_on_odd_y_pool() {
    let pool = OperatorPool::new(PoolKind::OddY, 3).unwrap();
    for st in random_real_states::<f64>(3, 3, 2).unwrap() {
        let direct = build_gram(&st, &pool).unwrap();
        let other = build_gram_transpose_route(&SiteTables::STANDARD, &st, &pool).unwrap();
        for (a, b) in direct.iter().zip(other.iter()) {
            assert!((a - b.re).abs() < 1e-12 && b.im.abs() < 1e-12);
        }
    }
}

#[test]
fn rhs_matches_dense_commutators_for_random_hamiltonian() {
    let pool = OperatorPool::new(PoolKind::FullMinusIdentity, 3).unwrap();
    let h = PauliSum::from_real_terms(
        3,
        [("XZY", 0.7), ("ZZI", -1.1), ("IXX", 0.4), ("YYI", 0.9), ("ZIZ", 0.3)]
            .map(|(s, c)| (s.parse::<PauliString>().unwrap(), c)),
    )
    .unwrap();
    let hm = h.to_matrix().unwrap();
    let c = 0.64;
    for st in random_real_states::<f64>(3, 3, 4).unwrap() {
        let b = build_rhs(&st, &pool, &h, c).unwrap();
        let phi = dense_vec(&st);
        for (j, sigma) in pool.strings().iter().enumerate() {
            let s = sigma.to_matrix::<f64>().unwrap();
            // -i <phi| (sigma H - H sigma) |phi> / sqrt(C)
            let comm = (&s * &hm - &hm * &s) * Cplx::new(0.0, -1.0);
            let want = phi.dotc(&(comm * &phi)) / c.sqrt();
            assert!(want.im.abs() < 1e-12);
            assert!((b[j] - want.re).abs() < 1e-12, "{sigma}: {} vs {}", b[j], want.re);
        }
    }
}

#[test]
fn even_y_rhs_vanishes_on_real_states() {
    let pool = OperatorPool::new(PoolKind::FullMinusIdentity, 4).unwrap();
    let ah = thirring(Variant::Minkowski, 1.6);
    for st in random_real_states::<f64>(4, 4, 8).unwrap() {
        let b = build_rhs(&st, &pool, &ah, 1.0).unwrap();
        for (j, p) in pool.strings().iter().enumerate() {
            if p.y_count() % 2 == 0 {
                assert!(b[j].abs() < 1e-12);
            }
        }
    }
}

#[test]
fn single_qubit_step_tracks_exact_evolution() {
    let plus = QuantumState::from_amplitudes(1, vec![Cplx::new(0.5f64.sqrt(), 0.0); 2]).unwrap();
    let z = PauliSum::from_real_terms(1, [("Z".parse().unwrap(), 1.0)]).unwrap();
    let opts = QiteOptions { dbeta: 0.01, ..QiteOptions::default() };
    let qite = Qite::new(z, OperatorPool::new(PoolKind::OddY, 1).unwrap(), opts).unwrap();
    let (next, _) = qite.step(&plus).unwrap();
    let (e, f) = ((-0.01f64).exp(), 0.01f64.exp());
    let exact = QuantumState::normalized(1, vec![Cplx::new(e, 0.0), Cplx::new(f, 0.0)]).unwrap();
    assert!(next.fidelity(&exact).unwrap() > 1.0 - 1e-6);
}

#[test]
fn energies_settle_monotonically_at_zero_coupling() {
    let ah = thirring(Variant::Euclidean, 0.0);
    let qite = Qite::with_defaults(ah.clone()).unwrap();
    let t = qite::run_trajectory_from_basis(&qite, 0, &[ah], 20, Measurement::Exact, 0).unwrap();
    let energies: Vec<f64> = t.records.iter().map(|r| r.energy).chain(t.observables[0].last().copied()).collect();
    for w in energies[3..].windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "{energies:?}");
    }
}

#[test]
fn reference_setup_runs_in_exponential_mode() {
    let ah = thirring(Variant::Euclidean, 1.0);
    let opts = QiteOptions { c_mode: CMode::Exponential, ..QiteOptions::default() };
    let qite = Qite::new(ah, OperatorPool::new(PoolKind::OddY, 4).unwrap(), opts).unwrap();
    let obs: Vec<_> = model::observables(4).unwrap().into_iter().map(|(_, o)| o).collect();
    for index in 0..16 {
        let t = qite::run_trajectory_from_basis(&qite, index, &obs, 20, Measurement::Exact, 0).unwrap();
        assert!(t.records.iter().all(|r| r.c_step > 0.0 && r.kept_terms <= 120));
        assert!(t.max_imag < 1e-8);
        let mut product = 1.0;
        for (r, w) in t.records.iter().zip(&t.cumulative_weights) {
            product *= r.c_step;
            assert_eq!(product, *w);
        }
    }
}

#[test]
fn linear_mode_breaks_down_on_high_energy_states() {
    let ah = thirring(Variant::Minkowski, 3.0);
    let opts = QiteOptions { c_mode: CMode::Linear, ..QiteOptions::default() };
    let qite = Qite::new(ah.clone(), OperatorPool::new(PoolKind::OddY, 4).unwrap(), opts).unwrap();
    let high = (0..16)
        .max_by(|a, b| {
            let e = |i| QuantumState::basis_state(i, 4).unwrap().expectation_real(&ah).unwrap();
            e(*a).total_cmp(&e(*b))
        })
        .unwrap();
    let energy = QuantumState::basis_state(high, 4).unwrap().expectation_real(&ah).unwrap();
    assert!(2.0 * 0.25 * energy > 1.0);
    let err = qite::run_trajectory_from_basis(&qite, high, &[ah], 1, Measurement::Exact, 0).unwrap_err();
    assert!(matches!(err.root(), qmetts::Error::NonPositiveWeight { .. }));
}

#[test]
fn tiny_step_leaves_diagonal_values() {
    let ah = thirring(Variant::Minkowski, 2.0);
    let opts = QiteOptions { dbeta: 1e-9, ..QiteOptions::default() };
    let qite = Qite::new(ah, OperatorPool::new(PoolKind::OddY, 4).unwrap(), opts).unwrap();
    let obs: Vec<_> = model::observables(4).unwrap().into_iter().map(|(_, o)| o).collect();
    for index in [3, 10] {
        let st = QuantumState::basis_state(index, 4).unwrap();
        let t = qite::run_trajectory_from_basis(&qite, index, &obs, 1, Measurement::Exact, 0).unwrap();
        for (o, op) in obs.iter().enumerate() {
            assert!((t.observables[o][0] - st.expectation_real(op).unwrap()).abs() < 1e-6);
        }
    }
}

#[test]
fn full_pool_infidelity_shrinks_faster_than_quadratically() {
    let ah = thirring(Variant::Euclidean, 1.0);
    let spectrum = SpectralData::of(&ah).unwrap();
    let pool = OperatorPool::new(PoolKind::FullMinusIdentity, 4).unwrap();
    let st = random_real_states::<f64>(1, 4, 31).unwrap().remove(0);
    let mut prev = f64::INFINITY;
    for dbeta in [0.2, 0.1, 0.05, 0.025] {
        let opts = QiteOptions { dbeta, trotter_steps: 50, threshold: 0.0, ..QiteOptions::default() };
        let qite = Qite::new(ah.clone(), pool.clone(), opts).unwrap();
        let (approx, _) = qite.step(&st).unwrap();
        let (exact, _) = qmetts::oracle::exact_imaginary_time_state(&spectrum, &st, dbeta).unwrap();
        let inf = 1.0 - approx.fidelity(&exact).unwrap();
        assert!(inf <= prev / 4.0, "dbeta {dbeta}: {inf} vs {prev}");
        prev = inf;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn odd_y_trajectories_stay_real(index in 0usize..16, g2 in 0.0f64..3.0) {
        let qite = Qite::with_defaults(thirring(Variant::Euclidean, g2)).unwrap();
        let t = qite::run_trajectory_from_basis(&qite, index, &[], 20, Measurement::Exact, 0).unwrap();
        prop_assert!(t.max_imag < 1e-8);
        prop_assert!((t.final_state.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gram_is_psd(seed in 0u64..1000) {
        let pool = OperatorPool::new(PoolKind::OddY, 3).unwrap();
        let st = random_real_states::<f64>(1, 3, seed).unwrap().remove(0);
        let gram = build_gram(&st, &pool).unwrap();
        prop_assert!((gram.transpose() - &gram).amax() == 0.0);
        prop_assert!(SymmetricEigen::new(gram).eigenvalues.min() >= -1e-10);
    }
}
