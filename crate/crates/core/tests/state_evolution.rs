//! State-vector kernels against dense linear algebra.

use nalgebra::DVector;
use proptest::prelude::*;
use qmetts::pauli::PauliString;
use qmetts::thermal::random_real_states;
use qmetts::{model, Cplx, PauliSum, QuantumState};

fn string(n: usize) -> impl Strategy<Value = PauliString> {
    (0..1u64 << (2 * n)).prop_map(move |j| PauliString::from_index(j, n).unwrap())
}

proptest! {
    #[test]
    fn rotations_preserve_norm(seed in 0u64..500, ps in prop::collection::vec((string(4), -3.0f64..3.0), 1..12)) {
        let mut st = random_real_states::<f64>(1, 4, seed).unwrap().remove(0);
        for (p, theta) in &ps {
            st.apply_rotation(p, *theta).unwrap();
        }
        prop_assert!((st.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_matches_dense_exponential(seed in 0u64..500, p in string(3), theta in -3.0f64..3.0) {
        let st = random_real_states::<f64>(1, 3, seed).unwrap().remove(0);
        let mut rotated = st.clone();
        rotated.apply_rotation(&p, theta).unwrap();
        // exp(-i theta P) = cos(theta) - i sin(theta) P for P^2 = 1.
        let m = p.to_matrix::<f64>().unwrap();
        let phi = DVector::from_column_slice(st.amplitudes());
        let want = &phi * Cplx::new(theta.cos(), 0.0) + (&m * &phi) * Cplx::new(0.0, -theta.sin());
        for (a, b) in rotated.amplitudes().iter().zip(want.iter()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn string_expectation_matches_dense(seed in 0u64..500, p in string(4)) {
        let st = random_real_states::<f64>(1, 4, seed).unwrap().remove(0);
        let phi = DVector::from_column_slice(st.amplitudes());
        let want = phi.dotc(&(p.to_matrix::<f64>().unwrap() * &phi));
        prop_assert!((st.expectation_string(&p).unwrap() - want).norm() < 1e-12);
    }
}

#[test]
fn sampling_passes_chi_square() {
    let st = random_real_states::<f64>(1, 3, 21).unwrap().remove(0);
    let shots = 40_000;
    let counts = st.sample(shots, 5, 2).unwrap();
    assert_eq!(counts.total(), shots as u64);
    let chi2: f64 = st
        .probabilities()
        .iter()
        .enumerate()
        .map(|(b, p)| {
            let expected = p * shots as f64;
            let observed = *counts.counts.get(&(b as u64)).unwrap_or(&0) as f64;
            (observed - expected).powi(2) / expected
        })
        .sum();
    // 7 degrees of freedom; 24.32 is the 0.999 quantile.
    assert!(chi2 < 24.32, "chi2 = {chi2}");
}

#[test]
fn same_seed_and_stream_reproduce_counts() {
    let st = random_real_states::<f64>(1, 4, 3).unwrap().remove(0);
    assert_eq!(st.sample(1024, 9, 4).unwrap(), st.sample(1024, 9, 4).unwrap());
    assert_ne!(st.sample(1024, 9, 4).unwrap().counts, st.sample(1024, 9, 5).unwrap().counts);
}

#[test]
fn shot_estimates_track_exact_moments() {
    let st = random_real_states::<f64>(1, 4, 8).unwrap().remove(0);
    for (_, op) in model::observables::<f64>(4).unwrap() {
        let (mean, var) = st.diagonal_moments(&op).unwrap();
        let counts = st.sample(100_000, 1, 0).unwrap();
        let (est, se) = qmetts::statevector::DiagonalObservable::new(&op).unwrap().estimate(&counts).unwrap();
        assert!((est - mean).abs() < 4.0 * (var / 100_000.0).sqrt() + 1e-12);
        assert!((se - (var / 100_000.0).sqrt()).abs() < 0.05 * se.max(1e-9));
    }
}

#[test]
fn basis_state_observables() {
    let obs = model::observables::<f64>(4).unwrap();
    let all_up = QuantumState::<f64>::basis_state(0, 4).unwrap();
    let all_down = QuantumState::<f64>::basis_state(15, 4).unwrap();
    let nf = &obs[1].1;
    assert_eq!(all_up.expectation_real(nf).unwrap(), 4.0);
    assert_eq!(all_down.expectation_real(nf).unwrap(), 0.0);
    let z = PauliSum::from_real_terms(4, [(PauliString::identity(4).unwrap(), 1.0)]).unwrap();
    assert_eq!(all_up.expectation_real(&z).unwrap(), 1.0);
}
