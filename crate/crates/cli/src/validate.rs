//! Invariant suite behind the `validate` subcommand.
//!
//! Pauli products are checked against Kronecker-product matrices, the QITE
//! linear system against brute-force Gram matrices, and the model against its
//! Gross-Neveu dual.

use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use qmetts::oracle::{self, SpectralData};
use qmetts::pauli::{self, PauliString, SiteTables};
use qmetts::qite::{self, CMode, OperatorPool, PoolKind, Propagator, Qite, QiteOptions, RhsScaling};
use qmetts::scalar::Cplx;
use qmetts::thermal;
use qmetts::{model, ModelParams, QuantumState, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SITES: usize = 4;
const RANDOM_PAIRS: usize = 1000;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        Self { name, pass, detail }
    }

    fn from_result(name: &'static str, r: Result<String, String>) -> Self {
        match r {
            Ok(d) => Self::new(name, true, d),
            Err(d) => Self::new(name, false, d),
        }
    }
}

type Dense = DMatrix<Cplx<f64>>;

fn dense(p: &PauliString) -> Dense {
    p.to_matrix::<f64>().expect("small string")
}

fn random_string(rng: &mut ChaCha8Rng, n: usize) -> PauliString {
    PauliString::from_index(rng.random_range(0..1u64 << (2 * n)), n).expect("index in range")
}

fn pairs(rng: &mut ChaCha8Rng) -> Vec<(PauliString, PauliString)> {
    let mut out = Vec::with_capacity(16 + RANDOM_PAIRS);
    for a in 0..4 {
        for b in 0..4 {
            out.push((PauliString::from_index(a, 1).unwrap(), PauliString::from_index(b, 1).unwrap()));
        }
    }
    for _ in 0..RANDOM_PAIRS {
        out.push((random_string(rng, SITES), random_string(rng, SITES)));
    }
    out
}

fn check_products(tables: &SiteTables, pairs: &[(PauliString, PauliString)]) -> Result<String, String> {
    for (a, b) in pairs {
        let ps = pauli::multiply_with(tables, a, b).map_err(|e| e.to_string())?;
        let got = dense(&ps.string) * ps.phase.to_complex::<f64>();
        if got != dense(a) * dense(b) {
            return Err(format!("{a} * {b} gave {} {}", ps.phase, ps.string));
        }
    }
    Ok(format!("{} pairs exact", pairs.len()))
}

fn check_sym_transpose(tables: &SiteTables, pairs: &[(PauliString, PauliString)]) -> Result<String, String> {
    for (a, b) in pairs {
        let got = pauli::sym_transpose_product_with::<f64>(tables, a, b).and_then(|s| s.to_matrix());
        let got = got.map_err(|e| e.to_string())?;
        let prod = dense(a) * dense(b);
        if got != &prod + prod.transpose() {
            return Err(format!("P1 P2 + (P1 P2)^T wrong for ({a}, {b})"));
        }
    }
    Ok(format!("{} pairs exact", pairs.len()))
}

fn check_commutator(tables: &SiteTables, pairs: &[(PauliString, PauliString)]) -> Result<String, String> {
    let minus_i = Cplx::new(0.0, -1.0);
    for (a, b) in pairs {
        let got = pauli::minus_i_commutator_with::<f64>(tables, a, b).and_then(|s| s.to_matrix());
        let got = got.map_err(|e| e.to_string())?;
        let want = (dense(a) * dense(b) - dense(b) * dense(a)) * minus_i;
        if got != want {
            return Err(format!("-i[P1, P2] wrong for ({a}, {b})"));
        }
    }
    Ok(format!("{} pairs exact", pairs.len()))
}

fn hamiltonian(variant: Variant, g2: f64) -> qmetts::PauliSum<f64> {
    model::assemble(&ModelParams::new(variant, SITES, 0.5, g2)).expect("valid parameters").ah
}

fn check_gram(states: &[QuantumState<f64>]) -> Result<String, String> {
    let pool = OperatorPool::new(PoolKind::OddY, SITES).map_err(|e| e.to_string())?;
    let (mut min_eig, mut max_err) = (f64::INFINITY, 0.0f64);
    for st in states {
        let gram = qite::build_gram(st, &pool).map_err(|e| e.to_string())?;
        let phi = nalgebra::DVector::from_column_slice(st.amplitudes());
        let vecs: Vec<_> = pool.strings().iter().map(|p| dense(p) * &phi).collect();
        for (a, va) in vecs.iter().enumerate() {
            for (b, vb) in vecs.iter().enumerate() {
                max_err = max_err.max((gram[(a, b)] - 2.0 * va.dotc(vb).re).abs());
            }
        }
        min_eig = min_eig.min(SymmetricEigen::new(gram).eigenvalues.min());
    }
    let detail = format!("min_eigenvalue={min_eig:e} max_error={max_err:e}");
    if min_eig >= -1e-10 && max_err <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn check_even_y_rhs(states: &[QuantumState<f64>]) -> Result<String, String> {
    let pool = OperatorPool::new(PoolKind::FullMinusIdentity, SITES).map_err(|e| e.to_string())?;
    let ah = hamiltonian(Variant::Euclidean, 1.0);
    let mut worst = 0.0f64;
    for st in states {
        let b = qite::build_rhs(st, &pool, &ah, 1.0).map_err(|e| e.to_string())?;
        for (j, p) in pool.strings().iter().enumerate() {
            if p.y_count() % 2 == 0 {
                worst = worst.max(b[j].abs());
            }
        }
    }
    let detail = format!("max_even_y_rhs={worst:e}");
    if worst <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn check_real_preservation() -> Result<String, String> {
    let ah = hamiltonian(Variant::Euclidean, 1.0);
    let qite = Qite::with_defaults(ah).map_err(|e| e.to_string())?;
    let obs = model::observables(SITES).map_err(|e| e.to_string())?;
    let ops: Vec<_> = obs.into_iter().map(|(_, o)| o).collect();
    let mut worst = 0.0f64;
    for index in [0, 5, 6, 15] {
        let t = qite::run_trajectory_from_basis(&qite, index, &ops, 20, qite::Measurement::Exact, 0)
            .map_err(|e| e.to_string())?;
        worst = worst.max(t.max_imag);
    }
    let detail = format!("max_imag={worst:e}");
    if worst < 1e-8 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn check_duality() -> Result<String, String> {
    let mut worst = 0.0f64;
    for variant in [Variant::Euclidean, Variant::Minkowski] {
        for g2 in [0.4, 1.0, 2.6] {
            let thirring = hamiltonian(variant, g2);
            let a_g = if variant == Variant::Euclidean { g2 / 2.0 } else { 0.0 };
            let gn = model::assemble(&ModelParams::gross_neveu(SITES, 0.5, a_g, g2 / 2.0)).map_err(|e| e.to_string())?.ah;
            let diff = thirring.clone() - gn.clone();
            if !diff.is_identity_only() {
                return Err(format!("{variant} g2={g2}: difference has non-identity support"));
            }
            let e1 = SpectralData::of(&thirring).map_err(|e| e.to_string())?.eigenvalues;
            let e2 = SpectralData::of(&gn).map_err(|e| e.to_string())?.eigenvalues;
            let shift = e1[0] - e2[0];
            worst = worst.max(e1.iter().zip(e2.iter()).map(|(a, b)| (a - b - shift).abs()).fold(0.0, f64::max));
        }
    }
    let detail = format!("max_spectrum_residual={worst:e}");
    if worst <= 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Single-step QITE infidelity against the exact imaginary-time state.
pub fn step_infidelity(
    ah: &qmetts::PauliSum<f64>,
    spectrum: &SpectralData<f64>,
    pool: &OperatorPool,
    state: &QuantumState<f64>,
    dbeta: f64,
    trotter_steps: usize,
) -> qmetts::Result<f64> {
    let opts = QiteOptions {
        dbeta,
        trotter_steps,
        threshold: 0.0,
        c_mode: CMode::ExactNorm,
        rhs_scaling: RhsScaling::Unit,
        svd_cutoff: 1e-8,
    };
    let qite = Qite::new(ah.clone(), pool.clone(), opts)?;
    let (approx, _) = qite.step(state)?;
    let (exact, _) = oracle::exact_imaginary_time_state(spectrum, state, dbeta)?;
    Ok((1.0 - approx.fidelity(&exact)?).max(0.0))
}

fn check_fidelity_scaling(states: &[QuantumState<f64>]) -> Result<String, String> {
    let ah = hamiltonian(Variant::Euclidean, 1.0);
    let spectrum = SpectralData::of(&ah).map_err(|e| e.to_string())?;
    let pool = OperatorPool::new(PoolKind::FullMinusIdentity, SITES).map_err(|e| e.to_string())?;
    let dbetas = [0.2, 0.1, 0.05, 0.025];
    let mut worst = f64::INFINITY;
    for st in states {
        let inf = dbetas
            .iter()
            .map(|&d| step_infidelity(&ah, &spectrum, &pool, st, d, 50))
            .collect::<qmetts::Result<Vec<_>>>()
            .map_err(|e| e.to_string())?;
        worst = worst.min(log_log_slope(&dbetas, &inf));
    }
    let detail = format!("min_exponent={worst:.3}");
    if worst >= 1.9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Runs every check with the given site tables (normally [`SiteTables::STANDARD`]).
pub fn run_checks(tables: &SiteTables) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pairs = pairs(&mut rng);
    let states = thermal::random_real_states::<f64>(5, SITES, 11).expect("random states");
    let mut checks = vec![
        Check::from_result("site_tables", tables.check().map(|_| "consistent".into()).map_err(|e| e.to_string())),
        Check::from_result("pauli_products", check_products(tables, &pairs)),
        Check::from_result("pauli_sym_transpose", check_sym_transpose(tables, &pairs)),
        Check::from_result("pauli_commutator", check_commutator(tables, &pairs)),
        Check::from_result("gram_psd", check_gram(&states)),
        Check::from_result("even_y_rhs_vanishes", check_even_y_rhs(&states)),
        Check::from_result("real_state_preservation", check_real_preservation()),
        Check::from_result("duality_residual", check_duality()),
    ];
    checks.push(Check::from_result("fidelity_scaling", check_fidelity_scaling(&states[..2])));
    checks
}

/// `check,status,detail` lines followed by an overall verdict.
pub fn render(checks: &[Check], elapsed_secs: f64) -> String {
    let mut s = String::from("check,status,detail\n");
    for c in checks {
        s.push_str(&format!("{},{},{}\n", c.name, if c.pass { "PASS" } else { "FAIL" }, c.detail));
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    s.push_str(&format!("# checks={} failed={} elapsed_s={:.1}\n", checks.len(), failed, elapsed_secs));
    s
}

/// Runs the suite; returns the rendered table and whether every check passed.
pub fn validate(tables: &SiteTables) -> (String, bool) {
    let start = Instant::now();
    let checks = run_checks(tables);
    let ok = checks.iter().all(|c| c.pass);
    (render(&checks, start.elapsed().as_secs_f64()), ok)
}

/// Site tables with the cyclic flags of the `XY`/`YX` pair swapped: a negative control.
pub fn corrupted_tables() -> SiteTables {
    let mut t = SiteTables::STANDARD;
    t.mc[1][2] = 0;
    t.mc[2][1] = 1;
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [0.2, 0.1, 0.05];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(4)).collect();
        assert!((log_log_slope(&x, &y) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn corrupted_tables_fail_the_product_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = pairs(&mut rng);
        assert!(check_products(&SiteTables::STANDARD, &p).is_ok());
        assert!(check_products(&corrupted_tables(), &p).is_err());
        assert!(check_commutator(&corrupted_tables(), &p).is_err());
    }
}
