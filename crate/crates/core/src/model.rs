//! Lattice Hamiltonians of the staggered massive Thirring model and its
//! Gross-Neveu dual, expressed as Pauli sums after the Jordan-Wigner map.
//!
//! Pieces (constants dropped):
//!
//! * `h1 = 1/2 sum_n [X(n)X(n+1) + Y(n)Y(n+1)] + (-1)^{N/2} 1/2 [X(0) Z... X(N-1) + Y(0) Z... Y(N-1)]`
//! * `h2 = 1/2 sum_n (-1)^{n+1} Z(n)`, which is `1/2 (Z3 - Z2 + Z1 - Z0)` at `N = 4`
//! * `h3 = sum_n Z(n) + 1/4 sum_n Z(n)Z(n+1)` (periodic ring)
//! * `h4 = 1/4 sum_n Z(n)Z(n+1)` (periodic ring)
//!
//! and `aH_E = h1 + am h2 - g2/4 h3 - g2/4 h4`, `aH_M` flips the sign of the
//! `h4` term.

use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliString, PauliSum};
use crate::scalar::Real;

/// Which interaction is assembled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Euclidean,
    Minkowski,
    /// Gross-Neveu model with chemical potential.
    GrossNeveu,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Euclidean => "euclidean",
            Variant::Minkowski => "minkowski",
            Variant::GrossNeveu => "gross-neveu",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "e" => Ok(Variant::Euclidean),
            "minkowski" | "m" => Ok(Variant::Minkowski),
            "gross-neveu" | "grossneveu" | "gn" => Ok(Variant::GrossNeveu),
            other => Err(Error::Domain(format!("unknown model variant {other:?}"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Dimensionless model parameters (everything in units of the lattice spacing).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams<T: Real> {
    pub variant: Variant,
    pub n_sites: usize,
    /// Mass times lattice spacing.
    pub am: T,
    /// Thirring coupling `g^2`; for [`Variant::GrossNeveu`] this is the
    /// four-fermion coupling `a g` instead.
    pub g2: T,
    /// Chemical potential times lattice spacing; only used by the Gross-Neveu variant.
    pub a_mu: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(variant: Variant, n_sites: usize, am: T, g2: T) -> Self {
        Self { variant, n_sites, am, g2, a_mu: T::zero() }
    }

    pub fn gross_neveu(n_sites: usize, am: T, a_g: T, a_mu: T) -> Self {
        Self { variant: Variant::GrossNeveu, n_sites, am, g2: a_g, a_mu }
    }

    /// Same parameters at another coupling (`a g` for the Gross-Neveu variant).
    pub fn with_coupling(self, g2: T) -> Self {
        Self { g2, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        check_sites(self.n_sites)?;
        for (name, v) in [("am", self.am), ("g2", self.g2), ("a_mu", self.a_mu)] {
            if !v.finite() {
                return Err(Error::NonFinite(format!("{name} = {v}")));
            }
        }
        if self.variant != Variant::GrossNeveu && self.g2 < T::zero() {
            return Err(Error::Domain(format!("g2 = {} must be non-negative", self.g2)));
        }
        Ok(())
    }
}

/// The four Hamiltonian pieces and the assembled dimensionless Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSet<T: Real> {
    pub h1: PauliSum<T>,
    pub h2: PauliSum<T>,
    pub h3: PauliSum<T>,
    pub h4: PauliSum<T>,
    pub ah: PauliSum<T>,
}

fn check_sites(n_sites: usize) -> Result<()> {
    if n_sites < 4 || !n_sites.is_multiple_of(2) {
        return Err(Error::Domain(format!("n_sites = {n_sites} must be even and at least 4")));
    }
    if n_sites > crate::pauli::MAX_SITES {
        return Err(Error::Domain(format!("n_sites = {n_sites} too large")));
    }
    Ok(())
}

fn string(n_sites: usize, sites: &[(usize, Letter)]) -> PauliString {
    PauliString::from_sites(n_sites, sites).expect("sites checked by caller")
}

fn z_sum<T: Real>(n_sites: usize) -> PauliSum<T> {
    let terms = (0..n_sites).map(|n| (string(n_sites, &[(n, Letter::Z)]), T::one()));
    PauliSum::from_real_terms(n_sites, terms).expect("sizes agree")
}

fn zz_ring<T: Real>(n_sites: usize) -> PauliSum<T> {
    let terms = (0..n_sites)
        .map(|n| (string(n_sites, &[(n, Letter::Z), ((n + 1) % n_sites, Letter::Z)]), T::one()));
    PauliSum::from_real_terms(n_sites, terms).expect("sizes agree")
}

/// Hopping term: open XX/YY chain plus the Jordan-Wigner boundary strings.
pub fn build_h1<T: Real>(n_sites: usize) -> Result<PauliSum<T>> {
    check_sites(n_sites)?;
    let half = T::lit(0.5);
    let boundary = if (n_sites / 2).is_multiple_of(2) { half } else { -half };
    let mut h = PauliSum::zero(n_sites);
    for letter in [Letter::X, Letter::Y] {
        for n in 0..n_sites - 1 {
            h.try_add_term(string(n_sites, &[(n, letter), (n + 1, letter)]), crate::scalar::creal(half))?;
        }
        let mut sites = vec![(0, letter), (n_sites - 1, letter)];
        sites.extend((1..n_sites - 1).map(|j| (j, Letter::Z)));
        h.try_add_term(string(n_sites, &sites), crate::scalar::creal(boundary))?;
    }
    Ok(h)
}

/// Staggered mass term; equals the chiral-condensate operator.
pub fn build_h2<T: Real>(n_sites: usize) -> Result<PauliSum<T>> {
    check_sites(n_sites)?;
    let half = T::lit(0.5);
    let terms = (0..n_sites).map(|n| {
        let sign = if n % 2 == 0 { -half } else { half };
        (string(n_sites, &[(n, Letter::Z)]), sign)
    });
    PauliSum::from_real_terms(n_sites, terms)
}

pub fn build_h3<T: Real>(n_sites: usize) -> Result<PauliSum<T>> {
    check_sites(n_sites)?;
    Ok(z_sum(n_sites) + zz_ring::<T>(n_sites).scale_real(T::lit(0.25)))
}

pub fn build_h4<T: Real>(n_sites: usize) -> Result<PauliSum<T>> {
    check_sites(n_sites)?;
    Ok(zz_ring::<T>(n_sites).scale_real(T::lit(0.25)))
}

/// Builds the pieces and the assembled `aH` for the requested variant.
///
/// The Gross-Neveu form is `h1 + am h2 - ag (1/4 ZZ ring) - a_mu (1/2 sum Z)`.
pub fn assemble<T: Real>(params: &ModelParams<T>) -> Result<HamiltonianSet<T>> {
    params.validate()?;
    let n = params.n_sites;
    let (h1, h2, h3, h4) = (build_h1(n)?, build_h2(n)?, build_h3(n)?, build_h4(n)?);
    let quarter_g2 = params.g2 * T::lit(0.25);
    let base = h1.clone() + h2.scale_real(params.am);
    let ah = match params.variant {
        Variant::Euclidean => base - h3.scale_real(quarter_g2) - h4.scale_real(quarter_g2),
        Variant::Minkowski => base - h3.scale_real(quarter_g2) + h4.scale_real(quarter_g2),
        Variant::GrossNeveu => {
            base - zz_ring::<T>(n).scale_real(params.g2 * T::lit(0.25))
                - z_sum::<T>(n).scale_real(params.a_mu * T::lit(0.5))
        }
    };
    Ok(HamiltonianSet { h1, h2, h3, h4, ah })
}

/// Chiral condensate `<psibar psi>`, identical to `h2`.
pub fn observable_chiral<T: Real>(n_sites: usize) -> Result<PauliSum<T>> {
    build_h2(n_sites)
}

/// Fermion number `<psibar gamma^0 psi> = N/2 + 1/2 sum Z(n)`.
pub fn observable_fermion_number<T: Real>(n_sites: usize) -> Result<PauliSum<T>> {
    check_sites(n_sites)?;
    let id = PauliSum::identity(n_sites, T::from_count(n_sites / 2))?;
    Ok(id + z_sum::<T>(n_sites).scale_real(T::lit(0.5)))
}

/// Names used for the two physical observables in tables and files.
pub const CHIRAL: &str = "chiral_condensate";
pub const FERMION_NUMBER: &str = "fermion_number";

/// Both observables, chiral condensate first.
pub fn observables<T: Real>(n_sites: usize) -> Result<Vec<(String, PauliSum<T>)>> {
    Ok(vec![
        (CHIRAL.to_string(), observable_chiral(n_sites)?),
        (FERMION_NUMBER.to_string(), observable_fermion_number(n_sites)?),
    ])
}
