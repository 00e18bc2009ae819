//! Exact algebra of N-site Pauli strings.
//!
//! A string is a tensor product of single-site letters `I, X, Y, Z`. Its packed
//! index is the base-4 number `j = l_0 + 4 l_1 + 16 l_2 + ...` with site 0 as
//! the least significant digit and `I=0, X=1, Y=2, Z=3`.
//!
//! Products are evaluated site by site through four 4x4 integer tables
//! ([`SiteTables`]): `M_a` gives the product letter, `M_b` flags non-commuting
//! letter pairs, `M_c` flags cyclic pairs (`XY`, `YZ`, `ZX`) and `M_d` flags
//! pairs whose product is `Y`. The forward product `P1 P2` picks up the phase
//! `(-1)^{sum M_c[y][x]} i^{sum M_b[x][y]}`.
//!
//! Matrices use the site-to-bit convention: site `n` is bit `n` of the basis
//! index and `|0>` is the `Z = +1` eigenstate, so the dense matrix of a string
//! is `P_{N-1} (x) ... (x) P_1 (x) P_0`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{cplx, creal, czero, Cplx, Real};

/// Largest number of sites whose packed index fits in a `u64`.
pub const MAX_SITES: usize = 31;

/// Default cap on the number of sites for dense matrix construction.
pub const DEFAULT_MATRIX_SITES: usize = 10;

/// Coefficients with modulus at or below this are dropped from a [`PauliSum`].
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// Single-site Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::I, Letter::X, Letter::Y, Letter::Z];

    pub fn from_index(l: u8) -> Result<Self> {
        match l {
            0 => Ok(Letter::I),
            1 => Ok(Letter::X),
            2 => Ok(Letter::Y),
            3 => Ok(Letter::Z),
            _ => Err(Error::Domain(format!("Pauli letter index {l} not in 0..=3"))),
        }
    }

    pub fn index(self) -> u8 {
        self as u8
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    fn matrix<T: Real>(self) -> DMatrix<Cplx<T>> {
        let (o, l, i) = (czero::<T>(), creal(T::one()), cplx(T::zero(), T::one()));
        let entries = match self {
            Letter::I => [l, o, o, l],
            Letter::X => [o, l, l, o],
            Letter::Y => [o, -i, i, o],
            Letter::Z => [l, o, o, -l],
        };
        DMatrix::from_row_slice(2, 2, &entries)
    }
}

/// Packs per-site letter indices (site 0 first) into the base-4 index.
pub fn pack(letters: &[u8]) -> Result<u64> {
    if letters.len() > MAX_SITES {
        return Err(Error::Domain(format!(
            "{} sites exceeds the packed-index limit of {MAX_SITES}",
            letters.len()
        )));
    }
    letters.iter().rev().try_fold(0u64, |acc, &l| {
        Letter::from_index(l)?;
        Ok(acc * 4 + u64::from(l))
    })
}

/// Unpacks a base-4 index into `n_sites` letter indices, site 0 first.
pub fn unpack(j: u64, n_sites: usize) -> Result<Vec<u8>> {
    check_sites(n_sites)?;
    if n_sites < 32 && j >= 1u64 << (2 * n_sites) {
        return Err(Error::Domain(format!("packed index {j} out of range for {n_sites} sites")));
    }
    Ok((0..n_sites).map(|n| ((j >> (2 * n)) & 3) as u8).collect())
}

fn check_sites(n_sites: usize) -> Result<()> {
    if n_sites == 0 || n_sites > MAX_SITES {
        Err(Error::Domain(format!("n_sites = {n_sites} must lie in 1..={MAX_SITES}")))
    } else {
        Ok(())
    }
}

/// Tensor product of Pauli letters on `n_sites` sites.
///
/// Stored as X/Z bitmasks (`Y` sets both); ordering is by packed index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_sites: usize,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n_sites: usize) -> Result<Self> {
        check_sites(n_sites)?;
        Ok(Self { n_sites, x: 0, z: 0 })
    }

    pub fn from_letters(letters: &[Letter]) -> Result<Self> {
        let mut s = Self::identity(letters.len())?;
        for (site, &l) in letters.iter().enumerate() {
            s.set(site, l);
        }
        Ok(s)
    }

    /// Builds a string from `(site, letter)` pairs; unlisted sites are identity.
    pub fn from_sites(n_sites: usize, sites: &[(usize, Letter)]) -> Result<Self> {
        let mut s = Self::identity(n_sites)?;
        for &(site, l) in sites {
            if site >= n_sites {
                return Err(Error::Domain(format!("site {site} out of range for {n_sites} sites")));
            }
            s.set(site, l);
        }
        Ok(s)
    }

    pub fn single(n_sites: usize, site: usize, letter: Letter) -> Result<Self> {
        Self::from_sites(n_sites, &[(site, letter)])
    }

    pub fn from_index(j: u64, n_sites: usize) -> Result<Self> {
        let letters = unpack(j, n_sites)?;
        let mut s = Self::identity(n_sites)?;
        for (site, l) in letters.into_iter().enumerate() {
            s.set(site, Letter::from_index(l)?);
        }
        Ok(s)
    }

    fn set(&mut self, site: usize, l: Letter) {
        let bit = 1u64 << site;
        let (x, z) = l.bits();
        self.x = if x { self.x | bit } else { self.x & !bit };
        self.z = if z { self.z | bit } else { self.z & !bit };
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn letter(&self, site: usize) -> Letter {
        Letter::from_bits(self.x >> site & 1 == 1, self.z >> site & 1 == 1)
    }

    pub fn letters(&self) -> Vec<Letter> {
        (0..self.n_sites).map(|n| self.letter(n)).collect()
    }

    pub fn packed_index(&self) -> u64 {
        (0..self.n_sites).rev().fold(0, |acc, n| acc * 4 + u64::from(self.letter(n).index()))
    }

    /// Sites carrying `X` or `Y` (the bits flipped when acting on a basis state).
    pub fn x_mask(&self) -> u64 {
        self.x
    }

    /// Sites carrying `Z` or `Y` (the bits contributing a sign).
    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// True when the string contains only `I` and `Z` letters.
    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    /// Symplectic commutation test, independent of the site tables.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Dense `2^N x 2^N` matrix as a Kronecker product, capped at `max_sites`.
    pub fn to_matrix_capped<T: Real>(&self, max_sites: usize) -> Result<DMatrix<Cplx<T>>> {
        if self.n_sites > max_sites {
            return Err(Error::Resource(format!(
                "dense matrix for {} sites exceeds the cap of {max_sites}",
                self.n_sites
            )));
        }
        let mut m = DMatrix::from_element(1, 1, creal(T::one()));
        for site in (0..self.n_sites).rev() {
            m = m.kronecker(&self.letter(site).matrix::<T>());
        }
        Ok(m)
    }

    pub fn to_matrix<T: Real>(&self) -> Result<DMatrix<Cplx<T>>> {
        self.to_matrix_capped(DEFAULT_MATRIX_SITES)
    }

    fn check_same_size(&self, other: &PauliString) -> Result<()> {
        if self.n_sites != other.n_sites {
            Err(Error::SizeMismatch { expected: self.n_sites, found: other.n_sites })
        } else {
            Ok(())
        }
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.n_sites, self.packed_index()).cmp(&(other.n_sites, other.packed_index()))
    }
}

/// Letters printed site 0 first, e.g. `XYII` has packed index 9.
impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.letters() {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Letter::I),
                'X' => Ok(Letter::X),
                'Y' => Ok(Letter::Y),
                'Z' => Ok(Letter::Z),
                other => Err(Error::Domain(format!("invalid Pauli letter {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_letters(&letters)
    }
}

/// A power of `i`: one of `+1, +i, -1, -i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    /// The phase `i^k`.
    pub fn i_pow(k: u32) -> Self {
        Phase((k % 4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0.is_multiple_of(2)
    }

    pub fn to_complex<T: Real>(self) -> Cplx<T> {
        let (o, l) = (T::zero(), T::one());
        match self.0 {
            0 => cplx(l, o),
            1 => cplx(o, l),
            2 => cplx(-l, o),
            _ => cplx(o, -l),
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["+1", "+i", "-1", "-i"][self.0 as usize])
    }
}

/// A Pauli string carrying a fourth-root-of-unity phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PhasedString {
    pub phase: Phase,
    pub string: PauliString,
}

impl PhasedString {
    pub fn new(phase: Phase, string: PauliString) -> Self {
        Self { phase, string }
    }
}

impl From<PauliString> for PhasedString {
    fn from(string: PauliString) -> Self {
        Self { phase: Phase::ONE, string }
    }
}

/// Per-site product tables, indexed `[first letter][second letter]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SiteTables {
    pub ma: [[u8; 4]; 4],
    pub mb: [[u8; 4]; 4],
    pub mc: [[u8; 4]; 4],
    pub md: [[u8; 4]; 4],
}

impl SiteTables {
    pub const STANDARD: SiteTables = SiteTables {
        ma: [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]],
        mb: [[0, 0, 0, 0], [0, 0, 1, 1], [0, 1, 0, 1], [0, 1, 1, 0]],
        mc: [[0, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [0, 1, 0, 0]],
        md: [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]],
    };

    /// Structural invariants: `M_a`, `M_b` symmetric, `M_d = [M_a == Y]`, entries in range.
    pub fn check(&self) -> Result<()> {
        for x in 0..4 {
            for y in 0..4 {
                if self.ma[x][y] > 3 || self.mb[x][y] > 1 || self.mc[x][y] > 1 || self.md[x][y] > 1 {
                    return Err(Error::Domain(format!("table entry out of range at ({x},{y})")));
                }
                if self.ma[x][y] != self.ma[y][x] || self.mb[x][y] != self.mb[y][x] {
                    return Err(Error::Domain(format!("M_a/M_b not symmetric at ({x},{y})")));
                }
                if (self.md[x][y] == 1) != (self.ma[x][y] == 2) {
                    return Err(Error::Domain(format!("M_d inconsistent with M_a at ({x},{y})")));
                }
            }
        }
        Ok(())
    }
}

impl Default for SiteTables {
    fn default() -> Self {
        Self::STANDARD
    }
}

/// Site-wise sums needed by the product formulas.
struct ProductParts {
    string: PauliString,
    sum_b: u32,
    sum_c: u32,
    sum_c_transposed: u32,
    sum_d: u32,
}

fn product_parts(tables: &SiteTables, p1: &PauliString, p2: &PauliString) -> Result<ProductParts> {
    p1.check_same_size(p2)?;
    let mut string = PauliString::identity(p1.n_sites)?;
    let (mut sum_b, mut sum_c, mut sum_c_transposed, mut sum_d) = (0, 0, 0, 0);
    for site in 0..p1.n_sites {
        let x = p1.letter(site).index() as usize;
        let y = p2.letter(site).index() as usize;
        string.set(site, Letter::from_index(tables.ma[x][y])?);
        sum_b += u32::from(tables.mb[x][y]);
        sum_c += u32::from(tables.mc[x][y]);
        sum_c_transposed += u32::from(tables.mc[y][x]);
        sum_d += u32::from(tables.md[x][y]);
    }
    Ok(ProductParts { string, sum_b, sum_c, sum_c_transposed, sum_d })
}

/// `P1 P2` using explicit site tables.
pub fn multiply_with(tables: &SiteTables, p1: &PauliString, p2: &PauliString) -> Result<PhasedString> {
    let parts = product_parts(tables, p1, p2)?;
    let phase = Phase::i_pow(parts.sum_b + 2 * parts.sum_c_transposed);
    Ok(PhasedString::new(phase, parts.string))
}

/// `P1 P2` as a phased string.
pub fn multiply(p1: &PauliString, p2: &PauliString) -> Result<PhasedString> {
    multiply_with(&SiteTables::STANDARD, p1, p2)
}

/// `P1 P2 + (P1 P2)^T` (computational-basis transpose) using explicit site tables.
pub fn sym_transpose_product_with<T: Real>(
    tables: &SiteTables,
    p1: &PauliString,
    p2: &PauliString,
) -> Result<PauliSum<T>> {
    let parts = product_parts(tables, p1, p2)?;
    let mut out = PauliSum::zero(p1.n_sites);
    if parts.sum_d % 2 == 0 {
        let phase = Phase::i_pow(parts.sum_b + 2 * parts.sum_c_transposed);
        out.add_term(parts.string, phase.to_complex::<T>() * T::lit(2.0));
    }
    Ok(out)
}

pub fn sym_transpose_product<T: Real>(p1: &PauliString, p2: &PauliString) -> Result<PauliSum<T>> {
    sym_transpose_product_with(&SiteTables::STANDARD, p1, p2)
}

/// `-i (P1 P2 - P2 P1)` using explicit site tables. Always has real coefficients.
pub fn minus_i_commutator_with<T: Real>(
    tables: &SiteTables,
    p1: &PauliString,
    p2: &PauliString,
) -> Result<PauliSum<T>> {
    let parts = product_parts(tables, p1, p2)?;
    let mut out = PauliSum::zero(p1.n_sites);
    if parts.sum_b % 2 == 1 {
        let phase = Phase::i_pow(1 + parts.sum_b + 2 * parts.sum_c);
        out.add_term(parts.string, phase.to_complex::<T>() * T::lit(2.0));
    }
    Ok(out)
}

pub fn minus_i_commutator<T: Real>(p1: &PauliString, p2: &PauliString) -> Result<PauliSum<T>> {
    minus_i_commutator_with(&SiteTables::STANDARD, p1, p2)
}

/// Complex-weighted sum of Pauli strings on a fixed number of sites.
///
/// Terms are kept in ascending packed-index order and coefficients at or below
/// [`PRUNE_THRESHOLD`] are removed, so equal operators compare equal.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum<T: Real> {
    n_sites: usize,
    terms: BTreeMap<PauliString, Cplx<T>>,
}

impl<T: Real> PauliSum<T> {
    pub fn zero(n_sites: usize) -> Self {
        Self { n_sites, terms: BTreeMap::new() }
    }

    pub fn from_string(string: PauliString, coeff: Cplx<T>) -> Self {
        let mut s = Self::zero(string.n_sites());
        s.add_term(string, coeff);
        s
    }

    pub fn identity(n_sites: usize, coeff: T) -> Result<Self> {
        Ok(Self::from_string(PauliString::identity(n_sites)?, creal(coeff)))
    }

    /// Sum with real coefficients.
    pub fn from_real_terms<I>(n_sites: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, T)>,
    {
        let mut s = Self::zero(n_sites);
        for (p, c) in terms {
            s.try_add_term(p, creal(c))?;
        }
        Ok(s)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &Cplx<T>)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, string: &PauliString) -> Cplx<T> {
        self.terms.get(string).copied().unwrap_or_else(czero)
    }

    /// Adds `coeff * string`, panicking on a size mismatch.
    pub fn add_term(&mut self, string: PauliString, coeff: Cplx<T>) {
        self.try_add_term(string, coeff).expect("term size matches sum size");
    }

    pub fn try_add_term(&mut self, string: PauliString, coeff: Cplx<T>) -> Result<()> {
        if string.n_sites() != self.n_sites {
            return Err(Error::SizeMismatch { expected: self.n_sites, found: string.n_sites() });
        }
        let entry = self.terms.entry(string).or_insert_with(czero);
        *entry += coeff;
        if entry.norm_sqr().sqrt() <= T::lit(PRUNE_THRESHOLD) {
            self.terms.remove(&string);
        }
        Ok(())
    }

    pub fn scale(&self, factor: Cplx<T>) -> Self {
        let mut out = Self::zero(self.n_sites);
        for (p, c) in &self.terms {
            out.add_term(*p, *c * factor);
        }
        out
    }

    pub fn scale_real(&self, factor: T) -> Self {
        self.scale(creal(factor))
    }

    /// True when every coefficient is real (Pauli strings are Hermitian).
    pub fn is_hermitian(&self) -> bool {
        self.terms.values().all(|c| c.im.abs() <= T::lit(PRUNE_THRESHOLD))
    }

    /// `(string, real coefficient)` pairs; fails if any coefficient is complex.
    pub fn real_terms(&self) -> Result<Vec<(PauliString, T)>> {
        if !self.is_hermitian() {
            return Err(Error::Contract("operator has complex coefficients".into()));
        }
        Ok(self.terms.iter().map(|(p, c)| (*p, c.re)).collect())
    }

    /// True when nothing but the identity string has a nonzero coefficient.
    pub fn is_identity_only(&self) -> bool {
        self.terms.keys().all(PauliString::is_identity)
    }

    pub fn identity_coefficient(&self) -> Cplx<T> {
        match PauliString::identity(self.n_sites) {
            Ok(id) => self.coefficient(&id),
            Err(_) => czero(),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.keys().all(PauliString::is_diagonal)
    }

    fn check_same_size(&self, other: &Self) -> Result<()> {
        if self.n_sites != other.n_sites {
            Err(Error::SizeMismatch { expected: self.n_sites, found: other.n_sites })
        } else {
            Ok(())
        }
    }

    /// Operator product `self * other`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_same_size(other)?;
        let mut out = Self::zero(self.n_sites);
        for (p1, c1) in &self.terms {
            for (p2, c2) in &other.terms {
                let ps = multiply(p1, p2)?;
                out.add_term(ps.string, *c1 * *c2 * ps.phase.to_complex());
            }
        }
        Ok(out)
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        Ok(self.product(other)? - other.product(self)?)
    }

    pub fn to_matrix_capped(&self, max_sites: usize) -> Result<DMatrix<Cplx<T>>> {
        if self.n_sites > max_sites {
            return Err(Error::Resource(format!(
                "dense matrix for {} sites exceeds the cap of {max_sites}",
                self.n_sites
            )));
        }
        let dim = 1usize << self.n_sites;
        let mut m = DMatrix::from_element(dim, dim, czero());
        for (p, c) in &self.terms {
            m += p.to_matrix_capped::<T>(max_sites)? * *c;
        }
        Ok(m)
    }

    pub fn to_matrix(&self) -> Result<DMatrix<Cplx<T>>> {
        self.to_matrix_capped(DEFAULT_MATRIX_SITES)
    }
}

impl<T: Real> Add for PauliSum<T> {
    type Output = PauliSum<T>;
    fn add(mut self, rhs: PauliSum<T>) -> PauliSum<T> {
        for (p, c) in rhs.terms {
            self.add_term(p, c);
        }
        self
    }
}

impl<T: Real> Sub for PauliSum<T> {
    type Output = PauliSum<T>;
    fn sub(self, rhs: PauliSum<T>) -> PauliSum<T> {
        self + (-rhs)
    }
}

impl<T: Real> Neg for PauliSum<T> {
    type Output = PauliSum<T>;
    fn neg(self) -> PauliSum<T> {
        self.scale_real(-T::one())
    }
}

impl<T: Real> fmt::Display for PauliSum<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (p, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            if c.im == T::zero() {
                write!(f, "{}*{}", c.re, p)?;
            } else {
                write!(f, "({}{:+}i)*{}", c.re, c.im, p)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Complex;

    fn s(text: &str) -> PauliString {
        text.parse().unwrap()
    }

    #[test]
    fn pack_examples() {
        assert_eq!(pack(&[0, 0, 0, 0]).unwrap(), 0);
        assert_eq!(pack(&[1, 2, 0, 0]).unwrap(), 9);
        assert_eq!(pack(&[3, 3, 3, 3]).unwrap(), 255);
        assert_eq!(s("XYII").packed_index(), 9);
        assert_eq!(unpack(9, 4).unwrap(), vec![1, 2, 0, 0]);
    }

    #[test]
    fn pack_rejects_out_of_range() {
        assert!(matches!(pack(&[4]), Err(Error::Domain(_))));
        assert!(matches!(unpack(256, 4), Err(Error::Domain(_))));
        assert!(unpack(255, 4).is_ok());
        assert!(PauliString::identity(0).is_err());
    }

    #[test]
    fn pack_unpack_roundtrip_exhaustive_three_sites() {
        for j in 0..64 {
            let letters = unpack(j, 3).unwrap();
            assert_eq!(pack(&letters).unwrap(), j);
            assert_eq!(PauliString::from_index(j, 3).unwrap().packed_index(), j);
        }
    }

    #[test]
    fn standard_tables_are_consistent() {
        SiteTables::STANDARD.check().unwrap();
    }

    #[test]
    fn product_examples() {
        let xy = multiply(&s("X"), &s("Y")).unwrap();
        assert_eq!((xy.phase, xy.string), (Phase::I, s("Z")));

        let p = s("XZYI");
        let pp = multiply(&p, &p).unwrap();
        assert_eq!((pp.phase, pp.string), (Phase::ONE, s("IIII")));

        let two = multiply(&s("XZ"), &s("YZ")).unwrap();
        assert_eq!((two.phase, two.string), (Phase::I, s("ZI")));
    }

    #[test]
    fn size_mismatch_is_reported() {
        assert!(matches!(multiply(&s("X"), &s("XX")), Err(Error::SizeMismatch { .. })));
        assert!(minus_i_commutator::<f64>(&s("X"), &s("XX")).is_err());
        assert!(sym_transpose_product::<f64>(&s("X"), &s("XX")).is_err());
    }

    #[test]
    fn sym_transpose_examples() {
        let id = sym_transpose_product::<f64>(&s("I"), &s("I")).unwrap();
        assert_eq!(id.coefficient(&s("I")), Complex::new(2.0, 0.0));

        let yx = sym_transpose_product::<f64>(&s("Y"), &s("X")).unwrap();
        assert_eq!(yx.len(), 1);
        assert_eq!(yx.coefficient(&s("Z")), Complex::new(0.0, -2.0));

        assert!(sym_transpose_product::<f64>(&s("YI"), &s("IZ")).unwrap().is_empty());
    }

    #[test]
    fn commutator_examples() {
        let xy = minus_i_commutator::<f64>(&s("X"), &s("Y")).unwrap();
        assert_eq!(xy.coefficient(&s("Z")), Complex::new(2.0, 0.0));
        assert!(minus_i_commutator::<f64>(&s("XX"), &s("YY")).unwrap().is_empty());
    }

    #[test]
    fn matrix_examples() {
        let id = s("II").to_matrix::<f64>().unwrap();
        assert_eq!(id, DMatrix::identity(4, 4));
        let z = s("Z").to_matrix::<f64>().unwrap();
        assert_eq!(z[(0, 0)], Complex::new(1.0, 0.0));
        assert_eq!(z[(1, 1)], Complex::new(-1.0, 0.0));
        // X on site 0 flips bit 0: |0> (index 0) <-> |1> (index 1).
        let x0 = s("XI").to_matrix::<f64>().unwrap();
        assert_eq!(x0[(1, 0)], Complex::new(1.0, 0.0));
        assert!(matches!(
            PauliString::identity(11).unwrap().to_matrix::<f64>(),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn pruning_keeps_sums_canonical() {
        let mut a = PauliSum::<f64>::zero(2);
        a.add_term(s("XZ"), Complex::new(0.5, 0.0));
        a.add_term(s("XZ"), Complex::new(-0.5, 1e-16));
        assert!(a.is_empty());
        assert_eq!(a, PauliSum::zero(2));
    }

    #[test]
    fn corrupted_tables_break_products() {
        let mut bad = SiteTables::STANDARD;
        bad.mc[1][2] = 0;
        bad.mc[2][1] = 1;
        let ps = multiply_with(&bad, &s("X"), &s("Y")).unwrap();
        assert_eq!(ps.phase, Phase::MINUS_I);
    }

    #[test]
    fn display_and_parse_agree() {
        let p = s("XZYI");
        assert_eq!(p.to_string(), "XZYI");
        assert_eq!(p.letter(2), Letter::Y);
        assert_eq!(p.y_count(), 1);
        assert_eq!(p.weight(), 3);
    }
}
