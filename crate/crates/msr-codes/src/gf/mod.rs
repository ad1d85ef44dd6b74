//! Arithmetic in `F_q` and its degree-`M` extension `F_{q^M}`.
//!
//! Elements are stored as length-`M` coordinate vectors over the prime
//! ground field `F_q`, relative to the polynomial basis defined by a monic
//! irreducible modulus. Normal bases, Frobenius powers, and the isomorphism
//! `phi_n` between extension-field vectors and ground-field coordinate
//! matrices live here too; they are the foundation of the rank metric used
//! throughout the crate.
//!
//! All types are immutable after construction and all operations are pure,
//! so values can be shared freely across threads.

mod factor;
pub(crate) mod poly;

pub use factor::{distinct_prime_factors, group_order, is_prime};
pub use poly::{find_irreducible, is_irreducible};

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::matrix::GroundMatrix;
use crate::{Error, Result};

/// An element of `F_{q^M}`: coordinates in the polynomial basis,
/// low-degree-first, each in `[0, q)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldElement {
    coords: Vec<u64>,
}

impl FieldElement {
    /// Polynomial-basis coordinates, low-degree-first.
    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coords.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (i, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "X")?,
                (1, c) => write!(f, "{c}*X")?,
                (i, 1) => write!(f, "X^{i}")?,
                (i, c) => write!(f, "{c}*X^{i}")?,
            }
        }
        Ok(())
    }
}

/// The field `F_{q^M}` for a prime `q`: modulus, validated once, plus the
/// precomputed matrix of the Frobenius map `x -> x^q`.
#[derive(Debug, Clone)]
pub struct FieldSpec {
    q: u64,
    m: usize,
    modulus: Vec<u64>,
    /// Column `j` holds the polynomial coordinates of `(X^j)^q mod modulus`.
    frob_cols: Vec<Vec<u64>>,
    /// Bit-packed modulus, valid when `q == 2` and `m <= 64`.
    packed_modulus: Option<u128>,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q && self.m == other.m && self.modulus == other.modulus
    }
}
impl Eq for FieldSpec {}

#[derive(Serialize, Deserialize)]
struct FieldSpecRepr {
    q: u64,
    m: usize,
    modulus: Vec<u64>,
}

impl Serialize for FieldSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FieldSpecRepr { q: self.q, m: self.m, modulus: self.modulus.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FieldSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = FieldSpecRepr::deserialize(d)?;
        if repr.modulus.len() != repr.m + 1 {
            return Err(serde::de::Error::custom(format!(
                "modulus must list {} coefficients",
                repr.m + 1
            )));
        }
        FieldSpec::new(repr.q, repr.modulus).map_err(serde::de::Error::custom)
    }
}

impl FieldSpec {
    /// Builds `F_q[X] / (modulus)`. The modulus is given low-degree-first and
    /// must be monic, of degree `>= 1`, and irreducible over `F_q`; `q` must
    /// be prime.
    pub fn new(q: u64, modulus: Vec<u64>) -> Result<Self> {
        if !factor::is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        let m = match poly::degree(&modulus) {
            Some(d) if d >= 1 && d + 1 == modulus.len() => d,
            _ => {
                return Err(Error::InvalidModulus(
                    "modulus must be non-zero with an exact-degree coefficient list".into(),
                ))
            }
        };
        if modulus[m] != 1 {
            return Err(Error::InvalidModulus("modulus must be monic".into()));
        }
        if modulus.iter().any(|&c| c >= q) {
            return Err(Error::InvalidModulus("modulus coefficients must lie in [0, q)".into()));
        }
        if !poly::is_irreducible(&modulus, q) {
            return Err(Error::InvalidModulus("modulus is reducible".into()));
        }
        let packed_modulus = if q == 2 && m <= 64 {
            let mut bits: u128 = 0;
            for (i, &c) in modulus.iter().enumerate() {
                if c == 1 {
                    bits |= 1 << i;
                }
            }
            Some(bits)
        } else {
            None
        };
        // Columns of the Frobenius map: (X^j)^q = (X^q)^j mod modulus.
        let xq = poly::pow_mod(&[0, 1], q as u128, &modulus, q);
        let mut frob_cols = Vec::with_capacity(m);
        let mut col = vec![0u64; m];
        col[0] = 1;
        frob_cols.push(col.clone());
        for _ in 1..m {
            col = poly::mul_mod(&col, &xq, &modulus, q);
            col.resize(m, 0);
            frob_cols.push(col.clone());
        }
        Ok(FieldSpec { q, m, modulus, frob_cols, packed_modulus })
    }

    /// The field with the first irreducible modulus of degree `m` in
    /// lexicographic order (constant coefficient varying fastest).
    pub fn with_default_modulus(q: u64, m: usize) -> Result<Self> {
        if !factor::is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        if m == 0 {
            return Err(Error::InvalidModulus("extension degree must be >= 1".into()));
        }
        FieldSpec::new(q, poly::find_irreducible(q, m))
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Extension degree `M`.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// Number of field elements `q^M`.
    pub fn element_count(&self) -> u128 {
        (self.q as u128).pow(self.m as u32)
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { coords: vec![0; self.m] }
    }

    pub fn one(&self) -> FieldElement {
        let mut coords = vec![0; self.m];
        coords[0] = 1;
        FieldElement { coords }
    }

    /// A ground-field constant embedded as a degree-zero element.
    pub fn embed_ground(&self, c: u64) -> FieldElement {
        let mut coords = vec![0; self.m];
        coords[0] = c % self.q;
        FieldElement { coords }
    }

    /// Validates raw coordinates as an element of this field.
    pub fn element(&self, coords: Vec<u64>) -> Result<FieldElement> {
        if coords.len() != self.m || coords.iter().any(|&c| c >= self.q) {
            return Err(Error::FieldMismatch);
        }
        Ok(FieldElement { coords })
    }

    /// The element whose coordinates are the base-`q` digits of `index`,
    /// constant term varying fastest.
    pub fn element_from_index(&self, mut index: u128) -> FieldElement {
        let mut coords = vec![0u64; self.m];
        for c in coords.iter_mut() {
            *c = (index % self.q as u128) as u64;
            index /= self.q as u128;
        }
        FieldElement { coords }
    }

    /// Inverse of [`element_from_index`](Self::element_from_index).
    pub fn index_of(&self, a: &FieldElement) -> u128 {
        let mut idx: u128 = 0;
        for &c in a.coords.iter().rev() {
            idx = idx * self.q as u128 + c as u128;
        }
        idx
    }

    pub fn random_element<R: rand::Rng>(&self, rng: &mut R) -> FieldElement {
        FieldElement { coords: (0..self.m).map(|_| rng.gen_range(0..self.q)).collect() }
    }

    fn check(&self, a: &FieldElement) {
        assert_eq!(a.coords.len(), self.m, "element belongs to a different field");
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.check(a);
        self.check(b);
        let coords = a
            .coords
            .iter()
            .zip(&b.coords)
            .map(|(&x, &y)| poly::fq_add(x, y, self.q))
            .collect();
        FieldElement { coords }
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.check(a);
        self.check(b);
        let coords = a
            .coords
            .iter()
            .zip(&b.coords)
            .map(|(&x, &y)| poly::fq_sub(x, y, self.q))
            .collect();
        FieldElement { coords }
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        self.sub(&self.zero(), a)
    }

    /// Scales by a ground-field constant.
    pub fn scale(&self, a: &FieldElement, c: u64) -> FieldElement {
        self.check(a);
        let c = c % self.q;
        let coords = a.coords.iter().map(|&x| poly::fq_mul(x, c, self.q)).collect();
        FieldElement { coords }
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.check(a);
        self.check(b);
        if let Some(modbits) = self.packed_modulus {
            return self.mul_packed(a, b, modbits);
        }
        let mut coords = poly::mul_mod(&a.coords, &b.coords, &self.modulus, self.q);
        coords.resize(self.m, 0);
        FieldElement { coords }
    }

    // Carryless multiply and reduce, for q = 2 with M <= 64.
    fn mul_packed(&self, a: &FieldElement, b: &FieldElement, modbits: u128) -> FieldElement {
        let mut aw: u64 = 0;
        for (i, &c) in a.coords.iter().enumerate() {
            aw |= (c as u64) << i;
        }
        let mut prod: u128 = 0;
        for (i, &c) in b.coords.iter().enumerate() {
            if c == 1 {
                prod ^= (aw as u128) << i;
            }
        }
        let m = self.m;
        for i in (m..2 * m).rev() {
            if (prod >> i) & 1 == 1 {
                prod ^= modbits << (i - m);
            }
        }
        let coords = (0..m).map(|i| ((prod >> i) & 1) as u64).collect();
        FieldElement { coords }
    }

    /// Multiplicative inverse; the zero element has none.
    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement> {
        self.check(a);
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut coords =
            poly::inv_mod(&a.coords, &self.modulus, self.q).ok_or(Error::DivisionByZero)?;
        coords.resize(self.m, 0);
        Ok(FieldElement { coords })
    }

    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &FieldElement, mut exp: u128) -> FieldElement {
        self.check(a);
        let mut acc = self.one();
        let mut base = a.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            exp >>= 1;
        }
        acc
    }

    /// Checked binary arithmetic that reports mixed-field operands as an
    /// error instead of panicking. `op` is one of `add sub mul div`.
    pub fn checked_op(&self, op: &str, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        for x in [a, b] {
            if x.coords.len() != self.m || x.coords.iter().any(|&c| c >= self.q) {
                return Err(Error::FieldMismatch);
            }
        }
        match op {
            "add" => Ok(self.add(a, b)),
            "sub" => Ok(self.sub(a, b)),
            "mul" => Ok(self.mul(a, b)),
            "div" => self.div(a, b),
            other => Err(Error::Config(format!("unknown operation `{other}`"))),
        }
    }

    /// `s`-fold Frobenius power `a^(q^s)`, computed through the precomputed
    /// linear map. `frobenius(a, M) = a`, so `s` acts modulo `M`.
    pub fn frobenius(&self, a: &FieldElement, s: usize) -> FieldElement {
        self.check(a);
        let mut coords = a.coords.clone();
        for _ in 0..(s % self.m.max(1)) {
            coords = self.apply_frobenius_once(&coords);
        }
        FieldElement { coords }
    }

    fn apply_frobenius_once(&self, coords: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; self.m];
        for (j, &c) in coords.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (i, &fij) in self.frob_cols[j].iter().enumerate() {
                if fij != 0 {
                    out[i] = poly::fq_add(out[i], poly::fq_mul(c, fij, self.q), self.q);
                }
            }
        }
        out
    }

    /// Whether `a` generates the multiplicative group: `a^((q^M-1)/p) != 1`
    /// for every prime `p` dividing `q^M - 1`.
    ///
    /// Requires factoring `q^M - 1`, which is refused (rather than answered
    /// probabilistically) once the group order no longer fits in 64 bits.
    pub fn is_primitive(&self, a: &FieldElement) -> Result<bool> {
        if a.is_zero() {
            return Err(Error::ZeroElement);
        }
        let primes = factor::factor_group_order(self.q, self.m)?;
        Ok(self.is_primitive_with(a, &primes))
    }

    fn is_primitive_with(&self, a: &FieldElement, primes: &[u64]) -> bool {
        let order = match factor::group_order(self.q, self.m) {
            Ok(o) => o,
            Err(_) => return false,
        };
        if order == 1 {
            return true; // the trivial group: every non-zero element generates it
        }
        let one = self.one();
        if self.pow(a, order as u128) != one {
            return false; // defensive; cannot happen in a field
        }
        primes.iter().all(|&p| self.pow(a, (order / p) as u128) != one)
    }

    /// Whether the conjugates `a^[0], .., a^[M-1]` are linearly independent
    /// over `F_q`.
    pub fn is_normal(&self, a: &FieldElement) -> bool {
        self.conjugate_matrix(a).rank() == self.m
    }

    /// `M x M` matrix whose column `i` holds the polynomial coordinates of
    /// `a^[i]`.
    pub fn conjugate_matrix(&self, a: &FieldElement) -> GroundMatrix {
        self.check(a);
        let mut mat = GroundMatrix::zeros(self.q, self.m, self.m);
        let mut conj = a.coords.clone();
        for i in 0..self.m {
            for (r, &c) in conj.iter().enumerate() {
                mat.set(r, i, c);
            }
            conj = self.apply_frobenius_once(&conj);
        }
        mat
    }

    /// Trace of `a` down to the ground field: the sum of all conjugates,
    /// returned as a ground-field value.
    pub fn trace(&self, a: &FieldElement) -> u64 {
        let mut acc = a.clone();
        let mut conj = a.coords.clone();
        for _ in 1..self.m {
            conj = self.apply_frobenius_once(&conj);
            for (i, &c) in conj.iter().enumerate() {
                acc.coords[i] = poly::fq_add(acc.coords[i], c, self.q);
            }
        }
        // the trace is Frobenius-fixed, hence a constant
        debug_assert!(acc.coords[1..].iter().all(|&c| c == 0));
        acc.coords[0]
    }

    /// First element, in lexicographic coordinate order with the constant
    /// term varying fastest, that is both primitive and normal.
    pub fn find_primitive_normal(&self) -> Result<FieldElement> {
        let primes = factor::factor_group_order(self.q, self.m)?;
        // A normal element must have non-zero trace (the all-ones vector
        // would otherwise relate its conjugates), and the trace is linear,
        // so traces of the basis monomials give an O(M) rejection test.
        let monomial_traces: Vec<u64> = (0..self.m)
            .map(|i| {
                let mut coords = vec![0u64; self.m];
                coords[i] = 1;
                self.trace(&FieldElement { coords })
            })
            .collect();
        let count = self.element_count();
        let mut idx: u128 = 1;
        while idx < count {
            let a = self.element_from_index(idx);
            let trace = a
                .coords
                .iter()
                .zip(&monomial_traces)
                .fold(0u64, |acc, (&c, &t)| poly::fq_add(acc, poly::fq_mul(c, t, self.q), self.q));
            if trace != 0 && self.is_primitive_with(&a, &primes) && self.is_normal(&a) {
                return Ok(a);
            }
            idx += 1;
        }
        unreachable!("every finite extension contains a primitive normal element")
    }
}

/// Distinct prime divisors of `q^M - 1`, the data behind primitivity
/// certification.
pub fn primitivity_primes(spec: &FieldSpec) -> Result<Vec<u64>> {
    factor::factor_group_order(spec.q(), spec.m())
}

/// A normal basis `alpha^[0], .., alpha^[M-1]` of `F_{q^M}` together with the
/// change-of-basis matrices between it and the polynomial basis.
#[derive(Debug, Clone)]
pub struct NormalBasis {
    spec: Arc<FieldSpec>,
    alpha: FieldElement,
    basis_matrix: GroundMatrix,
    inverse_matrix: GroundMatrix,
}

impl NormalBasis {
    /// Fails with [`Error::NotNormal`] when the conjugates of `alpha` are
    /// dependent.
    pub fn new(spec: Arc<FieldSpec>, alpha: FieldElement) -> Result<Self> {
        let basis_matrix = spec.conjugate_matrix(&alpha);
        let inverse_matrix = basis_matrix.inverse().ok_or(Error::NotNormal)?;
        Ok(NormalBasis { spec, alpha, basis_matrix, inverse_matrix })
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }

    pub fn alpha(&self) -> &FieldElement {
        &self.alpha
    }

    /// `alpha^[i]`.
    pub fn conjugate(&self, i: usize) -> FieldElement {
        self.spec.frobenius(&self.alpha, i)
    }

    /// Column `i` of this matrix holds the polynomial coordinates of
    /// `alpha^[i]`; it is non-singular exactly because the basis is normal.
    pub fn basis_matrix(&self) -> &GroundMatrix {
        &self.basis_matrix
    }

    pub fn inverse_matrix(&self) -> &GroundMatrix {
        &self.inverse_matrix
    }

    /// Coordinates of `a` in the normal basis: the unique `c` with
    /// `a = sum_i c_i alpha^[i]`.
    pub fn normal_coords(&self, a: &FieldElement) -> Vec<u64> {
        self.inverse_matrix.mul_vec(a.coords())
    }

    /// Rebuilds an element from its normal-basis coordinates.
    pub fn from_normal_coords(&self, coords: &[u64]) -> FieldElement {
        assert_eq!(coords.len(), self.spec.m());
        let poly_coords = self.basis_matrix.mul_vec(coords);
        FieldElement { coords: poly_coords }
    }

    /// Largest Frobenius power present in the normal-basis expansion of `a`
    /// (its q-degree), or `None` for zero.
    pub fn qdeg(&self, a: &FieldElement) -> Option<usize> {
        self.normal_coords(a).iter().rposition(|&c| c != 0)
    }

    /// The isomorphism `phi_n`: an `M x n` ground matrix whose column `j`
    /// holds the normal coordinates of `x_j`.
    pub fn phi(&self, x: &[FieldElement]) -> GroundMatrix {
        let m = self.spec.m();
        let mut mat = GroundMatrix::zeros(self.spec.q(), m, x.len());
        for (j, e) in x.iter().enumerate() {
            let col = self.normal_coords(e);
            for (i, &c) in col.iter().enumerate() {
                mat.set(i, j, c);
            }
        }
        mat
    }

    /// Rank of a packet: the `F_q`-rank of `phi(x)`.
    pub fn packet_rank(&self, x: &[FieldElement]) -> usize {
        self.phi(x).rank()
    }
}
