//! The automorphism group G = Aut(W1), realized through Aut(A).
//!
//! An automorphism is stored by its substitution coefficients: phi(x) =
//! a_1 x + a_2 x^2 + ... + a_{p-1} x^{p-1} with a_1 != 0. The induced map on
//! W1 is conjugation X -> phi o X o phi^{-1}; its p x p matrix is computed on
//! demand and memoized, since orbit searches apply one phi to many elements.
//!
//! G decomposes as torus x unipotent radical: phi = sigma_{a_1} o u with
//! u(x) = x + (higher order).

use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::codec::{self, ParseError};
use crate::field::{FpScalar, Prime};
use crate::linalg::FpMatrix;
use crate::trunc::{CompositionTable, TruncPoly};
use crate::witt::WittElement;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum AutError {
    /// a_1 = 0: the substitution is not invertible.
    #[error("linear coefficient a_1 must be nonzero")]
    SingularLinearPart,
}

/// An automorphism of A (equivalently of W1), by substitution coefficients
/// a_1, ..., a_{p-1}.
pub struct Automorphism {
    p: Prime,
    a: Vec<FpScalar>,
    matrix: OnceLock<FpMatrix>,
}

impl Clone for Automorphism {
    fn clone(&self) -> Self {
        Automorphism {
            p: self.p,
            a: self.a.clone(),
            matrix: self.matrix.clone(),
        }
    }
}

impl PartialEq for Automorphism {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.a == other.a
    }
}

impl Eq for Automorphism {}

impl fmt::Debug for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Automorphism({})", self.encode())
    }
}

impl Automorphism {
    /// Validates coefficients (a_1, ..., a_{p-1}); a_1 must be nonzero.
    pub fn from_coeffs(p: Prime, a: Vec<FpScalar>) -> Result<Self, AutError> {
        assert_eq!(
            a.len(),
            p.value() as usize - 1,
            "coefficient vector must have length p-1"
        );
        if a[0].is_zero() {
            return Err(AutError::SingularLinearPart);
        }
        Ok(Automorphism {
            p,
            a,
            matrix: OnceLock::new(),
        })
    }

    pub fn identity(p: Prime) -> Self {
        Self::scaling(p, FpScalar::ONE).unwrap()
    }

    /// The torus element sigma_a: x -> a x.
    pub fn scaling(p: Prime, a: FpScalar) -> Result<Self, AutError> {
        let mut v = vec![FpScalar::ZERO; p.value() as usize - 1];
        v[0] = a;
        Self::from_coeffs(p, v)
    }

    /// The one-parameter unipotent x -> x + t x^m, for 2 <= m <= p-1.
    pub fn elementary_unipotent(p: Prime, m: usize, t: FpScalar) -> Self {
        assert!((2..p.value() as usize).contains(&m));
        let mut v = vec![FpScalar::ZERO; p.value() as usize - 1];
        v[0] = FpScalar::ONE;
        v[m - 1] = t;
        Self::from_coeffs(p, v).unwrap()
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.p
    }

    /// Coefficients (a_1, ..., a_{p-1}).
    pub fn coeffs(&self) -> &[FpScalar] {
        &self.a
    }

    pub fn is_identity(&self) -> bool {
        self.a[0] == FpScalar::ONE && self.a[1..].iter().all(|c| c.is_zero())
    }

    /// phi(x) as an element of A (zero constant term).
    pub fn poly(&self) -> TruncPoly {
        let mut coeffs = vec![FpScalar::ZERO; self.p.value() as usize];
        coeffs[1..].copy_from_slice(&self.a);
        TruncPoly::from_coeffs(self.p, coeffs)
    }

    fn build_matrix(&self) -> FpMatrix {
        let p = self.p;
        let n = p.value() as usize;
        let g = self.poly();
        let ginv = g.comp_inverse().expect("a_1 != 0 by construction");
        let into_g = CompositionTable::new(&g).expect("phi(0) = 0");
        let mut m = FpMatrix::zeros(n, n);
        for slot in 0..n {
            let e = WittElement::basis(p, slot as i64 - 1);
            // (phi o X o phi^{-1})(x) = phi(X(phi^{-1}(x))).
            let image = into_g.apply(&e.act_on(&ginv));
            for r in 0..n {
                m.set(r, slot, image.coeff(r));
            }
        }
        m
    }

    fn matrix(&self) -> &FpMatrix {
        self.matrix.get_or_init(|| self.build_matrix())
    }

    /// The induced action on W1: the element whose action on A is
    /// phi o X o phi^{-1}.
    pub fn apply(&self, x: &WittElement) -> WittElement {
        let col = self.matrix().apply(x.coeffs(), self.p);
        WittElement::from_coeffs(self.p, col)
    }

    /// Map composition: apply `other` first, then `self`. Satisfies
    /// compose(phi, psi).apply(x) = phi.apply(psi.apply(x)).
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        // As maps on A, (phi o psi)(x) = phi(psi(x)) = psi_poly(phi_poly(x)).
        let poly = other
            .poly()
            .compose(&self.poly())
            .expect("substitution targets have zero constant term");
        Self::from_coeffs(self.p, poly.coeffs()[1..].to_vec())
            .expect("product of units is a unit")
    }

    /// The inverse automorphism: compose(phi, invert(phi)) is the identity.
    pub fn invert(&self) -> Automorphism {
        let inv = self.poly().comp_inverse().expect("a_1 != 0");
        Self::from_coeffs(self.p, inv.coeffs()[1..].to_vec()).expect("inverse is a unit")
    }

    /// Unique decomposition phi = sigma_a o u with u unipotent (u_1 = 1);
    /// returns (a, u).
    pub fn decompose(&self) -> (FpScalar, Automorphism) {
        let p = self.p;
        let a = self.a[0];
        let a_inv = p.inv(a).expect("a_1 != 0");
        // From u(a x) = phi(x): u_i = phi_i * a^{-i}.
        let mut u = Vec::with_capacity(self.a.len());
        let mut pow = a_inv;
        for &c in &self.a {
            u.push(p.mul(c, pow));
            pow = p.mul(pow, a_inv);
        }
        let unipotent = Self::from_coeffs(p, u).expect("u_1 = 1");
        debug_assert_eq!(unipotent.a[0], FpScalar::ONE);
        (a, unipotent)
    }

    /// Comma-separated residues "a_1,...,a_{p-1}".
    pub fn encode(&self) -> String {
        codec::encode_residues(&self.a)
    }

    pub fn parse(p: Prime, s: &str) -> Result<Automorphism, ParseError> {
        let a = codec::parse_residues(p, s, p.value() as usize - 1)?;
        Automorphism::from_coeffs(p, a).map_err(|_| ParseError::BadInteger("a_1 = 0".into()))
    }

    /// Draws a uniformly random automorphism from a deterministic stream.
    pub fn random(p: Prime, seed: u64, counter: u64) -> Automorphism {
        let q = p.value();
        let n = q as usize - 1;
        let raw = crate::stream::residues(seed, counter, n, q);
        let mut a: Vec<FpScalar> = raw.into_iter().map(|r| p.scalar(r)).collect();
        if a[0].is_zero() {
            // Bump into the unit group deterministically.
            a[0] = FpScalar::ONE;
        }
        Automorphism::from_coeffs(p, a).unwrap()
    }
}
