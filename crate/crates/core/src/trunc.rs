//! The truncated polynomial algebra A = F_p[x]/(x^p).
//!
//! Elements are dense length-p coefficient vectors; truncation is structural
//! (degree >= p terms simply do not exist). Besides ring arithmetic this
//! module provides the distinguished derivation D with D(x^i) = i x^{i-1},
//! substitution f(g(x)), and compositional inversion, which together realize
//! the automorphism group of A.

use thiserror::Error;

use crate::field::{FpScalar, Prime};

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum TruncError {
    /// Substitution target has a nonzero constant term, so powers would not
    /// truncate consistently.
    #[error("substitution target must have zero constant term")]
    NonNilpotentSubstituend,
    /// No compositional inverse: the linear coefficient vanishes (or the
    /// constant term is nonzero).
    #[error("polynomial has no compositional inverse")]
    NotInvertible,
}

/// An element of F_p[x]/(x^p) as a length-p coefficient vector;
/// `coeffs[i]` is the coefficient of x^i.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruncPoly {
    p: Prime,
    coeffs: Vec<FpScalar>,
}

impl TruncPoly {
    pub fn zero(p: Prime) -> Self {
        TruncPoly {
            p,
            coeffs: vec![FpScalar::ZERO; p.value() as usize],
        }
    }

    pub fn one(p: Prime) -> Self {
        Self::monomial(p, 0, FpScalar::ONE)
    }

    pub fn x(p: Prime) -> Self {
        Self::monomial(p, 1, FpScalar::ONE)
    }

    pub fn monomial(p: Prime, degree: usize, c: FpScalar) -> Self {
        assert!(degree < p.value() as usize, "degree exceeds truncation");
        let mut out = Self::zero(p);
        out.coeffs[degree] = c;
        out
    }

    pub fn from_coeffs(p: Prime, coeffs: Vec<FpScalar>) -> Self {
        assert_eq!(
            coeffs.len(),
            p.value() as usize,
            "coefficient vector must have length p"
        );
        TruncPoly { p, coeffs }
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.p
    }

    #[inline]
    pub fn coeff(&self, i: usize) -> FpScalar {
        self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[FpScalar] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &TruncPoly) -> TruncPoly {
        let p = self.p;
        TruncPoly {
            p,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| p.add(a, b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &TruncPoly) -> TruncPoly {
        let p = self.p;
        TruncPoly {
            p,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| p.sub(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: FpScalar) -> TruncPoly {
        let p = self.p;
        TruncPoly {
            p,
            coeffs: self.coeffs.iter().map(|&a| p.mul(a, c)).collect(),
        }
    }

    /// Product in A: representatives multiply and every term of degree >= p
    /// is discarded.
    pub fn mul(&self, other: &TruncPoly) -> TruncPoly {
        let p = self.p;
        let n = self.coeffs.len();
        let mut out = Self::zero(p);
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().take(n - i).enumerate() {
                if b.is_zero() {
                    continue;
                }
                out.coeffs[i + j] = p.add(out.coeffs[i + j], p.mul(a, b));
            }
        }
        out
    }

    /// The derivation D: x^i -> i x^{i-1}, extended linearly.
    pub fn derivative(&self) -> TruncPoly {
        let p = self.p;
        let mut out = Self::zero(p);
        for i in 1..self.coeffs.len() {
            out.coeffs[i - 1] = p.mul(self.coeffs[i], p.scalar(i as u64));
        }
        out
    }

    /// f(g(x)) reduced mod x^p; requires g(0) = 0.
    pub fn compose(&self, g: &TruncPoly) -> Result<TruncPoly, TruncError> {
        Ok(CompositionTable::new(g)?.apply(self))
    }

    /// Compositional inverse h with h(g(x)) = g(h(x)) = x, computed by
    /// triangular back-substitution degree by degree.
    pub fn comp_inverse(&self) -> Result<TruncPoly, TruncError> {
        let p = self.p;
        if !self.coeffs[0].is_zero() || self.coeffs[1].is_zero() {
            return Err(TruncError::NotInvertible);
        }
        let table = CompositionTable::new(self)?;
        let g1_inv = p.inv(self.coeffs[1]).expect("linear coefficient nonzero");
        let n = self.coeffs.len();
        let mut h = Self::zero(p);
        h.coeffs[1] = g1_inv;
        for deg in 2..n {
            // Coefficient of x^deg in sum_m h_m g^m must vanish; g^m starts at
            // degree m, so only m < deg contribute besides h_deg * g1^deg.
            let mut s = FpScalar::ZERO;
            for m in 1..deg {
                s = p.add(s, p.mul(h.coeffs[m], table.power(m).coeffs[deg]));
            }
            let lead_inv = p.inv(p.pow(self.coeffs[1], deg as u64)).unwrap();
            h.coeffs[deg] = p.mul(p.neg(s), lead_inv);
        }
        debug_assert_eq!(table.apply(&h), Self::x(p), "round-trip h(g(x)) = x");
        Ok(h)
    }
}

/// Precomputed powers g^0, ..., g^{p-1} of a substitution target, for
/// applying many substitutions into the same g.
pub struct CompositionTable {
    powers: Vec<TruncPoly>,
}

impl CompositionTable {
    pub fn new(g: &TruncPoly) -> Result<Self, TruncError> {
        if !g.coeffs[0].is_zero() {
            return Err(TruncError::NonNilpotentSubstituend);
        }
        let n = g.coeffs.len();
        let mut powers = Vec::with_capacity(n);
        powers.push(TruncPoly::one(g.p));
        for m in 1..n {
            let next = powers[m - 1].mul(g);
            powers.push(next);
        }
        Ok(CompositionTable { powers })
    }

    pub fn power(&self, m: usize) -> &TruncPoly {
        &self.powers[m]
    }

    /// f(g(x)) for the fixed g.
    pub fn apply(&self, f: &TruncPoly) -> TruncPoly {
        let p = f.p;
        let mut out = TruncPoly::zero(p);
        for (m, &c) in f.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let pw = &self.powers[m];
            for i in 0..out.coeffs.len() {
                out.coeffs[i] = p.add(out.coeffs[i], p.mul(c, pw.coeffs[i]));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream;
    use proptest::prelude::*;

    fn prime(q: u64) -> Prime {
        Prime::new(q).unwrap()
    }

    fn random_poly(p: Prime, seed: u64, ctr: u64) -> TruncPoly {
        let coeffs = stream::residues(seed, ctr, p.value() as usize, p.value())
            .into_iter()
            .map(|r| p.scalar(r))
            .collect();
        TruncPoly::from_coeffs(p, coeffs)
    }

    /// Random g with g(0) = 0 and g'(0) != 0.
    fn random_admissible(p: Prime, seed: u64, ctr: u64) -> TruncPoly {
        let mut g = random_poly(p, seed, ctr);
        g.coeffs[0] = FpScalar::ZERO;
        if g.coeffs[1].is_zero() {
            g.coeffs[1] = FpScalar::ONE;
        }
        g
    }

    #[test]
    fn x_times_top_power_truncates_to_zero() {
        for q in [5u64, 7, 11, 13] {
            let p = prime(q);
            let x = TruncPoly::x(p);
            let top = TruncPoly::monomial(p, q as usize - 1, FpScalar::ONE);
            assert!(x.mul(&top).is_zero());
        }
    }

    #[test]
    fn one_is_multiplicative_unit() {
        let p = prime(7);
        let f = random_poly(p, 1, 0);
        assert_eq!(TruncPoly::one(p).mul(&f), f);
    }

    #[test]
    fn square_of_one_plus_x() {
        let p = prime(5);
        let f = TruncPoly::one(p).add(&TruncPoly::x(p));
        let sq = f.mul(&f);
        let mut expect = TruncPoly::one(p);
        expect.coeffs[1] = p.scalar(2);
        expect.coeffs[2] = p.one();
        assert_eq!(sq, expect);
    }

    #[test]
    fn derivative_of_monomials() {
        let p = prime(5);
        assert_eq!(
            TruncPoly::monomial(p, 2, FpScalar::ONE).derivative(),
            TruncPoly::monomial(p, 1, p.scalar(2))
        );
        assert!(TruncPoly::one(p).derivative().is_zero());
    }

    #[test]
    fn p_fold_derivative_of_top_monomial_vanishes() {
        for q in [5u64, 7, 11] {
            let p = prime(q);
            let mut f = TruncPoly::monomial(p, q as usize - 1, FpScalar::ONE);
            for _ in 0..q {
                f = f.derivative();
            }
            assert!(f.is_zero());
        }
    }

    #[test]
    fn compose_examples() {
        let p = prime(5);
        // x^2 composed with 2x is 4x^2.
        let f = TruncPoly::monomial(p, 2, FpScalar::ONE);
        let g = TruncPoly::monomial(p, 1, p.scalar(2));
        assert_eq!(
            f.compose(&g).unwrap(),
            TruncPoly::monomial(p, 2, p.scalar(4))
        );
        // Composition with x is the identity.
        let h = random_poly(p, 2, 0);
        assert_eq!(h.compose(&TruncPoly::x(p)).unwrap(), h);
        // Composing x with g returns g.
        let g2 = TruncPoly::x(p).add(&TruncPoly::monomial(p, 2, FpScalar::ONE));
        assert_eq!(TruncPoly::x(p).compose(&g2).unwrap(), g2);
    }

    #[test]
    fn compose_rejects_nonzero_constant_term() {
        let p = prime(5);
        let f = TruncPoly::x(p);
        assert_eq!(
            f.compose(&TruncPoly::one(p)),
            Err(TruncError::NonNilpotentSubstituend)
        );
    }

    #[test]
    fn comp_inverse_identity_and_linear() {
        let p = prime(5);
        let x = TruncPoly::x(p);
        assert_eq!(x.comp_inverse().unwrap(), x);
        let g = TruncPoly::monomial(p, 1, p.scalar(3));
        let h = g.comp_inverse().unwrap();
        assert_eq!(h, TruncPoly::monomial(p, 1, p.inv(p.scalar(3)).unwrap()));
    }

    #[test]
    fn comp_inverse_of_x_plus_x_squared() {
        let p = prime(5);
        let g = TruncPoly::x(p).add(&TruncPoly::monomial(p, 2, FpScalar::ONE));
        let h = g.comp_inverse().unwrap();
        // Coefficients of the inverse series x - x^2 + 2x^3 - 5x^4 mod 5.
        let expect: Vec<u64> = vec![0, 1, 4, 2, 0];
        let got: Vec<u64> = h.coeffs().iter().map(|c| c.value()).collect();
        assert_eq!(got, expect);
        assert_eq!(g.compose(&h).unwrap(), TruncPoly::x(p));
        assert_eq!(h.compose(&g).unwrap(), TruncPoly::x(p));
    }

    #[test]
    fn comp_inverse_rejects_singular_linear_part() {
        let p = prime(5);
        let g = TruncPoly::monomial(p, 2, FpScalar::ONE);
        assert_eq!(g.comp_inverse(), Err(TruncError::NotInvertible));
    }

    #[test]
    fn comp_inverse_roundtrip_thousand_per_prime() {
        for q in [5u64, 7, 11, 13] {
            let p = prime(q);
            let x = TruncPoly::x(p);
            for ctr in 0..1000u64 {
                let g = random_admissible(p, 0xC0FFEE ^ q, ctr);
                let h = g.comp_inverse().unwrap();
                assert_eq!(g.compose(&h).unwrap(), x);
                assert_eq!(h.compose(&g).unwrap(), x);
            }
        }
    }

    proptest! {
        #[test]
        fn mul_commutative_associative_unital(
            qi in 0usize..4, s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()
        ) {
            let p = prime([5u64, 7, 11, 13][qi]);
            let f = random_poly(p, s1, 0);
            let g = random_poly(p, s2, 0);
            let h = random_poly(p, s3, 0);
            prop_assert_eq!(f.mul(&g), g.mul(&f));
            prop_assert_eq!(f.mul(&g).mul(&h), f.mul(&g.mul(&h)));
            prop_assert_eq!(f.mul(&TruncPoly::one(p)), f);
        }

        #[test]
        fn derivative_is_a_derivation(
            qi in 0usize..4, s1 in any::<u64>(), s2 in any::<u64>()
        ) {
            let p = prime([5u64, 7, 11, 13][qi]);
            let f = random_poly(p, s1, 1);
            let g = random_poly(p, s2, 1);
            let lhs = f.mul(&g).derivative();
            let rhs = f.derivative().mul(&g).add(&f.mul(&g.derivative()));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn composition_is_associative(
            qi in 0usize..4, s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()
        ) {
            let p = prime([5u64, 7, 11, 13][qi]);
            let f = random_poly(p, s1, 2);
            let g = random_admissible(p, s2, 2);
            let h = random_admissible(p, s3, 2);
            let lhs = f.compose(&g).unwrap().compose(&h).unwrap();
            let rhs = f.compose(&g.compose(&h).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
