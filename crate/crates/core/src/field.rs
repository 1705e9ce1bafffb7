//! Exact arithmetic in the prime field F_p for a runtime-configured prime p > 3.
//!
//! Scalars are canonical residues in `0..p` and do not carry the modulus;
//! the ambient [`Prime`] is passed by context. Mixing residues from different
//! primes is a programming error caught by debug assertions.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NonPrime(u64),
    /// p = 2 and p = 3 are rejected separately: the Witt algebra degenerates
    /// there (solvable at p = 2, isomorphic to sl2 at p = 3).
    #[error("characteristic {0} is too small: a prime p > 3 is required")]
    CharacteristicTooSmall(u64),
    #[error("division by zero")]
    DivisionByZero,
}

/// A canonical residue modulo some prime p, with 0 <= value < p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct FpScalar(u64);

impl FpScalar {
    pub const ZERO: FpScalar = FpScalar(0);
    pub const ONE: FpScalar = FpScalar(1);

    #[inline]
    pub fn value(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FpScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A validated prime p > 3. All field operations hang off this context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Prime(u64);

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    if n % 3 == 0 {
        return n == 3;
    }
    let mut d = 5u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 || n % (d + 2) == 0 {
            return false;
        }
        d += 6;
    }
    true
}

impl Prime {
    /// Validates that `n` is a prime greater than 3.
    pub fn new(n: u64) -> Result<Prime, FieldError> {
        if n == 2 || n == 3 {
            return Err(FieldError::CharacteristicTooSmall(n));
        }
        if !is_prime(n) {
            return Err(FieldError::NonPrime(n));
        }
        Ok(Prime(n))
    }

    #[inline]
    pub fn value(self) -> u64 {
        self.0
    }

    #[inline]
    fn check(self, a: FpScalar) {
        debug_assert!(
            a.0 < self.0,
            "residue {} is not canonical modulo {}",
            a.0,
            self.0
        );
    }

    /// Reduces an arbitrary integer to its canonical residue.
    #[inline]
    pub fn scalar(self, n: u64) -> FpScalar {
        FpScalar(n % self.0)
    }

    /// Reduces a signed integer to its canonical residue.
    #[inline]
    pub fn scalar_i64(self, n: i64) -> FpScalar {
        FpScalar(n.rem_euclid(self.0 as i64) as u64)
    }

    #[inline]
    pub fn zero(self) -> FpScalar {
        FpScalar::ZERO
    }

    #[inline]
    pub fn one(self) -> FpScalar {
        FpScalar::ONE
    }

    #[inline]
    pub fn add(self, a: FpScalar, b: FpScalar) -> FpScalar {
        self.check(a);
        self.check(b);
        let s = a.0 + b.0;
        FpScalar(if s >= self.0 { s - self.0 } else { s })
    }

    #[inline]
    pub fn sub(self, a: FpScalar, b: FpScalar) -> FpScalar {
        self.check(a);
        self.check(b);
        let s = a.0 + self.0 - b.0;
        FpScalar(if s >= self.0 { s - self.0 } else { s })
    }

    #[inline]
    pub fn neg(self, a: FpScalar) -> FpScalar {
        self.check(a);
        FpScalar(if a.0 == 0 { 0 } else { self.0 - a.0 })
    }

    #[inline]
    pub fn mul(self, a: FpScalar, b: FpScalar) -> FpScalar {
        self.check(a);
        self.check(b);
        FpScalar(((a.0 as u128 * b.0 as u128) % self.0 as u128) as u64)
    }

    /// Multiplicative inverse by extended Euclid.
    pub fn inv(self, a: FpScalar) -> Result<FpScalar, FieldError> {
        self.check(a);
        if a.0 == 0 {
            return Err(FieldError::DivisionByZero);
        }
        let (mut r0, mut r1) = (a.0 as i128, self.0 as i128);
        let (mut s0, mut s1) = (1i128, 0i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        debug_assert_eq!(r0, 1, "gcd(a, p) must be 1 for prime p");
        Ok(FpScalar(s0.rem_euclid(self.0 as i128) as u64))
    }

    /// a / b, failing on b = 0.
    #[inline]
    pub fn div(self, a: FpScalar, b: FpScalar) -> Result<FpScalar, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(self, a: FpScalar, mut e: u64) -> FpScalar {
        self.check(a);
        let mut base = a;
        let mut acc = FpScalar::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// All residues 0, 1, ..., p-1.
    pub fn residues(self) -> impl Iterator<Item = FpScalar> {
        (0..self.0).map(FpScalar)
    }

    /// All nonzero residues.
    pub fn units(self) -> impl Iterator<Item = FpScalar> {
        (1..self.0).map(FpScalar)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_prime_accepts_five() {
        assert_eq!(Prime::new(5).unwrap().value(), 5);
    }

    #[test]
    fn make_prime_rejects_small_characteristic() {
        assert_eq!(Prime::new(3), Err(FieldError::CharacteristicTooSmall(3)));
        assert_eq!(Prime::new(2), Err(FieldError::CharacteristicTooSmall(2)));
    }

    #[test]
    fn make_prime_rejects_composites() {
        assert_eq!(Prime::new(9), Err(FieldError::NonPrime(9)));
        assert_eq!(Prime::new(1), Err(FieldError::NonPrime(1)));
        assert_eq!(Prime::new(0), Err(FieldError::NonPrime(0)));
        assert_eq!(Prime::new(91), Err(FieldError::NonPrime(91)));
    }

    #[test]
    fn inv_small_cases() {
        let p5 = Prime::new(5).unwrap();
        assert_eq!(p5.inv(p5.scalar(2)).unwrap(), p5.scalar(3));
        let p7 = Prime::new(7).unwrap();
        assert_eq!(p7.inv(p7.scalar(1)).unwrap(), p7.scalar(1));
        assert_eq!(p5.inv(p5.zero()), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn inv_roundtrip_all_units() {
        for q in [5u64, 7, 11, 13] {
            let p = Prime::new(q).unwrap();
            for a in p.units() {
                let b = p.inv(a).unwrap();
                assert_eq!(p.mul(a, b), p.one());
                assert_eq!(p.inv(b).unwrap(), a);
            }
        }
    }

    #[test]
    fn fermat_little_theorem() {
        for q in [5u64, 7, 11, 13] {
            let p = Prime::new(q).unwrap();
            for a in p.residues() {
                assert_eq!(p.pow(a, q), a);
            }
        }
    }

    #[test]
    fn wilson_factorial() {
        for q in [5u64, 7, 11, 13] {
            let p = Prime::new(q).unwrap();
            let mut acc = p.one();
            for a in p.units() {
                acc = p.mul(acc, a);
            }
            assert_eq!(acc, p.neg(p.one()));
        }
    }

    #[test]
    fn signed_reduction() {
        let p = Prime::new(7).unwrap();
        assert_eq!(p.scalar_i64(-1), p.scalar(6));
        assert_eq!(p.scalar_i64(-14), p.zero());
        assert_eq!(p.scalar_i64(15), p.one());
    }
}
