//! The Witt algebra W1 = Der(F_p[x]/(x^p)).
//!
//! Elements are stored on the basis (D, xD, x^2 D, ..., x^{p-1} D); the
//! coefficient of x^{i+1} D is written k_i for i = -1, 0, ..., p-2, matching
//! the serialization order "k_{-1},k_0,...,k_{p-2}".

use thiserror::Error;

use crate::codec::{self, ParseError};
use crate::field::{FpScalar, Prime};
use crate::linalg::FpMatrix;
use crate::trunc::TruncPoly;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum WittError {
    /// The p-th matrix power failed to be a derivation matrix. This signals
    /// an implementation bug, never bad input.
    #[error("p-th power of operator is not a derivation")]
    NotADerivation,
}

/// An element of W1 as a length-p coefficient vector: slot j holds the
/// coefficient of x^j D, i.e. k_{j-1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WittElement {
    p: Prime,
    k: Vec<FpScalar>,
}

impl WittElement {
    pub fn zero(p: Prime) -> Self {
        WittElement {
            p,
            k: vec![FpScalar::ZERO; p.value() as usize],
        }
    }

    /// The basis element x^{i+1} D for -1 <= i <= p-2.
    pub fn basis(p: Prime, i: i64) -> Self {
        let mut out = Self::zero(p);
        out.set_coeff(i, FpScalar::ONE);
        out
    }

    /// From coefficients in the order (k_{-1}, k_0, ..., k_{p-2}).
    pub fn from_coeffs(p: Prime, k: Vec<FpScalar>) -> Self {
        assert_eq!(
            k.len(),
            p.value() as usize,
            "coefficient vector must have length p"
        );
        WittElement { p, k }
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.p
    }

    /// Coefficient k_i of the basis element x^{i+1} D.
    #[inline]
    pub fn coeff(&self, i: i64) -> FpScalar {
        self.k[(i + 1) as usize]
    }

    pub fn set_coeff(&mut self, i: i64, c: FpScalar) {
        self.k[(i + 1) as usize] = c;
    }

    /// Coefficients in serialization order (k_{-1}, ..., k_{p-2}).
    pub fn coeffs(&self) -> &[FpScalar] {
        &self.k
    }

    pub fn is_zero(&self) -> bool {
        self.k.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &WittElement) -> WittElement {
        let p = self.p;
        WittElement {
            p,
            k: self
                .k
                .iter()
                .zip(&other.k)
                .map(|(&a, &b)| p.add(a, b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &WittElement) -> WittElement {
        let p = self.p;
        WittElement {
            p,
            k: self
                .k
                .iter()
                .zip(&other.k)
                .map(|(&a, &b)| p.sub(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: FpScalar) -> WittElement {
        let p = self.p;
        WittElement {
            p,
            k: self.k.iter().map(|&a| p.mul(a, c)).collect(),
        }
    }

    pub fn neg(&self) -> WittElement {
        let p = self.p;
        WittElement {
            p,
            k: self.k.iter().map(|&a| p.neg(a)).collect(),
        }
    }

    /// The Lie bracket: bilinear extension of
    /// [x^{i+1} D, x^{j+1} D] = (j - i) x^{i+j+1} D, truncating terms whose
    /// degree exceeds p-1.
    pub fn bracket(&self, other: &WittElement) -> WittElement {
        let p = self.p;
        let n = self.k.len();
        let mut out = Self::zero(p);
        for a in 0..n {
            let ka = self.k[a];
            if ka.is_zero() {
                continue;
            }
            for b in 0..n {
                if a + b == 0 || a + b - 1 >= n {
                    continue;
                }
                let kb = other.k[b];
                if kb.is_zero() {
                    continue;
                }
                // Paper indices i = a-1, j = b-1, so j - i = b - a.
                let c = p.scalar_i64(b as i64 - a as i64);
                let t = a + b - 1;
                out.k[t] = p.add(out.k[t], p.mul(c, p.mul(ka, kb)));
            }
        }
        out
    }

    /// Action on A: X(f) = sum_i k_i x^{i+1} D(f).
    pub fn act_on(&self, f: &TruncPoly) -> TruncPoly {
        let p = self.p;
        let n = self.k.len();
        let df = f.derivative();
        let mut out = vec![FpScalar::ZERO; n];
        for a in 0..n {
            let ka = self.k[a];
            if ka.is_zero() {
                continue;
            }
            for d in 0..n - a {
                let c = df.coeff(d);
                if c.is_zero() {
                    continue;
                }
                out[a + d] = p.add(out[a + d], p.mul(ka, c));
            }
        }
        TruncPoly::from_coeffs(p, out)
    }

    /// The matrix of X on the canonical basis (1, x, ..., x^{p-1}) of A:
    /// column j is X(x^j) in coordinates, so entry (r, j) is j * k_{r-j}.
    pub fn matrix_rep(&self) -> FpMatrix {
        let p = self.p;
        let n = self.k.len();
        let mut m = FpMatrix::zeros(n, n);
        for j in 1..n {
            let jc = p.scalar(j as u64);
            for r in 0..n {
                // slot index of k_{r-j} is r - j + 1
                let slot = r as i64 - j as i64 + 1;
                if slot < 0 || slot >= n as i64 {
                    continue;
                }
                m.set(r, j, p.mul(jc, self.k[slot as usize]));
            }
        }
        m
    }

    /// Reads a derivation back off its operator matrix via the image of x,
    /// verifying that the matrix really is a derivation matrix.
    fn from_operator_matrix(p: Prime, m: &FpMatrix) -> Result<WittElement, WittError> {
        let k = m.column(1);
        let elem = WittElement { p, k };
        if elem.matrix_rep() == *m {
            Ok(elem)
        } else {
            Err(WittError::NotADerivation)
        }
    }

    /// The restricted p-th power X^{[p]}: the ordinary p-th power of X as an
    /// operator on A, which is again a derivation.
    pub fn p_power(&self) -> Result<WittElement, WittError> {
        let p = self.p;
        let m = self.matrix_rep().pow(p.value(), p);
        Self::from_operator_matrix(p, &m)
    }

    /// The (p-1) x (p-1) determinant f(k_{-1}, ..., k_{p-2}) whose vanishing
    /// cuts out the nilpotent cone: entry (i, j) is j * k_{i-j} for
    /// 1 <= i, j <= p-1, with k_m = 0 outside -1..p-2.
    pub fn f_det(&self) -> FpScalar {
        let p = self.p;
        let n = self.k.len() - 1;
        let mut m = FpMatrix::zeros(n, n);
        for i in 1..=n {
            for j in 1..=n {
                let slot = i as i64 - j as i64 + 1;
                if slot < 0 || slot > n as i64 {
                    continue;
                }
                m.set(
                    i - 1,
                    j - 1,
                    p.mul(p.scalar(j as u64), self.k[slot as usize]),
                );
            }
        }
        m.det(p)
    }

    /// The scalar psi_0 = -f with X^{[p]} = psi_0 * X.
    pub fn restriction_scalar(&self) -> FpScalar {
        self.p.neg(self.f_det())
    }

    /// Evaluates lambda^p + f(k) * lambda, the characteristic polynomial of
    /// the operator matrix at lambda.
    pub fn char_poly_eval(&self, lambda: FpScalar) -> FpScalar {
        let p = self.p;
        p.add(p.pow(lambda, p.value()), p.mul(self.f_det(), lambda))
    }

    /// The matrix of ad X on W1 itself: column j is [X, x^j D].
    pub fn ad_matrix(&self) -> FpMatrix {
        let p = self.p;
        let n = self.k.len();
        let mut m = FpMatrix::zeros(n, n);
        for j in 0..n {
            let col = self.bracket(&WittElement::basis(p, j as i64 - 1));
            for r in 0..n {
                m.set(r, j, col.k[r]);
            }
        }
        m
    }

    /// Smallest i with k_i != 0, or None for the zero element. X lies in the
    /// filtration level g_i exactly when filtration_degree(X) >= i.
    pub fn filtration_degree(&self) -> Option<i64> {
        self.k
            .iter()
            .position(|c| !c.is_zero())
            .map(|slot| slot as i64 - 1)
    }

    /// Canonical odometer index: sum of k_i * p^{i+1}, least significant
    /// digit k_{-1}.
    pub fn to_index(&self) -> u64 {
        let q = self.p.value();
        self.k
            .iter()
            .rev()
            .fold(0u64, |acc, c| acc * q + c.value())
    }

    pub fn from_index(p: Prime, mut idx: u64) -> WittElement {
        let q = p.value();
        let mut out = Self::zero(p);
        for slot in 0..q as usize {
            out.k[slot] = p.scalar(idx % q);
            idx /= q;
        }
        debug_assert_eq!(idx, 0, "index exceeds p^p");
        out
    }

    /// Comma-separated residues "k_{-1},k_0,...,k_{p-2}".
    pub fn encode(&self) -> String {
        codec::encode_residues(&self.k)
    }

    pub fn parse(p: Prime, s: &str) -> Result<WittElement, ParseError> {
        Ok(WittElement {
            p,
            k: codec::parse_residues(p, s, p.value() as usize)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream;

    fn prime(q: u64) -> Prime {
        Prime::new(q).unwrap()
    }

    fn random_elem(p: Prime, seed: u64, ctr: u64) -> WittElement {
        let k = stream::residues(seed, ctr, p.value() as usize, p.value())
            .into_iter()
            .map(|r| p.scalar(r))
            .collect();
        WittElement::from_coeffs(p, k)
    }

    #[test]
    fn bracket_of_d_and_xd_is_d() {
        for q in [5u64, 7, 11, 13] {
            let p = prime(q);
            let d = WittElement::basis(p, -1);
            let xd = WittElement::basis(p, 0);
            assert_eq!(d.bracket(&xd), d);
        }
    }

    #[test]
    fn bracket_is_alternating() {
        let p = prime(7);
        for ctr in 0..20 {
            let x = random_elem(p, 3, ctr);
            assert!(x.bracket(&x).is_zero());
        }
    }

    #[test]
    fn bracket_xd_x2d() {
        let p = prime(5);
        let xd = WittElement::basis(p, 0);
        let x2d = WittElement::basis(p, 1);
        assert_eq!(xd.bracket(&x2d), x2d);
    }

    #[test]
    fn antisymmetry_and_jacobi_exhaustive_basis_triples() {
        for q in [5u64, 7, 11, 13] {
            let p = prime(q);
            let n = q as i64;
            for i in -1..n - 1 {
                for j in -1..n - 1 {
                    let ei = WittElement::basis(p, i);
                    let ej = WittElement::basis(p, j);
                    assert_eq!(ei.bracket(&ej), ej.bracket(&ei).neg());
                    for l in -1..n - 1 {
                        let el = WittElement::basis(p, l);
                        let s = ei
                            .bracket(&ej.bracket(&el))
                            .add(&ej.bracket(&el.bracket(&ei)))
                            .add(&el.bracket(&ei.bracket(&ej)));
                        assert!(s.is_zero(), "jacobi fails at p={q} ({i},{j},{l})");
                    }
                }
            }
        }
    }

    #[test]
    fn jacobi_random_triples() {
        for q in [5u64, 7, 11, 13] {
            let p = prime(q);
            for ctr in 0..10_000u64 {
                let x = random_elem(p, 11, 3 * ctr);
                let y = random_elem(p, 11, 3 * ctr + 1);
                let z = random_elem(p, 11, 3 * ctr + 2);
                let s = x
                    .bracket(&y.bracket(&z))
                    .add(&y.bracket(&z.bracket(&x)))
                    .add(&z.bracket(&x.bracket(&y)));
                assert!(s.is_zero());
            }
        }
    }

    #[test]
    fn act_on_examples() {
        let p = prime(5);
        let d = WittElement::basis(p, -1);
        let x2 = TruncPoly::monomial(p, 2, FpScalar::ONE);
        assert_eq!(d.act_on(&x2), TruncPoly::monomial(p, 1, p.scalar(2)));

        let xd = WittElement::basis(p, 0);
        for j in 0..5usize {
            let xj = TruncPoly::monomial(p, j, FpScalar::ONE);
            assert_eq!(xd.act_on(&xj), xj.scale(p.scalar(j as u64)));
        }

        let x = random_elem(p, 5, 0);
        assert!(x.act_on(&TruncPoly::one(p)).is_zero());
    }

    #[test]
    fn matrix_rep_of_d_is_superdiagonal() {
        let p = prime(5);
        let m = WittElement::basis(p, -1).matrix_rep();
        for r in 0..5 {
            for c in 0..5 {
                let expect = if c == r + 1 { p.scalar(c as u64) } else { p.zero() };
                assert_eq!(m.get(r, c), expect);
            }
        }
    }

    #[test]
    fn matrix_rep_of_xd_is_degree_diagonal() {
        let p = prime(7);
        let m = WittElement::basis(p, 0).matrix_rep();
        for r in 0..7 {
            for c in 0..7 {
                let expect = if c == r { p.scalar(c as u64) } else { p.zero() };
                assert_eq!(m.get(r, c), expect);
            }
        }
        assert!(WittElement::zero(p).matrix_rep().is_zero());
    }

    #[test]
    fn matrix_rep_columns_match_action() {
        let p = prime(7);
        for ctr in 0..20 {
            let x = random_elem(p, 7, ctr);
            let m = x.matrix_rep();
            for j in 0..7usize {
                let img = x.act_on(&TruncPoly::monomial(p, j, FpScalar::ONE));
                assert_eq!(m.column(j), img.coeffs().to_vec());
            }
        }
    }

    #[test]
    fn representation_property() {
        let p = prime(7);
        for ctr in 0..50 {
            let x = random_elem(p, 13, 2 * ctr);
            let y = random_elem(p, 13, 2 * ctr + 1);
            let lhs = x.bracket(&y).matrix_rep();
            let mx = x.matrix_rep();
            let my = y.matrix_rep();
            let rhs = mx.mul(&my, p).sub(&my.mul(&mx, p), p);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn p_power_of_basis_elements() {
        for q in [5u64, 7, 11] {
            let p = prime(q);
            for i in -1..q as i64 - 1 {
                let e = WittElement::basis(p, i);
                let pw = e.p_power().unwrap();
                if i == 0 {
                    assert_eq!(pw, e, "(xD)^[p] = xD");
                } else {
                    assert!(pw.is_zero(), "(x^{{{}}}D)^[p] = 0", i + 1);
                }
            }
        }
    }

    #[test]
    fn p_power_matches_restriction_scalar_on_d_plus_xd() {
        let p = prime(5);
        let x = WittElement::basis(p, -1).add(&WittElement::basis(p, 0));
        let psi0 = x.restriction_scalar();
        assert_eq!(x.p_power().unwrap(), x.scale(psi0));
    }

    #[test]
    fn f_det_examples() {
        let p = prime(5);
        assert!(WittElement::basis(p, -1).f_det().is_zero());
        assert_eq!(WittElement::basis(p, 0).f_det(), p.neg(p.one()));
        assert!(WittElement::basis(p, 1).f_det().is_zero());
    }

    #[test]
    fn f_det_of_xd_is_wilson_for_all_primes() {
        for q in [5u64, 7, 11, 13] {
            let p = prime(q);
            assert_eq!(WittElement::basis(p, 0).f_det(), p.neg(p.one()));
        }
    }

    #[test]
    fn restriction_identity_exhaustive_p5() {
        let p = prime(5);
        for idx in 0..5u64.pow(5) {
            let x = WittElement::from_index(p, idx);
            let psi0 = x.restriction_scalar();
            assert_eq!(x.p_power().unwrap(), x.scale(psi0), "fails at index {idx}");
        }
    }

    #[test]
    fn restriction_scalar_examples() {
        let p = prime(7);
        assert_eq!(WittElement::basis(p, 0).restriction_scalar(), p.one());
        assert!(WittElement::basis(p, -1).restriction_scalar().is_zero());
    }

    #[test]
    fn char_poly_on_d_and_xd() {
        let p = prime(5);
        let d = WittElement::basis(p, -1);
        for lam in p.residues() {
            assert_eq!(d.char_poly_eval(lam), lam);
        }
        let xd = WittElement::basis(p, 0);
        assert!(xd.char_poly_eval(p.one()).is_zero());
    }

    #[test]
    fn char_poly_matches_determinant() {
        for q in [5u64, 7] {
            let p = prime(q);
            for ctr in 0..30 {
                let x = random_elem(p, 17, ctr);
                let m = x.matrix_rep();
                for lam in p.residues() {
                    let mut shifted = FpMatrix::identity(q as usize).scale(lam, p);
                    shifted = shifted.sub(&m, p);
                    assert_eq!(x.char_poly_eval(lam), shifted.det(p));
                }
            }
        }
    }

    #[test]
    fn restrictedness_ad_p_power() {
        for q in [5u64, 7] {
            let p = prime(q);
            for ctr in 0..20 {
                let x = random_elem(p, 19, ctr);
                let lhs = x.p_power().unwrap().ad_matrix();
                let rhs = x.ad_matrix().pow(q, p);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn index_roundtrip() {
        let p = prime(5);
        for idx in [0u64, 1, 17, 3124] {
            assert_eq!(WittElement::from_index(p, idx).to_index(), idx);
        }
    }

    #[test]
    fn encode_parse_roundtrip() {
        let p = prime(5);
        let d = WittElement::basis(p, -1);
        assert_eq!(d.encode(), "1,0,0,0,0");
        assert_eq!(WittElement::parse(p, "1,0,0,0,0").unwrap(), d);
        let x = random_elem(p, 23, 0);
        assert_eq!(WittElement::parse(p, &x.encode()).unwrap(), x);
    }

    #[test]
    fn filtration_degree_reads_lowest_term() {
        let p = prime(5);
        assert_eq!(WittElement::basis(p, -1).filtration_degree(), Some(-1));
        assert_eq!(WittElement::basis(p, 2).filtration_degree(), Some(2));
        assert_eq!(WittElement::zero(p).filtration_degree(), None);
    }
}
