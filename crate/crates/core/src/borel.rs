//! Subalgebras of W1 and the constructive two-class Borel classification.
//!
//! Subspaces are held in canonical reduced row-echelon form, so equality of
//! subalgebras is row-vector equality. A Borel subalgebra is a maximal
//! solvable subalgebra; the two standard ones are B+ = g_0 (dimension p-1)
//! and B- = span{D, xD} (dimension 2), and classification proceeds by
//! normalizing a nilpotent element with nonzero leading coefficient onto D.

use thiserror::Error;

use crate::aut::Automorphism;
use crate::codec::ParseError;
use crate::field::{FpScalar, Prime};
use crate::linalg::{self, Subspace};
use crate::nilcone;
use crate::stream;
use crate::witt::WittElement;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum BorelError {
    #[error("subalgebra is not closed under the bracket")]
    NotClosed,
    #[error("subalgebra is not solvable")]
    NotSolvable,
    #[error("input is not a Borel subalgebra (closed, solvable, maximal)")]
    NotBorel,
    /// No nilpotent element with nonzero leading coefficient was found, or
    /// the normalizing witness did not carry the input onto the standard
    /// Borel. Either points to a rationality obstruction over F_p or a bug;
    /// it is never silently patched.
    #[error("classification failed: no usable nilpotent element or wrong image")]
    ClassificationFailed,
}

/// The bracket of W1 on raw coefficient rows (slot j holds the coefficient
/// of x^j D).
pub fn bracket_rows(p: Prime, u: &[FpScalar], v: &[FpScalar]) -> Vec<FpScalar> {
    let n = u.len();
    let mut out = vec![FpScalar::ZERO; n];
    for a in 0..n {
        let ka = u[a];
        if ka.is_zero() {
            continue;
        }
        for b in 0..n {
            if a + b == 0 || a + b - 1 >= n {
                continue;
            }
            let kb = v[b];
            if kb.is_zero() {
                continue;
            }
            let c = p.scalar_i64(b as i64 - a as i64);
            let t = a + b - 1;
            out[t] = p.add(out[t], p.mul(c, p.mul(ka, kb)));
        }
    }
    out
}

/// How `is_maximal_solvable` walks the complement of the subalgebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxCheck {
    /// Every element of W1 outside the subalgebra (p^p scan; small p only).
    ExhaustiveComplement,
    /// One representative per line of g/S; solvability of the extension
    /// depends only on that line.
    CosetLines,
    /// Seeded random complement elements; a deterministic fallback for
    /// primes where the coset-line count is out of reach.
    Sampled { count: u64, seed: u64 },
}

/// An F_p-subalgebra (or subspace) of W1 in canonical echelon basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subalgebra {
    p: Prime,
    space: Subspace,
    closed: bool,
}

impl Subalgebra {
    /// Span of the generators, with bracket closure verified (not forced).
    pub fn span(p: Prime, gens: &[WittElement]) -> Subalgebra {
        let width = p.value() as usize;
        let space = Subspace::from_rows(p, width, gens.iter().map(|g| g.coeffs().to_vec()));
        let closed = Self::check_closed(p, &space);
        Subalgebra { p, space, closed }
    }

    /// Smallest bracket-closed subspace containing the generators.
    pub fn span_closure(p: Prime, gens: &[WittElement]) -> Subalgebra {
        assert!(!gens.is_empty(), "span_closure needs at least one generator");
        let width = p.value() as usize;
        let space = linalg::span_closure_rows(
            p,
            width,
            gens.iter().map(|g| g.coeffs().to_vec()),
            |u, v| bracket_rows(p, u, v),
        );
        Subalgebra {
            p,
            space,
            closed: true,
        }
    }

    fn check_closed(p: Prime, space: &Subspace) -> bool {
        let rows = space.rows();
        for i in 0..rows.len() {
            for j in i + 1..rows.len() {
                if !space.contains(p, &bracket_rows(p, &rows[i], &rows[j])) {
                    return false;
                }
            }
        }
        true
    }

    fn from_space(p: Prime, space: Subspace) -> Subalgebra {
        let closed = Self::check_closed(p, &space);
        Subalgebra { p, space, closed }
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn space(&self) -> &Subspace {
        &self.space
    }

    /// Canonical basis as Witt elements.
    pub fn basis(&self) -> Vec<WittElement> {
        self.space
            .rows()
            .iter()
            .map(|r| WittElement::from_coeffs(self.p, r.clone()))
            .collect()
    }

    pub fn contains(&self, x: &WittElement) -> bool {
        self.space.contains(self.p, x.coeffs())
    }

    pub fn is_subalgebra_of(&self, other: &Subalgebra) -> bool {
        self.space.is_subspace_of(self.p, &other.space)
    }

    /// The image under an automorphism; bracket closure is preserved.
    pub fn apply_aut(&self, phi: &Automorphism) -> Subalgebra {
        let rows = self
            .space
            .rows()
            .iter()
            .map(|r| phi.apply(&WittElement::from_coeffs(self.p, r.clone())));
        let space = Subspace::from_rows(self.p, self.p.value() as usize, rows.map(|x| x.coeffs().to_vec()));
        Subalgebra {
            p: self.p,
            space,
            closed: self.closed,
        }
    }

    /// The filtration level g_i = span{x^{j+1} D : j >= i} as a subalgebra.
    pub fn filtration_level(p: Prime, i: i64) -> Subalgebra {
        let n = p.value() as i64;
        let gens: Vec<WittElement> = (i.max(-1)..n - 1).map(|j| WittElement::basis(p, j)).collect();
        Subalgebra::span(p, &gens)
    }

    /// The standard Borel subalgebras (B+ = g_0, B- = span{D, xD}).
    pub fn standard_borels(p: Prime) -> (Subalgebra, Subalgebra) {
        let plus = Subalgebra::filtration_level(p, 0);
        let minus = Subalgebra::span(p, &[WittElement::basis(p, -1), WittElement::basis(p, 0)]);
        (plus, minus)
    }

    /// Derived series S >= [S,S] >= ... ending with the zero subalgebra
    /// exactly when S is solvable.
    pub fn derived_series(&self) -> Result<Vec<Subalgebra>, BorelError> {
        if !self.closed {
            return Err(BorelError::NotClosed);
        }
        let p = self.p;
        let series = linalg::derived_series_rows(p, &self.space, |u, v| bracket_rows(p, u, v));
        Ok(series
            .into_iter()
            .map(|space| Subalgebra {
                p,
                space,
                closed: true,
            })
            .collect())
    }

    pub fn is_solvable(&self) -> Result<bool, BorelError> {
        Ok(self.derived_series()?.last().unwrap().dim() == 0)
    }

    /// Canonical line representatives of the subalgebra (each nonzero element
    /// up to scaling, first nonzero basis coordinate normalized to 1).
    pub fn lines(&self) -> Vec<WittElement> {
        let p = self.p;
        linalg::line_representatives(p, self.dim())
            .map(|c| self.combine(&c))
            .collect()
    }

    fn combine(&self, coords: &[FpScalar]) -> WittElement {
        let p = self.p;
        let mut acc = WittElement::zero(p);
        for (c, row) in coords.iter().zip(self.space.rows()) {
            if c.is_zero() {
                continue;
            }
            acc = acc.add(&WittElement::from_coeffs(p, row.clone()).scale(*c));
        }
        acc
    }

    /// Checks that adjoining any complement element breaks solvability.
    /// Strategy is chosen from p: exhaustive for p <= 5, coset lines while
    /// tractable, seeded sampling beyond that.
    pub fn is_maximal_solvable(&self) -> Result<bool, BorelError> {
        self.is_maximal_solvable_with(self.auto_strategy())
    }

    pub fn auto_strategy(&self) -> MaxCheck {
        let q = self.p.value();
        if q <= 5 {
            return MaxCheck::ExhaustiveComplement;
        }
        let complement = self.p.value() as usize - self.dim();
        if linalg::line_count(self.p, complement) <= 250_000 {
            MaxCheck::CosetLines
        } else {
            MaxCheck::Sampled {
                count: 20_000,
                seed: 0x5EED_0001,
            }
        }
    }

    pub fn is_maximal_solvable_with(&self, strategy: MaxCheck) -> Result<bool, BorelError> {
        if !self.closed {
            return Err(BorelError::NotClosed);
        }
        if !self.is_solvable()? {
            return Err(BorelError::NotSolvable);
        }
        let p = self.p;
        match strategy {
            MaxCheck::ExhaustiveComplement => {
                for idx in 0..nilcone::element_count(p) {
                    let x = WittElement::from_index(p, idx);
                    if x.is_zero() || self.contains(&x) {
                        continue;
                    }
                    if self.extension_stays_solvable(&x) {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            MaxCheck::CosetLines => {
                let free = self.space.free_columns();
                for coords in linalg::line_representatives(p, free.len()) {
                    let mut v = WittElement::zero(p);
                    for (c, &col) in coords.iter().zip(&free) {
                        v.set_coeff(col as i64 - 1, *c);
                    }
                    if self.extension_stays_solvable(&v) {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            MaxCheck::Sampled { count, seed } => {
                let q = p.value();
                for ctr in 0..count {
                    let k: Vec<FpScalar> = stream::residues(seed, ctr, q as usize, q)
                        .into_iter()
                        .map(|r| p.scalar(r))
                        .collect();
                    let x = WittElement::from_coeffs(p, k);
                    if x.is_zero() || self.contains(&x) {
                        continue;
                    }
                    if self.extension_stays_solvable(&x) {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }

    /// True when span_closure(S + x) is still solvable. Reaching the full
    /// dimension short-circuits: W1 is simple, so the whole algebra is the
    /// only full-dimensional subalgebra and it is not solvable. Containing
    /// the standard sl2 span is a second cheap non-solvability witness
    /// before the derived series runs.
    fn extension_stays_solvable(&self, x: &WittElement) -> bool {
        let p = self.p;
        let width = p.value() as usize;
        let gens = self
            .space
            .rows()
            .iter()
            .cloned()
            .chain(std::iter::once(x.coeffs().to_vec()));
        let closure = linalg::span_closure_rows(p, width, gens, |u, v| bracket_rows(p, u, v));
        if closure.dim() == width {
            return false;
        }
        if closure.dim() >= 3
            && (-1..=1).all(|i| closure.contains(p, WittElement::basis(p, i).coeffs()))
        {
            return false;
        }
        linalg::is_solvable_rows(p, &closure, |u, v| bracket_rows(p, u, v))
    }

    /// Classifies a Borel subalgebra: Plus when it is g_0 itself, Minus with
    /// a verified witness mapping it onto span{D, xD} otherwise.
    pub fn classify_borel(&self) -> Result<BorelClass, BorelError> {
        let p = self.p;
        if !self.closed {
            return Err(BorelError::NotBorel);
        }
        if !self.is_solvable().map_err(|_| BorelError::NotBorel)? {
            return Err(BorelError::NotBorel);
        }
        if !self.is_maximal_solvable().map_err(|_| BorelError::NotBorel)? {
            return Err(BorelError::NotBorel);
        }
        let (plus, minus) = Subalgebra::standard_borels(p);
        let inside_g0 = self
            .space
            .rows()
            .iter()
            .all(|r| r[0].is_zero());
        if inside_g0 {
            if *self == plus {
                return Ok(BorelClass {
                    tag: BorelTag::Plus,
                    witness: Automorphism::identity(p),
                });
            }
            return Err(BorelError::ClassificationFailed);
        }
        // Look for a nilpotent element with nonzero leading coefficient and
        // normalize it onto D.
        for u in self.lines() {
            let lead = u.coeff(-1);
            if lead.is_zero() {
                continue;
            }
            if !u.p_power().expect("derivation power").is_zero() {
                continue;
            }
            let scale = Automorphism::scaling(p, lead).unwrap();
            let scaled = scale.apply(&u);
            debug_assert_eq!(scaled.coeff(-1), FpScalar::ONE);
            let nf = nilcone::normalize_to_d(&scaled).expect("leading coefficient is 1");
            if !nf.c.is_zero() {
                // u was nilpotent, so its normal form must be D exactly.
                return Err(BorelError::ClassificationFailed);
            }
            let witness = nf.sigma.compose(&scale);
            debug_assert_eq!(witness.apply(&u), WittElement::basis(p, -1));
            let image = self.apply_aut(&witness);
            if image == minus {
                return Ok(BorelClass {
                    tag: BorelTag::Minus,
                    witness,
                });
            }
            return Err(BorelError::ClassificationFailed);
        }
        Err(BorelError::ClassificationFailed)
    }

    /// Searches for a standard sl2 triple (e, h, f) with [h,e] = 2e,
    /// [h,f] = -2f, [e,f] = h inside the subalgebra.
    ///
    /// Solvable inputs never contain one. Otherwise the search walks every
    /// line of the subalgebra while the line count is tractable (complete);
    /// beyond that it checks the standard triple span{D, xD, x^2 D} and a
    /// bounded seeded sample of candidate elements h.
    pub fn sl2_triple(&self) -> Result<Option<Sl2Triple>, BorelError> {
        if !self.closed {
            return Err(BorelError::NotClosed);
        }
        if self.is_solvable()? {
            return Ok(None);
        }
        let p = self.p;
        if linalg::line_count(p, self.dim()) <= 300_000 {
            for h0 in self.lines() {
                if let Some(triple) = self.triple_with_axis(&h0) {
                    return Ok(Some(triple));
                }
            }
            return Ok(None);
        }
        // Large subalgebra: certain witness first, bounded search after.
        let d = WittElement::basis(p, -1);
        let xd = WittElement::basis(p, 0);
        let x2d = WittElement::basis(p, 1);
        if self.contains(&d) && self.contains(&xd) && self.contains(&x2d) {
            let e = d.neg();
            let h = xd.scale(p.scalar_i64(-2));
            let f = x2d;
            debug_assert!(Self::verify_triple(&e, &h, &f));
            return Ok(Some(Sl2Triple { e, h, f }));
        }
        for ctr in 0..2000u64 {
            let coords: Vec<FpScalar> = stream::residues(0x51_2DEE, ctr, self.dim(), p.value())
                .into_iter()
                .map(|r| p.scalar(r))
                .collect();
            let h0 = self.combine(&coords);
            if h0.is_zero() {
                continue;
            }
            if let Some(triple) = self.triple_with_axis(&h0) {
                return Ok(Some(triple));
            }
        }
        Ok(None)
    }

    pub fn sl2_detect(&self) -> Result<bool, BorelError> {
        Ok(self.sl2_triple()?.is_some())
    }

    /// Matrix of ad(h) restricted to the subalgebra, in basis coordinates.
    fn ad_restricted(&self, h: &WittElement) -> Option<crate::linalg::FpMatrix> {
        let p = self.p;
        let d = self.dim();
        let mut m = crate::linalg::FpMatrix::zeros(d, d);
        for (j, row) in self.space.rows().iter().enumerate() {
            let img = bracket_rows(p, h.coeffs(), row);
            let coords = self.space.coordinates(p, &img)?;
            for (i, c) in coords.into_iter().enumerate() {
                m.set(i, j, c);
            }
        }
        Some(m)
    }

    /// Tries to complete a line representative h0 to a triple (e, h, f) with
    /// h on the line of h0.
    fn triple_with_axis(&self, h0: &WittElement) -> Option<Sl2Triple> {
        let p = self.p;
        let d = self.dim();
        let m = self.ad_restricted(h0)?;
        // Eigenvalues of ad(h0) on S that occur in +/- pairs determine the
        // scaling lambda with h = lambda * h0.
        let mut eigens = Vec::new();
        for mu in p.residues() {
            let shifted = crate::linalg::FpMatrix::identity(d).scale(mu, p).sub(&m, p);
            if shifted.det(p).is_zero() {
                eigens.push(mu);
            }
        }
        for &mu in &eigens {
            if mu.is_zero() || !eigens.contains(&p.neg(mu)) {
                continue;
            }
            // h = (2/mu) h0 turns mu into eigenvalue 2 and -mu into -2.
            let lambda = p.div(p.scalar(2), mu).unwrap();
            let h = h0.scale(lambda);
            let e_space = self.eigenspace(&m, mu);
            let f_space = self.eigenspace(&m, p.neg(mu));
            for e0_coords in linalg::line_representatives(p, e_space.dim()) {
                let e0 = self.from_inner_coords(&e_space, &e0_coords);
                for f0_coords in linalg::line_representatives(p, f_space.dim()) {
                    let f0 = self.from_inner_coords(&f_space, &f0_coords);
                    let w = e0.bracket(&f0);
                    // Need [e, f] = h with e, f on these lines: w must be a
                    // nonzero multiple of h.
                    let c = match proportionality(p, &w, &h) {
                        Some(c) if !c.is_zero() => c,
                        _ => continue,
                    };
                    let e = e0.scale(p.inv(c).unwrap());
                    let f = f0;
                    if Self::verify_triple(&e, &h, &f) {
                        return Some(Sl2Triple { e, h, f });
                    }
                }
            }
        }
        None
    }

    /// Kernel of (ad(h0) - mu) on S, as coordinate rows over the S-basis.
    fn eigenspace(&self, m: &crate::linalg::FpMatrix, mu: FpScalar) -> Subspace {
        let p = self.p;
        let d = self.dim();
        let shifted = m.sub(&crate::linalg::FpMatrix::identity(d).scale(mu, p), p);
        let constraint_rows: Vec<Vec<FpScalar>> = (0..d).map(|r| shifted.row(r).to_vec()).collect();
        linalg::kernel_of(p, d, &constraint_rows)
    }

    fn from_inner_coords(&self, inner: &Subspace, coords: &[FpScalar]) -> WittElement {
        let p = self.p;
        let mut s_coords = vec![FpScalar::ZERO; self.dim()];
        for (c, row) in coords.iter().zip(inner.rows()) {
            for (acc, x) in s_coords.iter_mut().zip(row) {
                *acc = p.add(*acc, p.mul(*c, *x));
            }
        }
        self.combine(&s_coords)
    }

    fn verify_triple(e: &WittElement, h: &WittElement, f: &WittElement) -> bool {
        let p = e.prime();
        let two = p.scalar(2);
        h.bracket(e) == e.scale(two)
            && h.bracket(f) == f.scale(p.neg(two))
            && e.bracket(f) == *h
    }

    /// Semicolon-separated Witt element encodings; canonicalized on parse.
    pub fn encode(&self) -> String {
        self.space
            .rows()
            .iter()
            .map(|r| crate::codec::encode_residues(r))
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn parse(p: Prime, s: &str) -> Result<Subalgebra, ParseError> {
        let mut gens = Vec::new();
        for part in s.split(';') {
            gens.push(WittElement::parse(p, part)?);
        }
        if gens.is_empty() {
            return Err(ParseError::Empty);
        }
        let width = p.value() as usize;
        let space = Subspace::from_rows(p, width, gens.iter().map(|g| g.coeffs().to_vec()));
        Ok(Subalgebra::from_space(p, space))
    }
}

/// Proportionality constant c with w = c * h, if one exists.
fn proportionality(p: Prime, w: &WittElement, h: &WittElement) -> Option<FpScalar> {
    let slot = h.coeffs().iter().position(|c| !c.is_zero())?;
    let c = p.div(w.coeffs()[slot], h.coeffs()[slot]).ok()?;
    if *w == h.scale(c) {
        Some(c)
    } else {
        None
    }
}

/// Conjugacy class of a Borel subalgebra, with the witness automorphism.
/// For Minus the witness maps the input onto span{D, xD}; for Plus the input
/// already equals g_0 and the witness is the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BorelClass {
    pub tag: BorelTag,
    pub witness: Automorphism,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BorelTag {
    Plus,
    Minus,
}

/// A standard sl2 triple: [h,e] = 2e, [h,f] = -2f, [e,f] = h.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sl2Triple {
    pub e: WittElement,
    pub h: WittElement,
    pub f: WittElement,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prime(q: u64) -> Prime {
        Prime::new(q).unwrap()
    }

    fn d(p: Prime) -> WittElement {
        WittElement::basis(p, -1)
    }

    fn xd(p: Prime) -> WittElement {
        WittElement::basis(p, 0)
    }

    fn x2d(p: Prime) -> WittElement {
        WittElement::basis(p, 1)
    }

    #[test]
    fn span_closure_of_d_is_a_line() {
        let p = prime(5);
        let s = Subalgebra::span_closure(p, &[d(p)]);
        assert_eq!(s.dim(), 1);
        assert!(s.is_closed());
    }

    #[test]
    fn span_closure_of_d_xd_is_b_minus() {
        let p = prime(5);
        let s = Subalgebra::span_closure(p, &[d(p), xd(p)]);
        assert_eq!(s.dim(), 2);
        let (_, minus) = Subalgebra::standard_borels(p);
        assert_eq!(s, minus);
    }

    #[test]
    fn span_closure_of_d_x2d_is_the_sl2_span() {
        // [D, x^2 D] = 2xD and nothing pushes past degree one, so the
        // closure is span{D, xD, x^2 D}.
        for q in [5u64, 7] {
            let p = prime(q);
            let s = Subalgebra::span_closure(p, &[d(p), x2d(p)]);
            assert_eq!(s.dim(), 3);
            assert!(s.contains(&xd(p)));
        }
    }

    #[test]
    fn span_closure_of_d_x3d_is_everything() {
        for q in [5u64, 7] {
            let p = prime(q);
            let s = Subalgebra::span_closure(p, &[d(p), WittElement::basis(p, 2)]);
            assert_eq!(s.dim(), q as usize);
        }
    }

    #[test]
    fn canonicalization_is_generator_invariant() {
        let p = prime(5);
        let a = Subalgebra::span_closure(p, &[d(p), xd(p)]);
        let b = Subalgebra::span_closure(p, &[xd(p).scale(p.scalar(3)), d(p).add(&xd(p))]);
        assert_eq!(a, b);
    }

    #[test]
    fn derived_series_of_b_minus() {
        let p = prime(5);
        let (_, minus) = Subalgebra::standard_borels(p);
        let series = minus.derived_series().unwrap();
        assert_eq!(series.len(), 3);
        assert_eq!(series[0].dim(), 2);
        assert_eq!(series[1].dim(), 1);
        assert!(series[1].contains(&d(p)));
        assert_eq!(series[2].dim(), 0);
        assert!(minus.is_solvable().unwrap());
    }

    #[test]
    fn g0_is_solvable_for_every_prime_in_sweep() {
        for q in [5u64, 7, 11, 13] {
            let p = prime(q);
            let (plus, _) = Subalgebra::standard_borels(p);
            assert_eq!(plus.dim(), q as usize - 1);
            assert!(plus.is_solvable().unwrap());
        }
    }

    #[test]
    fn sl2_span_is_not_solvable() {
        for q in [5u64, 7, 11, 13] {
            let p = prime(q);
            let s = Subalgebra::span(p, &[d(p), xd(p), x2d(p)]);
            assert!(s.is_closed());
            let series = s.derived_series().unwrap();
            assert!(series.last().unwrap().dim() > 0);
            assert!(!s.is_solvable().unwrap());
        }
    }

    #[test]
    fn derived_series_requires_closure() {
        let p = prime(5);
        let s = Subalgebra::span(p, &[d(p), x2d(p)]);
        assert!(!s.is_closed());
        assert_eq!(s.derived_series(), Err(BorelError::NotClosed));
    }

    #[test]
    fn standard_borels_shape() {
        let p = prime(5);
        let (plus, minus) = Subalgebra::standard_borels(p);
        assert_eq!(plus.dim(), 4);
        assert_eq!(minus.dim(), 2);
        // Their intersection is the span of xD.
        assert!(plus.contains(&xd(p)));
        assert!(minus.contains(&xd(p)));
        assert!(!plus.contains(&d(p)));
        for i in 1..4 {
            assert!(!minus.contains(&WittElement::basis(p, i)));
        }
    }

    #[test]
    fn standard_borels_are_maximal_solvable_p5() {
        let p = prime(5);
        let (plus, minus) = Subalgebra::standard_borels(p);
        assert!(plus
            .is_maximal_solvable_with(MaxCheck::ExhaustiveComplement)
            .unwrap());
        assert!(minus
            .is_maximal_solvable_with(MaxCheck::ExhaustiveComplement)
            .unwrap());
    }

    #[test]
    fn coset_lines_agree_with_exhaustive_at_p5() {
        let p = prime(5);
        let (plus, minus) = Subalgebra::standard_borels(p);
        assert!(plus.is_maximal_solvable_with(MaxCheck::CosetLines).unwrap());
        assert!(minus.is_maximal_solvable_with(MaxCheck::CosetLines).unwrap());
        let line = Subalgebra::span(p, &[d(p)]);
        assert!(!line.is_maximal_solvable_with(MaxCheck::CosetLines).unwrap());
        assert!(!line
            .is_maximal_solvable_with(MaxCheck::ExhaustiveComplement)
            .unwrap());
    }

    #[test]
    fn maximal_solvable_rejects_non_solvable_input() {
        let p = prime(5);
        let s = Subalgebra::span(p, &[d(p), xd(p), x2d(p)]);
        assert_eq!(s.is_maximal_solvable(), Err(BorelError::NotSolvable));
    }

    #[test]
    fn classify_standard_borels() {
        let p = prime(5);
        let (plus, minus) = Subalgebra::standard_borels(p);
        let cp = plus.classify_borel().unwrap();
        assert_eq!(cp.tag, BorelTag::Plus);
        assert!(cp.witness.is_identity());
        let cm = minus.classify_borel().unwrap();
        assert_eq!(cm.tag, BorelTag::Minus);
        assert!(cm.witness.is_identity());
    }

    #[test]
    fn classify_random_conjugates() {
        let p = prime(5);
        let (plus, minus) = Subalgebra::standard_borels(p);
        for ctr in 0..25 {
            let phi = Automorphism::random(p, 0xB0_5E1, ctr);
            let b = minus.apply_aut(&phi);
            let class = b.classify_borel().unwrap();
            assert_eq!(class.tag, BorelTag::Minus);
            assert_eq!(b.apply_aut(&class.witness), minus);

            let b = plus.apply_aut(&phi);
            let class = b.classify_borel().unwrap();
            assert_eq!(class.tag, BorelTag::Plus);
        }
    }

    #[test]
    fn classify_rejects_non_borel() {
        let p = prime(5);
        let line = Subalgebra::span(p, &[d(p)]);
        assert_eq!(line.classify_borel(), Err(BorelError::NotBorel));
        let open = Subalgebra::span(p, &[d(p), x2d(p)]);
        assert_eq!(open.classify_borel(), Err(BorelError::NotBorel));
    }

    #[test]
    fn sl2_triple_in_standard_span() {
        for q in [5u64, 7] {
            let p = prime(q);
            let s = Subalgebra::span(p, &[d(p), xd(p), x2d(p)]);
            let t = s.sl2_triple().unwrap().expect("standard triple exists");
            assert!(Subalgebra::verify_triple(&t.e, &t.h, &t.f));
            assert!(s.contains(&t.e) && s.contains(&t.h) && s.contains(&t.f));
        }
    }

    #[test]
    fn sl2_not_in_solvable() {
        let p = prime(13);
        let (plus, _) = Subalgebra::standard_borels(p);
        assert!(!plus.sl2_detect().unwrap());
    }

    #[test]
    fn sl2_in_whole_algebra() {
        for q in [5u64, 13] {
            let p = prime(q);
            let whole = Subalgebra::filtration_level(p, -1);
            assert_eq!(whole.dim(), q as usize);
            assert!(whole.sl2_detect().unwrap());
        }
    }

    #[test]
    fn explicit_triple_relations() {
        // (e, h, f) = (-D, -2xD, x^2 D) satisfies the standard relations.
        let p = prime(7);
        let e = d(p).neg();
        let h = xd(p).scale(p.scalar_i64(-2));
        let f = x2d(p);
        assert!(Subalgebra::verify_triple(&e, &h, &f));
    }

    #[test]
    fn proof_step_iterated_ad_d_lands_in_stated_spans() {
        // For v with top index j > 0 the iterated brackets (ad D)^{j-1}(v)
        // and (ad D)^j(v) collapse onto explicit combinations of x^2 D, xD, D.
        for q in [5u64, 7, 11] {
            let p = prime(q);
            for ctr in 0..50u64 {
                let raw = stream::residues(91 ^ q, ctr, q as usize, q);
                let mut v = WittElement::from_coeffs(
                    p,
                    raw.into_iter().map(|r| p.scalar(r)).collect(),
                );
                // Force a top index j > 0.
                let j = 1 + (ctr as i64 % (q as i64 - 2));
                for i in j + 1..q as i64 - 1 {
                    v.set_coeff(i, FpScalar::ZERO);
                }
                if v.coeff(j).is_zero() {
                    v.set_coeff(j, FpScalar::ONE);
                }
                let dd = d(p);
                let mut w = v.clone();
                for _ in 0..(j - 1) {
                    w = dd.bracket(&w);
                }
                // (ad D)^{j-1}(v) = ((j+1)!/2) a_j x^2 D + j! a_{j-1} xD
                //                  + (j-1)! a_{j-2} D
                let fact = |n: i64| -> FpScalar {
                    let mut acc = p.one();
                    for t in 2..=n {
                        acc = p.mul(acc, p.scalar(t as u64));
                    }
                    acc
                };
                let half = p.inv(p.scalar(2)).unwrap();
                let mut expect = x2d(p).scale(p.mul(p.mul(fact(j + 1), half), v.coeff(j)));
                expect = expect.add(&xd(p).scale(p.mul(fact(j), v.coeff(j - 1))));
                expect = expect.add(&d(p).scale(p.mul(fact(j - 1), v.coeff(j - 2))));
                assert_eq!(w, expect, "p={q} j={j}");
                let w2 = dd.bracket(&w);
                let mut expect2 = xd(p).scale(p.mul(fact(j + 1), v.coeff(j)));
                expect2 = expect2.add(&d(p).scale(p.mul(fact(j), v.coeff(j - 1))));
                assert_eq!(w2, expect2, "p={q} j={j} (one more ad D)");
                // Adjoining v to B- always breaks solvability.
                let (_, minus) = Subalgebra::standard_borels(p);
                if !minus.contains(&v) {
                    let ext = Subalgebra::span_closure(
                        p,
                        &[d(p), xd(p), v.clone()],
                    );
                    assert!(!ext.is_solvable().unwrap());
                }
            }
        }
    }

    #[test]
    fn encode_parse_roundtrip() {
        let p = prime(5);
        let (_, minus) = Subalgebra::standard_borels(p);
        let s = minus.encode();
        assert_eq!(s, "1,0,0,0,0;0,1,0,0,0");
        assert_eq!(Subalgebra::parse(p, &s).unwrap(), minus);
        // Parsing canonicalizes arbitrary generating sets.
        let other = Subalgebra::parse(p, "2,3,0,0,0;0,1,0,0,0").unwrap();
        assert_eq!(other, minus);
    }
}
