//! The nilpotent cone N = {X : X^{[p]} = 0} of W1.
//!
//! Three independent membership criteria are provided and cross-checked:
//!
//! * `Operator`: the p-th operator power vanishes.
//! * `Determinant`: the (p-1) x (p-1) determinant f vanishes.
//! * `Recursive`: for k_{-1} != 0, torus-scale to leading coefficient 1 and
//!   test the closure identity on the recursively defined l-sequence; for
//!   k_{-1} = 0 membership reduces to k_0 = 0.
//!
//! On top of these sit the explicit orbit parameterization of G.D, the
//! unipotent normal form X -> D + c x^{p-1} D, and exhaustive/sampled cone
//! enumeration with full criteria cross-validation.

use serde::Serialize;
use thiserror::Error;

use crate::aut::Automorphism;
use crate::field::{FpScalar, Prime};
use crate::stream;
use crate::witt::WittElement;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum ConeError {
    #[error("leading coefficient a must be nonzero")]
    ZeroLeadingCoefficient,
    #[error("normalization requires leading coefficient k_{{-1}} = 1")]
    NotNormalizable,
    #[error("exhaustive enumeration is limited to p <= 7 (p^p elements)")]
    BudgetExceeded,
}

/// Nilpotency test selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NilpotencyMethod {
    Recursive,
    Determinant,
    Operator,
}

/// The auxiliary scalars l_1, ..., l_{p-2} defined recursively from
/// k_0, ..., k_{p-3}:
///
///   l_1 = k_0 / 2,
///   l_i = (1/(i+1)) * ( i k_{i-1} + sum_{j=0}^{i-2} (2j+1-i) k_j l_{i-1-j} )
///
/// for 2 <= i <= p-2. Every divisor i+1 lies in 2..p-1 and is invertible.
pub fn l_sequence(p: Prime, k: &[FpScalar]) -> Vec<FpScalar> {
    let n = p.value() as usize - 2;
    assert_eq!(k.len(), n, "expected k_0..k_{{p-3}}");
    if n == 0 {
        return Vec::new();
    }
    let mut l = vec![FpScalar::ZERO; n + 1]; // l[i] = l_i, slot 0 unused
    let half = p.inv(p.scalar(2)).unwrap();
    l[1] = p.mul(k[0], half);
    for i in 2..=n {
        let mut acc = p.mul(p.scalar(i as u64), k[i - 1]);
        for j in 0..=i - 2 {
            let c = p.scalar_i64(2 * j as i64 + 1 - i as i64);
            acc = p.add(acc, p.mul(c, p.mul(k[j], l[i - 1 - j])));
        }
        let inv = p.inv(p.scalar(i as u64 + 1)).unwrap();
        l[i] = p.mul(inv, acc);
    }
    l.remove(0);
    l
}

/// The closure identity deciding whether D + sum k_i x^{i+1} D is nilpotent:
/// k_{p-2} = sum_{i=0}^{p-3} 2 (i+1) k_i l_{p-2-i}.
pub fn nilpotency_condition(p: Prime, k: &[FpScalar]) -> bool {
    let n = p.value() as usize - 1;
    assert_eq!(k.len(), n, "expected k_0..k_{{p-2}}");
    closure_coefficient(p, &k[..n - 1]) == k[n - 1]
}

/// The value of k_{p-2} forced by the closure identity, given k_0..k_{p-3}.
pub fn closure_coefficient(p: Prime, k: &[FpScalar]) -> FpScalar {
    let l = l_sequence(p, k);
    let n = k.len(); // p - 2
    let mut acc = FpScalar::ZERO;
    for i in 0..n {
        let c = p.scalar(2 * (i as u64 + 1));
        acc = p.add(acc, p.mul(c, p.mul(k[i], l[n - 1 - i])));
    }
    acc
}

/// Decides membership in the nilpotent cone by the chosen method. All three
/// methods agree on every input.
pub fn is_nilpotent(x: &WittElement, method: NilpotencyMethod) -> bool {
    match method {
        NilpotencyMethod::Operator => x.p_power().expect("p-th power is a derivation").is_zero(),
        NilpotencyMethod::Determinant => x.f_det().is_zero(),
        NilpotencyMethod::Recursive => {
            let p = x.prime();
            let lead = x.coeff(-1);
            if lead.is_zero() {
                // N intersects g_0 in g_1, so membership is k_0 = 0.
                return x.coeff(0).is_zero();
            }
            let sigma = Automorphism::scaling(p, lead).unwrap();
            recursive_on_scaled(&sigma.apply(x))
        }
    }
}

fn recursive_on_scaled(z: &WittElement) -> bool {
    debug_assert_eq!(z.coeff(-1), FpScalar::ONE);
    nilpotency_condition(z.prime(), &z.coeffs()[1..])
}

/// The explicit parameterization of the open orbit G.D: given a != 0 and
/// free coordinates kappa_0..kappa_{p-3}, completes kappa_{p-2} by the
/// closure identity and returns a D + sum a^{-i} kappa_i x^{i+1} D.
pub fn orbit_param(p: Prime, a: FpScalar, kappa: &[FpScalar]) -> Result<WittElement, ConeError> {
    if a.is_zero() {
        return Err(ConeError::ZeroLeadingCoefficient);
    }
    let n = p.value() as usize - 2;
    assert_eq!(kappa.len(), n, "expected kappa_0..kappa_{{p-3}}");
    let top = closure_coefficient(p, kappa);
    let a_inv = p.inv(a).unwrap();
    let mut out = WittElement::zero(p);
    out.set_coeff(-1, a);
    let mut pow = FpScalar::ONE; // a^{-i}, starting at i = 0
    for (i, &c) in kappa.iter().enumerate() {
        out.set_coeff(i as i64, p.mul(pow, c));
        pow = p.mul(pow, a_inv);
    }
    out.set_coeff(n as i64, p.mul(pow, top));
    Ok(out)
}

/// Membership in the open orbit G.D: leading coefficient nonzero and
/// operator-nilpotent.
pub fn in_orbit_gd(x: &WittElement) -> bool {
    !x.coeff(-1).is_zero() && is_nilpotent(x, NilpotencyMethod::Operator)
}

/// Result of the unipotent normal form: apply(sigma, X) = D + c x^{p-1} D.
/// c = 0 exactly when X is nilpotent.
#[derive(Debug, Clone)]
pub struct NormalForm {
    pub sigma: Automorphism,
    pub c: FpScalar,
}

/// Conjugates X (with k_{-1} = 1) to the normal form D + c x^{p-1} D by a
/// unipotent automorphism.
///
/// Step m (for m = 2..p-1) conjugates by x -> x + t x^m. The coefficient at
/// index m-2 depends affinely on t with a unit slope, while indices below
/// m-2 are untouched, so each step cancels one coefficient; the index p-2
/// obstruction survives as c.
pub fn normalize_to_d(x: &WittElement) -> Result<NormalForm, ConeError> {
    let p = x.prime();
    if x.coeff(-1) != FpScalar::ONE {
        return Err(ConeError::NotNormalizable);
    }
    let mut z = x.clone();
    let mut sigma = Automorphism::identity(p);
    let top = p.value() as i64 - 2;
    for m in 2..p.value() as usize {
        let idx = m as i64 - 2;
        if idx >= top {
            break;
        }
        let cur = z.coeff(idx);
        if cur.is_zero() {
            continue;
        }
        // Probe t = 1 to read off the affine slope in t.
        let probe = Automorphism::elementary_unipotent(p, m, FpScalar::ONE);
        let slope = p.sub(probe.apply(&z).coeff(idx), cur);
        debug_assert!(!slope.is_zero(), "slope is a unit multiple of m");
        let t = p.neg(p.div(cur, slope).unwrap());
        let step = Automorphism::elementary_unipotent(p, m, t);
        z = step.apply(&z);
        debug_assert!(z.coeff(idx).is_zero());
        sigma = step.compose(&sigma);
    }
    debug_assert_eq!(z.coeff(-1), FpScalar::ONE);
    debug_assert!((0..top).all(|i| z.coeff(i).is_zero()));
    Ok(NormalForm {
        sigma,
        c: z.coeff(top),
    })
}

/// Tally of one enumeration or sampling pass. Merges additively, so sharded
/// scans produce the same report as a sequential one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConeTally {
    pub total: u64,
    pub cone: u64,
    pub orbit: u64,
    pub g1: u64,
    pub disagreements: u64,
}

impl ConeTally {
    pub fn merge(self, other: ConeTally) -> ConeTally {
        ConeTally {
            total: self.total + other.total,
            cone: self.cone + other.cone,
            orbit: self.orbit + other.orbit,
            g1: self.g1 + other.g1,
            disagreements: self.disagreements + other.disagreements,
        }
    }
}

/// Shared per-prime state for cone scans: the p-1 torus scalings are reused
/// across every element.
pub struct ConeScanner {
    p: Prime,
    torus: Vec<Automorphism>,
}

impl ConeScanner {
    pub fn new(p: Prime) -> Self {
        let torus = p
            .units()
            .map(|a| Automorphism::scaling(p, a).unwrap())
            .collect();
        ConeScanner { p, torus }
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.p
    }

    /// Applies all three criteria to one element and folds it into a tally.
    pub fn classify(&self, x: &WittElement) -> ConeTally {
        let oper = x.p_power().expect("p-th power is a derivation").is_zero();
        let det = x.f_det().is_zero();
        let lead = x.coeff(-1);
        let rec = if lead.is_zero() {
            x.coeff(0).is_zero()
        } else {
            let sigma = &self.torus[lead.value() as usize - 1];
            recursive_on_scaled(&sigma.apply(x))
        };
        let agree = oper == det && det == rec;
        ConeTally {
            total: 1,
            cone: oper as u64,
            orbit: (oper && !lead.is_zero()) as u64,
            g1: (oper && lead.is_zero()) as u64,
            disagreements: (!agree) as u64,
        }
    }

    /// Scans a contiguous index range of the p^p coefficient odometer.
    pub fn scan_range(&self, range: std::ops::Range<u64>) -> ConeTally {
        let mut tally = ConeTally::default();
        for idx in range {
            let x = WittElement::from_index(self.p, idx);
            tally = tally.merge(self.classify(&x));
        }
        tally
    }

    /// Scans a contiguous counter range of the seeded sample stream.
    pub fn sample_range(&self, seed: u64, range: std::ops::Range<u64>) -> ConeTally {
        let q = self.p.value();
        let mut tally = ConeTally::default();
        for ctr in range {
            let k = stream::residues(seed, ctr, q as usize, q)
                .into_iter()
                .map(|r| self.p.scalar(r))
                .collect();
            let x = WittElement::from_coeffs(self.p, k);
            tally = tally.merge(self.classify(&x));
        }
        tally
    }
}

pub fn element_count(p: Prime) -> u64 {
    let q = p.value();
    q.pow(q as u32)
}

/// Classification census of the nilpotent cone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConeReport {
    pub p: u64,
    pub mode: ConeMode,
    pub total_checked: u64,
    pub cone_size: u64,
    pub orbit_size: u64,
    pub g1_size: u64,
    pub criteria_disagreements: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeMode {
    Exhaustive,
    Sample,
}

impl ConeReport {
    pub fn from_tally(p: Prime, mode: ConeMode, tally: ConeTally, seed: Option<u64>) -> Self {
        ConeReport {
            p: p.value(),
            mode,
            total_checked: tally.total,
            cone_size: tally.cone,
            orbit_size: tally.orbit,
            g1_size: tally.g1,
            criteria_disagreements: tally.disagreements,
            seed,
            n: match mode {
                ConeMode::Exhaustive => None,
                ConeMode::Sample => Some(tally.total),
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Classifies every one of the p^p elements; allowed for p <= 7 only.
pub fn enumerate_cone(p: Prime) -> Result<ConeReport, ConeError> {
    if p.value() > 7 {
        return Err(ConeError::BudgetExceeded);
    }
    let scanner = ConeScanner::new(p);
    let tally = scanner.scan_range(0..element_count(p));
    Ok(ConeReport::from_tally(p, ConeMode::Exhaustive, tally, None))
}

/// Classifies `n` elements drawn from the counter-based stream `seed`.
pub fn sample_cone(p: Prime, n: u64, seed: u64) -> ConeReport {
    let scanner = ConeScanner::new(p);
    let tally = scanner.sample_range(seed, 0..n);
    ConeReport::from_tally(p, ConeMode::Sample, tally, Some(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream;

    fn prime(q: u64) -> Prime {
        Prime::new(q).unwrap()
    }

    fn scalars(p: Prime, raw: &[i64]) -> Vec<FpScalar> {
        raw.iter().map(|&x| p.scalar_i64(x)).collect()
    }

    #[test]
    fn l_sequence_of_zero_is_zero() {
        for q in [5u64, 7, 11] {
            let p = prime(q);
            let k = vec![FpScalar::ZERO; q as usize - 2];
            assert!(l_sequence(p, &k).iter().all(|c| c.is_zero()));
        }
    }

    #[test]
    fn l_sequence_closed_forms_for_single_k0() {
        // With only k_0 nonzero: l_1 = k_0/2, l_2 = -k_0^2/6, l_3 = k_0^3/12.
        for q in [7u64, 11, 13] {
            let p = prime(q);
            for k0 in p.units() {
                let mut k = vec![FpScalar::ZERO; q as usize - 2];
                k[0] = k0;
                let l = l_sequence(p, &k);
                let half = p.inv(p.scalar(2)).unwrap();
                assert_eq!(l[0], p.mul(k0, half));
                let sixth = p.inv(p.scalar(6)).unwrap();
                assert_eq!(l[1], p.neg(p.mul(p.mul(k0, k0), sixth)));
                let twelfth = p.inv(p.scalar(12)).unwrap();
                assert_eq!(l[2], p.mul(p.mul(k0, p.mul(k0, k0)), twelfth));
            }
        }
    }

    #[test]
    fn l1_is_half_k0() {
        let p = prime(5);
        let l = l_sequence(p, &scalars(p, &[2, 0, 0]));
        assert_eq!(l[0], p.one());
    }

    #[test]
    fn nilpotency_condition_examples() {
        let p = prime(5);
        // X = D: all k zero, 0 = 0.
        assert!(nilpotency_condition(p, &scalars(p, &[0, 0, 0, 0])));
        // X = D + xD: condition reduces to k_3 = k_0^4 / 6 = 1, but k_3 = 0.
        assert!(!nilpotency_condition(p, &scalars(p, &[1, 0, 0, 0])));
        // X = D + c x^{p-1} D with c != 0 always fails.
        for c in 1..5 {
            assert!(!nilpotency_condition(p, &scalars(p, &[0, 0, 0, c])));
        }
    }

    #[test]
    fn criteria_agree_on_named_elements() {
        for q in [5u64, 7, 11, 13] {
            let p = prime(q);
            let d = WittElement::basis(p, -1);
            let xd = WittElement::basis(p, 0);
            for m in [
                NilpotencyMethod::Recursive,
                NilpotencyMethod::Determinant,
                NilpotencyMethod::Operator,
            ] {
                assert!(is_nilpotent(&d, m), "D is nilpotent");
                assert!(!is_nilpotent(&xd, m), "xD is not nilpotent");
            }
        }
    }

    #[test]
    fn criteria_agree_exhaustively_at_p5() {
        let p = prime(5);
        let scanner = ConeScanner::new(p);
        let tally = scanner.scan_range(0..element_count(p));
        assert_eq!(tally.disagreements, 0);
    }

    #[test]
    fn orbit_param_examples() {
        let p = prime(5);
        let zero = vec![FpScalar::ZERO; 3];
        assert_eq!(
            orbit_param(p, p.one(), &zero).unwrap(),
            WittElement::basis(p, -1)
        );
        assert_eq!(
            orbit_param(p, p.scalar(2), &zero).unwrap(),
            WittElement::basis(p, -1).scale(p.scalar(2))
        );
        // a = 1, kappa = (1,0,0) completes with kappa_3 = kappa_0^4/6 = 1.
        let x = orbit_param(p, p.one(), &scalars(p, &[1, 0, 0])).unwrap();
        assert_eq!(x.coeff(-1), p.one());
        assert_eq!(x.coeff(0), p.one());
        assert_eq!(x.coeff(3), p.one());
        assert_eq!(
            orbit_param(p, p.zero(), &zero),
            Err(ConeError::ZeroLeadingCoefficient)
        );
    }

    #[test]
    fn orbit_param_lands_in_orbit() {
        for q in [5u64, 7, 11, 13] {
            let p = prime(q);
            for ctr in 0..200u64 {
                let raw = stream::residues(77 ^ q, ctr, q as usize - 1, q);
                let a = match p.scalar(raw[0]) {
                    c if c.is_zero() => p.one(),
                    c => c,
                };
                let kappa: Vec<FpScalar> = raw[1..].iter().map(|&r| p.scalar(r)).collect();
                let x = orbit_param(p, a, &kappa).unwrap();
                assert!(in_orbit_gd(&x));
                assert!(x.f_det().is_zero(), "orbit elements lie on f = 0");
            }
        }
    }

    #[test]
    fn in_orbit_examples() {
        let p = prime(5);
        assert!(in_orbit_gd(&WittElement::basis(p, -1)));
        assert!(!in_orbit_gd(&WittElement::basis(p, 1)), "x^2 D sits in g_1");
        assert!(!in_orbit_gd(&WittElement::basis(p, 0)), "xD is not nilpotent");
    }

    #[test]
    fn normalize_examples() {
        let p = prime(5);
        let d = WittElement::basis(p, -1);
        let nf = normalize_to_d(&d).unwrap();
        assert!(nf.sigma.is_identity());
        assert!(nf.c.is_zero());

        // D + c x^{p-1} D is already in normal form.
        for c in p.units() {
            let x = d.add(&WittElement::basis(p, 3).scale(c));
            let nf = normalize_to_d(&x).unwrap();
            assert!(nf.sigma.is_identity());
            assert_eq!(nf.c, c);
        }

        // A generated orbit element normalizes exactly to D.
        let x = orbit_param(p, p.one(), &scalars(p, &[1, 0, 0])).unwrap();
        let nf = normalize_to_d(&x).unwrap();
        assert!(nf.c.is_zero());
        assert_eq!(nf.sigma.apply(&x), d);

        let bad = WittElement::basis(p, 0);
        assert!(matches!(normalize_to_d(&bad), Err(ConeError::NotNormalizable)));
    }

    #[test]
    fn normalize_random_orbit_elements() {
        for q in [5u64, 7] {
            let p = prime(q);
            let d = WittElement::basis(p, -1);
            for ctr in 0..100u64 {
                let raw = stream::residues(83 ^ q, ctr, q as usize - 2, q);
                let kappa: Vec<FpScalar> = raw.iter().map(|&r| p.scalar(r)).collect();
                let x = orbit_param(p, p.one(), &kappa).unwrap();
                let nf = normalize_to_d(&x).unwrap();
                assert!(nf.c.is_zero());
                assert_eq!(nf.sigma.apply(&x), d);
                assert_eq!(nf.sigma.coeffs()[0], FpScalar::ONE, "witness is unipotent");
            }
        }
    }

    #[test]
    fn enumerate_cone_p5_counts() {
        let p = prime(5);
        let report = enumerate_cone(p).unwrap();
        assert_eq!(report.total_checked, 3125);
        assert_eq!(report.cone_size, 625);
        assert_eq!(report.orbit_size, 500);
        assert_eq!(report.g1_size, 125);
        assert_eq!(report.criteria_disagreements, 0);
        assert_eq!(
            report.to_json(),
            "{\"p\":5,\"mode\":\"exhaustive\",\"total_checked\":3125,\"cone_size\":625,\
             \"orbit_size\":500,\"g1_size\":125,\"criteria_disagreements\":0}"
        );
    }

    #[test]
    fn enumerate_rejects_large_primes() {
        assert!(matches!(
            enumerate_cone(prime(11)),
            Err(ConeError::BudgetExceeded)
        ));
    }

    #[test]
    fn sharded_scan_matches_sequential() {
        let p = prime(5);
        let scanner = ConeScanner::new(p);
        let full = scanner.scan_range(0..3125);
        let split = scanner
            .scan_range(0..1000)
            .merge(scanner.scan_range(1000..2500))
            .merge(scanner.scan_range(2500..3125));
        assert_eq!(full, split);
    }

    #[test]
    fn sample_cone_is_deterministic() {
        let p = prime(11);
        let a = sample_cone(p, 500, 42);
        let b = sample_cone(p, 500, 42);
        assert_eq!(a, b);
        assert_eq!(a.criteria_disagreements, 0);
        assert_eq!(a.seed, Some(42));
        assert_eq!(a.n, Some(500));
        let c = sample_cone(p, 500, 43);
        assert_ne!(a, c, "different seeds draw different samples");
    }
}
