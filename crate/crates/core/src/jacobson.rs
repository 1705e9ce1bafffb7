//! The Jacobson-Witt algebra W_n = Der(F_p[x_1..x_n]/(x_1^p..x_n^p)),
//! practical for n <= 2.
//!
//! Provides the bracket, subalgebra machinery over coefficient rows, the
//! standard Cartan subalgebras T_0..T_n, a seeded greedy explorer for
//! maximal solvable subalgebras, and conjugation-invariant signatures used
//! as a necessary (not sufficient) test for conjugacy of explorer outputs.

use serde::Serialize;
use thiserror::Error;

use crate::borel;
use crate::field::{FpScalar, Prime};
use crate::linalg::{self, FpMatrix, Subspace};
use crate::stream;
use crate::trunc::TruncPoly;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum WnError {
    #[error("subalgebra is not closed under the bracket")]
    NotClosed,
    #[error("subalgebra is not solvable")]
    NotSolvable,
    #[error("n * p^n exceeds the explorer budget")]
    BudgetExceeded,
}

/// Candidate scans larger than this fall back to seeded sampling.
const FULL_SCAN_LIMIT: u128 = 200_000;
/// Consecutive failed sampled candidates before the greedy growth stops.
const STALL_LIMIT: u32 = 64;
/// Ambient dimension cap for the explorer.
const DIM_BUDGET: usize = 64;

/// Shared context for W_n: index tables and structure constants.
///
/// Basis element `c * p^n + m` is x^(exps[m]) D_{c+1}.
pub struct WnAlgebra {
    n: usize,
    p: Prime,
    monomials: usize,
    dim: usize,
    exps: Vec<Vec<u64>>,
    // [e_a D_i, e_b D_j] has at most two terms; coeff 0 marks an empty slot.
    table: Vec<[(u32, u64); 2]>,
}

impl WnAlgebra {
    pub fn new(n: usize, p: Prime) -> Self {
        assert!(n >= 1);
        let q = p.value();
        let monomials = (q as usize).pow(n as u32);
        let dim = n * monomials;
        let exps: Vec<Vec<u64>> = (0..monomials)
            .map(|mut m| {
                (0..n)
                    .map(|_| {
                        let e = m as u64 % q;
                        m /= q as usize;
                        e
                    })
                    .collect()
            })
            .collect();
        let mut alg = WnAlgebra {
            n,
            p,
            monomials,
            dim,
            exps,
            table: Vec::new(),
        };
        alg.table = alg.build_table();
        alg
    }

    fn build_table(&self) -> Vec<[(u32, u64); 2]> {
        let dim = self.dim;
        let mut table = vec![[(0u32, 0u64); 2]; dim * dim];
        for ia in 0..dim {
            let (i, ma) = (ia / self.monomials, ia % self.monomials);
            for ib in 0..dim {
                let (j, mb) = (ib / self.monomials, ib % self.monomials);
                let mut slot = 0;
                // [x^a D_i, x^b D_j] = b_i x^{a+b-e_i} D_j - a_j x^{a+b-e_j} D_i
                let bi = self.exps[mb][i];
                if bi > 0 {
                    if let Some(m) = self.monomial_sum_minus(ma, mb, i) {
                        table[ia * dim + ib][slot] = ((j * self.monomials + m) as u32, bi);
                        slot += 1;
                    }
                }
                let aj = self.exps[ma][j];
                if aj > 0 {
                    if let Some(m) = self.monomial_sum_minus(ma, mb, j) {
                        let neg = self.p.value() - (aj % self.p.value());
                        let entry = ((i * self.monomials + m) as u32, neg % self.p.value());
                        if slot == 1 && table[ia * dim + ib][0].0 == entry.0 {
                            // Coincident targets merge (happens when i = j).
                            let merged =
                                (table[ia * dim + ib][0].1 + entry.1) % self.p.value();
                            table[ia * dim + ib][0].1 = merged;
                            if merged == 0 {
                                table[ia * dim + ib][0] = (0, 0);
                                slot = 0;
                            }
                        } else if entry.1 != 0 {
                            table[ia * dim + ib][slot] = entry;
                            slot += 1;
                        }
                    }
                }
                let _ = slot;
            }
        }
        table
    }

    /// Exponent sum a + b - delta_i, or None when a coordinate reaches p.
    fn monomial_sum_minus(&self, ma: usize, mb: usize, i: usize) -> Option<usize> {
        let q = self.p.value();
        let mut idx = 0usize;
        let mut mult = 1usize;
        for t in 0..self.n {
            let mut s = self.exps[ma][t] + self.exps[mb][t];
            if t == i {
                s -= 1; // guarded by the caller: exps[mb][i] or exps[ma][j] > 0
            }
            if s >= q {
                return None;
            }
            idx += s as usize * mult;
            mult *= q as usize;
        }
        Some(idx)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.p
    }

    #[inline]
    pub fn monomials(&self) -> usize {
        self.monomials
    }

    /// Dimension of W_n: n * p^n.
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Grade of a basis element: total degree of its monomial minus one.
    pub fn grade(&self, idx: usize) -> i64 {
        let m = idx % self.monomials;
        self.exps[m].iter().sum::<u64>() as i64 - 1
    }

    pub fn max_grade(&self) -> i64 {
        self.n as i64 * (self.p.value() as i64 - 1) - 1
    }

    /// The bracket on raw coefficient rows.
    pub fn bracket_rows(&self, u: &[FpScalar], v: &[FpScalar]) -> Vec<FpScalar> {
        let dim = self.dim;
        let mut acc = vec![0u64; dim];
        for (ia, ca) in u.iter().enumerate() {
            let ca = ca.value();
            if ca == 0 {
                continue;
            }
            let base = ia * dim;
            for (ib, cb) in v.iter().enumerate() {
                let cb = cb.value();
                if cb == 0 {
                    continue;
                }
                for &(t, c) in &self.table[base + ib] {
                    if c == 0 {
                        continue;
                    }
                    acc[t as usize] += ca * cb * c;
                }
            }
        }
        acc.into_iter().map(|a| self.p.scalar(a)).collect()
    }

    /// Basis element x^e D_{comp+1} as a row.
    pub fn basis_row(&self, comp: usize, monomial: usize) -> Vec<FpScalar> {
        let mut row = vec![FpScalar::ZERO; self.dim];
        row[comp * self.monomials + monomial] = FpScalar::ONE;
        row
    }

    /// Encodes an exponent vector.
    pub fn monomial_index(&self, exps: &[u64]) -> usize {
        let q = self.p.value() as usize;
        let mut idx = 0;
        let mut mult = 1;
        for &e in exps {
            assert!((e as usize) < q);
            idx += e as usize * mult;
            mult *= q;
        }
        idx
    }

    /// The matrix of a row acting on A_n by derivations.
    pub fn operator_matrix(&self, row: &[FpScalar]) -> FpMatrix {
        let p = self.p;
        let mut m = FpMatrix::zeros(self.monomials, self.monomials);
        for (idx, c) in row.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (i, ma) = (idx / self.monomials, idx % self.monomials);
            // x^a D_i (x^b) = b_i x^{a+b-e_i}
            for mb in 0..self.monomials {
                let bi = self.exps[mb][i];
                if bi == 0 {
                    continue;
                }
                if let Some(t) = self.monomial_sum_minus(ma, mb, i) {
                    let v = p.add(m.get(t, mb), p.mul(*c, p.scalar(bi)));
                    m.set(t, mb, v);
                }
            }
        }
        m
    }

    /// Operator nilpotency: the p^n-th power of the action matrix vanishes.
    pub fn is_nilpotent_row(&self, row: &[FpScalar]) -> bool {
        self.operator_matrix(row)
            .pow(self.monomials as u64, self.p)
            .is_zero()
    }

    pub fn elem_from_row(&self, row: &[FpScalar]) -> WnElement {
        assert_eq!(row.len(), self.dim);
        let comps = (0..self.n)
            .map(|c| {
                MultiTruncPoly::from_coeffs(
                    self.n,
                    self.p,
                    row[c * self.monomials..(c + 1) * self.monomials].to_vec(),
                )
            })
            .collect();
        WnElement { comps }
    }

    pub fn random_row(&self, seed: u64, counter: u64) -> Vec<FpScalar> {
        stream::residues(seed, counter, self.dim, self.p.value())
            .into_iter()
            .map(|r| self.p.scalar(r))
            .collect()
    }
}

/// An element of the multivariate truncated algebra A_n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiTruncPoly {
    n: usize,
    p: Prime,
    c: Vec<FpScalar>,
}

impl MultiTruncPoly {
    pub fn zero(n: usize, p: Prime) -> Self {
        MultiTruncPoly {
            n,
            p,
            c: vec![FpScalar::ZERO; (p.value() as usize).pow(n as u32)],
        }
    }

    pub fn one(n: usize, p: Prime) -> Self {
        let mut out = Self::zero(n, p);
        out.c[0] = FpScalar::ONE;
        out
    }

    /// The variable x_{i+1}.
    pub fn var(n: usize, p: Prime, i: usize) -> Self {
        assert!(i < n);
        let mut out = Self::zero(n, p);
        out.c[(p.value() as usize).pow(i as u32)] = FpScalar::ONE;
        out
    }

    pub fn from_coeffs(n: usize, p: Prime, c: Vec<FpScalar>) -> Self {
        assert_eq!(c.len(), (p.value() as usize).pow(n as u32));
        MultiTruncPoly { n, p, c }
    }

    pub fn coeffs(&self) -> &[FpScalar] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        let p = self.p;
        MultiTruncPoly {
            n: self.n,
            p,
            c: self
                .c
                .iter()
                .zip(&other.c)
                .map(|(&a, &b)| p.add(a, b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let p = self.p;
        MultiTruncPoly {
            n: self.n,
            p,
            c: self
                .c
                .iter()
                .zip(&other.c)
                .map(|(&a, &b)| p.sub(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, s: FpScalar) -> Self {
        let p = self.p;
        MultiTruncPoly {
            n: self.n,
            p,
            c: self.c.iter().map(|&a| p.mul(a, s)).collect(),
        }
    }

    fn digits(&self, mut m: usize) -> Vec<u64> {
        let q = self.p.value();
        (0..self.n)
            .map(|_| {
                let e = m as u64 % q;
                m /= q as usize;
                e
            })
            .collect()
    }

    fn encode(&self, exps: &[u64]) -> Option<usize> {
        let q = self.p.value();
        let mut idx = 0usize;
        let mut mult = 1usize;
        for &e in exps {
            if e >= q {
                return None;
            }
            idx += e as usize * mult;
            mult *= q as usize;
        }
        Some(idx)
    }

    /// Truncated product: monomials whose exponent sum reaches p in any
    /// coordinate are dropped.
    pub fn mul(&self, other: &Self) -> Self {
        let p = self.p;
        let mut out = Self::zero(self.n, p);
        for (ma, &a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let ea = self.digits(ma);
            for (mb, &b) in other.c.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let eb = self.digits(mb);
                let sum: Vec<u64> = ea.iter().zip(&eb).map(|(&x, &y)| x + y).collect();
                if let Some(idx) = self.encode(&sum) {
                    out.c[idx] = p.add(out.c[idx], p.mul(a, b));
                }
            }
        }
        out
    }

    /// Partial derivative with respect to x_{i+1}.
    pub fn partial(&self, i: usize) -> Self {
        let p = self.p;
        let mut out = Self::zero(self.n, p);
        for (m, &a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let mut e = self.digits(m);
            if e[i] == 0 {
                continue;
            }
            let coeff = p.mul(a, p.scalar(e[i]));
            e[i] -= 1;
            let idx = self.encode(&e).unwrap();
            out.c[idx] = p.add(out.c[idx], coeff);
        }
        out
    }

    /// Substitutes components (with zero constant terms) for the variables.
    pub fn substitute(&self, comps: &[Self]) -> Self {
        assert_eq!(comps.len(), self.n);
        for g in comps {
            assert!(g.c[0].is_zero(), "substitution needs radical components");
        }
        let p = self.p;
        let q = p.value() as usize;
        // powers[i][e] = comps[i]^e
        let powers: Vec<Vec<Self>> = comps
            .iter()
            .map(|g| {
                let mut pw = Vec::with_capacity(q);
                pw.push(Self::one(self.n, p));
                for e in 1..q {
                    let next = pw[e - 1].mul(g);
                    pw.push(next);
                }
                pw
            })
            .collect();
        let mut out = Self::zero(self.n, p);
        for (m, &a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let e = self.digits(m);
            let mut term = Self::one(self.n, p);
            for (i, &ei) in e.iter().enumerate() {
                if ei > 0 {
                    term = term.mul(&powers[i][ei as usize]);
                }
            }
            out = out.add(&term.scale(a));
        }
        out
    }
}

/// An element of W_n: sum of f_i D_i with f_i in A_n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WnElement {
    comps: Vec<MultiTruncPoly>,
}

impl WnElement {
    pub fn from_components(comps: Vec<MultiTruncPoly>) -> Self {
        assert!(!comps.is_empty());
        WnElement { comps }
    }

    pub fn components(&self) -> &[MultiTruncPoly] {
        &self.comps
    }

    pub fn to_row(&self) -> Vec<FpScalar> {
        self.comps
            .iter()
            .flat_map(|c| c.coeffs().iter().copied())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// Action on A_n: sum_i f_i * partial_i(f).
    pub fn act_on(&self, f: &MultiTruncPoly) -> MultiTruncPoly {
        let mut out = MultiTruncPoly::zero(f.n, f.p);
        for (i, fi) in self.comps.iter().enumerate() {
            out = out.add(&fi.mul(&f.partial(i)));
        }
        out
    }
}

/// Typed bracket on W_n elements.
pub fn wn_bracket(alg: &WnAlgebra, u: &WnElement, v: &WnElement) -> WnElement {
    let row = alg.bracket_rows(&u.to_row(), &v.to_row());
    alg.elem_from_row(&row)
}

/// An F_p-subalgebra (or subspace) of W_n in canonical echelon basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WnSubalgebra {
    space: Subspace,
    closed: bool,
}

impl WnSubalgebra {
    pub fn span(alg: &WnAlgebra, rows: &[Vec<FpScalar>]) -> Self {
        let space = Subspace::from_rows(alg.p, alg.dim, rows.iter().cloned());
        let closed = Self::check_closed(alg, &space);
        WnSubalgebra { space, closed }
    }

    pub fn span_closure(alg: &WnAlgebra, rows: &[Vec<FpScalar>]) -> Self {
        assert!(!rows.is_empty());
        let space =
            linalg::span_closure_rows(alg.p, alg.dim, rows.iter().cloned(), |u, v| {
                alg.bracket_rows(u, v)
            });
        WnSubalgebra {
            space,
            closed: true,
        }
    }

    fn check_closed(alg: &WnAlgebra, space: &Subspace) -> bool {
        let rows = space.rows();
        for i in 0..rows.len() {
            for j in i + 1..rows.len() {
                if !space.contains(alg.p, &alg.bracket_rows(&rows[i], &rows[j])) {
                    return false;
                }
            }
        }
        true
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

    pub fn contains(&self, alg: &WnAlgebra, row: &[FpScalar]) -> bool {
        self.space.contains(alg.p, row)
    }

    pub fn derived_series(&self, alg: &WnAlgebra) -> Result<Vec<Subspace>, WnError> {
        if !self.closed {
            return Err(WnError::NotClosed);
        }
        Ok(linalg::derived_series_rows(alg.p, &self.space, |u, v| {
            alg.bracket_rows(u, v)
        }))
    }

    pub fn is_solvable(&self, alg: &WnAlgebra) -> Result<bool, WnError> {
        Ok(self.derived_series(alg)?.last().unwrap().is_empty())
    }

    /// Nilpotent (lower central series reaches zero) and self-normalizing.
    pub fn is_cartan(&self, alg: &WnAlgebra) -> Result<bool, WnError> {
        if !self.closed {
            return Err(WnError::NotClosed);
        }
        let lcs = linalg::lower_central_series_rows(alg.p, &self.space, |u, v| {
            alg.bracket_rows(u, v)
        });
        if !lcs.last().unwrap().is_empty() {
            return Ok(false);
        }
        let normalizer = linalg::normalizer_rows(alg.p, &self.space, |u, v| {
            alg.bracket_rows(u, v)
        });
        Ok(normalizer.dim() == self.dim())
    }

    /// The image under a W_n automorphism.
    pub fn apply_aut(&self, alg: &WnAlgebra, phi: &WnAutomorphism) -> WnSubalgebra {
        let rows: Vec<Vec<FpScalar>> = self
            .space
            .rows()
            .iter()
            .map(|r| phi.apply_row(alg, r))
            .collect();
        let space = Subspace::from_rows(alg.p, alg.dim, rows);
        WnSubalgebra {
            space,
            closed: self.closed,
        }
    }
}

/// The n + 1 standard Cartan subalgebras: T_k is spanned by x_i D_i for
/// i <= k and (1 + x_i) D_i for i > k. Each is abelian of dimension n.
pub fn cartan_list(alg: &WnAlgebra) -> Vec<WnSubalgebra> {
    let n = alg.n;
    let p = alg.p;
    (0..=n)
        .map(|k| {
            let rows: Vec<Vec<FpScalar>> = (0..n)
                .map(|i| {
                    let var = MultiTruncPoly::var(n, p, i);
                    let f = if i < k {
                        var
                    } else {
                        MultiTruncPoly::one(n, p).add(&var)
                    };
                    let mut comps = vec![MultiTruncPoly::zero(n, p); n];
                    comps[i] = f;
                    WnElement::from_components(comps).to_row()
                })
                .collect();
            WnSubalgebra::span(alg, &rows)
        })
        .collect()
}

/// Conjugation-invariant signature of a solvable subalgebra.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SolvableSignature {
    pub dim: u64,
    pub derived_length: u64,
    /// dim(S intersect W_{n,i}) for filtration levels i = -1 .. n(p-1)-1.
    pub filtration_dims: Vec<u64>,
    /// Number of [p]-nilpotent elements in the final nonzero derived term
    /// (that term is abelian, so they form a subspace and the count is a
    /// power of p).
    pub nilpotent_count: u64,
}

/// Computes the invariant signature of a closed solvable subalgebra.
pub fn signature(alg: &WnAlgebra, s: &WnSubalgebra) -> Result<SolvableSignature, WnError> {
    let series = s.derived_series(alg)?;
    if !series.last().unwrap().is_empty() {
        return Err(WnError::NotSolvable);
    }
    let derived_length = (series.len() - 1) as u64;
    let p = alg.p;

    // dim(S ∩ V_i) where V_i is the coordinate subspace of grades >= i:
    // subtract the rank of the projection onto the low-grade coordinates.
    let mut filtration_dims = Vec::new();
    for level in -1..=alg.max_grade() {
        let low: Vec<usize> = (0..alg.dim).filter(|&idx| alg.grade(idx) < level).collect();
        let projected = Subspace::from_rows(
            p,
            low.len().max(1),
            s.space.rows().iter().map(|r| {
                if low.is_empty() {
                    vec![FpScalar::ZERO]
                } else {
                    low.iter().map(|&c| r[c]).collect()
                }
            }),
        );
        filtration_dims.push((s.dim() - projected.dim()) as u64);
    }

    // Final nonzero derived term: abelian, so X -> X^{p^n} is F_p-linear on
    // it and its kernel (the nilpotent elements) is a subspace.
    let nilpotent_count = if series.len() >= 2 {
        let last = &series[series.len() - 2];
        let d = last.dim();
        let powered: Vec<FpMatrix> = last
            .rows()
            .iter()
            .map(|r| alg.operator_matrix(r).pow(alg.monomials as u64, p))
            .collect();
        let cells = alg.monomials * alg.monomials;
        let mut constraints = Vec::with_capacity(cells);
        for r in 0..alg.monomials {
            for c in 0..alg.monomials {
                let row: Vec<FpScalar> = powered.iter().map(|m| m.get(r, c)).collect();
                if row.iter().any(|v| !v.is_zero()) {
                    constraints.push(row);
                }
            }
        }
        let kernel = linalg::kernel_of(p, d, &constraints);
        p.value().pow(kernel.dim() as u32)
    } else {
        1 // zero algebra: only the zero element
    };

    Ok(SolvableSignature {
        dim: s.dim() as u64,
        derived_length,
        filtration_dims,
        nilpotent_count,
    })
}

/// Greedy growth of a maximal (w.r.t. single-line extension) solvable
/// subalgebra from a seeded random line.
pub fn grow_maximal_solvable(alg: &WnAlgebra, seed: u64) -> Result<WnSubalgebra, WnError> {
    if alg.dim > DIM_BUDGET {
        return Err(WnError::BudgetExceeded);
    }
    let mut ctr = 0;
    let start = loop {
        let row = alg.random_row(seed ^ 0x57A7, ctr);
        ctr += 1;
        if row.iter().any(|c| !c.is_zero()) {
            break row;
        }
    };
    let s = WnSubalgebra::span_closure(alg, &[start]);
    Ok(grow_from(alg, s, seed))
}

/// Greedy growth from a given solvable subalgebra: repeatedly scan candidate
/// lines in seeded order and adjoin the first whose closure stays solvable.
///
/// When the ambient line count is tractable the scan is complete, so the
/// output is genuinely maximal for single-line extensions. Beyond that the
/// seeded scan orders structured candidates first — normalizer lines (which
/// always extend solvably, since [x, S] in S forces the derived algebra of
/// S + Fx into S) and eigenlines of basis elements acting on W/S — and ends
/// with a uniform random stream, stopping after a fixed run of failures.
pub fn grow_from(alg: &WnAlgebra, start: WnSubalgebra, seed: u64) -> WnSubalgebra {
    let mut current = start;
    if linalg::line_count(alg.p, alg.dim) <= FULL_SCAN_LIMIT {
        // Deterministic seeded order over all ambient lines.
        let mut lines: Vec<Vec<FpScalar>> =
            linalg::line_representatives(alg.p, alg.dim).collect();
        let len = lines.len();
        for i in (1..len).rev() {
            let j = (stream::stream(seed, i as u64) % (i as u64 + 1)) as usize;
            lines.swap(i, j);
        }
        loop {
            let mut adjoined = false;
            for cand in &lines {
                if current.contains(alg, cand) {
                    continue;
                }
                if let Some(bigger) = extend_solvable(alg, &current, cand) {
                    current = bigger;
                    adjoined = true;
                    break;
                }
            }
            if !adjoined {
                break;
            }
        }
        return current;
    }
    let mut round = 0u64;
    loop {
        round += 1;
        let (absorbed, changed) = absorb_normalizer(alg, current);
        current = absorbed;
        if changed {
            continue;
        }
        if let Some(bigger) = adjoin_eigenline(alg, &current) {
            current = bigger;
            continue;
        }
        let mut adjoined = false;
        let mut fails = 0u32;
        let mut ctr = round << 32;
        while fails < STALL_LIMIT {
            let cand = alg.random_row(seed, ctr);
            ctr += 1;
            if cand.iter().all(|c| c.is_zero()) || current.contains(alg, &cand) {
                fails += 1;
                continue;
            }
            match extend_solvable(alg, &current, &cand) {
                Some(bigger) => {
                    current = bigger;
                    adjoined = true;
                    break;
                }
                None => fails += 1,
            }
        }
        if !adjoined {
            break;
        }
    }
    current
}

/// Absorbs normalizer rows until S is self-normalizing. A row x with
/// [x, S] in S extends S to the solvable subalgebra S + Fx (its derived
/// algebra sits inside S); rows adjoined in the same pass must also
/// normalize each other, which one bracket per pair checks.
fn absorb_normalizer(alg: &WnAlgebra, s: WnSubalgebra) -> (WnSubalgebra, bool) {
    let p = alg.p;
    let mut current = s;
    let mut changed = false;
    loop {
        let normalizer =
            linalg::normalizer_rows(alg.p, &current.space, |u, v| alg.bracket_rows(u, v));
        if normalizer.dim() <= current.dim() {
            return (current, changed);
        }
        let mut added: Vec<Vec<FpScalar>> = Vec::new();
        for row in normalizer.rows() {
            if current.space.contains(p, row) {
                continue;
            }
            let compatible = added
                .iter()
                .all(|x| current.space.contains(p, &alg.bracket_rows(row, x)));
            if !compatible {
                continue; // picked up by the next normalizer pass if still valid
            }
            current.space.insert(p, row.clone());
            added.push(row.clone());
            changed = true;
        }
        if added.is_empty() {
            return (current, changed);
        }
    }
}

/// Scans eigenlines of ad(s_j) acting on the quotient W/S: x with
/// [s_j, x] = lambda x (mod S) is the shape of a root vector, the candidate
/// that extends a self-normalizing torus.
///
/// Candidates are deduplicated and pre-filtered by the weak-normalizing
/// condition [S, x] in S + Fx (one bracket per basis row) before the exact
/// closure-and-solvability test runs.
fn adjoin_eigenline(alg: &WnAlgebra, s: &WnSubalgebra) -> Option<WnSubalgebra> {
    let p = alg.p;
    let free = s.space.free_columns();
    let q_dim = free.len();
    if q_dim == 0 {
        return None;
    }
    let mut seen: std::collections::HashSet<Vec<u64>> = std::collections::HashSet::new();
    for row in s.space.rows() {
        // Action of ad(row) on the quotient coordinates.
        let mut action = FpMatrix::zeros(q_dim, q_dim);
        for (col, &f) in free.iter().enumerate() {
            let mut unit = vec![FpScalar::ZERO; alg.dim];
            unit[f] = FpScalar::ONE;
            let img = s.space.reduce(p, alg.bracket_rows(row, &unit));
            for (r, &fc) in free.iter().enumerate() {
                action.set(r, col, img[fc]);
            }
        }
        for lambda in p.residues() {
            let shifted = action.sub(&FpMatrix::identity(q_dim).scale(lambda, p), p);
            let constraints: Vec<Vec<FpScalar>> =
                (0..q_dim).map(|r| shifted.row(r).to_vec()).collect();
            let kernel = linalg::kernel_of(p, q_dim, &constraints);
            for k_row in kernel.rows() {
                let mut cand = vec![FpScalar::ZERO; alg.dim];
                for (&f, &c) in free.iter().zip(k_row) {
                    cand[f] = c;
                }
                if !seen.insert(cand.iter().map(|c| c.value()).collect()) {
                    continue;
                }
                if !weakly_normalizes(alg, s, &cand) {
                    continue;
                }
                if let Some(bigger) = extend_solvable(alg, s, &cand) {
                    return Some(bigger);
                }
            }
        }
    }
    None
}

/// Checks [s_j, x] in S + Fx for every basis row: the shape shared by every
/// one-line extension whose closure does not grow past S + Fx.
fn weakly_normalizes(alg: &WnAlgebra, s: &WnSubalgebra, cand: &[FpScalar]) -> bool {
    let p = alg.p;
    let x_red = s.space.reduce(p, cand.to_vec());
    let x_lead = match x_red.iter().position(|c| !c.is_zero()) {
        Some(i) => i,
        None => return false, // candidate already lies in S
    };
    for row in s.space.rows() {
        let r = s.space.reduce(p, alg.bracket_rows(row, cand));
        // r must be a multiple of x_red.
        let ratio = match p.div(r[x_lead], x_red[x_lead]) {
            Ok(c) => c,
            Err(_) => unreachable!("leading coefficient is nonzero"),
        };
        for (a, b) in r.iter().zip(&x_red) {
            if *a != p.mul(ratio, *b) {
                return false;
            }
        }
    }
    true
}

/// span_closure(S + x), if it is still solvable. Reaching the full ambient
/// dimension short-circuits to None: W_n is simple.
pub fn extend_solvable(
    alg: &WnAlgebra,
    s: &WnSubalgebra,
    cand: &[FpScalar],
) -> Option<WnSubalgebra> {
    let gens = s
        .space
        .rows()
        .iter()
        .cloned()
        .chain(std::iter::once(cand.to_vec()));
    let closure = linalg::span_closure_rows(alg.p, alg.dim, gens, |u, v| alg.bracket_rows(u, v));
    if closure.dim() == alg.dim {
        return None;
    }
    if !linalg::is_solvable_rows(alg.p, &closure, |u, v| alg.bracket_rows(u, v)) {
        return None;
    }
    Some(WnSubalgebra {
        space: closure,
        closed: true,
    })
}

/// Audit that no single ambient line extends S to a larger solvable
/// subalgebra. Complete when the line count is tractable; otherwise checks
/// a fixed-size seeded sample.
pub fn single_line_maximality_audit(alg: &WnAlgebra, s: &WnSubalgebra, samples: u64) -> bool {
    if linalg::line_count(alg.p, alg.dim) <= FULL_SCAN_LIMIT {
        for cand in linalg::line_representatives(alg.p, alg.dim) {
            if s.contains(alg, &cand) {
                continue;
            }
            if extend_solvable(alg, s, &cand).is_some() {
                return false;
            }
        }
        true
    } else {
        for ctr in 0..samples {
            let cand = alg.random_row(0xA0D17 ^ samples, ctr);
            if cand.iter().all(|c| c.is_zero()) || s.contains(alg, &cand) {
                continue;
            }
            if extend_solvable(alg, s, &cand).is_some() {
                return false;
            }
        }
        true
    }
}

/// Reinterprets an n = 1 subalgebra as a W1 subalgebra (the bases coincide).
pub fn to_w1(alg: &WnAlgebra, s: &WnSubalgebra) -> borel::Subalgebra {
    assert_eq!(alg.n, 1, "only n = 1 maps onto W1");
    let elems: Vec<crate::witt::WittElement> = s
        .space
        .rows()
        .iter()
        .map(|r| crate::witt::WittElement::from_coeffs(alg.p, r.clone()))
        .collect();
    borel::Subalgebra::span(alg.p, &elems)
}

/// An automorphism of A_n given by substitution components together with
/// their compositional inverse; conjugation transports it to W_n.
///
/// Only the families needed for invariance testing are constructed here:
/// variable permutations, diagonal scalings, invertible linear substitutions,
/// and single-variable unipotents lifted from the one-variable algebra.
pub struct WnAutomorphism {
    forward: Vec<MultiTruncPoly>,
    backward: Vec<MultiTruncPoly>,
}

impl WnAutomorphism {
    pub fn permutation(alg: &WnAlgebra, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), alg.n);
        let forward: Vec<MultiTruncPoly> = (0..alg.n)
            .map(|i| MultiTruncPoly::var(alg.n, alg.p, perm[i]))
            .collect();
        let mut inv_perm = vec![0usize; alg.n];
        for (i, &t) in perm.iter().enumerate() {
            inv_perm[t] = i;
        }
        let backward = (0..alg.n)
            .map(|i| MultiTruncPoly::var(alg.n, alg.p, inv_perm[i]))
            .collect();
        WnAutomorphism { forward, backward }
    }

    pub fn diagonal(alg: &WnAlgebra, scalars: &[FpScalar]) -> Self {
        assert_eq!(scalars.len(), alg.n);
        let p = alg.p;
        let forward: Vec<MultiTruncPoly> = (0..alg.n)
            .map(|i| MultiTruncPoly::var(alg.n, p, i).scale(scalars[i]))
            .collect();
        let backward = (0..alg.n)
            .map(|i| MultiTruncPoly::var(alg.n, p, i).scale(p.inv(scalars[i]).unwrap()))
            .collect();
        WnAutomorphism { forward, backward }
    }

    /// x_i -> sum_j m[i][j] x_j for an invertible matrix m.
    pub fn linear(alg: &WnAlgebra, m: &FpMatrix) -> Self {
        let p = alg.p;
        let inv = invert_matrix(p, m).expect("matrix must be invertible");
        let build = |mat: &FpMatrix| -> Vec<MultiTruncPoly> {
            (0..alg.n)
                .map(|i| {
                    let mut f = MultiTruncPoly::zero(alg.n, p);
                    for j in 0..alg.n {
                        f = f.add(&MultiTruncPoly::var(alg.n, p, j).scale(mat.get(i, j)));
                    }
                    f
                })
                .collect()
        };
        WnAutomorphism {
            forward: build(m),
            backward: build(&inv),
        }
    }

    /// Lifts a one-variable substitution g (with g(0) = 0, g'(0) != 0) onto
    /// the variable x_{var+1}, fixing the others.
    pub fn single_variable(alg: &WnAlgebra, var: usize, g: &TruncPoly) -> Self {
        let p = alg.p;
        let ginv = g.comp_inverse().expect("g is invertible");
        let lift = |poly: &TruncPoly| -> MultiTruncPoly {
            let mut f = MultiTruncPoly::zero(alg.n, p);
            for (deg, &c) in poly.coeffs().iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let mut exps = vec![0u64; alg.n];
                exps[var] = deg as u64;
                let idx = alg.monomial_index(&exps);
                let mut mono = MultiTruncPoly::zero(alg.n, p);
                mono.c[idx] = c;
                f = f.add(&mono);
            }
            f
        };
        let forward: Vec<MultiTruncPoly> = (0..alg.n)
            .map(|i| {
                if i == var {
                    lift(g)
                } else {
                    MultiTruncPoly::var(alg.n, p, i)
                }
            })
            .collect();
        let backward = (0..alg.n)
            .map(|i| {
                if i == var {
                    lift(&ginv)
                } else {
                    MultiTruncPoly::var(alg.n, p, i)
                }
            })
            .collect();
        WnAutomorphism { forward, backward }
    }

    /// Conjugation on W_n: the image derivation sends x_k to
    /// phi(Y(phi^{-1}(x_k))).
    pub fn apply(&self, alg: &WnAlgebra, y: &WnElement) -> WnElement {
        let comps: Vec<MultiTruncPoly> = (0..alg.n)
            .map(|k| y.act_on(&self.backward[k]).substitute(&self.forward))
            .collect();
        WnElement::from_components(comps)
    }

    pub fn apply_row(&self, alg: &WnAlgebra, row: &[FpScalar]) -> Vec<FpScalar> {
        self.apply(alg, &alg.elem_from_row(row)).to_row()
    }
}

fn invert_matrix(p: Prime, m: &FpMatrix) -> Option<FpMatrix> {
    let n = m.rows();
    let mut work = m.clone();
    let mut inv = FpMatrix::identity(n);
    for col in 0..n {
        let pivot = (col..n).find(|&r| !work.get(r, col).is_zero())?;
        if pivot != col {
            for j in 0..n {
                let (a, b) = (work.get(col, j), work.get(pivot, j));
                work.set(col, j, b);
                work.set(pivot, j, a);
                let (a, b) = (inv.get(col, j), inv.get(pivot, j));
                inv.set(col, j, b);
                inv.set(pivot, j, a);
            }
        }
        let pinv = p.inv(work.get(col, col)).ok()?;
        for j in 0..n {
            work.set(col, j, p.mul(work.get(col, j), pinv));
            inv.set(col, j, p.mul(inv.get(col, j), pinv));
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = work.get(r, col);
            if factor.is_zero() {
                continue;
            }
            for j in 0..n {
                let v = p.sub(work.get(r, j), p.mul(factor, work.get(col, j)));
                work.set(r, j, v);
                let v = p.sub(inv.get(r, j), p.mul(factor, inv.get(col, j)));
                inv.set(r, j, v);
            }
        }
    }
    Some(inv)
}

/// One signature census entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignatureCount {
    pub dim: u64,
    pub derived_length: u64,
    pub filtration_dims: Vec<u64>,
    pub nilpotent_count: u64,
    pub count: u64,
}

/// Explorer census over a list of seeds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExplorerReport {
    pub n: u64,
    pub p: u64,
    pub seeds: u64,
    pub distinct_signatures: u64,
    pub signatures: Vec<SignatureCount>,
}

/// Grows one subalgebra per seed and returns its signature.
pub fn explore_seed(alg: &WnAlgebra, seed: u64) -> Result<SolvableSignature, WnError> {
    let s = grow_maximal_solvable(alg, seed)?;
    signature(alg, &s)
}

/// Aggregates per-seed signatures into a sorted census. The census is a
/// pure fold of the per-seed results, so any sharding of the seed list
/// produces identical output.
pub fn census(n: usize, p: Prime, results: &[SolvableSignature]) -> ExplorerReport {
    let mut sorted: Vec<&SolvableSignature> = results.iter().collect();
    sorted.sort();
    let mut signatures: Vec<SignatureCount> = Vec::new();
    for sig in sorted {
        match signatures.last_mut() {
            Some(last)
                if last.dim == sig.dim
                    && last.derived_length == sig.derived_length
                    && last.filtration_dims == sig.filtration_dims
                    && last.nilpotent_count == sig.nilpotent_count =>
            {
                last.count += 1;
            }
            _ => signatures.push(SignatureCount {
                dim: sig.dim,
                derived_length: sig.derived_length,
                filtration_dims: sig.filtration_dims.clone(),
                nilpotent_count: sig.nilpotent_count,
                count: 1,
            }),
        }
    }
    ExplorerReport {
        n: n as u64,
        p: p.value(),
        seeds: results.len() as u64,
        distinct_signatures: signatures.len() as u64,
        signatures,
    }
}
