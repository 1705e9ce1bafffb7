//! Dense exact linear algebra over F_p: matrices, determinants, and
//! subspaces kept in reduced row-echelon form.
//!
//! Everything here is dimension-agnostic plumbing shared by the Witt algebra
//! and the Jacobson-Witt modules.

use crate::field::{FpScalar, Prime};

/// A dense row-major matrix over F_p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpMatrix {
    rows: usize,
    cols: usize,
    data: Vec<FpScalar>,
}

impl FpMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FpMatrix {
            rows,
            cols,
            data: vec![FpScalar::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = FpMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, FpScalar::ONE);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> FpScalar {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: FpScalar) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FpScalar] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<FpScalar> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn mul(&self, other: &FpMatrix, p: Prime) -> FpMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let q = p.value();
        let mut out = FpMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k).value();
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let cur = out.get(i, j).value();
                    let add = (a as u128 * other.get(k, j).value() as u128) % q as u128;
                    out.set(i, j, p.scalar(((cur as u128 + add) % q as u128) as u64));
                }
            }
        }
        out
    }

    pub fn add(&self, other: &FpMatrix, p: Prime) -> FpMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = FpMatrix::zeros(self.rows, self.cols);
        for i in 0..self.data.len() {
            out.data[i] = p.add(self.data[i], other.data[i]);
        }
        out
    }

    pub fn sub(&self, other: &FpMatrix, p: Prime) -> FpMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = FpMatrix::zeros(self.rows, self.cols);
        for i in 0..self.data.len() {
            out.data[i] = p.sub(self.data[i], other.data[i]);
        }
        out
    }

    pub fn scale(&self, c: FpScalar, p: Prime) -> FpMatrix {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = p.mul(*v, c);
        }
        out
    }

    /// Matrix power by repeated squaring.
    pub fn pow(&self, mut e: u64, p: Prime) -> FpMatrix {
        assert_eq!(self.rows, self.cols, "power of a non-square matrix");
        let mut base = self.clone();
        let mut acc = FpMatrix::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, p);
            }
            base = base.mul(&base, p);
            e >>= 1;
        }
        acc
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[FpScalar], p: Prime) -> Vec<FpScalar> {
        assert_eq!(self.cols, v.len());
        let q = p.value() as u128;
        (0..self.rows)
            .map(|i| {
                let mut acc = 0u128;
                for (j, x) in v.iter().enumerate() {
                    acc += self.get(i, j).value() as u128 * x.value() as u128;
                    if acc >= u128::MAX / 2 {
                        acc %= q;
                    }
                }
                p.scalar((acc % q) as u64)
            })
            .collect()
    }

    /// Exact determinant by Gaussian elimination with pivoting.
    pub fn det(&self, p: Prime) -> FpScalar {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = FpScalar::ONE;
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m.get(r, col).is_zero());
            let pivot = match pivot {
                Some(r) => r,
                None => return FpScalar::ZERO,
            };
            if pivot != col {
                for j in 0..n {
                    let a = m.get(col, j);
                    let b = m.get(pivot, j);
                    m.set(col, j, b);
                    m.set(pivot, j, a);
                }
                det = p.neg(det);
            }
            let pv = m.get(col, col);
            det = p.mul(det, pv);
            let pinv = p.inv(pv).expect("pivot is nonzero");
            for r in col + 1..n {
                let factor = p.mul(m.get(r, col), pinv);
                if factor.is_zero() {
                    continue;
                }
                for j in col..n {
                    let v = p.sub(m.get(r, j), p.mul(factor, m.get(col, j)));
                    m.set(r, j, v);
                }
            }
        }
        det
    }
}

/// An F_p-subspace of F_p^width held in reduced row-echelon form.
///
/// The RREF basis is the unique canonical representative of the subspace, so
/// `PartialEq`/`Hash` give subspace equality for free.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    width: usize,
    rows: Vec<Vec<FpScalar>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn empty(width: usize) -> Self {
        Subspace {
            width,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn from_rows(p: Prime, width: usize, rows: impl IntoIterator<Item = Vec<FpScalar>>) -> Self {
        let mut s = Subspace::empty(width);
        for r in rows {
            s.insert(p, r);
        }
        s
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<FpScalar>] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Reduces `v` against the basis, returning the (not re-normalized) remainder.
    pub fn reduce(&self, p: Prime, mut v: Vec<FpScalar>) -> Vec<FpScalar> {
        assert_eq!(v.len(), self.width);
        for (row, &piv) in self.rows.iter().zip(&self.pivots) {
            let c = v[piv];
            if c.is_zero() {
                continue;
            }
            for (x, y) in v.iter_mut().zip(row) {
                *x = p.sub(*x, p.mul(c, *y));
            }
        }
        v
    }

    pub fn contains(&self, p: Prime, v: &[FpScalar]) -> bool {
        self.reduce(p, v.to_vec()).iter().all(|c| c.is_zero())
    }

    pub fn is_subspace_of(&self, p: Prime, other: &Subspace) -> bool {
        self.rows.iter().all(|r| other.contains(p, r))
    }

    /// Inserts a vector, restoring RREF. Returns true when the rank grew.
    pub fn insert(&mut self, p: Prime, v: Vec<FpScalar>) -> bool {
        let mut v = self.reduce(p, v);
        let piv = match v.iter().position(|c| !c.is_zero()) {
            Some(i) => i,
            None => return false,
        };
        let inv = p.inv(v[piv]).expect("leading coefficient is nonzero");
        for x in &mut v {
            *x = p.mul(*x, inv);
        }
        // Clear the new pivot column from existing rows.
        for row in &mut self.rows {
            let c = row[piv];
            if c.is_zero() {
                continue;
            }
            for (x, y) in row.iter_mut().zip(&v) {
                *x = p.sub(*x, p.mul(c, *y));
            }
        }
        let at = self.pivots.partition_point(|&q| q < piv);
        self.pivots.insert(at, piv);
        self.rows.insert(at, v);
        true
    }

    /// Coordinates of `v` in the RREF basis, if `v` lies in the subspace.
    pub fn coordinates(&self, p: Prime, v: &[FpScalar]) -> Option<Vec<FpScalar>> {
        if !self.contains(p, v) {
            return None;
        }
        Some(self.pivots.iter().map(|&piv| v[piv]).collect())
    }

    /// Column indices that are not pivot columns (complement coordinates).
    pub fn free_columns(&self) -> Vec<usize> {
        let mut free = Vec::with_capacity(self.width - self.dim());
        let mut it = self.pivots.iter().peekable();
        for c in 0..self.width {
            if it.peek() == Some(&&c) {
                it.next();
            } else {
                free.push(c);
            }
        }
        free
    }
}

/// Smallest bracket-closed subspace containing `gens`.
///
/// `bracket` must be the bilinear product of the ambient algebra. Closure is
/// computed by a worklist; if the span reaches the full ambient dimension it
/// stops early (the result is then the whole algebra, which is closed).
pub fn span_closure_rows<F>(
    p: Prime,
    width: usize,
    gens: impl IntoIterator<Item = Vec<FpScalar>>,
    bracket: F,
) -> Subspace
where
    F: Fn(&[FpScalar], &[FpScalar]) -> Vec<FpScalar>,
{
    let mut space = Subspace::empty(width);
    let mut work: Vec<Vec<FpScalar>> = Vec::new();
    for g in gens {
        if space.insert(p, g.clone()) {
            work.push(g);
        }
    }
    while let Some(u) = work.pop() {
        if space.dim() == width {
            break;
        }
        // Rows inserted mid-scan land at or above the cursor, so the index
        // walk still visits a spanning set current at each step.
        let mut i = 0;
        while i < space.dim() {
            let b = bracket(&u, &space.rows()[i]);
            if space.insert(p, b.clone()) {
                work.push(b);
                if space.dim() == width {
                    break;
                }
            }
            i += 1;
        }
    }
    space
}

/// Span of all pairwise brackets of basis vectors: the derived subspace [S, S].
pub fn derived_step_rows<F>(p: Prime, s: &Subspace, bracket: F) -> Subspace
where
    F: Fn(&[FpScalar], &[FpScalar]) -> Vec<FpScalar>,
{
    let mut out = Subspace::empty(s.width());
    let rows = s.rows();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            out.insert(p, bracket(&rows[i], &rows[j]));
        }
    }
    out
}

/// Derived series S >= [S,S] >= ... down to (and excluding) the first repeat.
/// The series ends with the zero subspace exactly when S is solvable.
pub fn derived_series_rows<F>(p: Prime, s: &Subspace, bracket: F) -> Vec<Subspace>
where
    F: Fn(&[FpScalar], &[FpScalar]) -> Vec<FpScalar> + Copy,
{
    let mut series = vec![s.clone()];
    loop {
        let last = series.last().unwrap();
        if last.is_empty() {
            break;
        }
        let next = derived_step_rows(p, last, bracket);
        if next.dim() == last.dim() {
            // Stabilized at a nonzero perfect subalgebra: not solvable.
            break;
        }
        series.push(next);
    }
    series
}

pub fn is_solvable_rows<F>(p: Prime, s: &Subspace, bracket: F) -> bool
where
    F: Fn(&[FpScalar], &[FpScalar]) -> Vec<FpScalar> + Copy,
{
    derived_series_rows(p, s, bracket).last().unwrap().is_empty()
}

/// Lower central series S >= [S,S] >= [S,[S,S]] >= ...
pub fn lower_central_series_rows<F>(p: Prime, s: &Subspace, bracket: F) -> Vec<Subspace>
where
    F: Fn(&[FpScalar], &[FpScalar]) -> Vec<FpScalar> + Copy,
{
    let mut series = vec![s.clone()];
    loop {
        let last = series.last().unwrap();
        if last.is_empty() {
            break;
        }
        let mut next = Subspace::empty(s.width());
        for u in s.rows() {
            for v in last.rows() {
                next.insert(p, bracket(u, v));
            }
        }
        if next.dim() == last.dim() {
            break;
        }
        series.push(next);
    }
    series
}

/// The normalizer {x : [x, S] in S} inside the ambient algebra.
///
/// `bracket` is the ambient bilinear bracket; the ambient algebra is
/// F_p^width with the standard basis. Reductions modulo S vanish on every
/// pivot column, so constraints are collected on the free columns only.
pub fn normalizer_rows<F>(p: Prime, s: &Subspace, bracket: F) -> Subspace
where
    F: Fn(&[FpScalar], &[FpScalar]) -> Vec<FpScalar>,
{
    let width = s.width();
    let free = s.free_columns();
    // Constraint matrix: one row per (basis element of S, free coordinate);
    // column m holds the reduction of [e_m, s_j] modulo S at that coordinate.
    let mut constraints: Vec<Vec<FpScalar>> = Vec::new();
    for _ in 0..s.dim() * free.len() {
        constraints.push(vec![FpScalar::ZERO; width]);
    }
    let mut unit = vec![FpScalar::ZERO; width];
    for m in 0..width {
        unit[m] = FpScalar::ONE;
        for (j, row) in s.rows().iter().enumerate() {
            let red = s.reduce(p, bracket(&unit, row));
            for (t, &f) in free.iter().enumerate() {
                constraints[j * free.len() + t][m] = red[f];
            }
        }
        unit[m] = FpScalar::ZERO;
    }
    kernel_of(p, width, &constraints)
}

/// Kernel of the linear map given by constraint rows (each row is one
/// equation over the `width` unknowns).
pub fn kernel_of(p: Prime, width: usize, constraint_rows: &[Vec<FpScalar>]) -> Subspace {
    let constraints = Subspace::from_rows(p, width, constraint_rows.iter().cloned());
    // Free columns parameterize the kernel: back-substitute each one.
    let mut kernel = Subspace::empty(width);
    for free in constraints.free_columns() {
        let mut v = vec![FpScalar::ZERO; width];
        v[free] = FpScalar::ONE;
        // Solve the pivot coordinates so that every constraint row vanishes.
        for (row, &piv) in constraints.rows().iter().zip(&constraints.pivots) {
            // row has 1 at piv; requirement: sum_c row[c] * v[c] = 0.
            v[piv] = p.neg(row[free]);
        }
        kernel.insert(p, v);
    }
    kernel
}

/// Iterator over canonical line representatives of F_p^width: the first
/// nonzero coordinate of each representative is 1. Yields (p^width - 1)/(p - 1)
/// vectors.
pub fn line_representatives(p: Prime, width: usize) -> impl Iterator<Item = Vec<FpScalar>> {
    let q = p.value();
    (0..width).flat_map(move |lead| {
        let tail = width - lead - 1;
        let count = q.checked_pow(tail as u32).expect("line count overflows");
        (0..count).map(move |mut idx| {
            let mut v = vec![FpScalar::ZERO; width];
            v[lead] = FpScalar::ONE;
            for t in 0..tail {
                v[lead + 1 + t] = p.scalar(idx % q);
                idx /= q;
            }
            v
        })
    })
}

/// Number of lines in F_p^width, as u128 to survive large widths.
pub fn line_count(p: Prime, width: usize) -> u128 {
    let q = p.value() as u128;
    let mut total = 0u128;
    let mut power = 1u128;
    for _ in 0..width {
        total += power;
        power = match power.checked_mul(q) {
            Some(v) => v,
            None => return u128::MAX,
        };
    }
    total
}
