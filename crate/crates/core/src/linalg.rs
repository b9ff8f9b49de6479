//! Dense linear algebra over a [`Field`]: canonical subspaces, lattice
//! operations, Grassmannian enumeration and rational projective spaces.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Elem, Field};

/// Default cap on the number of points any single enumeration may produce.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("enumeration of {count} objects exceeds the budget of {budget}")]
    BudgetExceeded { count: u64, budget: u64 },
    #[error("matrix is singular")]
    Singular,
}

/// Upper bound on enumeration sizes, overridable from the environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget(pub u64);

impl Default for Budget {
    fn default() -> Self {
        Budget(DEFAULT_ENUMERATION_BUDGET)
    }
}

impl Budget {
    pub const ENV_VAR: &'static str = "TOYSHT_BUDGET";

    pub fn from_env() -> Budget {
        std::env::var(Self::ENV_VAR)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .map(Budget)
            .unwrap_or_default()
    }

    pub fn check(&self, count: &BigUint) -> Result<u64, LinalgError> {
        match count.to_u64() {
            Some(c) if c <= self.0 => Ok(c),
            c => Err(LinalgError::BudgetExceeded {
                count: c.unwrap_or(u64::MAX),
                budget: self.0,
            }),
        }
    }
}

/// Which scalars an enumeration ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scalars {
    /// The small field `F_q`.
    Base,
    /// The whole field `F_{q^m}`.
    Extension,
}

impl Field {
    pub fn scalars(&self, which: Scalars) -> Vec<Elem> {
        match which {
            Scalars::Base => self.subfield().to_vec(),
            Scalars::Extension => self.elements().collect(),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl std::fmt::Debug for Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<u32> = self.row(r).iter().map(|e| e.index()).collect();
            write!(f, "{:?}", row)?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![Elem::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Elem::ONE;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Elem>], cols: usize) -> Result<Matrix, LinalgError> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(LinalgError::DimensionMismatch { expected: cols, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix { rows: rows.len(), cols, data })
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Elem>) -> Matrix {
        assert_eq!(rows * cols, data.len());
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Elem] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Elem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Elem>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn col(&self, c: usize) -> Vec<Elem> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    pub fn map(&self, f: impl Fn(Elem) -> Elem) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    /// Entrywise `x ↦ x^q`.
    pub fn frobenius(&self, field: &Field) -> Matrix {
        self.map(|x| field.frobenius(x))
    }

    pub fn is_rational(&self, field: &Field) -> bool {
        self.data.iter().all(|&x| field.in_subfield(x))
    }

    pub fn add(&self, field: &Field, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| field.add(a, b)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, field: &Field, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| field.sub(a, b)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn mul(&self, field: &Field, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = field.add(out[(i, j)], field.mul(a, other[(k, j)]));
                    out[(i, j)] = v;
                }
            }
        }
        out
    }

    /// Row vector times matrix.
    pub fn apply_row(&self, field: &Field, v: &[Elem]) -> Vec<Elem> {
        assert_eq!(v.len(), self.rows);
        (0..self.cols)
            .map(|c| field.sum((0..self.rows).map(|r| field.mul(v[r], self[(r, c)]))))
            .collect()
    }

    pub fn stack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix { rows: self.rows + other.rows, cols: self.cols, data }
    }

    /// Reduced row echelon form in place; returns the pivot columns and drops
    /// zero rows.
    pub fn rref(&mut self, field: &Field) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else {
                continue;
            };
            self.swap_rows(r, pr);
            let inv = field.inv(self[(r, c)]).unwrap();
            for j in 0..self.cols {
                self[(r, j)] = field.mul(self[(r, j)], inv);
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self[(i, c)];
                if f.is_zero() {
                    continue;
                }
                for j in 0..self.cols {
                    let v = field.sub(self[(i, j)], field.mul(f, self[(r, j)]));
                    self[(i, j)] = v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        self.data.truncate(r * self.cols);
        self.rows = r;
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self, field: &Field) -> usize {
        let mut m = self.clone();
        m.rref(field).len()
    }

    pub fn inverse(&self, field: &Field) -> Result<Matrix, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::DimensionMismatch { expected: self.rows, got: self.cols });
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)];
            }
            aug[(i, n + i)] = Elem::ONE;
        }
        let pivots = aug.rref(field);
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(LinalgError::Singular);
        }
        let mut inv = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = aug[(i, n + j)];
            }
        }
        Ok(inv)
    }

    pub fn determinant(&self, field: &Field) -> Elem {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Elem::ONE;
        for c in 0..n {
            let Some(pr) = (c..n).find(|&i| !m[(i, c)].is_zero()) else {
                return Elem::ZERO;
            };
            if pr != c {
                m.swap_rows(pr, c);
                det = field.neg(det);
            }
            let piv = m[(c, c)];
            det = field.mul(det, piv);
            let inv = field.inv(piv).unwrap();
            for i in c + 1..n {
                let f = field.mul(m[(i, c)], inv);
                if f.is_zero() {
                    continue;
                }
                for j in c..n {
                    let v = field.sub(m[(i, j)], field.mul(f, m[(c, j)]));
                    m[(i, j)] = v;
                }
            }
        }
        det
    }

    /// Basis of `{x : M·x = 0}` (column null space), as rows.
    pub fn null_space(&self, field: &Field) -> Matrix {
        let mut r = self.clone();
        let pivots = r.rref(field);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Matrix::zeros(free.len(), self.cols);
        for (k, &fc) in free.iter().enumerate() {
            out[(k, fc)] = Elem::ONE;
            for (i, &pc) in pivots.iter().enumerate() {
                out[(k, pc)] = field.neg(r[(i, fc)]);
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Elem;
    fn index(&self, (r, c): (usize, usize)) -> &Elem {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Elem {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// A linear subspace of `F^N` stored by its reduced row echelon basis, so
/// that equality of subspaces is equality of values.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subspace {
    ambient: usize,
    basis: Matrix,
}

impl std::fmt::Debug for Subspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Subspace({}⊂F^{}: {:?})", self.dim(), self.ambient, self.basis)
    }
}

pub fn echelonize(field: &Field, rows: &[Vec<Elem>], ambient: usize) -> Result<Subspace, LinalgError> {
    let m = Matrix::from_rows(rows, ambient)?;
    Ok(Subspace::from_matrix(field, m))
}

impl Subspace {
    pub fn from_matrix(field: &Field, mut m: Matrix) -> Subspace {
        m.rref(field);
        Subspace { ambient: m.cols(), basis: m }
    }

    pub fn zero(ambient: usize) -> Subspace {
        Subspace { ambient, basis: Matrix::zeros(0, ambient) }
    }

    pub fn full(ambient: usize) -> Subspace {
        Subspace { ambient, basis: Matrix::identity(ambient) }
    }

    /// Span of standard basis vectors.
    pub fn coordinate(ambient: usize, coords: &[usize]) -> Subspace {
        let mut sorted = coords.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut m = Matrix::zeros(sorted.len(), ambient);
        for (i, &c) in sorted.iter().enumerate() {
            m[(i, c)] = Elem::ONE;
        }
        Subspace { ambient, basis: m }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn pivots(&self) -> Vec<usize> {
        (0..self.dim())
            .map(|r| self.basis.row(r).iter().position(|e| !e.is_zero()).unwrap())
            .collect()
    }

    fn check_ambient(&self, other: &Subspace) -> Result<(), LinalgError> {
        if self.ambient != other.ambient {
            return Err(LinalgError::DimensionMismatch { expected: self.ambient, got: other.ambient });
        }
        Ok(())
    }

    pub fn sum(&self, field: &Field, other: &Subspace) -> Result<Subspace, LinalgError> {
        self.check_ambient(other)?;
        Ok(Subspace::from_matrix(field, self.basis.stack(&other.basis)))
    }

    pub fn intersect(&self, field: &Field, other: &Subspace) -> Result<Subspace, LinalgError> {
        self.check_ambient(other)?;
        let s = self.perp(field).sum(field, &other.perp(field))?;
        Ok(s.perp(field))
    }

    /// Annihilator under the standard pairing `Σ x_i y_i`.
    pub fn perp(&self, field: &Field) -> Subspace {
        Subspace::from_matrix(field, self.basis.null_space(field))
    }

    pub fn contains_vector(&self, field: &Field, v: &[Elem]) -> bool {
        assert_eq!(v.len(), self.ambient);
        let pivots = self.pivots();
        let mut r = v.to_vec();
        for (i, &pc) in pivots.iter().enumerate() {
            let f = r[pc];
            if f.is_zero() {
                continue;
            }
            for j in 0..self.ambient {
                r[j] = field.sub(r[j], field.mul(f, self.basis[(i, j)]));
            }
        }
        r.iter().all(|e| e.is_zero())
    }

    /// Whether `other ⊆ self`.
    pub fn contains(&self, field: &Field, other: &Subspace) -> Result<bool, LinalgError> {
        self.check_ambient(other)?;
        Ok((0..other.dim()).all(|r| self.contains_vector(field, other.basis.row(r))))
    }

    /// Entrywise Frobenius of the canonical basis (`σL`); stays canonical.
    pub fn frobenius(&self, field: &Field) -> Subspace {
        Subspace::from_matrix(field, self.basis.frobenius(field))
    }

    /// Whether the subspace is defined over `F_q`.
    pub fn is_rational(&self, field: &Field) -> bool {
        self.basis.is_rational(field)
    }

    /// Image under the row-vector map `x ↦ x·M`.
    pub fn image(&self, field: &Field, map: &Matrix) -> Subspace {
        Subspace::from_matrix(field, self.basis.mul(field, map))
    }

    /// All vectors of the subspace, enumerated over the given scalars.
    pub fn vectors(&self, field: &Field, scalars: &[Elem]) -> Vec<Vec<Elem>> {
        let d = self.dim();
        let mut out = Vec::with_capacity(scalars.len().pow(d as u32));
        let mut idx = vec![0usize; d];
        loop {
            let mut v = vec![Elem::ZERO; self.ambient];
            for (r, &k) in idx.iter().enumerate() {
                let c = scalars[k];
                if c.is_zero() {
                    continue;
                }
                for j in 0..self.ambient {
                    v[j] = field.add(v[j], field.mul(c, self.basis[(r, j)]));
                }
            }
            out.push(v);
            if !odometer(&mut idx, scalars.len()) {
                break;
            }
        }
        out
    }
}

/// Increment a mixed-radix counter; false once it wraps around.
pub(crate) fn odometer(idx: &mut [usize], radix: usize) -> bool {
    for d in idx.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

/// A linear map between coordinate spaces, acting on row vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearMap {
    pub matrix: Matrix,
}

impl LinearMap {
    pub fn domain_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn codomain_dim(&self) -> usize {
        self.matrix.cols()
    }
}

pub fn map_rank(field: &Field, f: &LinearMap) -> usize {
    f.matrix.rank(field)
}

/// Matrix of `L → V/W` in the basis of `V/W` dual to the canonical basis of
/// `W^⊥`, with rows indexed by the canonical basis of `L`.
pub fn induced_map(field: &Field, l: &Subspace, quotient_by: &Subspace) -> Result<LinearMap, LinalgError> {
    l.check_ambient(quotient_by)?;
    let functionals = quotient_by.perp(field);
    Ok(LinearMap { matrix: l.basis.mul(field, &functionals.basis.transpose()) })
}

/// Gaussian binomial coefficient `[N choose n]_q`.
pub fn gauss_binomial(big_n: usize, n: usize, q: u64) -> BigUint {
    assert!(n <= big_n);
    let qb = BigUint::from(q);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..n {
        num *= qb.pow((big_n - i) as u32) - BigUint::one();
        den *= qb.pow((n - i) as u32) - BigUint::one();
    }
    debug_assert!((&num % &den) == BigUint::from(0u32));
    num / den
}

/// Iterator over the `n`-dimensional subspaces of `F^N` with entries from a
/// fixed scalar set, in canonical order: pivot sets in lexicographic order,
/// then free entries lexicographically.
pub struct GrassmannianIter<'a> {
    field: &'a Field,
    ambient: usize,
    scalars: Vec<Elem>,
    pivots: Option<Vec<usize>>,
    free: Vec<(usize, usize)>,
    counter: Vec<usize>,
    fresh: bool,
}

impl<'a> GrassmannianIter<'a> {
    fn new(field: &'a Field, ambient: usize, n: usize, scalars: Vec<Elem>) -> Self {
        let pivots: Vec<usize> = (0..n).collect();
        let mut it = GrassmannianIter {
            field,
            ambient,
            scalars,
            pivots: Some(pivots),
            free: Vec::new(),
            counter: Vec::new(),
            fresh: true,
        };
        it.reset_cell();
        it
    }

    fn reset_cell(&mut self) {
        if let Some(p) = &self.pivots {
            self.free = free_positions(self.ambient, p);
            self.counter = vec![0; self.free.len()];
            self.fresh = true;
        }
    }

    fn advance_pivots(&mut self) {
        let Some(p) = self.pivots.as_mut() else { return };
        if !next_combination(p, self.ambient) {
            self.pivots = None;
        }
        self.reset_cell();
    }
}

/// Free (non-forced) entries of the RREF cell with the given pivots.
pub fn free_positions(ambient: usize, pivots: &[usize]) -> Vec<(usize, usize)> {
    let mut free = Vec::new();
    for (r, &pc) in pivots.iter().enumerate() {
        for c in pc + 1..ambient {
            if !pivots.contains(&c) {
                free.push((r, c));
            }
        }
    }
    free
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

impl Iterator for GrassmannianIter<'_> {
    type Item = Subspace;

    fn next(&mut self) -> Option<Subspace> {
        loop {
            let pivots = self.pivots.clone()?;
            if !self.fresh && !odometer(&mut self.counter, self.scalars.len()) {
                self.advance_pivots();
                continue;
            }
            self.fresh = false;
            let mut m = Matrix::zeros(pivots.len(), self.ambient);
            for (r, &pc) in pivots.iter().enumerate() {
                m[(r, pc)] = Elem::ONE;
            }
            for (k, &(r, c)) in self.free.iter().enumerate() {
                m[(r, c)] = self.scalars[self.counter[k]];
            }
            debug_assert_eq!(Subspace::from_matrix(self.field, m.clone()).basis, m);
            return Some(Subspace { ambient: self.ambient, basis: m });
        }
    }
}

/// All `n`-dimensional subspaces of `F^N` over the chosen scalars.
pub fn enumerate_grassmannian<'a>(
    field: &'a Field,
    ambient: usize,
    n: usize,
    over: Scalars,
    budget: Budget,
) -> Result<GrassmannianIter<'a>, LinalgError> {
    if n > ambient {
        return Err(LinalgError::DimensionMismatch { expected: ambient, got: n });
    }
    let scalars = field.scalars(over);
    budget.check(&gauss_binomial(ambient, n, scalars.len() as u64))?;
    Ok(GrassmannianIter::new(field, ambient, n, scalars))
}

/// Normalized representatives (first nonzero coordinate 1) of the rational
/// points of `P(F_q^N)`, in canonical order.
#[derive(Clone, Debug)]
pub struct ProjectiveSpace {
    ambient: usize,
    points: Vec<Vec<Elem>>,
    index: std::collections::HashMap<Vec<Elem>, usize>,
}

impl ProjectiveSpace {
    pub fn new(field: &Field, ambient: usize) -> ProjectiveSpace {
        let points = enumerate_grassmannian(field, ambient, 1, Scalars::Base, Budget(u64::MAX))
            .expect("lines always enumerable")
            .map(|s| s.basis().row(0).to_vec())
            .collect::<Vec<_>>();
        let index = points.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        ProjectiveSpace { ambient, points, index }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<Elem>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[Elem] {
        &self.points[i]
    }

    pub fn line(&self, i: usize) -> Subspace {
        let m = Matrix::from_vec(1, self.ambient, self.points[i].clone());
        Subspace { ambient: self.ambient, basis: m }
    }

    /// The hyperplane `ker(⟨point_i, ·⟩)`.
    pub fn hyperplane(&self, field: &Field, i: usize) -> Subspace {
        self.line(i).perp(field)
    }

    /// Index of the normalized form of a nonzero vector.
    pub fn index_of(&self, field: &Field, v: &[Elem]) -> Option<usize> {
        let lead = v.iter().find(|e| !e.is_zero())?;
        let inv = field.inv(*lead)?;
        let norm: Vec<Elem> = v.iter().map(|&x| field.mul(x, inv)).collect();
        self.index.get(&norm).copied()
    }

    /// `incidence[h]` lists the lines `J` with `J ⊂ ker(point_h)`.
    pub fn incidence(&self, field: &Field) -> Vec<Vec<usize>> {
        (0..self.len())
            .map(|h| {
                (0..self.len())
                    .filter(|&j| field.dot(&self.points[h], &self.points[j]).is_zero())
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e(v: u32) -> Elem {
        Elem(v)
    }

    #[test]
    fn echelonize_examples() {
        let f = Field::new(2, 1, 1).unwrap();
        let zero = echelonize(&f, &[vec![e(0), e(0), e(0)]], 3).unwrap();
        assert_eq!(zero.dim(), 0);
        let s = echelonize(&f, &[vec![e(1), e(1), e(0)], vec![e(0), e(1), e(1)], vec![e(1), e(0), e(1)]], 3).unwrap();
        assert_eq!(s.dim(), 2);
        let basis: Vec<Vec<Elem>> = (0..3).map(|i| (0..3).map(|j| if i == j { e(1) } else { e(0) }).collect()).collect();
        assert_eq!(echelonize(&f, &basis, 3).unwrap(), Subspace::full(3));
        assert_eq!(
            echelonize(&f, &[vec![e(1), e(0)]], 3).unwrap_err(),
            LinalgError::DimensionMismatch { expected: 3, got: 2 }
        );
    }

    #[test]
    fn echelonize_is_idempotent() {
        let f = Field::new(3, 1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let rows: Vec<Vec<Elem>> = (0..3).map(|_| (0..5).map(|_| Elem(rng.gen_range(0..9))).collect()).collect();
            let s = echelonize(&f, &rows, 5).unwrap();
            let again = Subspace::from_matrix(&f, s.basis().clone());
            assert_eq!(s, again);
        }
    }

    #[test]
    fn canonical_form_is_unique_across_generating_sets() {
        let f = Field::new(2, 1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let target = echelonize(&f, &[vec![e(1), e(2), e(0), e(3)], vec![e(0), e(1), e(1), e(2)]], 4).unwrap();
        for _ in 0..1000 {
            // random combinations of the basis plus redundant vectors
            let k = rng.gen_range(2..5);
            let rows: Vec<Vec<Elem>> = (0..k)
                .map(|_| {
                    let a = Elem(rng.gen_range(0..4));
                    let b = Elem(rng.gen_range(0..4));
                    (0..4)
                        .map(|j| f.add(f.mul(a, target.basis()[(0, j)]), f.mul(b, target.basis()[(1, j)])))
                        .collect()
                })
                .collect();
            let s = echelonize(&f, &rows, 4).unwrap();
            if s.dim() == 2 {
                assert_eq!(s, target);
            } else {
                assert!(target.contains(&f, &s).unwrap());
            }
        }
    }

    #[test]
    fn sum_and_intersection_of_equal_and_complementary() {
        let f = Field::new(2, 1, 1).unwrap();
        let a = Subspace::coordinate(4, &[0, 1]);
        let b = Subspace::coordinate(4, &[2, 3]);
        assert_eq!(a.sum(&f, &a).unwrap(), a);
        assert_eq!(a.intersect(&f, &a).unwrap(), a);
        assert_eq!(a.sum(&f, &b).unwrap(), Subspace::full(4));
        assert_eq!(a.intersect(&f, &b).unwrap(), Subspace::zero(4));
        assert!(a.sum(&f, &Subspace::zero(3)).is_err());
    }

    #[test]
    fn modular_law_against_span_enumeration() {
        let f = Field::new(3, 1, 1).unwrap();
        let sc = f.scalars(Scalars::Base);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..60 {
            let gen = |rng: &mut ChaCha8Rng| -> Subspace {
                let k = rng.gen_range(0..4);
                let rows: Vec<Vec<Elem>> = (0..k).map(|_| (0..4).map(|_| Elem(rng.gen_range(0..3))).collect()).collect();
                echelonize(&f, &rows, 4).unwrap()
            };
            let a = gen(&mut rng);
            let b = gen(&mut rng);
            let va: std::collections::BTreeSet<_> = a.vectors(&f, &sc).into_iter().collect();
            let vb: std::collections::BTreeSet<_> = b.vectors(&f, &sc).into_iter().collect();
            let inter_count = va.intersection(&vb).count();
            let mut sum_set = std::collections::BTreeSet::new();
            for x in &va {
                for y in &vb {
                    sum_set.insert((0..4).map(|i| f.add(x[i], y[i])).collect::<Vec<_>>());
                }
            }
            let s = a.sum(&f, &b).unwrap();
            let i = a.intersect(&f, &b).unwrap();
            assert_eq!(3usize.pow(s.dim() as u32), sum_set.len());
            assert_eq!(3usize.pow(i.dim() as u32), inter_count);
            assert_eq!(a.dim() + b.dim(), s.dim() + i.dim());
        }
    }

    #[test]
    fn perp_is_involutive_and_dimension_complementary() {
        let f = Field::new(2, 1, 2).unwrap();
        for n in 0..=3 {
            for s in enumerate_grassmannian(&f, 3, n, Scalars::Extension, Budget::default()).unwrap() {
                let p = s.perp(&f);
                assert_eq!(p.dim(), 3 - n);
                assert_eq!(p.perp(&f), s);
            }
        }
    }

    #[test]
    fn grassmannian_counts_small_cases() {
        let f2 = Field::new(2, 1, 1).unwrap();
        assert_eq!(enumerate_grassmannian(&f2, 2, 1, Scalars::Base, Budget::default()).unwrap().count(), 3);
        assert_eq!(enumerate_grassmannian(&f2, 4, 2, Scalars::Base, Budget::default()).unwrap().count(), 35);
        let f3 = Field::new(3, 1, 1).unwrap();
        assert_eq!(enumerate_grassmannian(&f3, 3, 3, Scalars::Base, Budget::default()).unwrap().count(), 1);
        assert!(matches!(
            enumerate_grassmannian(&f2, 4, 2, Scalars::Base, Budget(10)),
            Err(LinalgError::BudgetExceeded { count: 35, budget: 10 })
        ));
    }

    #[test]
    fn grassmannian_enumeration_is_sorted_and_distinct() {
        let f = Field::new(2, 1, 2).unwrap();
        let all: Vec<Subspace> = enumerate_grassmannian(&f, 4, 2, Scalars::Extension, Budget::default()).unwrap().collect();
        let set: std::collections::BTreeSet<_> = all.iter().cloned().collect();
        assert_eq!(set.len(), all.len());
        let mut last_pivots: Option<Vec<usize>> = None;
        for s in &all {
            let p = s.pivots();
            if let Some(lp) = &last_pivots {
                assert!(lp <= &p);
            }
            last_pivots = Some(p);
        }
    }

    /// Brute force: collect the spans of all n-tuples of vectors.
    #[test]
    fn grassmannian_matches_brute_force_span_enumeration() {
        let f = Field::new(2, 1, 1).unwrap();
        let sc = f.scalars(Scalars::Base);
        let vecs = Subspace::full(4).vectors(&f, &sc);
        let mut spans = std::collections::BTreeSet::new();
        for a in &vecs {
            for b in &vecs {
                let s = echelonize(&f, &[a.clone(), b.clone()], 4).unwrap();
                if s.dim() == 2 {
                    spans.insert(s);
                }
            }
        }
        assert_eq!(spans.len(), 35);
        let enumerated: std::collections::BTreeSet<_> =
            enumerate_grassmannian(&f, 4, 2, Scalars::Base, Budget::default()).unwrap().collect();
        assert_eq!(spans, enumerated);
    }

    #[test]
    fn gauss_binomial_examples() {
        assert_eq!(gauss_binomial(5, 0, 7), BigUint::from(1u32));
        assert_eq!(gauss_binomial(4, 2, 2), BigUint::from(35u32));
        assert_eq!(gauss_binomial(3, 1, 3), BigUint::from((27u32 - 1) / 2));
    }

    #[test]
    fn map_rank_examples() {
        let f = Field::new(3, 1, 1).unwrap();
        assert_eq!(map_rank(&f, &LinearMap { matrix: Matrix::zeros(3, 2) }), 0);
        assert_eq!(map_rank(&f, &LinearMap { matrix: Matrix::identity(4) }), 4);
        let l = Subspace::coordinate(4, &[0, 1]);
        let w = Subspace::coordinate(4, &[2, 3]);
        let map = induced_map(&f, &l, &w).unwrap();
        assert_eq!((map.domain_dim(), map.codomain_dim()), (2, 2));
        assert_eq!(map_rank(&f, &map), 2);
        assert_eq!(map_rank(&f, &induced_map(&f, &l, &l).unwrap()), 0);
    }

    #[test]
    fn projective_space_and_incidence() {
        let f = Field::new(2, 1, 1).unwrap();
        let pg = ProjectiveSpace::new(&f, 3);
        assert_eq!(pg.len(), 7);
        let inc = pg.incidence(&f);
        for h in &inc {
            assert_eq!(h.len(), 3);
        }
        for (i, pt) in pg.points().iter().enumerate() {
            assert_eq!(pg.index_of(&f, pt), Some(i));
        }
    }
}
