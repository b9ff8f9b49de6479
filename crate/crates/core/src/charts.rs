//! Artin–Schreier charts on Grassmannians, the rank-≤1 determinantal locus,
//! and truncated power series curves used to read off vanishing orders.
//!
//! A chart is a rational decomposition `V = W′ ⊕ W` with `dim W′ = n`; an
//! `n × (N−n)` matrix `A` gives the subspace spanned by the rows of
//! `[I | A]` in the basis (W′, W). Because the frame is rational, `σ` acts on
//! chart coordinates entrywise, so `graph(A)` is a toy shtuka iff
//! `A − A^{(q)}` has rank at most one.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Elem, Field};
use crate::linalg::{odometer, Budget, LinalgError, Matrix, Subspace};
use crate::toysht::{is_toy_shtuka, FlagKind};

/// Truncation orders are doubled up to this cap before a vanishing order is
/// declared infinite.
pub const MAX_TRUNCATION: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChartError {
    #[error("W and W′ are not complementary")]
    NotComplementary,
    #[error("chart subspaces must be defined over F_q")]
    NotRational,
    #[error("matrix is not on the rank ≤ 1 locus")]
    NotOnVariety,
    #[error("entry ({row}, {col}) of the base point is nonzero")]
    EntryNonzero { row: usize, col: usize },
    #[error("subspace does not lie in the chart")]
    NotInChart,
    #[error("all coefficients vanish below t^{truncation}")]
    TruncationTooShort { truncation: usize },
    #[error("base point has no Artin–Schreier preimage over the field")]
    FiberEmpty,
    #[error("curve leaves the variety below t^{truncation}")]
    CurveOffVariety { truncation: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `A − A^{(q)}`.
pub fn artin_schreier(field: &Field, a: &Matrix) -> Matrix {
    a.sub(field, &a.frobenius(field))
}

/// All 2×2 minors of a matrix, row pairs major.
pub fn two_by_two_minors(field: &Field, a: &Matrix) -> Vec<Elem> {
    let mut out = Vec::new();
    for i in 0..a.rows() {
        for j in i + 1..a.rows() {
            for k in 0..a.cols() {
                for l in k + 1..a.cols() {
                    out.push(field.sub(field.mul(a[(i, k)], a[(j, l)]), field.mul(a[(i, l)], a[(j, k)])));
                }
            }
        }
    }
    out
}

/// Vanishing of every 2×2 minor.
pub fn rank_le1(field: &Field, a: &Matrix) -> bool {
    two_by_two_minors(field, a).iter().all(|m| m.is_zero())
}

/// Every matrix of the given shape with entries from `scalars`, in odometer
/// order.
pub fn all_matrices(rows: usize, cols: usize, scalars: &[Elem]) -> impl Iterator<Item = Matrix> + '_ {
    let mut idx = vec![0usize; rows * cols];
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let m = Matrix::from_vec(rows, cols, idx.iter().map(|&k| scalars[k]).collect());
        done = !odometer(&mut idx, scalars.len());
        Some(m)
    })
}

fn check_matrix_count(budget: Budget, base: usize, entries: usize) -> Result<u64, ChartError> {
    let count = num_bigint::BigUint::from(base).pow(entries as u32);
    Ok(budget.check(&count)?)
}

/// A rational frame `V = W′ ⊕ W`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chart {
    w: Subspace,
    wp: Subspace,
    /// Rows: the basis of `W′` followed by the basis of `W`.
    frame: Matrix,
    frame_inv: Matrix,
}

impl Chart {
    pub fn new(field: &Field, w: Subspace, wp: Subspace) -> Result<Chart, ChartError> {
        if w.ambient_dim() != wp.ambient_dim() {
            return Err(LinalgError::DimensionMismatch { expected: w.ambient_dim(), got: wp.ambient_dim() }.into());
        }
        if !w.is_rational(field) || !wp.is_rational(field) {
            return Err(ChartError::NotRational);
        }
        if w.dim() + wp.dim() != w.ambient_dim() || w.sum(field, &wp)?.dim() != w.ambient_dim() {
            return Err(ChartError::NotComplementary);
        }
        let frame = wp.basis().stack(w.basis());
        let frame_inv = frame.inverse(field)?;
        Ok(Chart { w, wp, frame, frame_inv })
    }

    /// The chart whose `W′` is spanned by the coordinate vectors off the
    /// pivots of `W`.
    pub fn standard(field: &Field, w: Subspace) -> Result<Chart, ChartError> {
        let pivots = w.pivots();
        let free: Vec<usize> = (0..w.ambient_dim()).filter(|c| !pivots.contains(c)).collect();
        let wp = Subspace::coordinate(w.ambient_dim(), &free);
        Chart::new(field, w, wp)
    }

    pub fn w(&self) -> &Subspace {
        &self.w
    }

    pub fn wp(&self) -> &Subspace {
        &self.wp
    }

    pub fn ambient_dim(&self) -> usize {
        self.w.ambient_dim()
    }

    /// Dimension of the subspaces the chart parametrizes.
    pub fn n(&self) -> usize {
        self.wp.dim()
    }

    pub fn frame(&self) -> &Matrix {
        &self.frame
    }

    /// Rows of `[I | A]` in the frame.
    pub fn graph_rows(&self, field: &Field, a: &Matrix) -> Matrix {
        let n = self.n();
        assert_eq!((a.rows(), a.cols()), (n, self.ambient_dim() - n));
        let mut m = Matrix::zeros(n, self.ambient_dim());
        for i in 0..n {
            m[(i, i)] = Elem::ONE;
            for j in 0..a.cols() {
                m[(i, n + j)] = a[(i, j)];
            }
        }
        m.mul(field, &self.frame)
    }

    pub fn graph(&self, field: &Field, a: &Matrix) -> Subspace {
        Subspace::from_matrix(field, self.graph_rows(field, a))
    }

    /// Chart coordinates of `l`, when `l ∩ W = 0`.
    pub fn coords(&self, field: &Field, l: &Subspace) -> Option<Matrix> {
        let n = self.n();
        if l.dim() != n || l.ambient_dim() != self.ambient_dim() {
            return None;
        }
        let m = l.basis().mul(field, &self.frame_inv);
        let mut left = Matrix::zeros(n, n);
        let mut right = Matrix::zeros(n, self.ambient_dim() - n);
        for i in 0..n {
            for j in 0..self.ambient_dim() {
                if j < n {
                    left[(i, j)] = m[(i, j)];
                } else {
                    right[(i, j - n)] = m[(i, j)];
                }
            }
        }
        let inv = left.inverse(field).ok()?;
        Some(inv.mul(field, &right))
    }

    /// `Σ h_j w_j` for the basis `w_j` of `W`.
    pub fn w_vector(&self, field: &Field, h: &[Elem]) -> Vec<Elem> {
        let n = self.n();
        (0..self.ambient_dim())
            .map(|c| field.sum(h.iter().enumerate().map(|(j, &x)| field.mul(x, self.frame[(n + j, c)]))))
            .collect()
    }
}

/// Every chart `(W, W′)` with `W` and `W′` rational and `dim W′ = n`.
pub fn all_rational_charts(field: &Field, ambient: usize, n: usize, budget: Budget) -> Result<Vec<Chart>, ChartError> {
    use crate::linalg::{enumerate_grassmannian, Scalars};
    let ws: Vec<Subspace> = enumerate_grassmannian(field, ambient, ambient - n, Scalars::Base, budget)?.collect();
    let wps: Vec<Subspace> = enumerate_grassmannian(field, ambient, n, Scalars::Base, budget)?.collect();
    let mut out = Vec::new();
    for w in &ws {
        for wp in &wps {
            if let Ok(c) = Chart::new(field, w.clone(), wp.clone()) {
                out.push(c);
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartEquivalenceReport {
    pub matrices: u64,
    pub toy_shtukas: u64,
    /// Matrices on which the two predicates disagree.
    pub counterexamples: Vec<Matrix>,
}

/// Compares `is_toy_shtuka(graph(A))` with `rank_le1(A − A^{(q)})` for every
/// `A` over `F_{q^m}`.
pub fn chart_equivalence_check(field: &Field, chart: &Chart, budget: Budget) -> Result<ChartEquivalenceReport, ChartError> {
    let n = chart.n();
    let k = chart.ambient_dim() - n;
    check_matrix_count(budget, field.size() as usize, n * k)?;
    let scalars: Vec<Elem> = field.elements().collect();
    let mut report = ChartEquivalenceReport::default();
    for a in all_matrices(n, k, &scalars) {
        let toy = is_toy_shtuka(field, &chart.graph(field, &a));
        let det = rank_le1(field, &artin_schreier(field, &a));
        report.matrices += 1;
        report.toy_shtukas += toy as u64;
        if toy != det {
            report.counterexamples.push(a);
        }
    }
    Ok(report)
}

/// Sizes of the nonempty fibers of `A ↦ A − A^{(q)}` on `rows × cols`
/// matrices over `F_{q^m}`.
pub fn artin_schreier_fiber_sizes(
    field: &Field,
    rows: usize,
    cols: usize,
    budget: Budget,
) -> Result<std::collections::BTreeMap<Matrix, u64>, ChartError> {
    check_matrix_count(budget, field.size() as usize, rows * cols)?;
    let scalars: Vec<Elem> = field.elements().collect();
    let mut fibers = std::collections::BTreeMap::new();
    for a in all_matrices(rows, cols, &scalars) {
        *fibers.entry(artin_schreier(field, &a)).or_insert(0) += 1;
    }
    Ok(fibers)
}

/// Some `a` with `a − a^q = b`, if one exists in the field.
pub fn artin_schreier_preimage(field: &Field, b: Elem) -> Option<Elem> {
    field.elements().find(|&a| field.sub(a, field.frobenius(a)) == b)
}

/// Entrywise preimage of a matrix under `A ↦ A − A^{(q)}`.
pub fn artin_schreier_matrix_preimage(field: &Field, b: &Matrix) -> Result<Matrix, ChartError> {
    let mut out = Matrix::zeros(b.rows(), b.cols());
    for i in 0..b.rows() {
        for j in 0..b.cols() {
            out[(i, j)] = artin_schreier_preimage(field, b[(i, j)]).ok_or(ChartError::FiberEmpty)?;
        }
    }
    Ok(out)
}

/// Whether the hyperplane `{X_{row,col} = 0}` meets the rank ≤ 1 locus
/// transversally at `a`.
///
/// At a rank one point the locus is smooth and its tangent space is the
/// kernel of the Jacobian of the 2×2 minors; the intersection is transversal
/// iff that kernel is not inside the hyperplane, i.e. iff the coordinate
/// functional is not in the row space of the Jacobian. The origin is the
/// singular point of the cone and counts as non-transversal.
pub fn transversality_check(field: &Field, a: &Matrix, row: usize, col: usize) -> Result<bool, ChartError> {
    if !rank_le1(field, a) {
        return Err(ChartError::NotOnVariety);
    }
    if !a[(row, col)].is_zero() {
        return Err(ChartError::EntryNonzero { row, col });
    }
    if a.is_zero() {
        return Ok(false);
    }
    let jac = minors_jacobian(field, a);
    let (s, t) = (a.rows(), a.cols());
    let mut functional = vec![Elem::ZERO; s * t];
    functional[row * t + col] = Elem::ONE;
    let span = Subspace::from_matrix(field, jac);
    Ok(!span.contains_vector(field, &functional))
}

/// Jacobian of all 2×2 minors at `a`, one row per minor, columns indexed by
/// entries in row-major order.
pub fn minors_jacobian(field: &Field, a: &Matrix) -> Matrix {
    let (s, t) = (a.rows(), a.cols());
    let mut rows = Vec::new();
    for i in 0..s {
        for j in i + 1..s {
            for k in 0..t {
                for l in k + 1..t {
                    // x_ik x_jl − x_il x_jk
                    let mut g = vec![Elem::ZERO; s * t];
                    g[i * t + k] = field.add(g[i * t + k], a[(j, l)]);
                    g[j * t + l] = field.add(g[j * t + l], a[(i, k)]);
                    g[i * t + l] = field.sub(g[i * t + l], a[(j, k)]);
                    g[j * t + k] = field.sub(g[j * t + k], a[(i, l)]);
                    rows.push(g);
                }
            }
        }
    }
    Matrix::from_rows(&rows, s * t).expect("rows have s·t entries")
}

/// The locus where transversality fails: row `row` and column `col` vanish.
pub fn predicted_non_transversal(a: &Matrix, row: usize, col: usize) -> bool {
    (0..a.cols()).all(|j| a[(row, j)].is_zero()) && (0..a.rows()).all(|i| a[(i, col)].is_zero())
}

/// A power series over `F_{q^m}` modulo `t^T`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Series {
    coeffs: Vec<Elem>,
}

impl std::fmt::Debug for Series {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let c: Vec<u32> = self.coeffs.iter().map(|e| e.index()).collect();
        write!(f, "Series{:?}", c)
    }
}

impl Series {
    pub fn zero(truncation: usize) -> Series {
        Series { coeffs: vec![Elem::ZERO; truncation] }
    }

    pub fn constant(c: Elem, truncation: usize) -> Series {
        let mut s = Series::zero(truncation);
        if truncation > 0 {
            s.coeffs[0] = c;
        }
        s
    }

    /// `c0 + c1·t`.
    pub fn linear(c0: Elem, c1: Elem, truncation: usize) -> Series {
        let mut s = Series::constant(c0, truncation);
        if truncation > 1 {
            s.coeffs[1] = c1;
        }
        s
    }

    /// The parameter `t` itself.
    pub fn t(truncation: usize) -> Series {
        Series::linear(Elem::ZERO, Elem::ONE, truncation)
    }

    pub fn from_coeffs(mut coeffs: Vec<Elem>, truncation: usize) -> Series {
        coeffs.resize(truncation, Elem::ZERO);
        Series { coeffs }
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Elem {
        self.coeffs.get(i).copied().unwrap_or(Elem::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Index of the first nonzero coefficient; `None` if zero modulo `t^T`.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn add(&self, field: &Field, o: &Series) -> Series {
        debug_assert_eq!(self.truncation(), o.truncation());
        Series { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(&a, &b)| field.add(a, b)).collect() }
    }

    pub fn sub(&self, field: &Field, o: &Series) -> Series {
        debug_assert_eq!(self.truncation(), o.truncation());
        Series { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(&a, &b)| field.sub(a, b)).collect() }
    }

    pub fn neg(&self, field: &Field) -> Series {
        Series { coeffs: self.coeffs.iter().map(|&a| field.neg(a)).collect() }
    }

    pub fn scale(&self, field: &Field, c: Elem) -> Series {
        Series { coeffs: self.coeffs.iter().map(|&a| field.mul(a, c)).collect() }
    }

    pub fn mul(&self, field: &Field, o: &Series) -> Series {
        let t = self.truncation();
        debug_assert_eq!(t, o.truncation());
        let mut out = vec![Elem::ZERO; t];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in o.coeffs[..t - i].iter().enumerate() {
                out[i + j] = field.add(out[i + j], field.mul(a, b));
            }
        }
        Series { coeffs: out }
    }

    /// `s^q`: coefficients to the `q`-th power, `t ↦ t^q`.
    pub fn frobenius(&self, field: &Field) -> Series {
        let q = field.q() as usize;
        let mut out = vec![Elem::ZERO; self.truncation()];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if i * q < out.len() {
                out[i * q] = field.frobenius(a);
            }
        }
        Series { coeffs: out }
    }

    /// Multiplicative inverse of a unit.
    pub fn inverse(&self, field: &Field) -> Option<Series> {
        let t = self.truncation();
        let c0inv = field.inv(self.coeff(0))?;
        let mut out = vec![Elem::ZERO; t];
        if t == 0 {
            return Some(Series { coeffs: out });
        }
        out[0] = c0inv;
        for k in 1..t {
            let s = field.sum((1..=k).map(|i| field.mul(self.coeffs[i], out[k - i])));
            out[k] = field.neg(field.mul(s, c0inv));
        }
        Some(Series { coeffs: out })
    }
}

/// A matrix of truncated series.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesMatrix {
    rows: usize,
    cols: usize,
    truncation: usize,
    data: Vec<Series>,
}

impl SeriesMatrix {
    pub fn zeros(rows: usize, cols: usize, truncation: usize) -> SeriesMatrix {
        SeriesMatrix { rows, cols, truncation, data: vec![Series::zero(truncation); rows * cols] }
    }

    pub fn constant(m: &Matrix, truncation: usize) -> SeriesMatrix {
        SeriesMatrix {
            rows: m.rows(),
            cols: m.cols(),
            truncation,
            data: m.data().iter().map(|&c| Series::constant(c, truncation)).collect(),
        }
    }

    /// `m0 + t·m1`.
    pub fn linear(m0: &Matrix, m1: &Matrix, truncation: usize) -> SeriesMatrix {
        assert_eq!((m0.rows(), m0.cols()), (m1.rows(), m1.cols()));
        SeriesMatrix {
            rows: m0.rows(),
            cols: m0.cols(),
            truncation,
            data: m0.data().iter().zip(m1.data()).map(|(&a, &b)| Series::linear(a, b, truncation)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn get(&self, r: usize, c: usize) -> &Series {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, s: Series) {
        debug_assert_eq!(s.truncation(), self.truncation);
        self.data[r * self.cols + c] = s;
    }

    pub fn entries(&self) -> &[Series] {
        &self.data
    }

    /// Value at `t = 0`.
    pub fn at_zero(&self) -> Matrix {
        Matrix::from_vec(self.rows, self.cols, self.data.iter().map(|s| s.coeff(0)).collect())
    }

    pub fn add(&self, field: &Field, o: &SeriesMatrix) -> SeriesMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        SeriesMatrix { data: self.data.iter().zip(&o.data).map(|(a, b)| a.add(field, b)).collect(), ..self.clone() }
    }

    pub fn sub(&self, field: &Field, o: &SeriesMatrix) -> SeriesMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        SeriesMatrix { data: self.data.iter().zip(&o.data).map(|(a, b)| a.sub(field, b)).collect(), ..self.clone() }
    }

    pub fn mul(&self, field: &Field, o: &SeriesMatrix) -> SeriesMatrix {
        assert_eq!(self.cols, o.rows);
        let mut out = SeriesMatrix::zeros(self.rows, o.cols, self.truncation);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut acc = Series::zero(self.truncation);
                for k in 0..self.cols {
                    acc = acc.add(field, &self.get(i, k).mul(field, o.get(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    /// Product with a constant matrix on the right.
    pub fn mul_const(&self, field: &Field, m: &Matrix) -> SeriesMatrix {
        self.mul(field, &SeriesMatrix::constant(m, self.truncation))
    }

    pub fn frobenius(&self, field: &Field) -> SeriesMatrix {
        SeriesMatrix { data: self.data.iter().map(|s| s.frobenius(field)).collect(), ..self.clone() }
    }

    pub fn stack(&self, o: &SeriesMatrix) -> SeriesMatrix {
        assert_eq!(self.cols, o.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&o.data);
        SeriesMatrix { rows: self.rows + o.rows, data, ..self.clone() }
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> SeriesMatrix {
        let mut out = SeriesMatrix::zeros(rows.len(), cols.len(), self.truncation);
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                out.set(i, j, self.get(r, c).clone());
            }
        }
        out
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn determinant(&self, field: &Field) -> Series {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return Series::constant(Elem::ONE, self.truncation);
        }
        if n == 1 {
            return self.get(0, 0).clone();
        }
        let rest: Vec<usize> = (1..n).collect();
        let mut acc = Series::zero(self.truncation);
        for c in 0..n {
            let a = self.get(0, c);
            if a.is_zero() {
                continue;
            }
            let cols: Vec<usize> = (0..n).filter(|&j| j != c).collect();
            let term = a.mul(field, &self.select(&rest, &cols).determinant(field));
            acc = if c % 2 == 0 { acc.add(field, &term) } else { acc.sub(field, &term) };
        }
        acc
    }

    /// All `k × k` minors.
    pub fn minors(&self, field: &Field, k: usize) -> Vec<Series> {
        let mut out = Vec::new();
        for rows in combinations(self.rows, k) {
            for cols in combinations(self.cols, k) {
                out.push(self.select(&rows, &cols).determinant(field));
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|s| s.is_zero())
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        out.push(c.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if c[i] < n - k + i {
                c[i] += 1;
                for j in i + 1..k {
                    c[j] = c[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Lift `B(t)` to `A(t)` with `A − A^{(q)} = B` and `A(0) = a0`.
///
/// The Frobenius term has zero derivative, so Newton's iteration for the
/// Artin–Schreier map is the fixed-point iteration `A ← B + A^{(q)}`; each
/// step multiplies the `t`-adic precision by `q`.
pub fn hensel_lift(field: &Field, b: &SeriesMatrix, a0: &Matrix) -> Result<SeriesMatrix, ChartError> {
    if artin_schreier(field, a0) != b.at_zero() {
        return Err(ChartError::FiberEmpty);
    }
    let t = b.truncation();
    let mut a = SeriesMatrix::constant(a0, t);
    let mut precision = 1usize;
    while precision < t {
        a = b.add(field, &a.frobenius(field));
        precision *= field.q() as usize;
    }
    Ok(a)
}

/// The vanishing order of an ideal along a curve: the minimum valuation of
/// its generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Valuation {
    Finite(usize),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<usize> {
        match self {
            Valuation::Finite(k) => Some(k),
            Valuation::Infinite => None,
        }
    }
}

/// Order of the ideal generated by `gens` at a fixed truncation. When every
/// generator vanishes modulo `t^T` the answer is ambiguous below the cap and
/// infinite at it.
pub fn valuation_probe(gens: &[Series]) -> Result<Valuation, ChartError> {
    let truncation = gens.first().map_or(MAX_TRUNCATION, |s| s.truncation());
    match gens.iter().filter_map(|s| s.valuation()).min() {
        Some(k) => Ok(Valuation::Finite(k)),
        None if truncation >= MAX_TRUNCATION => Ok(Valuation::Infinite),
        None => Err(ChartError::TruncationTooShort { truncation }),
    }
}

/// Default starting truncation `2q + 2`.
pub fn default_truncation(field: &Field) -> usize {
    2 * field.q() as usize + 2
}

/// Runs `probe` at increasing truncation orders until the order is
/// determined.
pub fn probe_with_doubling(
    field: &Field,
    mut probe: impl FnMut(usize) -> Result<Vec<Series>, ChartError>,
) -> Result<Valuation, ChartError> {
    let mut t = default_truncation(field).min(MAX_TRUNCATION);
    loop {
        match valuation_probe(&probe(t)?) {
            Err(ChartError::TruncationTooShort { .. }) => t = (2 * t).min(MAX_TRUNCATION),
            other => return other,
        }
    }
}

/// Which explicit model a probe curve lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChartModel {
    /// Toy shtukas: `B = u·vᵀ`, a rank ≤ 1 matrix.
    Toy,
    /// Right flags: `B = β·hᵀ` with `L′ = L + span(h)`, `h` read in `W`.
    Right,
    /// Left flags: `B = κ·γᵀ` with `M′ = {k·[I|A] : κ·k = 0}`.
    Left,
}

/// A curve `t ↦ (x0 + t·x1)(y0 + t·y1)ᵀ` on the explicit model, lifted
/// through Artin–Schreier from the base point `a0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeCurve {
    pub chart: Chart,
    pub model: ChartModel,
    pub a0: Matrix,
    /// Column factor: `u`, `β` or `κ`, length `n`.
    pub x: [Vec<Elem>; 2],
    /// Row factor: `v`, `h` or `γ`, length `N − n`.
    pub y: [Vec<Elem>; 2],
}

/// A family of subspaces over `F_{q^m}[t]/t^T`, given by spanning rows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesPoint {
    Toy(SeriesMatrix),
    Flag { small: SeriesMatrix, big: SeriesMatrix, kind: FlagKind },
}

fn outer_series(field: &Field, x: &[Vec<Elem>; 2], y: &[Vec<Elem>; 2], t: usize) -> SeriesMatrix {
    let mut b = SeriesMatrix::zeros(x[0].len(), y[0].len(), t);
    for i in 0..x[0].len() {
        let xi = Series::linear(x[0][i], x[1][i], t);
        for j in 0..y[0].len() {
            b.set(i, j, xi.mul(field, &Series::linear(y[0][j], y[1][j], t)));
        }
    }
    b
}

impl ProbeCurve {
    /// A curve through the chart point `a0` with random factors of
    /// `B(0) = a0 − a0^{(q)}` and random first-order directions. For flags the
    /// extra datum (`h(0)` resp. `κ(0)`) is chosen uniformly among nonzero
    /// vectors when `B(0) = 0`.
    pub fn through(field: &Field, chart: Chart, model: ChartModel, a0: Matrix, rng: &mut impl Rng) -> ProbeCurve {
        let (n, k) = (a0.rows(), a0.cols());
        let (x0, y0) = match factor_rank_one(field, &artin_schreier(field, &a0)) {
            Some((x, y)) => {
                let c = loop {
                    let c = random_elem(field, rng);
                    if !c.is_zero() {
                        break c;
                    }
                };
                let ci = field.inv(c).expect("nonzero");
                (x.iter().map(|&v| field.mul(v, c)).collect(), y.iter().map(|&v| field.mul(v, ci)).collect())
            }
            None => match model {
                ChartModel::Toy | ChartModel::Right => (vec![Elem::ZERO; n], random_nonzero_vec(field, k, rng)),
                ChartModel::Left => (random_nonzero_vec(field, n, rng), vec![Elem::ZERO; k]),
            },
        };
        let x1 = random_vec(field, n, rng);
        let y1 = random_vec(field, k, rng);
        ProbeCurve { chart, model, a0, x: [x0, x1], y: [y0, y1] }
    }

    /// A curve through a given point: the toy subspace of the flag (or the
    /// toy point itself) must lie in the chart, and the remaining datum
    /// `h(0)` resp. `κ(0)` is read off from the other member of the flag.
    pub fn through_flag(
        field: &Field,
        chart: Chart,
        small: &Subspace,
        big: &Subspace,
        kind: FlagKind,
        rng: &mut impl Rng,
    ) -> Result<ProbeCurve, ChartError> {
        let n = chart.n();
        let toy = match kind {
            FlagKind::Right => small,
            FlagKind::Left => big,
        };
        let a0 = chart.coords(field, toy).ok_or(ChartError::NotInChart)?;
        let k = a0.cols();
        let b0 = artin_schreier(field, &a0);
        let (x0, y0, model) = match kind {
            FlagKind::Right => {
                let v = (0..big.dim())
                    .map(|r| big.basis().row(r).to_vec())
                    .find(|v| !small.contains_vector(field, v))
                    .ok_or(ChartError::NotOnVariety)?;
                let c = Matrix::from_vec(1, v.len(), v).mul(field, &chart.frame_inv);
                let h0: Vec<Elem> = (0..k)
                    .map(|j| {
                        let corr = field.sum((0..n).map(|i| field.mul(c[(0, i)], a0[(i, j)])));
                        field.sub(c[(0, n + j)], corr)
                    })
                    .collect();
                let pivot = h0.iter().position(|e| !e.is_zero()).ok_or(ChartError::NotOnVariety)?;
                let inv = field.inv(h0[pivot]).expect("nonzero");
                let beta0: Vec<Elem> = (0..n).map(|i| field.mul(b0[(i, pivot)], inv)).collect();
                (beta0, h0, ChartModel::Right)
            }
            FlagKind::Left => {
                let ks = small.basis().mul(field, &chart.frame_inv);
                let kvecs: Vec<Vec<Elem>> = (0..ks.rows()).map(|r| ks.row(r)[..n].to_vec()).collect();
                let kspace = Subspace::from_matrix(field, Matrix::from_rows(&kvecs, n)?);
                let kappa = kspace.perp(field);
                if kappa.dim() != 1 {
                    return Err(ChartError::NotOnVariety);
                }
                let kappa0 = kappa.basis().row(0).to_vec();
                let pivot = kappa0.iter().position(|e| !e.is_zero()).expect("nonzero row");
                let inv = field.inv(kappa0[pivot]).expect("nonzero");
                let gamma0: Vec<Elem> = (0..k).map(|j| field.mul(b0[(pivot, j)], inv)).collect();
                (kappa0, gamma0, ChartModel::Left)
            }
        };
        if outer_product(field, &x0, &y0) != b0 {
            return Err(ChartError::NotOnVariety);
        }
        let x1 = random_vec(field, n, rng);
        let y1 = random_vec(field, k, rng);
        Ok(ProbeCurve { chart, model, a0, x: [x0, x1], y: [y0, y1] })
    }

    /// `B(t)` on the downstairs model.
    pub fn downstairs(&self, field: &Field, t: usize) -> SeriesMatrix {
        outer_series(field, &self.x, &self.y, t)
    }

    /// `A(t)` in chart coordinates.
    pub fn lift(&self, field: &Field, t: usize) -> Result<SeriesMatrix, ChartError> {
        hensel_lift(field, &self.downstairs(field, t), &self.a0)
    }

    /// Rows of `[I | A(t)]` in the frame.
    pub fn graph_rows(&self, field: &Field, a: &SeriesMatrix) -> SeriesMatrix {
        let n = self.chart.n();
        let t = a.truncation();
        let mut m = SeriesMatrix::zeros(n, self.chart.ambient_dim(), t);
        for i in 0..n {
            m.set(i, i, Series::constant(Elem::ONE, t));
            for j in 0..a.cols() {
                m.set(i, n + j, a.get(i, j).clone());
            }
        }
        m.mul_const(field, self.chart.frame())
    }

    /// The family of subspaces traced by the curve.
    pub fn point(&self, field: &Field, t: usize) -> Result<SeriesPoint, ChartError> {
        let a = self.lift(field, t)?;
        let rows = self.graph_rows(field, &a);
        let n = self.chart.n();
        Ok(match self.model {
            ChartModel::Toy => SeriesPoint::Toy(rows),
            ChartModel::Right => {
                // h(t) read as a vector of W
                let k = self.chart.ambient_dim() - n;
                let mut h = SeriesMatrix::zeros(1, k, t);
                for j in 0..k {
                    h.set(0, j, Series::linear(self.y[0][j], self.y[1][j], t));
                }
                let mut w_frame = Matrix::zeros(k, self.chart.ambient_dim());
                for j in 0..k {
                    for c in 0..self.chart.ambient_dim() {
                        w_frame[(j, c)] = self.chart.frame()[(n + j, c)];
                    }
                }
                let extra = h.mul_const(field, &w_frame);
                SeriesPoint::Flag { big: rows.stack(&extra), small: rows, kind: FlagKind::Right }
            }
            ChartModel::Left => {
                // kernel of κ(t), using a coordinate where κ(0) is a unit
                let kappa: Vec<Series> = (0..n).map(|i| Series::linear(self.x[0][i], self.x[1][i], t)).collect();
                let pivot = self.x[0].iter().position(|c| !c.is_zero()).ok_or(ChartError::NotOnVariety)?;
                let inv = kappa[pivot].inverse(field).expect("unit at t = 0");
                let mut k = SeriesMatrix::zeros(n.saturating_sub(1), n, t);
                for (r, j) in (0..n).filter(|&j| j != pivot).enumerate() {
                    k.set(r, j, Series::constant(Elem::ONE, t));
                    k.set(r, pivot, kappa[j].mul(field, &inv).neg(field));
                }
                SeriesPoint::Flag { small: k.mul(field, &rows), big: rows, kind: FlagKind::Left }
            }
        })
    }
}

impl SeriesPoint {
    pub fn truncation(&self) -> usize {
        match self {
            SeriesPoint::Toy(m) => m.truncation(),
            SeriesPoint::Flag { small, .. } => small.truncation(),
        }
    }

    /// Evaluation at `t = 0` as subspaces (toy: `(L, L)`).
    pub fn at_zero(&self, field: &Field) -> (Subspace, Subspace) {
        match self {
            SeriesPoint::Toy(m) => {
                let l = Subspace::from_matrix(field, m.at_zero());
                (l.clone(), l)
            }
            SeriesPoint::Flag { small, big, .. } => {
                (Subspace::from_matrix(field, small.at_zero()), Subspace::from_matrix(field, big.at_zero()))
            }
        }
    }

    /// Residuals of the defining equations, which must vanish modulo `t^T`:
    /// toy: `(k+2)`-minors of `[L; σL]`; right: `(k+2)`-minors of
    /// `[L′; σL]`; left: `(k+1)`-minors of `[σM; M′]`, for `k` the rank of
    /// the relevant member.
    pub fn defining_residuals(&self, field: &Field) -> Vec<Series> {
        match self {
            SeriesPoint::Toy(l) => l.stack(&l.frobenius(field)).minors(field, l.rows() + 2),
            SeriesPoint::Flag { small, big, kind: FlagKind::Right } => {
                big.stack(&small.frobenius(field)).minors(field, big.rows() + 1)
            }
            SeriesPoint::Flag { small, big, kind: FlagKind::Left } => {
                big.frobenius(field).stack(small).minors(field, big.rows() + 1)
            }
        }
    }

    /// Whether the family satisfies its defining equations modulo `t^T`.
    pub fn on_variety(&self, field: &Field) -> bool {
        self.defining_residuals(field).iter().all(|s| s.is_zero())
    }

    /// `σ` applied to every member.
    pub fn frobenius(&self, field: &Field) -> SeriesPoint {
        match self {
            SeriesPoint::Toy(m) => SeriesPoint::Toy(m.frobenius(field)),
            SeriesPoint::Flag { small, big, kind } => {
                SeriesPoint::Flag { small: small.frobenius(field), big: big.frobenius(field), kind: *kind }
            }
        }
    }

    /// Right `(L, L′)` to left `(σL, L′)`.
    pub fn partial_frobenius_plus(&self, field: &Field) -> Option<SeriesPoint> {
        match self {
            SeriesPoint::Flag { small, big, kind: FlagKind::Right } => {
                Some(SeriesPoint::Flag { small: small.frobenius(field), big: big.clone(), kind: FlagKind::Left })
            }
            _ => None,
        }
    }

    /// Left `(M′, M)` to right `(M′, σM)`.
    pub fn partial_frobenius_minus(&self, field: &Field) -> Option<SeriesPoint> {
        match self {
            SeriesPoint::Flag { small, big, kind: FlagKind::Left } => {
                Some(SeriesPoint::Flag { small: small.clone(), big: big.frobenius(field), kind: FlagKind::Right })
            }
            _ => None,
        }
    }
}

/// Generators of `{span(rows) ⊂ ker h}`: the pairings `row_i · h`.
pub fn eq_in_hyperplane(field: &Field, rows: &SeriesMatrix, h: &[Elem]) -> Vec<Series> {
    let col = Matrix::from_vec(h.len(), 1, h.to_vec());
    rows.mul_const(field, &col).entries().to_vec()
}

/// Generators of `{j ∈ span(rows)}`: the maximal minors of `[rows; j]`.
pub fn eq_contains_vector(field: &Field, rows: &SeriesMatrix, j: &[Elem]) -> Vec<Series> {
    let jm = SeriesMatrix::constant(&Matrix::from_vec(1, j.len(), j.to_vec()), rows.truncation());
    rows.stack(&jm).minors(field, rows.rows() + 1)
}

/// `det(L → V/W)` in the coordinates given by a basis `functionals` of `W^⊥`.
pub fn eq_schubert(field: &Field, rows: &SeriesMatrix, functionals: &Matrix) -> Series {
    rows.mul_const(field, &functionals.transpose()).determinant(field)
}

/// A dense multivariate polynomial over `F_{q^m}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Poly {
    pub vars: usize,
    pub terms: Vec<(Elem, Vec<u32>)>,
}

impl Poly {
    pub fn random(field: &Field, vars: usize, terms: usize, max_deg: u32, rng: &mut impl Rng) -> Poly {
        let terms = (0..terms)
            .map(|_| {
                let c = field.elem(rng.gen_range(1..field.size())).expect("in range");
                (c, (0..vars).map(|_| rng.gen_range(0..=max_deg)).collect())
            })
            .collect();
        Poly { vars, terms }
    }

    pub fn eval(&self, field: &Field, x: &[Series]) -> Series {
        assert_eq!(x.len(), self.vars);
        let t = x.first().map_or(1, |s| s.truncation());
        let mut acc = Series::zero(t);
        for (c, exps) in &self.terms {
            let mut term = Series::constant(*c, t);
            for (xi, &e) in x.iter().zip(exps) {
                for _ in 0..e {
                    term = term.mul(field, xi);
                }
            }
            acc = acc.add(field, &term);
        }
        acc
    }

    /// Apply a field map to every coefficient.
    pub fn map_coeffs(&self, f: impl Fn(Elem) -> Elem) -> Poly {
        Poly { vars: self.vars, terms: self.terms.iter().map(|(c, e)| (f(*c), e.clone())).collect() }
    }
}

/// Uniformly random element of `F_{q^m}`.
pub fn random_elem(field: &Field, rng: &mut impl Rng) -> Elem {
    field.elem(rng.gen_range(0..field.size())).expect("in range")
}

pub fn random_vec(field: &Field, len: usize, rng: &mut impl Rng) -> Vec<Elem> {
    (0..len).map(|_| random_elem(field, rng)).collect()
}

pub fn random_nonzero_vec(field: &Field, len: usize, rng: &mut impl Rng) -> Vec<Elem> {
    loop {
        let v = random_vec(field, len, rng);
        if v.iter().any(|c| !c.is_zero()) {
            return v;
        }
    }
}

/// `x·yᵀ`.
pub fn outer_product(field: &Field, x: &[Elem], y: &[Elem]) -> Matrix {
    Matrix::from_vec(x.len(), y.len(), x.iter().flat_map(|&a| y.iter().map(move |&b| field.mul(a, b))).collect())
}

/// `x·yᵀ` for a rank one matrix `b`, or `None` when `b = 0`.
pub fn factor_rank_one(field: &Field, b: &Matrix) -> Option<(Vec<Elem>, Vec<Elem>)> {
    let (r, c) = (0..b.rows()).flat_map(|r| (0..b.cols()).map(move |c| (r, c))).find(|&(r, c)| !b[(r, c)].is_zero())?;
    let inv = field.inv(b[(r, c)]).expect("nonzero");
    let x = b.col(c);
    let y = b.row(r).iter().map(|&v| field.mul(v, inv)).collect();
    Some((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::echelonize;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn artin_schreier_examples() {
        let f = Field::new(2, 1, 2).unwrap();
        let rational = Matrix::from_vec(2, 2, vec![Elem::ONE, Elem::ZERO, Elem::ONE, Elem::ONE]);
        assert!(artin_schreier(&f, &rational).is_zero());
        let g = Matrix::from_vec(1, 1, vec![f.generator()]);
        assert_eq!(artin_schreier(&f, &g)[(0, 0)], Elem::ONE);
    }

    #[test]
    fn rank_le1_examples() {
        let f = Field::new(3, 1, 1).unwrap();
        assert!(rank_le1(&f, &Matrix::zeros(3, 3)));
        let two = f.from_int(2);
        let u = [Elem::ONE, two, Elem::ZERO];
        let v = [two, Elem::ONE];
        let outer = outer_product(&f, &u, &v);
        assert!(rank_le1(&f, &outer));
        assert!(!rank_le1(&f, &Matrix::identity(2)));
        // agrees with elimination rank on all 2×3 matrices over F_3
        let sc: Vec<Elem> = f.elements().collect();
        for a in all_matrices(2, 3, &sc) {
            assert_eq!(rank_le1(&f, &a), a.rank(&f) <= 1);
        }
    }

    #[test]
    fn fiber_sizes_are_full_or_empty() {
        for (m, rows, cols) in [(1, 2, 2), (2, 1, 2), (2, 2, 2)] {
            let f = Field::new(2, 1, m).unwrap();
            let fibers = artin_schreier_fiber_sizes(&f, rows, cols, Budget::default()).unwrap();
            for &size in fibers.values() {
                assert_eq!(size, 2u64.pow((rows * cols) as u32));
            }
        }
    }

    #[test]
    fn chart_coordinates_round_trip() {
        let f = Field::new(2, 1, 2).unwrap();
        let w = Subspace::coordinate(3, &[1, 2]);
        let chart = Chart::standard(&f, w).unwrap();
        let sc: Vec<Elem> = f.elements().collect();
        for a in all_matrices(1, 2, &sc) {
            let l = chart.graph(&f, &a);
            assert_eq!(chart.coords(&f, &l), Some(a));
        }
        assert_eq!(chart.coords(&f, &Subspace::coordinate(3, &[2])), None);
        assert!(Chart::new(&f, Subspace::coordinate(3, &[1, 2]), Subspace::coordinate(3, &[1])).is_err());
    }

    #[test]
    fn graph_map_is_full_rank_onto_quotient() {
        let f = Field::new(3, 1, 1).unwrap();
        let chart = Chart::standard(&f, Subspace::coordinate(4, &[2, 3])).unwrap();
        let sc: Vec<Elem> = f.elements().collect();
        for a in all_matrices(2, 2, &sc).take(40) {
            let l = chart.graph(&f, &a);
            let map = crate::linalg::induced_map(&f, &l, chart.w()).unwrap();
            assert_eq!(crate::linalg::map_rank(&f, &map), 2);
        }
    }

    #[test]
    fn chart_equivalence_small_cases() {
        let f = Field::new(2, 1, 2).unwrap();
        for (ambient, n) in [(2, 1), (3, 1)] {
            for chart in all_rational_charts(&f, ambient, n, Budget::default()).unwrap() {
                let r = chart_equivalence_check(&f, &chart, Budget::default()).unwrap();
                assert!(r.counterexamples.is_empty());
                if ambient == 2 {
                    assert_eq!((r.matrices, r.toy_shtukas), (4, 4));
                } else {
                    assert_eq!(r.matrices, 16);
                }
            }
        }
    }

    #[test]
    fn transversality_examples() {
        let f = Field::new(2, 1, 1).unwrap();
        let zero = Matrix::zeros(2, 2);
        assert_eq!(transversality_check(&f, &zero, 0, 0), Ok(false));
        let mut e01 = Matrix::zeros(2, 2);
        e01[(0, 1)] = Elem::ONE;
        assert_eq!(transversality_check(&f, &e01, 0, 0), Ok(true));
        let mut e11 = Matrix::zeros(2, 2);
        e11[(1, 1)] = Elem::ONE;
        assert_eq!(transversality_check(&f, &e11, 0, 0), Ok(false));
        assert_eq!(transversality_check(&f, &Matrix::identity(2), 0, 1), Err(ChartError::NotOnVariety));
        assert_eq!(transversality_check(&f, &e01, 0, 1), Err(ChartError::EntryNonzero { row: 0, col: 1 }));
    }

    #[test]
    fn series_arithmetic() {
        let f = Field::new(3, 1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let mut c = random_vec(&f, 8, &mut rng);
            if c[0].is_zero() {
                c[0] = Elem::ONE;
            }
            let s = Series::from_coeffs(c, 8);
            let inv = s.inverse(&f).unwrap();
            assert_eq!(s.mul(&f, &inv), Series::constant(Elem::ONE, 8));
            // Frobenius is a ring map
            let u = Series::from_coeffs(random_vec(&f, 8, &mut rng), 8);
            assert_eq!(s.mul(&f, &u).frobenius(&f), s.frobenius(&f).mul(&f, &u.frobenius(&f)));
            assert_eq!(s.add(&f, &u).frobenius(&f), s.frobenius(&f).add(&f, &u.frobenius(&f)));
        }
        assert_eq!(valuation_probe(&[Series::t(6)]), Ok(Valuation::Finite(1)));
        assert_eq!(valuation_probe(&[Series::zero(6)]), Err(ChartError::TruncationTooShort { truncation: 6 }));
        assert_eq!(valuation_probe(&[Series::zero(MAX_TRUNCATION)]), Ok(Valuation::Infinite));
    }

    #[test]
    fn doubling_resolves_high_orders() {
        let f = Field::new(2, 1, 1).unwrap();
        let order = probe_with_doubling(&f, |t| {
            let mut c = vec![Elem::ZERO; t];
            if t > 10 {
                c[10] = Elem::ONE;
            }
            Ok(vec![Series::from_coeffs(c, t)])
        });
        assert_eq!(order, Ok(Valuation::Finite(10)));
        assert_eq!(probe_with_doubling(&f, |t| Ok(vec![Series::zero(t)])), Ok(Valuation::Infinite));
    }

    #[test]
    fn series_determinant_matches_constant_case() {
        let f = Field::new(2, 1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let m = Matrix::from_vec(3, 3, random_vec(&f, 9, &mut rng));
            let s = SeriesMatrix::constant(&m, 4);
            assert_eq!(s.determinant(&f), Series::constant(m.determinant(&f), 4));
        }
    }

    #[test]
    fn constant_curve_lifts_to_constant() {
        let f = Field::new(2, 1, 2).unwrap();
        let b0 = Matrix::from_vec(1, 2, vec![Elem::ONE, Elem::ZERO]);
        let a0 = artin_schreier_matrix_preimage(&f, &b0).unwrap();
        let lift = hensel_lift(&f, &SeriesMatrix::constant(&b0, 6), &a0).unwrap();
        assert_eq!(lift, SeriesMatrix::constant(&a0, 6));
        let wrong = Matrix::zeros(1, 2);
        assert_eq!(hensel_lift(&f, &SeriesMatrix::constant(&b0, 6), &wrong), Err(ChartError::FiberEmpty));
        // over F_2 the Artin–Schreier map is zero, so 1 has no preimage
        let f2 = Field::new(2, 1, 1).unwrap();
        assert_eq!(artin_schreier_matrix_preimage(&f2, &b0), Err(ChartError::FiberEmpty));
    }

    #[test]
    fn linear_right_curve_lifts_with_zero_residual() {
        let f = Field::new(2, 1, 1).unwrap();
        let chart = Chart::standard(&f, Subspace::coordinate(3, &[1, 2])).unwrap();
        let curve = ProbeCurve {
            chart,
            model: ChartModel::Right,
            a0: Matrix::zeros(1, 2),
            x: [vec![Elem::ZERO], vec![Elem::ONE]],
            y: [vec![Elem::ONE, Elem::ZERO], vec![Elem::ONE, Elem::ONE]],
        };
        let b = curve.downstairs(&f, 5);
        let a = curve.lift(&f, 5).unwrap();
        let residual = a.sub(&f, &a.frobenius(&f)).sub(&f, &b);
        assert!(residual.is_zero());
        assert!(curve.point(&f, 5).unwrap().on_variety(&f));
    }

    #[test]
    fn probes_satisfy_defining_equations() {
        let f = Field::new(2, 1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let chart = Chart::standard(&f, Subspace::coordinate(3, &[1, 2])).unwrap();
        for model in [ChartModel::Toy, ChartModel::Right, ChartModel::Left] {
            for _ in 0..20 {
                let a0 = Matrix::from_vec(1, 2, random_vec(&f, 2, &mut rng));
                let curve = ProbeCurve::through(&f, chart.clone(), model, a0.clone(), &mut rng);
                let pt = curve.point(&f, 5).unwrap();
                assert_eq!(pt.at_zero(&f).1.dim() + (model == ChartModel::Left) as usize, if model == ChartModel::Toy { 1 } else { 2 });
                assert!(pt.on_variety(&f), "{model:?}");
            }
        }
    }

    #[test]
    fn frobenius_composition_multiplies_order_by_q() {
        let f = Field::new(2, 1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let g = Poly::random(&f, 3, 3, 2, &mut rng);
            let probe: Vec<Series> = (0..3)
                .map(|_| {
                    let mut c = random_vec(&f, 2, &mut rng);
                    c[0] = Elem::ZERO;
                    Series::from_coeffs(c, 16)
                })
                .collect();
            let twisted: Vec<Series> = probe.iter().map(|s| s.frobenius(&f)).collect();
            let g_untwisted = g.map_coeffs(|c| f.frobenius_iter(c, f.m() - 1));
            let lhs = g.eval(&f, &twisted).valuation();
            let rhs = g_untwisted.eval(&f, &probe).valuation();
            match (lhs, rhs) {
                (Some(a), Some(b)) => assert_eq!(a, 2 * b),
                (None, Some(b)) => assert!(2 * b >= 16),
                (_, None) => {}
            }
        }
    }

    #[test]
    fn coordinate_equation_along_identity_probe() {
        let f = Field::new(3, 1, 1).unwrap();
        let s = Series::t(8);
        assert_eq!(valuation_probe(&[s]), Ok(Valuation::Finite(1)));
        let rows = SeriesMatrix::linear(
            &echelonize(&f, &[vec![Elem::ONE, Elem::ZERO, Elem::ZERO]], 3).unwrap().basis().clone(),
            &Matrix::from_vec(1, 3, vec![Elem::ZERO, Elem::ONE, Elem::ZERO]),
            8,
        );
        // the line span(e0 + t e1) leaves ker(e1*) to first order
        let h = [Elem::ZERO, Elem::ONE, Elem::ZERO];
        assert_eq!(valuation_probe(&eq_in_hyperplane(&f, &rows, &h)), Ok(Valuation::Finite(1)));
    }

    #[test]
    fn rank_one_factorization() {
        let f = Field::new(3, 1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let x = random_nonzero_vec(&f, 2, &mut rng);
            let y = random_nonzero_vec(&f, 3, &mut rng);
            let b = outer_product(&f, &x, &y);
            let (u, v) = factor_rank_one(&f, &b).unwrap();
            let back = outer_product(&f, &u, &v);
            assert_eq!(back, b);
        }
        assert!(factor_rank_one(&f, &Matrix::zeros(2, 2)).is_none());
    }
}
