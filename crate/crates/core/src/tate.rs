//! A finite truncation of a Tate space: a coordinate space `T = F_q^D`
//! whose subspaces carry the dimension theory `n(Λ) = dim Λ + c`, together
//! with exact Fourier analysis on `Z[1/p]`-valued functions, ε-extensions,
//! the finite Radon transform and the divisor pairs of the canonical Picard
//! subgroup.
//!
//! Functions are stored on every vector, including zero; the value at zero
//! is the extra slot needed to talk about `f(0)` and the Fourier transform at
//! `ω = 0`. Divisor pairs only see the restriction to nonzero vectors.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::divisors::{Incidence, PartialFrobenius};
use crate::gf::{Elem, Field};
use crate::linalg::{LinalgError, Matrix, ProjectiveSpace, Subspace};
use crate::padic::PAdicRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TateError {
    #[error("Tate models live over a prime-power field with m = 1 (got m = {0})")]
    ExtendedScalars(u32),
    #[error("function is not invariant under F_q^× scaling")]
    NotInvariant,
    #[error("inner lattice is not contained in the outer one")]
    LatticeNotNested,
    #[error("values sum to {0}, not zero")]
    SumNotZero(PAdicRational),
    #[error("pair not admissible: n(inner) = {inner} must be ≤ -2 and n(outer) = {outer} ≥ 2")]
    NotAdmissible { inner: i64, outer: i64 },
    #[error("lattice has index {got}, expected {expected}")]
    WrongIndex { expected: i64, got: i64 },
    #[error("lattices do not form a chain of indices -1, 0, 1")]
    WrongChain,
    #[error("function lives on the {got:?} side, expected {expected:?}")]
    SideMismatch { expected: Side, got: Side },
    #[error("expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// The space `T`.
    Primal,
    /// The dual space `T*`, paired with `T` by the dot product.
    Dual,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Primal => Side::Dual,
            Side::Dual => Side::Primal,
        }
    }
}

/// A `Z[1/p]`-valued function on `T` or `T*`, indexed by vector index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TateFn {
    pub side: Side,
    pub values: Vec<PAdicRational>,
}

impl TateFn {
    pub fn at(&self, idx: usize) -> PAdicRational {
        self.values[idx]
    }

    /// `f(0)`.
    pub fn at_zero(&self) -> PAdicRational {
        self.values[0]
    }

    pub fn add(&self, o: &TateFn) -> TateFn {
        assert_eq!(self.side, o.side);
        TateFn { side: self.side, values: self.values.iter().zip(&o.values).map(|(&a, &b)| a + b).collect() }
    }

    pub fn sub(&self, o: &TateFn) -> TateFn {
        self.add(&o.scale(PAdicRational::from_int(-1, o.prime())))
    }

    pub fn scale(&self, k: PAdicRational) -> TateFn {
        TateFn { side: self.side, values: self.values.iter().map(|&a| a * k).collect() }
    }

    /// The same function with `f(0)` set to zero.
    pub fn punctured(&self) -> TateFn {
        let mut out = self.clone();
        out.values[0] = PAdicRational::zero(self.prime());
        out
    }

    /// Equality away from the zero vector.
    pub fn eq_punctured(&self, o: &TateFn) -> bool {
        self.side == o.side && self.values[1..] == o.values[1..]
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.values.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(i, _)| i)
    }

    fn prime(&self) -> u32 {
        self.values[0].prime()
    }
}

/// A Tate toy horospherical divisor: `f1` on `T*`, `f2` on `T`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TatePair {
    pub f1: TateFn,
    pub f2: TateFn,
}

impl TatePair {
    pub fn add(&self, o: &TatePair) -> TatePair {
        TatePair { f1: self.f1.add(&o.f1), f2: self.f2.add(&o.f2) }
    }

    pub fn sub(&self, o: &TatePair) -> TatePair {
        TatePair { f1: self.f1.sub(&o.f1), f2: self.f2.sub(&o.f2) }
    }

    pub fn scale(&self, k: PAdicRational) -> TatePair {
        TatePair { f1: self.f1.scale(k), f2: self.f2.scale(k) }
    }

    pub fn neg(&self) -> TatePair {
        self.scale(PAdicRational::from_int(-1, self.f1.prime()))
    }
}

/// `T = F_q^D` with `n(Λ) = dim Λ + offset`; the dual uses `−offset − D`.
#[derive(Clone, Debug)]
pub struct FiniteTateModel {
    field: Field,
    dim: usize,
    offset: i64,
    vectors: Vec<Vec<Elem>>,
    lines: ProjectiveSpace,
    /// Index of the normalized representative of each vector's line.
    line_of: Vec<Option<usize>>,
}

impl FiniteTateModel {
    pub fn new(field: &Field, dim: usize, offset: i64) -> Result<FiniteTateModel, TateError> {
        if field.m() != 1 {
            return Err(TateError::ExtendedScalars(field.m()));
        }
        let q = field.q() as usize;
        let count = q.pow(dim as u32);
        let vectors: Vec<Vec<Elem>> = (0..count)
            .map(|mut i| {
                let mut v = vec![Elem::ZERO; dim];
                for slot in v.iter_mut().rev() {
                    *slot = field.elem((i % q) as u32).expect("digit below q");
                    i /= q;
                }
                v
            })
            .collect();
        let lines = ProjectiveSpace::new(field, dim);
        let line_of = vectors.iter().map(|v| lines.index_of(field, v)).collect();
        Ok(FiniteTateModel { field: field.clone(), dim, offset, vectors, lines, line_of })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// Offset of the dimension theory on the given side.
    pub fn side_offset(&self, side: Side) -> i64 {
        match side {
            Side::Primal => self.offset,
            Side::Dual => -self.offset - self.dim as i64,
        }
    }

    /// The model of `T*`, whose own dual is this model again.
    pub fn dual(&self) -> FiniteTateModel {
        FiniteTateModel { offset: self.side_offset(Side::Dual), ..self.clone() }
    }

    /// `n(Λ)` for a subspace on the given side.
    pub fn index(&self, side: Side, l: &Subspace) -> i64 {
        l.dim() as i64 + self.side_offset(side)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, idx: usize) -> &[Elem] {
        &self.vectors[idx]
    }

    pub fn vector_index(&self, v: &[Elem]) -> usize {
        let q = self.field.q() as usize;
        v.iter().fold(0, |acc, e| acc * q + e.index() as usize)
    }

    /// The line of a nonzero vector, as an index into [`Self::lines`].
    pub fn line_of(&self, idx: usize) -> Option<usize> {
        self.line_of[idx]
    }

    pub fn lines(&self) -> &ProjectiveSpace {
        &self.lines
    }

    fn q(&self) -> PAdicRational {
        PAdicRational::q_power(self.field.e(), 1, self.field.p())
    }

    fn zero_value(&self) -> PAdicRational {
        PAdicRational::zero(self.field.p())
    }

    fn one(&self) -> PAdicRational {
        PAdicRational::one(self.field.p())
    }

    /// Mass of a single point on the given side.
    pub fn point_mass(&self, side: Side) -> PAdicRational {
        PAdicRational::q_power(self.field.e(), self.side_offset(side) as i32, self.field.p())
    }

    pub fn zero_fn(&self, side: Side) -> TateFn {
        TateFn { side, values: vec![self.zero_value(); self.len()] }
    }

    pub fn from_fn(&self, side: Side, f: impl Fn(&[Elem]) -> PAdicRational) -> TateFn {
        TateFn { side, values: self.vectors.iter().map(|v| f(v)).collect() }
    }

    pub fn indicator(&self, side: Side, l: &Subspace) -> TateFn {
        let one = self.one();
        let zero = self.zero_value();
        self.from_fn(side, |v| if l.contains_vector(&self.field, v) { one } else { zero })
    }

    /// `𝟙_{outer − inner}`.
    pub fn indicator_difference(&self, side: Side, outer: &Subspace, inner: &Subspace) -> TateFn {
        let one = self.one();
        let zero = self.zero_value();
        self.from_fn(side, |v| {
            if outer.contains_vector(&self.field, v) && !inner.contains_vector(&self.field, v) {
                one
            } else {
                zero
            }
        })
    }

    fn check_len(&self, f: &TateFn) -> Result<(), TateError> {
        if f.values.len() != self.len() {
            return Err(TateError::DimensionMismatch { expected: self.len(), got: f.values.len() });
        }
        Ok(())
    }

    fn check_side(&self, f: &TateFn, side: Side) -> Result<(), TateError> {
        self.check_len(f)?;
        if f.side != side {
            return Err(TateError::SideMismatch { expected: side, got: f.side });
        }
        Ok(())
    }

    /// `f(cv) = f(v)` for every `c ∈ F_q^×`.
    pub fn is_invariant(&self, f: &TateFn) -> bool {
        let units: Vec<Elem> = self.field.elements().filter(|e| !e.is_zero()).collect();
        (1..self.len()).all(|i| {
            let v = &self.vectors[i];
            units.iter().all(|&c| {
                let cv: Vec<Elem> = v.iter().map(|&x| self.field.mul(c, x)).collect();
                f.values[self.vector_index(&cv)] == f.values[i]
            })
        })
    }

    /// `∫ f = q^c Σ_v f(v)`.
    pub fn integrate(&self, f: &TateFn) -> PAdicRational {
        self.point_mass(f.side) * f.values.iter().fold(self.zero_value(), |a, &b| a + b)
    }

    /// `Four(f)(ω) = ∫ f(v) ψ(ω(v)) dv` for invariant `f`, via orbit sums:
    /// `Σ_{c ∈ F_q^×} ψ(ct)` is `q − 1` at `t = 0` and `−1` otherwise, so each
    /// line off `ker ω` contributes `−f` once.
    pub fn fourier(&self, f: &TateFn) -> Result<TateFn, TateError> {
        self.check_len(f)?;
        if !self.is_invariant(f) {
            return Err(TateError::NotInvariant);
        }
        let mass = self.point_mass(f.side);
        let reps: Vec<usize> =
            (1..self.len()).filter(|&i| self.lines.point(self.line_of[i].expect("nonzero")) == self.vectors[i].as_slice()).collect();
        let values = self
            .vectors
            .iter()
            .map(|w| {
                let mut acc = f.values[0];
                for &i in &reps {
                    let v = &self.vectors[i];
                    if self.field.dot(w, v).is_zero() {
                        acc += f.values[i] * PAdicRational::from_int(self.field.q() as i64 - 1, self.field.p());
                    } else {
                        acc -= f.values[i];
                    }
                }
                mass * acc
            })
            .collect();
        Ok(TateFn { side: f.side.opposite(), values })
    }

    /// Fourier on the other side brings `f` back to `v ↦ f(−v)`, which is `f`
    /// itself for invariant functions.
    pub fn fourier_inverse_check(&self, f: &TateFn) -> Result<bool, TateError> {
        Ok(self.fourier(&self.fourier(f)?)? == *f)
    }

    /// A random invariant function, constant on lines, with values drawn from
    /// `-range..=range` scaled by `q^k` for `k ∈ -2..=0`.
    pub fn random_invariant(&self, side: Side, range: i64, rng: &mut impl Rng) -> TateFn {
        let p = self.field.p();
        let draw = |rng: &mut dyn rand::RngCore| {
            let n = rng.gen_range(-range..=range);
            let k = rng.gen_range(-2..=0);
            PAdicRational::from_int(n, p) * PAdicRational::q_power(self.field.e(), k, p)
        };
        let at_zero = draw(rng);
        let per_line: Vec<PAdicRational> = (0..self.lines.len()).map(|_| draw(rng)).collect();
        TateFn {
            side,
            values: (0..self.len()).map(|i| self.line_of[i].map_or(at_zero, |l| per_line[l])).collect(),
        }
    }

    pub fn quotient(&self, side: Side, inner: &Subspace, outer: &Subspace) -> Result<Quotient, TateError> {
        Quotient::new(self, side, inner, outer)
    }

    /// `g` on `P(Λ″/Λ′)` pulled back to `Λ″ − Λ′` and extended by zero.
    pub fn eps_extend(&self, quot: &Quotient, g: &[PAdicRational]) -> Result<TateFn, TateError> {
        if g.len() != quot.incidence.len() {
            return Err(TateError::DimensionMismatch { expected: quot.incidence.len(), got: g.len() });
        }
        let zero = self.zero_value();
        Ok(self.from_fn(quot.side, |v| quot.primal_line(self, v).map_or(zero, |j| g[j])))
    }

    /// `h` on `P((Λ″/Λ′)*)` pulled back to `Λ′^⊥ − Λ″^⊥ ⊂ T*`.
    pub fn eps_extend_dual(&self, quot: &Quotient, h: &[PAdicRational]) -> Result<TateFn, TateError> {
        if h.len() != quot.incidence.len() {
            return Err(TateError::DimensionMismatch { expected: quot.incidence.len(), got: h.len() });
        }
        let zero = self.zero_value();
        Ok(self.from_fn(quot.side.opposite(), |w| quot.dual_line(self, w).map_or(zero, |j| h[j])))
    }

    /// `R(g)(H) = q^{n(Λ′)+1} Σ_{J ⊂ H} g(J)` on an admissible pair.
    pub fn radon_finite(&self, quot: &Quotient, g: &[PAdicRational]) -> Result<Vec<PAdicRational>, TateError> {
        quot.check_admissible()?;
        let inc = &quot.incidence;
        if g.len() != inc.len() {
            return Err(TateError::DimensionMismatch { expected: inc.len(), got: g.len() });
        }
        let s = g.iter().fold(self.zero_value(), |a, &b| a + b);
        if !s.is_zero() {
            return Err(TateError::SumNotZero(s));
        }
        let scale = PAdicRational::q_power(self.field.e(), (quot.inner_index + 1) as i32, self.field.p());
        Ok((0..inc.len()).map(|h| scale * inc.lines_in(h).iter().fold(self.zero_value(), |a, &j| a + g[j])).collect())
    }

    /// `Four ∘ ε = ε* ∘ R` on `trials` random zero-sum functions.
    pub fn radon_fourier_check(
        &self,
        quot: &Quotient,
        trials: usize,
        rng: &mut impl Rng,
    ) -> Result<RadonFourierReport, TateError> {
        quot.check_admissible()?;
        let mut report = RadonFourierReport { trials: 0, failures: Vec::new() };
        for _ in 0..trials {
            let g = random_zero_sum(self.field.p(), quot.incidence.len(), 5, rng);
            let lhs = self.fourier(&self.eps_extend(quot, &g)?)?;
            let rhs = self.eps_extend_dual(quot, &self.radon_finite(quot, &g)?)?;
            report.trials += 1;
            if lhs != rhs {
                report.failures.push(g);
            }
        }
        Ok(report)
    }

    /// `f2` vanishes at zero with zero integral and `f1 = Four(f2)` away from
    /// zero. Only the restrictions to nonzero vectors matter.
    pub fn is_principal(&self, pair: &TatePair) -> Result<bool, TateError> {
        self.check_side(&pair.f1, Side::Dual)?;
        self.check_side(&pair.f2, Side::Primal)?;
        if !self.is_invariant(&pair.f1) {
            return Err(TateError::NotInvariant);
        }
        let f2 = pair.f2.punctured();
        let four = self.fourier(&f2)?;
        Ok(self.integrate(&f2).is_zero() && four.at_zero().is_zero() && four.eq_punctured(&pair.f1))
    }

    /// `f1 = Four(f2)` including the values at zero.
    pub fn in_canonical_preimage(&self, pair: &TatePair) -> Result<bool, TateError> {
        self.check_side(&pair.f1, Side::Dual)?;
        self.check_side(&pair.f2, Side::Primal)?;
        Ok(self.fourier(&pair.f2)? == pair.f1)
    }

    /// `(𝟙_{W^⊥}, 𝟙_W)`, for `n(W) = 0`; as a divisor this is the Schubert
    /// divisor of `W`.
    pub fn schubert_pair(&self, w: &Subspace) -> Result<TatePair, TateError> {
        let n = self.index(Side::Primal, w);
        if n != 0 {
            return Err(TateError::WrongIndex { expected: 0, got: n });
        }
        Ok(TatePair { f1: self.indicator(Side::Dual, &w.perp(&self.field)), f2: self.indicator(Side::Primal, w) })
    }

    /// Validates `W₋₁ ⊂ W₀ ⊂ W₁` with indices `-1, 0, 1`.
    pub fn chain(&self, lattices: [Subspace; 3]) -> Result<Chain, TateError> {
        for (i, w) in lattices.iter().enumerate() {
            if w.ambient_dim() != self.dim || self.index(Side::Primal, w) != i as i64 - 1 {
                return Err(TateError::WrongChain);
            }
        }
        if !lattices[1].contains(&self.field, &lattices[0])? || !lattices[2].contains(&self.field, &lattices[1])? {
            return Err(TateError::WrongChain);
        }
        Ok(Chain { lattices })
    }

    /// The divisor pairs of `ℓ_a`, `ℓ_b` and `ℓ_det`.
    pub fn line_bundle_pairs(&self, chain: &Chain) -> LineBundlePairs {
        let f = &self.field;
        let [wm, w0, w1] = &chain.lattices;
        let q = self.q();
        let ell_a = TatePair {
            f1: self
                .indicator(Side::Dual, &w1.perp(f))
                .scale(q)
                .sub(&self.indicator(Side::Dual, &w0.perp(f))),
            f2: self.indicator_difference(Side::Primal, w1, w0),
        };
        let ell_b = TatePair {
            f1: self.indicator_difference(Side::Dual, &wm.perp(f), &w0.perp(f)).scale(-self.one()),
            f2: self
                .indicator(Side::Primal, wm)
                .scale(-q)
                .add(&self.indicator(Side::Primal, w0)),
        };
        let ell_det = self.schubert_pair(w0).expect("chain fixes n(W₀) = 0").neg();
        LineBundlePairs { ell_a, ell_b, ell_det }
    }

    /// `ℓ_b − ℓ_a − (q−1)ℓ_det` is principal.
    pub fn picard_relation_check(&self, chain: &Chain) -> Result<bool, TateError> {
        let lb = self.line_bundle_pairs(chain);
        let qm1 = self.q() - self.one();
        self.is_principal(&lb.ell_b.sub(&lb.ell_a).sub(&lb.ell_det.scale(qm1)))
    }

    /// `(q−1)(Four f, f) − a(f)ℓ_a + b(f)ℓ_b` is principal, with `a(f) = ∫f`
    /// and `b(f) = f(0)`.
    pub fn gamma_identity_check(&self, f: &TateFn, chain: &Chain) -> Result<bool, TateError> {
        self.check_side(f, Side::Primal)?;
        let lb = self.line_bundle_pairs(chain);
        let qm1 = self.q() - self.one();
        let gamma = TatePair { f1: self.fourier(f)?, f2: f.clone() };
        let combo = gamma.scale(qm1).sub(&lb.ell_a.scale(self.integrate(f))).add(&lb.ell_b.scale(f.at_zero()));
        self.is_principal(&combo)
    }

    /// `F⁻: (λ₁, λ₂) ↦ (qλ₁, λ₂)`, `F⁺: (λ₁, λ₂) ↦ (λ₁, qλ₂)`.
    pub fn partial_frobenius_pullback(&self, pair: &TatePair, direction: PartialFrobenius) -> TatePair {
        match direction {
            PartialFrobenius::Minus => TatePair { f1: pair.f1.scale(self.q()), f2: pair.f2.clone() },
            PartialFrobenius::Plus => TatePair { f1: pair.f1.clone(), f2: pair.f2.scale(self.q()) },
        }
    }

    /// The generators `(𝟙_{W₀^⊥}, 𝟙_{W₀})`, `ℓ_a` and `ℓ_b` all satisfy
    /// `f1 = Four(f2)`.
    pub fn canonical_preimage_check(&self, chain: &Chain) -> Result<bool, TateError> {
        let lb = self.line_bundle_pairs(chain);
        for g in [lb.ell_det.neg(), lb.ell_a, lb.ell_b] {
            if !self.in_canonical_preimage(&g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Uniform values in `-range..=range` with the first entry adjusted to make
/// the total zero.
pub fn random_zero_sum(p: u32, len: usize, range: i64, rng: &mut impl Rng) -> Vec<PAdicRational> {
    let mut g: Vec<PAdicRational> = (0..len).map(|_| PAdicRational::from_int(rng.gen_range(-range..=range), p)).collect();
    if let Some((first, rest)) = g.split_first_mut() {
        *first = -rest.iter().fold(PAdicRational::zero(p), |a, &b| a + b);
    }
    g
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadonFourierReport {
    pub trials: u64,
    pub failures: Vec<Vec<PAdicRational>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    lattices: [Subspace; 3],
}

impl Chain {
    pub fn lattices(&self) -> &[Subspace; 3] {
        &self.lattices
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineBundlePairs {
    pub ell_a: TatePair,
    pub ell_b: TatePair,
    pub ell_det: TatePair,
}

/// `Λ″/Λ′` with a complement frame: quotient coordinates of `v ∈ Λ″` are its
/// coefficients on the complement, and a functional `ω ∈ Λ′^⊥` acts on the
/// quotient through its values on the complement.
#[derive(Clone, Debug)]
pub struct Quotient {
    side: Side,
    inner: Subspace,
    outer: Subspace,
    complement: Matrix,
    /// Inverse of `[complement; inner basis; filler]`.
    frame_inv: Matrix,
    incidence: Incidence,
    inner_index: i64,
    outer_index: i64,
}

impl Quotient {
    fn new(model: &FiniteTateModel, side: Side, inner: &Subspace, outer: &Subspace) -> Result<Quotient, TateError> {
        let f = &model.field;
        if !outer.contains(f, inner)? {
            return Err(TateError::LatticeNotNested);
        }
        let dim = model.dim;
        let mut rows: Vec<Vec<Elem>> = Vec::new();
        let mut span = inner.clone();
        for v in outer.basis().row_vecs().into_iter().chain((0..dim).map(|i| {
            let mut e = vec![Elem::ZERO; dim];
            e[i] = Elem::ONE;
            e
        })) {
            if !span.contains_vector(f, &v) {
                span = span.sum(f, &Subspace::from_matrix(f, Matrix::from_rows(std::slice::from_ref(&v), dim)?))?;
                rows.push(v);
            }
        }
        let d = outer.dim() - inner.dim();
        let complement = Matrix::from_rows(&rows[..d], dim)?;
        let mut frame_rows = rows[..d].to_vec();
        frame_rows.extend(inner.basis().row_vecs());
        frame_rows.extend(rows[d..].iter().cloned());
        let frame_inv = Matrix::from_rows(&frame_rows, dim)?.inverse(f)?;
        Ok(Quotient {
            side,
            inner: inner.clone(),
            outer: outer.clone(),
            complement,
            frame_inv,
            incidence: Incidence::new(f, d),
            inner_index: model.index(side, inner),
            outer_index: model.index(side, outer),
        })
    }

    pub fn dim(&self) -> usize {
        self.complement.rows()
    }

    pub fn incidence(&self) -> &Incidence {
        &self.incidence
    }

    pub fn inner_index(&self) -> i64 {
        self.inner_index
    }

    pub fn outer_index(&self) -> i64 {
        self.outer_index
    }

    /// `n(Λ′) ≤ −2` and `n(Λ″) ≥ 2`.
    pub fn is_admissible(&self) -> bool {
        self.inner_index <= -2 && self.outer_index >= 2
    }

    fn check_admissible(&self) -> Result<(), TateError> {
        if !self.is_admissible() {
            return Err(TateError::NotAdmissible { inner: self.inner_index, outer: self.outer_index });
        }
        Ok(())
    }

    /// Line of `P(Λ″/Λ′)` through the image of `v`, if `v ∈ Λ″ − Λ′`.
    fn primal_line(&self, model: &FiniteTateModel, v: &[Elem]) -> Option<usize> {
        let f = &model.field;
        if !self.outer.contains_vector(f, v) || self.inner.contains_vector(f, v) {
            return None;
        }
        let coords = Matrix::from_vec(1, v.len(), v.to_vec()).mul(f, &self.frame_inv);
        let x: Vec<Elem> = (0..self.dim()).map(|i| coords[(0, i)]).collect();
        self.incidence.projective_space().index_of(f, &x)
    }

    /// Line of `P((Λ″/Λ′)*)` through `ω|_{Λ″}`, if `ω ∈ Λ′^⊥ − Λ″^⊥`.
    fn dual_line(&self, model: &FiniteTateModel, w: &[Elem]) -> Option<usize> {
        let f = &model.field;
        let kills = |s: &Subspace| s.basis().row_vecs().iter().all(|r| f.dot(r, w).is_zero());
        if !kills(&self.inner) || kills(&self.outer) {
            return None;
        }
        let x: Vec<Elem> = self.complement.row_vecs().iter().map(|c| f.dot(c, w)).collect();
        self.incidence.projective_space().index_of(f, &x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisors::radon_forward;
    use crate::linalg::echelonize;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(q: u32, dim: usize, offset: i64) -> FiniteTateModel {
        FiniteTateModel::new(&Field::new(q, 1, 1).unwrap(), dim, offset).unwrap()
    }

    fn coord(dim: usize, k: usize) -> Subspace {
        Subspace::coordinate(dim, &(0..k).collect::<Vec<_>>())
    }

    fn random_subspace(m: &FiniteTateModel, k: usize, rng: &mut ChaCha8Rng) -> Subspace {
        loop {
            let rows: Vec<Vec<Elem>> = (0..k)
                .map(|_| (0..m.dim()).map(|_| m.field().elem(rng.gen_range(0..m.field().q())).unwrap()).collect())
                .collect();
            let s = echelonize(m.field(), &rows, m.dim()).unwrap();
            if s.dim() == k {
                return s;
            }
        }
    }

    /// `∫ f(v) ζ^{ω(v)} dv` in `Z[1/p][ζ_p]`, collapsed to a rational number;
    /// only valid for prime `q`.
    fn character_fourier(m: &FiniteTateModel, f: &TateFn) -> TateFn {
        let p = m.field().p();
        let values = (0..m.len())
            .map(|w| {
                let mut coeffs = vec![PAdicRational::zero(p); p as usize];
                for v in 0..m.len() {
                    let t = m.field().dot(m.vector(w), m.vector(v)).index() as usize;
                    coeffs[t] += f.values[v];
                }
                assert!(coeffs[1..].iter().all(|&c| c == coeffs[1]), "value not rational");
                m.point_mass(f.side) * (coeffs[0] - coeffs[1])
            })
            .collect();
        TateFn { side: f.side.opposite(), values }
    }

    fn chain_in(m: &FiniteTateModel) -> Chain {
        let k = (-m.offset()) as usize;
        m.chain([coord(m.dim(), k - 1), coord(m.dim(), k), coord(m.dim(), k + 1)]).unwrap()
    }

    #[test]
    fn integrate_examples() {
        let m = model(2, 2, -1);
        let punctured = m.indicator_difference(Side::Primal, &Subspace::full(2), &Subspace::zero(2));
        assert_eq!(m.integrate(&punctured), PAdicRational::new(3, 1, 2));
        let m = model(3, 3, -2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 0..=3 {
            let l = random_subspace(&m, k, &mut rng);
            let expected = PAdicRational::q_power(1, m.index(Side::Primal, &l) as i32, 3);
            assert_eq!(m.integrate(&m.indicator(Side::Primal, &l)), expected);
        }
    }

    #[test]
    fn dimension_theory_and_duality() {
        let m = model(2, 5, -2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let a = random_subspace(&m, rng.gen_range(0..=5), &mut rng);
            let b = random_subspace(&m, rng.gen_range(0..=5), &mut rng);
            let (na, nb) = (m.index(Side::Primal, &a), m.index(Side::Primal, &b));
            assert_eq!(nb - na, b.dim() as i64 - a.dim() as i64);
            assert_eq!(m.index(Side::Dual, &a.perp(m.field())), -na);
        }
        assert_eq!(m.dual().dual().offset(), m.offset());
    }

    #[test]
    fn fourier_of_lattice_indicator() {
        for (q, dim, offset) in [(2, 4, -2), (3, 3, -1), (4, 2, -1)] {
            let m = FiniteTateModel::new(&Field::new(if q == 4 { 2 } else { q }, if q == 4 { 2 } else { 1 }, 1).unwrap(), dim, offset).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(q as u64);
            for k in 0..=dim {
                let l = random_subspace(&m, k, &mut rng);
                let lhs = m.fourier(&m.indicator(Side::Primal, &l)).unwrap();
                let scale = PAdicRational::q_power(m.field().e(), m.index(Side::Primal, &l) as i32, m.field().p());
                let rhs = m.indicator(Side::Dual, &l.perp(m.field())).scale(scale);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn fourier_matches_character_sums() {
        for (q, dim, offset) in [(2, 4, -1), (3, 3, -2), (5, 2, 0)] {
            let m = model(q, dim, offset);
            let mut rng = ChaCha8Rng::seed_from_u64(10 + q as u64);
            for side in [Side::Primal, Side::Dual] {
                for _ in 0..10 {
                    let f = m.random_invariant(side, 9, &mut rng);
                    assert_eq!(m.fourier(&f).unwrap(), character_fourier(&m, &f));
                }
            }
        }
    }

    #[test]
    fn fourier_rejects_non_invariant() {
        let m = model(3, 2, 0);
        let mut f = m.zero_fn(Side::Primal);
        f.values[1] = PAdicRational::one(3);
        assert_eq!(m.fourier(&f), Err(TateError::NotInvariant));
        assert!(!m.is_invariant(&f));
    }

    #[test]
    fn double_fourier_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (q, dim, offset) in [(2, 5, -3), (3, 4, -1)] {
            let m = model(q, dim, offset);
            for _ in 0..100 {
                let f = m.random_invariant(Side::Primal, 5, &mut rng);
                assert!(m.fourier_inverse_check(&f).unwrap());
            }
            let mut delta = m.zero_fn(Side::Primal);
            for i in 1..m.len() {
                if m.line_of(i) == Some(0) {
                    delta.values[i] = PAdicRational::one(q);
                }
            }
            assert!(m.fourier_inverse_check(&delta).unwrap());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn fourier_is_linear(seed in any::<u64>(), a in -5i64..5, b in -5i64..5) {
            let m = model(3, 3, -1);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = m.random_invariant(Side::Primal, 4, &mut rng);
            let g = m.random_invariant(Side::Primal, 4, &mut rng);
            let (a, b) = (PAdicRational::from_int(a, 3), PAdicRational::from_int(b, 3));
            let lhs = m.fourier(&f.scale(a).add(&g.scale(b))).unwrap();
            let rhs = m.fourier(&f).unwrap().scale(a).add(&m.fourier(&g).unwrap().scale(b));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn principal_pairs_form_a_module(seed in any::<u64>(), a in -5i64..5, b in -5i64..5) {
            let m = model(3, 3, -1);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_principal(&m, &mut rng);
            let y = random_principal(&m, &mut rng);
            prop_assert!(m.is_principal(&x).unwrap());
            let (a, b) = (PAdicRational::from_int(a, 3), PAdicRational::from_int(b, 3));
            prop_assert!(m.is_principal(&x.scale(a).add(&y.scale(b))).unwrap());
            let schubert = m.schubert_pair(&coord(3, 1)).unwrap();
            prop_assert!(!m.is_principal(&x.add(&schubert)).unwrap());
        }
    }

    /// `(Four g, g)` for `g` invariant, vanishing at zero, with zero integral.
    fn random_principal(m: &FiniteTateModel, rng: &mut ChaCha8Rng) -> TatePair {
        let quot = m.quotient(Side::Primal, &Subspace::zero(m.dim()), &Subspace::full(m.dim())).unwrap();
        let g = random_zero_sum(m.field().p(), quot.incidence().len(), 6, rng);
        let f2 = m.eps_extend(&quot, &g).unwrap();
        TatePair { f1: m.fourier(&f2).unwrap(), f2 }
    }

    #[test]
    fn fourier_pair_facts() {
        for q in [2, 3] {
            let m = model(q, 4, -2);
            let ch = chain_in(&m);
            let [wm, w0, w1] = ch.lattices().clone();
            let f = m.field();
            let qq = PAdicRational::from_int(q as i64, q);
            let a = m.fourier(&m.indicator_difference(Side::Primal, &w1, &w0)).unwrap();
            let a_expected = m.indicator(Side::Dual, &w1.perp(f)).scale(qq).sub(&m.indicator(Side::Dual, &w0.perp(f)));
            assert_eq!(a, a_expected);
            let b_src = m.indicator(Side::Primal, &wm).scale(-qq).add(&m.indicator(Side::Primal, &w0));
            let b = m.fourier(&b_src).unwrap();
            let b_expected = m.indicator_difference(Side::Dual, &wm.perp(f), &w0.perp(f)).scale(PAdicRational::from_int(-1, q));
            assert_eq!(b, b_expected);
            let one = PAdicRational::from_int(q as i64 - 1, q);
            assert_eq!(m.integrate(&m.indicator_difference(Side::Primal, &w1, &w0)), one);
            assert!(m.indicator_difference(Side::Primal, &w1, &w0).at_zero().is_zero());
            assert!(m.integrate(&b_src).is_zero());
            assert_eq!(b_src.at_zero(), -one);
        }
    }

    /// `T = F_q^D` with `Λ′` a line and `Λ″ = T`, offsets chosen so the pair
    /// is admissible.
    fn admissible(q: u32, dim: usize) -> (FiniteTateModel, Quotient) {
        let m = model(q, dim, -3);
        let quot = m.quotient(Side::Primal, &coord(dim, 1), &Subspace::full(dim)).unwrap();
        assert!(quot.is_admissible());
        (m, quot)
    }

    #[test]
    fn eps_extend_examples() {
        let m = model(3, 4, -1);
        let inner = coord(4, 1);
        let outer = coord(4, 3);
        let quot = m.quotient(Side::Primal, &inner, &outer).unwrap();
        let len = quot.incidence().len();
        let zero = vec![PAdicRational::zero(3); len];
        assert_eq!(m.eps_extend(&quot, &zero).unwrap(), m.zero_fn(Side::Primal));
        let ones = vec![PAdicRational::one(3); len];
        assert_eq!(m.eps_extend(&quot, &ones).unwrap(), m.indicator_difference(Side::Primal, &outer, &inner));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = random_zero_sum(3, len, 4, &mut rng);
        let f = m.eps_extend(&quot, &g).unwrap();
        assert!(m.is_invariant(&f));
        for i in f.support() {
            assert!(outer.contains_vector(m.field(), m.vector(i)) && !inner.contains_vector(m.field(), m.vector(i)));
        }
        let h = m.eps_extend_dual(&quot, &g).unwrap();
        for i in h.support() {
            let w = m.vector(i);
            assert!(inner.perp(m.field()).contains_vector(m.field(), w));
            assert!(!outer.perp(m.field()).contains_vector(m.field(), w));
        }
        assert_eq!(m.quotient(Side::Primal, &outer, &inner).unwrap_err(), TateError::LatticeNotNested);
    }

    #[test]
    fn radon_finite_delta_difference() {
        let (m, quot) = admissible(2, 5);
        let inc = quot.incidence();
        let mut g = vec![PAdicRational::zero(2); inc.len()];
        g[0] = PAdicRational::one(2);
        g[1] = PAdicRational::from_int(-1, 2);
        let r = m.radon_finite(&quot, &g).unwrap();
        let half = PAdicRational::new(1, 1, 2);
        for h in 0..inc.len() {
            let expected = match (inc.lines_in(h).contains(&0), inc.lines_in(h).contains(&1)) {
                (true, false) => half,
                (false, true) => -half,
                _ => PAdicRational::zero(2),
            };
            assert_eq!(r[h], expected);
        }
        let zero = vec![PAdicRational::zero(2); inc.len()];
        assert!(m.radon_finite(&quot, &zero).unwrap().iter().all(|x| x.is_zero()));
        g[1] = PAdicRational::zero(2);
        assert!(matches!(m.radon_finite(&quot, &g), Err(TateError::SumNotZero(_))));
    }

    #[test]
    fn radon_finite_agrees_with_projective_radon() {
        let (m, quot) = admissible(3, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = quot.outer_index();
        assert_eq!(n - (quot.dim() as i64 - 1), quot.inner_index() + 1);
        for _ in 0..20 {
            let g = random_zero_sum(3, quot.incidence().len(), 5, &mut rng);
            assert_eq!(m.radon_finite(&quot, &g).unwrap(), radon_forward(quot.incidence(), &g, n as usize).unwrap());
        }
    }

    #[test]
    fn radon_rejects_non_admissible_pairs() {
        let m = model(2, 5, -4);
        let quot = m.quotient(Side::Primal, &coord(5, 2), &Subspace::full(5)).unwrap();
        assert_eq!(quot.inner_index(), -2);
        assert_eq!(quot.outer_index(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            m.radon_fourier_check(&quot, 1, &mut rng).unwrap_err(),
            TateError::NotAdmissible { inner: -2, outer: 1 }
        );
    }

    #[test]
    fn radon_fourier_square_commutes() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for (q, dim) in [(2, 5), (2, 6), (3, 5)] {
            let (m, quot) = admissible(q, dim);
            let r = m.radon_fourier_check(&quot, 100, &mut rng).unwrap();
            assert_eq!(r.trials, 100);
            assert!(r.failures.is_empty());
        }
        let m = model(2, 6, -4);
        let quot = m.quotient(Side::Primal, &coord(6, 2), &Subspace::full(6)).unwrap();
        assert!(m.radon_fourier_check(&quot, 50, &mut rng).unwrap().failures.is_empty());
    }

    #[test]
    fn schubert_pairs() {
        let m = model(2, 4, -2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut ws: Vec<Subspace> = Vec::new();
        while ws.len() < 3 {
            let w = random_subspace(&m, 2, &mut rng);
            if !ws.contains(&w) {
                ws.push(w);
            }
        }
        let pairs: Vec<TatePair> = ws.iter().map(|w| m.schubert_pair(w).unwrap()).collect();
        for i in 0..3 {
            assert!(!m.is_principal(&pairs[i]).unwrap());
            for j in 0..3 {
                assert!(m.is_principal(&pairs[i].sub(&pairs[j])).unwrap());
            }
        }
        assert_eq!(m.schubert_pair(&coord(4, 1)).unwrap_err(), TateError::WrongIndex { expected: 0, got: -1 });
        // on the dual model the roles of the two slots swap
        let d = m.dual();
        let w = &ws[0];
        let dual_pair = d.schubert_pair(&w.perp(m.field())).unwrap();
        assert_eq!(dual_pair.f1.values, pairs[0].f2.values);
        assert_eq!(dual_pair.f2.values, pairs[0].f1.values);
    }

    #[test]
    fn line_bundles_and_picard_relation() {
        for q in [2, 3] {
            let m = model(q, 4, -2);
            let ch = chain_in(&m);
            assert!(m.picard_relation_check(&ch).unwrap());
            assert!(m.canonical_preimage_check(&ch).unwrap());
            let lb = m.line_bundle_pairs(&ch);
            let qm1 = PAdicRational::from_int(q as i64 - 1, q);
            assert_eq!(m.integrate(&lb.ell_a.f2), qm1);
            assert!(lb.ell_a.f2.at_zero().is_zero());
            assert!(m.integrate(&lb.ell_b.f2).is_zero());
            assert_eq!(lb.ell_b.f2.at_zero(), -qm1);
            let broken = TatePair { f1: lb.ell_a.f1.clone(), f2: lb.ell_b.f2.clone() };
            assert!(!m.in_canonical_preimage(&broken).unwrap());
        }
        let m = model(2, 4, -2);
        let w = |k| coord(4, k);
        assert_eq!(m.chain([w(1), w(3), w(2)]).unwrap_err(), TateError::WrongChain);
        assert_eq!(m.chain([w(1), Subspace::coordinate(4, &[2, 3]), w(3)]).unwrap_err(), TateError::WrongChain);
    }

    #[test]
    fn gamma_identity() {
        for q in [2, 3] {
            let m = model(q, 4, -2);
            let ch = chain_in(&m);
            let [_, w0, w1] = ch.lattices().clone();
            assert!(m.gamma_identity_check(&m.indicator_difference(Side::Primal, &w1, &w0), &ch).unwrap());
            assert!(m.gamma_identity_check(&m.indicator(Side::Primal, &w0), &ch).unwrap());
            let mut rng = ChaCha8Rng::seed_from_u64(8 + q as u64);
            for _ in 0..50 {
                let f = m.random_invariant(Side::Primal, 7, &mut rng);
                assert!(m.gamma_identity_check(&f, &ch).unwrap());
            }
        }
    }

    #[test]
    fn partial_frobenius_pullbacks() {
        let m = model(3, 3, -1);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pair = TatePair { f1: m.random_invariant(Side::Dual, 4, &mut rng), f2: m.random_invariant(Side::Primal, 4, &mut rng) };
        let both = m.partial_frobenius_pullback(&m.partial_frobenius_pullback(&pair, PartialFrobenius::Plus), PartialFrobenius::Minus);
        assert_eq!(both, pair.scale(PAdicRational::from_int(3, 3)));
        let zero = TatePair { f1: m.zero_fn(Side::Dual), f2: m.zero_fn(Side::Primal) };
        assert_eq!(m.partial_frobenius_pullback(&zero, PartialFrobenius::Minus), zero);
        // a principal pair stays principal only after both partial Frobenii
        let x = random_principal(&m, &mut rng);
        assert!(m.is_principal(&m.partial_frobenius_pullback(&m.partial_frobenius_pullback(&x, PartialFrobenius::Minus), PartialFrobenius::Plus)).unwrap());
        if !x.f1.values[1..].iter().all(|v| v.is_zero()) {
            assert!(!m.is_principal(&m.partial_frobenius_pullback(&x, PartialFrobenius::Minus)).unwrap());
        }
    }
}
