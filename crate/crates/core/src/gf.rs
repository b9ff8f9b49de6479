//! Exact arithmetic in a tower `F_p ⊂ F_q ⊂ F_{q^m}`.
//!
//! The big field `F_{q^m}` is `F_p[x]/(f)` for a primitive polynomial `f` of
//! degree `e·m`, so `x` itself generates the multiplicative group and
//! multiplication runs through exp/log tables. Elements are encoded as the
//! integer `Σ c_i p^i` of their coefficient vector; the derived ordering on
//! [`Elem`] is therefore lexicographic on the coefficient vector read from the
//! top degree down, which is what subspace canonical forms rely on.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default cap on the number of field elements.
pub const DEFAULT_FIELD_BUDGET: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NonPrime(u32),
    #[error("extension degrees must be positive (e = {e}, m = {m})")]
    ZeroDegree { e: u32, m: u32 },
    #[error("no irreducible primitive modulus of degree {0} found")]
    ReducibleModulus(u32),
    #[error("field of size {size} exceeds the budget of {budget} elements")]
    BudgetExceeded { size: u64, budget: u64 },
}

/// An element of `F_{q^m}`, only meaningful together with its [`Field`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Elem(pub(crate) u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone)]
pub struct Field {
    p: u32,
    e: u32,
    m: u32,
    degree: u32,
    size: u32,
    q: u32,
    seed: u64,
    /// Coefficients `a_0..a_{k-1}` of the monic modulus `x^k + Σ a_i x^i`.
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    subfield: Vec<Elem>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("p", &self.p)
            .field("e", &self.e)
            .field("m", &self.m)
            .field("modulus", &self.modulus)
            .field("seed", &self.seed)
            .finish()
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl Field {
    /// `F_{q^m}` with `q = p^e`, default seed and budget.
    pub fn new(p: u32, e: u32, m: u32) -> Result<Field, FieldError> {
        Field::with_options(p, e, m, 0, DEFAULT_FIELD_BUDGET)
    }

    pub fn with_options(p: u32, e: u32, m: u32, seed: u64, budget: u64) -> Result<Field, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NonPrime(p));
        }
        if e == 0 || m == 0 {
            return Err(FieldError::ZeroDegree { e, m });
        }
        let degree = e * m;
        let size = (p as u64).checked_pow(degree).unwrap_or(u64::MAX);
        if size > budget || size > u32::MAX as u64 {
            return Err(FieldError::BudgetExceeded { size, budget });
        }
        let size = size as u32;
        let q = p.pow(e);

        let candidates = size as u64;
        let start = splitmix64(seed) % candidates;
        let mut found = None;
        for step in 0..candidates {
            let idx = ((start + step) % candidates) as u32;
            let coeffs = digits(idx, p, degree as usize);
            if coeffs[0] == 0 && degree > 1 {
                continue;
            }
            if !poly_is_irreducible(&coeffs, p) {
                continue;
            }
            if let Some(exp) = primitive_exp_table(&coeffs, p, size) {
                found = Some((coeffs, exp));
                break;
            }
        }
        let (modulus, exp) = found.ok_or(FieldError::ReducibleModulus(degree))?;

        let mut log = vec![0u32; size as usize];
        for (i, &v) in exp.iter().enumerate() {
            log[v as usize] = i as u32;
        }
        let mut field = Field {
            p,
            e,
            m,
            degree,
            size,
            q,
            seed,
            modulus,
            exp,
            log,
            subfield: Vec::new(),
        };
        field.subfield = (0..size).map(Elem).filter(|&x| field.frobenius(x) == x).collect();
        debug_assert_eq!(field.subfield.len() as u32, q);
        Ok(field)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Size of the small field `F_q`.
    pub fn q(&self) -> u32 {
        self.q
    }

    /// Number of elements of `F_{q^m}`.
    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// The fixed multiplicative generator (the class of `x`).
    pub fn generator(&self) -> Elem {
        if self.size == 2 {
            Elem::ONE
        } else {
            Elem(self.exp[1])
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.size).map(Elem)
    }

    /// The element with the given integer encoding, if in range.
    pub fn elem(&self, index: u32) -> Option<Elem> {
        (index < self.size).then_some(Elem(index))
    }

    /// Elements of the subfield `F_q`, in increasing order.
    pub fn subfield(&self) -> &[Elem] {
        &self.subfield
    }

    pub fn in_subfield(&self, x: Elem) -> bool {
        self.frobenius(x) == x
    }

    pub fn coeffs(&self, x: Elem) -> Vec<u32> {
        digits(x.0, self.p, self.degree as usize)
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Elem {
        assert!(coeffs.len() <= self.degree as usize);
        let mut v = 0u32;
        for &c in coeffs.iter().rev() {
            v = v * self.p + c % self.p;
        }
        Elem(v)
    }

    /// Image of an integer under `Z → F_p ⊂ F_{q^m}`.
    pub fn from_int(&self, n: i64) -> Elem {
        Elem(n.rem_euclid(self.p as i64) as u32)
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if self.p == 2 {
            return Elem(a.0 ^ b.0);
        }
        let (mut x, mut y, mut out, mut place) = (a.0, b.0, 0u32, 1u32);
        while x > 0 || y > 0 {
            let d = (x % self.p + y % self.p) % self.p;
            out += d * place;
            place *= self.p;
            x /= self.p;
            y /= self.p;
        }
        Elem(out)
    }

    pub fn neg(&self, a: Elem) -> Elem {
        if self.p == 2 {
            return a;
        }
        let (mut x, mut out, mut place) = (a.0, 0u32, 1u32);
        while x > 0 {
            let d = (self.p - x % self.p) % self.p;
            out += d * place;
            place *= self.p;
            x /= self.p;
        }
        Elem(out)
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a.is_zero() || b.is_zero() {
            return Elem::ZERO;
        }
        let order = self.size - 1;
        let l = (self.log[a.0 as usize] as u64 + self.log[b.0 as usize] as u64) % order as u64;
        Elem(self.exp[l as usize])
    }

    pub fn inv(&self, a: Elem) -> Option<Elem> {
        if a.is_zero() {
            return None;
        }
        let order = self.size - 1;
        let l = self.log[a.0 as usize];
        Some(Elem(self.exp[((order - l) % order) as usize]))
    }

    pub fn div(&self, a: Elem, b: Elem) -> Option<Elem> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    pub fn pow(&self, a: Elem, k: u64) -> Elem {
        if k == 0 {
            return Elem::ONE;
        }
        if a.is_zero() {
            return Elem::ZERO;
        }
        let order = (self.size - 1) as u64;
        let l = (self.log[a.0 as usize] as u64 * (k % order)) % order;
        Elem(self.exp[l as usize])
    }

    /// `x ↦ x^q`, the generator of `Gal(F_{q^m}/F_q)`.
    pub fn frobenius(&self, a: Elem) -> Elem {
        self.pow(a, self.q as u64)
    }

    pub fn frobenius_iter(&self, a: Elem, times: u32) -> Elem {
        (0..times).fold(a, |x, _| self.frobenius(x))
    }

    pub fn sum<I: IntoIterator<Item = Elem>>(&self, it: I) -> Elem {
        it.into_iter().fold(Elem::ZERO, |acc, x| self.add(acc, x))
    }

    pub fn dot(&self, a: &[Elem], b: &[Elem]) -> Elem {
        debug_assert_eq!(a.len(), b.len());
        a.iter().zip(b).fold(Elem::ZERO, |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn digits(mut v: u32, p: u32, len: usize) -> Vec<u32> {
    let mut out = vec![0; len];
    for d in out.iter_mut() {
        *d = v % p;
        v /= p;
    }
    out
}

/// Remainder of `a` modulo the monic polynomial `b` over `F_p` (coefficient
/// vectors, lowest degree first).
fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u32> = a.to_vec();
    let db = b.len() - 1;
    debug_assert_eq!(b[db], 1);
    while r.len() > db {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - db;
        if lead != 0 {
            for (i, &bc) in b.iter().enumerate() {
                let idx = shift + i;
                r[idx] = (r[idx] + p - (lead * bc) % p) % p;
            }
        }
        r.pop();
    }
    r
}

/// Trial division by every monic polynomial of degree `1..=k/2`.
fn poly_is_irreducible(low_coeffs: &[u32], p: u32) -> bool {
    let k = low_coeffs.len();
    let mut f = low_coeffs.to_vec();
    f.push(1);
    for d in 1..=k / 2 {
        let count = p.pow(d as u32);
        for idx in 0..count {
            let mut g = digits(idx, p, d);
            g.push(1);
            if poly_rem(&f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// Powers of `x` modulo `x^k + Σ a_i x^i`; `None` unless `x` has full order.
fn primitive_exp_table(low_coeffs: &[u32], p: u32, size: u32) -> Option<Vec<u32>> {
    let k = low_coeffs.len();
    let order = (size - 1) as usize;
    let mut table = Vec::with_capacity(order);
    let mut cur = vec![0u32; k];
    cur[0] = 1;
    for i in 0..order {
        let v = cur.iter().rev().fold(0u32, |acc, &c| acc * p + c);
        if i > 0 && v == 1 {
            return None;
        }
        table.push(v);
        // multiply by x and reduce: x^k = -Σ a_i x^i
        let top = cur[k - 1];
        for j in (1..k).rev() {
            cur[j] = cur[j - 1];
        }
        cur[0] = 0;
        if top != 0 {
            for j in 0..k {
                cur[j] = (cur[j] + p - (top * low_coeffs[j]) % p) % p;
            }
        }
    }
    let back = cur.iter().rev().fold(0u32, |acc, &c| acc * p + c);
    if back != 1 {
        return None;
    }
    Some(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_two() {
        let f = Field::new(2, 1, 1).unwrap();
        assert_eq!(f.size(), 2);
        assert_eq!(f.subfield(), &[Elem::ZERO, Elem::ONE]);
    }

    #[test]
    fn f4_frobenius_fixes_prime_field_only() {
        let f = Field::new(2, 1, 2).unwrap();
        let fixed: Vec<Elem> = f.elements().filter(|&x| f.frobenius(x) == x).collect();
        assert_eq!(fixed, vec![Elem::ZERO, Elem::ONE]);
    }

    #[test]
    fn f9_frobenius_squared_is_identity() {
        let f = Field::new(3, 1, 2).unwrap();
        assert_eq!(f.size(), 9);
        for x in f.elements() {
            assert_eq!(f.frobenius_iter(x, 2), x);
        }
        assert!(f.elements().any(|x| f.frobenius(x) != x));
    }

    #[test]
    fn f4_generator_squares_to_successor() {
        let f = Field::new(2, 1, 2).unwrap();
        let g = f.generator();
        // direct exponentiation: g*g computed without Frobenius
        let g2 = f.mul(g, g);
        assert_eq!(f.frobenius(g), g2);
        assert_eq!(g2, f.add(g, Elem::ONE));
    }

    #[test]
    fn f9_square_root_of_minus_one() {
        let f = Field::new(3, 1, 2).unwrap();
        let minus_one = f.neg(Elem::ONE);
        let i = f.elements().find(|&x| f.mul(x, x) == minus_one).unwrap();
        let cube = f.mul(f.mul(i, i), i);
        assert_eq!(f.frobenius(i), cube);
        assert_eq!(cube, f.neg(i));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(Field::new(4, 1, 1).unwrap_err(), FieldError::NonPrime(4));
        assert!(matches!(Field::new(2, 1, 0), Err(FieldError::ZeroDegree { .. })));
        assert!(matches!(
            Field::new(2, 7, 3),
            Err(FieldError::BudgetExceeded { .. })
        ));
        assert!(Field::with_options(2, 1, 4, 0, 8).is_err());
    }

    #[test]
    fn modulus_search_is_seed_deterministic() {
        let a = Field::with_options(2, 2, 2, 17, DEFAULT_FIELD_BUDGET).unwrap();
        let b = Field::with_options(2, 2, 2, 17, DEFAULT_FIELD_BUDGET).unwrap();
        assert_eq!(a.modulus(), b.modulus());
        assert_eq!(a.q(), 4);
        assert_eq!(a.subfield().len(), 4);
    }

    fn check_axioms(f: &Field) {
        let els: Vec<Elem> = f.elements().collect();
        for &a in &els {
            assert_eq!(f.add(a, f.neg(a)), Elem::ZERO);
            if !a.is_zero() {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), Elem::ONE);
            }
            assert_eq!(f.frobenius_iter(a, f.m()), a);
            for &b in &els {
                assert_eq!(f.add(a, b), f.add(b, a));
                assert_eq!(f.mul(a, b), f.mul(b, a));
                assert_eq!(f.frobenius(f.add(a, b)), f.add(f.frobenius(a), f.frobenius(b)));
                assert_eq!(f.frobenius(f.mul(a, b)), f.mul(f.frobenius(a), f.frobenius(b)));
                for &c in &els {
                    assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                    assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                }
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive_small_fields() {
        for (p, e, m) in [(2, 1, 1), (2, 1, 2), (2, 1, 3), (3, 1, 1), (3, 1, 2), (2, 2, 2), (5, 1, 2), (3, 2, 2), (2, 3, 2)] {
            let f = Field::new(p, e, m).unwrap();
            assert!(f.size() <= 81);
            check_axioms(&f);
            assert_eq!(f.subfield().len() as u32, f.q());
        }
    }
}
