//! Exact elements of `Z[1/p]`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// The number `numerator / p^p_exponent`, kept in canonical form: either the
/// numerator is zero (and the exponent is 0) or `p` does not divide it.
///
/// Arithmetic panics on `i128` overflow and when mixing different primes;
/// every quantity in this crate stays many orders of magnitude below that.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PAdicRational {
    numerator: i128,
    p_exponent: i32,
    p: u32,
}

impl PAdicRational {
    pub fn new(numerator: i128, p_exponent: i32, p: u32) -> Self {
        assert!(p >= 2, "prime must be at least 2");
        PAdicRational { numerator, p_exponent, p }.canonical()
    }

    pub fn zero(p: u32) -> Self {
        PAdicRational::new(0, 0, p)
    }

    pub fn one(p: u32) -> Self {
        PAdicRational::new(1, 0, p)
    }

    pub fn from_int(n: i64, p: u32) -> Self {
        PAdicRational::new(n as i128, 0, p)
    }

    /// `p^k` for any integer `k`.
    pub fn p_power(k: i32, p: u32) -> Self {
        if k >= 0 {
            PAdicRational::new(checked_pow(p as i128, k as u32), 0, p)
        } else {
            PAdicRational::new(1, -k, p)
        }
    }

    /// `q^k` for `q = p^e`.
    pub fn q_power(e: u32, k: i32, p: u32) -> Self {
        PAdicRational::p_power(e as i32 * k, p)
    }

    pub fn numerator(&self) -> i128 {
        self.numerator
    }

    pub fn p_exponent(&self) -> i32 {
        self.p_exponent
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.numerator == 0
    }

    /// The value as an integer, when it is one.
    pub fn to_integer(&self) -> Option<i128> {
        if self.p_exponent <= 0 {
            Some(self.numerator.checked_mul(checked_pow(self.p as i128, (-self.p_exponent) as u32))?)
        } else {
            None
        }
    }

    pub fn scale(self, k: i64) -> Self {
        self * PAdicRational::from_int(k, self.p)
    }

    fn canonical(mut self) -> Self {
        if self.numerator == 0 {
            self.p_exponent = 0;
            return self;
        }
        let p = self.p as i128;
        while self.numerator % p == 0 {
            self.numerator /= p;
            self.p_exponent -= 1;
        }
        if self.p_exponent < 0 {
            self.numerator = self
                .numerator
                .checked_mul(checked_pow(p, (-self.p_exponent) as u32))
                .expect("Z[1/p] overflow");
            self.p_exponent = 0;
        }
        self
    }

    /// Both numerators over the common denominator `p^max`.
    fn aligned(self, other: Self) -> (i128, i128, i32) {
        assert_eq!(self.p, other.p, "mixing Z[1/p] for different primes");
        let e = self.p_exponent.max(other.p_exponent);
        let p = self.p as i128;
        let a = self
            .numerator
            .checked_mul(checked_pow(p, (e - self.p_exponent) as u32))
            .expect("Z[1/p] overflow");
        let b = other
            .numerator
            .checked_mul(checked_pow(p, (e - other.p_exponent) as u32))
            .expect("Z[1/p] overflow");
        (a, b, e)
    }
}

fn checked_pow(base: i128, exp: u32) -> i128 {
    base.checked_pow(exp).expect("Z[1/p] overflow")
}

impl Add for PAdicRational {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (a, b, e) = self.aligned(rhs);
        PAdicRational::new(a.checked_add(b).expect("Z[1/p] overflow"), e, self.p)
    }
}

impl Sub for PAdicRational {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for PAdicRational {
    type Output = Self;
    fn neg(self) -> Self {
        PAdicRational { numerator: -self.numerator, ..self }
    }
}

impl Mul for PAdicRational {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        assert_eq!(self.p, rhs.p, "mixing Z[1/p] for different primes");
        PAdicRational::new(
            self.numerator.checked_mul(rhs.numerator).expect("Z[1/p] overflow"),
            self.p_exponent + rhs.p_exponent,
            self.p,
        )
    }
}

impl AddAssign for PAdicRational {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for PAdicRational {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl PartialOrd for PAdicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PAdicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(*other);
        a.cmp(&b)
    }
}

impl fmt::Debug for PAdicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for PAdicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p_exponent == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}^{}", self.numerator, self.p, self.p_exponent)
        }
    }
}
