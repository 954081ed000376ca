//! Exact dyadic rationals `m / 2^k`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest exponent a [`Dyadic`] may carry.
pub const MAX_EXP: u32 = 120;

/// The dyadic rational `m / 2^k`, always stored reduced (`m` odd or `k == 0`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDyadic", into = "RawDyadic")]
pub struct Dyadic {
    m: i128,
    k: u32,
}

#[derive(Serialize, Deserialize)]
struct RawDyadic {
    m: i128,
    k: u32,
}

impl TryFrom<RawDyadic> for Dyadic {
    type Error = Error;
    fn try_from(r: RawDyadic) -> Result<Self> {
        if r.k > MAX_EXP {
            return Err(Error::Dyadic(format!("exponent {} exceeds {}", r.k, MAX_EXP)));
        }
        Ok(Dyadic::new(r.m, r.k))
    }
}

impl From<Dyadic> for RawDyadic {
    fn from(d: Dyadic) -> Self {
        RawDyadic { m: d.m, k: d.k }
    }
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { m: 0, k: 0 };
    pub const ONE: Dyadic = Dyadic { m: 1, k: 0 };

    /// `m / 2^k`, reduced.
    pub fn new(mut m: i128, mut k: u32) -> Self {
        if m == 0 {
            return Dyadic::ZERO;
        }
        while k > 0 && m % 2 == 0 {
            m /= 2;
            k -= 1;
        }
        Dyadic { m, k }
    }

    pub fn from_int(n: i128) -> Self {
        Dyadic { m: n, k: 0 }
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u32) -> Self {
        Dyadic { m: 1, k }
    }

    pub fn numerator(&self) -> i128 {
        self.m
    }

    pub fn exponent(&self) -> u32 {
        self.k
    }

    pub fn to_f64(&self) -> f64 {
        self.m as f64 * (-(self.k as f64)).exp2()
    }

    /// Exact conversion of a finite float.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::Dyadic(format!("{x} is not finite")));
        }
        if x == 0.0 {
            return Ok(Dyadic::ZERO);
        }
        let bits = x.to_bits();
        let sign: i128 = if bits >> 63 == 1 { -1 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i32;
        let frac = (bits & ((1u64 << 52) - 1)) as i128;
        let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1 << 52), exp - 1075) };
        let mut mant = mant;
        let mut e = e;
        while mant % 2 == 0 {
            mant /= 2;
            e += 1;
        }
        if e >= 0 {
            if e > 70 {
                return Err(Error::Dyadic(format!("{x} is too large")));
            }
            Ok(Dyadic::from_int(sign * (mant << e)))
        } else {
            let k = (-e) as u32;
            if k > MAX_EXP {
                return Err(Error::Dyadic(format!("{x} needs exponent {k} > {MAX_EXP}")));
            }
            Ok(Dyadic::new(sign * mant, k))
        }
    }

    /// Multiply by `2^j`.
    pub fn mul_pow2(&self, j: i32) -> Self {
        if self.m == 0 {
            return *self;
        }
        if j >= 0 {
            let j = j as u32;
            if j <= self.k {
                Dyadic::new(self.m, self.k - j)
            } else {
                Dyadic::from_int(self.m << (j - self.k))
            }
        } else {
            let k = self.k + (-j) as u32;
            assert!(k <= MAX_EXP, "dyadic exponent overflow");
            Dyadic::new(self.m, k)
        }
    }

    pub fn floor(&self) -> i128 {
        self.m.div_euclid(1i128 << self.k)
    }

    /// Fractional part in `[0, 1)`.
    pub fn frac(&self) -> Self {
        *self - Dyadic::from_int(self.floor())
    }

    pub fn is_integer(&self) -> bool {
        self.k == 0
    }

    pub fn is_positive(&self) -> bool {
        self.m > 0
    }

    /// If `self == 2^j` for an integer `j`, returns `j`.
    pub fn log2_exact(&self) -> Option<i32> {
        if self.m <= 0 || self.m & (self.m - 1) != 0 {
            return None;
        }
        Some(self.m.trailing_zeros() as i32 - self.k as i32)
    }

    /// Whether `self` is an integer multiple of `2^-k`.
    pub fn is_multiple_of_pow2_neg(&self, k: u32) -> bool {
        self.k <= k
    }

    fn align(a: &Dyadic, b: &Dyadic) -> (i128, i128, u32) {
        let k = a.k.max(b.k);
        (a.m << (k - a.k), b.m << (k - b.k), k)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        let (a, b, k) = Dyadic::align(&self, &rhs);
        Dyadic::new(a + b, k)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        let (a, b, k) = Dyadic::align(&self, &rhs);
        Dyadic::new(a - b, k)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { m: -self.m, k: self.k }
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = Dyadic::align(self, other);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.k == 0 {
            write!(f, "{}", self.m)
        } else {
            write!(f, "{}/2^{}", self.m, self.k)
        }
    }
}

impl std::str::FromStr for Dyadic {
    type Err = Error;

    /// Accepts `m`, `m/2^k`, `p/q` with `q` a power of two, or a decimal literal.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("cannot read dyadic rational from {s:?}"));
        if let Some((num, den)) = s.split_once('/') {
            let m: i128 = num.trim().parse().map_err(|_| bad())?;
            let den = den.trim();
            if let Some(exp) = den.strip_prefix("2^") {
                let k: u32 = exp.parse().map_err(|_| bad())?;
                if k > MAX_EXP {
                    return Err(bad());
                }
                return Ok(Dyadic::new(m, k));
            }
            let q: i128 = den.parse().map_err(|_| bad())?;
            if q <= 0 || q & (q - 1) != 0 {
                return Err(Error::Dyadic(format!("denominator {q} is not a power of two")));
            }
            return Ok(Dyadic::new(m, q.trailing_zeros()));
        }
        if let Ok(n) = s.parse::<i128>() {
            return Ok(Dyadic::from_int(n));
        }
        let x: f64 = s.parse().map_err(|_| bad())?;
        Dyadic::from_f64(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduce_and_compare() {
        assert_eq!(Dyadic::new(4, 3), Dyadic::new(1, 1));
        assert!(Dyadic::new(3, 3) < Dyadic::new(1, 1));
        assert_eq!(Dyadic::new(1, 2) + Dyadic::new(1, 2), Dyadic::new(1, 1));
        assert_eq!((Dyadic::new(5, 2) - Dyadic::ONE).to_f64(), 0.25);
    }

    #[test]
    fn float_round_trip() {
        for x in [0.0, 0.5, 0.3125, -1.75, 3.0, 1e-10] {
            assert_eq!(Dyadic::from_f64(x).unwrap().to_f64(), x);
        }
    }

    #[test]
    fn parse_forms() {
        assert_eq!("3/8".parse::<Dyadic>().unwrap(), Dyadic::new(3, 3));
        assert_eq!("3/2^3".parse::<Dyadic>().unwrap(), Dyadic::new(3, 3));
        assert_eq!("0.375".parse::<Dyadic>().unwrap(), Dyadic::new(3, 3));
        assert!("1/3".parse::<Dyadic>().is_err());
    }

    #[test]
    fn log2_and_floor() {
        assert_eq!(Dyadic::new(1, 3).log2_exact(), Some(-3));
        assert_eq!(Dyadic::from_int(4).log2_exact(), Some(2));
        assert_eq!(Dyadic::new(3, 3).log2_exact(), None);
        assert_eq!(Dyadic::new(-1, 2).floor(), -1);
        assert_eq!(Dyadic::new(5, 2).frac(), Dyadic::new(1, 2));
    }
}
