//! Exact integer utilities: modular inverses, unit groups and big binomials.

use std::fmt;
use std::ops::{Add, AddAssign, Mul};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A residue class `value mod modulus` with `0 <= value < modulus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Residue {
    value: u64,
    modulus: u64,
}

impl Residue {
    /// Reduces `value` into `[0, modulus)`. Panics if `modulus == 0`.
    pub fn new(value: i64, modulus: u64) -> Self {
        assert!(modulus > 0, "modulus must be positive");
        let value = (value as i128).rem_euclid(modulus as i128) as u64;
        Residue { value, modulus }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// A non-negative arbitrary-precision count.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BigCount(BigUint);

// Serialised as a decimal string so that files stay exact and readable.
impl Serialize for BigCount {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for BigCount {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse::<BigUint>()
            .map(BigCount)
            .map_err(|e| serde::de::Error::custom(format!("invalid count '{s}': {e}")))
    }
}

impl BigCount {
    pub fn zero() -> Self {
        BigCount(BigUint::zero())
    }

    pub fn one() -> Self {
        BigCount(BigUint::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }

    pub fn into_biguint(self) -> BigUint {
        self.0
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }

    pub fn to_u128(&self) -> Option<u128> {
        self.0.to_u128()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::INFINITY)
    }

    /// Little-endian bytes, used for content digests.
    pub fn to_bytes_le(&self) -> Vec<u8> {
        self.0.to_bytes_le()
    }
}

impl From<u64> for BigCount {
    fn from(v: u64) -> Self {
        BigCount(BigUint::from(v))
    }
}

impl From<u128> for BigCount {
    fn from(v: u128) -> Self {
        BigCount(BigUint::from(v))
    }
}

impl From<BigUint> for BigCount {
    fn from(v: BigUint) -> Self {
        BigCount(v)
    }
}

impl fmt::Display for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Add for BigCount {
    type Output = BigCount;
    fn add(self, rhs: BigCount) -> BigCount {
        BigCount(self.0 + rhs.0)
    }
}

impl<'a> Add<&'a BigCount> for &'a BigCount {
    type Output = BigCount;
    fn add(self, rhs: &'a BigCount) -> BigCount {
        BigCount(&self.0 + &rhs.0)
    }
}

impl AddAssign<&BigCount> for BigCount {
    fn add_assign(&mut self, rhs: &BigCount) {
        self.0 += &rhs.0;
    }
}

impl<'a> Mul<&'a BigCount> for &'a BigCount {
    type Output = BigCount;
    fn mul(self, rhs: &'a BigCount) -> BigCount {
        BigCount(&self.0 * &rhs.0)
    }
}

impl Mul for BigCount {
    type Output = BigCount;
    fn mul(self, rhs: BigCount) -> BigCount {
        BigCount(self.0 * rhs.0)
    }
}

pub fn gcd(a: i64, b: u64) -> u64 {
    (a.unsigned_abs()).gcd(&b)
}

/// `true` when `gcd(a, q) = 1`; every integer is coprime to `1`.
pub fn is_coprime(a: i64, q: u64) -> bool {
    q == 1 || gcd(a, q) == 1
}

/// Inverse of `a` modulo `q`. For `q = 1` the inverse is `0`.
pub fn mod_inverse(a: i64, q: u64) -> Result<Residue> {
    if q == 0 {
        return Err(Error::ZeroOrder);
    }
    if q == 1 {
        return Ok(Residue::new(0, 1));
    }
    let (mut old_r, mut r) = ((a as i128).rem_euclid(q as i128), q as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return Err(Error::NotInvertible { a, q });
    }
    Ok(Residue::new(old_s.rem_euclid(q as i128) as i64, q))
}

/// The units of `Z/qZ` in ascending order; `[0]` for `q = 1`.
pub fn units(q: u64) -> Vec<Residue> {
    if q == 1 {
        return vec![Residue::new(0, 1)];
    }
    (1..q)
        .filter(|&r| r.gcd(&q) == 1)
        .map(|r| Residue { value: r, modulus: q })
        .collect()
}

/// Exact binomial coefficient, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigCount {
    if k > n {
        return BigCount::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    BigCount(acc)
}

/// Row of binomials `binom(b + d, d)` for `b = 0..len`.
pub(crate) fn binomial_column(d: u64, len: usize) -> Vec<BigCount> {
    let mut out = Vec::with_capacity(len);
    let mut cur = BigUint::one();
    for b in 0..len as u64 {
        if b > 0 {
            // binom(b+d, d) = binom(b-1+d, d) * (b+d) / b
            cur = cur * (b + d) / b;
        }
        out.push(BigCount(cur.clone()));
    }
    out
}
