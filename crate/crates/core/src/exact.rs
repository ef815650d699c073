//! Exact exponents and exact positive values.
//!
//! Every finite Brascamp–Lieb constant computed in this crate is a product of
//! integer powers raised to rational exponents, so it is stored as a map
//! `prime -> rational exponent` and compared without rounding.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::error::{BlError, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// A Lebesgue exponent in `[1, ∞]`, rational when finite.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtRational {
    Finite(Rational),
    Infinity,
}

impl ExtRational {
    pub fn new(value: Rational) -> Result<Self> {
        if value < Rational::one() {
            return Err(BlError::InvalidExponent(value.to_string()));
        }
        Ok(ExtRational::Finite(value))
    }

    pub fn from_ratio(n: i64, d: i64) -> Result<Self> {
        Self::new(rat(n, d))
    }

    pub fn integer(n: i64) -> Result<Self> {
        Self::new(rat_int(n))
    }

    pub fn one() -> Self {
        ExtRational::Finite(Rational::one())
    }

    /// Builds the exponent whose reciprocal is `s ∈ [0, 1]`.
    pub fn from_reciprocal(s: &Rational) -> Result<Self> {
        if s.is_negative() || *s > Rational::one() {
            return Err(BlError::InvalidExponent(format!("1/{s}")));
        }
        if s.is_zero() {
            Ok(ExtRational::Infinity)
        } else {
            Ok(ExtRational::Finite(s.recip()))
        }
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn reciprocal(&self) -> Rational {
        match self {
            ExtRational::Finite(p) => p.recip(),
            ExtRational::Infinity => Rational::zero(),
        }
    }

    /// The conjugate exponent `p'` with `1/p + 1/p' = 1`.
    pub fn conjugate(&self) -> Self {
        let s = Rational::one() - self.reciprocal();
        Self::from_reciprocal(&s).expect("conjugate of a valid exponent is valid")
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtRational::Infinity)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtRational::Finite(p) => p.to_f64().unwrap_or(f64::INFINITY),
            ExtRational::Infinity => f64::INFINITY,
        }
    }

    pub fn recip_f64(&self) -> f64 {
        self.reciprocal().to_f64().unwrap_or(0.0)
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::Finite(p) => write!(f, "{p}"),
            ExtRational::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for ExtRational {
    type Err = BlError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => return Ok(ExtRational::Infinity),
            _ => {}
        }
        let value = parse_rational(t)?;
        Self::new(value)
    }
}

/// Parses `"a"`, `"a/b"` or a terminating decimal such as `"1.5"`.
pub fn parse_rational(t: &str) -> Result<Rational> {
    let bad = || BlError::InvalidExponent(t.to_string());
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let digits = frac.len() as u32;
        let joined: BigInt = format!("{whole}{frac}").parse().map_err(|_| bad())?;
        return Ok(Rational::new(joined, BigInt::from(10u32).pow(digits)));
    }
    let n: BigInt = t.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

pub fn conjugate_all(ps: &[ExtRational]) -> Vec<ExtRational> {
    ps.iter().map(ExtRational::conjugate).collect()
}

/// Trial-division factorization; adequate for the group orders handled here.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// A positive real `∏ q^{e_q}` with rational exponents, or `+∞`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExactPosValue {
    Finite(BTreeMap<u64, Rational>),
    Infinite,
}

impl ExactPosValue {
    pub fn one() -> Self {
        ExactPosValue::Finite(BTreeMap::new())
    }

    pub fn from_u64(n: u64) -> Self {
        assert!(n > 0, "exact values are positive");
        let map = factorize(n)
            .into_iter()
            .map(|(p, e)| (p, rat_int(e as i64)))
            .collect();
        ExactPosValue::Finite(map)
    }

    /// `n^e`.
    pub fn power_of(n: u64, e: &Rational) -> Self {
        Self::from_u64(n).pow(e)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExactPosValue::Infinite)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, ExactPosValue::Finite(m) if m.is_empty())
    }

    pub fn exponents(&self) -> Option<&BTreeMap<u64, Rational>> {
        match self {
            ExactPosValue::Finite(m) => Some(m),
            ExactPosValue::Infinite => None,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        match (self, other) {
            (ExactPosValue::Finite(a), ExactPosValue::Finite(b)) => {
                let mut out = a.clone();
                for (p, e) in b {
                    let entry = out.entry(*p).or_insert_with(Rational::zero);
                    *entry += e;
                }
                out.retain(|_, e| !e.is_zero());
                ExactPosValue::Finite(out)
            }
            _ => ExactPosValue::Infinite,
        }
    }

    pub fn pow(&self, e: &Rational) -> Self {
        match self {
            ExactPosValue::Finite(m) => {
                if e.is_zero() {
                    return Self::one();
                }
                ExactPosValue::Finite(m.iter().map(|(p, x)| (*p, x * e)).collect())
            }
            ExactPosValue::Infinite => {
                if e.is_zero() {
                    Self::one()
                } else {
                    assert!(e.is_positive(), "negative power of infinity");
                    ExactPosValue::Infinite
                }
            }
        }
    }

    pub fn recip(&self) -> Self {
        self.pow(&-Rational::one())
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.recip())
    }

    pub fn ln(&self) -> f64 {
        match self {
            ExactPosValue::Finite(m) => m
                .iter()
                .map(|(p, e)| e.to_f64().unwrap_or(0.0) * (*p as f64).ln())
                .sum(),
            ExactPosValue::Infinite => f64::INFINITY,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.ln().exp()
    }

    /// Serialized form: prime -> "num/den" strings (or "num" when integral).
    pub fn to_exponent_strings(&self) -> Option<BTreeMap<String, String>> {
        self.exponents().map(|m| {
            m.iter()
                .map(|(p, e)| (p.to_string(), e.to_string()))
                .collect()
        })
    }

    pub fn from_exponent_strings(map: &BTreeMap<String, String>) -> Result<Self> {
        let mut out = Self::one();
        for (p, e) in map {
            let p: u64 = p
                .parse()
                .map_err(|_| BlError::Parse(format!("bad prime key {p:?}")))?;
            if factorize(p) != vec![(p, 1)] {
                return Err(BlError::Parse(format!("{p} is not prime")));
            }
            let e = parse_rational(e)?;
            out = out.mul(&Self::power_of(p, &e));
        }
        Ok(out)
    }

    fn exact_cmp(a: &BTreeMap<u64, Rational>, b: &BTreeMap<u64, Rational>) -> Ordering {
        // Compare ∏ q^{D(e_q - f_q)} against 1 with D clearing denominators.
        let mut diff: BTreeMap<u64, Rational> = a.clone();
        for (p, e) in b {
            *diff.entry(*p).or_insert_with(Rational::zero) -= e;
        }
        diff.retain(|_, e| !e.is_zero());
        if diff.is_empty() {
            return Ordering::Equal;
        }
        let d = diff
            .values()
            .fold(BigInt::one(), |acc, e| acc.lcm(e.denom()));
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for (p, e) in &diff {
            let k = (e * Rational::from_integer(d.clone())).to_integer();
            let k_abs = k.abs().to_u32().expect("exponent too large for exact comparison");
            let term = BigInt::from(*p).pow(k_abs);
            if k.is_positive() {
                num *= term;
            } else {
                den *= term;
            }
        }
        num.cmp(&den)
    }
}

impl PartialOrd for ExactPosValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactPosValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExactPosValue::Infinite, ExactPosValue::Infinite) => Ordering::Equal,
            (ExactPosValue::Infinite, _) => Ordering::Greater,
            (_, ExactPosValue::Infinite) => Ordering::Less,
            (ExactPosValue::Finite(a), ExactPosValue::Finite(b)) => {
                if a == b {
                    return Ordering::Equal;
                }
                let la = self.ln();
                let lb = other.ln();
                if (la - lb).abs() > 1e-6 * (1.0 + la.abs().max(lb.abs())) {
                    return la.partial_cmp(&lb).unwrap_or(Ordering::Equal);
                }
                Self::exact_cmp(a, b)
            }
        }
    }
}

impl fmt::Display for ExactPosValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactPosValue::Infinite => write!(f, "inf"),
            ExactPosValue::Finite(m) if m.is_empty() => write!(f, "1"),
            ExactPosValue::Finite(m) => {
                let parts: Vec<String> = m
                    .iter()
                    .map(|(p, e)| {
                        if e.is_one() {
                            format!("{p}")
                        } else {
                            format!("{p}^({e})")
                        }
                    })
                    .collect();
                write!(f, "{}", parts.join("*"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugates() {
        let two = ExtRational::integer(2).unwrap();
        assert_eq!(two.conjugate(), two);
        assert_eq!(ExtRational::one().conjugate(), ExtRational::Infinity);
        assert_eq!(ExtRational::Infinity.conjugate(), ExtRational::one());
        let a = ExtRational::from_ratio(4, 3).unwrap();
        assert_eq!(a.conjugate(), ExtRational::integer(4).unwrap());
    }

    #[test]
    fn parsing() {
        assert_eq!("inf".parse::<ExtRational>().unwrap(), ExtRational::Infinity);
        assert_eq!(
            "3/2".parse::<ExtRational>().unwrap(),
            ExtRational::from_ratio(3, 2).unwrap()
        );
        assert_eq!(
            "1.5".parse::<ExtRational>().unwrap(),
            ExtRational::from_ratio(3, 2).unwrap()
        );
        assert!("2/3".parse::<ExtRational>().is_err());
        assert!("x".parse::<ExtRational>().is_err());
    }

    #[test]
    fn values_compare_exactly() {
        let sqrt6 = ExactPosValue::power_of(6, &rat(1, 2));
        let sqrt2 = ExactPosValue::power_of(2, &rat(1, 2));
        let sqrt3 = ExactPosValue::power_of(3, &rat(1, 2));
        assert_eq!(sqrt2.mul(&sqrt3), sqrt6);
        assert!(sqrt6 > ExactPosValue::from_u64(2));
        assert!(sqrt6 < ExactPosValue::Infinite);
        // 2^(1/3) vs 3^(1/5): 2^5 = 32 > 27 = 3^3
        let a = ExactPosValue::power_of(2, &rat(1, 3));
        let b = ExactPosValue::power_of(3, &rat(1, 5));
        assert_eq!(ExactPosValue::exact_cmp(a.exponents().unwrap(), b.exponents().unwrap()), Ordering::Greater);
        assert!((sqrt6.to_f64() - 6f64.sqrt()).abs() < 1e-12);
        assert!(ExactPosValue::from_u64(4).pow(&rat(-1, 2)).mul(&ExactPosValue::from_u64(2)).is_one());
    }

    #[test]
    fn exponent_strings_round_trip() {
        let v = ExactPosValue::power_of(12, &rat(2, 3));
        let s = v.to_exponent_strings().unwrap();
        assert_eq!(s["2"], "4/3");
        assert_eq!(ExactPosValue::from_exponent_strings(&s).unwrap(), v);
    }
}
