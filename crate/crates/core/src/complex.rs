//! Exact Gaussian rationals.
//!
//! Values are kept as a pair of reduced `BigRational`s, so equality and zero
//! tests are exact.

use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeTuple, Serializer};
use serde::{Deserialize, Serialize};

/// A complex number `re + im·i` with rational parts.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ComplexRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl ComplexRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        ComplexRat { re, im }
    }

    pub fn from_real(re: BigRational) -> Self {
        ComplexRat { re, im: BigRational::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_real(BigRational::from_integer(n.into()))
    }

    /// `num/den` as a real number. Panics if `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        Self::from_real(BigRational::new(num.into(), den.into()))
    }

    /// `(re_num/re_den) + (im_num/im_den)·i`.
    pub fn from_parts(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> Self {
        ComplexRat {
            re: BigRational::new(re_num.into(), re_den.into()),
            im: BigRational::new(im_num.into(), im_den.into()),
        }
    }

    pub fn i() -> Self {
        ComplexRat { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        ComplexRat { re: self.re.clone(), im: -self.im.clone() }
    }

    /// `|z|^2`, which is always rational.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse, or `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(ComplexRat { re: &self.re / &n, im: -(&self.im / &n) })
    }

    /// Checked division.
    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        rhs.inv().map(|r| self * &r)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = ComplexRat::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Lossy conversion for display and diagnostics.
    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }
}

impl Zero for ComplexRat {
    fn zero() -> Self {
        ComplexRat { re: BigRational::zero(), im: BigRational::zero() }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for ComplexRat {
    fn one() -> Self {
        ComplexRat { re: BigRational::one(), im: BigRational::zero() }
    }
}

impl From<i64> for ComplexRat {
    fn from(n: i64) -> Self {
        ComplexRat::from_int(n)
    }
}

impl From<BigRational> for ComplexRat {
    fn from(r: BigRational) -> Self {
        ComplexRat::from_real(r)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<'a> $tr<&'a ComplexRat> for &'a ComplexRat {
            type Output = ComplexRat;
            fn $m(self, rhs: &'a ComplexRat) -> ComplexRat {
                let f: fn(&ComplexRat, &ComplexRat) -> ComplexRat = $body;
                f(self, rhs)
            }
        }
        impl $tr<ComplexRat> for ComplexRat {
            type Output = ComplexRat;
            fn $m(self, rhs: ComplexRat) -> ComplexRat {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a ComplexRat> for ComplexRat {
            type Output = ComplexRat;
            fn $m(self, rhs: &'a ComplexRat) -> ComplexRat {
                (&self).$m(rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| ComplexRat { re: &a.re + &b.re, im: &a.im + &b.im });
forward_binop!(Sub, sub, |a, b| ComplexRat { re: &a.re - &b.re, im: &a.im - &b.im });
forward_binop!(Mul, mul, |a, b| ComplexRat {
    re: &a.re * &b.re - &a.im * &b.im,
    im: &a.re * &b.im + &a.im * &b.re,
});
forward_binop!(Div, div, |a, b| a
    .checked_div(b)
    .expect("division of ComplexRat by zero"));

impl Neg for ComplexRat {
    type Output = ComplexRat;
    fn neg(self) -> ComplexRat {
        ComplexRat { re: -self.re, im: -self.im }
    }
}

impl Neg for &ComplexRat {
    type Output = ComplexRat;
    fn neg(self) -> ComplexRat {
        ComplexRat { re: -self.re.clone(), im: -self.im.clone() }
    }
}

impl AddAssign<&ComplexRat> for ComplexRat {
    fn add_assign(&mut self, rhs: &ComplexRat) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&ComplexRat> for ComplexRat {
    fn sub_assign(&mut self, rhs: &ComplexRat) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl MulAssign<&ComplexRat> for ComplexRat {
    fn mul_assign(&mut self, rhs: &ComplexRat) {
        *self = &*self * rhs;
    }
}

impl Sum for ComplexRat {
    fn sum<I: Iterator<Item = ComplexRat>>(iter: I) -> Self {
        let mut acc = ComplexRat::zero();
        for x in iter {
            acc += &x;
        }
        acc
    }
}

impl<'a> Sum<&'a ComplexRat> for ComplexRat {
    fn sum<I: Iterator<Item = &'a ComplexRat>>(iter: I) -> Self {
        let mut acc = ComplexRat::zero();
        for x in iter {
            acc += x;
        }
        acc
    }
}

impl Product for ComplexRat {
    fn product<I: Iterator<Item = ComplexRat>>(iter: I) -> Self {
        let mut acc = ComplexRat::one();
        for x in iter {
            acc *= &x;
        }
        acc
    }
}

impl<'a> Product<&'a ComplexRat> for ComplexRat {
    fn product<I: Iterator<Item = &'a ComplexRat>>(iter: I) -> Self {
        let mut acc = ComplexRat::one();
        for x in iter {
            acc *= x;
        }
        acc
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Canonical text form: `3`, `-1/2`, `2i`, `-i`, `1/2-3/4i`.
/// An imaginary coefficient `p/q` is written `p/qi` and means `(p/q)·i`.
impl fmt::Display for ComplexRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let im_text = |im: &BigRational| -> String {
            if im.is_one() {
                "i".to_string()
            } else if (-im).is_one() {
                "-i".to_string()
            } else {
                format!("{}i", fmt_rat(im))
            }
        };
        if self.im.is_zero() {
            write!(f, "{}", fmt_rat(&self.re))
        } else if self.re.is_zero() {
            write!(f, "{}", im_text(&self.im))
        } else {
            let im = im_text(&self.im);
            if im.starts_with('-') {
                write!(f, "{}{}", fmt_rat(&self.re), im)
            } else {
                write!(f, "{}+{}", fmt_rat(&self.re), im)
            }
        }
    }
}

impl fmt::Debug for ComplexRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parse an exact rational: `7`, `-3/4`, `0.125`, `+2`.
pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty number".into());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| format!("bad numerator `{n}`"))?;
        let d: BigInt = d.trim().parse().map_err(|_| format!("bad denominator `{d}`"))?;
        if d.is_zero() {
            return Err("zero denominator".into());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let int_digits = int.trim_start_matches(['+', '-']);
        if !frac.chars().all(|c| c.is_ascii_digit()) || frac.is_empty() {
            return Err(format!("bad decimal `{s}`"));
        }
        let whole: BigInt = if int_digits.is_empty() {
            BigInt::zero()
        } else {
            int_digits.parse().map_err(|_| format!("bad decimal `{s}`"))?
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let frac_val: BigInt = frac.parse().map_err(|_| format!("bad decimal `{s}`"))?;
        let mag = BigRational::new(whole * &scale + frac_val, scale);
        return Ok(if neg { -mag } else { mag });
    }
    let n: BigInt = s.parse().map_err(|_| format!("bad number `{s}`"))?;
    Ok(BigRational::from_integer(n))
}

impl FromStr for ComplexRat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err("empty complex literal".into());
        }
        let Some(body) = t.strip_suffix('i') else {
            return Ok(ComplexRat::from_real(parse_rational(&t)?));
        };
        // split at the last sign that is not the leading one
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(_, c)| c == '+' || c == '-')
            .map(|(k, _)| k)
            .last();
        let (re_part, im_part) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("", body),
        };
        let im = match im_part {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            other => parse_rational(other)?,
        };
        let re = if re_part.is_empty() { BigRational::zero() } else { parse_rational(re_part)? };
        Ok(ComplexRat { re, im })
    }
}

/// Integers that fit in `i64` serialize as JSON numbers, others as strings.
fn ser_int<S: SerializeTuple>(t: &mut S, n: &BigInt) -> Result<(), S::Error> {
    match n.to_i64() {
        Some(v) => t.serialize_element(&v),
        None => t.serialize_element(&n.to_string()),
    }
}

impl Serialize for ComplexRat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut t = serializer.serialize_tuple(4)?;
        ser_int(&mut t, self.re.numer())?;
        ser_int(&mut t, self.re.denom())?;
        ser_int(&mut t, self.im.numer())?;
        ser_int(&mut t, self.im.denom())?;
        t.end()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum IntRepr {
    Small(i64),
    Text(String),
}

impl IntRepr {
    fn into_bigint<E: de::Error>(self) -> Result<BigInt, E> {
        match self {
            IntRepr::Small(v) => Ok(v.into()),
            IntRepr::Text(s) => s.trim().parse().map_err(|_| E::custom(format!("bad integer `{s}`"))),
        }
    }
}

impl<'de> Deserialize<'de> for ComplexRat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = ComplexRat;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("[re_num, re_den, im_num, im_den]")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<ComplexRat, A::Error> {
                let mut parts = Vec::with_capacity(4);
                while let Some(x) = seq.next_element::<IntRepr>()? {
                    parts.push(x.into_bigint::<A::Error>()?);
                }
                if parts.len() != 4 {
                    return Err(de::Error::invalid_length(parts.len(), &self));
                }
                if parts[1].is_zero() || parts[3].is_zero() {
                    return Err(de::Error::custom("zero denominator"));
                }
                let mut it = parts.into_iter();
                let (rn, rd, inn, id) =
                    (it.next().unwrap(), it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
                Ok(ComplexRat { re: BigRational::new(rn, rd), im: BigRational::new(inn, id) })
            }
        }
        deserializer.deserialize_seq(V)
    }
}
