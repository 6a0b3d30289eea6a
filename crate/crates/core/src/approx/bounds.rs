//! Rational enclosures of `2^δ`, `π`, `sin x` and `cos x`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Bounds {
    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

pub(crate) fn two_pow(e: i64) -> BigRational {
    let p = BigRational::from_integer(BigInt::one() << e.unsigned_abs());
    if e >= 0 {
        p
    } else {
        p.recip()
    }
}

pub(crate) fn rpow(x: &BigRational, e: usize) -> BigRational {
    num_traits::pow(x.clone(), e)
}

/// Enclosure of `2^x` for rational `x ≥ 0`, of width at most `2^-bits`.
pub fn pow2(x: &BigRational, bits: u32) -> Bounds {
    assert!(!x.is_negative(), "pow2 needs x ≥ 0");
    let k = x.floor();
    let frac = x - &k;
    let scale = BigRational::from_integer(BigInt::one() << k.to_integer().try_into().unwrap_or(0u32) as usize);
    if frac.is_zero() {
        return Bounds { lo: scale.clone(), hi: scale };
    }
    // y = 2^frac in (1, 2): bisect on y^q ≤ 2^p
    let q: usize = frac.denom().try_into().expect("denominator fits in usize");
    let target = BigRational::from_integer(BigInt::one() << usize::try_from(frac.numer()).unwrap());
    let (mut lo, mut hi) = (BigRational::one(), BigRational::from_integer(2.into()));
    let tol = two_pow(-(bits as i64) - 1 - k.to_integer().try_into().unwrap_or(0i64));
    while &hi - &lo > tol {
        let mid = (&lo + &hi) / BigRational::from_integer(2.into());
        if rpow(&mid, q) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Bounds { lo: lo * &scale, hi: hi * &scale }
}

/// Sum of an alternating series with terms of decreasing modulus, stopping
/// once a term drops below `tol`.
fn alternating(mut term: impl FnMut(usize) -> BigRational, tol: &BigRational) -> Bounds {
    let mut s = BigRational::zero();
    let mut j = 0;
    loop {
        let t = term(j);
        if t.abs() <= *tol {
            let s2 = &s + &t;
            return if s <= s2 { Bounds { lo: s, hi: s2 } } else { Bounds { lo: s2, hi: s } };
        }
        s += t;
        j += 1;
    }
}

fn atan_inv(k: i64, tol: &BigRational) -> Bounds {
    let k = BigInt::from(k);
    alternating(
        |j| {
            let e = 2 * j + 1;
            let mag = BigRational::new(BigInt::one(), BigInt::from(e) * num_traits::pow(k.clone(), e));
            if j % 2 == 0 {
                mag
            } else {
                -mag
            }
        },
        tol,
    )
}

/// Enclosure of `π` of width about `2^-bits`, by Machin's formula.
pub fn pi(bits: u32) -> Bounds {
    let tol = two_pow(-(bits as i64) - 6);
    let a = atan_inv(5, &tol);
    let b = atan_inv(239, &tol);
    let (c16, c4) = (BigRational::from_integer(16.into()), BigRational::from_integer(4.into()));
    Bounds { lo: &c16 * &a.lo - &c4 * &b.hi, hi: &c16 * &a.hi - &c4 * &b.lo }
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Enclosures of `sin x` and `cos x` for `0 ≤ x ≤ 1`.
pub fn sin_cos(x: &BigRational, bits: u32) -> (Bounds, Bounds) {
    assert!(!x.is_negative() && *x <= BigRational::one(), "sin_cos needs 0 ≤ x ≤ 1");
    let tol = two_pow(-(bits as i64));
    let series = |offset: usize| {
        alternating(
            |j| {
                let e = 2 * j + offset;
                let mag = rpow(x, e) / BigRational::from_integer(factorial(e));
                if j % 2 == 0 {
                    mag
                } else {
                    -mag
                }
            },
            &tol,
        )
    };
    (series(1), series(0))
}
