//! `2^ε`-approximation of complex values and elimination of a pinning
//! constraint (`Δ0` or `Δ1`) through an approximation oracle.

mod bounds;
mod oracle;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use bounds::{pi, pow2, sin_cos, Bounds};
pub use oracle::{ApproxOracle, ExactOracle, NoisyOracle};

use crate::complex::ComplexRat;
use crate::constraint::Constraint;
use crate::error::{Error, Result};
use crate::frame::{eval_frame, ConstraintFrame};
use bounds::rpow;

const START_BITS: u32 = 32;
/// Undecided comparisons past this precision count as "no" (only ever makes `m` larger).
const MAX_BITS: u32 = 4096;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Whether `w` is a `2^ε`-approximate solution for `F`: `2^-ε ≤ |w/F| ≤ 2^ε`
/// and `|arg(w/F)| ≤ ε`, or `w = 0` when `F = 0`. Needs `0 ≤ ε ≤ 1`.
pub fn is_approx(w: &ComplexRat, f: &ComplexRat, eps: &BigRational) -> bool {
    assert!(!eps.is_negative() && *eps <= BigRational::one(), "is_approx needs 0 ≤ ε ≤ 1, got {eps}");
    if f.is_zero() {
        return w.is_zero();
    }
    if w.is_zero() {
        return false;
    }
    let r = w.checked_div(f).expect("F ≠ 0");
    // |r|² = N: 2^{-2p/q} ≤ N ≤ 2^{2p/q}  ⟺  N^q ≤ 4^p ≤ ...
    let n = r.norm_sqr();
    let q: usize = eps.denom().try_into().expect("ε denominator fits in usize");
    let p: usize = eps.numer().try_into().expect("ε numerator fits in usize");
    let nq = rpow(&n, q);
    let four_p = BigRational::from_integer(BigInt::one() << (2 * p));
    if nq > four_p || nq * &four_p < BigRational::one() {
        return false;
    }
    let (a, b) = (&r.re, r.im.abs());
    if b.is_zero() {
        return a.is_positive();
    }
    // ε ≤ 1 < π/2, so the argument test needs a > 0 and |b|·cos ε ≤ a·sin ε
    if !a.is_positive() || eps.is_zero() {
        return false;
    }
    let mut bits = START_BITS;
    loop {
        let (s, c) = sin_cos(eps, bits);
        if &b * &c.hi <= a * &s.lo {
            return true;
        }
        if &b * &c.lo > a * &s.hi {
            return false;
        }
        // tan ε is irrational for rational ε ≠ 0, so this terminates
        bits *= 2;
    }
}

/// `|Ω|² = Π_a max(1, max_x |f_a(x)|²)`.
pub fn omega_sq(frame: &ConstraintFrame) -> BigRational {
    frame
        .resolved()
        .iter()
        .map(|(c, _)| c.values().iter().map(ComplexRat::norm_sqr).fold(BigRational::one(), |m, x| if x > m { x } else { m }))
        .product()
}

fn check_params(lambda: &ComplexRat, eps: &BigRational, d: &BigRational) -> Result<()> {
    let l = lambda.norm_sqr();
    if l.is_zero() || l >= BigRational::one() {
        return Err(Error::Config(format!("λ = {lambda} must satisfy 0 < |λ| < 1")));
    }
    if !eps.is_positive() || *eps >= BigRational::one() {
        return Err(Error::Config(format!("ε = {eps} must lie in (0,1)")));
    }
    if !d.is_positive() {
        return Err(Error::Config(format!("d = {d} must be positive")));
    }
    Ok(())
}

enum Verdict {
    Yes,
    No,
    Unsure,
}

fn compare(lhs_hi: &BigRational, lhs_lo: &BigRational, rhs_lo: &BigRational, rhs_hi: &BigRational) -> Verdict {
    if lhs_hi <= rhs_lo {
        Verdict::Yes
    } else if lhs_lo > rhs_hi {
        Verdict::No
    } else {
        Verdict::Unsure
    }
}

fn certify(mut step: impl FnMut(u32) -> Verdict) -> bool {
    let mut bits = START_BITS;
    while bits <= MAX_BITS {
        match step(bits) {
            Verdict::Yes => return true,
            Verdict::No => return false,
            Verdict::Unsure => bits *= 2,
        }
    }
    false
}

/// Smallest `m ≥ 1` with `2^{n+δ}|Ω||λ|^m ≤ (1 - 2^{-δ})d` and
/// `2^n|Ω||λ|^m ≤ (π/3)δd`, where `δ = ε/2`, given `|Ω|²`.
pub fn choose_m_sq(n: usize, omega_sq: &BigRational, lambda: &ComplexRat, eps: &BigRational, d: &BigRational) -> Result<usize> {
    check_params(lambda, eps, d)?;
    let delta = eps / rat(2);
    let l = lambda.norm_sqr();
    let d2 = d * d;
    let mut x = rpow(&rat(4), n) * omega_sq * &l;
    // enclosures are reused across m
    let mut t_cache: BTreeMap<u32, Bounds> = BTreeMap::new();
    let mut pi_cache: BTreeMap<u32, Bounds> = BTreeMap::new();
    for m in 1.. {
        // x = 4^n |Ω|² |λ|^{2m}; both sides squared
        let cond_i = certify(|bits| {
            let t = t_cache.entry(bits).or_insert_with(|| pow2(&delta, bits));
            let lhs = |t: &BigRational| &x * t * t;
            let rhs = |t: &BigRational| {
                let g = BigRational::one() - t.recip();
                &g * &g * &d2
            };
            compare(&lhs(&t.hi), &lhs(&t.lo), &rhs(&t.lo), &rhs(&t.hi))
        });
        let cond_ii = cond_i
            && certify(|bits| {
                let p = pi_cache.entry(bits).or_insert_with(|| pi(bits));
                let rhs = |p: &BigRational| {
                    let g = p * &delta / rat(3);
                    &g * &g * &d2
                };
                compare(&x, &x, &rhs(&p.lo), &rhs(&p.hi))
            });
        if cond_ii {
            return Ok(m);
        }
        x *= &l;
    }
    unreachable!()
}

/// [`choose_m_sq`] for rational `|Ω|`.
pub fn choose_m(n: usize, omega: &BigRational, lambda: &ComplexRat, eps: &BigRational, d: &BigRational) -> Result<usize> {
    choose_m_sq(n, &(omega * omega), lambda, eps, d)
}

/// Which constant constraint is eliminated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pin {
    Delta0,
    Delta1,
}

impl Pin {
    pub fn table(self) -> Constraint {
        match self {
            Pin::Delta0 => Constraint::delta0(),
            Pin::Delta1 => Constraint::delta1(),
        }
    }

    /// `[1, λ^m]` for `Δ0`, `[λ^m, 1]` for `Δ1`.
    pub fn replacement(self, lambda_m: ComplexRat) -> Constraint {
        match self {
            Pin::Delta0 => Constraint::unary(ComplexRat::one(), lambda_m),
            Pin::Delta1 => Constraint::unary(lambda_m, ComplexRat::one()),
        }
    }
}

/// Where the lower bound `d` on a nonzero `|csp_Ω|` comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DBound {
    Given(BigRational),
    /// The largest `2^-k ≤ min(1/2, |csp_Ω|/2)`, from the exact evaluator.
    Exact,
}

#[derive(Clone, Debug)]
pub struct PinningConfig {
    pub epsilon: BigRational,
    pub lambda: ComplexRat,
    pub d: Option<DBound>,
    /// `None` picks `Δ0` if the frame uses it, else `Δ1`.
    pub pin: Option<Pin>,
}

impl PinningConfig {
    pub fn new(epsilon: BigRational) -> Self {
        PinningConfig { epsilon, lambda: ComplexRat::ratio(1, 2), d: Some(DBound::Exact), pin: None }
    }
}

#[derive(Clone, Debug)]
pub struct PinningRun {
    pub pin: Pin,
    /// `Ω` with every pinned variable merged into one, pinned once.
    pub merged: ConstraintFrame,
    /// `Ω_m`: the pin replaced by its powered unary.
    pub omega_m: ConstraintFrame,
    pub m: usize,
    pub d: BigRational,
    pub delta: BigRational,
    pub omega_sq: BigRational,
    /// The oracle's answer on `Ω_m`.
    pub z: ComplexRat,
    pub output: ComplexRat,
}

fn names_with_table(frame: &ConstraintFrame, t: &Constraint) -> BTreeSet<String> {
    frame.library().iter().filter(|(_, c)| *c == t).map(|(n, _)| n.clone()).collect()
}

/// Merge all variables pinned by `pin` into one and keep a single pin on it.
/// Returns the new frame and the merged variable.
pub fn merge_pinned(frame: &ConstraintFrame, pin: Pin) -> Result<(ConstraintFrame, usize)> {
    let names = names_with_table(frame, &pin.table());
    let pinned: BTreeSet<usize> = frame.applications().iter().filter(|a| names.contains(&a.name)).map(|a| a.scope[0]).collect();
    let Some(&root) = pinned.first() else {
        return Err(Error::Precondition(format!("frame has no {pin:?} application")));
    };
    let mut map = vec![0; frame.num_vars()];
    let mut next = 0;
    for (v, slot) in map.iter_mut().enumerate() {
        if pinned.contains(&v) && v != root {
            continue;
        }
        *slot = next;
        next += 1;
    }
    let target = map[root];
    for &v in &pinned {
        map[v] = target;
    }
    let mut out = ConstraintFrame::new(next);
    for a in frame.applications().iter().filter(|a| !names.contains(&a.name)) {
        let scope: Vec<usize> = a.scope.iter().map(|&v| map[v]).collect();
        out.apply(&a.name, frame.library()[&a.name].clone(), &scope)?;
    }
    let name = out.define_fresh(if pin == Pin::Delta0 { "Delta0" } else { "Delta1" }, pin.table());
    out.add(&name, &[target])?;
    Ok((out, target))
}

fn exact_d(frame: &ConstraintFrame) -> Result<BigRational> {
    let v = eval_frame(frame)?;
    let half = BigRational::new(1.into(), 2.into());
    if v.is_zero() {
        return Ok(half);
    }
    // largest 2^-k with 4·2^{-2k} ≤ |v|²
    let n = v.norm_sqr();
    let mut d = half;
    while &d * &d * rat(4) > n {
        d /= rat(2);
    }
    Ok(d)
}

/// Approximate `csp_Ω` with one oracle query on `Ω_m`, thresholding at `d`.
pub fn eliminate_pinning(frame: &ConstraintFrame, oracle: &mut dyn ApproxOracle, cfg: &PinningConfig) -> Result<PinningRun> {
    let pin = match cfg.pin {
        Some(p) => p,
        None if names_with_table(frame, &Constraint::delta0()).iter().any(|n| frame.occurrences(n) > 0) => Pin::Delta0,
        None => Pin::Delta1,
    };
    let d = match &cfg.d {
        None => return Err(Error::Config("no lower bound d was given".into())),
        Some(DBound::Given(d)) => d.clone(),
        Some(DBound::Exact) => exact_d(frame)?,
    };
    check_params(&cfg.lambda, &cfg.epsilon, &d)?;
    let (merged, x) = merge_pinned(frame, pin)?;
    let delta = &cfg.epsilon / rat(2);
    let osq = omega_sq(&merged);
    let m = choose_m_sq(merged.num_vars(), &osq, &cfg.lambda, &cfg.epsilon, &d)?;

    let pin_names = names_with_table(&merged, &pin.table());
    let mut omega_m = ConstraintFrame::new(merged.num_vars());
    for a in merged.applications().iter().filter(|a| !pin_names.contains(&a.name)) {
        omega_m.apply(&a.name, merged.library()[&a.name].clone(), &a.scope)?;
    }
    let u = omega_m.define_fresh("u_m", pin.replacement(cfg.lambda.pow(m as u64)));
    omega_m.add(&u, &[x])?;

    let z = oracle.query(&omega_m, &delta)?;
    let output = if z.norm_sqr() < &d * &d { ComplexRat::zero() } else { z.clone() };
    Ok(PinningRun { pin, merged, omega_m, m, d, delta, omega_sq: osq, z, output })
}

/// `K = h(1)` (`h(0)` for `Δ1`) such that `csp_Ω = csp_{Ω_m} - λ^m K`.
pub fn residual(run: &PinningRun) -> Result<ComplexRat> {
    let mut free = ConstraintFrame::new(run.merged.num_vars());
    let pin_names = names_with_table(&run.merged, &run.pin.table());
    let mut x = None;
    for a in run.merged.applications() {
        if pin_names.contains(&a.name) {
            x = Some(a.scope[0]);
        } else {
            free.apply(&a.name, run.merged.library()[&a.name].clone(), &a.scope)?;
        }
    }
    let x = x.expect("merged frame keeps its pin");
    let other = match run.pin {
        Pin::Delta0 => Pin::Delta1,
        Pin::Delta1 => Pin::Delta0,
    };
    let name = free.define_fresh("pin", other.table());
    free.add(&name, &[x])?;
    eval_frame(&free)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn approx_examples() {
        assert!(is_approx(&ComplexRat::zero(), &ComplexRat::zero(), &q(1, 10)));
        assert!(!is_approx(&ComplexRat::one(), &ComplexRat::zero(), &q(1, 10)));
        // 1.0352 < 2^0.05 ≈ 1.03526
        assert!(is_approx(&ComplexRat::ratio(10352, 10000), &ComplexRat::one(), &q(1, 10)));
        assert!(!is_approx(&ComplexRat::ratio(10353, 10000), &ComplexRat::one(), &q(1, 20)));
        assert!(!is_approx(&ComplexRat::from_int(-1), &ComplexRat::one(), &q(1, 2)));
        // arg(1 + i/10) ≈ 0.0997
        let w = ComplexRat::from_parts(1, 1, 1, 10);
        assert!(is_approx(&w, &ComplexRat::one(), &q(1, 10)));
        assert!(!is_approx(&w, &ComplexRat::one(), &q(99, 1000)));
    }

    #[test]
    fn choose_m_examples() {
        let l = ComplexRat::ratio(1, 2);
        assert_eq!(choose_m(3, &rat(2), &l, &q(1, 10), &q(1, 2)).unwrap(), 10);
        assert_eq!(choose_m(3, &rat(2), &l, &q(1, 10), &rat(1)).unwrap(), 9);
        let mut last = 0;
        for e in [q(1, 2), q(1, 10), q(1, 50)] {
            let m = choose_m(3, &rat(2), &l, &e, &q(1, 2)).unwrap();
            assert!(m >= last);
            last = m;
        }
        assert!(matches!(choose_m(3, &rat(2), &ComplexRat::one(), &q(1, 10), &rat(1)), Err(Error::Config(_))));
    }

    #[test]
    fn pinning_examples() {
        let mut f = ConstraintFrame::new(2);
        f.apply("Implies", Constraint::implies(), &[0, 1]).unwrap();
        f.apply("Delta0", Constraint::delta0(), &[0]).unwrap();
        let cfg = PinningConfig::new(q(1, 10));
        let run = eliminate_pinning(&f, &mut ExactOracle::default(), &cfg).unwrap();
        assert!(is_approx(&run.output, &2.into(), &q(1, 10)));

        let mut g = ConstraintFrame::new(1);
        g.apply("Delta1", Constraint::delta1(), &[0]).unwrap();
        g.apply("Delta0", Constraint::delta0(), &[0]).unwrap();
        let run = eliminate_pinning(&g, &mut NoisyOracle::new(7), &cfg).unwrap();
        assert!(run.output.is_zero());

        let mut h = ConstraintFrame::new(3);
        h.apply("OR", Constraint::or(), &[0, 1]).unwrap();
        h.apply("OR", Constraint::or(), &[1, 2]).unwrap();
        h.apply("Delta1", Constraint::delta1(), &[0]).unwrap();
        h.apply("Delta1", Constraint::delta1(), &[2]).unwrap();
        let run = eliminate_pinning(&h, &mut NoisyOracle::new(1), &cfg).unwrap();
        assert_eq!(run.pin, Pin::Delta1);
        assert_eq!(run.merged.num_vars(), 2);
        assert!(is_approx(&run.output, &eval_frame(&h).unwrap(), &q(1, 10)));

        let no_d = PinningConfig { d: None, ..cfg };
        assert!(matches!(eliminate_pinning(&f, &mut ExactOracle::default(), &no_d), Err(Error::Config(_))));
    }
}
