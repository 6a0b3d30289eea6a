//! The binary gadgets.

use num_traits::{One, Zero};

use super::{Branch, Builder, Goal, ReductionTrace, TARGET};
use crate::complex::ComplexRat;
use crate::constraint::Constraint;
use crate::construct::StepOp;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `OR` from `NAND` and `[1,-1]`.
    NandToOr,
    /// `NAND` from `OR` and `[1,-1]`.
    OrToNand,
}

/// Which form of a construction to run: as printed, or the version that verifies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Printed,
    Corrected,
}

fn q(n: i64, d: i64) -> ComplexRat {
    ComplexRat::ratio(n, d)
}

fn bin(v: [ComplexRat; 4]) -> Constraint {
    Constraint::new(2, v.to_vec()).expect("four entries")
}

fn mult(s1: &[usize], s2: &[usize], arity: usize) -> StepOp {
    StepOp::Multiplication { scope1: s1.to_vec(), scope2: s2.to_vec(), arity }
}

fn entries(b: &Builder, f: &str) -> Result<[ComplexRat; 4]> {
    let t = b.table(f);
    if t.arity() != 2 {
        return Err(Error::Precondition(format!("binary gadget applied to arity {}", t.arity())));
    }
    Ok([t.at(0).clone(), t.at(1).clone(), t.at(2).clone(), t.at(3).clone()])
}

/// `Σ_{x3} f(x1,x3) f(x3,x2) u(x3)`.
fn chain_sum(b: &mut Builder, f: &str, u: Option<&str>) -> Result<String> {
    let mut t = b.op(mult(&[1, 3], &[3, 2], 3), &[f, f])?;
    if let Some(u) = u {
        t = b.op(mult(&[1, 2, 3], &[3], 3), &[&t, u])?;
    }
    b.op(StepOp::Projection { i: 3 }, &[&t])
}

/// `Σ_{x3} f(x1,x3) f(x3,x2) f(x2,x3) u(x3)`.
fn triple_sum(b: &mut Builder, f: &str, u: &str) -> Result<String> {
    let t = b.op(mult(&[1, 3], &[3, 2], 3), &[f, f])?;
    let t = b.op(mult(&[1, 2, 3], &[2, 3], 3), &[&t, f])?;
    let t = b.op(mult(&[1, 2, 3], &[3], 3), &[&t, u])?;
    b.op(StepOp::Projection { i: 3 }, &[&t])
}

/// `f(x1,x2) f(x2,x1) u(x1) u(x2)`.
fn symmetrize(b: &mut Builder, f: &str, u: Option<&str>) -> Result<String> {
    let mut t = b.op(mult(&[1, 2], &[2, 1], 2), &[f, f])?;
    if let Some(u) = u {
        t = b.op(mult(&[1, 2], &[1], 2), &[&t, u])?;
        t = b.op(mult(&[1, 2], &[2], 2), &[&t, u])?;
    }
    Ok(t)
}

pub(crate) fn normalize(b: &mut Builder, g: &str, lambda: ComplexRat) -> Result<String> {
    if lambda.is_one() {
        return Ok(g.to_string());
    }
    b.op(StepOp::Normalization { lambda }, &[g])
}

fn require(b: &Builder, f: &str, want: &Constraint, what: &str) -> Result<()> {
    if b.table(f) != want {
        return Err(Error::Precondition(format!("{what} expects {want}, got {}", b.table(f))));
    }
    Ok(())
}

pub(crate) fn nand_to_or(b: &mut Builder, f: &str, variant: Variant) -> Result<String> {
    require(b, f, &Constraint::nand(), "nand-or")?;
    b.begin(if variant == Variant::Printed { "nand-or (printed wiring)" } else { "nand-or" }, &[f]);
    let u = b.helper(Constraint::unary(1.into(), (-1).into()));
    let g = match variant {
        Variant::Corrected => chain_sum(b, f, Some(&u))?,
        Variant::Printed => {
            // Σ_{x3} f(x1,x3) f(x3,x1) u(x3), a function of x1 alone
            let t = b.op(mult(&[1, 2], &[2, 1], 2), &[f, f])?;
            let t = b.op(mult(&[1, 2], &[2], 2), &[&t, &u])?;
            b.op(StepOp::Projection { i: 2 }, &[&t])?
        }
    };
    b.claim(&g, Constraint::or())?;
    Ok(b.finish(&g))
}

pub(crate) fn or_to_nand(b: &mut Builder, f: &str) -> Result<String> {
    require(b, f, &Constraint::or(), "or-nand")?;
    b.begin("or-nand", &[f]);
    let u = b.helper(Constraint::unary(1.into(), (-1).into()));
    let g = chain_sum(b, f, Some(&u))?;
    b.claim(&g, Constraint::from_ints(2, &[-1, -1, -1, 0])?)?;
    let h = normalize(b, &g, (-1).into())?;
    b.claim(&h, Constraint::nand())?;
    Ok(b.finish(&h))
}

/// `(0,a,b,1)` gives `OR` directly; `(1,a,b,0)` gives `NAND`, then `OR`.
pub(crate) fn zero_ab_one(b: &mut Builder, f: &str) -> Result<String> {
    let [w, x, y, z] = entries(b, f)?;
    if (x.clone() * &y).is_zero() {
        return Err(Error::Precondition("0ab1 needs ab ≠ 0".into()));
    }
    let ab = &x * &y;
    let s = &ab * &ab;
    let zero = ComplexRat::zero();
    if w.is_zero() && z.is_one() {
        b.begin("0ab1", &[f]);
        let u = b.helper(Constraint::unary(1.into(), ab));
        let g = symmetrize(b, f, Some(&u))?;
        b.claim(&g, bin([zero, s.clone(), s.clone(), s.clone()]))?;
        let h = normalize(b, &g, s.inv().unwrap())?;
        b.claim(&h, Constraint::or())?;
        Ok(b.finish(&h))
    } else if w.is_one() && z.is_zero() {
        b.begin("1ab0", &[f]);
        let u = b.helper(Constraint::unary(ab, 1.into()));
        let g = symmetrize(b, f, Some(&u))?;
        b.claim(&g, bin([s.clone(), s.clone(), s.clone(), zero]))?;
        let h = normalize(b, &g, s.inv().unwrap())?;
        b.claim(&h, Constraint::nand())?;
        b.finish(&h);
        nand_to_or(b, &h, Variant::Corrected)
    } else {
        Err(Error::Precondition(format!("0ab1 expects (0,a,b,1) or (1,a,b,0), got {}", b.table(f))))
    }
}

pub(crate) fn zero_ab_zero(b: &mut Builder, f: &str) -> Result<String> {
    let [w, x, y, z] = entries(b, f)?;
    if !w.is_zero() || !z.is_zero() || x.is_zero() || y.is_zero() {
        return Err(Error::Precondition(format!("0ab0 expects (0,a,b,0) with ab ≠ 0, got {}", b.table(f))));
    }
    b.begin("0ab0", &[f]);
    let g = symmetrize(b, f, None)?;
    let ab = &x * &y;
    b.claim(&g, bin([ComplexRat::zero(), ab.clone(), ab.clone(), ComplexRat::zero()]))?;
    let h = normalize(b, &g, ab.inv().unwrap())?;
    b.claim(&h, Constraint::xor())?;
    Ok(b.finish(&h))
}

pub(crate) fn implies_from_or(b: &mut Builder, f: &str, variant: Variant) -> Result<String> {
    require(b, f, &Constraint::or(), "implies-from-or")?;
    b.begin(if variant == Variant::Printed { "implies-from-or (printed u2)" } else { "implies-from-or" }, &[f]);
    let u1 = b.helper(Constraint::unary(1.into(), q(-1, 2)));
    let u2_1 = if variant == Variant::Printed { q(-2, 3) } else { q(2, 3) };
    let u2 = b.helper(Constraint::unary(2.into(), u2_1));
    let u3 = b.helper(Constraint::unary(1.into(), q(-1, 8)));
    let g = chain_sum(b, f, None)?;
    b.claim(&g, Constraint::symmetric_ints(&[1, 1, 2]))?;
    let h = triple_sum(b, &g, &u1)?;
    b.claim(&h, bin([q(1, 2), q(-1, 1), q(0, 1), q(-3, 1)]))?;
    let h2 = b.op(mult(&[1, 2], &[1], 2), &[&h, &u2])?;
    b.claim(&h2, Constraint::from_ints(2, &[1, -2, 0, -2])?)?;
    let p = triple_sum(b, &h2, &u3)?;
    b.claim(&p, Constraint::implies())?;
    Ok(b.finish(&p))
}

pub(crate) fn or_from_implies(b: &mut Builder, f: &str) -> Result<String> {
    require(b, f, &Constraint::implies(), "or-from-implies")?;
    b.begin("or-from-implies", &[f]);
    let e = b.op(mult(&[1, 2], &[2, 3], 3), &[f, f])?;
    let e = b.op(mult(&[1, 2, 3], &[3, 1], 3), &[&e, f])?;
    b.claim(&e, Constraint::eq(3))?;
    // p(x1,y1,z1) = Σ EQ3(x2,y2,z2) f(x1,x2) f(y1,y2) f(z1,z2), variables (x1,y1,z1,x2,y2,z2)
    let all = [1, 2, 3, 4, 5, 6];
    let t = b.op(mult(&[1, 3], &[2, 4], 4), &[f, f])?;
    let t = b.op(mult(&[1, 2, 4, 5], &[3, 6], 6), &[&t, f])?;
    let t = b.op(mult(&all, &[4, 5, 6], 6), &[&t, &e])?;
    let t = b.op(StepOp::Projection { i: 6 }, &[&t])?;
    let t = b.op(StepOp::Projection { i: 5 }, &[&t])?;
    let p = b.op(StepOp::Projection { i: 4 }, &[&t])?;
    b.claim(&p, Constraint::symmetric_ints(&[2, 1, 1, 1]))?;
    let h2 = b.op(StepOp::Pinning { i: 1, c: 0 }, &[&p])?;
    b.claim(&h2, Constraint::symmetric_ints(&[2, 1, 1]))?;
    let u1 = b.helper(Constraint::unary(1.into(), (-8).into()));
    let g = triple_sum(b, &h2, &u1)?;
    b.claim(&g, Constraint::from_ints(2, &[0, -6, -4, -7])?)?;
    let u2 = b.helper(Constraint::unary(49.into(), 24.into()));
    let s = symmetrize(b, &g, Some(&u2))?;
    b.claim(&s, Constraint::from_ints(2, &[0, 28224, 28224, 28224])?)?;
    let o = normalize(b, &s, q(1, 28224))?;
    b.claim(&o, Constraint::or())?;
    Ok(b.finish(&o))
}

/// `(1,a,0,b)`, or `(1,0,a,b)` after a permutation, with `ab ≠ 0`.
pub(crate) fn one_a_zero_b(b: &mut Builder, f: &str) -> Result<String> {
    let [w, x, y, z] = entries(b, f)?;
    let shape_err = || Error::Precondition(format!("1a0b expects (1,a,0,b) or (1,0,a,b) with ab ≠ 0, got {}", b.table(f)));
    if !w.is_one() || z.is_zero() {
        return Err(shape_err());
    }
    let (f, a, bb) = if y.is_zero() && !x.is_zero() {
        (f.to_string(), x, z)
    } else if x.is_zero() && !y.is_zero() {
        b.begin("permute", &[f]);
        let g = b.op(StepOp::Permutation { i: 1, j: 2 }, &[f])?;
        (b.finish(&g), y, z)
    } else {
        return Err(shape_err());
    };
    b.begin("1a0b", &[&f]);
    let u = b.helper(Constraint::unary(1.into(), &a / &bb));
    let v = b.helper(Constraint::unary(1.into(), a.pow(3).inv().unwrap()));
    let g = b.op(mult(&[1, 2], &[1], 2), &[&f, &u])?;
    b.claim(&g, bin([1.into(), a.clone(), 0.into(), a]))?;
    let h = triple_sum(b, &g, &v)?;
    b.claim(&h, Constraint::implies())?;
    let h = b.finish(&h);
    or_from_implies(b, &h)
}

/// `(1,x,y,z)` with `xyz ≠ 0` and `z ≠ xy`.
pub(crate) fn one_xyz(b: &mut Builder, f: &str) -> Result<String> {
    let [w, x, y, z] = entries(b, f)?;
    if !w.is_one() || x.is_zero() || y.is_zero() || z.is_zero() {
        return Err(Error::Precondition(format!("1xyz expects (1,x,y,z) with xyz ≠ 0, got {}", b.table(f))));
    }
    let xy = &x * &y;
    if z == xy {
        return Err(Error::Precondition(format!("{} is degenerate (z = xy)", b.table(f))));
    }
    if z == -xy.clone() {
        b.begin("1xy(-xy)", &[f]);
        let u = b.helper(Constraint::unary(1.into(), ComplexRat::from_int(2) / &xy));
        let g = chain_sum(b, f, Some(&u))?;
        let three = ComplexRat::from_int(3);
        b.claim(&g, bin([three.clone(), -x.clone(), -y.clone(), &three * &xy]))?;
        let h = normalize(b, &g, q(1, 3))?;
        b.claim(&h, bin([1.into(), -(&x / &three), -(&y / &three), xy]))?;
        let h = b.finish(&h);
        return one_xyz(b, &h);
    }
    b.begin("1xyz", &[f]);
    let a = -(&x * &z).inv().unwrap();
    let u = b.helper(Constraint::unary(1.into(), a));
    let g = triple_sum(b, f, &u)?;
    let one = ComplexRat::one();
    let g00 = &one - &(&xy / &z);
    let g11 = &(&xy * &y) - &(&(&z * &z) / &x);
    b.claim(&g, bin([g00.clone(), &xy - &z, ComplexRat::zero(), g11]))?;
    let h = normalize(b, &g, g00.inv().unwrap())?;
    let h = b.finish(&h);
    one_a_zero_b(b, &h)
}

fn standalone(target: Constraint, goal: Goal, run: impl FnOnce(&mut Builder) -> Result<String>) -> Result<ReductionTrace> {
    let mut b = Builder::new(&target);
    run(&mut b)?;
    b.into_trace(&target, Branch::Gadget, goal)
}

pub fn gadget_nand_or(direction: Direction, variant: Variant) -> Result<ReductionTrace> {
    match direction {
        Direction::NandToOr => standalone(Constraint::nand(), Goal::Or, |b| nand_to_or(b, TARGET, variant)),
        Direction::OrToNand => standalone(Constraint::or(), Goal::Nand, |b| or_to_nand(b, TARGET)),
    }
}

pub fn gadget_0ab1(f: &Constraint) -> Result<ReductionTrace> {
    standalone(f.clone(), Goal::Or, |b| zero_ab_one(b, TARGET))
}

pub fn gadget_0ab0(f: &Constraint) -> Result<ReductionTrace> {
    standalone(f.clone(), Goal::Xor, |b| zero_ab_zero(b, TARGET))
}

pub fn gadget_implies_from_or(variant: Variant) -> Result<ReductionTrace> {
    standalone(Constraint::or(), Goal::Implies, |b| implies_from_or(b, TARGET, variant))
}

pub fn gadget_or_from_implies() -> Result<ReductionTrace> {
    standalone(Constraint::implies(), Goal::Or, |b| or_from_implies(b, TARGET))
}

pub fn gadget_1a0b(f: &Constraint) -> Result<ReductionTrace> {
    standalone(f.clone(), Goal::Or, |b| one_a_zero_b(b, TARGET))
}

pub fn gadget_1xyz(f: &Constraint) -> Result<ReductionTrace> {
    standalone(f.clone(), Goal::Or, |b| one_xyz(b, TARGET))
}
