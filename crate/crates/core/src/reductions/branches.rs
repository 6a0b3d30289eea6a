//! The three branches of the reduction, down to a binary gadget.

use num_traits::{One, Zero};

use super::gadgets::{one_a_zero_b, one_xyz, or_from_implies, zero_ab_one};
use super::{Branch, Builder, Goal, ReductionTrace, TARGET};
use crate::classify::{has_imp_support, imp_factor_list, is_degenerate, is_in_ed, is_nonzero, FactorKind};
use crate::complex::ComplexRat;
use crate::constraint::Constraint;
use crate::construct::StepOp;
use crate::error::{Error, Result};
use crate::structure::{good_factor_list, nz_binary_witness, reduce_arity_good, sweep};

/// Largest number of candidate minors tried by the fallback search, as a power of two.
const MINOR_SEARCH_CAP: usize = 20;

fn run_ops(b: &mut Builder, name: &str, ops: &[StepOp]) -> Result<String> {
    let mut cur = name.to_string();
    for op in ops {
        cur = b.op(op.clone(), &[&cur])?;
    }
    Ok(cur)
}

fn normalize_step(b: &mut Builder, name: &str, lambda: ComplexRat) -> Result<String> {
    if lambda.is_one() {
        return Ok(name.to_string());
    }
    b.begin("normalize", &[name]);
    let g = b.op(StepOp::Normalization { lambda }, &[name])?;
    Ok(b.finish(&g))
}

fn binary_entries(c: &Constraint) -> [ComplexRat; 4] {
    [c.at(0).clone(), c.at(1).clone(), c.at(2).clone(), c.at(3).clone()]
}

fn imp_support(c: &Constraint) -> Result<bool> {
    Ok(has_imp_support(c)?.holds())
}

pub fn reduce_imp_branch(f: &Constraint) -> Result<ReductionTrace> {
    if f.arity() == 0 || !imp_support(f)? {
        return Err(Error::Precondition("imp branch needs imp support".into()));
    }
    if let Some(l) = is_in_ed(f) {
        return Err(Error::Precondition(format!("f is in ED ({l})")));
    }
    let mut b = Builder::new(f);
    imp_rec(&mut b, TARGET)?;
    b.into_trace(f, Branch::Imp, Goal::Or)
}

fn imp_rec(b: &mut Builder, name: &str) -> Result<String> {
    let f = b.table(name).clone();
    let k = f.arity();
    if k < 2 {
        return Err(Error::Invalid(format!("imp branch reached arity {k}, which is always in ED")));
    }
    if k == 2 {
        return imp_binary(b, name);
    }
    let next = match sweep(&f)? {
        None => return Err(Error::Invalid(format!("{f} is a scaled relation in IMP ∩ ED"))),
        Some(sr) if sr.removed() > 0 => {
            b.begin("sweep", &[name]);
            let g = run_ops(b, name, &sr.steps)?;
            b.claim(&g, sr.g.clone())?;
            b.finish(&g)
        }
        Some(_) => match good_factor_list(&f)? {
            None => {
                // a variable outside every Implies factor is unconstrained in R_f
                let l = imp_factor_list(&f.underlying_relation());
                let v = (0..k)
                    .find(|&v| !l.factors.iter().any(|fac| fac.kind == FactorKind::Implies && fac.vars.contains(&v)))
                    .ok_or_else(|| Error::Invalid("isolated node without a free variable".into()))?;
                b.begin("free-variable pin", &[name]);
                let g = b.op(StepOp::Pinning { i: v + 1, c: 0 }, &[name])?;
                b.finish(&g)
            }
            Some((l, _)) => {
                let r = reduce_arity_good(&f, &l)?;
                b.begin(&format!("arity reduction ({:?})", r.case), &[name]);
                let g = run_ops(b, name, &r.steps)?;
                b.claim(&g, r.h.clone())?;
                b.finish(&g)
            }
        },
    };
    let h = b.table(&next).clone();
    if h.arity() >= k || is_in_ed(&h).is_some() {
        return Err(Error::Invalid(format!("imp-branch step from {f} produced {h}, losing the invariant")));
    }
    if imp_support(&h)? {
        imp_rec(b, &next)
    } else if is_nonzero(&h) {
        // e.g. EQ(x1,x2)·g(x1,x3) sweeps to an NZ binary
        nz_binary(b, &next)
    } else if h.arity() == 2 {
        no_imp_binary(b, &next)
    } else {
        let g = extract_minor(b, &next)?;
        dispatch_binary(b, &g)
    }
}

/// `(a,0,c,d)` or `(a,b,0,d)` with `ad ≠ 0`.
fn imp_binary(b: &mut Builder, name: &str) -> Result<String> {
    let t = b.table(name).clone();
    if t == Constraint::implies() {
        return or_from_implies(b, name);
    }
    let [a, x, y, d] = binary_entries(&t);
    if (&a * &d).is_zero() || x.is_zero() == y.is_zero() {
        return Err(Error::Invalid(format!("{t} is not an imp-support binary outside ED")));
    }
    let g = normalize_step(b, name, a.inv().unwrap())?;
    if *b.table(&g) == Constraint::implies() {
        return or_from_implies(b, &g);
    }
    one_a_zero_b(b, &g)
}

pub fn reduce_nz_branch(f: &Constraint) -> Result<ReductionTrace> {
    if !is_nonzero(f) {
        return Err(Error::Precondition("NZ branch needs f ∈ NZ".into()));
    }
    if let Some(l) = is_degenerate(f) {
        return Err(Error::Precondition(format!("f is degenerate ({l})")));
    }
    let mut b = Builder::new(f);
    nz_binary(&mut b, TARGET)?;
    b.into_trace(f, Branch::Nz, Goal::Or)
}

fn nz_binary(b: &mut Builder, name: &str) -> Result<String> {
    let w = nz_binary_witness(b.table(name))?;
    b.begin("nz witness", &[name]);
    let h = run_ops(b, name, &w.steps)?;
    b.claim(&h, w.h.clone())?;
    let h = b.finish(&h);
    one_xyz(b, &h)
}

pub fn reduce_no_imp_branch(f: &Constraint) -> Result<ReductionTrace> {
    if f.arity() == 0 || f.is_zero() || imp_support(f)? || is_nonzero(f) {
        return Err(Error::Precondition("no-imp branch needs f ∉ NZ without imp support".into()));
    }
    if let Some(l) = is_in_ed(f) {
        return Err(Error::Precondition(format!("f is in ED ({l})")));
    }
    let mut b = Builder::new(f);
    let g = if f.arity() == 2 { TARGET.to_string() } else { extract_minor(&mut b, TARGET)? };
    dispatch_binary(&mut b, &g)?;
    b.into_trace(f, Branch::NoImp, Goal::Or)
}

/// Any binary outside ED.
fn dispatch_binary(b: &mut Builder, name: &str) -> Result<String> {
    let g = b.table(name).clone();
    if is_in_ed(&g).is_some() {
        return Err(Error::Invalid(format!("binary minor {g} is in ED")));
    }
    if imp_support(&g)? {
        imp_binary(b, name)
    } else if is_nonzero(&g) {
        nz_binary(b, name)
    } else {
        no_imp_binary(b, name)
    }
}

/// `(0,b,c,d)` or `(a,b,c,0)` with `bc ≠ 0` and `ad = 0`, not both zero.
fn no_imp_binary(b: &mut Builder, name: &str) -> Result<String> {
    let [a, x, y, d] = binary_entries(b.table(name));
    if x.is_zero() || y.is_zero() || !(&a * &d).is_zero() || (a.is_zero() && d.is_zero()) {
        return Err(Error::Invalid(format!("{} is not a no-imp binary outside ED", b.table(name))));
    }
    let lambda = if a.is_zero() { d.inv().unwrap() } else { a.inv().unwrap() };
    let g = normalize_step(b, name, lambda)?;
    zero_ab_one(b, &g)
}

#[derive(Clone, Debug, PartialEq)]
enum Choice {
    Pin(u8),
    Link(usize),
    Project,
    Weighted(Constraint),
}

/// Eliminate every variable except `p < q` as planned; returns ops with optional helpers.
fn plan_ops(k: usize, plan: &[(usize, Choice)]) -> Vec<(StepOp, Option<Constraint>)> {
    let mut alive: Vec<usize> = (0..k).collect();
    let mut order = plan.to_vec();
    order.sort_by_key(|a| std::cmp::Reverse(a.0));
    let mut ops = Vec::new();
    for (v, ch) in order {
        let i = alive.iter().position(|&x| x == v).unwrap() + 1;
        match ch {
            Choice::Pin(c) => ops.push((StepOp::Pinning { i, c }, None)),
            Choice::Link(t) => {
                let j = alive.iter().position(|&x| x == t).unwrap() + 1;
                ops.push((StepOp::Linking { i, j }, None));
            }
            Choice::Project => ops.push((StepOp::Projection { i }, None)),
            Choice::Weighted(u) => {
                let n = alive.len();
                ops.push((StepOp::Multiplication { scope1: (1..=n).collect(), scope2: vec![i], arity: n }, Some(u)));
                ops.push((StepOp::Projection { i }, None));
            }
        }
        alive.retain(|&x| x != v);
    }
    ops
}

fn eval_ops(f: &Constraint, ops: &[(StepOp, Option<Constraint>)]) -> Result<Constraint> {
    let mut g = f.clone();
    for (op, u) in ops {
        g = match u {
            Some(u) => op.apply(&[&g, u])?,
            None => op.apply(&[&g])?,
        };
    }
    Ok(g)
}

fn emit_ops(b: &mut Builder, name: &str, gadget: &str, ops: &[(StepOp, Option<Constraint>)]) -> Result<String> {
    b.begin(gadget, &[name]);
    let mut cur = name.to_string();
    for (op, u) in ops {
        cur = match u {
            Some(u) => {
                let h = b.helper(u.clone());
                b.op(op.clone(), &[&cur, &h])?
            }
            None => b.op(op.clone(), &[&cur])?,
        };
    }
    Ok(b.finish(&cur))
}

fn bits(x: usize, k: usize) -> Vec<u8> {
    (0..k).map(|v| ((x >> (k - 1 - v)) & 1) as u8).collect()
}

/// A binary minor of `f` outside ED: first by pinning and linking along a
/// meet/join witness pair, then by a search that also allows projections.
fn extract_minor(b: &mut Builder, name: &str) -> Result<String> {
    let f = b.table(name).clone();
    let k = f.arity();
    let rel = f.underlying_relation();
    let members: Vec<usize> = rel.iter().collect();
    for (n, &a) in members.iter().enumerate() {
        for &c in &members[n + 1..] {
            if rel.contains(a & c) && rel.contains(a | c) {
                continue;
            }
            let (av, cv) = (bits(a, k), bits(c, k));
            let Some(i) = (0..k).find(|&v| (av[v], cv[v]) == (0, 1)) else { continue };
            let Some(j) = (0..k).find(|&v| (av[v], cv[v]) == (1, 0)) else { continue };
            let plan: Vec<(usize, Choice)> = (0..k)
                .filter(|&v| v != i && v != j)
                .map(|v| {
                    let ch = match (av[v], cv[v]) {
                        (x, y) if x == y => Choice::Pin(x),
                        (0, 1) => Choice::Link(i),
                        _ => Choice::Link(j),
                    };
                    (v, ch)
                })
                .collect();
            let ops = plan_ops(k, &plan);
            if is_in_ed(&eval_ops(&f, &ops)?).is_none() {
                return emit_ops(b, name, "witness minor", &ops);
            }
        }
    }
    let rest = k - 2;
    let options = 7usize;
    if (rest as f64) * (options as f64).log2() > MINOR_SEARCH_CAP as f64 {
        return Err(Error::Budget { what: "binary minor search".into(), needed: rest * 3, cap: MINOR_SEARCH_CAP });
    }
    for p in 0..k {
        for q in p + 1..k {
            let others: Vec<usize> = (0..k).filter(|&v| v != p && v != q).collect();
            let choices = [
                Choice::Pin(0),
                Choice::Pin(1),
                Choice::Link(p),
                Choice::Link(q),
                Choice::Project,
                Choice::Weighted(Constraint::from_ints(1, &[1, 2])?),
                Choice::Weighted(Constraint::from_ints(1, &[1, -1])?),
            ];
            for code in 0..options.pow(rest as u32) {
                let mut c = code;
                let plan: Vec<(usize, Choice)> = others
                    .iter()
                    .map(|&v| {
                        let ch = choices[c % options].clone();
                        c /= options;
                        (v, ch)
                    })
                    .collect();
                let ops = plan_ops(k, &plan);
                let g = eval_ops(&f, &ops)?;
                if !g.is_zero() && is_in_ed(&g).is_none() {
                    return emit_ops(b, name, "binary minor search", &ops);
                }
            }
        }
    }
    Err(Error::Invalid(format!("no binary minor of {f} lies outside ED")))
}
