//! Generators, brute-force oracles and the acceptance checks shared by the
//! integration tests and the `acceptance` runner.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};
use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sharpcsp::approx::{choose_m, eliminate_pinning, is_approx, omega_sq, residual, NoisyOracle, PinningConfig};
use sharpcsp::classify::{has_imp_support, is_degenerate, is_in_ed, is_nonzero, relation_imp_support};
use sharpcsp::construct::{power, Env, StepOp, TStep};
use sharpcsp::ed_solver::solve_ed_auto;
use sharpcsp::frame::{eval_frame, frame_to_is, is_to_frame, rewrite_frame, swap_roles, ConstraintFrame, WeightedGraph};
use sharpcsp::reductions::{
    branch_of, gadget_0ab1, gadget_1a0b, gadget_1xyz, gadget_implies_from_or, gadget_nand_or, gadget_or_from_implies,
    reduce, reduce_imp_branch, reduce_no_imp_branch, reduce_nz_branch, Branch, Direction, ReductionTrace, Variant,
};
use sharpcsp::{ComplexRat, Constraint, Error, Relation};

pub type Check = Result<String, String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(n: i64, d: i64) -> ComplexRat {
    ComplexRat::ratio(n, d)
}

pub fn rq(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn ints(arity: usize, v: &[i64]) -> Constraint {
    Constraint::from_ints(arity, v).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------- generators ----------

/// Small Gaussian rational, sometimes zero.
pub fn gauss(r: &mut impl Rng) -> ComplexRat {
    let re = ComplexRat::ratio(r.gen_range(-3..=3), r.gen_range(1..=3));
    if r.gen_bool(0.6) {
        re
    } else {
        re + ComplexRat::i() * ComplexRat::ratio(r.gen_range(-3..=3), r.gen_range(1..=2))
    }
}

pub fn nonzero_gauss(r: &mut impl Rng) -> ComplexRat {
    loop {
        let z = gauss(r);
        if !z.is_zero() {
            return z;
        }
    }
}

/// The entry alphabet `{0, 1, -1, 2, i}`.
pub fn alphabet() -> Vec<ComplexRat> {
    vec![0.into(), 1.into(), (-1).into(), 2.into(), ComplexRat::i()]
}

pub fn random_constraint(r: &mut impl Rng, k: usize) -> Constraint {
    Constraint::from_fn(k, |_| gauss(r))
}

pub fn random_nz(r: &mut impl Rng, k: usize) -> Constraint {
    Constraint::from_fn(k, |_| nonzero_gauss(r))
}

fn bit(x: usize, v: usize, k: usize) -> usize {
    (x >> (k - 1 - v)) & 1
}

pub fn random_unary(r: &mut impl Rng, allow_zero: bool) -> [ComplexRat; 2] {
    if allow_zero {
        [gauss(r), gauss(r)]
    } else {
        [nonzero_gauss(r), nonzero_gauss(r)]
    }
}

pub fn random_dg(r: &mut impl Rng, k: usize, allow_zero: bool) -> Constraint {
    let us: Vec<[ComplexRat; 2]> = (0..k).map(|_| random_unary(r, allow_zero)).collect();
    let c = if allow_zero { gauss(r) } else { nonzero_gauss(r) };
    Constraint::from_fn(k, |x| (0..k).fold(c.clone(), |acc, v| acc * us[v][bit(x, v, k)].clone()))
}

/// Unaries times random `EQ`/`XOR` factors on pairs.
pub fn random_ed(r: &mut impl Rng, k: usize) -> Constraint {
    let zeros = r.gen_bool(0.3);
    let base = random_dg(r, k, zeros);
    let mut pairs = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            match r.gen_range(0..4) {
                0 => pairs.push((a, b, 0)),
                1 => pairs.push((a, b, 1)),
                _ => {}
            }
        }
    }
    Constraint::from_fn(k, |x| {
        if pairs.iter().all(|&(a, b, p)| bit(x, a, k) ^ bit(x, b, k) == p) {
            base.at(x).clone()
        } else {
            ComplexRat::zero()
        }
    })
}

/// Masks of the atoms `Δ0(x_v)`, `Δ1(x_v)`, `Implies(x_a, x_b)` with `a ≠ b`.
pub fn imp_atoms(k: usize) -> Vec<u64> {
    let n = 1usize << k;
    let mask = |p: &dyn Fn(usize) -> bool| (0..n).filter(|&x| p(x)).fold(0u64, |m, x| m | (1 << x));
    let mut out = Vec::new();
    for v in 0..k {
        out.push(mask(&|x| bit(x, v, k) == 0));
        out.push(mask(&|x| bit(x, v, k) == 1));
    }
    for a in 0..k {
        for b in 0..k {
            if a != b {
                out.push(mask(&|x| bit(x, a, k) <= bit(x, b, k)));
            }
        }
    }
    out
}

/// Random weights on a conjunction of at least one atom.
pub fn random_imp(r: &mut impl Rng, k: usize) -> Constraint {
    let atoms = imp_atoms(k);
    let mut m = *atoms.choose(r).unwrap();
    for a in &atoms {
        if r.gen_bool(0.2) {
            m &= a;
        }
    }
    Constraint::from_fn(k, |x| if (m >> x) & 1 == 1 { nonzero_gauss(r) } else { ComplexRat::zero() })
}

pub fn pointwise(f: &Constraint, g: &Constraint) -> Constraint {
    Constraint::from_fn(f.arity(), |x| f.at(x) * g.at(x))
}

/// `f(x) g(y)` on disjoint variables.
pub fn tensor(f: &Constraint, g: &Constraint) -> Constraint {
    let kb = g.arity();
    Constraint::from_fn(f.arity() + kb, |x| f.at(x >> kb) * g.at(x & ((1 << kb) - 1)))
}

fn random_scope(r: &mut impl Rng, n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|_| r.gen_range(0..n)).collect()
}

/// A frame whose constraints are all in ED.
pub fn random_ed_frame(r: &mut impl Rng, n: usize) -> ConstraintFrame {
    let mut f = ConstraintFrame::new(n);
    let apps = r.gen_range(0..=n + 3);
    for j in 0..apps {
        let k = r.gen_range(1..=3.min(n.max(1)));
        let c = match r.gen_range(0..4) {
            0 => Constraint::xor(),
            1 => Constraint::eq(2),
            _ => random_ed(r, k),
        };
        let scope = if r.gen_bool(0.8) {
            let mut vs: Vec<usize> = (0..n).collect();
            vs.shuffle(r);
            if vs.len() >= c.arity() {
                vs.truncate(c.arity());
                vs
            } else {
                random_scope(r, n, c.arity())
            }
        } else {
            random_scope(r, n, c.arity())
        };
        f.apply(&format!("c{j}"), c, &scope).unwrap();
    }
    f
}

pub fn random_frame(r: &mut impl Rng, n: usize, apps: usize, max_arity: usize) -> ConstraintFrame {
    let mut f = ConstraintFrame::new(n);
    for j in 0..apps {
        let k = r.gen_range(1..=max_arity);
        let c = random_constraint(r, k);
        let scope = random_scope(r, n, k);
        f.apply(&format!("o{j}"), c, &scope).unwrap();
    }
    f
}

pub fn random_graph(r: &mut impl Rng, n: usize) -> WeightedGraph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if r.gen_bool(0.35) {
                edges.push((a, b));
            }
        }
    }
    let weights = (0..n).map(|_| random_unary(r, false)).collect();
    WeightedGraph::new(n, edges, weights).unwrap()
}

// ---------- oracles ----------

/// Every mode flattening has rank at most one.
pub fn oracle_dg(f: &Constraint) -> bool {
    let k = f.arity();
    for v in 0..k {
        let s = k - 1 - v;
        let rest: Vec<usize> = (0..1usize << k).filter(|x| (x >> s) & 1 == 0).collect();
        for &y in &rest {
            for &z in &rest {
                let lhs = f.at(y) * f.at(z | (1 << s));
                let rhs = f.at(y | (1 << s)) * f.at(z);
                if lhs != rhs {
                    return false;
                }
            }
        }
    }
    true
}

/// Search over all `EQ`/`XOR` patterns on pairs: `f` vanishes off the
/// pattern's support and is a product of unaries in the class representatives.
pub fn oracle_ed(f: &Constraint) -> bool {
    let k = f.arity();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).collect();
    let n = 1usize << k;
    'pattern: for code in 0..3usize.pow(pairs.len() as u32) {
        let mut c = code;
        let pattern: Vec<(usize, usize, usize)> = pairs
            .iter()
            .filter_map(|&(a, b)| {
                let t = c % 3;
                c /= 3;
                (t > 0).then(|| (a, b, t - 1))
            })
            .collect();
        let supp: Vec<usize> =
            (0..n).filter(|&x| pattern.iter().all(|&(a, b, p)| bit(x, a, k) ^ bit(x, b, k) == p)).collect();
        if (0..n).any(|x| !supp.contains(&x) && !f.at(x).is_zero()) {
            continue;
        }
        if supp.is_empty() {
            return true;
        }
        // class representatives: smallest variable reachable through the pattern
        let mut rep: Vec<usize> = (0..k).collect();
        loop {
            let mut changed = false;
            for &(a, b, _) in &pattern {
                let m = rep[a].min(rep[b]);
                if rep[a] != m || rep[b] != m {
                    rep[a] = m;
                    rep[b] = m;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let reps: Vec<usize> = (0..k).filter(|&v| rep[v] == v).collect();
        let mut table = vec![None; 1 << reps.len()];
        for &x in &supp {
            let key = reps.iter().fold(0, |acc, &v| (acc << 1) | bit(x, v, k));
            if table[key].is_some() {
                continue 'pattern;
            }
            table[key] = Some(f.at(x).clone());
        }
        let Some(vals) = table.into_iter().collect::<Option<Vec<_>>>() else { continue };
        if oracle_dg(&Constraint::new(reps.len(), vals).unwrap()) {
            return true;
        }
    }
    false
}

/// All relations that are a nonempty conjunction of IMP atoms.
pub fn oracle_imp_relations(k: usize) -> HashSet<u64> {
    let atoms = imp_atoms(k);
    let mut seen: HashSet<u64> = atoms.iter().copied().collect();
    let mut work: Vec<u64> = seen.iter().copied().collect();
    while let Some(m) = work.pop() {
        for a in &atoms {
            let x = m & a;
            if seen.insert(x) {
                work.push(x);
            }
        }
    }
    seen
}

/// `Σ_{S independent} Π_x w_x([x ∈ S])`, straight from the definition.
pub fn oracle_is_sum(g: &WeightedGraph) -> ComplexRat {
    let n = g.num_nodes();
    let mut total = ComplexRat::zero();
    'sets: for s in 0..1usize << n {
        for &(a, b) in g.edges() {
            if (s >> a) & 1 == 1 && (s >> b) & 1 == 1 {
                continue 'sets;
            }
        }
        let mut w = ComplexRat::one();
        for x in 0..n {
            w *= &g.weights()[x][(s >> x) & 1];
        }
        total += &w;
    }
    total
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

// ---------- acceptance checks ----------

/// A long XOR path with `[1,2]` on every variable: two assignments, each of weight `2^{n/2}`.
pub fn long_ed_frame(n: usize) -> (ConstraintFrame, ComplexRat) {
    let mut f = ConstraintFrame::new(n);
    f.define("XOR", Constraint::xor()).unwrap();
    f.define("u", ints(1, &[1, 2])).unwrap();
    for v in 0..n {
        if v + 1 < n {
            f.add("XOR", &[v, v + 1]).unwrap();
        }
        f.add("u", &[v]).unwrap();
    }
    let ones_even = n / 2;
    let ones_odd = n - n / 2;
    let two = ComplexRat::from_int(2);
    (f, two.pow(ones_even as u64) + two.pow(ones_odd as u64))
}

pub fn ac1() -> Check {
    let mut r = rng(1);
    let (res, t) = timed(|| -> Result<(), String> {
        for case in 0..500 {
            let n = r.gen_range(1..=12);
            let f = random_ed_frame(&mut r, n);
            let fast = solve_ed_auto(&f).map_err(|e| format!("case {case}: {e}"))?;
            let slow = eval_frame(&f).unwrap();
            ensure(fast == slow, || format!("case {case}: solve_ed {fast} vs eval_frame {slow}\n{f}"))?;
        }
        Ok(())
    });
    res?;
    ensure(t < Duration::from_secs(60), || format!("500 frames took {t:?}"))?;
    let (big, want) = long_ed_frame(10_000);
    let (v, t2) = timed(|| solve_ed_auto(&big));
    let v = v.map_err(|e| e.to_string())?;
    ensure(v == want, || "10^4-variable frame: wrong value".into())?;
    ensure(t2 < Duration::from_secs(5), || format!("10^4-variable frame took {t2:?}"))?;
    Ok(format!("500 frames in {t:.2?}; 10^4 variables in {t2:.2?}"))
}

fn has_claim(t: &ReductionTrace, c: &Constraint) -> bool {
    t.claimed_tables().any(|x| x == c)
}

pub fn ac2() -> Check {
    let m = |e: Error| e.to_string();
    let t = gadget_implies_from_or(Variant::Corrected).map_err(m)?;
    ensure(has_claim(&t, &Constraint::symmetric_ints(&[1, 1, 2])), || "g = [1,1,2] missing".into())?;
    let h = Constraint::new(2, vec![q(1, 2), q(-1, 1), q(0, 1), q(-3, 1)]).unwrap();
    ensure(has_claim(&t, &h), || "h = (1/2,-1,0,-3) missing".into())?;
    ensure(t.final_table == Constraint::implies(), || "implies-from-or does not end at Implies".into())?;

    let t = gadget_or_from_implies().map_err(m)?;
    ensure(has_claim(&t, &Constraint::eq(3)), || "EQ3 = Implies^3 missing".into())?;
    ensure(has_claim(&t, &Constraint::symmetric_ints(&[2, 1, 1, 1])), || "p = [2,1,1,1] missing".into())?;
    ensure(has_claim(&t, &ints(2, &[0, -6, -4, -7])), || "g = (0,-6,-4,-7) missing".into())?;
    let s = ints(2, &[0, 28224, 28224, 28224]);
    ensure(has_claim(&t, &s) && s.is_proportional(&Constraint::or()), || "s = (0,28224,...) missing".into())?;

    let t = gadget_1a0b(&ints(2, &[1, 2, 0, 4])).map_err(m)?;
    ensure(has_claim(&t, &Constraint::implies()), || "1a0b does not reach (1,1,0,1)".into())?;
    for (x, y) in [(1, 1), (2, 3), (-1, 2)] {
        let f = ints(2, &[1, x, y, -x * y]);
        let t = gadget_1xyz(&f).map_err(m)?;
        let g = ints(2, &[3, -x, -y, 3 * x * y]);
        ensure(has_claim(&t, &g), || format!("1xyz on {f} misses (3,-x,-y,3xy)"))?;
    }

    let printed = gadget_nand_or(Direction::NandToOr, Variant::Printed);
    ensure(matches!(printed, Err(Error::Verification { .. })), || "printed NAND-OR wiring was not caught".into())?;
    gadget_nand_or(Direction::NandToOr, Variant::Corrected).map_err(m)?;
    let printed = gadget_implies_from_or(Variant::Printed);
    ensure(matches!(printed, Err(Error::Verification { .. })), || "printed u2 sign was not caught".into())?;
    gadget_0ab1(&Constraint::or()).map_err(m)?;
    Ok("all golden tables reproduced; printed NAND-OR and u2 FAIL, corrected PASS".into())
}

pub fn ac3_imp() -> Check {
    let (res, t) = timed(|| -> Result<usize, String> {
        let mut checked = 0;
        for k in 1..=4usize {
            let imp = oracle_imp_relations(k);
            for mask in 0..1u64 << (1 << k) {
                let rel = Relation::from_mask(k, mask);
                let got = relation_imp_support(&rel).holds();
                ensure(got == imp.contains(&mask), || format!("k={k} mask {mask:#x}: classifier {got}"))?;
                checked += 1;
            }
        }
        Ok(checked)
    });
    let n = res?;
    ensure(t < Duration::from_secs(120), || format!("IMP enumeration took {t:?}"))?;
    Ok(format!("{n} relations in {t:.2?}"))
}

pub fn ac3_ed() -> Check {
    let a = alphabet();
    let mut cases: Vec<Constraint> = Vec::new();
    for k in 1..=2usize {
        let n = 1 << k;
        for code in 0..a.len().pow(n as u32) {
            let mut c = code;
            cases.push(Constraint::from_fn(k, |_| {
                let v = a[c % a.len()].clone();
                c /= a.len();
                v
            }));
        }
    }
    let mut r = rng(3);
    for j in 0..10_000 {
        // a third of the samples are structured so both answers occur
        let f = match j % 3 {
            0 => Constraint::from_fn(3, |_| a.choose(&mut r).unwrap().clone()),
            1 => {
                let g = random_ed(&mut r, 3);
                Constraint::from_fn(3, |x| if g.at(x).is_zero() { 0.into() } else { a[1 + r.gen_range(0..4)].clone() })
            }
            _ => Constraint::from_fn(3, |x| {
                let u = [a[r.gen_range(0..5)].clone(), a[r.gen_range(0..5)].clone()];
                u[x & 1].clone() * a[1 + (x >> 2)].clone()
            }),
        };
        cases.push(f);
    }
    let (mut dg, mut ed) = (0, 0);
    for f in &cases {
        let (d, e) = (is_degenerate(f), is_in_ed(f));
        ensure(d.is_some() == oracle_dg(f), || format!("DG disagrees on {f}"))?;
        ensure(e.is_some() == oracle_ed(f), || format!("ED disagrees on {f}"))?;
        if let Some(l) = &d {
            ensure(l.product() == *f, || format!("DG certificate for {f} does not multiply back"))?;
            dg += 1;
        }
        if let Some(l) = &e {
            ensure(l.product() == *f, || format!("ED certificate for {f} does not multiply back"))?;
            ed += 1;
        }
    }
    Ok(format!("{} constraints ({dg} DG, {ed} ED)", cases.len()))
}

pub fn ac3() -> Check {
    let a = ac3_imp()?;
    let b = ac3_ed()?;
    Ok(format!("IMP: {a}; DG/ED: {b}"))
}

fn in_class(name: &str, f: &Constraint) -> bool {
    match name {
        "ED" => is_in_ed(f).is_some(),
        "DG" => is_degenerate(f).is_some(),
        "NZ" => is_nonzero(f),
        "IMP" => has_imp_support(f).map(|s| s.holds()).unwrap_or(false),
        _ => unreachable!(),
    }
}

fn class_member(name: &str, r: &mut ChaCha8Rng, k: usize) -> Constraint {
    match name {
        "ED" => random_ed(r, k),
        "DG" => random_dg(r, k, true),
        "NZ" => random_nz(r, k),
        "IMP" => random_imp(r, k),
        _ => unreachable!(),
    }
}

pub fn ac4() -> Check {
    let mut r = rng(4);
    let cases = 1000;
    for name in ["ED", "DG", "NZ", "IMP"] {
        for j in 0..cases {
            let k = r.gen_range(1..=3);
            let f = class_member(name, &mut r, k);
            ensure(in_class(name, &f), || format!("{name} generator produced {f}"))?;
            let g = if j % 2 == 0 { class_member(name, &mut r, k) } else {
                let kb = r.gen_range(1..=2);
                class_member(name, &mut r, kb)
            };
            let prod = if g.arity() == k && j % 2 == 0 { pointwise(&f, &g) } else { tensor(&f, &g) };
            ensure(in_class(name, &prod), || format!("{name} not closed under multiplication: {f} · {g}"))?;
            for m in [2, 3] {
                let p = power(&f, m).unwrap();
                ensure(in_class(name, &p), || format!("{name} not closed under power {m}: {f}"))?;
            }
        }
    }
    for _ in 0..cases {
        let k = r.gen_range(1..=4);
        let mut f = Constraint::zero(k);
        if r.gen_bool(0.8) {
            let x = r.gen_range(0..1usize << k);
            f = Constraint::from_fn(k, |y| if y == x { nonzero_gauss(&mut r) } else { ComplexRat::zero() });
        }
        ensure(is_degenerate(&f).is_some(), || format!("|R_f| ≤ 1 but not DG: {f}"))?;
    }
    for j in 0..cases {
        let k = r.gen_range(1..=3);
        let f = if j % 2 == 0 { random_dg(&mut r, k, false) } else { random_nz(&mut r, k) };
        ensure(is_nonzero(&f), || "NZ generator".into())?;
        ensure(is_degenerate(&f).is_some() == is_in_ed(&f).is_some(), || format!("NZ∩DG ≠ NZ∩ED at {f}"))?;
    }
    Ok(format!("{cases} cases per property, 4 classes"))
}

/// Curated constraints for the end-to-end dichotomy check.
pub fn corpus() -> Vec<Constraint> {
    let mut c = vec![
        Constraint::or(),
        Constraint::nand(),
        Constraint::implies(),
        ints(2, &[1, 0, 1, 1]),
        Constraint::xor(),
        Constraint::eq(2),
        ints(2, &[2, 0, 3, 6]),
        ints(2, &[2, 5, 0, 6]),
        ints(2, &[0, 2, 3, 1]),
        ints(2, &[3, 2, 5, 0]),
        ints(2, &[0, 1, -1, 0]),
    ];
    // EQ3 with weights, and with extra support
    for (a, b) in [(1, 1), (2, 3), (-1, 5)] {
        c.push(Constraint::from_fn(3, |x| match x {
            0 => a.into(),
            7 => b.into(),
            _ => 0.into(),
        }));
        c.push(Constraint::from_fn(3, |x| match x {
            0 => a.into(),
            7 => b.into(),
            3 => 1.into(),
            _ => 0.into(),
        }));
        c.push(Constraint::from_fn(3, |x| match x {
            0 | 7 => a.into(),
            1 | 6 => b.into(),
            _ => 0.into(),
        }));
    }
    // (1,x,y,z) grid
    let vals = [q(1, 1), q(-1, 1), q(2, 1), q(1, 2), q(-3, 2)];
    for x in &vals {
        for y in &vals {
            for z in [q(1, 1), q(-2, 1), q(3, 1)] {
                c.push(Constraint::new(2, vec![1.into(), x.clone(), y.clone(), z * x * y]).unwrap());
            }
        }
    }
    // weighted Implies chains and IMP supports
    let chain = |k: usize, w: i64| {
        Constraint::from_fn(k, move |x| {
            let ok = (0..k - 1).all(|v| bit(x, v, k) <= bit(x, v + 1, k));
            if ok {
                (x as i64 + w).into()
            } else {
                0.into()
            }
        })
    };
    c.push(chain(3, 1));
    c.push(chain(3, 2));
    c.push(chain(4, 1));
    let mut r = rng(5);
    for k in [3, 3, 3, 4, 4] {
        c.push(random_imp(&mut r, k));
    }
    c.push(Constraint::from_fn(3, |x| if (1..=6).contains(&x) { (x as i64).into() } else { 0.into() }));
    c.push(Constraint::from_fn(3, |x| if x.count_ones() % 2 == 0 { 1.into() } else { 0.into() }));
    c.push(Constraint::from_fn(3, |x| if x.count_ones() % 2 == 1 { (x as i64).into() } else { 0.into() }));
    c.push(ints(3, &[1, 1, 1, 1, 1, 1, 1, 2]));
    c.push(tensor(&ints(1, &[1, 3]), &ints(1, &[1, 2])));
    let a = alphabet();
    let mut added = 0;
    while added < 40 {
        let k = if added < 28 { 3 } else { 4 };
        let f = Constraint::from_fn(k, |_| a.choose(&mut r).unwrap().clone());
        if f.is_zero() || is_in_ed(&f).is_some() {
            continue;
        }
        c.push(f);
        added += 1;
    }
    c
}

fn branch_arity_drops(t: &ReductionTrace) -> Result<(), String> {
    let mut arity: BTreeMap<String, usize> = BTreeMap::new();
    arity.insert("f".into(), t.target.arity());
    for s in &t.steps {
        let out = s.output.table.arity();
        let recursive = ["sweep", "arity reduction", "free-variable pin", "witness minor", "binary minor search"];
        if let Some(&inp) = s.inputs.first().and_then(|n| arity.get(n)) {
            if recursive.iter().any(|p| s.gadget.starts_with(p)) {
                ensure(out < inp, || format!("step `{}` keeps arity {inp} -> {out}", s.gadget))?;
            }
        }
        arity.insert(s.output.name.clone(), out);
    }
    Ok(())
}

pub fn ac5() -> Check {
    let items = corpus();
    let (res, t) = timed(|| -> Result<(usize, usize), String> {
        let (mut ed, mut red) = (0, 0);
        for f in &items {
            match is_in_ed(f) {
                Some(l) => {
                    ensure(l.product() == *f, || format!("ED certificate for {f} does not multiply back"))?;
                    ensure(matches!(reduce(f), Err(Error::Precondition(_))), || format!("reduce accepted ED {f}"))?;
                    ed += 1;
                }
                None => {
                    let tr = reduce(f).map_err(|e| format!("reduce({f}) failed: {e}"))?;
                    tr.verify().map_err(|e| format!("trace for {f}: {e}"))?;
                    ensure(tr.final_table.is_proportional(&Constraint::or()), || format!("{f} does not end at OR"))?;
                    let branches = [
                        (Branch::Imp, reduce_imp_branch(f).is_ok()),
                        (Branch::NoImp, reduce_no_imp_branch(f).is_ok()),
                        (Branch::Nz, reduce_nz_branch(f).is_ok()),
                    ];
                    let ok: Vec<Branch> = branches.iter().filter(|b| b.1).map(|b| b.0).collect();
                    ensure(ok.len() == 1 && ok[0] == branch_of(f).unwrap(), || format!("{f} accepted by {ok:?}"))?;
                    branch_arity_drops(&tr).map_err(|e| format!("{f}: {e}"))?;
                    red += 1;
                }
            }
        }
        Ok((ed, red))
    });
    let (ed, red) = res?;
    ensure(items.len() >= 100, || format!("corpus has only {} items", items.len()))?;
    ensure(t < Duration::from_secs(300), || format!("corpus took {t:?}"))?;
    Ok(format!("{} constraints: {ed} ED certificates, {red} verified traces, {t:.2?}", items.len()))
}

/// A random step of the given kind with inputs `g1`, `g2` and output `h`.
pub fn random_step(r: &mut impl Rng, kind: usize) -> (TStep, Env) {
    let mut env = Env::new();
    let k = r.gen_range(2..=3);
    env.insert("g1".into(), random_constraint(r, k));
    let op = match kind {
        0 => {
            let i = r.gen_range(1..k);
            StepOp::Permutation { i, j: r.gen_range(i + 1..=k) }
        }
        1 => StepOp::Pinning { i: r.gen_range(1..=k), c: r.gen_range(0..=1) },
        2 => StepOp::Projection { i: r.gen_range(1..=k) },
        3 => {
            let i = r.gen_range(1..=k);
            let mut j = r.gen_range(1..=k);
            while j == i {
                j = r.gen_range(1..=k);
            }
            StepOp::Linking { i, j }
        }
        4 => StepOp::Expansion { position: r.gen_range(0..=k) },
        5 => {
            let b = r.gen_range(1..=2);
            env.insert("g2".into(), random_constraint(r, b));
            let arity = r.gen_range(k.max(b)..=k + b);
            let mut pos: Vec<usize> = (1..=arity).collect();
            pos.shuffle(r);
            let scope1: Vec<usize> = pos[..k].to_vec();
            // scope2 covers whatever scope1 missed
            let mut scope2: Vec<usize> = pos[k..].to_vec();
            while scope2.len() < b {
                let p = r.gen_range(1..=arity);
                if !scope2.contains(&p) {
                    scope2.push(p);
                }
            }
            scope2.shuffle(r);
            StepOp::Multiplication { scope1, scope2, arity }
        }
        _ => StepOp::Normalization { lambda: nonzero_gauss(r) },
    };
    let inputs: Vec<&str> = if kind == 5 { vec!["g1", "g2"] } else { vec!["g1"] };
    (TStep::new(op, &inputs, "h"), env)
}

pub fn ac6() -> Check {
    let mut r = rng(6);
    let kinds = ["Permutation", "Pinning", "Projection", "Linking", "Expansion", "Multiplication", "Normalization"];
    for (kind, name) in kinds.iter().enumerate() {
        for case in 0..50 {
            let (step, env) = random_step(&mut r, kind);
            let h = step.apply(&env).map_err(|e| format!("{name} case {case}: {e}"))?;
            let n = r.gen_range(1..=5);
            let mut frame = ConstraintFrame::new(n);
            for _ in 0..r.gen_range(1..=3) {
                frame.apply("h", h.clone(), &random_scope(&mut r, n, h.arity())).unwrap();
            }
            for j in 0..r.gen_range(0..=3) {
                let k = r.gen_range(1..=2);
                frame.apply(&format!("o{j}"), random_constraint(&mut r, k), &random_scope(&mut r, n, k)).unwrap();
            }
            let rw = rewrite_frame(&frame, &step, &env).map_err(|e| format!("{name} case {case}: {e}"))?;
            ensure(rw.frame.occurrences("h") == 0, || format!("{name} case {case}: `h` still used"))?;
            let before = eval_frame(&frame).unwrap();
            let after = &rw.correction * &eval_frame(&rw.frame).unwrap();
            ensure(before == after, || format!("{name} case {case}: {before} vs {after}"))?;
        }
    }
    Ok("7 kinds × 50 frames preserved exactly".into())
}

/// Random frame with pins; every fifth one has a zero count by construction.
pub fn random_pinned_frame(r: &mut impl Rng, case: usize) -> ConstraintFrame {
    let n = r.gen_range(1..=10);
    let apps = r.gen_range(1..=6);
    let mut f = random_frame(r, n, apps, 3.min(n));
    let pin0 = r.gen_range(0..n);
    f.apply("Delta0", Constraint::delta0(), &[pin0]).unwrap();
    if r.gen_bool(0.3) {
        f.add("Delta0", &[r.gen_range(0..n)]).unwrap();
    }
    if case.is_multiple_of(5) {
        f.apply("Delta1", Constraint::delta1(), &[pin0]).unwrap();
    }
    f
}

pub fn ac7() -> Check {
    let l = q(1, 2);
    let m = choose_m(3, &rq(2, 1), &l, &rq(1, 10), &rq(1, 2)).map_err(|e| e.to_string())?;
    ensure(m == 10, || format!("worked example gives m = {m}, not 10"))?;
    let mut r = rng(7);
    let mut zeros = 0;
    let mut runs = 0;
    for case in 0..200 {
        let f = random_pinned_frame(&mut r, case);
        let truth = eval_frame(&f).unwrap();
        for (j, eps) in [rq(1, 2), rq(1, 10), rq(1, 50)].into_iter().enumerate() {
            let cfg = PinningConfig::new(eps.clone());
            let mut oracle = NoisyOracle::new((case * 3 + j) as u64);
            let run = eliminate_pinning(&f, &mut oracle, &cfg).map_err(|e| format!("case {case}: {e}"))?;
            ensure(is_approx(&run.output, &truth, &eps), || {
                format!("case {case}, ε={eps}: output {} vs csp {truth}\n{f}", run.output)
            })?;
            if truth.is_zero() {
                ensure(run.output.is_zero(), || format!("case {case}: zero count gave {}", run.output))?;
            }
            // |K| ≤ 2^n |Ω|
            let k = residual(&run).unwrap();
            let bound = num_traits::pow(rq(4, 1), run.merged.num_vars()) * omega_sq(&run.merged);
            ensure(k.norm_sqr() <= bound, || format!("case {case}: |K| exceeds 2^n|Ω|"))?;
            runs += 1;
        }
        if truth.is_zero() {
            zeros += 1;
        }
    }
    Ok(format!("m = 10 on the worked example; {runs} runs over 200 frames ({zeros} with csp = 0) all within 2^ε"))
}

pub fn ac8() -> Check {
    let mut r = rng(8);
    for case in 0..100 {
        let n = r.gen_range(1..=10);
        let g = random_graph(&mut r, n);
        let want = oracle_is_sum(&g);
        let f = is_to_frame(&g);
        ensure(eval_frame(&f).unwrap() == want, || format!("graph {case}: is_to_frame changes the count"))?;
        let back = frame_to_is(&f).map_err(|e| format!("graph {case}: {e}"))?;
        ensure(oracle_is_sum(&back) == want, || format!("graph {case}: round trip changes the count"))?;
        ensure(back.is_sum(16).unwrap() == want, || format!("graph {case}: is_sum disagrees"))?;
        let s = swap_roles(&f).map_err(|e| format!("graph {case}: {e}"))?;
        ensure(eval_frame(&s).unwrap() == want, || format!("graph {case}: swap_roles changes the count"))?;
    }
    for case in 0..100 {
        // NAND frames built directly, with repeated unaries on a variable
        let n = r.gen_range(1..=10);
        let mut f = ConstraintFrame::new(n);
        f.define("NAND", Constraint::nand()).unwrap();
        for a in 0..n {
            for b in a + 1..n {
                if r.gen_bool(0.3) {
                    f.add("NAND", &[b, a]).unwrap();
                }
            }
        }
        for j in 0..r.gen_range(0..=n + 2) {
            let [a, b] = random_unary(&mut r, false);
            f.apply(&format!("w{j}"), Constraint::unary(a, b), &[r.gen_range(0..n)]).unwrap();
        }
        let want = eval_frame(&f).unwrap();
        let g = frame_to_is(&f).map_err(|e| format!("frame {case}: {e}"))?;
        ensure(oracle_is_sum(&g) == want, || format!("frame {case}: frame_to_is changes the count"))?;
        let s = swap_roles(&f).map_err(|e| format!("frame {case}: {e}"))?;
        ensure(eval_frame(&s).unwrap() == want, || format!("frame {case}: swap_roles changes the count"))?;
    }
    Ok("100 graphs and 100 NAND frames, both directions and swap_roles exact".into())
}
