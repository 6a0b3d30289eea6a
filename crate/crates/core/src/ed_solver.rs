//! Polynomial-time counting for frames whose constraints all factor into
//! unaries, `EQ` and `XOR`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::classify::{is_in_ed, FactorKind, FactorList};
use crate::complex::ComplexRat;
use crate::error::{Error, Result};
use crate::frame::ConstraintFrame;
use crate::par;

/// Union-find whose links carry the parity between a node and its parent.
struct ParityDsu {
    parent: Vec<usize>,
    parity: Vec<u8>,
    rank: Vec<u8>,
}

impl ParityDsu {
    fn new(n: usize) -> Self {
        ParityDsu { parent: (0..n).collect(), parity: vec![0; n], rank: vec![0; n] }
    }

    /// Root of `v` and the parity `v ⊕ root`.
    fn find(&mut self, v: usize) -> (usize, u8) {
        let mut path = Vec::new();
        let mut r = v;
        while self.parent[r] != r {
            path.push(r);
            r = self.parent[r];
        }
        // compress from the top so each node's parity is relative to the root
        let mut acc = 0;
        for &u in path.iter().rev() {
            acc ^= self.parity[u];
            self.parity[u] = acc;
            self.parent[u] = r;
        }
        (r, if path.is_empty() { 0 } else { self.parity[v] })
    }

    /// Impose `a ⊕ b = p`; `false` on contradiction.
    fn union(&mut self, a: usize, b: usize, p: u8) -> bool {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            return pa ^ pb == p;
        }
        let (hi, lo) = if self.rank[ra] >= self.rank[rb] { (ra, rb) } else { (rb, ra) };
        self.parent[lo] = hi;
        self.parity[lo] = pa ^ pb ^ p;
        if self.rank[hi] == self.rank[lo] {
            self.rank[hi] += 1;
        }
        true
    }
}

/// Check that `certs` covers every constraint the frame uses with a valid ED factor list.
fn check_certificates(frame: &ConstraintFrame, certs: &BTreeMap<String, FactorList>) -> Result<()> {
    for name in frame.used_names() {
        let c = &frame.library()[&name];
        let l = certs.get(&name).ok_or_else(|| Error::Precondition(format!("no ED certificate for `{name}`")))?;
        l.validate()?;
        if l.arity != c.arity() {
            return Err(Error::Precondition(format!("certificate for `{name}` has arity {}, not {}", l.arity, c.arity())));
        }
        if l.contains_kind(FactorKind::Implies) {
            return Err(Error::Precondition(format!("certificate for `{name}` uses Implies")));
        }
        if l.product() != *c {
            return Err(Error::Precondition(format!("certificate {l} does not multiply to `{name}` = {c}")));
        }
    }
    Ok(())
}

/// An ED factor list for every constraint in use, or `None` if one is not in ED.
pub fn certify_ed(frame: &ConstraintFrame) -> Option<BTreeMap<String, FactorList>> {
    frame.used_names().into_iter().map(|n| is_in_ed(&frame.library()[&n]).map(|l| (n, l))).collect()
}

/// Exact `csp` of a frame given an ED factor list for each of its constraints.
pub fn solve_ed(frame: &ConstraintFrame, certs: &BTreeMap<String, FactorList>) -> Result<ComplexRat> {
    check_certificates(frame, certs)?;
    let n = frame.num_vars();
    let mut dsu = ParityDsu::new(n);
    let mut weight: Vec<Option<[ComplexRat; 2]>> = vec![None; n];
    let mut scale = |v: usize, w0: &ComplexRat, w1: &ComplexRat| {
        let slot = weight[v].get_or_insert_with(|| [ComplexRat::one(), ComplexRat::one()]);
        slot[0] *= w0;
        slot[1] *= w1;
    };
    let (zero, one) = (ComplexRat::zero(), ComplexRat::one());
    for a in frame.applications() {
        for fac in &certs[&a.name].factors {
            let vs: Vec<usize> = fac.vars.iter().map(|&i| a.scope[i]).collect();
            let consistent = match fac.kind {
                FactorKind::Eq => dsu.union(vs[0], vs[1], 0),
                FactorKind::Xor => dsu.union(vs[0], vs[1], 1),
                FactorKind::Delta0 => {
                    scale(vs[0], &one, &zero);
                    true
                }
                FactorKind::Delta1 => {
                    scale(vs[0], &zero, &one);
                    true
                }
                FactorKind::Unary => {
                    let u = fac.unary.as_ref().expect("validated");
                    scale(vs[0], u.at(0), u.at(1));
                    true
                }
                FactorKind::Implies => unreachable!("rejected by check_certificates"),
            };
            if !consistent {
                return Ok(ComplexRat::zero());
            }
        }
    }
    let mut members: BTreeMap<usize, Vec<(usize, u8)>> = BTreeMap::new();
    for v in 0..n {
        let (r, p) = dsu.find(v);
        members.entry(r).or_default().push((v, p));
    }
    let comps: Vec<Vec<(usize, u8)>> = members.into_values().collect();
    let component_sum = |c: &Vec<(usize, u8)>| -> ComplexRat {
        (0..2u8)
            .map(|b| {
                let mut acc = ComplexRat::one();
                for &(v, p) in c {
                    if let Some(w) = &weight[v] {
                        let x = &w[(b ^ p) as usize];
                        if x.is_zero() {
                            return ComplexRat::zero();
                        }
                        acc *= x;
                    }
                }
                acc
            })
            .sum()
    };
    #[cfg(feature = "parallel")]
    let sums: Vec<ComplexRat> = {
        use rayon::prelude::*;
        comps.par_iter().map(component_sum).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let sums: Vec<ComplexRat> = comps.iter().map(component_sum).collect();
    if sums.iter().any(Zero::is_zero) {
        return Ok(ComplexRat::zero());
    }
    Ok(par::product_all(sums, true))
}

/// [`solve_ed`] with certificates from the classifier.
pub fn solve_ed_auto(frame: &ConstraintFrame) -> Result<ComplexRat> {
    let certs = certify_ed(frame).ok_or_else(|| Error::Precondition("some constraint in the frame is not in ED".into()))?;
    solve_ed(frame, &certs)
}
