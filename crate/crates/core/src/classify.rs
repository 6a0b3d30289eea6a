//! Membership tests for NZ, DG, ED, IM (binary) and imp support.
//!
//! Every positive answer carries a [`FactorList`] that re-multiplies to the
//! input exactly.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::complex::ComplexRat;
use crate::constraint::{bitstring, Constraint, Relation};
use crate::error::{Error, Result};
use crate::structure::BoolMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FactorKind {
    Unary,
    Eq,
    Xor,
    Delta0,
    Delta1,
    Implies,
}

/// One factor over 0-based variable indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub kind: FactorKind,
    pub vars: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unary: Option<Constraint>,
}

impl Factor {
    pub fn unary(v: usize, u: Constraint) -> Self {
        Factor { kind: FactorKind::Unary, vars: vec![v], unary: Some(u) }
    }
    pub fn eq(a: usize, b: usize) -> Self {
        Factor { kind: FactorKind::Eq, vars: vec![a, b], unary: None }
    }
    pub fn xor(a: usize, b: usize) -> Self {
        Factor { kind: FactorKind::Xor, vars: vec![a, b], unary: None }
    }
    pub fn delta(v: usize, c: u8) -> Self {
        let kind = if c == 0 { FactorKind::Delta0 } else { FactorKind::Delta1 };
        Factor { kind, vars: vec![v], unary: None }
    }
    pub fn implies(a: usize, b: usize) -> Self {
        Factor { kind: FactorKind::Implies, vars: vec![a, b], unary: None }
    }

    /// The factor's own table.
    pub fn table(&self) -> Constraint {
        match self.kind {
            FactorKind::Unary => self.unary.clone().expect("unary factor carries its table"),
            FactorKind::Eq => Constraint::eq(2),
            FactorKind::Xor => Constraint::xor(),
            FactorKind::Delta0 => Constraint::delta0(),
            FactorKind::Delta1 => Constraint::delta1(),
            FactorKind::Implies => Constraint::implies(),
        }
    }

    fn well_formed(&self) -> bool {
        let want = match self.kind {
            FactorKind::Unary | FactorKind::Delta0 | FactorKind::Delta1 => 1,
            _ => 2,
        };
        self.vars.len() == want
            && match self.kind {
                FactorKind::Unary => self.unary.as_ref().is_some_and(|u| u.arity() == 1),
                _ => self.unary.is_none(),
            }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.vars.iter().map(|x| format!("x{}", x + 1)).collect();
        let args = v.join(",");
        match self.kind {
            FactorKind::Unary => {
                let u = self.unary.as_ref().map(|u| u.values().to_vec()).unwrap_or_default();
                let parts: Vec<String> = u.iter().map(|z| z.to_string()).collect();
                write!(f, "[{}]({args})", parts.join(","))
            }
            FactorKind::Eq => write!(f, "EQ({args})"),
            FactorKind::Xor => write!(f, "XOR({args})"),
            FactorKind::Delta0 => write!(f, "Δ0({args})"),
            FactorKind::Delta1 => write!(f, "Δ1({args})"),
            FactorKind::Implies => write!(f, "Implies({args})"),
        }
    }
}

/// A product of factors over `arity` variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorList {
    pub arity: usize,
    pub factors: Vec<Factor>,
}

/// Index of a factor over 0-based `vars`, read from an index of `arity` bits.
#[inline]
pub(crate) fn gather(x: usize, vars: &[usize], arity: usize) -> usize {
    vars.iter().fold(0usize, |acc, &v| (acc << 1) | ((x >> (arity - 1 - v)) & 1))
}

impl FactorList {
    pub fn new(arity: usize, factors: Vec<Factor>) -> Self {
        FactorList { arity, factors }
    }

    pub fn validate(&self) -> Result<()> {
        for fac in &self.factors {
            if !fac.well_formed() {
                return Err(Error::Precondition(format!("malformed factor {fac}")));
            }
            if let Some(&v) = fac.vars.iter().find(|&&v| v >= self.arity) {
                return Err(Error::Index(format!("factor {fac} uses x{} beyond arity {}", v + 1, self.arity)));
            }
        }
        Ok(())
    }

    /// Pointwise product of all factors.
    pub fn product(&self) -> Constraint {
        let tables: Vec<Constraint> = self.factors.iter().map(Factor::table).collect();
        Constraint::from_fn(self.arity, |x| {
            let mut acc = ComplexRat::one();
            for (fac, t) in self.factors.iter().zip(&tables) {
                let v = t.at(gather(x, &fac.vars, self.arity));
                if v.is_zero() {
                    return ComplexRat::zero();
                }
                acc *= v;
            }
            acc
        })
    }

    /// Support of the product.
    pub fn relation(&self) -> Relation {
        self.product().underlying_relation()
    }

    pub fn contains_kind(&self, kind: FactorKind) -> bool {
        self.factors.iter().any(|f| f.kind == kind)
    }
}

impl fmt::Display for FactorList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.factors.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", parts.join(" · "))
    }
}

pub fn is_nonzero(f: &Constraint) -> bool {
    f.values().iter().all(|v| !v.is_zero())
}

/// `f = Π u_i(x_i)`, as a list of unary factors, or `None`.
pub fn is_degenerate(f: &Constraint) -> Option<FactorList> {
    let k = f.arity();
    if k == 0 {
        return None;
    }
    let Some(a) = f.values().iter().position(|v| !v.is_zero()) else {
        let mut factors = vec![Factor::unary(0, Constraint::zero(1))];
        factors.extend((1..k).map(|v| Factor::unary(v, Constraint::constant(1, ComplexRat::one()))));
        return Some(FactorList::new(k, factors));
    };
    // u_i(c) = f(a with x_i := c); then f(a)^{k-1} f(x) = Π u_i(x_i) for rank-one f
    let pivot = f.at(a).clone();
    let mut factors = Vec::with_capacity(k);
    for v in 0..k {
        let shift = k - 1 - v;
        let u0 = f.at(a & !(1 << shift)).clone();
        let u1 = f.at(a | (1 << shift)).clone();
        factors.push(Factor::unary(v, Constraint::unary(u0, u1)));
    }
    let correction = pivot.pow(k as u64 - 1).inv().expect("pivot is nonzero");
    if let Some(u) = factors[0].unary.as_mut() {
        *u = u.map_scale(&correction);
    }
    let list = FactorList::new(k, factors);
    (list.product() == *f).then_some(list)
}

/// Pins and (anti-)equality classes read off the columns of `M_f`.
#[derive(Clone, Debug)]
pub(crate) struct ColumnClasses {
    /// `Some(c)` for a constant column.
    pub pinned: Vec<Option<u8>>,
    /// For a free variable: `(representative, parity)`.  Representatives map to themselves.
    pub class: Vec<Option<(usize, u8)>>,
    pub reps: Vec<usize>,
}

pub(crate) fn column_classes(m: &BoolMatrix) -> ColumnClasses {
    let k = m.cols();
    let cols: Vec<Vec<u8>> = (1..=k).map(|i| m.column(i)).collect();
    let mut pinned = vec![None; k];
    let mut class = vec![None; k];
    let mut reps: Vec<usize> = Vec::new();
    for v in 0..k {
        let col = &cols[v];
        if col.iter().all(|&b| b == col[0]) {
            pinned[v] = Some(col[0]);
            continue;
        }
        let found = reps.iter().find_map(|&r| {
            if cols[r] == *col {
                Some((r, 0))
            } else if cols[r].iter().zip(col).all(|(a, b)| a != b) {
                Some((r, 1))
            } else {
                None
            }
        });
        match found {
            Some(c) => class[v] = Some(c),
            None => {
                class[v] = Some((v, 0));
                reps.push(v);
            }
        }
    }
    ColumnClasses { pinned, class, reps }
}

fn unit_unary(u: &Constraint) -> bool {
    u.values().iter().all(One::is_one)
}

/// Factor `f` into unaries, `EQ` and `XOR`, or return `None`.
pub fn is_in_ed(f: &Constraint) -> Option<FactorList> {
    let k = f.arity();
    if k == 0 {
        return None;
    }
    let rel = f.underlying_relation();
    if rel.is_empty() {
        return is_degenerate(f);
    }
    let cc = column_classes(&BoolMatrix::of_relation(&rel));
    let m = cc.reps.len();
    if rel.len() != 1usize << m {
        return None;
    }
    // quotient over class representatives; it is nowhere zero
    let base: usize = (0..k).map(|v| (cc.pinned[v].unwrap_or(0) as usize) << (k - 1 - v)).sum();
    let expand = |y: usize| -> usize {
        let mut x = base;
        for v in 0..k {
            if let Some((r, p)) = cc.class[v] {
                let ri = cc.reps.iter().position(|&q| q == r).unwrap();
                let b = ((y >> (m - 1 - ri)) & 1) as u8 ^ p;
                x |= (b as usize) << (k - 1 - v);
            }
        }
        x
    };
    let mut factors = Vec::new();
    if m == 0 {
        let scalar = f.at(base).clone();
        for v in 0..k {
            let c = cc.pinned[v].unwrap();
            if v == 0 && !scalar.is_one() {
                factors.push(Factor::unary(v, Constraint::delta(c).map_scale(&scalar)));
            } else {
                factors.push(Factor::delta(v, c));
            }
        }
        return Some(FactorList::new(k, factors));
    }
    let q = Constraint::from_fn(m, |y| f.at(expand(y)).clone());
    let qlist = is_degenerate(&q)?;
    for v in 0..k {
        if let Some(c) = cc.pinned[v] {
            factors.push(Factor::delta(v, c));
        }
    }
    for v in 0..k {
        if let Some((r, p)) = cc.class[v] {
            if r != v {
                factors.push(if p == 0 { Factor::eq(r, v) } else { Factor::xor(r, v) });
            }
        }
    }
    for (ri, fac) in qlist.factors.into_iter().enumerate() {
        let u = fac.unary.unwrap();
        if !unit_unary(&u) {
            factors.push(Factor::unary(cc.reps[ri], u));
        }
    }
    let list = FactorList::new(k, factors);
    debug_assert_eq!(list.product(), *f);
    Some(list)
}

/// Why a relation is not in IMP.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ImpWitness {
    /// `a, b ∈ R` with `a ∧ b ∉ R` (meet) and/or `a ∨ b ∉ R` (join).
    Pair { a: usize, b: usize, meet_escapes: bool, join_escapes: bool },
    /// The full cube, which no conjunction of distinct-variable factors defines.
    FullCube,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ImpSupport {
    Yes(FactorList),
    No(ImpWitness),
}

impl ImpSupport {
    pub fn holds(&self) -> bool {
        matches!(self, ImpSupport::Yes(_))
    }
}

/// Decide `R ∈ IMP` for a relation.
pub fn relation_imp_support(rel: &Relation) -> ImpSupport {
    let k = rel.arity();
    if rel.is_empty() {
        let k1 = k.max(1);
        return ImpSupport::Yes(FactorList::new(k1, vec![Factor::delta(0, 0), Factor::delta(0, 1)]));
    }
    let members: Vec<usize> = rel.iter().collect();
    for (p, &a) in members.iter().enumerate() {
        for &b in &members[p + 1..] {
            let meet = !rel.contains(a & b);
            let join = !rel.contains(a | b);
            if meet || join {
                return ImpSupport::No(ImpWitness::Pair { a, b, meet_escapes: meet, join_escapes: join });
            }
        }
    }
    if rel.is_full() {
        return ImpSupport::No(ImpWitness::FullCube);
    }
    let list = imp_factor_list(rel);
    assert_eq!(list.relation(), *rel, "lattice-closed relation must be defined by its entailments");
    ImpSupport::Yes(list)
}

/// Pins plus every entailed `Implies(x_i, x_j)`, for a nonempty relation.
pub(crate) fn imp_factor_list(rel: &Relation) -> FactorList {
    let k = rel.arity();
    let m = BoolMatrix::of_relation(rel);
    let cols: Vec<Vec<u8>> = (1..=k).map(|i| m.column(i)).collect();
    let mut factors = Vec::new();
    let mut free = Vec::new();
    for (v, col) in cols.iter().enumerate() {
        if col.iter().all(|&b| b == col[0]) {
            factors.push(Factor::delta(v, col[0]));
        } else {
            free.push(v);
        }
    }
    for &i in &free {
        for &j in &free {
            if i != j && cols[i].iter().zip(&cols[j]).all(|(a, b)| a <= b) {
                factors.push(Factor::implies(i, j));
            }
        }
    }
    FactorList::new(k, factors)
}

pub fn has_imp_support(f: &Constraint) -> Result<ImpSupport> {
    if f.arity() == 0 {
        return Err(Error::Arity("imp support needs arity ≥ 1".into()));
    }
    Ok(relation_imp_support(&f.underlying_relation()))
}

/// `f ∈ IM` for a binary `f ≢ 0`: true iff `bc = 0` and `f ∉ NZ`.
pub fn is_in_im_binary(f: &Constraint) -> Result<bool> {
    if f.arity() != 2 {
        return Err(Error::Arity(format!("IM test is for binary constraints, got arity {}", f.arity())));
    }
    if f.is_zero() {
        return Err(Error::Precondition("IM test needs f ≢ 0".into()));
    }
    Ok((f.at(1) * f.at(2)).is_zero() && !is_nonzero(f))
}

/// All memberships of one constraint.
#[derive(Clone, Debug)]
pub struct ClassReport {
    pub arity: usize,
    pub is_nz: bool,
    pub is_dg: bool,
    pub is_ed: bool,
    pub has_imp_support: bool,
    pub im_binary: Option<bool>,
    pub certificate: Option<FactorList>,
    pub imp_certificate: Option<FactorList>,
    pub witness: Option<ImpWitness>,
}

pub fn classify(f: &Constraint) -> Result<ClassReport> {
    if f.arity() == 0 {
        return Err(Error::Arity("classification needs arity ≥ 1".into()));
    }
    let dg = is_degenerate(f);
    let ed = if dg.is_some() { dg.clone() } else { is_in_ed(f) };
    let imp = has_imp_support(f)?;
    let im_binary = if f.arity() == 2 && !f.is_zero() { Some(is_in_im_binary(f)?) } else { None };
    let (has_imp, imp_certificate, witness) = match imp {
        ImpSupport::Yes(l) => (true, Some(l), None),
        ImpSupport::No(w) => (false, None, Some(w)),
    };
    Ok(ClassReport {
        arity: f.arity(),
        is_nz: is_nonzero(f),
        is_dg: dg.is_some(),
        is_ed: ed.is_some(),
        has_imp_support: has_imp,
        im_binary,
        certificate: ed,
        imp_certificate,
        witness,
    })
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

impl fmt::Display for ClassReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "NZ: {}", yes_no(self.is_nz))?;
        writeln!(f, "DG: {}", yes_no(self.is_dg))?;
        match &self.certificate {
            Some(c) => writeln!(f, "ED: yes (factor: {c})")?,
            None => writeln!(f, "ED: no")?,
        }
        match (&self.imp_certificate, &self.witness) {
            (Some(c), _) => writeln!(f, "imp support: yes ({c})")?,
            (None, Some(ImpWitness::Pair { a, b, meet_escapes, join_escapes })) => {
                let k = self.arity;
                let mut why = Vec::new();
                if *meet_escapes {
                    why.push(format!("meet {} ∉ R", bitstring(a & b, k)));
                }
                if *join_escapes {
                    why.push(format!("join {} ∉ R", bitstring(a | b, k)));
                }
                writeln!(
                    f,
                    "imp support: no (witness {},{}; {})",
                    bitstring(*a, k),
                    bitstring(*b, k),
                    why.join(", ")
                )?
            }
            (None, Some(ImpWitness::FullCube)) => writeln!(f, "imp support: no (full relation)")?,
            (None, None) => writeln!(f, "imp support: no")?,
        }
        if let Some(im) = self.im_binary {
            writeln!(f, "IM: {}", yes_no(im))?;
        }
        Ok(())
    }
}
