//! Representing matrices, simple form, sweeping, imp graphs and the two
//! pinning searches used by the hardness recursions.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};

use crate::classify::{has_imp_support, is_degenerate, is_in_ed, is_nonzero, Factor, FactorKind, FactorList};
use crate::complex::ComplexRat;
use crate::constraint::{bit, Constraint, Relation};
use crate::construct::{link, pin, StepOp};
use crate::error::{Error, Result};

/// Rows are the support of `R_f` in lexicographic order; columns are `x_1..x_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoolMatrix {
    cols: usize,
    rows: Vec<usize>,
}

impl BoolMatrix {
    pub fn of_relation(r: &Relation) -> Self {
        BoolMatrix { cols: r.arity(), rows: r.iter().collect() }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    /// Entry `a_i` of row `row`, column `i` (1-based).
    pub fn entry(&self, row: usize, i: usize) -> u8 {
        bit(self.rows[row], i, self.cols)
    }

    /// Column `i` (1-based) top to bottom.
    pub fn column(&self, i: usize) -> Vec<u8> {
        self.rows.iter().map(|&r| bit(r, i, self.cols)).collect()
    }
}

pub fn representing_matrix(f: &Constraint) -> BoolMatrix {
    BoolMatrix::of_relation(&f.underlying_relation())
}

enum Sweepable {
    Constant(usize, u8),
    Identical(usize, usize),
}

fn first_sweepable(m: &BoolMatrix) -> Option<Sweepable> {
    let k = m.cols();
    let cols: Vec<Vec<u8>> = (1..=k).map(|i| m.column(i)).collect();
    if let Some(i) = cols.iter().position(|c| c.iter().all(|&b| b == 0)) {
        return Some(Sweepable::Constant(i + 1, 0));
    }
    if let Some(i) = cols.iter().position(|c| c.iter().all(|&b| b == 1)) {
        return Some(Sweepable::Constant(i + 1, 1));
    }
    for i in 0..k {
        for j in i + 1..k {
            if cols[i] == cols[j] {
                return Some(Sweepable::Identical(i + 1, j + 1));
            }
        }
    }
    None
}

pub fn is_simple_form(f: &Constraint) -> bool {
    if f.is_zero() || f.arity() == 0 {
        return false;
    }
    first_sweepable(&representing_matrix(f)).is_none()
}

/// `f(x) = R(x) · g(x|kept)` with `g` in simple form.
#[derive(Clone, Debug)]
pub struct SweepResult {
    /// `Δ_0`, `Δ_1` and `EQ` factors over the original variables.
    pub relation: FactorList,
    pub g: Constraint,
    /// Original (0-based) variables of `g`, in order.
    pub kept: Vec<usize>,
    /// Pinning/linking operations taking `f` to `g`, in application order.
    pub steps: Vec<StepOp>,
}

impl SweepResult {
    /// Number of variables removed.
    pub fn removed(&self) -> usize {
        self.relation.arity - self.kept.len()
    }

    /// `R · g` as a table over the original variables.
    pub fn recombine(&self) -> Constraint {
        let k = self.relation.arity;
        let r = self.relation.product();
        Constraint::from_fn(k, |x| {
            let rv = r.at(x);
            if rv.is_zero() {
                return ComplexRat::zero();
            }
            let y = crate::classify::gather(x, &self.kept, k);
            rv * self.g.at(y)
        })
    }
}

/// Relation-valued `f = c·R` with `R ∈ (IMP ∩ ED) ∪ {EQ_1}`.
fn scalar_times_imp_ed(f: &Constraint) -> bool {
    let mut nonzero = f.values().iter().filter(|v| !v.is_zero());
    let Some(c) = nonzero.next() else { return false };
    if !nonzero.all(|v| v == c) {
        return false;
    }
    let rel = f.underlying_relation();
    if f.arity() == 1 && rel.is_full() {
        return true;
    }
    let r = rel.to_constraint();
    matches!(has_imp_support(&r), Ok(s) if s.holds()) && is_in_ed(&r).is_some()
}

/// Sweep constant and duplicate columns, left to right.
pub fn sweep(f: &Constraint) -> Result<Option<SweepResult>> {
    if f.arity() == 0 {
        return Err(Error::Arity("sweep needs arity ≥ 1".into()));
    }
    if f.is_zero() {
        return Err(Error::Precondition("sweep of an all-zero constraint".into()));
    }
    if scalar_times_imp_ed(f) {
        return Ok(None);
    }
    let k = f.arity();
    let mut g = f.clone();
    let mut kept: Vec<usize> = (0..k).collect();
    let mut factors = Vec::new();
    let mut steps = Vec::new();
    while g.arity() > 0 {
        match first_sweepable(&representing_matrix(&g)) {
            Some(Sweepable::Constant(i, c)) => {
                factors.push(Factor::delta(kept[i - 1], c));
                g = pin(&g, i, c)?;
                steps.push(StepOp::Pinning { i, c });
                kept.remove(i - 1);
            }
            Some(Sweepable::Identical(i, j)) => {
                factors.push(Factor::eq(kept[i - 1], kept[j - 1]));
                g = link(&g, i, j)?;
                steps.push(StepOp::Linking { i, j });
                kept.remove(i - 1);
            }
            None => break,
        }
    }
    if g.arity() == 0 {
        return Ok(None);
    }
    Ok(Some(SweepResult { relation: FactorList::new(k, factors), g, kept, steps }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum ImpAtom {
    D0(usize),
    D1(usize),
    Imp(usize, usize),
}

fn to_atoms(l: &FactorList) -> Result<Vec<ImpAtom>> {
    l.factors
        .iter()
        .map(|f| match f.kind {
            FactorKind::Delta0 => Ok(ImpAtom::D0(f.vars[0])),
            FactorKind::Delta1 => Ok(ImpAtom::D1(f.vars[0])),
            FactorKind::Implies => Ok(ImpAtom::Imp(f.vars[0], f.vars[1])),
            _ => Err(Error::Precondition(format!("{f} is not an IMP factor"))),
        })
        .collect()
}

fn from_atoms(arity: usize, atoms: &[ImpAtom]) -> FactorList {
    FactorList::new(
        arity,
        atoms
            .iter()
            .map(|a| match *a {
                ImpAtom::D0(v) => Factor::delta(v, 0),
                ImpAtom::D1(v) => Factor::delta(v, 1),
                ImpAtom::Imp(x, y) => Factor::implies(x, y),
            })
            .collect(),
    )
}

/// Apply the five simplification processes until none applies.
pub fn imp_distinctive(l: &FactorList) -> Result<FactorList> {
    l.validate()?;
    let mut atoms = to_atoms(l)?;
    loop {
        let set: BTreeSet<ImpAtom> = atoms.iter().copied().collect();
        let mut change: Option<(usize, Option<ImpAtom>)> = None;
        for (p, a) in atoms.iter().enumerate() {
            if let ImpAtom::Imp(x, y) = *a {
                change = if x == y || set.contains(&ImpAtom::D0(x)) {
                    Some((p, None))
                } else if set.contains(&ImpAtom::D0(y)) {
                    Some((p, Some(ImpAtom::D0(x))))
                } else if set.contains(&ImpAtom::D1(x)) {
                    Some((p, Some(ImpAtom::D1(y))))
                } else if set.contains(&ImpAtom::D1(y)) {
                    Some((p, None))
                } else {
                    None
                };
                if change.is_some() {
                    break;
                }
            }
        }
        let Some((p, add)) = change else { break };
        atoms.remove(p);
        if let Some(a) = add {
            if !atoms.contains(&a) {
                atoms.push(a);
            }
        }
    }
    Ok(from_atoms(l.arity, &atoms))
}

/// True if no variable carries both a `Δ_c` and an `Implies`, and no `Implies(x,x)`.
pub fn is_imp_distinctive(l: &FactorList) -> bool {
    let deltas: BTreeSet<usize> = l
        .factors
        .iter()
        .filter(|f| matches!(f.kind, FactorKind::Delta0 | FactorKind::Delta1))
        .map(|f| f.vars[0])
        .collect();
    l.factors.iter().filter(|f| f.kind == FactorKind::Implies).all(|f| {
        f.vars[0] != f.vars[1] && !deltas.contains(&f.vars[0]) && !deltas.contains(&f.vars[1])
    })
}

/// Directed graph with one edge per `Implies(x, y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImpGraph {
    pub nodes: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

impl ImpGraph {
    pub fn of_list(arity: usize, l: &FactorList) -> Self {
        ImpGraph {
            nodes: (0..arity).collect(),
            edges: l
                .factors
                .iter()
                .filter(|f| f.kind == FactorKind::Implies)
                .map(|f| (f.vars[0], f.vars[1]))
                .collect(),
        }
    }

    /// `|E(v)|`: incident edges, either direction.
    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, _)| a == v).count()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(_, b)| b == v).count()
    }

    pub fn isolated(&self) -> Vec<usize> {
        self.nodes.iter().copied().filter(|&v| self.degree(v) == 0).collect()
    }

    pub fn is_acyclic(&self) -> bool {
        // Kahn's algorithm
        let mut indeg: Vec<usize> = self.nodes.iter().map(|&v| self.in_degree(v)).collect();
        let pos = |v: usize| self.nodes.iter().position(|&n| n == v).unwrap();
        let mut queue: Vec<usize> = self.nodes.iter().copied().filter(|&v| self.in_degree(v) == 0).collect();
        let mut seen = 0;
        while let Some(v) = queue.pop() {
            seen += 1;
            for &(a, b) in &self.edges {
                if a == v {
                    let p = pos(b);
                    indeg[p] -= 1;
                    if indeg[p] == 0 {
                        queue.push(b);
                    }
                }
            }
        }
        seen == self.nodes.len()
    }
}

impl fmt::Display for ImpGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e: Vec<String> = self.edges.iter().map(|(a, b)| format!("x{}->x{}", a + 1, b + 1)).collect();
        write!(f, "{} nodes; {}", self.nodes.len(), e.join(" "))
    }
}

/// Checks that `l` is good for the relation `rel`.
pub fn is_good_list(rel: &Relation, l: &FactorList) -> bool {
    if l.factors.iter().any(|f| f.kind != FactorKind::Implies) {
        return false;
    }
    let g = ImpGraph::of_list(rel.arity(), l);
    if !g.isolated().is_empty() || !g.is_acyclic() || g.edges.iter().any(|(a, b)| a == b) {
        return false;
    }
    l.relation() == *rel
}

/// The Hasse diagram of the entailment order on the columns of `M_f`.
pub fn good_factor_list(f: &Constraint) -> Result<Option<(FactorList, ImpGraph)>> {
    if !has_imp_support(f)?.holds() {
        return Err(Error::Precondition("good factor list needs imp support".into()));
    }
    if !is_simple_form(f) {
        return Err(Error::Precondition("good factor list needs simple form".into()));
    }
    let k = f.arity();
    let m = representing_matrix(f);
    let cols: Vec<Vec<u8>> = (1..=k).map(|i| m.column(i)).collect();
    let entails = |i: usize, j: usize| i != j && cols[i].iter().zip(&cols[j]).all(|(a, b)| a <= b);
    let mut factors = Vec::new();
    for i in 0..k {
        for j in 0..k {
            if entails(i, j) && !(0..k).any(|l| l != i && l != j && entails(i, l) && entails(l, j)) {
                factors.push(Factor::implies(i, j));
            }
        }
    }
    let list = FactorList::new(k, factors);
    if list.relation() != f.underlying_relation() {
        return Err(Error::Invalid("entailment factors do not define R_f".into()));
    }
    let graph = ImpGraph::of_list(k, &list);
    if !graph.isolated().is_empty() {
        return Ok(None);
    }
    if !graph.is_acyclic() {
        return Err(Error::Invalid("imp graph of a simple-form constraint has a cycle".into()));
    }
    Ok(Some((list, graph)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArityCase {
    /// Sink with a single incident edge from a node of degree > 1.
    SinkPin,
    /// Isolated two-node component.
    PairPin,
    /// Source pinned to 0.
    SourcePin,
}

#[derive(Clone, Debug)]
pub struct ArityReduction {
    pub case: ArityCase,
    pub h: Constraint,
    /// `(original 0-based variable, value)`.
    pub pins: Vec<(usize, u8)>,
    /// Pinning operations taking `f` to `h`.
    pub steps: Vec<StepOp>,
    /// `L` minus the removed edge, reindexed to the variables of `h`.
    pub list: FactorList,
}

fn pin_steps(f: &Constraint, pins: &[(usize, u8)]) -> Result<(Constraint, Vec<StepOp>)> {
    let mut sorted = pins.to_vec();
    sorted.sort_by_key(|a| std::cmp::Reverse(a.0));
    let mut h = f.clone();
    let mut steps = Vec::new();
    for (v, c) in sorted {
        h = pin(&h, v + 1, c)?;
        steps.push(StepOp::Pinning { i: v + 1, c });
    }
    Ok((h, steps))
}

/// Drop the pinned variables from a factor list and renumber the rest.
fn reindex(l: &FactorList, removed: &[usize], drop: (usize, usize)) -> FactorList {
    let shift = |v: usize| v - removed.iter().filter(|&&r| r < v).count();
    FactorList::new(
        l.arity - removed.len(),
        l.factors
            .iter()
            .filter(|f| !(f.vars[0] == drop.0 && f.vars[1] == drop.1))
            .map(|f| Factor::implies(shift(f.vars[0]), shift(f.vars[1])))
            .collect(),
    )
}

/// One pinning step that keeps a good factor list.
pub fn reduce_arity_good(f: &Constraint, l: &FactorList) -> Result<ArityReduction> {
    let k = f.arity();
    if k < 3 {
        return Err(Error::Precondition(format!("arity reduction needs arity ≥ 3, got {k}")));
    }
    if l.arity != k || !is_good_list(&f.underlying_relation(), l) {
        return Err(Error::Precondition("factor list is not good for R_f".into()));
    }
    let g = ImpGraph::of_list(k, l);
    let sink = (0..k).find(|&i| g.out_degree(i) == 0 && g.degree(i) == 1);
    let (case, pins, edge) = if let Some(i) = sink {
        let &(j, _) = g.edges.iter().find(|&&(_, b)| b == i).unwrap();
        if g.degree(j) > 1 {
            (ArityCase::SinkPin, vec![(i, 1)], (j, i))
        } else {
            (ArityCase::PairPin, vec![(i, 1), (j, 1)], (j, i))
        }
    } else {
        let i = (0..k)
            .find(|&i| g.in_degree(i) == 0)
            .ok_or_else(|| Error::Invalid("acyclic imp graph without a source".into()))?;
        let &(_, j) = g.edges.iter().find(|&&(a, _)| a == i).unwrap();
        (ArityCase::SourcePin, vec![(i, 0)], (i, j))
    };
    let (h, steps) = pin_steps(f, &pins)?;
    let removed: Vec<usize> = pins.iter().map(|p| p.0).collect();
    let list = reindex(l, &removed, edge);
    Ok(ArityReduction { case, h, pins, steps, list })
}

#[derive(Clone, Debug)]
pub struct NzWitness {
    /// The two surviving original variables, in order.
    pub pair: (usize, usize),
    pub pins: Vec<(usize, u8)>,
    /// Pinnings then one normalization.
    pub steps: Vec<StepOp>,
    /// `(1, x, y, z)` with `xyz ≠ 0`, `z ≠ xy`.
    pub h: Constraint,
}

/// Pin all but two variables of a non-degenerate NZ constraint, keeping it non-degenerate.
pub fn nz_binary_witness(f: &Constraint) -> Result<NzWitness> {
    let k = f.arity();
    if k < 2 {
        return Err(Error::Precondition("NZ witness needs arity ≥ 2".into()));
    }
    if !is_nonzero(f) {
        return Err(Error::Precondition("NZ witness needs f ∈ NZ".into()));
    }
    if is_degenerate(f).is_some() {
        return Err(Error::Precondition("f is degenerate: every ratio function is constant".into()));
    }
    let set = |x: usize, v: usize, b: u8| -> usize {
        let s = k - 1 - v;
        (x & !(1 << s)) | ((b as usize) << s)
    };
    // g_i(x) = f(x; x_i=1) / f(x; x_i=0), indexed by full indices with x_i = 0
    let ratio = |i: usize, x: usize| -> ComplexRat { f.at(set(x, i, 1)) / f.at(set(x, i, 0)) };
    for i in 0..k {
        let base: Vec<usize> = (0..1usize << k).filter(|&x| (x >> (k - 1 - i)) & 1 == 0).collect();
        let r0 = ratio(i, base[0]);
        if base.iter().all(|&x| ratio(i, x) == r0) {
            continue;
        }
        for j in (0..k).filter(|&j| j != i) {
            let rest: Vec<usize> = (0..k).filter(|&v| v != i && v != j).collect();
            for p in 0..1usize << rest.len() {
                let mut x = 0usize;
                for (q, &v) in rest.iter().enumerate() {
                    let b = ((p >> (rest.len() - 1 - q)) & 1) as u8;
                    x = set(x, v, b);
                }
                if ratio(i, set(x, j, 0)) != ratio(i, set(x, j, 1)) {
                    let pins: Vec<(usize, u8)> =
                        rest.iter().enumerate().map(|(q, &v)| (v, ((p >> (rest.len() - 1 - q)) & 1) as u8)).collect();
                    let (raw, mut steps) = pin_steps(f, &pins)?;
                    let lambda = raw.at(0).inv().expect("f is nowhere zero");
                    let h = raw.map_scale(&lambda);
                    steps.push(StepOp::Normalization { lambda });
                    debug_assert!(h.at(0).is_one());
                    let pair = (i.min(j), i.max(j));
                    return Ok(NzWitness { pair, pins, steps, h });
                }
            }
        }
    }
    Err(Error::Invalid("non-degenerate NZ constraint without a non-constant ratio".into()))
}
