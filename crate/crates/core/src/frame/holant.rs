//! The bipartite signature-grid view of a frame.

use num_traits::{One, Zero};

use super::{ConstraintFrame, EvalOptions};
use crate::complex::ComplexRat;
use crate::constraint::{Constraint, MAX_ARITY};
use crate::error::{Error, Result};
use crate::par;

/// Left nodes (equalities), right nodes (constraints) and edges `(left, right)`.
/// A node reads its incident edges in edge-list order.
#[derive(Clone, Debug)]
pub struct SignatureGrid {
    pub left: Vec<Constraint>,
    pub right: Vec<Constraint>,
    pub edges: Vec<(usize, usize)>,
}

impl SignatureGrid {
    pub fn new(left: Vec<Constraint>, right: Vec<Constraint>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let g = SignatureGrid { left, right, edges };
        g.validate()?;
        Ok(g)
    }

    fn incident(&self, side: usize, node: usize) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, &(l, r))| if side == 0 { l == node } else { r == node })
            .map(|(e, _)| e)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(&(l, r)) = self.edges.iter().find(|&&(l, r)| l >= self.left.len() || r >= self.right.len()) {
            return Err(Error::Index(format!("edge ({l},{r}) has a missing endpoint")));
        }
        for (side, nodes) in [(0, &self.left), (1, &self.right)] {
            for (v, c) in nodes.iter().enumerate() {
                let d = self.incident(side, v).len();
                if d != c.arity() {
                    return Err(Error::Arity(format!(
                        "{} node {v} has degree {d} but its label has arity {}",
                        if side == 0 { "left" } else { "right" },
                        c.arity()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One `EQ_k` per variable (`k` = occurrence count) and one node per application.
/// A variable with no occurrence becomes an `EQ_1` joined to an all-ones unary.
pub fn to_holant(frame: &ConstraintFrame) -> Result<SignatureGrid> {
    let deg = frame.degrees();
    let mut left: Vec<Constraint> = Vec::with_capacity(frame.num_vars());
    for (v, &d) in deg.iter().enumerate() {
        if d > MAX_ARITY {
            return Err(Error::Arity(format!("x{} occurs {d} times; EQ_{d} is too large to tabulate", v + 1)));
        }
        left.push(Constraint::eq(d.max(1)));
    }
    let mut right = Vec::new();
    let mut edges = Vec::new();
    for (c, scope) in frame.resolved() {
        let r = right.len();
        right.push(c.clone());
        for &v in scope {
            edges.push((v, r));
        }
    }
    for (v, &d) in deg.iter().enumerate() {
        if d == 0 {
            let r = right.len();
            right.push(Constraint::constant(1, ComplexRat::one()));
            edges.push((v, r));
        }
    }
    SignatureGrid::new(left, right, edges)
}

pub fn eval_holant(grid: &SignatureGrid) -> Result<ComplexRat> {
    eval_holant_with(grid, &EvalOptions::default())
}

/// `Σ_{σ ∈ {0,1}^E} Π_v f_v(σ|E(v))`.
pub fn eval_holant_with(grid: &SignatureGrid, opts: &EvalOptions) -> Result<ComplexRat> {
    grid.validate()?;
    let m = grid.edges.len();
    if m > opts.cap {
        return Err(Error::Budget { what: "Holant edge enumeration".into(), needed: m, cap: opts.cap });
    }
    let nodes: Vec<(&Constraint, Vec<usize>)> = grid
        .left
        .iter()
        .enumerate()
        .map(|(v, c)| (c, grid.incident(0, v)))
        .chain(grid.right.iter().enumerate().map(|(v, c)| (c, grid.incident(1, v))))
        .collect();
    Ok(par::sum_range(1usize << m, opts.parallel, |sigma| {
        let mut acc = ComplexRat::one();
        for (c, es) in &nodes {
            let idx = es.iter().fold(0usize, |a, &e| (a << 1) | ((sigma >> (m - 1 - e)) & 1));
            let val = c.at(idx);
            if val.is_zero() {
                return ComplexRat::zero();
            }
            acc *= val;
        }
        acc
    }))
}
