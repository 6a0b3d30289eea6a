//! Node-weighted independent sets and frames over `NAND` plus unaries.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use super::ConstraintFrame;
use crate::complex::ComplexRat;
use crate::constraint::Constraint;
use crate::error::{Error, Result};
use crate::par;

/// Simple undirected graph with nonzero weights `w_x = [w_x(0), w_x(1)]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedGraph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    weights: Vec<[ComplexRat; 2]>,
}

impl WeightedGraph {
    /// Edges are normalized to `(min, max)` and deduplicated.
    pub fn new(num_nodes: usize, edges: Vec<(usize, usize)>, weights: Vec<[ComplexRat; 2]>) -> Result<Self> {
        if weights.len() != num_nodes {
            return Err(Error::Argument(format!("{} weight(s) for {num_nodes} node(s)", weights.len())));
        }
        if let Some(v) = weights.iter().position(|w| w[0].is_zero() || w[1].is_zero()) {
            return Err(Error::Argument(format!("weight of node {} vanishes somewhere", v + 1)));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= num_nodes || b >= num_nodes {
                return Err(Error::Index(format!("edge ({}, {}) outside 1..{num_nodes}", a + 1, b + 1)));
            }
            if a == b {
                return Err(Error::Argument(format!("self-loop at node {}", a + 1)));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(WeightedGraph { num_nodes, edges: set.into_iter().collect(), weights })
    }

    /// All nodes weighted `[1, 1]`.
    pub fn unweighted(num_nodes: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        WeightedGraph::new(num_nodes, edges, vec![[ComplexRat::one(), ComplexRat::one()]; num_nodes])
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn weights(&self) -> &[[ComplexRat; 2]] {
        &self.weights
    }

    /// `Σ_{S independent} Π_x w_x([x ∈ S])` by enumeration.
    pub fn is_sum(&self, cap: usize) -> Result<ComplexRat> {
        let n = self.num_nodes;
        if n > cap {
            return Err(Error::Budget { what: "independent-set enumeration".into(), needed: n, cap });
        }
        let masks: Vec<usize> = self.edges.iter().map(|&(a, b)| (1 << a) | (1 << b)).collect();
        Ok(par::sum_range(1usize << n, cfg!(feature = "parallel"), |s| {
            if masks.iter().any(|m| s & m == *m) {
                return ComplexRat::zero();
            }
            (0..n).map(|x| self.weights[x][(s >> x) & 1].clone()).product()
        }))
    }
}

/// One `NAND` per edge and one unary `w_x` per node.
pub fn is_to_frame(g: &WeightedGraph) -> ConstraintFrame {
    let mut f = ConstraintFrame::new(g.num_nodes);
    if !g.edges.is_empty() {
        f.define("NAND", Constraint::nand()).expect("fresh frame");
        for &(a, b) in &g.edges {
            f.add("NAND", &[a, b]).expect("edge endpoints are in range");
        }
    }
    for (x, w) in g.weights.iter().enumerate() {
        let name = f.define_fresh("w", Constraint::unary(w[0].clone(), w[1].clone()));
        f.add(&name, &[x]).expect("node index is in range");
    }
    f
}

/// Merge the unaries on each variable and the parallel `NAND`s into a weighted graph.
pub fn frame_to_is(frame: &ConstraintFrame) -> Result<WeightedGraph> {
    let n = frame.num_vars();
    let mut weights = vec![[ComplexRat::one(), ComplexRat::one()]; n];
    let mut edges = Vec::new();
    let nand = Constraint::nand();
    for a in frame.applications() {
        let c = &frame.library()[&a.name];
        if *c == nand {
            if a.scope[0] == a.scope[1] {
                return Err(Error::Precondition(format!("`{}` is applied to x{} twice", a.name, a.scope[0] + 1)));
            }
            edges.push((a.scope[0], a.scope[1]));
        } else if c.arity() == 1 {
            if c.values().iter().any(|v| v.is_zero()) {
                return Err(Error::Precondition(format!("unary `{}` = {c} is not nonzero", a.name)));
            }
            let w = &mut weights[a.scope[0]];
            w[0] *= c.at(0);
            w[1] *= c.at(1);
        } else {
            return Err(Error::Precondition(format!("`{}` = {c} is neither NAND nor unary", a.name)));
        }
    }
    WeightedGraph::new(n, edges, weights)
}

/// Replace `NAND` by `OR` and every unary `[a,b]` by `[b,a]`.
pub fn swap_roles(frame: &ConstraintFrame) -> Result<ConstraintFrame> {
    let mut out = ConstraintFrame::new(frame.num_vars());
    let nand = Constraint::nand();
    for a in frame.applications() {
        let c = &frame.library()[&a.name];
        let (base, swapped) = if *c == nand {
            ("OR".to_string(), Constraint::or())
        } else if c.arity() == 1 {
            (a.name.clone(), Constraint::unary(c.at(1).clone(), c.at(0).clone()))
        } else {
            return Err(Error::Precondition(format!("`{}` = {c} is neither NAND nor unary", a.name)));
        };
        let name = out.define_fresh(&base, swapped);
        out.add(&name, &a.scope)?;
    }
    Ok(out)
}
