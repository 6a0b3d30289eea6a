//! Constraint frames (instances) and the brute-force evaluator.
//!
//! Variables are 0-based internally and printed as `x1..xn`.

mod holant;
mod rewrite;
mod translate;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::complex::ComplexRat;
use crate::constraint::Constraint;
use crate::error::{Error, Result};
use crate::par;

pub use holant::{eval_holant, eval_holant_with, to_holant, SignatureGrid};
pub use rewrite::{rewrite_frame, Rewrite};
pub use translate::{frame_to_is, is_to_frame, swap_roles, WeightedGraph};

/// Default limit on brute-force enumeration, as a power of two.
pub const DEFAULT_CAP: usize = 24;

#[derive(Clone, Debug)]
pub struct EvalOptions {
    /// Largest `log2` of the number of enumerated terms.
    pub cap: usize,
    /// Split enumeration over rayon workers (ignored without the `parallel` feature).
    pub parallel: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { cap: DEFAULT_CAP, parallel: true }
    }
}

impl EvalOptions {
    pub fn sequential() -> Self {
        EvalOptions { parallel: false, ..Self::default() }
    }

    pub fn with_cap(cap: usize) -> Self {
        EvalOptions { cap, ..Self::default() }
    }
}

/// One use of a named constraint on an ordered list of variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Application {
    pub name: String,
    pub scope: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintFrame {
    num_vars: usize,
    library: BTreeMap<String, Constraint>,
    apps: Vec<Application>,
}

impl ConstraintFrame {
    pub fn new(num_vars: usize) -> Self {
        ConstraintFrame { num_vars, library: BTreeMap::new(), apps: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn applications(&self) -> &[Application] {
        &self.apps
    }

    pub fn library(&self) -> &BTreeMap<String, Constraint> {
        &self.library
    }

    pub fn constraint(&self, name: &str) -> Option<&Constraint> {
        self.library.get(name)
    }

    /// Add a fresh variable and return its index.
    pub fn add_var(&mut self) -> usize {
        self.num_vars += 1;
        self.num_vars - 1
    }

    /// Register `name`; redefining it with a different table is an error.
    pub fn define(&mut self, name: &str, c: Constraint) -> Result<()> {
        match self.library.get(name) {
            Some(old) if *old != c => Err(Error::Argument(format!("constraint `{name}` is already defined differently"))),
            _ => {
                self.library.insert(name.to_string(), c);
                Ok(())
            }
        }
    }

    /// Register `c` under `base` or a suffixed variant and return the name used.
    pub fn define_fresh(&mut self, base: &str, c: Constraint) -> String {
        if self.library.get(base).is_none_or(|old| *old == c) {
            self.library.insert(base.to_string(), c);
            return base.to_string();
        }
        if let Some((name, _)) = self.library.iter().find(|(_, t)| **t == c) {
            return name.clone();
        }
        let mut n = 2;
        loop {
            let name = format!("{base}_{n}");
            if !self.library.contains_key(&name) {
                self.library.insert(name.clone(), c);
                return name;
            }
            n += 1;
        }
    }

    /// Apply a defined constraint to 0-based variables.
    pub fn add(&mut self, name: &str, scope: &[usize]) -> Result<()> {
        let c = self.library.get(name).ok_or_else(|| Error::Argument(format!("constraint `{name}` is not defined")))?;
        if c.arity() != scope.len() {
            return Err(Error::Arity(format!(
                "`{name}` has arity {} but is applied to {} variable(s)",
                c.arity(),
                scope.len()
            )));
        }
        if let Some(&v) = scope.iter().find(|&&v| v >= self.num_vars) {
            return Err(Error::Index(format!("variable x{} outside x1..x{}", v + 1, self.num_vars)));
        }
        self.apps.push(Application { name: name.to_string(), scope: scope.to_vec() });
        Ok(())
    }

    /// `define` then `add`.
    pub fn apply(&mut self, name: &str, c: Constraint, scope: &[usize]) -> Result<()> {
        self.define(name, c)?;
        self.add(name, scope)
    }

    /// Number of applications of `name`.
    pub fn occurrences(&self, name: &str) -> usize {
        self.apps.iter().filter(|a| a.name == name).count()
    }

    /// Names actually applied, in first-use order.
    pub fn used_names(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for a in &self.apps {
            if !out.contains(&a.name) {
                out.push(a.name.clone());
            }
        }
        out
    }

    /// Drop library entries no application refers to.
    pub fn prune_library(&mut self) {
        let used = self.used_names();
        self.library.retain(|k, _| used.contains(k));
    }

    /// Number of applications touching each variable.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.num_vars];
        for a in &self.apps {
            for &v in &a.scope {
                d[v] += 1;
            }
        }
        d
    }

    /// The applications as `(table, scope)` pairs.
    pub fn resolved(&self) -> Vec<(&Constraint, &[usize])> {
        self.apps.iter().map(|a| (&self.library[&a.name], a.scope.as_slice())).collect()
    }

    pub(crate) fn from_parts(num_vars: usize, library: BTreeMap<String, Constraint>, apps: Vec<Application>) -> Result<Self> {
        let mut f = ConstraintFrame { num_vars, library, apps: Vec::new() };
        for a in apps {
            f.add(&a.name, &a.scope)?;
        }
        Ok(f)
    }
}

impl fmt::Display for ConstraintFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::io::write_frame(self))
    }
}

/// `csp_Ω = Σ_σ Π_a f_a(σ|scope_a)` with default options.
pub fn eval_frame(frame: &ConstraintFrame) -> Result<ComplexRat> {
    eval_frame_with(frame, &EvalOptions::default())
}

pub fn eval_frame_with(frame: &ConstraintFrame, opts: &EvalOptions) -> Result<ComplexRat> {
    let n = frame.num_vars();
    if n > opts.cap {
        return Err(Error::Budget { what: "brute-force frame evaluation".into(), needed: n, cap: opts.cap });
    }
    let apps = frame.resolved();
    Ok(par::sum_range(1usize << n, opts.parallel, |sigma| {
        let mut acc = ComplexRat::one();
        for (c, scope) in &apps {
            let idx = crate::classify::gather(sigma, scope, n);
            let v = c.at(idx);
            if v.is_zero() {
                return ComplexRat::zero();
            }
            acc *= v;
        }
        acc
    }))
}
