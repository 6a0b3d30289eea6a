//! Self-checking gadget chains that T-construct `OR` from a constraint
//! outside ED (with free unaries).
//!
//! A trace is a list of gadget applications sharing one name environment
//! that starts with `f`, the target. Every intermediate table a gadget claims
//! is recomputed by brute force when the step is emitted and again by
//! [`ReductionTrace::verify`].

mod branches;
mod gadgets;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classify::{has_imp_support, is_in_ed, is_nonzero};
use crate::constraint::Constraint;
use crate::construct::{Env, StepOp, TStep};
use crate::error::{Error, Result};

pub use gadgets::{
    gadget_0ab0, gadget_0ab1, gadget_1a0b, gadget_1xyz, gadget_implies_from_or, gadget_nand_or, gadget_or_from_implies,
    Direction, Variant,
};

/// Name of the target constraint in every trace.
pub const TARGET: &str = "f";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// `f` has imp support.
    Imp,
    /// No imp support and `f ∉ NZ`.
    NoImp,
    /// `f ∈ NZ`, not degenerate.
    Nz,
    /// A single gadget run on its own.
    Gadget,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Branch::Imp => "imp support",
            Branch::NoImp => "no imp support, not NZ",
            Branch::Nz => "NZ, not DG",
            Branch::Gadget => "gadget",
        };
        write!(f, "{s}")
    }
}

/// What the last step of a trace must be proportional to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Goal {
    Or,
    Nand,
    Implies,
    Xor,
}

impl Goal {
    pub fn table(self) -> Constraint {
        match self {
            Goal::Or => Constraint::or(),
            Goal::Nand => Constraint::nand(),
            Goal::Implies => Constraint::implies(),
            Goal::Xor => Constraint::xor(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub name: String,
    pub table: Constraint,
}

/// One gadget application.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub gadget: String,
    pub inputs: Vec<String>,
    /// Unary helpers introduced by this step.
    #[serde(default)]
    pub helpers: Vec<Claim>,
    pub ops: Vec<TStep>,
    /// Intermediate tables stated by the construction.
    #[serde(default)]
    pub claims: Vec<Claim>,
    pub output: Claim,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub target: Constraint,
    pub branch: Branch,
    pub goal: Goal,
    pub steps: Vec<TraceStep>,
    #[serde(rename = "final")]
    pub final_table: Constraint,
}

fn mismatch(step: &str, computed: &Constraint, claimed: &Constraint) -> Error {
    Error::Verification { step: step.to_string(), computed: Box::new(computed.clone()), claimed: Box::new(claimed.clone()) }
}

impl ReductionTrace {
    /// Replay every step from the target alone and check all claims.
    pub fn verify(&self) -> Result<()> {
        let mut env = Env::new();
        env.insert(TARGET.to_string(), self.target.clone());
        let fresh = |env: &Env, name: &str, step: &str| -> Result<()> {
            if env.contains_key(name) {
                return Err(Error::Invalid(format!("`{step}` rebinds `{name}`")));
            }
            Ok(())
        };
        for s in &self.steps {
            for i in &s.inputs {
                if !env.contains_key(i) {
                    return Err(Error::Invalid(format!("`{}` reads undefined `{i}`", s.gadget)));
                }
            }
            for h in &s.helpers {
                if h.table.arity() != 1 {
                    return Err(Error::Invalid(format!("`{}` helper `{}` is not unary", s.gadget, h.name)));
                }
                fresh(&env, &h.name, &s.gadget)?;
                env.insert(h.name.clone(), h.table.clone());
            }
            for op in &s.ops {
                fresh(&env, &op.output, &s.gadget)?;
                let out = op.apply(&env)?;
                env.insert(op.output.clone(), out);
            }
            for c in s.claims.iter().chain(std::iter::once(&s.output)) {
                let got = env.get(&c.name).ok_or_else(|| Error::Invalid(format!("`{}` claims undefined `{}`", s.gadget, c.name)))?;
                if *got != c.table {
                    return Err(mismatch(&s.gadget, got, &c.table));
                }
            }
        }
        let last = self.steps.last().map(|s| &s.output.table).unwrap_or(&self.target);
        if *last != self.final_table {
            return Err(mismatch("final", last, &self.final_table));
        }
        if !self.final_table.is_proportional(&self.goal.table()) {
            return Err(mismatch("final", &self.final_table, &self.goal.table()));
        }
        Ok(())
    }

    /// Every claimed table in order, outputs included.
    pub fn claimed_tables(&self) -> impl Iterator<Item = &Constraint> {
        self.steps.iter().flat_map(|s| s.claims.iter().chain(std::iter::once(&s.output)).map(|c| &c.table))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("traces always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.column(), e.to_string()))
    }
}

impl fmt::Display for ReductionTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "target {} ({})", self.target, self.branch)?;
        for (n, s) in self.steps.iter().enumerate() {
            writeln!(f, "{:>3}. {} [{}] -> {} = {}", n + 1, s.gadget, s.inputs.join(", "), s.output.name, s.output.table)?;
            for h in &s.helpers {
                writeln!(f, "       helper {} = {}", h.name, h.table)?;
            }
            for c in &s.claims {
                writeln!(f, "       claim {} = {}", c.name, c.table)?;
            }
        }
        write!(f, "final {} ∝ {:?}", self.final_table, self.goal)
    }
}

/// Emits trace steps and checks each claim as it goes.
pub(crate) struct Builder {
    env: Env,
    steps: Vec<TraceStep>,
    open: Option<TraceStep>,
    next: usize,
}

impl Builder {
    pub(crate) fn new(target: &Constraint) -> Self {
        let mut env = Env::new();
        env.insert(TARGET.to_string(), target.clone());
        Builder { env, steps: Vec::new(), open: None, next: 0 }
    }

    pub(crate) fn table(&self, name: &str) -> &Constraint {
        &self.env[name]
    }

    fn fresh(&mut self, prefix: &str) -> String {
        self.next += 1;
        format!("{prefix}{}", self.next)
    }

    fn current(&mut self) -> &mut TraceStep {
        self.open.as_mut().expect("no gadget step is open")
    }

    pub(crate) fn begin(&mut self, gadget: &str, inputs: &[&str]) {
        assert!(self.open.is_none(), "gadget step `{gadget}` opened inside another");
        self.open = Some(TraceStep {
            gadget: gadget.to_string(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            helpers: Vec::new(),
            ops: Vec::new(),
            claims: Vec::new(),
            output: Claim { name: String::new(), table: Constraint::zero(0) },
        });
    }

    pub(crate) fn helper(&mut self, u: Constraint) -> String {
        debug_assert_eq!(u.arity(), 1);
        let name = self.fresh("u");
        self.env.insert(name.clone(), u.clone());
        self.current().helpers.push(Claim { name: name.clone(), table: u });
        name
    }

    pub(crate) fn op(&mut self, op: StepOp, inputs: &[&str]) -> Result<String> {
        let name = self.fresh("g");
        let step = TStep::new(op, inputs, &name);
        let out = step.apply(&self.env)?;
        self.env.insert(name.clone(), out);
        self.current().ops.push(step);
        Ok(name)
    }

    pub(crate) fn claim(&mut self, name: &str, table: Constraint) -> Result<()> {
        if self.env[name] != table {
            let gadget = self.current().gadget.clone();
            return Err(mismatch(&gadget, &self.env[name], &table));
        }
        self.current().claims.push(Claim { name: name.to_string(), table });
        Ok(())
    }

    pub(crate) fn finish(&mut self, output: &str) -> String {
        let mut s = self.open.take().expect("no gadget step is open");
        s.output = Claim { name: output.to_string(), table: self.env[output].clone() };
        // the output is checked through `output`; drop a duplicate claim on it
        if s.claims.last().is_some_and(|c| c.name == output) {
            s.claims.pop();
        }
        self.steps.push(s);
        output.to_string()
    }

    pub(crate) fn into_trace(self, target: &Constraint, branch: Branch, goal: Goal) -> Result<ReductionTrace> {
        let final_table = self.steps.last().map(|s| s.output.table.clone()).unwrap_or_else(|| target.clone());
        let t = ReductionTrace { target: target.clone(), branch, goal, steps: self.steps, final_table };
        t.verify()?;
        Ok(t)
    }
}

/// Which branch `reduce` takes for `f ∉ ED`.
pub fn branch_of(f: &Constraint) -> Result<Branch> {
    if let Some(cert) = is_in_ed(f) {
        return Err(Error::Precondition(format!("f is in ED ({cert}); there is nothing to reduce")));
    }
    Ok(if has_imp_support(f)?.holds() {
        Branch::Imp
    } else if is_nonzero(f) {
        Branch::Nz
    } else {
        Branch::NoImp
    })
}

/// A verified trace from `f ∉ ED` to a constraint proportional to `OR`.
pub fn reduce(f: &Constraint) -> Result<ReductionTrace> {
    match branch_of(f)? {
        Branch::Imp => reduce_imp_branch(f),
        Branch::Nz => reduce_nz_branch(f),
        Branch::NoImp => reduce_no_imp_branch(f),
        Branch::Gadget => unreachable!(),
    }
}

pub use branches::{reduce_imp_branch, reduce_no_imp_branch, reduce_nz_branch};
