//! The seven T-constructibility operations and a serialisable step type.
//!
//! Variable positions are 1-based, matching `x_1, ..., x_k`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::complex::ComplexRat;
use crate::constraint::{bit, Constraint};
use crate::error::{Error, Result};

fn check_pos(g: &Constraint, i: usize, what: &str) -> Result<()> {
    if i == 0 || i > g.arity() {
        return Err(Error::Index(format!("{what}: position {i} outside 1..={}", g.arity())));
    }
    Ok(())
}

/// Insert bit `b` at 1-based position `pos` of an index with `arity - 1` bits,
/// giving an index with `arity` bits.
#[inline]
fn insert_bit(y: usize, pos: usize, b: u8, arity: usize) -> usize {
    let low_len = arity - pos;
    let high = y >> low_len;
    let low = y & ((1usize << low_len) - 1);
    (high << (low_len + 1)) | ((b as usize) << low_len) | low
}

/// Swap `x_i` and `x_j`.
pub fn permute(g: &Constraint, i: usize, j: usize) -> Result<Constraint> {
    check_pos(g, i, "permute")?;
    check_pos(g, j, "permute")?;
    if i >= j {
        return Err(Error::Index(format!("permute needs i < j, got {i}, {j}")));
    }
    let k = g.arity();
    let (si, sj) = (k - i, k - j);
    Ok(Constraint::from_fn(k, |idx| {
        let (bi, bj) = ((idx >> si) & 1, (idx >> sj) & 1);
        let src = (idx & !(1 << si) & !(1 << sj)) | (bj << si) | (bi << sj);
        g.at(src).clone()
    }))
}

/// `g^{x_i = c}`.
pub fn pin(g: &Constraint, i: usize, c: u8) -> Result<Constraint> {
    if g.arity() == 0 {
        return Err(Error::Arity("cannot pin a constraint of arity 0".into()));
    }
    check_pos(g, i, "pin")?;
    if c > 1 {
        return Err(Error::Argument(format!("pin value {c} is not a bit")));
    }
    let k = g.arity();
    Ok(Constraint::from_fn(k - 1, |y| g.at(insert_bit(y, i, c, k)).clone()))
}

/// `g^{x_i = *}`: sum over `x_i`.
pub fn project(g: &Constraint, i: usize) -> Result<Constraint> {
    if g.arity() == 0 {
        return Err(Error::Arity("cannot project a constraint of arity 0".into()));
    }
    check_pos(g, i, "project")?;
    let k = g.arity();
    Ok(Constraint::from_fn(k - 1, |y| g.at(insert_bit(y, i, 0, k)) + g.at(insert_bit(y, i, 1, k))))
}

/// `g^{x_i = x_j}`: drop `x_i` and read it from `x_j`.
pub fn link(g: &Constraint, i: usize, j: usize) -> Result<Constraint> {
    check_pos(g, i, "link")?;
    check_pos(g, j, "link")?;
    if i == j {
        return Err(Error::Index(format!("link needs distinct positions, got {i} twice")));
    }
    let k = g.arity();
    // position of x_j among the k-1 surviving variables
    let jj = if j < i { j } else { j - 1 };
    Ok(Constraint::from_fn(k - 1, |y| {
        let b = bit(y, jj, k - 1);
        g.at(insert_bit(y, i, b, k)).clone()
    }))
}

/// Add a free variable right after `x_position` (`0` puts it first).
pub fn expand(g: &Constraint, position: usize) -> Result<Constraint> {
    let k = g.arity();
    if position > k {
        return Err(Error::Index(format!("expand: position {position} outside 0..={k}")));
    }
    let new_pos = position + 1;
    Ok(Constraint::from_fn(k + 1, |x| {
        let low_len = k + 1 - new_pos;
        let high = x >> (low_len + 1);
        let low = x & ((1usize << low_len) - 1);
        g.at((high << low_len) | low).clone()
    }))
}

fn check_scope(g: &Constraint, scope: &[usize], out_arity: usize, which: &str) -> Result<()> {
    if scope.len() != g.arity() {
        return Err(Error::Arity(format!(
            "{which}: scope of length {} for a factor of arity {}",
            scope.len(),
            g.arity()
        )));
    }
    if let Some(&p) = scope.iter().find(|&&p| p == 0 || p > out_arity) {
        return Err(Error::Index(format!("{which}: scope entry {p} outside 1..={out_arity}")));
    }
    Ok(())
}

/// Index of a factor whose 1-based scope is `scope`, read from an output index.
#[inline]
pub(crate) fn restrict(x: usize, scope: &[usize], out_arity: usize) -> usize {
    scope.iter().fold(0usize, |acc, &p| (acc << 1) | bit(x, p, out_arity) as usize)
}

/// `out(x) = g1(x|scope1) · g2(x|scope2)` over `out_arity` variables.
pub fn multiply(
    g1: &Constraint,
    g2: &Constraint,
    scope1: &[usize],
    scope2: &[usize],
    out_arity: usize,
) -> Result<Constraint> {
    check_scope(g1, scope1, out_arity, "multiply")?;
    check_scope(g2, scope2, out_arity, "multiply")?;
    let mut covered = vec![false; out_arity];
    for &p in scope1.iter().chain(scope2) {
        covered[p - 1] = true;
    }
    if let Some(missing) = covered.iter().position(|c| !c) {
        return Err(Error::Index(format!("multiply: variable x{} is not covered by either scope", missing + 1)));
    }
    Ok(Constraint::from_fn(out_arity, |x| {
        g1.at(restrict(x, scope1, out_arity)) * g2.at(restrict(x, scope2, out_arity))
    }))
}

/// `λ·g` for `λ ≠ 0`.
pub fn scale(g: &Constraint, lambda: &ComplexRat) -> Result<Constraint> {
    if lambda.is_zero() {
        return Err(Error::Argument("normalization by zero".into()));
    }
    Ok(g.map_scale(lambda))
}

/// Entrywise `g^m` for `m ≥ 1`.
pub fn power(g: &Constraint, m: u64) -> Result<Constraint> {
    if m == 0 {
        return Err(Error::Argument("power needs m ≥ 1".into()));
    }
    Ok(Constraint::from_fn(g.arity(), |i| g.at(i).pow(m)))
}

/// One T-construct operation with its parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum StepOp {
    Permutation { i: usize, j: usize },
    Pinning { i: usize, c: u8 },
    Projection { i: usize },
    Linking { i: usize, j: usize },
    Expansion { position: usize },
    Multiplication { scope1: Vec<usize>, scope2: Vec<usize>, arity: usize },
    Normalization { lambda: ComplexRat },
}

impl StepOp {
    pub fn kind(&self) -> &'static str {
        match self {
            StepOp::Permutation { .. } => "Permutation",
            StepOp::Pinning { .. } => "Pinning",
            StepOp::Projection { .. } => "Projection",
            StepOp::Linking { .. } => "Linking",
            StepOp::Expansion { .. } => "Expansion",
            StepOp::Multiplication { .. } => "Multiplication",
            StepOp::Normalization { .. } => "Normalization",
        }
    }

    pub fn input_count(&self) -> usize {
        match self {
            StepOp::Multiplication { .. } => 2,
            _ => 1,
        }
    }

    pub fn apply(&self, inputs: &[&Constraint]) -> Result<Constraint> {
        if inputs.len() != self.input_count() {
            return Err(Error::Argument(format!(
                "{} takes {} input(s), got {}",
                self.kind(),
                self.input_count(),
                inputs.len()
            )));
        }
        let g = inputs[0];
        match self {
            StepOp::Permutation { i, j } => permute(g, *i, *j),
            StepOp::Pinning { i, c } => pin(g, *i, *c),
            StepOp::Projection { i } => project(g, *i),
            StepOp::Linking { i, j } => link(g, *i, *j),
            StepOp::Expansion { position } => expand(g, *position),
            StepOp::Multiplication { scope1, scope2, arity } => multiply(g, inputs[1], scope1, scope2, *arity),
            StepOp::Normalization { lambda } => scale(g, lambda),
        }
    }
}

impl fmt::Display for StepOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepOp::Permutation { i, j } => write!(f, "permute x{i} x{j}"),
            StepOp::Pinning { i, c } => write!(f, "pin x{i}={c}"),
            StepOp::Projection { i } => write!(f, "project x{i}"),
            StepOp::Linking { i, j } => write!(f, "link x{i}=x{j}"),
            StepOp::Expansion { position } => write!(f, "expand after x{position}"),
            StepOp::Multiplication { scope1, scope2, arity } => {
                write!(f, "multiply {scope1:?}·{scope2:?} -> arity {arity}")
            }
            StepOp::Normalization { lambda } => write!(f, "scale by {lambda}"),
        }
    }
}

/// A named T-construct step: `output = op(inputs...)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TStep {
    #[serde(flatten)]
    pub op: StepOp,
    pub inputs: Vec<String>,
    pub output: String,
}

/// Named constraints available to steps.
pub type Env = BTreeMap<String, Constraint>;

impl TStep {
    pub fn new(op: StepOp, inputs: &[&str], output: &str) -> Self {
        TStep { op, inputs: inputs.iter().map(|s| s.to_string()).collect(), output: output.to_string() }
    }

    /// Evaluate against named inputs.
    pub fn apply(&self, env: &Env) -> Result<Constraint> {
        let inputs = self
            .inputs
            .iter()
            .map(|n| env.get(n).ok_or_else(|| Error::Argument(format!("step input `{n}` is not defined"))))
            .collect::<Result<Vec<_>>>()?;
        self.op.apply(&inputs)
    }
}

/// Uniform dispatcher over the seven operations.
pub fn apply_step(step: &TStep, env: &Env) -> Result<Constraint> {
    step.apply(env)
}

/// Run steps in order, binding each output into `env`.  Returns the last output.
pub fn replay(steps: &[TStep], env: &mut Env) -> Result<Option<Constraint>> {
    let mut last = None;
    for s in steps {
        let out = s.apply(env)?;
        env.insert(s.output.clone(), out.clone());
        last = Some(out);
    }
    Ok(last)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(arity: usize, v: &[i64]) -> Constraint {
        Constraint::from_ints(arity, v).unwrap()
    }

    #[test]
    fn permute_examples() {
        assert_eq!(permute(&ints(2, &[1, 2, 3, 4]), 1, 2).unwrap(), ints(2, &[1, 3, 2, 4]));
        assert_eq!(permute(&Constraint::xor(), 1, 2).unwrap(), Constraint::xor());
        assert_eq!(permute(&Constraint::implies(), 1, 2).unwrap(), ints(2, &[1, 0, 1, 1]));
        assert!(permute(&Constraint::xor(), 2, 1).is_err());
        assert!(permute(&Constraint::xor(), 1, 3).is_err());
    }

    #[test]
    fn pin_examples() {
        assert_eq!(pin(&Constraint::implies(), 1, 1).unwrap(), Constraint::delta1());
        assert_eq!(pin(&Constraint::or(), 2, 0).unwrap(), Constraint::delta1());
        assert_eq!(pin(&Constraint::eq(3), 1, 0).unwrap(), ints(2, &[1, 0, 0, 0]));
        assert!(pin(&Constraint::zero(0), 1, 0).is_err());
    }

    #[test]
    fn project_examples() {
        assert_eq!(project(&Constraint::or(), 2).unwrap(), ints(1, &[1, 2]));
        assert_eq!(project(&Constraint::xor(), 1).unwrap(), ints(1, &[1, 1]));
        assert_eq!(project(&Constraint::eq(2), 1).unwrap(), ints(1, &[1, 1]));
    }

    #[test]
    fn link_examples() {
        assert_eq!(link(&Constraint::nand(), 1, 2).unwrap(), Constraint::delta0());
        assert_eq!(link(&Constraint::eq(3), 1, 2).unwrap(), Constraint::eq(2));
        assert_eq!(link(&Constraint::or(), 1, 2).unwrap(), Constraint::delta1());
        assert!(link(&Constraint::or(), 1, 1).is_err());
        // x3 := x1 in a 3-ary table
        let g = Constraint::from_fn(3, |i| ComplexRat::from_int(i as i64));
        let h = link(&g, 3, 1).unwrap();
        assert_eq!(h, ints(2, &[0, 2, 5, 7]));
    }

    #[test]
    fn expand_examples() {
        assert_eq!(expand(&ints(1, &[1, 2]), 1).unwrap(), ints(2, &[1, 1, 2, 2]));
        assert_eq!(expand(&Constraint::delta0(), 1).unwrap(), ints(2, &[1, 1, 0, 0]));
        assert_eq!(expand(&ints(1, &[1, 2]), 0).unwrap(), ints(2, &[1, 2, 1, 2]));
        let g = ints(2, &[3, 1, 4, 1]);
        for p in 0..=2 {
            let e = expand(&g, p).unwrap();
            assert_eq!(project(&e, p + 1).unwrap(), g.map_scale(&2.into()));
        }
    }

    #[test]
    fn multiply_examples() {
        let imp = Constraint::implies();
        assert_eq!(multiply(&imp, &imp, &[1, 2], &[2, 1], 2).unwrap(), Constraint::eq(2));
        let t = multiply(&imp, &imp, &[1, 2], &[2, 3], 3).unwrap();
        let eq3 = multiply(&t, &imp, &[1, 2, 3], &[3, 1], 3).unwrap();
        assert_eq!(eq3, Constraint::eq(3));
        let g = ints(2, &[5, 0, 2, 9]);
        assert_eq!(multiply(&g, &Constraint::constant(2, 1.into()), &[1, 2], &[1, 2], 2).unwrap(), g);
        assert!(multiply(&imp, &imp, &[1, 2], &[1, 2], 3).is_err());
        assert!(multiply(&imp, &imp, &[1], &[1, 2], 2).is_err());
    }

    #[test]
    fn scale_and_power() {
        assert_eq!(scale(&Constraint::or(), &3.into()).unwrap(), ints(2, &[0, 3, 3, 3]));
        let g = ints(2, &[0, -6, -4, -7]);
        let l = ComplexRat::from_parts(2, 3, 1, 1);
        assert_eq!(scale(&scale(&g, &l).unwrap(), &l.inv().unwrap()).unwrap(), g);
        assert!(scale(&g, &ComplexRat::zero()).is_err());
        assert_eq!(power(&Constraint::xor(), 2).unwrap(), Constraint::xor());
        assert_eq!(power(&ints(1, &[1, 2]), 3).unwrap(), ints(1, &[1, 8]));
        let lam = ComplexRat::ratio(1, 2);
        let u = Constraint::unary(1.into(), lam.clone());
        assert_eq!(power(&u, 5).unwrap(), Constraint::unary(1.into(), lam.pow(5)));
        assert!(power(&u, 0).is_err());
    }

    #[test]
    fn apply_step_examples() {
        let mut env = Env::new();
        env.insert("imp".into(), Constraint::implies());
        env.insert("d0".into(), Constraint::delta0());
        let s = TStep::new(StepOp::Pinning { i: 1, c: 1 }, &["imp"], "a");
        assert_eq!(apply_step(&s, &env).unwrap(), Constraint::delta1());
        let s = TStep::new(StepOp::Normalization { lambda: 2.into() }, &["d0"], "b");
        assert_eq!(apply_step(&s, &env).unwrap(), ints(1, &[2, 0]));
        let s = TStep::new(
            StepOp::Multiplication { scope1: vec![1, 2], scope2: vec![2, 1], arity: 2 },
            &["imp", "imp"],
            "c",
        );
        assert_eq!(apply_step(&s, &env).unwrap(), Constraint::eq(2));
        let missing = TStep::new(StepOp::Projection { i: 1 }, &["nope"], "d");
        assert!(apply_step(&missing, &env).is_err());
    }

    #[test]
    fn tstep_serde() {
        let s = TStep::new(StepOp::Normalization { lambda: ComplexRat::ratio(-1, 3) }, &["g"], "h");
        let js = serde_json::to_string(&s).unwrap();
        assert_eq!(js, r#"{"kind":"Normalization","lambda":[-1,3,0,1],"inputs":["g"],"output":"h"}"#);
        assert_eq!(serde_json::from_str::<TStep>(&js).unwrap(), s);
    }
}
