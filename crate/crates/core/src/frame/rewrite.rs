//! Rewriting a frame that uses `f` into one that uses the inputs of the step
//! that built `f`.

use num_traits::One;

use super::{Application, ConstraintFrame};
use crate::complex::ComplexRat;
use crate::constraint::Constraint;
use crate::construct::{Env, StepOp, TStep};
use crate::error::{Error, Result};

/// A rewritten frame and the factor `c` with `csp(original) = c · csp(frame)`.
#[derive(Clone, Debug)]
pub struct Rewrite {
    pub frame: ConstraintFrame,
    pub correction: ComplexRat,
}

/// Replace every application of `step.output` by applications of the step's inputs.
pub fn rewrite_frame(frame: &ConstraintFrame, step: &TStep, env: &Env) -> Result<Rewrite> {
    let f_name = &step.output;
    let f = frame
        .constraint(f_name)
        .ok_or_else(|| Error::Argument(format!("frame does not define `{f_name}`")))?;
    let built = step.apply(env)?;
    if built != *f {
        return Err(Error::Argument(format!(
            "step output {built} does not match the frame's `{f_name}` = {f}"
        )));
    }
    let mut out = ConstraintFrame::new(frame.num_vars());
    for (name, c) in frame.library() {
        if name != f_name {
            out.define(name, c.clone())?;
        }
    }
    for name in &step.inputs {
        if name == f_name {
            return Err(Error::Argument(format!("step reads its own output `{name}`")));
        }
        out.define(name, env[name].clone())?;
    }
    let delta_names: Option<[String; 2]> = match step.op {
        StepOp::Pinning { .. } => {
            Some([out.define_fresh("Delta0", Constraint::delta0()), out.define_fresh("Delta1", Constraint::delta1())])
        }
        _ => None,
    };
    let mut correction = ComplexRat::one();
    let mut apps: Vec<Application> = Vec::new();
    let g = step.inputs[0].clone();
    for a in frame.applications() {
        if a.name != *f_name {
            apps.push(a.clone());
            continue;
        }
        let s = &a.scope;
        match &step.op {
            StepOp::Permutation { i, j } => {
                let mut t = s.clone();
                t.swap(i - 1, j - 1);
                apps.push(Application { name: g.clone(), scope: t });
            }
            StepOp::Pinning { i, c } => {
                let v = out.add_var();
                let mut t = s.clone();
                t.insert(i - 1, v);
                apps.push(Application { name: g.clone(), scope: t });
                let d = &delta_names.as_ref().unwrap()[*c as usize];
                apps.push(Application { name: d.clone(), scope: vec![v] });
            }
            StepOp::Projection { i } => {
                // one fresh variable per occurrence; sharing it across occurrences would couple them
                let v = out.add_var();
                let mut t = s.clone();
                t.insert(i - 1, v);
                apps.push(Application { name: g.clone(), scope: t });
            }
            StepOp::Linking { i, j } => {
                let jj = if j < i { *j } else { j - 1 };
                let mut t = s.clone();
                t.insert(i - 1, s[jj - 1]);
                apps.push(Application { name: g.clone(), scope: t });
            }
            StepOp::Expansion { position } => {
                let mut t = s.clone();
                t.remove(*position);
                apps.push(Application { name: g.clone(), scope: t });
            }
            StepOp::Multiplication { scope1, scope2, .. } => {
                let g2 = step.inputs[1].clone();
                apps.push(Application { name: g.clone(), scope: scope1.iter().map(|&p| s[p - 1]).collect() });
                apps.push(Application { name: g2, scope: scope2.iter().map(|&p| s[p - 1]).collect() });
            }
            StepOp::Normalization { lambda } => {
                correction *= lambda;
                apps.push(Application { name: g.clone(), scope: s.clone() });
            }
        }
    }
    for a in apps {
        out.add(&a.name, &a.scope)?;
    }
    out.prune_library();
    Ok(Rewrite { frame: out, correction })
}
