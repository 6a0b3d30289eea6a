use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_rational::BigRational;

use sharpcsp::approx::{eliminate_pinning, is_approx, ApproxOracle, DBound, ExactOracle, NoisyOracle, Pin, PinningConfig};
use sharpcsp::classify::{classify, is_in_ed, FactorKind, ImpWitness};
use sharpcsp::complex::parse_rational;
use sharpcsp::ed_solver::{certify_ed, solve_ed};
use sharpcsp::frame::{eval_frame, eval_frame_with, frame_to_is, is_to_frame, swap_roles, EvalOptions, DEFAULT_CAP};
use sharpcsp::io::{read_constraint, read_frame, read_graph, write_frame, write_graph};
use sharpcsp::reductions::{reduce, ReductionTrace};
use sharpcsp::{ComplexRat, Error};

#[derive(Parser)]
#[command(name = "sharpcsp", version, about = "Classify, count and reduce complex-weighted Boolean #CSP instances")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print every class membership of a constraint, with certificates.
    Classify { constraint: PathBuf },
    /// Count a frame exactly: ED solver if possible, else brute force.
    Solve {
        frame: PathBuf,
        #[arg(long)]
        force_bruteforce: bool,
        /// Brute-force limit on the number of variables.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Emit a verified trace constructing OR from a constraint outside ED.
    Reduce {
        #[arg(long)]
        constraint: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay a trace file and check every claimed table.
    Verify {
        #[arg(long)]
        trace: PathBuf,
    },
    /// Eliminate a Δ0 (or Δ1) from a frame through an approximation oracle.
    ApproxDemo {
        #[arg(long)]
        frame: PathBuf,
        #[arg(long)]
        epsilon: String,
        #[arg(long, default_value = "1/2")]
        lambda: String,
        /// Lower bound on |csp| when nonzero; computed exactly if absent.
        #[arg(long)]
        d: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Ask the exact evaluator instead of the seeded noisy one.
        #[arg(long)]
        exact: bool,
        /// Eliminate Δ1 instead of Δ0.
        #[arg(long)]
        delta1: bool,
    },
    /// Convert between weighted independent-set graphs and frames.
    Translate {
        /// Graph file to turn into a NAND frame.
        #[arg(long, group = "mode")]
        is: Option<PathBuf>,
        /// NAND-plus-unaries frame to turn into a graph.
        #[arg(long, group = "mode")]
        to_is: Option<PathBuf>,
        /// Frame whose NANDs become ORs with swapped unaries.
        #[arg(long, group = "mode")]
        swap: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also count both sides by brute force and compare.
        #[arg(long)]
        check: bool,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Arity(_) | Error::Index(_) | Error::Argument(_) => 2,
        Error::Precondition(_) | Error::Config(_) => 3,
        Error::Verification { .. } | Error::Invalid(_) => 4,
        Error::Budget { .. } => 5,
    }
}

fn rational(s: &str, what: &str) -> Result<BigRational, Error> {
    parse_rational(s).map_err(|m| Error::Config(format!("--{what}: {m}")))
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Argument(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_classify(path: &Path) -> Result<(), Error> {
    let f = read_constraint(path)?;
    let r = classify(&f)?;
    let k = r.arity;
    let summary = match (&r.certificate, &r.witness) {
        (Some(l), _) if l.factors.len() == 1 => {
            let kind = match l.factors[0].kind {
                FactorKind::Unary => "unary",
                FactorKind::Eq => "EQ",
                FactorKind::Xor => "XOR",
                FactorKind::Delta0 => "Delta0",
                FactorKind::Delta1 => "Delta1",
                FactorKind::Implies => "Implies",
            };
            format!("ED: yes (factor: {kind})")
        }
        (Some(l), _) => format!("ED: yes (factors: {l})"),
        (None, _) if r.has_imp_support => "ED: no; imp support: yes".to_string(),
        (None, Some(ImpWitness::Pair { a, b, .. })) => format!("ED: no; imp support: no (witness {a:0k$b},{b:0k$b})"),
        (None, _) => "ED: no; imp support: no (full relation)".to_string(),
    };
    println!("{summary}");
    print!("{r}");
    Ok(())
}

fn cmd_solve(path: &Path, force: bool, cap: usize) -> Result<(), Error> {
    let frame = read_frame(path)?;
    let certs = if force { None } else { certify_ed(&frame) };
    match certs {
        Some(certs) => {
            let v = solve_ed(&frame, &certs)?;
            println!("path: ED solver");
            for (name, l) in &certs {
                println!("  {name} = {l}");
            }
            println!("csp = {v}");
        }
        None => {
            let hard: Vec<String> =
                frame.used_names().into_iter().filter(|n| is_in_ed(&frame.library()[n]).is_none()).collect();
            let v = eval_frame_with(&frame, &EvalOptions::with_cap(cap)).map_err(|e| match e {
                Error::Budget { what, needed, cap } => Error::Budget {
                    what: if hard.is_empty() {
                        what
                    } else {
                        format!("{what} (not in ED: {})", hard.join(", "))
                    },
                    needed,
                    cap,
                },
                e => e,
            })?;
            println!("path: brute force");
            println!("csp = {v}");
        }
    }
    Ok(())
}

fn cmd_reduce(constraint: &Path, out: &Path) -> Result<(), Error> {
    let f = read_constraint(constraint)?;
    let t = reduce(&f)?;
    fs::write(out, t.to_json()).map_err(|e| Error::Argument(format!("cannot write {}: {e}", out.display())))?;
    println!("{t}");
    println!("wrote {} step(s) to {}", t.steps.len(), out.display());
    Ok(())
}

fn cmd_verify(trace: &Path) -> Result<(), Error> {
    let text = fs::read_to_string(trace).map_err(|e| Error::Argument(format!("cannot read {}: {e}", trace.display())))?;
    let t = ReductionTrace::from_json(&text)?;
    t.verify()?;
    println!("OK: {} step(s) verified, final {} ∝ {:?}", t.steps.len(), t.final_table, t.goal);
    Ok(())
}

struct DemoArgs<'a> {
    frame: &'a Path,
    epsilon: &'a str,
    lambda: &'a str,
    d: Option<&'a str>,
    seed: u64,
    exact: bool,
    delta1: bool,
}

fn cmd_approx_demo(a: DemoArgs) -> Result<(), Error> {
    let frame = read_frame(a.frame)?;
    let epsilon = rational(a.epsilon, "epsilon")?;
    let lambda: ComplexRat = a.lambda.parse().map_err(|m| Error::Config(format!("--lambda: {m}")))?;
    let d = match a.d {
        Some(s) => DBound::Given(rational(s, "d")?),
        None => DBound::Exact,
    };
    let cfg = PinningConfig { epsilon: epsilon.clone(), lambda, d: Some(d), pin: a.delta1.then_some(Pin::Delta1) };
    let mut exact = ExactOracle::default();
    let mut noisy = NoisyOracle::new(a.seed);
    let oracle: &mut dyn ApproxOracle = if a.exact { &mut exact } else { &mut noisy };
    let run = eliminate_pinning(&frame, oracle, &cfg)?;
    let truth = eval_frame(&frame)?;
    let ok = is_approx(&run.output, &truth, &epsilon);
    println!("pin: {:?}", run.pin);
    println!("d = {}, delta = {}, |Omega|^2 = {}", run.d, run.delta, run.omega_sq);
    println!("m = {}", run.m);
    println!("Omega_m:");
    print!("{}", write_frame(&run.omega_m));
    println!("oracle answer z = {}", run.z);
    println!("output = {}", run.output);
    println!("exact csp = {truth}");
    println!("is_approx(output, csp, {epsilon}): {}", if ok { "yes" } else { "no" });
    if ok {
        Ok(())
    } else {
        Err(Error::Invalid("output is not a 2^ε-approximation".into()))
    }
}

fn cmd_translate(is: &Option<PathBuf>, to_is: &Option<PathBuf>, swap: &Option<PathBuf>, out: &Option<PathBuf>, check: bool) -> Result<(), Error> {
    let (before, after) = if let Some(p) = is {
        let g = read_graph(p)?;
        let f = is_to_frame(&g);
        write_out(out, &write_frame(&f))?;
        (if check { Some(g.is_sum(DEFAULT_CAP)?) } else { None }, if check { Some(eval_frame(&f)?) } else { None })
    } else if let Some(p) = to_is {
        let f = read_frame(p)?;
        let g = frame_to_is(&f)?;
        write_out(out, &write_graph(&g))?;
        (if check { Some(eval_frame(&f)?) } else { None }, if check { Some(g.is_sum(DEFAULT_CAP)?) } else { None })
    } else if let Some(p) = swap {
        let f = read_frame(p)?;
        let s = swap_roles(&f)?;
        write_out(out, &write_frame(&s))?;
        (if check { Some(eval_frame(&f)?) } else { None }, if check { Some(eval_frame(&s)?) } else { None })
    } else {
        return Err(Error::Argument("translate needs one of --is, --to-is, --swap".into()));
    };
    if let (Some(b), Some(a)) = (before, after) {
        eprintln!("count: input {b}, output {a}");
        if a != b {
            return Err(Error::Invalid(format!("translation changed the count: {b} vs {a}")));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Classify { constraint } => cmd_classify(constraint),
        Cmd::Solve { frame, force_bruteforce, cap } => cmd_solve(frame, *force_bruteforce, *cap),
        Cmd::Reduce { constraint, out } => cmd_reduce(constraint, out),
        Cmd::Verify { trace } => cmd_verify(trace),
        Cmd::ApproxDemo { frame, epsilon, lambda, d, seed, exact, delta1 } => cmd_approx_demo(DemoArgs {
            frame,
            epsilon,
            lambda,
            d: d.as_deref(),
            seed: *seed,
            exact: *exact,
            delta1: *delta1,
        }),
        Cmd::Translate { is, to_is, swap, out, check } => cmd_translate(is, to_is, swap, out, *check),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Error::Verification { step, computed, claimed } = &e {
                eprintln!("verification failed in `{step}`");
                eprintln!("  computed: {computed}");
                eprintln!("  claimed:  {claimed}");
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
