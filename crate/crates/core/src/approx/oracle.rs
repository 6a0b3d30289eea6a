//! Oracles answering approximate counting queries.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::is_approx;
use crate::complex::ComplexRat;
use crate::error::Result;
use crate::frame::{eval_frame, ConstraintFrame};

/// Answers `(Ω, δ)` with a `2^δ`-approximate solution for `csp_Ω`.
pub trait ApproxOracle {
    fn query(&mut self, frame: &ConstraintFrame, delta: &BigRational) -> Result<ComplexRat>;
}

/// The brute-force evaluator, which is exact.
#[derive(Clone, Debug, Default)]
pub struct ExactOracle {
    pub queries: Vec<BigRational>,
}

impl ApproxOracle for ExactOracle {
    fn query(&mut self, frame: &ConstraintFrame, delta: &BigRational) -> Result<ComplexRat> {
        self.queries.push(delta.clone());
        eval_frame(frame)
    }
}

/// The exact value times a seeded factor `η` with `2^-δ ≤ |η| ≤ 2^δ` and `|arg η| ≤ δ`.
#[derive(Clone, Debug)]
pub struct NoisyOracle {
    rng: ChaCha8Rng,
    pub queries: Vec<BigRational>,
    /// Factors applied so far.
    pub factors: Vec<ComplexRat>,
}

impl NoisyOracle {
    pub fn new(seed: u64) -> Self {
        NoisyOracle { rng: ChaCha8Rng::seed_from_u64(seed), queries: Vec::new(), factors: Vec::new() }
    }

    /// `ρ·(1-s², 2s)/(1+s²)` with `ρ = 1 + tδ/2` and `s = t'δ/4`, `t, t' ∈ [-1,1]`.
    pub fn perturbation(&mut self, delta: &BigRational) -> ComplexRat {
        let mut unit = || BigRational::new(BigInt::from(self.rng.gen_range(-1000i64..=1000)), BigInt::from(1000));
        let (t, t2) = (unit(), unit());
        let two = BigRational::from_integer(2.into());
        let rho = BigRational::one() + &t * delta / &two;
        let s = &t2 * delta / BigRational::from_integer(4.into());
        let den = BigRational::one() + &s * &s;
        let rot = ComplexRat::new((BigRational::one() - &s * &s) / &den, &two * &s / &den);
        let eta = ComplexRat::from_real(rho) * rot;
        assert!(is_approx(&eta, &ComplexRat::one(), delta), "perturbation {eta} escapes 2^δ");
        eta
    }
}

impl ApproxOracle for NoisyOracle {
    fn query(&mut self, frame: &ConstraintFrame, delta: &BigRational) -> Result<ComplexRat> {
        self.queries.push(delta.clone());
        let eta = self.perturbation(delta);
        self.factors.push(eta.clone());
        Ok(eval_frame(frame)? * eta)
    }
}
