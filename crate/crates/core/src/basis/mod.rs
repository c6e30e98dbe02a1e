//! Polynomial families used as KAN edge bases.
//!
//! Every family is evaluated for degrees `0..=D` at a real point together
//! with first derivatives in that point. A [`BasisKernel`] validates the
//! family parameters once and can then be evaluated at many points without
//! allocating; [`eval_basis`] is the one-shot convenience form.

mod combinatorics;
mod dual;
mod family;
mod kernels;
mod meixner;
mod pade;

use thiserror::Error;

pub use combinatorics::{bernoulli_numbers, binomial_rows, BernoulliTable};
pub use dual::Dual;
pub use family::{FamilySpec, ParamValue, Sequence, FAMILY_NAMES};
pub use meixner::REALITY_TOLERANCE;
pub use pade::{pade_construct, PadeApproximant};

use kernels::Kernel;

/// Highest degree served by any family (exact `u64` binomials stop at row 64).
pub const MAX_DEGREE: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("unknown family `{0}` (valid: {names})", names = FAMILY_NAMES.join(", "))]
    UnknownFamily(String),
    #[error("invalid parameter for {family}: {reason}")]
    InvalidParameter { family: &'static str, reason: String },
    #[error("{family} cannot be evaluated to degree {degree}: only {available} indices available")]
    UnsupportedDegree {
        family: &'static str,
        degree: usize,
        available: usize,
    },
    #[error("{family}: zero denominator at degree {n}")]
    DivisionDegenerate { family: &'static str, n: usize },
    #[error("k-bonacci order {0} is outside 3..=8")]
    InvalidOrder(usize),
    #[error("meixner-pollaczek degree {n} is not real: {re} + {im}i")]
    NonrealResult { n: usize, re: f64, im: f64 },
    #[error("binomial row {0} exceeds exact 64-bit range")]
    BinomialOverflow(usize),
    #[error("evaluation point {0} is not finite")]
    NonFinitePoint(f64),
    #[error("pade: need {needed} Taylor coefficients, got {given}")]
    TaylorTooShort { needed: usize, given: usize },
    #[error("pade: singular linear system (no pivot in column {column})")]
    SingularSystem { column: usize },
}

/// `P_0..=P_D` and their first derivatives at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisEval {
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
}

impl BasisEval {
    pub fn degree_max(&self) -> usize {
        self.values.len() - 1
    }
}

/// A family prepared for evaluation up to a fixed degree.
#[derive(Clone, Debug)]
pub struct BasisKernel {
    spec: FamilySpec,
    degree: usize,
    kernel: Kernel,
}

impl BasisKernel {
    pub fn new(spec: &FamilySpec, degree: usize) -> Result<Self, BasisError> {
        Ok(Self {
            spec: spec.clone(),
            degree,
            kernel: Kernel::prepare(spec, degree)?,
        })
    }

    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of basis functions, `D + 1`.
    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Fills `values` and `derivs` (each of length `D + 1`).
    pub fn eval_into(&self, t: f64, values: &mut [f64], derivs: &mut [f64]) -> Result<(), BasisError> {
        if !t.is_finite() {
            return Err(BasisError::NonFinitePoint(t));
        }
        assert_eq!(values.len(), self.len(), "value buffer length");
        assert_eq!(derivs.len(), self.len(), "derivative buffer length");
        self.kernel.eval_into(t, values, derivs)
    }

    pub fn eval(&self, t: f64) -> Result<BasisEval, BasisError> {
        let mut values = vec![0.0; self.len()];
        let mut derivs = vec![0.0; self.len()];
        self.eval_into(t, &mut values, &mut derivs)?;
        Ok(BasisEval { values, derivs })
    }
}

pub fn eval_basis(spec: &FamilySpec, degree: usize, t: f64) -> Result<BasisEval, BasisError> {
    BasisKernel::new(spec, degree)?.eval(t)
}

pub fn eval_kbonacci(order: usize, degree: usize, t: f64) -> Result<BasisEval, BasisError> {
    eval_basis(&FamilySpec::KBonacci { order, literal: false }, degree, t)
}

pub fn eval_boubaker(degree: usize, t: f64) -> Result<BasisEval, BasisError> {
    eval_basis(&FamilySpec::Boubaker, degree, t)
}

pub fn eval_fermat(degree: usize, t: f64) -> Result<BasisEval, BasisError> {
    eval_basis(&FamilySpec::Fermat, degree, t)
}

pub fn eval_gottlieb(degree: usize, t: f64) -> Result<BasisEval, BasisError> {
    eval_basis(&FamilySpec::Gottlieb, degree, t)
}

pub fn eval_charlier(a: f64, degree: usize, t: f64) -> Result<BasisEval, BasisError> {
    eval_basis(&FamilySpec::Charlier { a }, degree, t)
}

pub fn eval_al_salam_carlitz(a: f64, q: f64, degree: usize, t: f64) -> Result<BasisEval, BasisError> {
    eval_basis(&FamilySpec::AlSalamCarlitz { a, q }, degree, t)
}

pub fn eval_bannai_ito(rho: Sequence, tau: Sequence, degree: usize, t: f64) -> Result<BasisEval, BasisError> {
    eval_basis(&FamilySpec::BannaiIto { rho, tau }, degree, t)
}

#[allow(clippy::too_many_arguments)]
pub fn eval_askey_wilson(
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    q: f64,
    degree: usize,
    t: f64,
) -> Result<BasisEval, BasisError> {
    eval_basis(&FamilySpec::AskeyWilson { a, b, c, d, q }, degree, t)
}

pub fn eval_boas_buck(a_seq: Sequence, b_seq: Sequence, degree: usize, t: f64) -> Result<BasisEval, BasisError> {
    eval_basis(&FamilySpec::BoasBuck { a_seq, b_seq }, degree, t)
}

pub fn eval_meixner_pollaczek(lambda: f64, phi: f64, degree: usize, t: f64) -> Result<BasisEval, BasisError> {
    eval_basis(&FamilySpec::MeixnerPollaczek { lambda, phi }, degree, t)
}

/// Complex values of the Meixner-Pollaczek series before the real part is
/// taken, for inspecting the size of the imaginary residue.
pub fn meixner_pollaczek_complex(
    lambda: f64,
    phi: f64,
    degree: usize,
    t: f64,
) -> Result<Vec<num_complex::Complex64>, BasisError> {
    FamilySpec::MeixnerPollaczek { lambda, phi }.validate()?;
    if !t.is_finite() {
        return Err(BasisError::NonFinitePoint(t));
    }
    let series = meixner::MeixnerPollaczek::new(lambda, phi, degree);
    Ok(series.eval_complex(t).into_iter().map(|(v, _)| v).collect())
}

pub fn eval_narayana(degree: usize, t: f64) -> Result<BasisEval, BasisError> {
    eval_basis(&FamilySpec::Narayana, degree, t)
}
