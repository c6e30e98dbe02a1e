//! Exact symbolic reference for the basis kernels.
//!
//! Each family is expanded into a polynomial with arbitrary-precision
//! rational coefficients. Nothing here calls into [`crate::basis`] evaluation
//! code; only the [`FamilySpec`] description is shared. Bernoulli numbers are
//! produced by the Akiyama-Tanigawa transform rather than the binomial
//! recurrence the float kernels use.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::basis::{FamilySpec, Sequence};

pub type ExactRational = BigRational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{0} has no exact rational expansion")]
    UnsupportedFamily(&'static str),
    #[error("parameter {0} is not a finite number")]
    NonFiniteParameter(f64),
    #[error("sequence parameter too short for degree {0}")]
    SequenceTooShort(usize),
    #[error("zero denominator at degree {0}")]
    DivisionDegenerate(usize),
    #[error("k-bonacci order {0} is outside 3..=8")]
    InvalidOrder(usize),
}

/// Exact rational value of a float (every finite `f64` is a dyadic rational).
pub fn rational(v: f64) -> Result<ExactRational, OracleError> {
    BigRational::from_float(v).ok_or(OracleError::NonFiniteParameter(v))
}

pub fn ratio(num: i64, den: i64) -> ExactRational {
    BigRational::new(num.into(), den.into())
}

fn int(v: i64) -> ExactRational {
    BigRational::from_integer(v.into())
}

/// Polynomial with exact rational coefficients, `coeffs[k]` multiplying `x^k`.
///
/// Canonical form has no trailing zero coefficient; the zero polynomial is
/// the empty vector.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ExactPolynomial {
    coeffs: Vec<ExactRational>,
}

impl ExactPolynomial {
    pub fn new(mut coeffs: Vec<ExactRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: ExactRational) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    /// `x`
    pub fn x() -> Self {
        Self::new(vec![BigRational::zero(), BigRational::one()])
    }

    pub fn monomial(power: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); power + 1];
        coeffs[power] = BigRational::one();
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[ExactRational] {
        &self.coeffs
    }

    /// Coefficient of `x^k` (zero past the end).
    pub fn coeff(&self, k: usize) -> ExactRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn scale(&self, c: &ExactRational) -> Self {
        Self::new(self.coeffs.iter().map(|v| v * c).collect())
    }

    /// Multiplication by `x`.
    pub fn shift(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(BigRational::zero());
        coeffs.extend(self.coeffs.iter().cloned());
        Self { coeffs }
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * int(k as i64))
                .collect(),
        )
    }

    /// Horner evaluation.
    pub fn eval(&self, t: &ExactRational) -> ExactRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * t + c)
    }
}

impl Add for &ExactPolynomial {
    type Output = ExactPolynomial;
    fn add(self, rhs: &ExactPolynomial) -> ExactPolynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        ExactPolynomial::new((0..len).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &ExactPolynomial {
    type Output = ExactPolynomial;
    fn sub(self, rhs: &ExactPolynomial) -> ExactPolynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        ExactPolynomial::new((0..len).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Neg for &ExactPolynomial {
    type Output = ExactPolynomial;
    fn neg(self) -> ExactPolynomial {
        ExactPolynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &ExactPolynomial {
    type Output = ExactPolynomial;
    fn mul(self, rhs: &ExactPolynomial) -> ExactPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return ExactPolynomial::zero();
        }
        let mut coeffs = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        ExactPolynomial::new(coeffs)
    }
}

impl fmt::Display for ExactPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = c.abs();
            match k {
                0 => write!(f, "{mag}")?,
                _ if mag.is_one() => {}
                _ => write!(f, "{mag}*")?,
            }
            match k {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{k}")?,
            }
        }
        Ok(())
    }
}

/// `x - c`
fn x_minus(c: &ExactRational) -> ExactPolynomial {
    ExactPolynomial::new(vec![-c.clone(), BigRational::one()])
}

fn pow(base: &ExactRational, exp: usize) -> ExactRational {
    (0..exp).fold(BigRational::one(), |acc, _| acc * base)
}

fn binomial(n: usize, k: usize) -> BigInt {
    // multiplicative formula, exact at every step
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Bernoulli numbers `B_0..=B_m` (with `B_1 = -1/2`) by Akiyama-Tanigawa.
pub fn bernoulli_akiyama_tanigawa(m: usize) -> Vec<ExactRational> {
    let mut out = Vec::with_capacity(m + 1);
    let mut row: Vec<ExactRational> = Vec::with_capacity(m + 1);
    for k in 0..=m {
        row.push(ratio(1, k as i64 + 1));
        for j in (1..=k).rev() {
            row[j - 1] = int(j as i64) * (&row[j - 1] - &row[j]);
        }
        out.push(row[0].clone());
    }
    if m >= 1 {
        out[1] = -out[1].clone();
    }
    out
}

/// Falling factorial `x (x-1) ... (x-k+1)` as a polynomial.
pub fn falling_factorial(k: usize) -> ExactPolynomial {
    (0..k).fold(ExactPolynomial::one(), |acc, j| &acc * &x_minus(&int(j as i64)))
}

fn sequence_entries(seq: &Sequence, len: usize) -> Result<Vec<ExactRational>, OracleError> {
    (0..len)
        .map(|i| {
            seq.get(i)
                .ok_or(OracleError::SequenceTooShort(len))
                .and_then(rational)
        })
        .collect()
}

/// `P_0..=P_n` of a family as exact polynomials.
pub fn expand_all(spec: &FamilySpec, n: usize) -> Result<Vec<ExactPolynomial>, OracleError> {
    let x = ExactPolynomial::x();
    let one = ExactPolynomial::one();
    let mut out: Vec<ExactPolynomial> = Vec::with_capacity(n + 1);
    match spec {
        FamilySpec::AlSalamCarlitz { a, q } => {
            let (a, q) = (rational(*a)?, rational(*q)?);
            // U_{k+1} = (x - a q^k) U_k - q^{k-1}(1 - q^k) U_{k-1}, U_{-1} = 0
            out.push(one);
            let mut prev = ExactPolynomial::zero();
            for k in 0..n {
                let shift = &a * pow(&q, k);
                let damp = if k == 0 {
                    BigRational::zero()
                } else {
                    pow(&q, k - 1) * (BigRational::one() - pow(&q, k))
                };
                let next = &(&x_minus(&shift) * &out[k]) - &prev.scale(&damp);
                prev = out[k].clone();
                out.push(next);
            }
        }
        FamilySpec::BannaiIto { rho, tau } => {
            let rho = sequence_entries(rho, n)?;
            let tau = sequence_entries(tau, n)?;
            out.push(one);
            let mut prev = ExactPolynomial::zero();
            for k in 0..n {
                let next = &(&x_minus(&rho[k]) * &out[k]) - &prev.scale(&tau[k]);
                prev = out[k].clone();
                out.push(next);
            }
        }
        FamilySpec::AskeyWilson { a, b, c, d, q } => {
            let (a, b, c, d, q) = (rational(*a)?, rational(*b)?, rational(*c)?, rational(*d)?, rational(*q)?);
            let ab = &a * &b;
            let cd = &c * &d;
            let abcd = &ab * &cd;
            let unit = BigRational::one();
            out.push(one);
            if n >= 1 {
                let den = &unit + &abcd * &q * &q;
                if den.is_zero() {
                    return Err(OracleError::DivisionDegenerate(1));
                }
                let slope = int(2) * (&unit + &ab * &q) / &den;
                let offset = (&a + &b) * (&unit + &cd * &q) / &den;
                out.push(ExactPolynomial::new(vec![-offset, slope]));
            }
            for k in 2..=n {
                let ab_t = &unit - &ab * pow(&q, k - 1);
                let cd_t = &unit - &cd * pow(&q, k - 1);
                let w0 = &unit - &abcd * pow(&q, 2 * k - 2);
                let w1 = &unit - &abcd * pow(&q, 2 * k - 1);
                let w2 = &unit - &abcd * pow(&q, 2 * k);
                let qk = &unit - pow(&q, k);
                if w0.is_zero() || w1.is_zero() || w2.is_zero() || qk.is_zero() {
                    return Err(OracleError::DivisionDegenerate(k));
                }
                let a_k = &ab_t * &cd_t * &w0 / (&w1 * &w2);
                let c_k = &qk * &ab_t * &cd_t * &w0 / (&w0 * &w1);
                let lead = &x.scale(&int(2)) - &ExactPolynomial::constant(a_k);
                let next = (&(&lead * &out[k - 1]) - &out[k - 2].scale(&c_k)).scale(&(unit.clone() / &qk));
                out.push(next);
            }
        }
        FamilySpec::BoasBuck { a_seq, b_seq } => {
            let len = if n == 0 { 0 } else { n + 1 };
            let a = sequence_entries(a_seq, len)?;
            let b = sequence_entries(b_seq, len)?;
            out.push(one);
            if n >= 1 {
                let den = &a[1] - &b[1];
                if den.is_zero() {
                    return Err(OracleError::DivisionDegenerate(1));
                }
                let p1 = ExactPolynomial::new(vec![-b[0].clone() / &den, a[0].clone() / &den]);
                out.push(p1);
            }
            for k in 2..=n {
                let den = &a[k] - &b[k];
                if den.is_zero() {
                    return Err(OracleError::DivisionDegenerate(k));
                }
                let lead = ExactPolynomial::new(vec![-b[k - 1].clone(), a[k - 1].clone()]);
                let back = &a[k - 2] - &b[k - 2];
                let next = (&(&lead * &out[k - 1]) - &out[k - 2].scale(&back))
                    .scale(&(BigRational::one() / den));
                out.push(next);
            }
        }
        FamilySpec::Boubaker => {
            out.push(one);
            if n >= 1 {
                out.push(x.clone());
            }
            for k in 1..n {
                let next = &out[k].shift() - &out[k - 1].scale(&int((k * k) as i64));
                out.push(next);
            }
        }
        FamilySpec::Charlier { a } => {
            let neg_a = -rational(*a)?;
            for m in 0..=n {
                let mut acc = ExactPolynomial::zero();
                for k in 0..=m {
                    let w = BigRational::from_integer(binomial(m, k)) * pow(&neg_a, m - k)
                        / BigRational::from_integer(factorial(k));
                    acc = &acc + &falling_factorial(k).scale(&w);
                }
                out.push(acc);
            }
        }
        FamilySpec::Fermat => {
            out.push(one);
            for m in 1..=n {
                out.push(&ExactPolynomial::monomial(m) - &ExactPolynomial::one());
            }
        }
        FamilySpec::Gottlieb => {
            let bern = bernoulli_akiyama_tanigawa(n);
            for m in 0..=n {
                let mut acc = ExactPolynomial::zero();
                for (k, bk) in bern.iter().enumerate().take(m + 1) {
                    let w = BigRational::from_integer(binomial(m, k)) * bk;
                    acc = &acc + &ExactPolynomial::monomial(m - k).scale(&w);
                }
                out.push(acc);
            }
        }
        FamilySpec::KBonacci { order, literal } => {
            if !(3..=8).contains(order) {
                return Err(OracleError::InvalidOrder(*order));
            }
            let terms = if *order == 8 && *literal { 7 } else { *order };
            // Explicit seed table: F_0..F_7 Fibonacci polynomials.
            let seeds: Vec<ExactPolynomial> = [
                vec![],
                vec![1],
                vec![0, 1],
                vec![1, 0, 1],
                vec![0, 2, 0, 1],
                vec![1, 0, 3, 0, 1],
                vec![0, 3, 0, 4, 0, 1],
                vec![1, 0, 6, 0, 5, 0, 1],
            ]
            .iter()
            .map(|c| ExactPolynomial::new(c.iter().map(|&v| int(v)).collect()))
            .collect();
            for m in 0..=n {
                if m < terms {
                    out.push(seeds[m].clone());
                } else {
                    let mut acc = out[m - 1].shift();
                    for j in 2..=terms {
                        acc = &acc + &out[m - j];
                    }
                    out.push(acc);
                }
            }
        }
        FamilySpec::MeixnerPollaczek { .. } => {
            return Err(OracleError::UnsupportedFamily("meixner-pollaczek"));
        }
        FamilySpec::Narayana => {
            out.push(one);
            for m in 1..=n {
                let coeffs = (1..=m)
                    .map(|k| {
                        BigRational::new(binomial(m, k) * binomial(m, k - 1), BigInt::from(m))
                    })
                    .collect();
                out.push(ExactPolynomial::new(coeffs));
            }
        }
        FamilySpec::Pade { .. } => {
            for m in 0..=n {
                out.push(ExactPolynomial::monomial(m));
            }
        }
        FamilySpec::VietaPell => {
            out.push(one);
            if n >= 1 {
                out.push(x.scale(&int(2)));
            }
            for k in 2..=n {
                let next = &out[k - 1].shift().scale(&int(2)) + &out[k - 2];
                out.push(next);
            }
        }
    }
    out.truncate(n + 1);
    Ok(out)
}

/// The degree-`n` member of a family as an exact polynomial.
pub fn expand_family(spec: &FamilySpec, n: usize) -> Result<ExactPolynomial, OracleError> {
    Ok(expand_all(spec, n)?.pop().expect("expand_all returns n + 1 entries"))
}

pub fn eval_exact(p: &ExactPolynomial, t: &ExactRational) -> ExactRational {
    p.eval(t)
}
