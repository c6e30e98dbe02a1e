//! Test-only reference implementations shared by the integration suites.
#![allow(dead_code)]

use std::ops::{Add, Div, Mul, Neg, Sub};

use polykan::basis::{FamilySpec, Sequence};

/// The 17 families with exact rational expansions, at the parameters used
/// throughout the test suites.
pub fn oracle_families() -> Vec<FamilySpec> {
    vec![
        FamilySpec::AlSalamCarlitz { a: 1.0, q: 0.5 },
        FamilySpec::BannaiIto {
            rho: Sequence::Constant(0.5),
            tau: Sequence::Constant(0.25),
        },
        FamilySpec::AskeyWilson { a: 0.5, b: 0.5, c: 0.5, d: 0.5, q: 0.5 },
        FamilySpec::BoasBuck {
            a_seq: Sequence::Constant(1.0),
            b_seq: Sequence::Constant(0.0),
        },
        FamilySpec::Boubaker,
        FamilySpec::Charlier { a: 2.0 },
        FamilySpec::Fermat,
        FamilySpec::Gottlieb,
        FamilySpec::KBonacci { order: 7, literal: false },
        FamilySpec::KBonacci { order: 6, literal: false },
        FamilySpec::Narayana,
        FamilySpec::KBonacci { order: 8, literal: false },
        FamilySpec::Pade { m: 8, n: 8 },
        FamilySpec::KBonacci { order: 5, literal: false },
        FamilySpec::KBonacci { order: 4, literal: false },
        FamilySpec::KBonacci { order: 3, literal: false },
        FamilySpec::VietaPell,
    ]
}

pub fn all_families(degree: usize) -> Vec<FamilySpec> {
    polykan::basis::FAMILY_NAMES
        .iter()
        .map(|name| FamilySpec::default_for(name, degree).unwrap())
        .collect()
}

/// `n` points evenly spaced over `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Unnormalised double-double number `hi + lo`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble { hi: 0.0, lo: 0.0 };
    pub const ONE: DoubleDouble = DoubleDouble { hi: 1.0, lo: 0.0 };

    pub fn from(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Self {
        let s = DoubleDouble::from(self.hi.sqrt());
        // one Newton step doubles the correct digits
        s + (self - s * s) / (s * 2.0)
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let p = self.hi * rhs.hi;
        let e = self.hi.mul_add(rhs.hi, -p);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Mul<f64> for DoubleDouble {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self * DoubleDouble::from(rhs)
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * q1;
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * q2;
        let q3 = r.hi / rhs.hi;
        DoubleDouble::from(q1) + DoubleDouble::from(q2) + DoubleDouble::from(q3)
    }
}

impl Div<f64> for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        self / DoubleDouble::from(rhs)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ComplexDD {
    pub re: DoubleDouble,
    pub im: DoubleDouble,
}

impl ComplexDD {
    pub fn new(re: DoubleDouble, im: DoubleDouble) -> Self {
        Self { re, im }
    }
}

impl Add for ComplexDD {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Mul for ComplexDD {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.re * rhs.re - self.im * rhs.im,
            self.re * rhs.im + self.im * rhs.re,
        )
    }
}

impl Mul<DoubleDouble> for ComplexDD {
    type Output = Self;
    fn mul(self, rhs: DoubleDouble) -> Self {
        Self::new(self.re * rhs, self.im * rhs)
    }
}

/// `(cos, sin)` of the angles the suites use, in double-double precision.
pub fn cos_sin(phi_over_pi_denominator: u32) -> (DoubleDouble, DoubleDouble) {
    let half = DoubleDouble::from(0.5);
    let root3_half = DoubleDouble::from(3.0).sqrt() * 0.5;
    match phi_over_pi_denominator {
        4 => (half.sqrt(), half.sqrt()),
        6 => (root3_half, half),
        3 => (half, root3_half),
        other => panic!("no double-double reference for pi/{other}"),
    }
}

/// Meixner-Pollaczek `P_n(x)` by direct double-double summation of the
/// terminating Gauss series. Returns `(Re, Im)`.
pub fn meixner_series_dd(lambda: f64, phi_denominator: u32, n: usize, x: f64) -> (f64, f64) {
    let (c, s) = cos_sin(phi_denominator);
    let one = DoubleDouble::ONE;
    let lam = DoubleDouble::from(lambda);
    let two_lam = lam * 2.0;
    // e^{-2iφ} = (c - is)^2
    let e2 = ComplexDD::new(c * c - s * s, -(c * s * 2.0));
    let z = ComplexDD::new(one - e2.re, -e2.im);
    let mut sum = ComplexDD::new(DoubleDouble::ZERO, DoubleDouble::ZERO);
    let mut term = ComplexDD::new(one, DoubleDouble::ZERO);
    for k in 0..=n {
        if k > 0 {
            let j = DoubleDouble::from((k - 1) as f64);
            let rising = ComplexDD::new(lam + j, DoubleDouble::from(x));
            let scalar = (j - DoubleDouble::from(n as f64)) / ((two_lam + j) * k as f64);
            term = term * rising * z * scalar;
        }
        sum = sum + term;
    }
    let mut pre = ComplexDD::new(one, DoubleDouble::ZERO);
    let e1 = ComplexDD::new(c, s);
    for k in 0..n {
        pre = pre * e1 * ((two_lam + DoubleDouble::from(k as f64)) / (k + 1) as f64);
    }
    let out = pre * sum;
    (out.re.to_f64(), out.im.to_f64())
}

/// Meixner-Pollaczek `P_0..=P_n` from the classical three-term recurrence
/// `(k+1) P_{k+1} = 2 (x sin φ + (k+λ) cos φ) P_k - (k + 2λ - 1) P_{k-1}`.
pub fn meixner_recurrence_dd(lambda: f64, phi_denominator: u32, n: usize, x: f64) -> Vec<f64> {
    let (c, s) = cos_sin(phi_denominator);
    let lam = DoubleDouble::from(lambda);
    let x = DoubleDouble::from(x);
    let mut out = vec![DoubleDouble::ONE];
    let mut prev = DoubleDouble::ZERO;
    for k in 0..n {
        let kk = DoubleDouble::from(k as f64);
        let coef = (x * s + (kk + lam) * c) * 2.0;
        let back = kk + lam * 2.0 - DoubleDouble::ONE;
        let next = (coef * out[k] - back * prev) / (k + 1) as f64;
        prev = out[k];
        out.push(next);
    }
    out.into_iter().map(DoubleDouble::to_f64).collect()
}

/// Deterministic points in `[lo, hi]` from a small LCG (test fixtures only).
pub fn scattered_points(count: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..count)
        .map(|_| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let u = (state >> 11) as f64 / (1u64 << 53) as f64;
            lo + (hi - lo) * u
        })
        .collect()
}
