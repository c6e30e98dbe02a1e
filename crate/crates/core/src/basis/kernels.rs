//! Per-family kernels prepared once for a fixed maximum degree.
//!
//! Preparation validates the parameters against the degree and tabulates
//! every coefficient that does not depend on the evaluation point, so the
//! per-point work is the recurrence or sum alone.

use num_traits::ToPrimitive;

use super::combinatorics::{bernoulli_numbers, binomial_rows};
use super::dual::Dual;
use super::family::{FamilySpec, Sequence};
use super::meixner::MeixnerPollaczek;
use super::{BasisError, MAX_DEGREE};

#[derive(Clone, Debug)]
pub(crate) enum Kernel {
    AlSalamCarlitz {
        /// a q^n
        shift: Vec<f64>,
        /// q^{n-1}(1 - q^n), zero at n = 0
        damp: Vec<f64>,
    },
    BannaiIto {
        rho: Vec<f64>,
        tau: Vec<f64>,
    },
    AskeyWilson {
        p1_slope: f64,
        p1_offset: f64,
        /// Indexed by n; entries 0 and 1 unused.
        a_n: Vec<f64>,
        c_n: Vec<f64>,
        one_minus_qn: Vec<f64>,
    },
    BoasBuck {
        a: Vec<f64>,
        b: Vec<f64>,
    },
    Boubaker,
    Charlier {
        /// weights[n][k] = C(n,k) (-a)^{n-k} / k!
        weights: Vec<Vec<f64>>,
    },
    Fermat,
    /// Power-basis tables: coeffs[n][j] multiplies t^j.
    PowerTable {
        coeffs: Vec<Vec<f64>>,
    },
    KBonacci {
        terms: usize,
        seeds: usize,
    },
    MeixnerPollaczek(MeixnerPollaczek),
    Monomial,
    VietaPell,
}

fn sequence_prefix(
    family: &'static str,
    seq: &Sequence,
    len: usize,
    degree: usize,
) -> Result<Vec<f64>, BasisError> {
    (0..len)
        .map(|i| {
            seq.get(i).ok_or(BasisError::UnsupportedDegree {
                family,
                degree,
                available: seq.len().unwrap_or(usize::MAX),
            })
        })
        .collect()
}

impl Kernel {
    pub(crate) fn prepare(spec: &FamilySpec, degree: usize) -> Result<Kernel, BasisError> {
        spec.validate()?;
        let family = spec.name();
        if degree > MAX_DEGREE {
            return Err(BasisError::UnsupportedDegree {
                family,
                degree,
                available: MAX_DEGREE,
            });
        }
        let kernel = match spec {
            FamilySpec::AlSalamCarlitz { a, q } => {
                let shift = (0..degree).map(|n| a * q.powi(n as i32)).collect();
                let damp = (0..degree)
                    .map(|n| {
                        if n == 0 {
                            0.0
                        } else {
                            q.powi(n as i32 - 1) * (1.0 - q.powi(n as i32))
                        }
                    })
                    .collect();
                Kernel::AlSalamCarlitz { shift, damp }
            }
            FamilySpec::BannaiIto { rho, tau } => Kernel::BannaiIto {
                rho: sequence_prefix(family, rho, degree, degree)?,
                tau: sequence_prefix(family, tau, degree, degree)?,
            },
            FamilySpec::AskeyWilson { a, b, c, d, q } => {
                let (ab, cd, abcd) = (a * b, c * d, a * b * c * d);
                let p1_den = 1.0 + abcd * q * q;
                if degree >= 1 && p1_den == 0.0 {
                    return Err(BasisError::DivisionDegenerate { family, n: 1 });
                }
                let mut a_n = vec![0.0; degree + 1];
                let mut c_n = vec![0.0; degree + 1];
                let mut one_minus_qn = vec![0.0; degree + 1];
                for n in 2..=degree {
                    let qp = |k: i32| q.powi(k);
                    let n = n as i32;
                    let ab_term = 1.0 - ab * qp(n - 1);
                    let cd_term = 1.0 - cd * qp(n - 1);
                    let w0 = 1.0 - abcd * qp(2 * n - 2);
                    let w1 = 1.0 - abcd * qp(2 * n - 1);
                    let w2 = 1.0 - abcd * qp(2 * n);
                    let qn = 1.0 - qp(n);
                    if w0 == 0.0 || w1 == 0.0 || w2 == 0.0 || qn == 0.0 {
                        return Err(BasisError::DivisionDegenerate {
                            family,
                            n: n as usize,
                        });
                    }
                    let i = n as usize;
                    a_n[i] = ab_term * cd_term * w0 / (w1 * w2);
                    c_n[i] = qn * ab_term * cd_term * w0 / (w0 * w1);
                    one_minus_qn[i] = qn;
                }
                Kernel::AskeyWilson {
                    p1_slope: 2.0 * (1.0 + ab * q) / p1_den,
                    p1_offset: (a + b) * (1.0 + cd * q) / p1_den,
                    a_n,
                    c_n,
                    one_minus_qn,
                }
            }
            FamilySpec::BoasBuck { a_seq, b_seq } => {
                let len = if degree == 0 { 0 } else { degree + 1 };
                let a = sequence_prefix(family, a_seq, len, degree)?;
                let b = sequence_prefix(family, b_seq, len, degree)?;
                for n in 1..len {
                    if a[n] - b[n] == 0.0 {
                        return Err(BasisError::DivisionDegenerate { family, n });
                    }
                }
                Kernel::BoasBuck { a, b }
            }
            FamilySpec::Boubaker => Kernel::Boubaker,
            FamilySpec::Charlier { a } => {
                let binom = binomial_rows(degree)?;
                let mut weights = Vec::with_capacity(degree + 1);
                for (n, row) in binom.iter().enumerate() {
                    let mut k_fact = 1.0;
                    let w: Vec<f64> = (0..=n)
                        .map(|k| {
                            if k > 0 {
                                k_fact *= k as f64;
                            }
                            row[k] as f64 * (-a).powi((n - k) as i32) / k_fact
                        })
                        .collect();
                    weights.push(w);
                }
                Kernel::Charlier { weights }
            }
            FamilySpec::Fermat => Kernel::Fermat,
            FamilySpec::Gottlieb => {
                let binom = binomial_rows(degree)?;
                let bern = bernoulli_numbers(degree).to_f64();
                // G_n = sum_k C(n,k) B_k t^{n-k}: the power t^j carries k = n - j.
                let coeffs = binom
                    .iter()
                    .enumerate()
                    .map(|(n, row)| (0..=n).map(|j| row[n - j] as f64 * bern[n - j]).collect())
                    .collect();
                Kernel::PowerTable { coeffs }
            }
            FamilySpec::KBonacci { order, literal } => {
                let terms = if *order == 8 && *literal { 7 } else { *order };
                Kernel::KBonacci {
                    terms,
                    seeds: terms,
                }
            }
            FamilySpec::MeixnerPollaczek { lambda, phi } => {
                Kernel::MeixnerPollaczek(MeixnerPollaczek::new(*lambda, *phi, degree))
            }
            FamilySpec::Narayana => {
                let binom = binomial_rows(degree)?;
                let mut coeffs = vec![vec![1.0]];
                for n in 1..=degree {
                    // N(n,k) = C(n,k) C(n,k-1) / n multiplies t^{k-1}.
                    let row: Vec<f64> = (1..=n)
                        .map(|k| {
                            let prod = binom[n][k] as u128 * binom[n][k - 1] as u128;
                            (prod / n as u128).to_f64().unwrap_or(f64::INFINITY)
                        })
                        .collect();
                    coeffs.push(row);
                }
                Kernel::PowerTable { coeffs }
            }
            FamilySpec::Pade { .. } => Kernel::Monomial,
            FamilySpec::VietaPell => Kernel::VietaPell,
        };
        Ok(kernel)
    }

    /// Writes `P_0..=P_D` and their derivatives at `t`; both slices have
    /// length `D + 1`.
    pub(crate) fn eval_into(
        &self,
        t: f64,
        values: &mut [f64],
        derivs: &mut [f64],
    ) -> Result<(), BasisError> {
        debug_assert_eq!(values.len(), derivs.len());
        let x = Dual::variable(t);
        let top = values.len() - 1;
        let mut put = |n: usize, p: Dual| {
            values[n] = p.value;
            derivs[n] = p.deriv;
        };
        match self {
            Kernel::AlSalamCarlitz { shift, damp } => {
                // U_{n+1} = (x - a q^n) U_n - q^{n-1}(1 - q^n) U_{n-1}, U_{-1} = 0.
                let (mut prev, mut cur) = (Dual::ZERO, Dual::ONE);
                put(0, cur);
                for n in 0..top {
                    let next = (x - Dual::constant(shift[n])) * cur - prev * damp[n];
                    put(n + 1, next);
                    (prev, cur) = (cur, next);
                }
            }
            Kernel::BannaiIto { rho, tau } => {
                let (mut prev, mut cur) = (Dual::ZERO, Dual::ONE);
                put(0, cur);
                for n in 0..top {
                    let next = (x - Dual::constant(rho[n])) * cur - prev * tau[n];
                    put(n + 1, next);
                    (prev, cur) = (cur, next);
                }
            }
            Kernel::AskeyWilson {
                p1_slope,
                p1_offset,
                a_n,
                c_n,
                one_minus_qn,
            } => {
                let mut prev = Dual::ONE;
                put(0, prev);
                if top >= 1 {
                    let mut cur = x * *p1_slope - Dual::constant(*p1_offset);
                    put(1, cur);
                    for n in 2..=top {
                        let next = ((x * 2.0 - Dual::constant(a_n[n])) * cur - prev * c_n[n])
                            / one_minus_qn[n];
                        put(n, next);
                        (prev, cur) = (cur, next);
                    }
                }
            }
            Kernel::BoasBuck { a, b } => {
                let mut prev = Dual::ONE;
                put(0, prev);
                if top >= 1 {
                    let mut cur = (x * a[0] - Dual::constant(b[0])) / (a[1] - b[1]);
                    put(1, cur);
                    for n in 2..=top {
                        let next = ((x * a[n - 1] - Dual::constant(b[n - 1])) * cur
                            - prev * (a[n - 2] - b[n - 2]))
                            / (a[n] - b[n]);
                        put(n, next);
                        (prev, cur) = (cur, next);
                    }
                }
            }
            Kernel::Boubaker => {
                // B_{n+1} = x B_n - n^2 B_{n-1}
                let mut prev = Dual::ONE;
                put(0, prev);
                if top >= 1 {
                    let mut cur = x;
                    put(1, cur);
                    for n in 1..top {
                        let next = x * cur - prev * (n * n) as f64;
                        put(n + 1, next);
                        (prev, cur) = (cur, next);
                    }
                }
            }
            Kernel::Charlier { weights } => {
                // falling[k] = t (t-1) ... (t-k+1)
                let mut falling = Vec::with_capacity(top + 1);
                let mut ff = Dual::ONE;
                for k in 0..=top {
                    if k > 0 {
                        ff = ff * (x - Dual::constant((k - 1) as f64));
                    }
                    falling.push(ff);
                }
                for (n, w) in weights.iter().enumerate() {
                    let mut acc = Dual::ZERO;
                    for (k, wk) in w.iter().enumerate() {
                        acc += falling[k] * *wk;
                    }
                    put(n, acc);
                }
            }
            Kernel::Fermat => {
                put(0, Dual::ONE);
                for n in 1..=top {
                    put(
                        n,
                        Dual {
                            value: t.powi(n as i32) - 1.0,
                            deriv: n as f64 * t.powi(n as i32 - 1),
                        },
                    );
                }
            }
            Kernel::PowerTable { coeffs } => {
                for (n, row) in coeffs.iter().enumerate() {
                    let mut acc = Dual::ZERO;
                    for c in row.iter().rev() {
                        acc = acc * x + Dual::constant(*c);
                    }
                    put(n, acc);
                }
            }
            Kernel::KBonacci { terms, seeds } => {
                // Seeds are Fibonacci polynomials F_0 = 0, F_1 = 1, F_n = x F_{n-1} + F_{n-2}.
                let mut history: Vec<Dual> = Vec::with_capacity(top + 1);
                for n in 0..=top {
                    let next = match n {
                        0 => Dual::ZERO,
                        1 => Dual::ONE,
                        n if n < *seeds => x * history[n - 1] + history[n - 2],
                        n => {
                            let mut acc = x * history[n - 1];
                            for j in 2..=*terms {
                                acc += history[n - j];
                            }
                            acc
                        }
                    };
                    history.push(next);
                    put(n, next);
                }
            }
            Kernel::MeixnerPollaczek(mp) => mp.eval_into(t, values, derivs)?,
            Kernel::Monomial => {
                put(0, Dual::ONE);
                let mut p = Dual::ONE;
                for n in 1..=top {
                    p = p * x;
                    put(n, p);
                }
            }
            Kernel::VietaPell => {
                let mut prev = Dual::ONE;
                put(0, prev);
                if top >= 1 {
                    let mut cur = x * 2.0;
                    put(1, cur);
                    for n in 2..=top {
                        let next = x * 2.0 * cur + prev;
                        put(n, next);
                        (prev, cur) = (cur, next);
                    }
                }
            }
        }
        Ok(())
    }
}
