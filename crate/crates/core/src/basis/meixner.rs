//! Meixner-Pollaczek polynomials from the terminating Gauss series
//!
//! P_n(x) = (2λ)_n / n! · e^{inφ} · ₂F₁(−n, λ+ix; 2λ; 1 − e^{−2iφ})
//!
//! summed in complex (value, derivative) pairs. The result is real for real
//! x; the imaginary residue left by rounding is checked on every call.

use num_complex::Complex64;

use super::BasisError;

/// Largest imaginary residue accepted, relative to `1 + |Re|`.
pub const REALITY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
struct ComplexDual {
    value: Complex64,
    deriv: Complex64,
}

impl ComplexDual {
    fn mul(self, rhs: ComplexDual) -> ComplexDual {
        ComplexDual {
            value: self.value * rhs.value,
            deriv: self.deriv * rhs.value + self.value * rhs.deriv,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct MeixnerPollaczek {
    lambda: f64,
    /// prefactor[n] = (2λ)_n / n! · e^{inφ}
    prefactor: Vec<Complex64>,
    /// series[n][k] = (−n)_k / ((2λ)_k k!) · z^k, z = 1 − e^{−2iφ}
    series: Vec<Vec<Complex64>>,
}

impl MeixnerPollaczek {
    pub(crate) fn new(lambda: f64, phi: f64, degree: usize) -> Self {
        let z = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -2.0 * phi);
        let two_lambda = 2.0 * lambda;
        let mut prefactor = Vec::with_capacity(degree + 1);
        let mut series = Vec::with_capacity(degree + 1);
        let mut poch_over_fact = 1.0;
        for n in 0..=degree {
            if n > 0 {
                poch_over_fact *= (two_lambda + (n - 1) as f64) / n as f64;
            }
            prefactor.push(Complex64::from_polar(poch_over_fact, n as f64 * phi));
            let mut row = Vec::with_capacity(n + 1);
            let mut coeff = Complex64::new(1.0, 0.0);
            for k in 0..=n {
                if k > 0 {
                    let j = (k - 1) as f64;
                    coeff *= z * ((j - n as f64) / ((two_lambda + j) * k as f64));
                }
                row.push(coeff);
            }
            series.push(row);
        }
        Self {
            lambda,
            prefactor,
            series,
        }
    }

    /// Complex `(P_n, dP_n/dx)` for every degree, before taking real parts.
    pub(crate) fn eval_complex(&self, x: f64) -> Vec<(Complex64, Complex64)> {
        let top = self.prefactor.len() - 1;
        // rising[k] = (λ + ix)_k, with d/dx (λ + j + ix) = i
        let mut rising = Vec::with_capacity(top + 1);
        let mut r = ComplexDual {
            value: Complex64::new(1.0, 0.0),
            deriv: Complex64::new(0.0, 0.0),
        };
        for k in 0..=top {
            if k > 0 {
                let factor = ComplexDual {
                    value: Complex64::new(self.lambda + (k - 1) as f64, x),
                    deriv: Complex64::new(0.0, 1.0),
                };
                r = r.mul(factor);
            }
            rising.push(r);
        }
        self.series
            .iter()
            .zip(&self.prefactor)
            .map(|(row, pre)| {
                let mut value = Complex64::new(0.0, 0.0);
                let mut deriv = Complex64::new(0.0, 0.0);
                for (c, rk) in row.iter().zip(&rising) {
                    value += c * rk.value;
                    deriv += c * rk.deriv;
                }
                (pre * value, pre * deriv)
            })
            .collect()
    }

    pub(crate) fn eval_into(
        &self,
        x: f64,
        values: &mut [f64],
        derivs: &mut [f64],
    ) -> Result<(), BasisError> {
        for (n, (value, deriv)) in self.eval_complex(x).into_iter().enumerate() {
            if n >= values.len() {
                break;
            }
            if value.im.abs() > REALITY_TOLERANCE * (1.0 + value.re.abs()) {
                return Err(BasisError::NonrealResult {
                    n,
                    re: value.re,
                    im: value.im,
                });
            }
            values[n] = value.re;
            derivs[n] = deriv.re;
        }
        Ok(())
    }
}
