//! [m/n] rational approximants from Taylor coefficients.

use super::BasisError;

/// Numerator `p_0..=p_m` and denominator `1, q_1..=q_n` of an [m/n] approximant.
#[derive(Clone, Debug, PartialEq)]
pub struct PadeApproximant {
    pub numerator: Vec<f64>,
    pub denominator: Vec<f64>,
}

impl PadeApproximant {
    pub fn eval(&self, x: f64) -> f64 {
        let horner = |c: &[f64]| c.iter().rev().fold(0.0, |acc, &v| acc * x + v);
        horner(&self.numerator) / horner(&self.denominator)
    }
}

/// Solves the order conditions `sum_j q_j f_{k-j} = p_k` for k = 0..=m+n,
/// with `q_0 = 1` and `p_k = 0` above m.
///
/// The n equations for k = m+1..=m+n fix the denominator; the numerator then
/// follows by direct convolution.
pub fn pade_construct(taylor: &[f64], m: usize, n: usize) -> Result<PadeApproximant, BasisError> {
    let needed = m + n + 1;
    if taylor.len() < needed {
        return Err(BasisError::TaylorTooShort {
            needed,
            given: taylor.len(),
        });
    }
    let f = |k: isize| if k < 0 { 0.0 } else { taylor[k as usize] };

    // Row r (k = m+1+r): sum_{j=1..n} q_j f_{k-j} = -f_k
    let mut system: Vec<Vec<f64>> = (0..n)
        .map(|r| {
            let k = (m + 1 + r) as isize;
            let mut row: Vec<f64> = (1..=n).map(|j| f(k - j as isize)).collect();
            row.push(-f(k));
            row
        })
        .collect();
    let q = solve_dense(&mut system, n)?;

    let mut denominator = Vec::with_capacity(n + 1);
    denominator.push(1.0);
    denominator.extend_from_slice(&q);

    let numerator = (0..=m)
        .map(|k| {
            (0..=k.min(n))
                .map(|j| denominator[j] * taylor[k - j])
                .sum::<f64>()
        })
        .collect();
    Ok(PadeApproximant {
        numerator,
        denominator,
    })
}

/// Gaussian elimination with partial pivoting on an augmented `n x (n+1)` matrix.
fn solve_dense(a: &mut [Vec<f64>], n: usize) -> Result<Vec<f64>, BasisError> {
    let scale = a
        .iter()
        .flat_map(|row| row[..n].iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let tiny = f64::EPSILON * scale.max(f64::MIN_POSITIVE) * n as f64;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty pivot range");
        if a[pivot][col].abs() <= tiny {
            return Err(BasisError::SingularSystem { column: col });
        }
        a.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for k in col..=n {
                    a[row][k] -= factor * a[col][k];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (a[row][n] - tail) / a[row][row];
    }
    Ok(x)
}
