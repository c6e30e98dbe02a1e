//! Exact integer and rational tables shared by the closed-form kernels.

use std::sync::RwLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::{BasisError, MAX_DEGREE};

/// Pascal's triangle up to row `n` in exact `u64` arithmetic.
///
/// Rows beyond [`MAX_DEGREE`] are refused rather than risking overflow.
pub fn binomial_rows(n: usize) -> Result<Vec<Vec<u64>>, BasisError> {
    if n > MAX_DEGREE {
        return Err(BasisError::BinomialOverflow(n));
    }
    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(n + 1);
    rows.push(vec![1]);
    for r in 1..=n {
        let prev = &rows[r - 1];
        let mut row = vec![1u64; r + 1];
        for k in 1..r {
            row[k] = prev[k - 1]
                .checked_add(prev[k])
                .ok_or(BasisError::BinomialOverflow(r))?;
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Exact Bernoulli numbers `B_0 ..= B_m` with the `B_1 = -1/2` convention.
#[derive(Clone, Debug, PartialEq)]
pub struct BernoulliTable {
    pub values: Vec<BigRational>,
}

impl BernoulliTable {
    pub fn to_f64(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|b| b.to_f64().expect("Bernoulli numbers are finite"))
            .collect()
    }
}

static BERNOULLI_MEMO: RwLock<Vec<BigRational>> = RwLock::new(Vec::new());

fn pascal_bigint(n: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::from(1)];
    for r in 1..=n {
        let mut next = vec![BigInt::from(1); r + 1];
        for k in 1..r {
            next[k] = &row[k - 1] + &row[k];
        }
        row = next;
    }
    row
}

/// `B_0 ..= B_m` from `B_m = -1/(m+1) * sum_{j<m} C(m+1, j) B_j`.
///
/// Results are memoised process-wide. Concurrent callers may both extend the
/// memo; the entries they compute are identical, so the last writer wins
/// without changing any value.
pub fn bernoulli_numbers(m: usize) -> BernoulliTable {
    {
        let memo = BERNOULLI_MEMO.read().unwrap_or_else(|e| e.into_inner());
        if memo.len() > m {
            return BernoulliTable {
                values: memo[..=m].to_vec(),
            };
        }
    }
    let mut values: Vec<BigRational> = BERNOULLI_MEMO
        .read()
        .unwrap_or_else(|e| e.into_inner())
        .clone();
    if values.is_empty() {
        values.push(BigRational::from_integer(1.into()));
    }
    while values.len() <= m {
        let next = values.len();
        let row = pascal_bigint(next + 1);
        let mut acc = BigRational::zero();
        for (j, b) in values.iter().enumerate() {
            acc += BigRational::from_integer(row[j].clone()) * b;
        }
        let b = -acc / BigRational::from_integer(BigInt::from(next + 1));
        values.push(b);
    }
    let mut memo = BERNOULLI_MEMO.write().unwrap_or_else(|e| e.into_inner());
    if memo.len() < values.len() {
        *memo = values.clone();
    }
    values.truncate(m + 1);
    BernoulliTable { values }
}
