//! Exact rational predictor matrices for integer weight powers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{ChopolyError, PredictorSpec};

/// `Π_{δ,λ,ω}` computed in exact rational arithmetic. Only defined for
/// integer ω, where every weight is an integer.
pub fn exact_predictor_matrix(spec: &PredictorSpec) -> Result<Vec<Vec<BigRational>>, ChopolyError> {
    let w = spec.weight();
    if !w.is_integer() {
        return Err(ChopolyError::InvalidWeight(format!(
            "exact path needs an integer weight power, got {w}"
        )));
    }
    let omega = w.numerator();
    let n = spec.degree() + 1;
    let lambda = spec.frame_length();

    let int = |v: BigInt| BigRational::from_integer(v);
    let factor = |d: usize, l: usize| -> BigInt {
        let base = BigInt::from((lambda - l) as u64);
        let sign = if d.is_multiple_of(2) { 1 } else { -1 };
        num_traits::pow(base, omega as usize) * num_traits::pow(BigInt::from(l as u64), d) * sign
    };

    // Augmented system [Z | E], Z_{ij} = Σ_l sign · (λ-l)^ω l^{i+j}.
    let mut rows: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row = Vec::with_capacity(n + lambda);
            for j in 0..n {
                let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                let s: BigInt = (0..lambda)
                    .map(|l| {
                        num_traits::pow(BigInt::from((lambda - l) as u64), omega as usize)
                            * num_traits::pow(BigInt::from(l as u64), i + j)
                    })
                    .sum();
                row.push(int(s * sign));
            }
            for l in 0..lambda {
                row.push(int(factor(i, l)));
            }
            row
        })
        .collect();

    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !rows[r][col].is_zero())
            .ok_or(ChopolyError::Singular)?;
        rows.swap(col, pivot);
        let p = rows[col][col].clone();
        for v in rows[col].iter_mut() {
            *v = &*v / &p;
        }
        for r in 0..n {
            if r == col || rows[r][col].is_zero() {
                continue;
            }
            let f = rows[r][col].clone();
            let pivot_row = rows[col].clone();
            for (v, pv) in rows[r].iter_mut().zip(pivot_row.iter()) {
                *v = &*v - &f * pv;
            }
        }
    }
    debug_assert!(rows.iter().enumerate().all(|(i, r)| r[i].is_one()));
    Ok(rows.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    let num = r.numer().abs().to_f64().unwrap_or(f64::NAN);
    let den = r.denom().to_f64().unwrap_or(f64::NAN);
    sign * num / den
}
