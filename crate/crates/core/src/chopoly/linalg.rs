//! Dense Gaussian elimination for the tiny normal-equation systems.

use super::ChopolyError;

/// Solves `A X = B` in place for a square row-major `a` (n×n) and a
/// row-major right-hand side `b` (n×m). On return `b` holds `X`.
pub(crate) fn solve_in_place(
    a: &mut [f64],
    b: &mut [f64],
    n: usize,
    m: usize,
) -> Result<(), ChopolyError> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n * m);
    let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(f64::MIN_POSITIVE);

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .expect("non-empty pivot range");
        let pivot = a[pivot_row * n + col];
        if pivot.abs() <= scale * 1e-14 {
            return Err(ChopolyError::Singular);
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            for k in 0..m {
                b.swap(col * m + k, pivot_row * m + k);
            }
        }
        for row in col + 1..n {
            let factor = a[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            a[row * n + col] = 0.0;
            for k in col + 1..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            for k in 0..m {
                b[row * m + k] -= factor * b[col * m + k];
            }
        }
    }

    for col in (0..n).rev() {
        let pivot = a[col * n + col];
        for k in 0..m {
            let mut acc = b[col * m + k];
            for j in col + 1..n {
                acc -= a[col * n + j] * b[j * m + k];
            }
            b[col * m + k] = acc / pivot;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_with_pivoting() {
        // First pivot is zero; needs a row swap.
        let mut a = vec![0.0, 1.0, 2.0, 1.0];
        let mut b = vec![3.0, 4.0];
        solve_in_place(&mut a, &mut b, 2, 1).unwrap();
        assert!((b[0] - 0.5).abs() < 1e-15);
        assert!((b[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn detects_singular() {
        let mut a = vec![1.0, 2.0, 2.0, 4.0];
        let mut b = vec![1.0, 1.0];
        assert!(matches!(
            solve_in_place(&mut a, &mut b, 2, 1),
            Err(ChopolyError::Singular)
        ));
    }
}
