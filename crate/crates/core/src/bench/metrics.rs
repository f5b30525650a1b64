use super::BenchError;

/// Comparison of a simulated series against its reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    /// Mean relative error in percent.
    pub er_percent: f64,
    pub cumulative_abs_error: f64,
    pub abs_errors: Vec<f64>,
    /// Number of compared points.
    pub n: usize,
    /// Points left out of the relative error because the reference is zero.
    pub excluded: usize,
}

impl ErrorReport {
    pub fn compare(reference: &[f64], test: &[f64]) -> Result<Self, BenchError> {
        check_lengths(reference, test)?;
        let (er, excluded) = relative_error_with_exclusions(reference, test)?;
        let abs_errors: Vec<f64> = reference.iter().zip(test).map(|(r, y)| (r - y).abs()).collect();
        Ok(ErrorReport {
            er_percent: er,
            cumulative_abs_error: abs_errors.iter().sum(),
            abs_errors,
            n: reference.len(),
            excluded,
        })
    }

    pub fn max_abs_error(&self) -> f64 {
        self.abs_errors.iter().copied().fold(0.0, f64::max)
    }
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<(), BenchError> {
    if a.len() != b.len() {
        return Err(BenchError::LengthMismatch {
            reference: a.len(),
            test: b.len(),
        });
    }
    Ok(())
}

/// `Er = (100 / N) Σ |(ref - y) / ref|` over `N` points.
///
/// Points where the reference is exactly zero are skipped; `N` counts only
/// the points that were used.
pub fn relative_error(reference: &[f64], test: &[f64]) -> Result<f64, BenchError> {
    relative_error_with_exclusions(reference, test).map(|(er, _)| er)
}

/// Like [`relative_error`], also returning how many points were skipped.
pub fn relative_error_with_exclusions(
    reference: &[f64],
    test: &[f64],
) -> Result<(f64, usize), BenchError> {
    check_lengths(reference, test)?;
    let mut sum = 0.0;
    let mut used = 0usize;
    for (r, y) in reference.iter().zip(test) {
        if *r == 0.0 {
            continue;
        }
        sum += ((r - y) / r).abs();
        used += 1;
    }
    let excluded = reference.len() - used;
    let er = if used == 0 { 0.0 } else { 100.0 * sum / used as f64 };
    Ok((er, excluded))
}

pub fn cumulative_abs_error(reference: &[f64], test: &[f64]) -> Result<f64, BenchError> {
    check_lengths(reference, test)?;
    Ok(reference.iter().zip(test).map(|(r, y)| (r - y).abs()).sum())
}

/// Least-squares slope of `log(error)` against `log(h)`.
///
/// Returns `None` for a saturated ladder: when the errors sit at the
/// floating-point noise floor, or do not shrink at all, the slope carries
/// no information.
pub fn convergence_slope(steps: &[f64], errors: &[f64], floor: f64) -> Result<Option<f64>, BenchError> {
    check_lengths(steps, errors)?;
    if steps.len() < 2 {
        return Err(BenchError::Ladder(format!("{} levels", steps.len())));
    }
    for (&h, &e) in steps.iter().zip(errors) {
        if !(h.is_finite() && h > 0.0 && e.is_finite() && e >= 0.0) {
            return Err(BenchError::NonFinite(format!("step {h}, error {e}")));
        }
    }
    if errors.iter().all(|&e| e <= floor) {
        return Ok(None);
    }
    if errors.iter().any(|&e| e <= 0.0) {
        return Ok(None);
    }
    let xs: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    Ok(Some(least_squares_slope(&xs, &ys)))
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
