//! Closed-form predictors for a few common specs. Each one is linear in
//! the samples and polynomial in τ, and agrees with the matrix form.

use super::{ChopolyError, SampleFrame};

fn take<const N: usize>(frame: &SampleFrame) -> Result<[f64; N], ChopolyError> {
    if frame.valid_count() < N {
        return Err(ChopolyError::FrameUnderfull {
            needed: N,
            available: frame.valid_count(),
        });
    }
    let mut out = [0.0; N];
    for (slot, u) in out.iter_mut().zip(frame.iter()) {
        *slot = u;
    }
    Ok(out)
}

fn require(frame: &SampleFrame, lambda: usize) -> Result<(), ChopolyError> {
    if lambda == 0 || frame.valid_count() < lambda {
        return Err(ChopolyError::FrameUnderfull {
            needed: lambda.max(1),
            available: frame.valid_count(),
        });
    }
    Ok(())
}

/// `P(0, λ, 0)`: running average of the frame.
pub fn running_average(frame: &SampleFrame, lambda: usize) -> Result<f64, ChopolyError> {
    require(frame, lambda)?;
    Ok(frame.iter().take(lambda).sum::<f64>() / lambda as f64)
}

/// `P(0, λ, 1)`: `2 (λ u_0 + … + 2 u_{2-λ} + u_{1-λ}) / (λ (λ+1))`.
pub fn linear_weighted_average(frame: &SampleFrame, lambda: usize) -> Result<f64, ChopolyError> {
    require(frame, lambda)?;
    let acc: f64 = frame
        .iter()
        .take(lambda)
        .enumerate()
        .map(|(l, u)| (lambda - l) as f64 * u)
        .sum();
    Ok(2.0 * acc / (lambda * (lambda + 1)) as f64)
}

/// `P(1, 2, 0)`: two-point first-order hold.
pub fn first_order_hold(frame: &SampleFrame, tau: f64) -> Result<f64, ChopolyError> {
    let [u0, u1] = take::<2>(frame)?;
    Ok(u0 + (u0 - u1) * tau)
}

/// `P(1, 3, 0)`.
pub fn linear_three_point(frame: &SampleFrame, tau: f64) -> Result<f64, ChopolyError> {
    let [u0, u1, u2] = take::<3>(frame)?;
    Ok((5.0 * u0 + 2.0 * u1 - u2) / 6.0 + (u0 - u2) * tau / 2.0)
}

/// `P(2, 5, 1)`, expanded form.
pub fn quadratic_five_point_weighted(frame: &SampleFrame, tau: f64) -> Result<f64, ChopolyError> {
    let [u0, u1, u2, u3, u4] = take::<5>(frame)?;
    Ok(
        (65.0 * u0 + 12.0 * u1 - 6.0 * u2 - 4.0 * u3 + 3.0 * u4) / 70.0
            + (25.0 * u0 - 12.0 * u1 - 16.0 * u2 - 4.0 * u3 + 7.0 * u4) * tau / 28.0
            + (5.0 * u0 - 4.0 * u1 - 4.0 * u2 + 3.0 * u4) * tau * tau / 28.0,
    )
}

/// `P(2, 5, 1)` in Horner form over the common denominator 140.
pub fn quadratic_five_point_weighted_horner(
    frame: &SampleFrame,
    tau: f64,
) -> Result<f64, ChopolyError> {
    let [u0, u1, u2, u3, u4] = take::<5>(frame)?;
    let quadratic = 25.0 * u0 - 20.0 * u1 - 20.0 * u2 + 15.0 * u4;
    let linear = 125.0 * u0 - 60.0 * u1 - 80.0 * u2 - 20.0 * u3 + 35.0 * u4;
    let constant = 130.0 * u0 + 24.0 * u1 - 12.0 * u2 - 8.0 * u3 + 6.0 * u4;
    Ok(((quadratic * tau + linear) * tau + constant) / 140.0)
}
