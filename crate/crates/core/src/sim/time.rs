use super::SimError;

/// Resolution of the internal clock. Communication periods and the output
/// grid are converted to integer ticks so that sync points of different
/// rates line up exactly.
pub const TICKS_PER_SECOND: u64 = 1_000_000_000_000;

pub fn ticks_to_time(ticks: u64) -> f64 {
    ticks as f64 / TICKS_PER_SECOND as f64
}

/// Converts a positive duration to ticks, rejecting values that are not
/// a whole number of ticks up to floating-point rounding.
pub fn time_to_ticks(seconds: f64) -> Result<u64, SimError> {
    if !(seconds.is_finite() && seconds > 0.0) {
        return Err(SimError::Timing(format!("duration {seconds} must be positive")));
    }
    let scaled = seconds * TICKS_PER_SECOND as f64;
    if scaled > u64::MAX as f64 / 4.0 {
        return Err(SimError::Timing(format!("duration {seconds} is too long")));
    }
    let ticks = scaled.round();
    if ticks < 1.0 || (ticks - scaled).abs() > 1e-14 * scaled + 1e-6 {
        return Err(SimError::Timing(format!(
            "duration {seconds} is not a whole number of picoseconds"
        )));
    }
    Ok(ticks as u64)
}

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_periods_are_exact() {
        assert_eq!(time_to_ticks(0.1).unwrap(), 100_000_000_000);
        assert_eq!(time_to_ticks(0.0125).unwrap(), 12_500_000_000);
        assert_eq!(ticks_to_time(100_000_000_000), 0.1);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(time_to_ticks(0.0).is_err());
        assert!(time_to_ticks(-1.0).is_err());
        assert!(time_to_ticks(f64::NAN).is_err());
    }

    #[test]
    fn grid_arithmetic() {
        assert_eq!(gcd(20, 50), 10);
        assert_eq!(lcm(20, 50), 100);
    }
}
