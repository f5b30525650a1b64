use super::{PredictorSpec, WeightPower};

/// Forgetting weight `w_l` for a non-positive lag `l`:
/// `((λ + l) / λ)^ω` inside the frame, zero before it.
pub fn weight_at(spec: &PredictorSpec, lag: i64) -> f64 {
    let lambda = spec.frame_length() as i64;
    if lag > 0 || lag < 1 - lambda {
        return 0.0;
    }
    let w = spec.weight();
    if w.numerator() == 0 {
        return 1.0;
    }
    w.pow((lambda + lag) as u64) / w.pow(lambda as u64)
}

/// `S_{d,λ} = Σ_{l=0}^{λ-1} l^d`, summed exactly in integers.
pub fn sum_powers(d: u32, lambda: usize) -> f64 {
    sum_powers_exact(d, lambda) as f64
}

pub(crate) fn sum_powers_exact(d: u32, lambda: usize) -> u128 {
    (0..lambda as u128).map(|l| l.pow(d)).sum()
}

/// `SS_{d,λ,ω} = Σ_{l=0}^{λ-1} (λ - l)^ω l^d`.
pub fn weighted_sum_powers(d: u32, spec: &PredictorSpec) -> f64 {
    let lambda = spec.frame_length() as u64;
    let w = spec.weight();
    (0..lambda)
        .map(|l| w.pow(lambda - l) * (l as f64).powi(d as i32))
        .sum()
}

/// `(λ - l)^ω l^d`, the moment-extraction factor for lag `l ≥ 0`.
pub(crate) fn moment_factor(lambda: usize, weight: WeightPower, d: u32, l: usize) -> f64 {
    weight.pow((lambda - l) as u64) * (l as f64).powi(d as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(degree: usize, lambda: usize, w: WeightPower) -> PredictorSpec {
        PredictorSpec::new(degree, lambda, w).unwrap()
    }

    #[test]
    fn weight_examples() {
        assert_eq!(weight_at(&spec(0, 4, WeightPower::ZERO), -3), 1.0);
        assert_eq!(weight_at(&spec(0, 4, WeightPower::integer(1)), -2), 0.5);
        assert_eq!(weight_at(&spec(0, 4, WeightPower::integer(2)), -4), 0.0);
        assert_eq!(weight_at(&spec(0, 4, WeightPower::integer(2)), 0), 1.0);
        assert_eq!(weight_at(&spec(0, 4, WeightPower::integer(2)), 1), 0.0);
    }

    #[test]
    fn weights_are_positive_inside_frame_and_bounded() {
        for w in WeightPower::default_set() {
            let s = spec(1, 6, w);
            for l in -5..=0 {
                let v = weight_at(&s, l);
                assert!(v > 0.0 && v <= 1.0, "w={w} l={l} v={v}");
            }
        }
    }

    #[test]
    fn power_sum_examples() {
        assert_eq!(sum_powers(0, 7), 7.0);
        assert_eq!(sum_powers(2, 4), 14.0);
        assert_eq!(sum_powers(4, 3), 17.0);
    }

    #[test]
    fn power_sums_match_closed_forms() {
        for lam in 1..40u128 {
            let l = lam as usize;
            assert_eq!(sum_powers_exact(1, l), (lam - 1) * lam / 2);
            assert_eq!(sum_powers_exact(2, l), (lam - 1) * lam * (2 * lam - 1) / 6);
            assert_eq!(sum_powers_exact(3, l), (lam - 1).pow(2) * lam.pow(2) / 4);
            assert_eq!(
                sum_powers_exact(4, l) as i128,
                ((lam as i128 - 1) * lam as i128 * (2 * lam as i128 - 1)
                    * (3 * (lam as i128).pow(2) - 3 * lam as i128 - 1))
                    / 30
            );
        }
    }

    #[test]
    fn weighted_sum_examples() {
        assert_eq!(weighted_sum_powers(3, &spec(0, 5, WeightPower::ZERO)), 100.0);
        assert_eq!(weighted_sum_powers(0, &spec(0, 2, WeightPower::integer(1))), 3.0);
        // (3-0)^2·0 + (3-1)^2·1 + (3-2)^2·2
        assert_eq!(weighted_sum_powers(1, &spec(0, 3, WeightPower::integer(2))), 6.0);
    }

    fn binomial(n: u32, k: u32) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn weighted_sums_match_binomial_expansion() {
        for omega in 0..=4u32 {
            for lambda in 1..=12usize {
                for d in 0..=6u32 {
                    let s = spec(0, lambda, WeightPower::integer(omega));
                    let direct = weighted_sum_powers(d, &s);
                    let expanded: f64 = (0..=omega)
                        .map(|o| {
                            let sign = if o % 2 == 0 { 1.0 } else { -1.0 };
                            sign * binomial(omega, o)
                                * (lambda as f64).powi((omega - o) as i32)
                                * sum_powers(o + d, lambda)
                        })
                        .sum();
                    let scale = direct.abs().max(1.0);
                    assert!(
                        (direct - expanded).abs() <= 1e-12 * scale,
                        "ω={omega} λ={lambda} d={d}: {direct} vs {expanded}"
                    );
                }
            }
        }
    }
}
