use super::PredictorSpec;

/// Per-extrapolation elementary operation counts (adds plus products)
/// once the frame has hopped, for the moment route and the matrix route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlopCounts {
    pub type1: i64,
    pub type2: i64,
    /// `type1 - type2`, equal to `2δ² + δ + 3 - 2λ`.
    pub excess: i64,
}

/// Counts follow the per-hop operation table literally. For δ = 0 the
/// `δ - 1` rows are negative; they are kept so the excess identity holds.
pub fn flop_counts(spec: &PredictorSpec) -> FlopCounts {
    let d = spec.degree() as i64;
    let l = spec.frame_length() as i64;

    let tau_powers = d - 1;
    let final_dot = d + d;

    let moments = d * (l - 1) + (l - 2) * d + 1;
    let hankel_solve = d * (d + 1) + (d + 1) * (d + 1);
    let type1 = tau_powers + moments + hankel_solve + final_dot;

    let matrix_product = (d + 1) * (l - 1) + (d + 1) * l;
    let type2 = tau_powers + matrix_product + final_dot;

    FlopCounts {
        type1,
        type2,
        excess: type1 - type2,
    }
}
