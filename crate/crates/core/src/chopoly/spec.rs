use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use super::ChopolyError;

/// Exponent of the forgetting weights, held as an exact non-negative rational.
///
/// Keeping the exponent rational makes it a safe lookup key for cached
/// predictor matrices and lets integer exponents take the exact
/// integer-power path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WeightPower {
    num: u32,
    den: u32,
}

impl WeightPower {
    pub const ZERO: WeightPower = WeightPower { num: 0, den: 1 };

    pub fn new(num: u32, den: u32) -> Result<Self, ChopolyError> {
        if den == 0 {
            return Err(ChopolyError::InvalidWeight(format!("{num}/0")));
        }
        let g = gcd(num, den);
        Ok(WeightPower {
            num: num / g,
            den: den / g,
        })
    }

    pub const fn integer(n: u32) -> Self {
        WeightPower { num: n, den: 1 }
    }

    pub fn numerator(&self) -> u32 {
        self.num
    }

    pub fn denominator(&self) -> u32 {
        self.den
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `base^ω` for a non-negative integer base. Integer exponents use
    /// repeated multiplication; fractional ones go through `powf`.
    pub fn pow(&self, base: u64) -> f64 {
        if self.num == 0 {
            return 1.0;
        }
        if self.is_integer() {
            (base as f64).powi(self.num as i32)
        } else {
            (base as f64).powf(self.as_f64())
        }
    }

    /// The default candidate set {0, 1/8, 1/4, 1/2, 1, 2}.
    pub fn default_set() -> Vec<WeightPower> {
        vec![
            WeightPower::ZERO,
            WeightPower { num: 1, den: 8 },
            WeightPower { num: 1, den: 4 },
            WeightPower { num: 1, den: 2 },
            WeightPower::integer(1),
            WeightPower::integer(2),
        ]
    }
}

impl Default for WeightPower {
    fn default() -> Self {
        WeightPower::ZERO
    }
}

impl PartialOrd for WeightPower {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for WeightPower {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u64 * other.den as u64).cmp(&(other.num as u64 * self.den as u64))
    }
}

impl fmt::Display for WeightPower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Accepts `n`, `n/m` or a terminating decimal such as `0.125`.
impl FromStr for WeightPower {
    type Err = ChopolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || ChopolyError::InvalidWeight(s.to_string());
        if let Some((n, d)) = s.split_once('/') {
            let n: u32 = n.trim().parse().map_err(|_| bad())?;
            let d: u32 = d.trim().parse().map_err(|_| bad())?;
            return WeightPower::new(n, d);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.len() > 9 || !frac.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let int: u64 = if int.is_empty() {
                0
            } else {
                int.parse().map_err(|_| bad())?
            };
            let scale = 10u64.pow(frac.len() as u32);
            let frac_val: u64 = if frac.is_empty() {
                0
            } else {
                frac.parse().map_err(|_| bad())?
            };
            let num = int * scale + frac_val;
            let g = gcd64(num, scale);
            let (num, den) = (num / g, scale / g);
            if num > u32::MAX as u64 || den > u32::MAX as u64 {
                return Err(bad());
            }
            return WeightPower::new(num as u32, den as u32);
        }
        let n: u32 = s.parse().map_err(|_| bad())?;
        Ok(WeightPower::integer(n))
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    gcd64(a as u64, b as u64) as u32
}

fn gcd64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    if a == 0 {
        1
    } else {
        a
    }
}

/// The triple (degree, frame length, weight power) naming one predictor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PredictorSpec {
    degree: usize,
    frame_length: usize,
    weight: WeightPower,
}

impl PredictorSpec {
    /// Fails unless `frame_length > degree`.
    pub fn new(
        degree: usize,
        frame_length: usize,
        weight: WeightPower,
    ) -> Result<Self, ChopolyError> {
        if frame_length <= degree {
            return Err(ChopolyError::DegenerateFit {
                degree,
                frame_length,
            });
        }
        Ok(PredictorSpec {
            degree,
            frame_length,
            weight,
        })
    }

    /// Zeroth-order hold, `P(0, 1, ω)`.
    pub fn hold(weight: WeightPower) -> Self {
        PredictorSpec {
            degree: 0,
            frame_length: 1,
            weight,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn frame_length(&self) -> usize {
        self.frame_length
    }

    pub fn weight(&self) -> WeightPower {
        self.weight
    }

    pub fn with_weight(self, weight: WeightPower) -> Self {
        PredictorSpec { weight, ..self }
    }

    pub fn is_hold(&self) -> bool {
        self.frame_length == 1
    }
}

impl fmt::Display for PredictorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P({},{},{})", self.degree, self.frame_length, self.weight)
    }
}

/// Shrinks `spec` so it fits in `available` samples: the frame length is
/// capped at `available` and the degree at the new frame length minus one.
/// Returns `None` when no sample is available.
pub fn largest_feasible_spec(spec: PredictorSpec, available: usize) -> Option<PredictorSpec> {
    if available == 0 {
        return None;
    }
    let frame_length = spec.frame_length.min(available);
    let degree = spec.degree.min(frame_length - 1);
    Some(PredictorSpec {
        degree,
        frame_length,
        weight: spec.weight,
    })
}
