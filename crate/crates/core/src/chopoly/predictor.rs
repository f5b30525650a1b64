use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use super::linalg::solve_in_place;
use super::sums::{moment_factor, weighted_sum_powers};
use super::{ChopolyError, PredictorSpec, SampleFrame};

fn alternating(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Sign-alternating Hankel matrix of weighted power sums,
/// entry `(i, j) = (-1)^{i+j} SS_{i+j,λ,ω}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelMatrix {
    spec: PredictorSpec,
    entries: Vec<f64>,
}

impl HankelMatrix {
    pub fn spec(&self) -> PredictorSpec {
        self.spec
    }

    pub fn size(&self) -> usize {
        self.spec.degree() + 1
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.size() + col]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.size()).map(<[f64]>::to_vec).collect()
    }
}

pub fn build_hankel(spec: PredictorSpec) -> HankelMatrix {
    let n = spec.degree() + 1;
    let sums: Vec<f64> = (0..2 * n - 1)
        .map(|d| weighted_sum_powers(d as u32, &spec))
        .collect();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            entries.push(alternating(i + j) * sums[i + j]);
        }
    }
    HankelMatrix { spec, entries }
}

/// Signed weighted moments `(-1)^d mm_{d,λ,ω}` of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector(pub Vec<f64>);

pub fn moments(frame: &SampleFrame, spec: &PredictorSpec) -> Result<MomentVector, ChopolyError> {
    let lambda = spec.frame_length();
    ensure_filled(frame, lambda)?;
    let entries = (0..=spec.degree())
        .map(|d| {
            let mm: f64 = frame
                .iter()
                .take(lambda)
                .enumerate()
                .map(|(l, u)| moment_factor(lambda, spec.weight(), d as u32, l) * u)
                .sum();
            alternating(d) * mm
        })
        .collect();
    Ok(MomentVector(entries))
}

fn ensure_filled(frame: &SampleFrame, needed: usize) -> Result<(), ChopolyError> {
    if frame.valid_count() < needed {
        return Err(ChopolyError::FrameUnderfull {
            needed,
            available: frame.valid_count(),
        });
    }
    Ok(())
}

/// Powers `(1, τ, …, τ^δ)` of a relative prediction time.
#[derive(Debug, Clone, PartialEq)]
pub struct TauVector {
    horizon: f64,
    powers: Vec<f64>,
}

impl TauVector {
    pub fn new(horizon: f64, degree: usize) -> Self {
        let mut powers = Vec::with_capacity(degree + 1);
        let mut p = 1.0;
        for _ in 0..=degree {
            powers.push(p);
            p *= horizon;
        }
        TauVector { horizon, powers }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }
}

/// Evaluates `Σ c_k τ^k` by Horner's rule.
pub fn eval_poly(coefficients: &[f64], tau: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, c| acc * tau + c)
}

/// Moment route: builds the Hankel system for this frame and solves it.
pub fn fit_type1(frame: &SampleFrame, spec: &PredictorSpec) -> Result<Vec<f64>, ChopolyError> {
    let n = spec.degree() + 1;
    let mut z = build_hankel(*spec).entries;
    let mut m = moments(frame, spec)?.0;
    solve_in_place(&mut z, &mut m, n, 1)?;
    Ok(m)
}

pub fn extrapolate_type1(
    frame: &SampleFrame,
    spec: &PredictorSpec,
    tau: f64,
) -> Result<f64, ChopolyError> {
    let coefficients = fit_type1(frame, spec)?;
    let t = TauVector::new(tau, spec.degree());
    Ok(coefficients
        .iter()
        .zip(t.powers())
        .map(|(c, p)| c * p)
        .sum())
}

/// Precomputed `(δ+1)×λ` matrix mapping a frame to polynomial coefficients.
///
/// Row `k` dotted with `(u_0, …, u_{1-λ})` gives the coefficient of `τ^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorMatrix {
    spec: PredictorSpec,
    entries: Vec<f64>,
}

impl PredictorMatrix {
    pub fn spec(&self) -> PredictorSpec {
        self.spec
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.spec.frame_length() + col]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .chunks(self.spec.frame_length())
            .map(<[f64]>::to_vec)
            .collect()
    }

    /// `Π u_λ`: coefficients of `1, τ, …, τ^δ`.
    pub fn coefficients(&self, frame: &SampleFrame) -> Result<Vec<f64>, ChopolyError> {
        let lambda = self.spec.frame_length();
        ensure_filled(frame, lambda)?;
        Ok(self
            .entries
            .chunks(lambda)
            .map(|row| row.iter().zip(frame.iter()).map(|(p, u)| p * u).sum())
            .collect())
    }

    pub fn extrapolate(&self, frame: &SampleFrame, tau: f64) -> Result<f64, ChopolyError> {
        Ok(eval_poly(&self.coefficients(frame)?, tau))
    }
}

pub fn build_predictor_matrix(spec: PredictorSpec) -> PredictorMatrix {
    let n = spec.degree() + 1;
    let lambda = spec.frame_length();
    if lambda == 1 {
        return PredictorMatrix {
            spec,
            entries: vec![1.0],
        };
    }
    let mut z = build_hankel(spec).entries;
    let mut e = Vec::with_capacity(n * lambda);
    for d in 0..n {
        for l in 0..lambda {
            e.push(alternating(d) * moment_factor(lambda, spec.weight(), d as u32, l));
        }
    }
    solve_in_place(&mut z, &mut e, n, lambda)
        .expect("weighted Hankel matrix is invertible when frame_length > degree");
    PredictorMatrix { spec, entries: e }
}

pub fn extrapolate_type2(
    frame: &SampleFrame,
    matrix: &PredictorMatrix,
    tau: f64,
) -> Result<f64, ChopolyError> {
    matrix.extrapolate(frame, tau)
}

/// Memoized predictor matrices keyed by spec. Matrices are built once and
/// shared read-only afterwards.
#[derive(Debug, Default)]
pub struct PredictorCache {
    matrices: RwLock<HashMap<PredictorSpec, Arc<PredictorMatrix>>>,
}

impl PredictorCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Process-wide cache shared by every channel.
    pub fn global() -> &'static PredictorCache {
        static CACHE: OnceLock<PredictorCache> = OnceLock::new();
        CACHE.get_or_init(PredictorCache::new)
    }

    pub fn get(&self, spec: PredictorSpec) -> Arc<PredictorMatrix> {
        if let Some(m) = self.matrices.read().expect("cache lock").get(&spec) {
            return Arc::clone(m);
        }
        let built = Arc::new(build_predictor_matrix(spec));
        let mut guard = self.matrices.write().expect("cache lock");
        Arc::clone(guard.entry(spec).or_insert(built))
    }

    pub fn len(&self) -> usize {
        self.matrices.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn specs(&self) -> Vec<PredictorSpec> {
        self.matrices.read().expect("cache lock").keys().copied().collect()
    }
}
