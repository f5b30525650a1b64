//! Seeded randomized checks of the predictor and context invariants.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chopatt::{classify_functional, update_thresholds, ContextConfig, ContextState};
use crate::chopoly::{
    eval_poly, exact_predictor_matrix, extrapolate_type1, rational_to_f64, PredictorCache,
    PredictorSpec, SampleFrame, WeightPower,
};

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest observed discrepancy, in the property's own units.
    pub worst: f64,
}

impl FuzzOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzReport {
    pub seed: u64,
    pub outcomes: Vec<FuzzOutcome>,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(FuzzOutcome::passed)
    }
}

struct Tally {
    name: &'static str,
    cases: usize,
    failures: usize,
    worst: f64,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            name,
            cases: 0,
            failures: 0,
            worst: 0.0,
        }
    }

    fn record(&mut self, discrepancy: f64, ok: bool) {
        self.cases += 1;
        self.worst = self.worst.max(discrepancy);
        if !ok {
            self.failures += 1;
        }
    }

    fn finish(self) -> FuzzOutcome {
        FuzzOutcome {
            name: self.name,
            cases: self.cases,
            failures: self.failures,
            worst: self.worst,
        }
    }
}

fn random_spec(rng: &mut ChaCha8Rng) -> PredictorSpec {
    let omegas = WeightPower::default_set();
    let degree = rng.gen_range(0..=2);
    let frame_length = rng.gen_range(degree + 1..=10);
    let weight = omegas[rng.gen_range(0..omegas.len())];
    PredictorSpec::new(degree, frame_length, weight).expect("frame longer than degree")
}

fn random_frame(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-10.0..10.0)).collect()
}

fn rel_diff(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(a.abs()).max(b.abs()).max(1.0)
}

/// Runs every property `cases` times from `seed`.
pub fn run_fuzz(seed: u64, cases: usize) -> FuzzReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cache = PredictorCache::global();
    let mut outcomes = Vec::new();

    let mut t = Tally::new("type_equivalence");
    for _ in 0..cases {
        let spec = random_spec(&mut rng);
        let values = random_frame(&mut rng, spec.frame_length());
        let frame = SampleFrame::from_recent(&values);
        let tau = rng.gen_range(0.0..=1.0);
        let a = extrapolate_type1(&frame, &spec, tau).expect("frame filled");
        let b = cache.get(spec).extrapolate(&frame, tau).expect("frame filled");
        let d = rel_diff(a, b, values.iter().fold(0.0, |m: f64, v| m.max(v.abs())));
        t.record(d, d <= 1e-10);
    }
    outcomes.push(t.finish());

    let mut t = Tally::new("polynomial_exactness");
    for _ in 0..cases {
        let spec = random_spec(&mut rng);
        let coeffs: Vec<f64> = (0..=spec.degree()).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let values: Vec<f64> = (0..spec.frame_length())
            .map(|l| eval_poly(&coeffs, -(l as f64)))
            .collect();
        let frame = SampleFrame::from_recent(&values);
        let tau = rng.gen_range(0.0..=1.0);
        let got = cache.get(spec).extrapolate(&frame, tau).expect("frame filled");
        let d = rel_diff(got, eval_poly(&coeffs, tau), 0.0);
        t.record(d, d <= 1e-9);
    }
    outcomes.push(t.finish());

    let mut t = Tally::new("linearity");
    for _ in 0..cases {
        let spec = random_spec(&mut rng);
        let u = random_frame(&mut rng, spec.frame_length());
        let v = random_frame(&mut rng, spec.frame_length());
        let (a, b) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let w: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let p = cache.get(spec);
        let tau = rng.gen_range(0.0..=1.0);
        let pu = p.extrapolate(&SampleFrame::from_recent(&u), tau).unwrap();
        let pv = p.extrapolate(&SampleFrame::from_recent(&v), tau).unwrap();
        let pw = p.extrapolate(&SampleFrame::from_recent(&w), tau).unwrap();
        let d = rel_diff(pw, a * pu + b * pv, 30.0);
        t.record(d, d <= 1e-10);
    }
    outcomes.push(t.finish());

    let mut t = Tally::new("constant_reproduction");
    for _ in 0..cases {
        let spec = random_spec(&mut rng);
        let p = cache.get(spec);
        let mut worst = 0.0f64;
        for (k, row) in p.rows().iter().enumerate() {
            let sum: f64 = row.iter().sum();
            let want = if k == 0 { 1.0 } else { 0.0 };
            worst = worst.max((sum - want).abs());
        }
        t.record(worst, worst <= 1e-10);
    }
    outcomes.push(t.finish());

    let mut t = Tally::new("exact_matrix");
    for _ in 0..cases.min(200) {
        let degree = rng.gen_range(0..=2);
        let frame_length = rng.gen_range(degree + 1..=8);
        let weight = WeightPower::integer(rng.gen_range(0..=3));
        let spec = PredictorSpec::new(degree, frame_length, weight).unwrap();
        let exact = exact_predictor_matrix(&spec).expect("integer weight");
        let p = cache.get(spec);
        let mut worst = 0.0f64;
        for (i, row) in exact.iter().enumerate() {
            for (j, r) in row.iter().enumerate() {
                worst = worst.max((rational_to_f64(r) - p.get(i, j)).abs());
            }
        }
        t.record(worst, worst <= 1e-12);
    }
    outcomes.push(t.finish());

    let mut t = Tally::new("scale_covariance");
    let config = ContextConfig::default();
    for _ in 0..cases.min(200) {
        let alpha = f64::powi(2.0, rng.gen_range(-3..=3));
        let n = rng.gen_range(5..40);
        let mut x = rng.gen_range(-1.0..1.0);
        let mut a = ContextState::new(&config);
        let mut b = ContextState::new(&config);
        let mut mismatches = 0usize;
        for _ in 0..n {
            x += rng.gen_range(-1.0..1.0) * if rng.gen_bool(0.1) { 5.0 } else { 0.2 };
            let da = a.advance(x, &config, cache);
            let db = b.advance(alpha * x, &config, cache);
            if da.context != db.context
                || da.predictor != db.predictor
                || da.omega_best != db.omega_best
                || (da.rho - db.rho).abs() > 1e-12
            {
                mismatches += 1;
            }
        }
        t.record(mismatches as f64, mismatches == 0);
    }
    outcomes.push(t.finish());

    let mut t = Tally::new("monotone_threshold");
    for _ in 0..cases {
        let values = random_frame(&mut rng, 12);
        let frame = SampleFrame::from_recent(&values);
        let small = rng.gen_range(4..8);
        let large = rng.gen_range(small..=12);
        let (g_small, g_large) = (update_thresholds(&frame, small), update_thresholds(&frame, large));
        t.record((g_small - g_large).max(0.0), g_large >= g_small);
    }
    outcomes.push(t.finish());

    let mut t = Tally::new("exhaustiveness");
    for _ in 0..cases {
        let pick = |rng: &mut ChaCha8Rng| match rng.gen_range(0..4) {
            0 => 0.0,
            1 => rng.gen_range(-1.0..1.0),
            _ => rng.gen_range(-5.0..5.0),
        };
        let (dp, dl) = (pick(&mut rng), pick(&mut rng));
        let gamma = if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.0..2.0) };
        let c = classify_functional(dp, dl, gamma);
        t.record(0.0, c.is_functional());
    }
    outcomes.push(t.finish());

    FuzzReport { seed, outcomes }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_seed_passes() {
        let report = run_fuzz(7, 200);
        for o in &report.outcomes {
            assert!(o.passed(), "{o:?}");
        }
    }

    #[test]
    fn same_seed_same_report() {
        assert_eq!(run_fuzz(11, 50), run_fuzz(11, 50));
    }
}
