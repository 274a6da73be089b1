//! Seeded random systems, the exact one-step expectation oracle, and the
//! multi-trial comparison protocol on the equal-row-touch axis.
//!
//! All randomness is derived from `ExperimentConfig::seed` through
//! [`sub_seed`]: trial `t` uses `sub_seed(seed, t)`, and inside a trial the
//! system, noise, starting point and each method's row sampler draw from
//! `sub_seed(trial_seed, stream)` with the stream ids below. Results are
//! therefore identical whatever order the parallel trials finish in.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{StandardNormal, Uniform};
use rayon::prelude::*;

use crate::bounds::RateFactors;
use crate::error::{Error, Result};
use crate::matrix::{dot, standardize, DenseMatrix, StandardizedSystem};
use crate::solvers::{pair_geometry, solve, two_subspace_step, Method, SolveOptions, SolveTrace};

/// Largest `m` accepted by [`brute_force_expectation`].
pub const ENUMERATION_LIMIT: usize = 64;

const STREAM_SYSTEM: u64 = 0;
const STREAM_NOISE: u64 = 1;
const STREAM_START: u64 = 2;
const STREAM_SOLVER_BASE: u64 = 3;

/// SplitMix64 finalizer applied to `seed + (index + 1) * 0x9E3779B97F4A7C15`.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// Draws `A` with i.i.d. entries uniform on `[c, 1]`, a standard normal
/// `x_true`, sets `b = A x_true` and standardizes.
pub fn gen_uniform_system(
    m: usize,
    n: usize,
    c: f64,
    seed: u64,
) -> Result<(StandardizedSystem, Vec<f64>)> {
    if !(-1.0..1.0).contains(&c) {
        return Err(Error::InvalidConfig(format!(
            "entry interval lower end c must lie in [-1, 1), got {c}"
        )));
    }
    let mut rng = rng(seed);
    let dist = Uniform::new_inclusive(c, 1.0).expect("c < 1 checked above");
    let data: Vec<f64> = (0..m * n).map(|_| rng.sample(dist)).collect();
    let a = DenseMatrix::new(m, n, data)?;
    let x_true = gaussian_vec(&mut rng, n);
    let b = a.mul_vec(&x_true);
    Ok((standardize(&a, &b)?, x_true))
}

/// Adds i.i.d. Gaussian noise rescaled to Euclidean norm `noise_norm`.
/// Returns the perturbed vector and the noise.
pub fn add_noise(b: &[f64], noise_norm: f64, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(noise_norm >= 0.0 && noise_norm.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "noise norm must be finite and >= 0, got {noise_norm}"
        )));
    }
    if noise_norm == 0.0 {
        return Ok((b.to_vec(), vec![0.0; b.len()]));
    }
    let mut rng = rng(seed);
    let mut w = gaussian_vec(&mut rng, b.len());
    let scale = noise_norm / dot(&w, &w).sqrt();
    w.iter_mut().for_each(|wi| *wi *= scale);
    let noisy = b.iter().zip(&w).map(|(bi, wi)| bi + wi).collect();
    Ok((noisy, w))
}

/// Exact conditional expectation of `||x_true - x_next||^2` after one
/// two-subspace step from `x_prev`, averaged over every ordered pair
/// `r != s`. Parallel pairs are skipped and the average renormalized over
/// the usable ones.
pub fn brute_force_expectation(
    sys: &StandardizedSystem,
    x_true: &[f64],
    x_prev: &[f64],
    sign_adjust: bool,
) -> Result<f64> {
    let m = sys.rows();
    if m < 2 {
        return Err(Error::TooFewRows { needed: 2, got: m });
    }
    if m > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            m,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut total = 0.0;
    let mut usable = 0usize;
    let mut x = vec![0.0; x_prev.len()];
    for r in 0..m {
        for s in 0..m {
            if r == s {
                continue;
            }
            let g = match pair_geometry(sys, r, s, sign_adjust) {
                Ok(g) => g,
                Err(Error::DegeneratePair { .. }) => continue,
                Err(e) => return Err(e),
            };
            x.copy_from_slice(x_prev);
            two_subspace_step(&mut x, sys, &g);
            total += x_true
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
            usable += 1;
        }
    }
    if usable == 0 {
        return Err(Error::NoUsablePair);
    }
    Ok(total / usable as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    /// Lower end of the entry interval `[c, 1]`.
    pub c: f64,
    /// Euclidean norm of the added measurement noise.
    pub noise_norm: f64,
    /// Iterations per method. Methods consuming more rows per iteration
    /// reach further along the row-touch axis.
    pub iterations: usize,
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub sign_adjust: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            m: 500,
            n: 50,
            c: 0.0,
            noise_norm: 0.0,
            iterations: 1000,
            trials: 10,
            seed: 0,
            methods: vec![Method::Randomized, Method::TwoSubspace],
            sign_adjust: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n == 0 || self.m < self.n {
            return bad(format!(
                "need m >= n >= 1, got m = {}, n = {}",
                self.m, self.n
            ));
        }
        if self.iterations == 0 || self.trials == 0 {
            return bad("iterations and trials must be >= 1".into());
        }
        if !(-1.0..1.0).contains(&self.c) {
            return bad(format!("c must lie in [-1, 1), got {}", self.c));
        }
        if !(self.noise_norm >= 0.0 && self.noise_norm.is_finite()) {
            return bad(format!("noise norm must be >= 0, got {}", self.noise_norm));
        }
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        if self.methods.contains(&Method::TwoSubspace) && self.m < 2 {
            return bad("the two-subspace method needs m >= 2".into());
        }
        Ok(())
    }

    fn methods_dedup(&self) -> Vec<Method> {
        let mut out: Vec<Method> = Vec::with_capacity(self.methods.len());
        for m in &self.methods {
            if !out.contains(m) {
                out.push(*m);
            }
        }
        out
    }
}

/// Everything recorded for one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    /// Measured on the noiseless standardized system; `q` is not computed.
    pub factors: RateFactors,
    pub w_inf: f64,
    /// `||x_true - x0||_2`.
    pub err0: f64,
    pub traces: Vec<SolveTrace>,
}

impl TrialOutcome {
    pub fn trace(&self, method: Method) -> Option<&SolveTrace> {
        self.traces.iter().find(|t| t.method == method)
    }

    /// Error curve of `method`, indexed by iteration.
    pub fn errors(&self, method: Method) -> Option<Vec<f64>> {
        self.trace(method).and_then(SolveTrace::errors)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregatePoint {
    pub k: usize,
    pub row_touches: usize,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodAggregate {
    pub method: Method,
    pub points: Vec<AggregatePoint>,
}

impl MethodAggregate {
    pub fn at_row_touches(&self, row_touches: usize) -> Option<&AggregatePoint> {
        self.points.iter().find(|p| p.row_touches == row_touches)
    }
}

/// Cross-trial error statistics per method, plus the per-trial outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateTrace {
    pub config: ExperimentConfig,
    pub methods: Vec<MethodAggregate>,
    pub trials: Vec<TrialOutcome>,
}

impl AggregateTrace {
    pub fn method(&self, method: Method) -> Option<&MethodAggregate> {
        self.methods.iter().find(|a| a.method == method)
    }

    /// Largest row-touch count reached by every method.
    pub fn common_final_row_touches(&self) -> usize {
        self.methods
            .iter()
            .filter_map(|a| a.points.last().map(|p| p.row_touches))
            .min()
            .unwrap_or(0)
    }
}

fn summarize(values: &mut [f64]) -> (f64, f64, f64, f64) {
    values.sort_by(f64::total_cmp);
    let len = values.len();
    let mean = values.iter().sum::<f64>() / len as f64;
    let median = if len % 2 == 1 {
        values[len / 2]
    } else {
        0.5 * (values[len / 2 - 1] + values[len / 2])
    };
    (mean, median, values[0], values[len - 1])
}

fn run_trial(config: &ExperimentConfig, methods: &[Method], trial: usize) -> Result<TrialOutcome> {
    let seed = sub_seed(config.seed, trial as u64);
    let (clean, x_true) =
        gen_uniform_system(config.m, config.n, config.c, sub_seed(seed, STREAM_SYSTEM))?;
    let factors = RateFactors::measure_basic(&clean)?;
    let (b, w) = add_noise(clean.rhs(), config.noise_norm, sub_seed(seed, STREAM_NOISE))?;
    let sys = clean.with_rhs(b)?;
    let x0 = gaussian_vec(&mut rng(sub_seed(seed, STREAM_START)), config.n);
    let err0 = x_true
        .iter()
        .zip(&x0)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();

    let traces = methods
        .iter()
        .map(|&method| {
            let stream =
                STREAM_SOLVER_BASE + Method::ALL.iter().position(|m| *m == method).unwrap() as u64;
            let mut opts = SolveOptions::new(method, config.iterations, sub_seed(seed, stream));
            opts.sign_adjust = config.sign_adjust;
            opts.x0 = Some(x0.clone());
            opts.x_true = Some(x_true.clone());
            solve(&sys, &opts)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(TrialOutcome {
        trial,
        seed,
        factors,
        w_inf: w.iter().fold(0.0, |acc, v| acc.max(v.abs())),
        err0,
        traces,
    })
}

/// Runs every requested method on `trials` independently drawn systems from
/// a shared random start and aggregates the error curves.
pub fn run_comparison(config: &ExperimentConfig) -> Result<AggregateTrace> {
    config.validate()?;
    let methods = config.methods_dedup();
    let trials = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, &methods, t))
        .collect::<Result<Vec<_>>>()?;

    let aggregates = methods
        .iter()
        .map(|&method| {
            let factor = method.row_touches_per_iteration();
            let points = (0..=config.iterations)
                .map(|k| {
                    let mut errs: Vec<f64> = trials
                        .iter()
                        .map(|t| t.trace(method).unwrap().records[k].error.unwrap())
                        .collect();
                    let (mean, median, min, max) = summarize(&mut errs);
                    AggregatePoint {
                        k,
                        row_touches: k * factor,
                        mean,
                        median,
                        min,
                        max,
                    }
                })
                .collect();
            MethodAggregate { method, points }
        })
        .collect();

    Ok(AggregateTrace {
        config: config.clone(),
        methods: aggregates,
        trials,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemiconvergenceScan {
    /// Iteration at which the mean two-subspace error is smallest.
    pub k_min_error: usize,
    /// Mean error across trials per iteration.
    pub curve: Vec<f64>,
    /// Trials whose own error curve bottoms out before the last iteration.
    pub trials_with_interior_min: usize,
    pub aggregate: AggregateTrace,
}

fn argmin(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) },
        )
        .0
}

/// Runs the two-subspace method under `config` and locates the minimum of
/// its error curve. Purely observational: no stopping rule is derived.
pub fn semiconvergence_scan(config: &ExperimentConfig) -> Result<SemiconvergenceScan> {
    let mut cfg = config.clone();
    cfg.methods = vec![Method::TwoSubspace];
    let aggregate = run_comparison(&cfg)?;
    let curve: Vec<f64> = aggregate.methods[0].points.iter().map(|p| p.mean).collect();
    let last = curve.len() - 1;
    let trials_with_interior_min = aggregate
        .trials
        .iter()
        .filter(|t| argmin(&t.errors(Method::TwoSubspace).unwrap()) < last)
        .count();
    Ok(SemiconvergenceScan {
        k_min_error: argmin(&curve),
        curve,
        trials_with_interior_min,
        aggregate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sub_seeds_differ_and_are_stable() {
        assert_eq!(sub_seed(7, 3), sub_seed(7, 3));
        assert_ne!(sub_seed(7, 3), sub_seed(7, 4));
        assert_ne!(sub_seed(7, 3), sub_seed(8, 3));
    }

    #[test]
    fn generated_system_shape_and_determinism() {
        let (s, x) = gen_uniform_system(30, 4, 0.2, 99).unwrap();
        assert_eq!((s.rows(), s.cols(), x.len(), s.rhs().len()), (30, 4, 4, 30));
        assert!(s
            .matrix()
            .row_iter()
            .all(|r| (dot(r, r).sqrt() - 1.0).abs() < 1e-12));
        let (t, y) = gen_uniform_system(30, 4, 0.2, 99).unwrap();
        assert_eq!((s, x), (t, y));
        assert!(gen_uniform_system(5, 2, 1.0, 0).is_err());
    }

    #[test]
    fn noise_has_exact_norm() {
        let b = vec![1.0; 50];
        let (same, w) = add_noise(&b, 0.0, 1).unwrap();
        assert_eq!(same, b);
        assert!(w.iter().all(|v| *v == 0.0));
        for seed in 0..20 {
            let (noisy, w) = add_noise(&b, 0.1, seed).unwrap();
            assert!((dot(&w, &w).sqrt() - 0.1).abs() < 1e-12);
            assert!(w.iter().all(|v| v.abs() <= 0.1));
            assert!(noisy
                .iter()
                .zip(&b)
                .zip(&w)
                .all(|((n, b), w)| n - b == *w || (n - b - w).abs() < 1e-15));
        }
        assert!(add_noise(&b, -1.0, 0).is_err());
    }

    #[test]
    fn brute_force_trivial_cases() {
        let (s, x) = gen_uniform_system(6, 3, 0.0, 4).unwrap();
        assert!(brute_force_expectation(&s, &x, &x, false).unwrap() < 1e-28);

        let a = DenseMatrix::from_rows(&[[1.0, 0.2], [0.3, 1.0]]).unwrap();
        let xt = [0.5, -2.0];
        let s = standardize(&a, &a.mul_vec(&xt)).unwrap();
        let e = brute_force_expectation(&s, &xt, &[3.0, 3.0], false).unwrap();
        assert!(e < 1e-25);

        let (big, x) = gen_uniform_system(65, 2, 0.0, 4).unwrap();
        assert!(matches!(
            brute_force_expectation(&big, &x, &x, false),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn config_validation() {
        let mut c = ExperimentConfig::default();
        assert!(c.validate().is_ok());
        c.m = 10;
        c.n = 20;
        assert!(c.validate().is_err());
        let c = ExperimentConfig {
            c: 1.0,
            ..ExperimentConfig::default()
        };
        assert!(c.validate().is_err());
        let c = ExperimentConfig {
            methods: vec![],
            ..ExperimentConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn single_trial_single_method_matches_trace() {
        let cfg = ExperimentConfig {
            m: 40,
            n: 5,
            c: 0.3,
            iterations: 25,
            trials: 1,
            seed: 17,
            methods: vec![Method::Randomized],
            ..ExperimentConfig::default()
        };
        let agg = run_comparison(&cfg).unwrap();
        let trace = agg.trials[0].trace(Method::Randomized).unwrap();
        let errs = trace.errors().unwrap();
        let pts = &agg.method(Method::Randomized).unwrap().points;
        assert_eq!(pts.len(), 26);
        for (p, e) in pts.iter().zip(&errs) {
            assert_eq!((p.mean, p.median, p.min, p.max), (*e, *e, *e, *e));
        }
    }

    #[test]
    fn shared_start_and_row_touch_axis() {
        let cfg = ExperimentConfig {
            m: 40,
            n: 5,
            c: 0.5,
            iterations: 10,
            trials: 3,
            seed: 2,
            ..ExperimentConfig::default()
        };
        let agg = run_comparison(&cfg).unwrap();
        for t in &agg.trials {
            let rk = t.errors(Method::Randomized).unwrap();
            let ts = t.errors(Method::TwoSubspace).unwrap();
            assert_eq!(rk[0], ts[0]);
            assert_eq!(rk[0], t.err0);
        }
        let ts = agg.method(Method::TwoSubspace).unwrap();
        assert_eq!(ts.points[3].row_touches, 6);
        assert_eq!(agg.common_final_row_touches(), 10);
    }

    #[test]
    fn noiseless_scan_ends_at_final_iteration() {
        let cfg = ExperimentConfig {
            m: 60,
            n: 6,
            c: 0.5,
            iterations: 40,
            trials: 4,
            seed: 5,
            ..ExperimentConfig::default()
        };
        let scan = semiconvergence_scan(&cfg).unwrap();
        assert_eq!(scan.k_min_error, 40);
        assert_eq!(scan.curve.len(), 41);
    }
}
