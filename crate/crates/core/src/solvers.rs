//! Row-action solvers: cyclic Kaczmarz, randomized Kaczmarz and the
//! two-subspace randomized Kaczmarz method, plus the explicit two-step form
//! with a translation parameter that the two-subspace update is equivalent to.
//!
//! Row indices are 0-based here; traces and the CLI report them 1-based.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{dot, StandardizedSystem};
use crate::tol;

/// Consecutive degenerate pair draws tolerated before checking exhaustively
/// whether any usable pair exists at all.
const DEGENERATE_DRAWS_BEFORE_SCAN: usize = 64;

/// Iterate, iteration counter and the random stream driving row selection.
#[derive(Debug, Clone)]
pub struct SolverState {
    x: Vec<f64>,
    k: usize,
    rng: ChaCha8Rng,
}

impl SolverState {
    pub fn new(x0: Vec<f64>, seed: u64) -> Self {
        Self {
            x: x0,
            k: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn zeros(n: usize, seed: u64) -> Self {
        Self::new(vec![0.0; n], seed)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn into_x(self) -> Vec<f64> {
        self.x
    }

    /// Uniform row index in `0..m`, drawn with replacement.
    pub fn sample_row(&mut self, m: usize) -> usize {
        assert!(m >= 1, "cannot sample from an empty matrix");
        self.rng.random_range(0..m)
    }

    /// Uniform ordered pair `(r, s)` with `r != s`.
    pub fn sample_pair(&mut self, m: usize) -> Result<(usize, usize)> {
        if m < 2 {
            return Err(Error::TooFewRows { needed: 2, got: m });
        }
        let r = self.rng.random_range(0..m);
        let mut s = self.rng.random_range(0..m - 1);
        if s >= r {
            s += 1;
        }
        Ok((r, s))
    }

    /// Projects onto row `r` and advances the counter.
    pub fn rk_step(&mut self, sys: &StandardizedSystem, r: usize) -> Result<()> {
        rk_step(&mut self.x, sys, r)?;
        self.k += 1;
        Ok(())
    }

    /// Applies one two-subspace update and advances the counter.
    pub fn two_subspace_step(&mut self, sys: &StandardizedSystem, g: &PairGeometry) {
        two_subspace_step(&mut self.x, sys, g);
        self.k += 1;
    }
}

fn check_index(index: usize, m: usize) -> Result<()> {
    if index >= m {
        return Err(Error::IndexOutOfRange { index, m });
    }
    Ok(())
}

/// Orthogonal projection of `x` onto the hyperplane `<a_r, x> = b_r`.
pub fn rk_step(x: &mut [f64], sys: &StandardizedSystem, r: usize) -> Result<()> {
    check_index(r, sys.rows())?;
    let a = sys.row(r);
    let t = sys.rhs()[r] - dot(a, x);
    for (xi, ai) in x.iter_mut().zip(a) {
        *xi += t * ai;
    }
    Ok(())
}

/// Everything one two-subspace iteration needs about the row pair `(r, s)`.
///
/// `a_r = mu * a_s + gamma * v` with `v` a unit vector orthogonal to `a_s`.
/// When `flipped` is set, `a_r` and `b_r` were negated so that `mu >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGeometry {
    pub r: usize,
    pub s: usize,
    pub mu: f64,
    pub gamma: f64,
    pub v: Vec<f64>,
    pub beta: f64,
    pub flipped: bool,
}

pub fn pair_geometry(
    sys: &StandardizedSystem,
    r: usize,
    s: usize,
    sign_adjust: bool,
) -> Result<PairGeometry> {
    let m = sys.rows();
    check_index(r, m)?;
    check_index(s, m)?;
    if r == s {
        return Err(Error::DegeneratePair { r, s, mu: 1.0 });
    }
    let a_s = sys.row(s);
    let b_s = sys.rhs()[s];
    let raw_mu = dot(sys.row(r), a_s);
    if raw_mu.abs() >= 1.0 - tol::PARALLEL {
        return Err(Error::DegeneratePair { r, s, mu: raw_mu });
    }
    let flipped = sign_adjust && raw_mu < 0.0;
    let sign = if flipped { -1.0 } else { 1.0 };
    let mu = sign * raw_mu;
    let b_r = sign * sys.rhs()[r];

    let mut v: Vec<f64> = sys
        .row(r)
        .iter()
        .zip(a_s)
        .map(|(ar, as_)| sign * ar - mu * as_)
        .collect();
    // ||a_r - mu a_s|| equals sqrt(1 - mu^2) exactly; the computed norm keeps
    // v at unit length when the subtraction cancels.
    let gamma = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|vi| *vi /= gamma);
    let beta = (b_r - b_s * mu) / gamma;

    Ok(PairGeometry {
        r,
        s,
        mu,
        gamma,
        v,
        beta,
        flipped,
    })
}

/// Projects onto `<a_s, x> = b_s`, then onto `<v, x> = beta`.
///
/// Since `a_s` and `v` are orthonormal, the result is the orthogonal
/// projection of `x` onto the intersection of the hyperplanes of rows `r`
/// and `s`.
pub fn two_subspace_step(x: &mut [f64], sys: &StandardizedSystem, g: &PairGeometry) {
    let a_s = sys.row(g.s);
    let t = sys.rhs()[g.s] - dot(a_s, x);
    for (xi, ai) in x.iter_mut().zip(a_s) {
        *xi += t * ai;
    }
    let t = g.beta - dot(&g.v, x);
    for (xi, vi) in x.iter_mut().zip(&g.v) {
        *xi += t * vi;
    }
}

/// Translation parameter of the two-step form that minimizes the next error.
///
/// In terms of the residuals `rho_i = b_i - <a_i, x>` it reads
/// `(rho_r - mu rho_s) / (rho_r (1 - mu^2))`, so the true solution enters
/// only through observable quantities. Returns 0 when `rho_r == 0`; the
/// intermediate step is then a no-op whatever the value.
pub fn epsilon_opt(x: &[f64], sys: &StandardizedSystem, r: usize, s: usize) -> Result<f64> {
    let g = pair_geometry(sys, r, s, false)?;
    let rho_r = sys.rhs()[r] - dot(sys.row(r), x);
    if rho_r == 0.0 {
        return Ok(0.0);
    }
    let rho_s = sys.rhs()[s] - dot(sys.row(s), x);
    Ok((rho_r - g.mu * rho_s) / (rho_r * g.gamma * g.gamma))
}

/// `y = x + eps (b_r - <a_r, x>) a_r`, then project `y` onto row `s`.
pub fn two_step_with_epsilon(
    x: &[f64],
    sys: &StandardizedSystem,
    r: usize,
    s: usize,
    eps: f64,
) -> Result<Vec<f64>> {
    let m = sys.rows();
    check_index(r, m)?;
    check_index(s, m)?;
    if r == s {
        return Err(Error::DegeneratePair { r, s, mu: 1.0 });
    }
    let a_r = sys.row(r);
    let t = eps * (sys.rhs()[r] - dot(a_r, x));
    let mut y: Vec<f64> = x.iter().zip(a_r).map(|(xi, ai)| xi + t * ai).collect();
    rk_step(&mut y, sys, s)?;
    Ok(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Cyclic,
    Randomized,
    TwoSubspace,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Cyclic, Method::Randomized, Method::TwoSubspace];

    pub fn name(self) -> &'static str {
        match self {
            Method::Cyclic => "cyclic",
            Method::Randomized => "rk",
            Method::TwoSubspace => "two-subspace",
        }
    }

    /// Rows consumed by one iteration.
    pub fn row_touches_per_iteration(self) -> usize {
        match self {
            Method::Cyclic | Method::Randomized => 1,
            Method::TwoSubspace => 2,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cyclic" => Ok(Method::Cyclic),
            "rk" => Ok(Method::Randomized),
            "two-subspace" | "two_subspace" | "2srk" => Ok(Method::TwoSubspace),
            other => Err(Error::InvalidConfig(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRule {
    pub max_iterations: usize,
    pub residual_threshold: Option<f64>,
}

impl StoppingRule {
    pub fn budget(max_iterations: usize) -> Self {
        Self {
            max_iterations,
            residual_threshold: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("iteration budget must be >= 1".into()));
        }
        if let Some(t) = self.residual_threshold {
            if !(t >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "residual threshold must be >= 0, got {t}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub method: Method,
    pub stop: StoppingRule,
    pub seed: u64,
    pub sign_adjust: bool,
    /// Starting iterate; the zero vector when absent.
    pub x0: Option<Vec<f64>>,
    /// Known solution, used only to record the error per iteration.
    pub x_true: Option<Vec<f64>>,
}

impl SolveOptions {
    pub fn new(method: Method, max_iterations: usize, seed: u64) -> Self {
        Self {
            method,
            stop: StoppingRule::budget(max_iterations),
            seed,
            sign_adjust: false,
            x0: None,
            x_true: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub row_touches: usize,
    /// `||x_true - x_k||_2`, when the solution is known.
    pub error: Option<f64>,
    /// `||A x_k - b||_2`.
    pub residual: f64,
}

/// Per-iteration history of one solve. Holds `iterations + 1` records.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrace {
    pub method: Method,
    pub seed: u64,
    pub sign_adjust: bool,
    pub row_touches_per_iteration: usize,
    pub records: Vec<TraceRecord>,
    pub solution: Vec<f64>,
    /// Set when the residual threshold ended the run.
    pub threshold_reached: bool,
}

impl SolveTrace {
    pub fn iterations(&self) -> usize {
        self.records.len() - 1
    }

    pub fn final_record(&self) -> &TraceRecord {
        self.records
            .last()
            .expect("trace always holds the initial record")
    }

    pub fn errors(&self) -> Option<Vec<f64>> {
        self.records.iter().map(|r| r.error).collect()
    }
}

fn any_usable_pair(sys: &StandardizedSystem) -> bool {
    let m = sys.rows();
    (0..m).any(|r| ((r + 1)..m).any(|s| dot(sys.row(r), sys.row(s)).abs() < 1.0 - tol::PARALLEL))
}

pub fn solve(sys: &StandardizedSystem, opts: &SolveOptions) -> Result<SolveTrace> {
    opts.stop.validate()?;
    let n = sys.cols();
    let m = sys.rows();
    let x0 = match &opts.x0 {
        Some(x0) if x0.len() != n => {
            return Err(Error::DimensionMismatch(format!(
                "initial iterate has length {}, expected {n}",
                x0.len()
            )))
        }
        Some(x0) => x0.clone(),
        None => vec![0.0; n],
    };
    if let Some(xt) = &opts.x_true {
        if xt.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "true solution has length {}, expected {n}",
                xt.len()
            )));
        }
    }
    if opts.method == Method::TwoSubspace && m < 2 {
        return Err(Error::TooFewRows { needed: 2, got: m });
    }

    let factor = opts.method.row_touches_per_iteration();
    let record = |k: usize, x: &[f64]| TraceRecord {
        k,
        row_touches: k * factor,
        error: opts.x_true.as_ref().map(|xt| {
            xt.iter()
                .zip(x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        }),
        residual: sys.residual_norm(x),
    };
    let reached = |rec: &TraceRecord| {
        opts.stop
            .residual_threshold
            .is_some_and(|t| rec.residual <= t)
    };

    let mut state = SolverState::new(x0, opts.seed);
    let mut records = Vec::with_capacity(opts.stop.max_iterations + 1);
    records.push(record(0, state.x()));
    let mut stopped_early = reached(&records[0]);
    let mut scanned = false;

    while !stopped_early && state.k() < opts.stop.max_iterations {
        match opts.method {
            Method::Cyclic => {
                let r = state.k() % m;
                state.rk_step(sys, r)?;
            }
            Method::Randomized => {
                let r = state.sample_row(m);
                state.rk_step(sys, r)?;
            }
            Method::TwoSubspace => {
                let mut misses = 0;
                let g = loop {
                    let (r, s) = state.sample_pair(m)?;
                    match pair_geometry(sys, r, s, opts.sign_adjust) {
                        Ok(g) => break g,
                        Err(Error::DegeneratePair { .. }) => {
                            misses += 1;
                            if misses >= DEGENERATE_DRAWS_BEFORE_SCAN && !scanned {
                                if !any_usable_pair(sys) {
                                    return Err(Error::NoUsablePair);
                                }
                                scanned = true;
                            }
                        }
                        Err(e) => return Err(e),
                    }
                };
                state.two_subspace_step(sys, &g);
            }
        }
        let rec = record(state.k(), state.x());
        stopped_early = reached(&rec);
        records.push(rec);
    }

    Ok(SolveTrace {
        method: opts.method,
        seed: opts.seed,
        sign_adjust: opts.sign_adjust,
        row_touches_per_iteration: factor,
        records,
        solution: state.into_x(),
        threshold_reached: stopped_early,
    })
}
