//! Closed-form convergence bounds for randomized and two-subspace Kaczmarz.
//!
//! Naming: `r` is the scaled condition number `||A||_F^2 / sigma_min(A)^2`,
//! `q` the same quantity for the row-difference matrix, `d` and `e` the
//! coherence gains, `eta` the squared per-iteration contraction factor.

use crate::error::{Error, Result};
use crate::matrix::{coherence, condition_stats, dot, omega_condition_stats, StandardizedSystem};
use crate::tol;

/// A bound value together with a flag telling whether its contraction factor
/// came out negative (the bound is then vacuous and reported as 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub value: f64,
    pub negative_factor: bool,
}

fn check_r(r: f64) -> Result<()> {
    if !(r >= 1.0) {
        return Err(Error::InvalidR(r));
    }
    Ok(())
}

/// `(1 - 1/R)^k * err0_sq`: expected squared error after `k` randomized
/// Kaczmarz iterations.
pub fn rk_bound(r: f64, k: u32, err0_sq: f64) -> Result<f64> {
    check_r(r)?;
    Ok((1.0 - 1.0 / r).powi(k as i32) * err0_sq)
}

/// `(1 - 1/R)^(k/2) * err0 + sqrt(R) * ||w||_inf` for noisy randomized
/// Kaczmarz.
pub fn rk_noise_bound(r: f64, k: u32, err0: f64, w_inf: f64) -> Result<f64> {
    check_r(r)?;
    Ok((1.0 - 1.0 / r).powf(k as f64 / 2.0) * err0 + r.sqrt() * w_inf)
}

fn d_term(t: f64) -> f64 {
    t * t * (1.0 - t) / (1.0 + t)
}

/// Coherence gain `D = min{ f(delta), f(Delta) }` with
/// `f(t) = t^2 (1 - t) / (1 + t)`.
pub fn d_factor(delta: f64, big_delta: f64) -> Result<f64> {
    if !(0.0 <= delta && delta <= big_delta && big_delta <= 1.0) {
        return Err(Error::InvalidCoherence { delta, big_delta });
    }
    Ok(d_term(delta).min(d_term(big_delta)))
}

/// Per-pair gain `(|mu| - mu^2) / sqrt(1 - mu^2)`.
pub fn c_rs(mu: f64) -> Result<f64> {
    if !(mu.abs() < 1.0) {
        return Err(Error::DegenerateMu(mu));
    }
    let a = mu.abs();
    Ok((a - a * a) / (1.0 - a * a).sqrt())
}

/// Per-pair coefficients of the refined bound:
/// `C = mu^2 (1 - mu) / (1 + mu)` and `E = 4 mu^3`.
///
/// `E` is negative for negatively correlated rows, which is why the
/// sign-adjusted variant of the solver exists.
pub fn c_rs_improved(mu: f64) -> Result<(f64, f64)> {
    if !(mu > -1.0) {
        return Err(Error::DegenerateMu(mu));
    }
    Ok((d_term(mu), e_ij(mu)))
}

pub fn e_ij(mu: f64) -> f64 {
    4.0 * mu * mu * mu
}

/// Exact single-iteration right-hand side
/// `(1 - 1/R)^2 ||e||^2 - 1/(m^2 - m) sum_{r<s} C_rs^2 (<e,a_r>^2 + <e,a_s>^2)`
/// with `e = x_true - x_prev`. Parallel pairs contribute `C_rs = 0`.
pub fn lemma_main_rhs(sys: &StandardizedSystem, x_true: &[f64], x_prev: &[f64]) -> Result<f64> {
    let r = condition_stats(sys.matrix())?.scaled_condition;
    Ok(lemma_main_rhs_with_r(sys, r, x_true, x_prev))
}

/// [`lemma_main_rhs`] with a precomputed `R`.
pub fn lemma_main_rhs_with_r(
    sys: &StandardizedSystem,
    r: f64,
    x_true: &[f64],
    x_prev: &[f64],
) -> f64 {
    let m = sys.rows();
    let e: Vec<f64> = x_true.iter().zip(x_prev).map(|(a, b)| a - b).collect();
    let proj: Vec<f64> = (0..m).map(|i| dot(sys.row(i), &e)).collect();
    let mut gain = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            let mu = dot(sys.row(i), sys.row(j));
            let c = c_rs(mu).unwrap_or(0.0);
            gain += c * c * (proj[i] * proj[i] + proj[j] * proj[j]);
        }
    }
    let pairs = (m * m - m) as f64;
    (1.0 - 1.0 / r).powi(2) * dot(&e, &e) - gain / pairs
}

/// Per-iteration contraction `(1 - 1/R)^2 - D/R`.
pub fn eta(r: f64, d: f64) -> f64 {
    (1.0 - 1.0 / r).powi(2) - d / r
}

fn power_bound(factor: f64, k: u32, err0_sq: f64) -> Bound {
    if factor < 0.0 {
        return Bound {
            value: 0.0,
            negative_factor: true,
        };
    }
    Bound {
        value: factor.powi(k as i32) * err0_sq,
        negative_factor: false,
    }
}

/// `((1 - 1/R)^2 - D/R)^k * err0_sq`.
pub fn two_srk_bound(r: f64, d: f64, k: u32, err0_sq: f64) -> Result<Bound> {
    check_r(r)?;
    Ok(power_bound(eta(r, d), k, err0_sq))
}

/// `((1 - 1/R)^2 - D/R - E/Q)^k * err0_sq`.
pub fn improved_bound(r: f64, d: f64, q: f64, e: f64, k: u32, err0_sq: f64) -> Result<Bound> {
    check_r(r)?;
    Ok(power_bound(eta(r, d) - e / q, k, err0_sq))
}

/// Noise floor `3 ||w||_inf / ((1 - sqrt(eta)) sqrt(1 - Delta^2))`.
pub fn noise_threshold(eta: f64, big_delta: f64, w_inf: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::InvalidEta(eta));
    }
    if !(big_delta < 1.0 - tol::DELTA_ONE) {
        return Err(Error::DegenerateDelta(big_delta));
    }
    Ok(3.0 * w_inf / ((1.0 - eta.sqrt()) * (1.0 - big_delta * big_delta).sqrt()))
}

/// `eta^(k/2) * err0 + noise_threshold(eta, Delta, w_inf)`.
pub fn two_srk_noise_bound(eta: f64, big_delta: f64, w_inf: f64, k: u32, err0: f64) -> Result<f64> {
    let floor = noise_threshold(eta, big_delta, w_inf)?;
    Ok(eta.powf(k as f64 / 2.0) * err0 + floor)
}

/// One grid point of the coherence gain surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DPoint {
    pub delta: f64,
    pub big_delta: f64,
    pub d: f64,
}

/// `D` over the grid `0, step, 2 step, ..., 1` restricted to `delta <= Delta`.
/// The value 1 is always on the grid.
pub fn d_surface(step: f64) -> Result<Vec<DPoint>> {
    if !(step > 0.0 && step <= 0.1) {
        return Err(Error::InvalidConfig(format!(
            "grid step must lie in (0, 0.1], got {step}"
        )));
    }
    let mut grid: Vec<f64> = (0..)
        .map(|i| i as f64 * step)
        .take_while(|v| *v <= 1.0 + 1e-12)
        .map(|v| v.min(1.0))
        .collect();
    if *grid.last().unwrap() < 1.0 - 1e-12 {
        grid.push(1.0);
    } else {
        *grid.last_mut().unwrap() = 1.0;
    }
    let mut out = Vec::with_capacity(grid.len() * (grid.len() + 1) / 2);
    for (i, &delta) in grid.iter().enumerate() {
        for &big_delta in &grid[i..] {
            out.push(DPoint {
                delta,
                big_delta,
                d: d_factor(delta, big_delta)?,
            });
        }
    }
    Ok(out)
}

/// Noise magnitude entering the noisy bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub w_inf: f64,
    pub big_delta: f64,
}

impl NoiseModel {
    pub fn threshold(&self, eta: f64) -> Result<f64> {
        noise_threshold(eta, self.big_delta, self.w_inf)
    }
}

/// Every constant the bounds consume, measured on one system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFactors {
    pub delta: f64,
    pub big_delta: f64,
    pub r: f64,
    pub d: f64,
    pub e: f64,
    pub q: f64,
    pub eta: f64,
    pub eta_improved: f64,
}

impl RateFactors {
    /// Measures `delta, Delta, R, D, E = 4 delta^3, Q` and the derived
    /// contraction factors. `Q` streams the difference matrix, costing
    /// `O(m^2 n^2)`.
    ///
    /// The difference matrix has rank at most `m - 1`, so it can be rank
    /// deficient while `A` is not (always when `m == n`). `q` and
    /// `eta_improved` are NaN in that case.
    pub fn measure(sys: &StandardizedSystem) -> Result<Self> {
        let coh = coherence(sys)?;
        let r = condition_stats(sys.matrix())?.scaled_condition;
        let q = match omega_condition_stats(sys) {
            Ok(stats) => stats.scaled_condition,
            Err(Error::RankDeficient { .. }) => f64::NAN,
            Err(e) => return Err(e),
        };
        Ok(Self::from_parts(coh.delta, coh.big_delta, r, q))
    }

    /// Like [`RateFactors::measure`] but skips the difference matrix; `q`
    /// is NaN and `eta_improved` equals `eta`.
    pub fn measure_basic(sys: &StandardizedSystem) -> Result<Self> {
        let coh = coherence(sys)?;
        let r = condition_stats(sys.matrix())?.scaled_condition;
        let mut f = Self::from_parts(coh.delta, coh.big_delta, r, f64::INFINITY);
        f.q = f64::NAN;
        Ok(f)
    }

    pub fn has_q(&self) -> bool {
        self.q.is_finite()
    }

    pub fn from_parts(delta: f64, big_delta: f64, r: f64, q: f64) -> Self {
        let d = d_factor(delta, big_delta).unwrap_or(0.0);
        let e = 4.0 * delta.powi(3);
        let eta = eta(r, d);
        Self {
            delta,
            big_delta,
            r,
            d,
            e,
            q,
            eta,
            eta_improved: eta - e / q,
        }
    }

    /// Squared-error contraction per row touch for randomized Kaczmarz.
    pub fn rk_rate_per_row(&self) -> f64 {
        1.0 - 1.0 / self.r
    }

    /// Squared-error contraction per row touch for two-subspace Kaczmarz
    /// (one iteration touches two rows).
    pub fn two_srk_rate_per_row(&self) -> f64 {
        self.eta.max(0.0).sqrt()
    }
}
