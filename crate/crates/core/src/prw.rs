//! The PRW bound on the lower tail of the empirical risk and the p-value built
//! from it.
//!
//! For i.i.d. losses in `[0, 1]` with mean `R`, and any integer `k` in
//! `[0, nR)`,
//!
//! ```text
//! P(sum L_i <= k) <= R (n - k) / (nR - k) * P(Bin(n, R) <= k).
//! ```
//!
//! Evaluating the right-hand side at `k = ceil(n t)` gives the step function
//! `g(t; R)` on `[0, (gamma(R) - 1) / n]`, where `gamma(R)` is the smallest
//! integer `>= nR`. At the right endpoint `g` is lifted to at least 1, which is
//! what makes `g(min(rhat, (gamma(alpha) - 1) / n); alpha)` super-uniform under
//! `H0: R > alpha`.

use serde::{Deserialize, Serialize};

use crate::binomial::BinomialParams;
use crate::error::{Error, Result};

/// Relative tolerance under which `n t` is treated as the nearest integer.
pub const SNAP_TOLERANCE: f64 = 1e-9;

/// Context of the one-sided test `H0: R > alpha` on `n` losses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestSpec {
    n: u64,
    alpha: f64,
}

impl TestSpec {
    pub fn new(n: u64, alpha: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("sample size n must be >= 1".into()));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha = {alpha} outside (0, 1)"
            )));
        }
        Ok(Self { n, alpha })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The bound context at `R = alpha`, which defines the p-value.
    pub fn context(&self) -> GBoundContext {
        GBoundContext::new(self.n, self.alpha).expect("validated TestSpec")
    }
}

fn snap_to_integer(x: f64) -> Option<f64> {
    let r = x.round();
    ((x - r).abs() <= SNAP_TOLERANCE * x.abs().max(1.0)).then_some(r)
}

/// `ceil(n t)`, except that values of `n t` within [`SNAP_TOLERANCE`] of an
/// integer map to that integer, so `j / n` computed in floating point lands on
/// step `j`.
pub fn ceil_scaled(n: u64, t: f64) -> i64 {
    let nt = n as f64 * t;
    match snap_to_integer(nt) {
        Some(r) => r as i64,
        None => nt.ceil() as i64,
    }
}

/// Smallest integer `r >= nR`. Always in `[1, n]`.
pub fn gamma_r(n: u64, r: f64) -> Result<u64> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size n must be >= 1".into()));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::OutOfDomain(format!("R = {r} outside (0, 1)")));
    }
    Ok(ceil_scaled(n, r).clamp(1, n as i64) as u64)
}

/// Upper-tail inequality: `P(sum X_i >= t) <= (t - tp) / (t - np) * P(Bin(n, p) >= t)`
/// for `np < t <= n`. The result may exceed 1.
pub fn upper_tail_bound(n: u64, p: f64, t: i64) -> Result<f64> {
    let bin = BinomialParams::new(n, p)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutOfDomain(format!("p = {p} outside (0, 1)")));
    }
    let (nf, tf) = (n as f64, t as f64);
    if t > n as i64 || tf <= nf * p {
        return Err(Error::OutOfDomain(format!(
            "t = {t} outside (np, n] = ({}, {n}]",
            nf * p
        )));
    }
    Ok(tf * (1.0 - p) / (tf - nf * p) * bin.sf(t))
}

/// Lower-tail inequality: `P(sum L_i <= k) <= R (n - k) / (nR - k) * P(Bin(n, R) <= k)`
/// for integers `0 <= k < nR`.
pub fn lower_tail_bound(n: u64, r: f64, k: i64) -> Result<f64> {
    let bin = BinomialParams::new(n, r)?;
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::OutOfDomain(format!("R = {r} outside (0, 1)")));
    }
    if k < 0 || k as f64 >= n as f64 * r {
        return Err(Error::OutOfDomain(format!(
            "k = {k} outside [0, nR) = [0, {})",
            n as f64 * r
        )));
    }
    Ok(lower_tail_unchecked(&bin, k))
}

fn lower_tail_unchecked(bin: &BinomialParams, k: i64) -> f64 {
    let (nf, r, kf) = (bin.n() as f64, bin.p(), k as f64);
    r * (nf - kf) / (nf * r - kf) * bin.cdf(k)
}

/// `g(.; R)` for fixed `(n, R)`, with `gamma(R)` and the domain edge precomputed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GBoundContext {
    n: u64,
    r: f64,
    gamma: u64,
    t_max: f64,
    #[serde(skip)]
    bin: BinomialParams,
}

impl GBoundContext {
    pub fn new(n: u64, r: f64) -> Result<Self> {
        let gamma = gamma_r(n, r)?;
        Ok(Self {
            n,
            r,
            gamma,
            t_max: (gamma - 1) as f64 / n as f64,
            bin: BinomialParams::new(n, r)?,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn gamma(&self) -> u64 {
        self.gamma
    }

    /// `(gamma(R) - 1) / n`, the right edge of the domain of `g`.
    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// Value of the lower-tail bound on step `k`, for `0 <= k <= gamma - 1`.
    /// Unlike [`g`](Self::g), the top step is not lifted to 1.
    pub fn step_bound(&self, k: u64) -> f64 {
        debug_assert!(k < self.gamma);
        lower_tail_unchecked(&self.bin, k as i64)
    }

    /// Whether `t` lies right of the domain edge, i.e. would be capped.
    pub fn is_capped(&self, t: f64) -> bool {
        ceil_scaled(self.n, t) > (self.gamma - 1) as i64
    }

    /// `g(t; R)` for `0 <= t <= t_max`.
    ///
    /// Below the edge this is the lower-tail bound at `k = ceil_scaled(n, t)`;
    /// at the edge (up to the snap tolerance) it is `max(1, bound at gamma - 1)`.
    pub fn g(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::OutOfDomain(format!("t = {t} is negative")));
        }
        let top = self.gamma - 1;
        if snap_to_integer(self.n as f64 * t) == Some(top as f64) {
            return Ok(self.step_bound(top).max(1.0));
        }
        let k = ceil_scaled(self.n, t);
        if k > top as i64 {
            return Err(Error::OutOfDomain(format!(
                "t = {t} beyond (gamma(R) - 1) / n = {}",
                self.t_max
            )));
        }
        Ok(self.step_bound(k as u64))
    }

    /// Largest grid point `t = k / n` of the domain with `g(t) <= delta`.
    ///
    /// Admits `(1 - R)^n <= delta < 1`. The edge value is always `>= 1`, so the
    /// result is at most `(gamma - 2) / n`, and `g` at the next grid point
    /// exceeds `delta`.
    pub fn g_inverse(&self, delta: f64) -> Result<f64> {
        if !(delta < 1.0) {
            return Err(Error::OutOfDomain(format!("delta = {delta} must be < 1")));
        }
        let floor = self.g(0.0)?;
        if !(delta >= floor) {
            return Err(Error::OutOfDomain(format!(
                "delta = {delta} below the minimum of g, {floor}"
            )));
        }
        let mut best = 0;
        for k in 1..self.gamma - 1 {
            if self.step_bound(k) > delta {
                break;
            }
            best = k;
        }
        Ok(best as f64 / self.n as f64)
    }
}

/// PRW p-value `min(1, g(min(rhat, (gamma(alpha) - 1) / n); alpha))`.
pub fn prw_pvalue(rhat: f64, spec: &TestSpec) -> Result<f64> {
    Ok(prw_pvalue_unclamped(rhat, spec)?.min(1.0))
}

/// As [`prw_pvalue`] but without the final clamp, so the capped region reports
/// the raw edge value `max(1, bound)`.
pub fn prw_pvalue_unclamped(rhat: f64, spec: &TestSpec) -> Result<f64> {
    check_rhat(rhat)?;
    let ctx = spec.context();
    ctx.g(rhat.min(ctx.t_max()))
}

pub(crate) fn check_rhat(rhat: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rhat) {
        return Err(Error::OutOfDomain(format!("rhat = {rhat} outside [0, 1]")));
    }
    Ok(())
}
