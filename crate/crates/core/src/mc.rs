//! Seeded Monte Carlo checks: type-I error (super-uniformity), power, and
//! family-wise error of the procedures in [`crate::fwer`].
//!
//! # Reproducibility
//!
//! Replication `i` of a run with seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`. Every replication
//! owns its generator, so results do not depend on how replications are split
//! across threads. Beta losses are sampled with `rand_distr::Beta` (Cheng's
//! algorithms), pinned to rand_distr 0.5.1; Bernoulli and discrete losses use
//! one `f64` uniform per draw.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{bentkus_pvalue, hoeffding_tight_pvalue};
use crate::error::{Error, Result};
use crate::fwer::{FwerPlan, Procedure};
use crate::prw::{prw_pvalue, TestSpec};

const PROB_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PValueMethod {
    Prw,
    Bentkus,
    HoeffdingTight,
}

impl PValueMethod {
    pub const ALL: [PValueMethod; 3] = [
        PValueMethod::Prw,
        PValueMethod::HoeffdingTight,
        PValueMethod::Bentkus,
    ];

    pub fn pvalue(self, rhat: f64, spec: &TestSpec) -> Result<f64> {
        match self {
            PValueMethod::Prw => prw_pvalue(rhat, spec),
            PValueMethod::Bentkus => bentkus_pvalue(rhat, spec),
            PValueMethod::HoeffdingTight => hoeffding_tight_pvalue(rhat, spec),
        }
    }
}

impl fmt::Display for PValueMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PValueMethod::Prw => "prw",
            PValueMethod::Bentkus => "bentkus",
            PValueMethod::HoeffdingTight => "hoeffding-tight",
        })
    }
}

impl FromStr for PValueMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prw" => Ok(PValueMethod::Prw),
            "bentkus" => Ok(PValueMethod::Bentkus),
            "hoeffding-tight" | "hoeffding" => Ok(PValueMethod::HoeffdingTight),
            other => Err(Error::InvalidParameter(format!(
                "unknown p-value method '{other}'"
            ))),
        }
    }
}

/// Law of a single loss, supported in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LossDistribution {
    Bernoulli { p: f64 },
    Beta { a: f64, b: f64 },
    Discrete { support: Vec<f64>, probs: Vec<f64> },
}

impl LossDistribution {
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "bernoulli p = {p} outside [0, 1]"
            )));
        }
        Ok(LossDistribution::Bernoulli { p })
    }

    pub fn beta(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "beta shapes ({a}, {b}) must be positive"
            )));
        }
        Ok(LossDistribution::Beta { a, b })
    }

    pub fn discrete(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(Error::InvalidParameter(format!(
                "discrete law needs matching non-empty support and probabilities ({} vs {})",
                support.len(),
                probs.len()
            )));
        }
        if let Some(x) = support.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::InvalidParameter(format!(
                "support point {x} outside [0, 1]"
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "probability {p} is negative"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(LossDistribution::Discrete { support, probs })
    }

    pub fn mean(&self) -> f64 {
        match self {
            LossDistribution::Bernoulli { p } => *p,
            LossDistribution::Beta { a, b } => a / (a + b),
            LossDistribution::Discrete { support, probs } => {
                support.iter().zip(probs).map(|(x, p)| x * p).sum()
            }
        }
    }

    fn sampler(&self) -> Sampler {
        match self {
            LossDistribution::Bernoulli { p } => Sampler::Bernoulli(*p),
            LossDistribution::Beta { a, b } => {
                Sampler::Beta(Beta::new(*a, *b).expect("validated beta shapes"))
            }
            LossDistribution::Discrete { support, probs } => {
                let mut acc = 0.0;
                let cumulative = probs
                    .iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect();
                Sampler::Discrete {
                    support: support.clone(),
                    cumulative,
                }
            }
        }
    }
}

impl fmt::Display for LossDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join(xs: &[f64]) -> String {
            xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
        }
        match self {
            LossDistribution::Bernoulli { p } => write!(f, "bernoulli:{p}"),
            LossDistribution::Beta { a, b } => write!(f, "beta:{a}:{b}"),
            LossDistribution::Discrete { support, probs } => {
                write!(f, "discrete:{}:{}", join(support), join(probs))
            }
        }
    }
}

/// Parses `bernoulli:P`, `beta:A:B` or `discrete:X1,X2,..:P1,P2,..`.
impl FromStr for LossDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse distribution '{s}'"));
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad());
        let list = |x: &str| x.split(',').map(num).collect::<Result<Vec<_>>>();
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["bernoulli", p] => LossDistribution::bernoulli(num(p)?),
            ["beta", a, b] => LossDistribution::beta(num(a)?, num(b)?),
            ["discrete", xs, ps] => LossDistribution::discrete(list(xs)?, list(ps)?),
            _ => Err(bad()),
        }
    }
}

enum Sampler {
    Bernoulli(f64),
    Beta(Beta<f64>),
    Discrete {
        support: Vec<f64>,
        cumulative: Vec<f64>,
    },
}

impl Sampler {
    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Bernoulli(p) => {
                if rng.random::<f64>() < *p {
                    1.0
                } else {
                    0.0
                }
            }
            Sampler::Beta(beta) => beta.sample(rng),
            Sampler::Discrete {
                support,
                cumulative,
            } => {
                let u = rng.random::<f64>();
                let i = cumulative
                    .partition_point(|c| *c <= u)
                    .min(support.len() - 1);
                support[i]
            }
        }
    }

    fn rhat<R: Rng>(&self, n: u64, rng: &mut R) -> f64 {
        let sum: f64 = (0..n).map(|_| self.draw(rng)).sum();
        (sum / n as f64).clamp(0.0, 1.0)
    }
}

fn rep_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

fn replicate<T, F>(reps: u64, seed: u64, per_rep: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    (0..reps)
        .into_par_iter()
        .map(|i| per_rep(&mut rep_rng(seed, i)))
        .collect()
}

/// Empirical risks of `reps` independent samples of size `n`.
pub fn sample_rhats(dist: &LossDistribution, n: u64, reps: u64, seed: u64) -> Vec<f64> {
    let sampler = dist.sampler();
    replicate(reps, seed, |rng| sampler.rhat(n, rng))
}

/// `P(p <= delta)` estimates over a grid of levels, with binomial plug-in
/// standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub method: PValueMethod,
    pub distribution: String,
    pub n: u64,
    pub alpha: f64,
    pub delta_grid: Vec<f64>,
    pub exceedance: Vec<f64>,
    pub stderr: Vec<f64>,
    pub reps: u64,
    pub seed: u64,
}

impl McReport {
    /// Grid levels whose exceedance is above `delta + 3 stderr`.
    pub fn violations(&self) -> Vec<f64> {
        self.delta_grid
            .iter()
            .zip(&self.exceedance)
            .zip(&self.stderr)
            .filter(|((d, e), s)| **e > **d + 3.0 * **s)
            .map(|((d, _), _)| *d)
            .collect()
    }

    pub fn passes(&self) -> bool {
        self.violations().is_empty()
    }
}

fn plug_in_stderr(rate: f64, reps: u64) -> f64 {
    (rate * (1.0 - rate) / reps as f64).sqrt()
}

fn check_reps(reps: u64) -> Result<()> {
    if reps == 0 {
        return Err(Error::InvalidParameter("reps must be >= 1".into()));
    }
    Ok(())
}

fn check_level(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta = {delta} outside (0, 1)"
        )));
    }
    Ok(())
}

fn require_null(dist: &LossDistribution, spec: &TestSpec) -> Result<()> {
    if dist.mean() <= spec.alpha() {
        return Err(Error::HypothesisMismatch(format!(
            "mean {} <= alpha {}: H0 (R > alpha) is false, so this would measure power, not validity",
            dist.mean(),
            spec.alpha()
        )));
    }
    Ok(())
}

/// Estimates `P(p <= delta)` under a distribution satisfying `H0: R > alpha`.
pub fn simulate_superuniformity(
    dist: &LossDistribution,
    spec: &TestSpec,
    method: PValueMethod,
    delta_grid: &[f64],
    reps: u64,
    seed: u64,
) -> Result<McReport> {
    require_null(dist, spec)?;
    check_reps(reps)?;
    for &d in delta_grid {
        check_level(d)?;
    }
    let pvalues = sample_rhats(dist, spec.n(), reps, seed)
        .into_par_iter()
        .map(|rhat| method.pvalue(rhat, spec))
        .collect::<Result<Vec<_>>>()?;
    let exceedance: Vec<f64> = delta_grid
        .iter()
        .map(|&d| pvalues.iter().filter(|&&p| p <= d).count() as f64 / reps as f64)
        .collect();
    let stderr = exceedance
        .iter()
        .map(|&e| plug_in_stderr(e, reps))
        .collect();
    Ok(McReport {
        method,
        distribution: dist.to_string(),
        n: spec.n(),
        alpha: spec.alpha(),
        delta_grid: delta_grid.to_vec(),
        exceedance,
        stderr,
        reps,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRate {
    pub method: PValueMethod,
    pub rate: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerReport {
    pub distribution: String,
    pub n: u64,
    pub alpha: f64,
    pub delta: f64,
    pub reps: u64,
    pub seed: u64,
    pub rates: Vec<MethodRate>,
}

impl PowerReport {
    pub fn rate(&self, method: PValueMethod) -> Option<f64> {
        self.rates
            .iter()
            .find(|r| r.method == method)
            .map(|r| r.rate)
    }
}

/// Rejection rate at level `delta` of each method under `H1: R <= alpha`. All
/// methods see the same simulated samples.
pub fn simulate_power(
    dist: &LossDistribution,
    spec: &TestSpec,
    methods: &[PValueMethod],
    delta: f64,
    reps: u64,
    seed: u64,
) -> Result<PowerReport> {
    if dist.mean() >= spec.alpha() {
        return Err(Error::HypothesisMismatch(format!(
            "mean {} >= alpha {}: H1 is false, power is undefined",
            dist.mean(),
            spec.alpha()
        )));
    }
    check_reps(reps)?;
    check_level(delta)?;
    let rhats = sample_rhats(dist, spec.n(), reps, seed);
    let rates = methods
        .iter()
        .map(|&method| {
            let mut hits = 0u64;
            for &rhat in &rhats {
                if method.pvalue(rhat, spec)? <= delta {
                    hits += 1;
                }
            }
            let rate = hits as f64 / reps as f64;
            Ok(MethodRate {
                method,
                rate,
                stderr: plug_in_stderr(rate, reps),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PowerReport {
        distribution: dist.to_string(),
        n: spec.n(),
        alpha: spec.alpha(),
        delta,
        reps,
        seed,
        rates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FwerMcReport {
    pub procedure: Procedure,
    pub method: PValueMethod,
    pub family_size: usize,
    pub delta: f64,
    pub fwer: f64,
    pub stderr: f64,
    pub reps: u64,
    pub seed: u64,
}

impl FwerMcReport {
    pub fn passes(&self) -> bool {
        self.fwer <= self.delta + 3.0 * self.stderr
    }
}

/// Frequency of at least one rejection when every hypothesis in a family of
/// `family_size` is a true null, each with its own independent sample from
/// `dist`. `weights` is only used by the fallback procedure.
#[allow(clippy::too_many_arguments)]
pub fn simulate_fwer(
    dist: &LossDistribution,
    spec: &TestSpec,
    method: PValueMethod,
    procedure: Procedure,
    family_size: usize,
    weights: Option<Vec<f64>>,
    delta: f64,
    reps: u64,
    seed: u64,
) -> Result<FwerMcReport> {
    require_null(dist, spec)?;
    check_reps(reps)?;
    if family_size == 0 {
        return Err(Error::EmptyFamily);
    }
    // validate the plan shape once up front
    FwerPlan::new(vec![1.0; family_size], weights.clone(), delta)?;
    let sampler = dist.sampler();
    let outcomes = replicate(reps, seed, |rng| -> Result<bool> {
        let pvalues = (0..family_size)
            .map(|_| method.pvalue(sampler.rhat(spec.n(), rng), spec))
            .collect::<Result<Vec<_>>>()?;
        let plan = FwerPlan::new(pvalues, weights.clone(), delta)?;
        Ok(plan.run(procedure)?.rejections() > 0)
    });
    let mut hits = 0u64;
    for o in outcomes {
        if o? {
            hits += 1;
        }
    }
    let fwer = hits as f64 / reps as f64;
    Ok(FwerMcReport {
        procedure,
        method,
        family_size,
        delta,
        fwer,
        stderr: plug_in_stderr(fwer, reps),
        reps,
        seed,
    })
}
