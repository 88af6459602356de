//! Family-wise error rate procedures over an a-priori ordered family of valid
//! p-values.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Procedure {
    FixedSequence,
    Fallback,
    Bonferroni,
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Procedure::FixedSequence => "fixed-sequence",
            Procedure::Fallback => "fallback",
            Procedure::Bonferroni => "bonferroni",
        })
    }
}

impl FromStr for Procedure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed-sequence" => Ok(Procedure::FixedSequence),
            "fallback" => Ok(Procedure::Fallback),
            "bonferroni" => Ok(Procedure::Bonferroni),
            other => Err(Error::InvalidParameter(format!(
                "unknown procedure '{other}'"
            ))),
        }
    }
}

/// Ordered p-values, optional fallback weights and the global level `delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FwerPlan {
    pvalues: Vec<f64>,
    weights: Option<Vec<f64>>,
    delta: f64,
}

impl FwerPlan {
    pub fn new(pvalues: Vec<f64>, weights: Option<Vec<f64>>, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta = {delta} outside (0, 1)"
            )));
        }
        if let Some(i) = pvalues.iter().position(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidParameter(format!(
                "p-value #{} = {} outside [0, 1]",
                i + 1,
                pvalues[i]
            )));
        }
        if let Some(w) = &weights {
            if w.len() != pvalues.len() {
                return Err(Error::InvalidWeights(format!(
                    "{} weights for {} hypotheses",
                    w.len(),
                    pvalues.len()
                )));
            }
            if let Some(i) = w.iter().position(|x| !(*x >= 0.0 && x.is_finite())) {
                return Err(Error::InvalidWeights(format!(
                    "weight #{} = {} is negative",
                    i + 1,
                    w[i]
                )));
            }
            let sum: f64 = w.iter().sum();
            if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
                return Err(Error::InvalidWeights(format!(
                    "weights sum to {sum}, not 1"
                )));
            }
        }
        Ok(Self {
            pvalues,
            weights,
            delta,
        })
    }

    pub fn pvalues(&self) -> &[f64] {
        &self.pvalues
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn len(&self) -> usize {
        self.pvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pvalues.is_empty()
    }

    pub fn run(&self, procedure: Procedure) -> Result<FwerOutcome> {
        match procedure {
            Procedure::FixedSequence => fixed_sequence(self),
            Procedure::Fallback => fallback(self),
            Procedure::Bonferroni => bonferroni(self),
        }
    }
}

/// Per-hypothesis decisions, in plan order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FwerOutcome {
    pub rejected: Vec<bool>,
    /// Level each hypothesis was tested at; 0 means it was never tested.
    pub local_levels: Vec<f64>,
}

impl FwerOutcome {
    pub fn rejections(&self) -> usize {
        self.rejected.iter().filter(|r| **r).count()
    }
}

// A hypothesis tested at level 0 is never rejected, even with p = 0.
fn rejects(p: f64, level: f64) -> bool {
    level > 0.0 && p <= level
}

/// Test in order at the full level `delta`, stopping at the first acceptance.
pub fn fixed_sequence(plan: &FwerPlan) -> Result<FwerOutcome> {
    if plan.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut rejected = vec![false; plan.len()];
    let mut local_levels = vec![0.0; plan.len()];
    for (i, &p) in plan.pvalues.iter().enumerate() {
        local_levels[i] = plan.delta;
        if !rejects(p, plan.delta) {
            break;
        }
        rejected[i] = true;
    }
    Ok(FwerOutcome {
        rejected,
        local_levels,
    })
}

/// Weighted fallback: `level_1 = delta w_1`, and
/// `level_{i+1} = delta w_{i+1} + level_i` if hypothesis `i` was rejected,
/// `delta w_{i+1}` otherwise.
pub fn fallback(plan: &FwerPlan) -> Result<FwerOutcome> {
    if plan.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let weights = plan
        .weights
        .as_ref()
        .ok_or_else(|| Error::InvalidWeights("fallback requires weights".into()))?;
    let mut rejected = Vec::with_capacity(plan.len());
    let mut local_levels = Vec::with_capacity(plan.len());
    let mut carry = 0.0;
    for (&p, &w) in plan.pvalues.iter().zip(weights) {
        let level = plan.delta * w + carry;
        let hit = rejects(p, level);
        carry = if hit { level } else { 0.0 };
        rejected.push(hit);
        local_levels.push(level);
    }
    Ok(FwerOutcome {
        rejected,
        local_levels,
    })
}

/// Reject `H_i` iff `p_i <= delta / m`.
pub fn bonferroni(plan: &FwerPlan) -> Result<FwerOutcome> {
    if plan.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let level = plan.delta / plan.len() as f64;
    Ok(FwerOutcome {
        rejected: plan.pvalues.iter().map(|&p| rejects(p, level)).collect(),
        local_levels: vec![level; plan.len()],
    })
}
