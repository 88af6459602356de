//! Super-uniform p-values for the mean of i.i.d. losses bounded in `[0, 1]`.
//!
//! The crate tests `H0: R > alpha` against `H1: R <= alpha`, where `R` is the
//! expected loss, from the empirical risk `rhat` of `n` calibration losses.
//!
//! * [`binomial`] exact binomial tails, evaluated in log space.
//! * [`prw`] the step bound `g(t; R)`, its inverse and the PRW p-value.
//! * [`baselines`] Bentkus and tight (KL) Hoeffding p-values.
//! * [`fwer`] fixed-sequence, fallback and Bonferroni procedures.
//! * [`mc`] seeded Monte Carlo checks of super-uniformity, power and FWER.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod binomial;
pub mod error;
pub mod fwer;
pub mod mc;
pub mod prw;

pub use baselines::{compare, PValueReport};
pub use binomial::BinomialParams;
pub use error::{Error, Result};
pub use fwer::{FwerOutcome, FwerPlan, Procedure};
pub use mc::{LossDistribution, McReport, PValueMethod};
pub use prw::{GBoundContext, TestSpec};
