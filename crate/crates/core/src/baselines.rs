//! Competing valid p-values for `H0: R > alpha`: Bentkus and the tight (KL)
//! form of Hoeffding.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::binomial::BinomialParams;
use crate::error::{Error, Result};
use crate::prw::{ceil_scaled, check_rhat, prw_pvalue, TestSpec};

/// The three p-values for one empirical risk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PValueReport {
    pub rhat: f64,
    pub alpha: f64,
    pub n: u64,
    pub prw: f64,
    pub bentkus: f64,
    pub hoeffding_tight: f64,
}

/// `min(1, e * P(Bin(n, alpha) <= ceil(n rhat)))`.
pub fn bentkus_pvalue(rhat: f64, spec: &TestSpec) -> Result<f64> {
    Ok(bentkus_pvalue_unclamped(rhat, spec)?.min(1.0))
}

pub fn bentkus_pvalue_unclamped(rhat: f64, spec: &TestSpec) -> Result<f64> {
    check_rhat(rhat)?;
    let bin = BinomialParams::new(spec.n(), spec.alpha())?;
    Ok(E * bin.cdf(ceil_scaled(spec.n(), rhat)))
}

/// Bernoulli relative entropy `KL(a || b)`, with `0 ln 0 = 0`.
pub fn kl_bernoulli(a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::OutOfDomain(format!("a = {a} outside [0, 1]")));
    }
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::OutOfDomain(format!("b = {b} outside (0, 1)")));
    }
    if a == b {
        return Ok(0.0);
    }
    let head = if a == 0.0 { 0.0 } else { a * (a / b).ln() };
    let tail = if a == 1.0 {
        0.0
    } else {
        // ln((1 - a) / (1 - b)) = ln1p(-a) - ln1p(-b)
        (1.0 - a) * ((-a).ln_1p() - (-b).ln_1p())
    };
    Ok((head + tail).max(0.0))
}

/// `exp(-n KL(min(rhat, alpha) || alpha))`, evaluated at the raw `rhat`.
pub fn hoeffding_tight_pvalue(rhat: f64, spec: &TestSpec) -> Result<f64> {
    check_rhat(rhat)?;
    let a = rhat.min(spec.alpha());
    Ok((-(spec.n() as f64) * kl_bernoulli(a, spec.alpha())?)
        .exp()
        .min(1.0))
}

/// All three p-values for one `rhat`.
pub fn compare(rhat: f64, spec: &TestSpec) -> Result<PValueReport> {
    Ok(PValueReport {
        rhat,
        alpha: spec.alpha(),
        n: spec.n(),
        prw: prw_pvalue(rhat, spec)?,
        bentkus: bentkus_pvalue(rhat, spec)?,
        hoeffding_tight: hoeffding_tight_pvalue(rhat, spec)?,
    })
}

/// The PRW multiplier `alpha (n - k) / (n alpha - k)` on step `k`. PRW beats
/// Bentkus on that step exactly when this is below `e`.
pub fn prw_factor(k: u64, spec: &TestSpec) -> f64 {
    let (n, a, k) = (spec.n() as f64, spec.alpha(), k as f64);
    a * (n - k) / (n * a - k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prw::prw_pvalue_unclamped;
    use proptest::prelude::*;

    fn round4(x: f64) -> f64 {
        (x * 1e4).round() / 1e4
    }

    fn spec() -> TestSpec {
        TestSpec::new(100, 0.1).unwrap()
    }

    #[test]
    fn bentkus_examples() {
        let s = spec();
        let b0 = bentkus_pvalue(0.0, &s).unwrap();
        assert!(((b0 - E * 0.9f64.powi(100)) / b0).abs() < 1e-12);
        assert!((b0 - 7.22e-5).abs() < 1e-7);
        assert_eq!(round4(b0), 0.0001);
        assert_eq!(round4(bentkus_pvalue(0.0606, &s).unwrap()), 0.5601);
        assert_eq!(bentkus_pvalue(1.0, &s).unwrap(), 1.0);
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_bernoulli(0.1, 0.1).unwrap(), 0.0);
        assert!((kl_bernoulli(0.0, 0.1).unwrap() - (1.0f64 / 0.9).ln()).abs() < 1e-15);
        // the 0.0152 row of the n = 100 table is the grid point 10/660
        let v = kl_bernoulli(10.0 / 660.0, 0.1).unwrap();
        assert_eq!(round4((-100.0 * v).exp()), 0.0024);
        assert!((kl_bernoulli(1.0, 0.25).unwrap() - 4.0f64.ln()).abs() < 1e-15);
        assert!(kl_bernoulli(0.2, 0.0).is_err());
        assert!(kl_bernoulli(0.2, 1.0).is_err());
        assert!(kl_bernoulli(1.2, 0.5).is_err());
    }

    #[test]
    fn hoeffding_examples() {
        let s = spec();
        assert_eq!(
            round4(hoeffding_tight_pvalue(44.0 / 660.0, &s).unwrap()),
            0.5010
        );
        assert_eq!(hoeffding_tight_pvalue(0.5, &s).unwrap(), 1.0);
        assert_eq!(hoeffding_tight_pvalue(0.1, &s).unwrap(), 1.0);
        let h0 = hoeffding_tight_pvalue(0.0, &s).unwrap();
        assert!(((h0 - 0.9f64.powi(100)) / h0).abs() < 1e-12);
        assert_eq!(round4(h0), 0.0);
    }

    #[test]
    fn compare_examples() {
        let s = spec();
        let r = compare(27.0 / 660.0, &s).unwrap();
        assert_eq!(
            (round4(r.prw), round4(r.hoeffding_tight), round4(r.bentkus)),
            (0.1094, 0.0869, 0.1565)
        );
        let r = compare(15.0 / 660.0, &s).unwrap();
        assert_eq!(
            (round4(r.prw), round4(r.hoeffding_tight), round4(r.bentkus)),
            (0.0109, 0.0093, 0.0213)
        );
    }

    #[test]
    fn compare_single_sample() {
        // n = 1: gamma(alpha) = 1, so rhat = 0 is already the lifted edge
        let s = TestSpec::new(1, 0.5).unwrap();
        let r = compare(0.0, &s).unwrap();
        assert_eq!(r.prw, 1.0);
        assert_eq!(r.hoeffding_tight, 0.5);
        assert_eq!(r.bentkus, 1.0);
    }

    #[test]
    fn region_dependent_ordering_spot_checks() {
        let s = spec();
        assert!(prw_pvalue(0.0379, &s).unwrap() < bentkus_pvalue(0.0379, &s).unwrap());
        assert!(prw_pvalue(0.0606, &s).unwrap() > bentkus_pvalue(0.0606, &s).unwrap());
    }

    #[test]
    fn factor_vs_e_decides_ordering() {
        let s = spec();
        let ctx = s.context();
        for k in 0..ctx.gamma() {
            let t = k as f64 / 100.0;
            let prw = prw_pvalue_unclamped(t, &s).unwrap();
            let bent = bentkus_pvalue_unclamped(t, &s).unwrap();
            let factor = prw_factor(k, &s);
            assert_eq!(prw < bent, factor < E, "k = {k}");
        }
    }

    proptest! {
        #[test]
        fn all_three_monotone_and_bounded(a in 0.0f64..1.0, b in 0.0f64..1.0, n in 1u64..300, alpha in 0.01f64..0.99) {
            let s = TestSpec::new(n, alpha).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (rl, rh) = (compare(lo, &s).unwrap(), compare(hi, &s).unwrap());
            for (x, y) in [(rl.prw, rh.prw), (rl.bentkus, rh.bentkus), (rl.hoeffding_tight, rh.hoeffding_tight)] {
                prop_assert!((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y));
                prop_assert!(x <= y);
            }
        }

        #[test]
        fn hoeffding_strictly_decreasing_below_alpha(a in 0.0f64..0.1, b in 0.0f64..0.1) {
            prop_assume!((a - b).abs() > 1e-6);
            let s = spec();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(hoeffding_tight_pvalue(lo, &s).unwrap() < hoeffding_tight_pvalue(hi, &s).unwrap());
        }
    }
}
