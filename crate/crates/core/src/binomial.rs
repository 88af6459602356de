//! Exact binomial probabilities.
//!
//! Point masses use Loader's saddle-point form (Stirling remainders plus the
//! deviance term `bd0`), which keeps every log-mass accurate to a few ulps
//! without evaluating `ln Γ` of large arguments. Tails are summed in log space
//! from the largest term in the range, so neither small lower tails nor small
//! upper tails are ever obtained by subtraction.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Terms smaller than this fraction of the running sum are dropped. The pmf is
/// unimodal, so once a term falls below it every later term does too.
const TAIL_CUTOFF: f64 = 1e-18;

/// `Bin(n, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialParams {
    n: u64,
    p: f64,
    q: f64,
}

impl BinomialParams {
    pub fn new(n: u64, p: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "binomial trial count must be >= 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "binomial success probability {p} outside [0, 1]"
            )));
        }
        Ok(Self { n, p, q: 1.0 - p })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `ln P(Bin(n, p) = k)`; `-inf` when the mass is exactly zero.
    pub fn log_pmf(&self, k: i64) -> Result<f64> {
        if k < 0 || k as u64 > self.n {
            return Err(Error::OutOfDomain(format!(
                "k = {k} outside [0, {}] for the binomial pmf",
                self.n
            )));
        }
        Ok(self.ln_pmf(k as u64))
    }

    /// `P(Bin(n, p) <= k)`. Saturates to 0 for `k < 0` and to 1 for `k >= n`.
    pub fn cdf(&self, k: i64) -> f64 {
        self.ln_cdf(k).exp().min(1.0)
    }

    /// `P(Bin(n, p) >= t)`. Saturates to 1 for `t <= 0` and to 0 for `t > n`.
    pub fn sf(&self, t: i64) -> f64 {
        self.ln_sf(t).exp().min(1.0)
    }

    /// Natural log of [`cdf`](Self::cdf).
    pub fn ln_cdf(&self, k: i64) -> f64 {
        if k < 0 {
            return f64::NEG_INFINITY;
        }
        let k = k as u64;
        if k >= self.n {
            return 0.0;
        }
        if self.p == 0.0 {
            return 0.0;
        }
        if self.q == 0.0 {
            // all mass at n > k
            return f64::NEG_INFINITY;
        }
        self.ln_mass(0, k).min(0.0)
    }

    /// Natural log of [`sf`](Self::sf). Stays finite where `sf` itself would
    /// underflow.
    pub fn ln_sf(&self, t: i64) -> f64 {
        if t <= 0 {
            return 0.0;
        }
        let t = t as u64;
        if t > self.n {
            return f64::NEG_INFINITY;
        }
        if self.p == 0.0 {
            return f64::NEG_INFINITY;
        }
        if self.q == 0.0 {
            return 0.0;
        }
        self.ln_mass(t, self.n).min(0.0)
    }

    fn mode(&self) -> u64 {
        let m = ((self.n + 1) as f64 * self.p).floor();
        (m.max(0.0) as u64).min(self.n)
    }

    /// `ln sum_{j=lo}^{hi} pmf(j)` for `0 < p < 1`, anchored at the largest term.
    fn ln_mass(&self, lo: u64, hi: u64) -> f64 {
        debug_assert!(lo <= hi && hi <= self.n);
        let anchor_k = self.mode().clamp(lo, hi);
        let anchor = self.ln_pmf(anchor_k);
        if anchor == f64::NEG_INFINITY {
            return anchor;
        }
        let mut acc = 1.0;
        for j in (lo..anchor_k).rev() {
            let r = (self.ln_pmf(j) - anchor).exp();
            acc += r;
            if r <= acc * TAIL_CUTOFF {
                break;
            }
        }
        for j in anchor_k + 1..=hi {
            let r = (self.ln_pmf(j) - anchor).exp();
            acc += r;
            if r <= acc * TAIL_CUTOFF {
                break;
            }
        }
        anchor + acc.ln()
    }

    fn ln_pmf(&self, k: u64) -> f64 {
        let (n, p, q) = (self.n, self.p, self.q);
        if p == 0.0 {
            return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
        }
        if q == 0.0 {
            return if k == n { 0.0 } else { f64::NEG_INFINITY };
        }
        let nf = n as f64;
        if k == 0 {
            return if p < 0.5 {
                nf * (-p).ln_1p()
            } else {
                nf * q.ln()
            };
        }
        if k == n {
            return if q < 0.5 {
                nf * (-q).ln_1p()
            } else {
                nf * p.ln()
            };
        }
        let kf = k as f64;
        let rest = (n - k) as f64;
        let lc = stirling_remainder(n)
            - stirling_remainder(k)
            - stirling_remainder(n - k)
            - deviance(kf, nf * p)
            - deviance(rest, nf * q);
        let lf = (2.0 * PI).ln() + kf.ln() + (-kf / nf).ln_1p();
        lc - 0.5 * lf
    }
}

/// `ln(k!) - [(k + 1/2) ln k - k + ln sqrt(2 pi)]`, with the value at 0 set to 0.
#[allow(clippy::excessive_precision)]
const STIRLING_REMAINDER_SMALL: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_258_22,
    0.041_340_695_955_409_294_09,
    0.027_677_925_684_998_339_15,
    0.020_790_672_103_765_093_11,
    0.016_644_691_189_821_192_16,
    0.013_876_128_823_070_748_00,
    0.011_896_709_945_891_770_10,
    0.010_411_265_261_972_096_50,
    0.009_255_462_182_712_732_918,
    0.008_330_563_433_362_871_257,
    0.007_573_675_487_951_840_795,
    0.006_942_840_107_209_529_866,
    0.006_408_994_188_004_207_068,
    0.005_951_370_112_758_847_736,
    0.005_554_733_551_962_801_371,
];

fn stirling_remainder(k: u64) -> f64 {
    if k < STIRLING_REMAINDER_SMALL.len() as u64 {
        return STIRLING_REMAINDER_SMALL[k as usize];
    }
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let x = k as f64;
    let xx = x * x;
    if k > 500 {
        (S0 - S1 / xx) / x
    } else if k > 80 {
        (S0 - (S1 - S2 / xx) / xx) / x
    } else if k > 35 {
        (S0 - (S1 - (S2 - S3 / xx) / xx) / xx) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / xx) / xx) / xx) / xx) / x
    }
}

/// `x ln(x / m) + m - x`, computed by a series when `x` is close to `m`.
fn deviance(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let v = (x - m) / (x + m);
        let v2 = v * v;
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        let mut j = 1.0;
        loop {
            ej *= v2;
            let next = s + ej / (2.0 * j + 1.0);
            if next == s {
                return next;
            }
            s = next;
            j += 1.0;
        }
    }
    x * (x / m).ln() + m - x
}
