//! Diagnostics for Denjoy-Carleman weight sequences, in the log domain.

use std::f64::consts::E;

use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};

/// Largest index searched by [`WeightSequence::assoc_weight`] for closed-form
/// families.
pub const MAX_SCAN: usize = 1 << 52;
/// Consecutive increases of `k ln t + ln m_k` that end the infimum search.
pub const STOP_AFTER: usize = 10;
/// Tolerance on logs for the convexity test.
pub const CONVEXITY_TOL: f64 = 1e-12;
/// Increment ratios at or above this read as a divergent trend.
pub const DIVERGENT_RATIO: f64 = 0.9;

#[derive(Clone, Debug, PartialEq)]
pub enum WeightFamily {
    /// `m_k = k!^s`.
    Gevrey(f64),
    /// `m_k = (ln(k + e))^(sigma k)`.
    LogPow(f64),
    /// `m_k = 1`.
    Constant,
    /// Given values of `ln m_k`.
    Explicit(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightSequence {
    family: WeightFamily,
}

impl WeightSequence {
    pub fn gevrey(s: f64) -> Result<Self> {
        positive("s", s)?;
        Ok(Self { family: WeightFamily::Gevrey(s) })
    }

    pub fn log_pow(sigma: f64) -> Result<Self> {
        positive("sigma", sigma)?;
        Ok(Self { family: WeightFamily::LogPow(sigma) })
    }

    pub fn constant() -> Self {
        Self { family: WeightFamily::Constant }
    }

    pub fn from_logs(logs: Vec<f64>) -> Result<Self> {
        if let Some(k) = logs.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!("log m_{k} is not finite")));
        }
        Ok(Self { family: WeightFamily::Explicit(logs) })
    }

    pub fn from_values(values: &[f64]) -> Result<Self> {
        if let Some(k) = values.iter().position(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(Error::InvalidParameter(format!("m_{k} = {} must be positive", values[k])));
        }
        Self::from_logs(values.iter().map(|x| x.ln()).collect())
    }

    /// Values `m_0, m_1, ...` separated by whitespace, commas or newlines;
    /// `#` starts a comment.
    pub fn parse_values(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap();
            for tok in line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
                values.push(tok.parse::<f64>().map_err(|_| Error::InvalidParameter(format!("bad value {tok:?}")))?);
            }
        }
        Self::from_values(&values)
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    /// Number of available terms, `None` for closed forms.
    pub fn len(&self) -> Option<usize> {
        match &self.family {
            WeightFamily::Explicit(v) => Some(v.len()),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// `ln m_k`, or `None` past the end of an explicit list.
    pub fn log_m(&self, k: usize) -> Option<f64> {
        Some(match &self.family {
            WeightFamily::Gevrey(s) => s * ln_factorial(k as u64),
            WeightFamily::LogPow(sigma) => sigma * k as f64 * (k as f64 + E).ln().ln(),
            WeightFamily::Constant => 0.0,
            WeightFamily::Explicit(v) => *v.get(k)?,
        })
    }

    fn logs(&self, count: usize) -> Result<Vec<f64>> {
        (0..count)
            .map(|k| self.log_m(k).ok_or(Error::InsufficientTerms { needed: count, available: self.len().unwrap_or(0) }))
            .collect()
    }

    /// `h(t) = inf_k t^k m_k`.
    pub fn assoc_weight(&self, t: f64) -> Result<f64> {
        Ok(self.assoc_weight_log(t)?.exp())
    }

    fn assoc_weight_log(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::NegativeArgument(t));
        }
        if t == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        if t >= 1.0 {
            return Ok(0.0);
        }
        let lt = t.ln();
        if self.len().is_none() {
            return self.convex_infimum(lt);
        }
        let mut best = f64::INFINITY;
        let mut prev = f64::INFINITY;
        let mut rises = 0;
        let logs = match &self.family {
            WeightFamily::Explicit(v) => v,
            _ => unreachable!(),
        };
        for (k, &l) in logs.iter().enumerate() {
            let v = k as f64 * lt + l;
            best = best.min(v);
            if v > prev {
                rises += 1;
                if rises == STOP_AFTER {
                    return Ok(best);
                }
            } else {
                rises = 0;
            }
            prev = v;
        }
        Err(Error::NoStopReached(logs.len()))
    }

    /// `ln m_{k+1} - ln m_k` for closed-form families.
    fn log_increment(&self, k: usize) -> f64 {
        let x = k as f64;
        match &self.family {
            WeightFamily::Gevrey(s) => s * (x + 1.0).ln(),
            WeightFamily::LogPow(sigma) => sigma * ((x + 1.0) * (x + 1.0 + E).ln().ln() - x * (x + E).ln().ln()),
            WeightFamily::Constant => 0.0,
            WeightFamily::Explicit(_) => unreachable!("explicit lists are scanned"),
        }
    }

    /// Minimum of the convex `k ln t + ln m_k` for closed-form families:
    /// first `k` with a nonnegative increment, by galloping then bisection.
    fn convex_infimum(&self, lt: f64) -> Result<f64> {
        let rising = |k: usize| self.log_increment(k) + lt >= 0.0;
        let (mut lo, mut hi) = (0, 0);
        while !rising(hi) {
            lo = hi;
            hi = (hi * 2).max(1);
            if hi >= MAX_SCAN {
                return Err(Error::NoStopReached(MAX_SCAN));
            }
        }
        while hi > lo + 1 {
            let mid = lo + (hi - lo) / 2;
            if rising(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let k = if rising(lo) { lo } else { hi };
        Ok(k as f64 * lt + self.log_m(k).expect("closed form"))
    }

    pub fn check_regular(&self, k_range: usize) -> Result<Regularity> {
        if k_range < 10 {
            return Err(Error::InsufficientTerms { needed: 10, available: k_range });
        }
        let l = self.logs(k_range + 2)?;
        let m1 = M1 { pass: l[0] == 0.0 && l[1] == 0.0, log_m0: l[0], log_m1: l[1] };

        let roots: Vec<f64> = (1..=k_range).map(|k| (l[k + 1] - l[k]) / k as f64).collect();
        let (arg, &max_log) = roots.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        let half = k_range / 2;
        let first_half = roots[..half].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let m2 = M2 { pass: max_log <= first_half + CONVEXITY_TOL, sup: max_log.exp(), argmax: arg + 1 };

        let violation = (1..=k_range).find(|&k| 2.0 * l[k] > l[k - 1] + l[k + 1] + CONVEXITY_TOL);
        let m3 = M3 { pass: violation.is_none(), first_violation: violation };

        let root = |k: usize| (l[k] / k as f64).exp();
        let nondecreasing = (half..k_range).all(|k| l[k + 1] / (k + 1) as f64 >= l[k] / k as f64 - CONVEXITY_TOL);
        let (at_half, at_end) = (root(half), root(k_range));
        let m4 = M4 { pass: nondecreasing && at_end > at_half, root_at_half: at_half, root_at_end: at_end, nondecreasing };
        Ok(Regularity { k_range, m1, m2, m3, m4 })
    }

    /// Partial sums of `sum_k m_{k-1} / (k m_k)`.
    pub fn quasianalytic_diag(&self, terms: usize) -> Result<QuasiDiag> {
        if terms < 100 {
            return Err(Error::InsufficientTerms { needed: 100, available: terms });
        }
        let l = self.logs(terms + 1)?;
        let partial = |upto: usize| (1..=upto).map(|k| (l[k - 1] - l[k] - (k as f64).ln()).exp()).sum::<f64>();
        let (s_k, s_half, s_quarter) = (partial(terms), partial(terms / 2), partial(terms / 4));
        let increment_ratio = (s_k - s_half) / (s_half - s_quarter);
        let trend = if increment_ratio >= DIVERGENT_RATIO { Trend::Divergent } else { Trend::Convergent };
        let classification = match self.family {
            WeightFamily::Gevrey(_) => Some(Classification { quasianalytic: false, reason: "sum of 1/k^(1+s) converges" }),
            WeightFamily::LogPow(sigma) => Some(Classification {
                quasianalytic: sigma <= 1.0,
                reason: "quasianalytic if and only if 0 < sigma <= 1",
            }),
            WeightFamily::Constant => Some(Classification { quasianalytic: true, reason: "harmonic series diverges" }),
            WeightFamily::Explicit(_) => None,
        };
        Ok(QuasiDiag { terms, s_k, s_half, s_quarter, increment_ratio, trend, classification })
    }

    /// `max_t h(t) / t^k` over a grid in `(0, 1]`.
    pub fn recover_mk(&self, k: usize, grid: &[f64]) -> Result<Recovered> {
        if grid.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let mut best = (f64::NEG_INFINITY, grid[0]);
        for &t in grid {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::InvalidParameter(format!("grid point {t} outside (0, 1]")));
            }
            let v = self.assoc_weight_log(t)? - k as f64 * t.ln();
            if v > best.0 {
                best = (v, t);
            }
        }
        Ok(Recovered { k, value: best.0.exp(), log_value: best.0, t_best: best.1, grid_points: grid.len() })
    }

    /// `sup_{1 <= k <= K} (m_k / n_k)^(1/k)` with its trend.
    pub fn compare(&self, other: &WeightSequence, k_range: usize) -> Result<Comparison> {
        if k_range < 10 {
            return Err(Error::InsufficientTerms { needed: 10, available: k_range });
        }
        let (a, b) = (self.logs(k_range + 1)?, other.logs(k_range + 1)?);
        let roots: Vec<f64> = (1..=k_range).map(|k| (a[k] - b[k]) / k as f64).collect();
        let sup = roots.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let half = k_range / 2;
        let first_half = roots[..half].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let growing = sup > first_half + CONVEXITY_TOL;
        Ok(Comparison { k_range, sup: sup.exp(), growing })
    }
}

/// Log-spaced grid of `points` values from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![hi],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect()
        }
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {x} must be positive")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Regularity {
    pub k_range: usize,
    pub m1: M1,
    pub m2: M2,
    pub m3: M3,
    pub m4: M4,
}

/// `m_0 = m_1 = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct M1 {
    pub pass: bool,
    pub log_m0: f64,
    pub log_m1: f64,
}

/// `sup_k (m_{k+1}/m_k)^(1/k)`; passes when the second half of the range
/// sets no new maximum.
#[derive(Clone, Debug, PartialEq)]
pub struct M2 {
    pub pass: bool,
    pub sup: f64,
    pub argmax: usize,
}

/// Log-convexity.
#[derive(Clone, Debug, PartialEq)]
pub struct M3 {
    pub pass: bool,
    pub first_violation: Option<usize>,
}

/// Growth of `m_k^(1/k)` over the second half of the range.
#[derive(Clone, Debug, PartialEq)]
pub struct M4 {
    pub pass: bool,
    pub root_at_half: f64,
    pub root_at_end: f64,
    pub nondecreasing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trend {
    Convergent,
    Divergent,
}

impl Trend {
    pub fn as_str(self) -> &'static str {
        match self {
            Trend::Convergent => "convergent",
            Trend::Divergent => "divergent",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub quasianalytic: bool,
    pub reason: &'static str,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuasiDiag {
    pub terms: usize,
    pub s_k: f64,
    pub s_half: f64,
    pub s_quarter: f64,
    pub increment_ratio: f64,
    pub trend: Trend,
    /// Known analytic answer for closed-form families.
    pub classification: Option<Classification>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Recovered {
    pub k: usize,
    pub value: f64,
    pub log_value: f64,
    pub t_best: f64,
    pub grid_points: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub k_range: usize,
    pub sup: f64,
    pub growing: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gevrey_is_regular() {
        let r = WeightSequence::gevrey(1.0).unwrap().check_regular(50).unwrap();
        assert!(r.m1.pass && r.m2.pass && r.m3.pass && r.m4.pass);
        assert!(r.m2.sup <= 2.0 + 1e-12);
        assert!(r.m4.nondecreasing);
    }

    #[test]
    fn constant_fails_m4() {
        let r = WeightSequence::constant().check_regular(50).unwrap();
        assert!(r.m1.pass && r.m3.pass);
        assert!(!r.m4.pass);
    }

    #[test]
    fn explicit_convexity_failure() {
        let mut v = vec![1.0, 1.0, 10.0];
        v.extend(std::iter::repeat_n(1.0, 20));
        let r = WeightSequence::from_values(&v).unwrap().check_regular(12).unwrap();
        assert_eq!(r.m3.first_violation, Some(2));
        let short = WeightSequence::from_values(&[1.0; 5]).unwrap();
        assert!(matches!(short.check_regular(10), Err(Error::InsufficientTerms { .. })));
        assert!(WeightSequence::parse_values("1, 1 # m1\n2 6\n").unwrap().len() == Some(4));
        assert!(WeightSequence::parse_values("1 -2").is_err());
    }

    #[test]
    fn log_pow_m1_as_evaluated() {
        let r = WeightSequence::log_pow(1.0).unwrap().check_regular(20).unwrap();
        assert!(!r.m1.pass);
        assert!(WeightSequence::log_pow(0.0).is_err());
        assert!(WeightSequence::gevrey(-1.0).is_err());
    }

    #[test]
    fn quasianalytic_sums() {
        let g = WeightSequence::gevrey(1.0).unwrap().quasianalytic_diag(100).unwrap();
        let direct: f64 = (1..=100).map(|k| 1.0 / (k * k) as f64).sum();
        assert!((g.s_k - direct).abs() < 1e-10);
        assert_eq!(g.trend, Trend::Convergent);
        assert!(!g.classification.unwrap().quasianalytic);
        let c = WeightSequence::constant().quasianalytic_diag(1000).unwrap();
        assert!((c.s_k - (1000f64.ln() + 0.5772156649)).abs() < 1e-3);
        assert_eq!(c.trend, Trend::Divergent);
        assert!(WeightSequence::constant().quasianalytic_diag(50).is_err());
    }

    #[test]
    fn associated_weight() {
        let g = WeightSequence::gevrey(1.0).unwrap();
        assert!((g.assoc_weight(1.0 / E).unwrap() - 2.0 * (-2.0f64).exp()).abs() < 1e-12);
        assert_eq!(g.assoc_weight(0.0).unwrap(), 0.0);
        assert_eq!(g.assoc_weight(3.0).unwrap(), 1.0);
        assert!(matches!(g.assoc_weight(-1.0), Err(Error::NegativeArgument(_))));
        let short = WeightSequence::from_values(&[1.0, 1.0, 2.0]).unwrap();
        assert!(matches!(short.assoc_weight(0.5), Err(Error::NoStopReached(3))));
    }

    #[test]
    fn recovery_from_the_weight() {
        let g = WeightSequence::gevrey(1.0).unwrap();
        let grid = log_grid(1e-3, 1.0, 2000);
        assert_eq!(g.recover_mk(0, &grid).unwrap().value, 1.0);
        assert!((g.recover_mk(2, &grid).unwrap().value - 2.0).abs() < 0.02);
        assert!(g.recover_mk(3, &grid).unwrap().value <= 6.0 + 1e-9);
        assert_eq!(g.recover_mk(1, &[]).unwrap_err(), Error::EmptyGrid);
    }

    #[test]
    fn comparisons() {
        let (g1, g2) = (WeightSequence::gevrey(1.0).unwrap(), WeightSequence::gevrey(2.0).unwrap());
        let c = g1.compare(&g2, 40).unwrap();
        assert!(c.sup <= 1.0 && !c.growing);
        assert!(g2.compare(&g1, 40).unwrap().growing);
        assert_eq!(g1.compare(&g1, 40).unwrap().sup, 1.0);
    }
}
