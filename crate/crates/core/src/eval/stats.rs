//! Pearson correlation, Welch's t-test and the Student-t tail they share.

use alloc::string::String;

use libm::{exp, fabs, lgamma, log, sqrt};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorrelationResult {
    pub r: f64,
    pub p_value: f64,
    pub n: usize,
    /// Set when either series is constant (r reported as 0) or |r| = 1.
    pub degenerate: bool,
}

impl CorrelationResult {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

const MAX_ITER: usize = 10_000;
const CF_EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

fn guard(v: f64) -> f64 {
    if fabs(v) < TINY {
        TINY
    } else {
        v
    }
}

/// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 / guard(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / guard(1.0 + aa * d);
        c = guard(1.0 + aa / c);
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / guard(1.0 + aa * d);
        c = guard(1.0 + aa / c);
        let step = d * c;
        h *= step;
        if fabs(step - 1.0) < CF_EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function I_x(a, b).
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = lgamma(a + b) - lgamma(a) - lgamma(b) + a * log(x) + b * log(1.0 - x);
    if x < (a + 1.0) / (a + b + 2.0) {
        exp(ln_front) * beta_cf(a, b, x) / a
    } else {
        1.0 - exp(ln_front) * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Two-sided tail probability of Student's t with `df` degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Product-moment correlation with a two-sided p-value from
/// t = r·sqrt((n−2)/(1−r²)) on n−2 degrees of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::TooFewPoints {
            group: String::new(),
            n,
        });
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(CorrelationResult {
            r: 0.0,
            p_value: 1.0,
            n,
            degenerate: true,
        });
    }
    let r = (sxy / sqrt(sxx * syy)).clamp(-1.0, 1.0);
    if fabs(r) == 1.0 || n == 2 {
        // Two points always lie on a line; that carries no evidence.
        let p_value = if n == 2 { 1.0 } else { 0.0 };
        return Ok(CorrelationResult {
            r,
            p_value,
            n,
            degenerate: true,
        });
    }
    // With t² = r²·df/(1−r²), df/(df+t²) reduces to 1−r².
    let df = (n - 2) as f64;
    let p_value = regularized_incomplete_beta(df / 2.0, 0.5, 1.0 - r * r).clamp(0.0, 1.0);
    Ok(CorrelationResult {
        r,
        p_value,
        n,
        degenerate: false,
    })
}

/// Mean, unbiased variance and size of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSummary {
    pub mean: f64,
    pub variance: f64,
    pub n: usize,
}

impl SampleSummary {
    pub fn of(xs: &[f64]) -> SampleSummary {
        let n = xs.len();
        if n == 0 {
            return SampleSummary {
                mean: 0.0,
                variance: 0.0,
                n,
            };
        }
        let m = mean(xs);
        let ss: f64 = xs.iter().map(|v| (v - m) * (v - m)).sum();
        let variance = if n > 1 { ss / (n - 1) as f64 } else { 0.0 };
        SampleSummary {
            mean: m,
            variance,
            n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
}

/// Welch's unequal-variance two-sample t-test from sample summaries.
pub fn welch_from_summaries(a: SampleSummary, b: SampleSummary) -> Result<TTest> {
    if a.n < 2 || b.n < 2 {
        return Err(Error::TooFewPoints {
            group: String::from("welch"),
            n: a.n.min(b.n),
        });
    }
    let (va, vb) = (a.variance / a.n as f64, b.variance / b.n as f64);
    let se2 = va + vb;
    if se2 == 0.0 {
        let same = a.mean == b.mean;
        let t = if same {
            0.0
        } else {
            f64::INFINITY.copysign(a.mean - b.mean)
        };
        return Ok(TTest {
            t,
            df: (a.n + b.n - 2) as f64,
            p_value: if same { 1.0 } else { 0.0 },
        });
    }
    let t = (a.mean - b.mean) / sqrt(se2);
    let df = se2 * se2 / (va * va / (a.n - 1) as f64 + vb * vb / (b.n - 1) as f64);
    Ok(TTest {
        t,
        df,
        p_value: student_t_two_sided(t, df),
    })
}

pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    welch_from_summaries(SampleSummary::of(a), SampleSummary::of(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, StudentsT};

    fn t_oracle(t: f64, df: f64) -> f64 {
        2.0 * StudentsT::new(0.0, 1.0, df).unwrap().cdf(-t.abs())
    }

    #[test]
    fn examples() {
        let r = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert!((r.r - 1.0).abs() < 1e-15 && r.degenerate);
        let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r.r - 0.8).abs() < 1e-12);
        assert!(!r.degenerate);
        assert!((r.p_value - t_oracle(0.8 * (2.0f64 / 0.36).sqrt(), 2.0)).abs() < 1e-12);
        let r = pearson(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]).unwrap();
        assert_eq!((r.r, r.p_value, r.degenerate), (0.0, 1.0, true));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            pearson(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            pearson(&[1.0], &[1.0]),
            Err(Error::TooFewPoints { n: 1, .. })
        ));
    }

    #[test]
    fn t_tail_matches_oracle() {
        for df in [1.0, 2.0, 3.5, 10.0, 48.0, 300.0] {
            for t in [0.0, 0.1, 0.9, 2.0, 3.3, 8.0, 25.0] {
                let ours = student_t_two_sided(t, df);
                let theirs = t_oracle(t, df);
                assert!(
                    (ours - theirs).abs() < 1e-12,
                    "t={t} df={df}: {ours} vs {theirs}"
                );
            }
        }
    }

    #[test]
    fn incomplete_beta_identities() {
        assert!((regularized_incomplete_beta(1.0, 1.0, 0.3) - 0.3).abs() < 1e-14);
        assert!(
            (regularized_incomplete_beta(2.0, 3.0, 0.4)
                + regularized_incomplete_beta(3.0, 2.0, 0.6)
                - 1.0)
                .abs()
                < 1e-14
        );
        // I_x(a, 1) = x^a
        assert!((regularized_incomplete_beta(2.5, 1.0, 0.7) - 0.7f64.powf(2.5)).abs() < 1e-14);
    }

    #[test]
    fn welch_matches_hand_values() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [2.0, 4.0, 6.0, 8.0, 10.0];
        let w = welch_t_test(&a, &b).unwrap();
        // var a = 5/3, var b = 10
        let se2: f64 = 5.0 / 12.0 + 2.0;
        assert!((w.t - (2.5 - 6.0) / se2.sqrt()).abs() < 1e-12);
        let df = se2 * se2 / ((5.0 / 12.0f64).powi(2) / 3.0 + 4.0 / 4.0);
        assert!((w.df - df).abs() < 1e-12);
        assert!((w.p_value - t_oracle(w.t, df)).abs() < 1e-12);
        assert_eq!(welch_t_test(&a, &a).unwrap().p_value, 1.0);
        assert_eq!(welch_t_test(&[1.0, 1.0], &[2.0, 2.0]).unwrap().p_value, 0.0);
        assert!(welch_t_test(&[1.0], &a).is_err());
    }
}
