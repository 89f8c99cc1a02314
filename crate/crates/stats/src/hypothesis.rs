//! Two-sample Welch t-test and the exact two-sided binomial test.

use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::factorial::ln_binomial;

use crate::error::{Result, StatsError};

/// Outcome of a Welch two-sample t-test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchTest {
    pub t: f64,
    /// Welch–Satterthwaite degrees of freedom.
    pub df: f64,
    pub p_two_sided: f64,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1.0))
}

/// Welch's unequal-variance t-test of `mean(a) - mean(b)`.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::Contract(format!(
            "welch test needs at least 2 observations per sample (got {} and {})",
            a.len(),
            b.len()
        )));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(StatsError::Contract(
            "welch test samples must be finite".into(),
        ));
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    if va == 0.0 && vb == 0.0 {
        return Err(StatsError::DegenerateTest(
            "both samples have zero variance".into(),
        ));
    }
    let sa = va / a.len() as f64;
    let sb = vb / b.len() as f64;
    let se2 = sa + sb;
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (a.len() as f64 - 1.0) + sb * sb / (b.len() as f64 - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| StatsError::Numerical(format!("t distribution: {e}")))?;
    let p = (2.0 * dist.cdf(-t.abs())).min(1.0);
    Ok(WelchTest {
        t,
        df,
        p_two_sided: p,
    })
}

/// Relative slack used when comparing outcome probabilities against `P(X = k)`.
const PMF_TIE_SLACK: f64 = 1e-7;

fn ln_pmf(i: u64, n: u64, ln_p: f64, ln_q: f64) -> f64 {
    ln_binomial(n, i) + i as f64 * ln_p + (n - i) as f64 * ln_q
}

/// Two-sided exact binomial test of `k` successes out of `n` under success
/// probability `p0`.
///
/// The p-value is the total probability of every outcome no more likely than
/// the observed one.
pub fn exact_binomial_test(k: u64, n: u64, p0: f64) -> Result<f64> {
    if k > n {
        return Err(StatsError::Contract(format!("k = {k} exceeds n = {n}")));
    }
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(StatsError::Contract(format!(
            "p0 = {p0} must lie in (0, 1)"
        )));
    }
    let ln_p = p0.ln();
    let ln_q = (-p0).ln_1p();
    let observed = ln_pmf(k, n, ln_p, ln_q);
    let cutoff = observed + PMF_TIE_SLACK.ln_1p();
    let mut tail: Vec<f64> = (0..=n)
        .map(|i| ln_pmf(i, n, ln_p, ln_q))
        .filter(|&lp| lp <= cutoff)
        .map(f64::exp)
        .collect();
    // smallest terms first
    tail.sort_by(f64::total_cmp);
    Ok(tail.iter().sum::<f64>().min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welch_identical_samples() {
        let a = [1.0, 2.0, 4.0, 7.0];
        let r = welch_t_test(&a, &a).unwrap();
        assert_eq!(r.t, 0.0);
        assert!((r.p_two_sided - 1.0).abs() < 1e-12);
    }

    #[test]
    fn welch_rejects_degenerate() {
        assert!(matches!(
            welch_t_test(&[1.0, 1.0], &[2.0, 2.0, 2.0]),
            Err(StatsError::DegenerateTest(_))
        ));
        assert!(matches!(
            welch_t_test(&[1.0], &[2.0, 3.0]),
            Err(StatsError::Contract(_))
        ));
    }

    #[test]
    fn welch_one_constant_sample_is_fine() {
        let r = welch_t_test(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!(r.t < 0.0);
        assert!((r.df - 2.0).abs() < 1e-12);
    }

    #[test]
    fn binomial_mode_is_one() {
        let p = exact_binomial_test(10, 20, 0.5).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        let p = exact_binomial_test(0, 1, 0.5).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn binomial_contract() {
        assert!(exact_binomial_test(3, 2, 0.5).is_err());
        assert!(exact_binomial_test(1, 2, 0.0).is_err());
        assert!(exact_binomial_test(1, 2, 1.0).is_err());
    }

    #[test]
    fn binomial_asymmetric_p0() {
        // n = 3, p0 = 0.25: pmf = 27/64, 27/64, 9/64, 1/64
        let p = exact_binomial_test(2, 3, 0.25).unwrap();
        assert!((p - 10.0 / 64.0).abs() < 1e-14);
        let p = exact_binomial_test(0, 3, 0.25).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
    }
}
