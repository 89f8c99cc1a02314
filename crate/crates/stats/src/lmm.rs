//! Linear mixed models with crossed random intercepts, fitted by maximum
//! likelihood.
//!
//! The model is `y = X beta + sum_f Z_f b_f + e` with `b_f ~ N(0, s_f^2 I)`
//! and `e ~ N(0, s^2 I)`. Writing `theta_f = s_f / s`, the residual variance
//! and fixed effects are profiled out and the deviance is minimized over
//! `theta` alone:
//!
//! `-2 logL(theta) = log|A(theta)| + n (1 + log(2 pi r2(theta) / n))`
//!
//! where `A = Lambda Z'Z Lambda + I` and `r2` is the penalized residual sum of
//! squares at the joint solution for `(beta, u)`.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use crate::error::{Result, StatsError};
use crate::linalg::{cholesky, cholesky_inverse, cholesky_solve};
use crate::optimize::NelderMead;

pub const INTERCEPT: &str = "(intercept)";

/// Relative pivot below which a fixed-effect column counts as collinear.
const COLLINEAR_PIVOT: f64 = 1e-10;

/// A variance component is set to exactly zero when doing so costs no more
/// than rounding noise in the deviance.
const BOUNDARY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FixedColumn {
    pub name: String,
    pub values: Vec<f64>,
}

/// A grouping factor; `levels[i]` is the level label of row `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomFactor {
    pub name: String,
    pub levels: Vec<String>,
}

/// Complete-case data for one fit. An intercept is always added.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MixedModelData {
    pub response: Vec<f64>,
    pub fixed: Vec<FixedColumn>,
    pub factors: Vec<RandomFactor>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedEffect {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
}

/// Conditional mode (BLUP) of one random-intercept level.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomIntercept {
    pub factor: String,
    pub level: String,
    pub blup: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceComponent {
    pub name: String,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmmFit {
    pub fixed: Vec<FixedEffect>,
    pub random: Vec<RandomIntercept>,
    /// One entry per random factor, in input order.
    pub variance_components: Vec<VarianceComponent>,
    pub residual_variance: f64,
    pub log_likelihood: f64,
    pub aic: f64,
    pub n_observations: usize,
    /// Relative standard deviations `s_f / s` at the optimum.
    pub theta: Vec<f64>,
    pub iterations: usize,
}

impl LmmFit {
    pub fn fixed_effect(&self, name: &str) -> Option<&FixedEffect> {
        self.fixed.iter().find(|f| f.name == name)
    }

    pub fn variance_of(&self, factor: &str) -> Option<f64> {
        self.variance_components
            .iter()
            .find(|v| v.name == factor)
            .map(|v| v.variance)
    }

    pub fn blup(&self, factor: &str, level: &str) -> Option<f64> {
        self.random
            .iter()
            .find(|r| r.factor == factor && r.level == level)
            .map(|r| r.blup)
    }

    /// Number of estimated parameters entering the AIC.
    pub fn n_parameters(&self) -> usize {
        self.fixed.len() + self.variance_components.len() + 1
    }
}

#[derive(Debug, Clone, Default)]
pub struct LmmOptions {
    /// Starting relative standard deviations, one per factor.
    pub start_theta: Option<Vec<f64>>,
    /// Skip optimization and evaluate at these relative standard deviations.
    pub fixed_theta: Option<Vec<f64>>,
    /// Iteration cap for the optimizer (default 20,000).
    pub max_iter: Option<usize>,
}

struct Design {
    n: usize,
    p: usize,
    q: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    /// Row-major `n * n_factors` global level indices.
    z: Vec<usize>,
    n_factors: usize,
    factor_of_level: Vec<usize>,
    xtx: Vec<f64>,
    xty: Vec<f64>,
    ztz: Vec<f64>,
    ztx: Vec<f64>,
    zty: Vec<f64>,
}

struct Solution {
    deviance: f64,
    beta: Vec<f64>,
    b: Vec<f64>,
    sigma2: f64,
    beta_cov_scaled: Vec<f64>,
}

impl Design {
    fn build(data: &MixedModelData) -> Result<(Self, Vec<String>, Vec<(usize, String)>)> {
        let n = data.response.len();
        if data.response.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::Contract("response must be finite".into()));
        }
        let mut names = vec![INTERCEPT.to_string()];
        for c in &data.fixed {
            if c.values.len() != n {
                return Err(StatsError::Contract(format!(
                    "fixed column `{}` has {} rows, response has {n}",
                    c.name,
                    c.values.len()
                )));
            }
            if c.values.iter().any(|v| !v.is_finite()) {
                return Err(StatsError::Contract(format!(
                    "fixed column `{}` has non-finite values",
                    c.name
                )));
            }
            names.push(c.name.clone());
        }
        let p = names.len();
        if n <= p {
            return Err(StatsError::Contract(format!(
                "{n} observations cannot identify {p} fixed effects"
            )));
        }

        let mut level_labels = Vec::new();
        let mut factor_of_level = Vec::new();
        let mut per_factor_index = Vec::new();
        for (fi, f) in data.factors.iter().enumerate() {
            if f.levels.len() != n {
                return Err(StatsError::Contract(format!(
                    "factor `{}` has {} rows, response has {n}",
                    f.name,
                    f.levels.len()
                )));
            }
            let distinct: BTreeSet<&str> = f.levels.iter().map(String::as_str).collect();
            if distinct.len() < 2 {
                return Err(StatsError::Contract(format!(
                    "random factor `{}` needs at least 2 levels, found {}",
                    f.name,
                    distinct.len()
                )));
            }
            let offset = level_labels.len();
            let sorted: Vec<&str> = distinct.into_iter().collect();
            for l in &sorted {
                level_labels.push((fi, l.to_string()));
                factor_of_level.push(fi);
            }
            let idx: Vec<usize> = f
                .levels
                .iter()
                .map(|l| offset + sorted.binary_search(&l.as_str()).expect("level present"))
                .collect();
            per_factor_index.push(idx);
        }
        let n_factors = data.factors.len();
        let q = level_labels.len();

        let mut x = vec![0.0; n * p];
        for r in 0..n {
            x[r * p] = 1.0;
            for (j, c) in data.fixed.iter().enumerate() {
                x[r * p + j + 1] = c.values[r];
            }
        }
        let mut z = vec![0usize; n * n_factors];
        for r in 0..n {
            for f in 0..n_factors {
                z[r * n_factors + f] = per_factor_index[f][r];
            }
        }
        let y = data.response.clone();

        let mut xtx = vec![0.0; p * p];
        let mut xty = vec![0.0; p];
        let mut ztz = vec![0.0; q * q];
        let mut ztx = vec![0.0; q * p];
        let mut zty = vec![0.0; q];
        for r in 0..n {
            let row = &x[r * p..(r + 1) * p];
            for i in 0..p {
                xty[i] += row[i] * y[r];
                for j in 0..p {
                    xtx[i * p + j] += row[i] * row[j];
                }
            }
            let zr = &z[r * n_factors..(r + 1) * n_factors];
            for &a in zr {
                zty[a] += y[r];
                for &b in zr {
                    ztz[a * q + b] += 1.0;
                }
                for j in 0..p {
                    ztx[a * p + j] += row[j];
                }
            }
        }

        check_rank(&xtx, p, &names)?;

        Ok((
            Self {
                n,
                p,
                q,
                x,
                y,
                z,
                n_factors,
                factor_of_level,
                xtx,
                xty,
                ztz,
                ztx,
                zty,
            },
            names,
            level_labels,
        ))
    }

    fn solve(&self, theta: &[f64]) -> Option<Solution> {
        let (n, p, q) = (self.n, self.p, self.q);
        let m = q + p;
        let lam: Vec<f64> = self
            .factor_of_level
            .iter()
            .map(|&f| theta[f].abs())
            .collect();

        let mut sys = vec![0.0; m * m];
        let mut rhs = vec![0.0; m];
        for a in 0..q {
            for b in 0..q {
                sys[a * m + b] = lam[a] * self.ztz[a * q + b] * lam[b];
            }
            sys[a * m + a] += 1.0;
            for j in 0..p {
                let v = lam[a] * self.ztx[a * p + j];
                sys[a * m + q + j] = v;
                sys[(q + j) * m + a] = v;
            }
            rhs[a] = lam[a] * self.zty[a];
        }
        for i in 0..p {
            for j in 0..p {
                sys[(q + i) * m + q + j] = self.xtx[i * p + j];
            }
            rhs[q + i] = self.xty[i];
        }

        let l = cholesky(&sys, m)?;
        let sol = cholesky_solve(&l, m, &rhs);
        let logdet_a: f64 = (0..q).map(|i| 2.0 * l[i * m + i].ln()).sum();
        let u = &sol[..q];
        let beta = sol[q..].to_vec();

        let mut r2: f64 = u.iter().map(|v| v * v).sum();
        for r in 0..n {
            let row = &self.x[r * p..(r + 1) * p];
            let mut fit: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum();
            for &lv in &self.z[r * self.n_factors..(r + 1) * self.n_factors] {
                fit += lam[lv] * u[lv];
            }
            let e = self.y[r] - fit;
            r2 += e * e;
        }
        let r2 = r2.max(f64::MIN_POSITIVE);
        let nf = n as f64;
        let deviance = logdet_a + nf * (1.0 + (2.0 * PI * r2 / nf).ln());

        // cov(beta) / sigma^2 is the lower-right block of sys^{-1}
        let inv = cholesky_inverse(&l, m);
        let mut beta_cov_scaled = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                beta_cov_scaled[i * p + j] = inv[(q + i) * m + q + j];
            }
        }
        let b = u.iter().zip(&lam).map(|(u, l)| u * l).collect();
        Some(Solution {
            deviance,
            beta,
            b,
            sigma2: r2 / nf,
            beta_cov_scaled,
        })
    }

    fn deviance(&self, theta: &[f64]) -> f64 {
        self.solve(theta).map_or(f64::INFINITY, |s| s.deviance)
    }
}

/// Incremental Cholesky on `X'X`; the first column whose pivot collapses is
/// reported together with the earlier columns.
fn check_rank(xtx: &[f64], p: usize, names: &[String]) -> Result<()> {
    let mut l = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let mut s = xtx[i * p + j];
            for k in 0..j {
                s -= l[i * p + k] * l[j * p + k];
            }
            if i == j {
                if s <= COLLINEAR_PIVOT * xtx[i * p + i].max(f64::MIN_POSITIVE) {
                    return Err(StatsError::SingularDesign {
                        column: names[i].clone(),
                        others: names[..i].to_vec(),
                    });
                }
                l[i * p + i] = s.sqrt();
            } else {
                l[i * p + j] = s / l[j * p + j];
            }
        }
    }
    Ok(())
}

/// Fits the model by maximum likelihood.
pub fn fit_lmm(data: &MixedModelData, opts: &LmmOptions) -> Result<LmmFit> {
    let (design, names, level_labels) = Design::build(data)?;
    let nf = design.n_factors;

    let (theta, iterations) = if let Some(t) = &opts.fixed_theta {
        if t.len() != nf {
            return Err(StatsError::Contract(format!(
                "fixed_theta has {} entries for {nf} factors",
                t.len()
            )));
        }
        (t.iter().map(|v| v.abs()).collect::<Vec<_>>(), 0)
    } else if nf == 0 {
        (Vec::new(), 0)
    } else {
        let start = match &opts.start_theta {
            Some(s) if s.len() == nf => s.clone(),
            Some(s) => {
                return Err(StatsError::Contract(format!(
                    "start_theta has {} entries for {nf} factors",
                    s.len()
                )))
            }
            None => vec![1.0; nf],
        };
        let nm = NelderMead {
            max_iter: opts.max_iter.unwrap_or(20_000),
            ..NelderMead::default()
        };
        let objective = |t: &[f64]| design.deviance(t);
        let mut best = nm.minimize(&start, objective);
        if !best.converged {
            let tail = best.trace.iter().rev().take(10).rev().copied().collect();
            return Err(StatsError::NoConvergence {
                iterations: best.iterations,
                trace: tail,
            });
        }
        // restart from the optimum to shake off a collapsed simplex
        let again = nm.minimize(&best.x, objective);
        let iterations = best.iterations + again.iterations;
        if again.f < best.f {
            best = again;
        }
        let mut theta: Vec<f64> = best.x.iter().map(|v| v.abs()).collect();
        let mut f_best = best.f;
        // the optimum may sit on the boundary theta_f = 0
        for f in 0..nf {
            let mut t = theta.clone();
            t[f] = 0.0;
            let v = design.deviance(&t);
            if v <= f_best + BOUNDARY_SLACK * (1.0 + f_best.abs()) {
                theta = t;
                f_best = v;
            }
        }
        (theta, iterations)
    };

    let sol = design
        .solve(&theta)
        .ok_or_else(|| StatsError::Numerical("penalized system is not positive definite".into()))?;
    if !sol.deviance.is_finite() {
        return Err(StatsError::Numerical(
            "non-finite deviance at optimum".into(),
        ));
    }

    let p = design.p;
    let fixed = names
        .into_iter()
        .enumerate()
        .map(|(i, name)| FixedEffect {
            name,
            estimate: sol.beta[i],
            std_error: (sol.sigma2 * sol.beta_cov_scaled[i * p + i])
                .max(0.0)
                .sqrt(),
        })
        .collect::<Vec<_>>();
    let random = level_labels
        .into_iter()
        .zip(&sol.b)
        .map(|((fi, level), &blup)| RandomIntercept {
            factor: data.factors[fi].name.clone(),
            level,
            blup,
        })
        .collect();
    let variance_components = data
        .factors
        .iter()
        .zip(&theta)
        .map(|(f, t)| VarianceComponent {
            name: f.name.clone(),
            variance: sol.sigma2 * t * t,
        })
        .collect::<Vec<_>>();

    let log_likelihood = -0.5 * sol.deviance;
    let k = (fixed.len() + variance_components.len() + 1) as f64;
    Ok(LmmFit {
        fixed,
        random,
        variance_components,
        residual_variance: sol.sigma2,
        log_likelihood,
        aic: 2.0 * k - 2.0 * log_likelihood,
        n_observations: design.n,
        theta,
        iterations,
    })
}
