//! Diagonal-covariance Gaussian mixtures fitted by expectation maximization.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, StatsError};

#[derive(Debug, Clone, PartialEq)]
pub struct GmmOptions {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Lower bound applied to every per-axis variance.
    pub var_floor: f64,
    /// Stop once the log-likelihood gain falls below `tol * |loglik|`.
    pub tol: f64,
}

impl Default for GmmOptions {
    fn default() -> Self {
        Self {
            k: 2,
            seed: 0,
            max_iter: 500,
            var_floor: 1e-6,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmmComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmmFit {
    /// Sorted by the first coordinate of the mean, ascending.
    pub components: Vec<GmmComponent>,
    pub loglik_trace: Vec<f64>,
    pub converged: bool,
    pub n_points: usize,
}

impl GmmFit {
    pub fn log_likelihood(&self) -> f64 {
        *self.loglik_trace.last().expect("trace is never empty")
    }

    /// Standard error of each component mean, using the soft counts
    /// `weight * n`.
    pub fn mean_sem(&self) -> Vec<Vec<f64>> {
        self.components
            .iter()
            .map(|c| {
                let eff = c.weight * self.n_points as f64;
                c.variance.iter().map(|v| (v / eff).sqrt()).collect()
            })
            .collect()
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++ seeding: the first center uniformly, then proportional to the
/// squared distance to the nearest chosen center.
fn seed_centers(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centers = vec![points[rng.random_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut idx = points.len() - 1;
            for (i, &d) in d2.iter().enumerate() {
                if target < d {
                    idx = i;
                    break;
                }
                target -= d;
            }
            idx
        } else {
            rng.random_range(0..points.len())
        };
        centers.push(points[next].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, centers.last().unwrap()));
        }
    }
    centers
}

fn log_density(x: &[f64], c: &GmmComponent) -> f64 {
    let mut s = c.weight.ln();
    for ((xi, m), v) in x.iter().zip(&c.mean).zip(&c.variance) {
        s -= 0.5 * ((2.0 * PI * v).ln() + (xi - m) * (xi - m) / v);
    }
    s
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Fits a `k`-component diagonal mixture. Components come back sorted by the
/// mean of the first axis.
pub fn gmm_fit(points: &[Vec<f64>], opts: &GmmOptions) -> Result<GmmFit> {
    let k = opts.k;
    if k == 0 {
        return Err(StatsError::Contract("k must be positive".into()));
    }
    if points.len() < 2 * k {
        return Err(StatsError::Contract(format!(
            "{} points cannot support {k} components (need at least {})",
            points.len(),
            2 * k
        )));
    }
    let dim = points[0].len();
    if dim == 0
        || points
            .iter()
            .any(|p| p.len() != dim || p.iter().any(|v| !v.is_finite()))
    {
        return Err(StatsError::Contract(
            "points must be finite and share one positive dimension".into(),
        ));
    }
    if !(opts.var_floor > 0.0) {
        return Err(StatsError::Contract("var_floor must be positive".into()));
    }

    let mut distinct = points.to_vec();
    distinct.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    distinct.dedup();
    if distinct.len() < k {
        return Err(StatsError::DegenerateMixture(format!(
            "only {} distinct points for {k} components",
            distinct.len()
        )));
    }

    let n = points.len() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let global_mean: Vec<f64> = (0..dim)
        .map(|d| points.iter().map(|p| p[d]).sum::<f64>() / n)
        .collect();
    let global_var: Vec<f64> = (0..dim)
        .map(|d| {
            let v = points
                .iter()
                .map(|p| (p[d] - global_mean[d]).powi(2))
                .sum::<f64>()
                / n;
            v.max(opts.var_floor)
        })
        .collect();
    let mut comps: Vec<GmmComponent> = seed_centers(points, k, &mut rng)
        .into_iter()
        .map(|mean| GmmComponent {
            weight: 1.0 / k as f64,
            mean,
            variance: global_var.clone(),
        })
        .collect();

    let mut trace = Vec::new();
    let mut resp = vec![0.0; points.len() * k];
    let mut lp = vec![0.0; k];
    let mut converged = false;
    for _ in 0..opts.max_iter {
        // E step
        let mut ll = 0.0;
        for (i, x) in points.iter().enumerate() {
            for (j, c) in comps.iter().enumerate() {
                lp[j] = log_density(x, c);
            }
            let z = log_sum_exp(&lp);
            ll += z;
            for j in 0..k {
                resp[i * k + j] = (lp[j] - z).exp();
            }
        }
        if let Some(&prev) = trace.last() {
            let gain: f64 = ll - prev;
            trace.push(ll);
            if gain.abs() <= opts.tol * ll.abs() {
                converged = true;
                break;
            }
        } else {
            trace.push(ll);
        }

        // M step
        for (j, c) in comps.iter_mut().enumerate() {
            let nk: f64 = (0..points.len()).map(|i| resp[i * k + j]).sum();
            if nk <= 1e-12 * n {
                return Err(StatsError::DegenerateMixture(format!(
                    "component {j} lost all responsibility"
                )));
            }
            c.weight = nk / n;
            for d in 0..dim {
                c.mean[d] = points
                    .iter()
                    .enumerate()
                    .map(|(i, p)| resp[i * k + j] * p[d])
                    .sum::<f64>()
                    / nk;
            }
            for d in 0..dim {
                let v = points
                    .iter()
                    .enumerate()
                    .map(|(i, p)| resp[i * k + j] * (p[d] - c.mean[d]).powi(2))
                    .sum::<f64>()
                    / nk;
                c.variance[d] = v.max(opts.var_floor);
            }
        }
    }

    for a in 0..k {
        for b in a + 1..k {
            if sq_dist(&comps[a].mean, &comps[b].mean) == 0.0
                && comps[a].variance == comps[b].variance
            {
                return Err(StatsError::DegenerateMixture(
                    "components collapsed onto identical parameters".into(),
                ));
            }
        }
    }
    comps.sort_by(|a, b| a.mean[0].total_cmp(&b.mean[0]));
    Ok(GmmFit {
        components: comps,
        loglik_trace: trace,
        converged,
        n_points: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_points_are_degenerate() {
        let pts = vec![vec![1.0, 2.0]; 20];
        assert!(matches!(
            gmm_fit(&pts, &GmmOptions::default()),
            Err(StatsError::DegenerateMixture(_))
        ));
    }

    #[test]
    fn too_few_points() {
        let pts = vec![vec![1.0], vec![2.0], vec![3.0]];
        assert!(matches!(
            gmm_fit(&pts, &GmmOptions::default()),
            Err(StatsError::Contract(_))
        ));
    }

    #[test]
    fn two_tight_groups() {
        let mut pts = Vec::new();
        for i in 0..50 {
            let e = (i % 5) as f64 * 0.1;
            pts.push(vec![10.0 + e, 1.0 - e]);
            pts.push(vec![0.0 - e, 5.0 + e]);
        }
        let fit = gmm_fit(&pts, &GmmOptions::default()).unwrap();
        assert!((fit.components[0].mean[0] - -0.2).abs() < 1e-6);
        assert!((fit.components[1].mean[0] - 10.2).abs() < 1e-6);
        let w: f64 = fit.components.iter().map(|c| c.weight).sum();
        assert!((w - 1.0).abs() < 1e-12);
        assert!(fit.loglik_trace.windows(2).all(|w| w[1] >= w[0]));
    }
}
