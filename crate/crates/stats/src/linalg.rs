//! Small dense symmetric solvers. Matrices are row-major `n * n` slices.

/// Lower Cholesky factor of a symmetric positive-definite matrix, or `None`
/// when a pivot is not strictly positive.
pub(crate) fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Solves `L L^T x = b` given the lower factor `L`.
pub(crate) fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    y
}

/// Inverse of `L L^T`, column by column.
pub(crate) fn cholesky_inverse(l: &[f64], n: usize) -> Vec<f64> {
    let mut inv = vec![0.0; n * n];
    let mut e = vec![0.0; n];
    for c in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[c] = 1.0;
        let col = cholesky_solve(l, n, &e);
        for r in 0..n {
            inv[r * n + c] = col[r];
        }
    }
    inv
}

/// Ordinary least squares via the normal equations. Returns coefficients and
/// the residual sum of squares, or `None` for a rank-deficient design.
pub(crate) fn ols(columns: &[&[f64]], y: &[f64]) -> Option<(Vec<f64>, f64)> {
    let p = columns.len();
    let mut xtx = vec![0.0; p * p];
    let mut xty = vec![0.0; p];
    for i in 0..p {
        for j in 0..=i {
            let v: f64 = columns[i].iter().zip(columns[j]).map(|(a, b)| a * b).sum();
            xtx[i * p + j] = v;
            xtx[j * p + i] = v;
        }
        xty[i] = columns[i].iter().zip(y).map(|(a, b)| a * b).sum();
    }
    let l = cholesky(&xtx, p)?;
    let beta = cholesky_solve(&l, p, &xty);
    let rss = y
        .iter()
        .enumerate()
        .map(|(r, &yr)| {
            let fit: f64 = columns.iter().zip(&beta).map(|(c, b)| c[r] * b).sum();
            (yr - fit) * (yr - fit)
        })
        .sum();
    Some((beta, rss))
}
