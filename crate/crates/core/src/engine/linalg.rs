//! Least squares and logistic regression on column-major designs.
//!
//! OLS uses Householder QR with column pivoting by largest remaining column
//! norm, so a rank drop is reported together with the columns that fall
//! behind the pivot order. The intercept is handled by centering.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Relative size below which a pivot counts as zero.
const RANK_TOL: f64 = 1e-9;
pub const PROPENSITY_CLIP: (f64, f64) = (0.01, 0.99);
pub const IRLS_MAX_ITER: usize = 50;
pub const IRLS_STEP_TOL: f64 = 1e-8;
/// Share of clipped fitted probabilities that signals separation.
pub const SEPARATION_SHARE: f64 = 0.9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("design is rank deficient; dependent columns {dependent:?}")]
    RankDeficient { dependent: Vec<usize> },
    #[error("{rows} rows cannot support {cols} columns plus an intercept")]
    TooFewRows { rows: usize, cols: usize },
    #[error("column lengths disagree")]
    DimensionMismatch,
    #[error("{share:.0}% of fitted probabilities sit at a clip bound")]
    SeparationDetected { share: f64 },
    #[error("treatment must be coded 0/1")]
    NonBinaryOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub residual_variance: f64,
    pub std_errors: Vec<f64>,
    /// Columns removed by the rank fallback; their coefficients are 0.
    pub dropped: Vec<usize>,
}

impl OlsFit {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept + x.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum::<f64>()
    }
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn check_shape(x: &[Vec<f64>], n: usize) -> Result<(), LinalgError> {
    if x.iter().any(|c| c.len() != n) {
        return Err(LinalgError::DimensionMismatch);
    }
    if n < x.len() + 1 {
        return Err(LinalgError::TooFewRows { rows: n, cols: x.len() });
    }
    Ok(())
}

/// Least squares of `y` on the columns of `x` plus an intercept.
pub fn ols(x: &[Vec<f64>], y: &[f64]) -> Result<OlsFit, LinalgError> {
    let n = y.len();
    check_shape(x, n)?;
    let p = x.len();
    let x_mean: Vec<f64> = x.iter().map(|c| mean(c)).collect();
    let y_mean = mean(y);
    let mut a: Vec<Vec<f64>> = x.iter().zip(&x_mean).map(|(c, m)| c.iter().map(|v| v - m).collect()).collect();
    let mut qty: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let mut perm: Vec<usize> = (0..p).collect();

    let scale = a.iter().map(|c| norm2(c)).fold(0.0, f64::max).sqrt();
    let mut rank = p;
    for k in 0..p {
        let (best, best_norm) = (k..p).map(|j| (j, norm2(&a[j][k..]))).fold((k, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        a.swap(k, best);
        perm.swap(k, best);
        let norm = best_norm.sqrt();
        if norm <= RANK_TOL * scale || norm == 0.0 {
            rank = k;
            break;
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v = a[k][k..].to_vec();
        v[0] -= alpha;
        let vv = norm2(&v);
        for col in a.iter_mut().skip(k + 1).chain(std::iter::once(&mut qty)) {
            reflect(&v, vv, &mut col[k..]);
        }
        a[k][k] = alpha;
        a[k][k + 1..].iter_mut().for_each(|e| *e = 0.0);
    }
    if rank < p {
        return Err(LinalgError::RankDeficient { dependent: perm[rank..].to_vec() });
    }

    // Back substitution for R β = Qᵀy and for R⁻¹ (standard errors).
    let r = |i: usize, j: usize| a[j][i];
    let mut beta_perm = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = (i + 1..p).map(|j| r(i, j) * beta_perm[j]).sum();
        beta_perm[i] = (qty[i] - s) / r(i, i);
    }
    let mut rinv = vec![vec![0.0; p]; p];
    for c in 0..p {
        for i in (0..=c).rev() {
            let s: f64 = (i + 1..=c).map(|j| r(i, j) * rinv[j][c]).sum();
            rinv[i][c] = (if i == c { 1.0 } else { 0.0 } - s) / r(i, i);
        }
    }
    let dof = (n - p - 1).max(1) as f64;
    let rss: f64 = qty[p..].iter().map(|v| v * v).sum();
    let sigma2 = rss / dof;

    let mut coefficients = vec![0.0; p];
    let mut std_errors = vec![0.0; p];
    for (k, &orig) in perm.iter().enumerate() {
        coefficients[orig] = beta_perm[k];
        std_errors[orig] = (sigma2 * rinv[k].iter().map(|v| v * v).sum::<f64>()).sqrt();
    }
    let intercept = y_mean - x_mean.iter().zip(&coefficients).map(|(m, b)| m * b).sum::<f64>();
    Ok(OlsFit { coefficients, intercept, residual_variance: sigma2, std_errors, dropped: Vec::new() })
}

/// [`ols`], dropping the dependent columns and refitting once on a rank drop.
pub fn ols_with_fallback(x: &[Vec<f64>], y: &[f64]) -> Result<OlsFit, LinalgError> {
    match ols(x, y) {
        Err(LinalgError::RankDeficient { dependent }) => {
            let keep: Vec<usize> = (0..x.len()).filter(|j| !dependent.contains(j)).collect();
            let sub: Vec<Vec<f64>> = keep.iter().map(|&j| x[j].clone()).collect();
            let fit = ols(&sub, y)?;
            let mut coefficients = vec![0.0; x.len()];
            let mut std_errors = vec![0.0; x.len()];
            for (k, &j) in keep.iter().enumerate() {
                coefficients[j] = fit.coefficients[k];
                std_errors[j] = fit.std_errors[k];
            }
            let mut dropped = dependent;
            dropped.sort_unstable();
            Ok(OlsFit { coefficients, std_errors, dropped, ..fit })
        }
        other => other,
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|e| e * e).sum()
}

fn reflect(v: &[f64], vv: f64, col: &mut [f64]) {
    let d: f64 = v.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
    let f = 2.0 * d / vv;
    for (c, a) in col.iter_mut().zip(v) {
        *c -= f * a;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl LogisticFit {
    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.intercept + x.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum::<f64>())
    }

    /// Probability clipped to [`PROPENSITY_CLIP`].
    pub fn propensity(&self, x: &[f64]) -> f64 {
        self.probability(x).clamp(PROPENSITY_CLIP.0, PROPENSITY_CLIP.1)
    }
}

/// Logistic regression of a 0/1 outcome by iteratively reweighted least squares.
pub fn logistic(x: &[Vec<f64>], a: &[f64]) -> Result<LogisticFit, LinalgError> {
    let n = a.len();
    check_shape(x, n)?;
    if a.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(LinalgError::NonBinaryOutcome);
    }
    let p = x.len() + 1;
    let design = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { x[j - 1][i] });
    let target = DVector::from_column_slice(a);
    let mut beta = DVector::zeros(p);
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=IRLS_MAX_ITER {
        iterations = it;
        let eta = &design * &beta;
        let pi = eta.map(sigmoid);
        let w = pi.map(|v| (v * (1.0 - v)).max(1e-12));
        let mut weighted = design.clone();
        for (i, mut row) in weighted.row_iter_mut().enumerate() {
            row *= w[i];
        }
        let hessian = design.transpose() * weighted;
        let grad = design.transpose() * (&target - &pi);
        let Some(chol) = hessian.cholesky() else { break };
        let step = chol.solve(&grad);
        beta += &step;
        if step.amax() < IRLS_STEP_TOL {
            converged = true;
            break;
        }
    }
    let fit = LogisticFit { intercept: beta[0], coefficients: beta.iter().skip(1).copied().collect(), converged, iterations };
    let clipped = (0..n)
        .filter(|&i| {
            let row: Vec<f64> = x.iter().map(|c| c[i]).collect();
            let q = fit.probability(&row);
            q <= PROPENSITY_CLIP.0 || q >= PROPENSITY_CLIP.1
        })
        .count();
    let share = clipped as f64 / n as f64;
    if share > SEPARATION_SHARE {
        return Err(LinalgError::SeparationDetected { share: share * 100.0 });
    }
    Ok(fit)
}

/// Two-sided standard-normal tail probability `P(|Z| ≥ |z|)`.
pub fn normal_two_sided_p(z: f64) -> f64 {
    libm::erfc(z.abs() / std::f64::consts::SQRT_2)
}
