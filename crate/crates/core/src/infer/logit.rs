use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use super::linalg::{cholesky, inverse_diagonal, solve};
use crate::math;

/// A fitted logistic regression. Index 0 is the intercept; index `i >= 1`
/// is feature column `i - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogisticModel {
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub converged: bool,
    pub iterations: u32,
    pub log_likelihood: f64,
}

impl LogisticModel {
    pub fn linear_predictor(&self, x: &[f64]) -> f64 {
        self.coefficients[0] + x.iter().zip(&self.coefficients[1..]).map(|(a, b)| a * b).sum::<f64>()
    }

    /// `P(y = 1 | x)`.
    pub fn predict(&self, x: &[f64]) -> f64 {
        sigmoid(self.linear_predictor(x))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LogitError {
    #[error("data are separable: coefficient magnitude exceeded {0}")]
    Separable(f64),
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error("model did not converge")]
    NotConverged,
}

const MAX_ITER: u32 = 100;
const GRAD_TOL: f64 = 1e-8;
const DIVERGENCE: f64 = 30.0;

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + math::exp(-z))
    } else {
        let e = math::exp(z);
        e / (1.0 + e)
    }
}

// log(1 + exp(z)) without overflow
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + math::log1p(math::exp(-z))
    } else {
        math::log1p(math::exp(z))
    }
}

struct Pass {
    grad: Vec<f64>,
    hess: Vec<f64>,
    loglik: f64,
}

fn pass<R: AsRef<[f64]>>(rows: &[R], labels: &[bool], beta: &[f64]) -> Pass {
    let k = beta.len();
    let mut grad = vec![0.0; k];
    let mut hess = vec![0.0; k * k];
    let mut loglik = 0.0;
    let mut x = vec![0.0; k];
    for (row, &y) in rows.iter().zip(labels) {
        x[0] = 1.0;
        x[1..].copy_from_slice(row.as_ref());
        let eta: f64 = x.iter().zip(beta).map(|(a, b)| a * b).sum();
        let mu = sigmoid(eta);
        let w = mu * (1.0 - mu);
        let r = if y { 1.0 - mu } else { -mu };
        loglik += if y { -softplus(-eta) } else { -softplus(eta) };
        for i in 0..k {
            grad[i] += r * x[i];
            let wx = w * x[i];
            for j in 0..=i {
                hess[i * k + j] += wx * x[j];
            }
        }
    }
    for i in 0..k {
        for j in 0..i {
            hess[j * k + i] = hess[i * k + j];
        }
    }
    Pass { grad, hess, loglik }
}

/// Logistic regression with an implicit intercept, fitted by Newton's
/// method (iteratively reweighted least squares).
///
/// Stops when the gradient's largest component falls below `1e-8`, or when
/// a Newton step no longer changes the coefficients at machine precision;
/// gives up after 100 iterations with `converged = false`. Standard errors
/// come from the inverse observed information at the final coefficients.
pub fn logistic_fit<R: AsRef<[f64]>>(features: &[R], labels: &[bool]) -> Result<LogisticModel, LogitError> {
    if features.len() != labels.len() {
        return Err(LogitError::InvalidInput("feature and label counts differ"));
    }
    let cols = features.first().map_or(0, |r| r.as_ref().len());
    if features.iter().any(|r| r.as_ref().len() != cols) {
        return Err(LogitError::InvalidInput("rows have different lengths"));
    }
    if features.iter().any(|r| r.as_ref().iter().any(|v| !v.is_finite())) {
        return Err(LogitError::InvalidInput("non-finite feature value"));
    }
    let k = cols + 1;
    if features.len() < k + 1 {
        return Err(LogitError::InvalidInput("need more rows than coefficients"));
    }
    for c in 0..cols {
        let first = features[0].as_ref()[c];
        if features.iter().all(|r| r.as_ref()[c] == first) {
            return Err(LogitError::RankDeficient);
        }
    }

    let mut beta = vec![0.0; k];
    let mut converged = false;
    let mut iterations = 0;
    let mut current = pass(features, labels, &beta);
    while iterations < MAX_ITER {
        let gmax = current.grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gmax < GRAD_TOL {
            converged = true;
            break;
        }
        let l = cholesky(&current.hess, k).ok_or(if iterations == 0 {
            LogitError::RankDeficient
        } else {
            LogitError::Separable(DIVERGENCE)
        })?;
        let step = solve(&l, k, &current.grad);
        iterations += 1;
        let mut moved = false;
        for (b, d) in beta.iter_mut().zip(&step) {
            let next = *b + d;
            if next != *b {
                moved = true;
            }
            *b = next;
        }
        if beta.iter().any(|b| b.abs() > DIVERGENCE) {
            return Err(LogitError::Separable(DIVERGENCE));
        }
        current = pass(features, labels, &beta);
        if !moved {
            converged = true;
            break;
        }
    }
    let l = cholesky(&current.hess, k).ok_or(LogitError::RankDeficient)?;
    let standard_errors = inverse_diagonal(&l, k).into_iter().map(math::sqrt).collect();
    Ok(LogisticModel {
        coefficients: beta,
        standard_errors,
        converged,
        iterations,
        log_likelihood: current.loglik,
    })
}

/// Odds ratio of one feature with its Wald interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OddsRatio {
    /// Coefficient index (1-based feature position).
    pub factor: usize,
    pub odds_ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Two-sided Wald test of a zero coefficient.
    pub p_value: f64,
    /// The standard error was zero and the interval collapsed to a point.
    pub degenerate: bool,
}

/// `exp(coef)` per feature with the interval `exp(coef +- z * se)`, where
/// `z = 1.96` at the 0.95 level.
pub fn odds_ratios(model: &LogisticModel, level: f64) -> Result<Vec<OddsRatio>, LogitError> {
    if !model.converged {
        return Err(LogitError::NotConverged);
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(LogitError::InvalidInput("confidence level must lie in (0, 1)"));
    }
    let z = if level == 0.95 { math::Z95 } else { math::normal_quantile(0.5 + level / 2.0) };
    Ok((1..model.coefficients.len())
        .map(|i| {
            let b = model.coefficients[i];
            let se = model.standard_errors[i];
            let degenerate = se == 0.0;
            let p_value = if degenerate {
                if b == 0.0 { 1.0 } else { 0.0 }
            } else {
                math::erfc((b / se).abs() / core::f64::consts::SQRT_2)
            };
            OddsRatio {
                factor: i,
                odds_ratio: math::exp(b),
                ci_low: math::exp(b - z * se),
                ci_high: math::exp(b + z * se),
                p_value,
                degenerate,
            }
        })
        .collect())
}
