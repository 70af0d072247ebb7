use alloc::vec::Vec;

use super::trf::TrfDetection;
use super::DetectError;
use crate::event::{EventKind, EventLog};

/// Empirical CDF evaluated at fixed bin edges.
#[derive(Clone, Debug, PartialEq)]
pub struct Cdf {
    pub edges: Vec<f64>,
    /// Fraction of samples `<= edge`, one per edge.
    pub values: Vec<f64>,
    sorted: Vec<f64>,
}

impl Cdf {
    pub fn count(&self) -> usize {
        self.sorted.len()
    }

    /// Fraction of samples `<= x`.
    pub fn at(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    /// Fraction of samples `< x`.
    pub fn below(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v < x) as f64 / self.sorted.len() as f64
    }
}

pub fn empirical_cdf(samples: &[f64], edges: &[f64]) -> Result<Cdf, DetectError> {
    if samples.is_empty() {
        return Err(DetectError::EmptyInput);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut cdf = Cdf { edges: edges.to_vec(), values: Vec::new(), sorted };
    cdf.values = edges.iter().map(|&e| cdf.at(e)).collect();
    Ok(cdf)
}

/// `(TRF latency, retweet latency)` CDFs: `t_l - t_r` over detections and
/// `t_r - t_s` over every retweet in the log.
pub fn latency_histograms(detections: &[TrfDetection], log: &EventLog, edges: &[f64]) -> Result<(Cdf, Cdf), DetectError> {
    let trf: Vec<f64> = detections.iter().map(|d| d.t_l - d.t_r).collect();
    let rt: Vec<f64> = log
        .iter()
        .filter_map(|e| match e.kind {
            EventKind::Retweet { origin_t, .. } => Some(e.t - origin_t),
            _ => None,
        })
        .collect();
    Ok((empirical_cdf(&trf, edges)?, empirical_cdf(&rt, edges)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: f64 = 3600.0;

    #[test]
    fn zero_latency() {
        let c = empirical_cdf(&[0.0], &[0.0]).unwrap();
        assert_eq!(c.values, [1.0]);
    }

    #[test]
    fn threshold_fraction() {
        let c = empirical_cdf(&[H, 2.0 * H, 30.0 * H], &[24.0 * H]).unwrap();
        assert!((c.values[0] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.below(H), 0.0);
        assert_eq!(c.at(H), 1.0 / 3.0);
    }

    #[test]
    fn empty_is_error() {
        assert_eq!(empirical_cdf(&[], &[1.0]), Err(DetectError::EmptyInput));
    }
}
