use alloc::vec::Vec;

use thiserror::Error;

use crate::math;
use crate::sim::TrfModelParams;

/// Probability of a follow after receiving at most `n` retweets:
/// `p * (1 - (1 - q)^n)`.
pub fn trf_probability(params: TrfModelParams, n: u32) -> f64 {
    if n == 0 {
        return 0.0;
    }
    params.p * (1.0 - pow_int(1.0 - params.q, n))
}

fn pow_int(x: f64, n: u32) -> f64 {
    math::pow(x, n as f64)
}

/// How a row's counts relate to the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FitSemantics {
    /// `follows` out of `groups` followed after at most `n` retweets; each
    /// row is binomial with success probability `p * (1 - (1 - q)^n)`.
    #[default]
    AtMostN,
    /// Rows are retweet groups truncated at the follow: a group of size `n`
    /// with a follow followed exactly at its `n`-th retweet
    /// (`p * q * (1 - q)^(n - 1)`); one without a follow survived `n`
    /// retweets (`1 - p * (1 - (1 - q)^n)`).
    Truncated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FitRow {
    pub n: u32,
    pub groups: u64,
    pub follows: u64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct FitInput {
    pub semantics: FitSemantics,
    pub rows: Vec<FitRow>,
}

impl FitInput {
    pub fn new(semantics: FitSemantics, rows: impl IntoIterator<Item = (u32, u64, u64)>) -> Self {
        FitInput {
            semantics,
            rows: rows.into_iter().map(|(n, groups, follows)| FitRow { n, groups, follows }).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitReport {
    pub params: TrfModelParams,
    /// Negative log-likelihood at the optimum (binomial coefficients
    /// omitted).
    pub nll: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least two distinct retweet counts with groups to separate p from q")]
    Underdetermined,
    #[error("no follows in the data; p is pinned at 0")]
    AllZeroSuccesses,
    #[error("invalid row: {0}")]
    InvalidRow(&'static str),
}

struct Terms {
    // (success coefficient, failure coefficient, follows, non-follows)
    rows: Vec<(f64, f64, f64, f64)>,
}

impl Terms {
    fn new(input: &FitInput, q: f64) -> Self {
        let rows = input
            .rows
            .iter()
            .filter(|r| r.groups > 0)
            .map(|r| {
                let b = 1.0 - pow_int(1.0 - q, r.n);
                let a = match input.semantics {
                    FitSemantics::AtMostN => b,
                    FitSemantics::Truncated => q * pow_int(1.0 - q, r.n - 1),
                };
                (a, b, r.follows as f64, (r.groups - r.follows) as f64)
            })
            .collect();
        Terms { rows }
    }

    fn nll(&self, p: f64) -> f64 {
        let mut s = 0.0;
        for &(a, b, f, m) in &self.rows {
            if f > 0.0 {
                s -= f * math::log(p * a);
            }
            if m > 0.0 {
                s -= m * math::log1p(-p * b);
            }
        }
        if s.is_nan() {
            f64::INFINITY
        } else {
            s
        }
    }

    /// d(log-likelihood)/dp.
    fn score(&self, p: f64) -> f64 {
        let mut s = 0.0;
        for &(_, b, f, m) in &self.rows {
            s += f / p - m * b / (1.0 - p * b);
        }
        s
    }

    /// Maximizer over `p in (0, 1]`; the log-likelihood is concave in `p`.
    fn best_p(&self) -> f64 {
        let bmax = self.rows.iter().map(|r| if r.3 > 0.0 { r.1 } else { 0.0 }).fold(0.0, f64::max);
        let hi_bound = if bmax > 0.0 { (1.0 / bmax).min(1.0) } else { 1.0 };
        if self.score(hi_bound) >= 0.0 {
            return hi_bound;
        }
        let (mut lo, mut hi) = (0.0, hi_bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.score(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn profile(input: &FitInput, q: f64) -> (f64, f64) {
    let terms = Terms::new(input, q);
    let p = terms.best_p();
    (terms.nll(p), p)
}

/// Maximum-likelihood `(p, q)`.
///
/// `p` is profiled out exactly for each `q`; `q` is located on a
/// logarithmic grid over `(0, 1]` and refined by golden-section search.
pub fn fit_pq(data: &FitInput) -> Result<FitReport, FitError> {
    for r in &data.rows {
        if r.n == 0 {
            return Err(FitError::InvalidRow("n must be at least 1"));
        }
        if r.follows > r.groups {
            return Err(FitError::InvalidRow("follows exceed groups"));
        }
    }
    let mut sizes: Vec<u32> = data.rows.iter().filter(|r| r.groups > 0).map(|r| r.n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 2 {
        return Err(FitError::Underdetermined);
    }
    if data.rows.iter().all(|r| r.follows == 0) {
        return Err(FitError::AllZeroSuccesses);
    }

    const GRID: usize = 400;
    const Q_MIN: f64 = 1e-9;
    let grid: Vec<f64> = (0..=GRID)
        .map(|i| math::exp(math::log(Q_MIN) * (1.0 - i as f64 / GRID as f64)))
        .collect();
    let values: Vec<f64> = grid.iter().map(|&q| profile(data, q).0).collect();
    let best = (0..values.len())
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("grid is not empty");
    let mut lo = grid[best.saturating_sub(1)];
    let mut hi = grid[(best + 1).min(GRID)];

    let phi = (math::sqrt(5.0) - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = profile(data, x1).0;
    let mut f2 = profile(data, x2).0;
    for _ in 0..200 {
        if hi - lo <= 1e-15 * hi.max(1e-300) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = profile(data, x1).0;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = profile(data, x2).0;
        }
    }
    let mut q = 0.5 * (lo + hi);
    let (mut nll, mut p) = profile(data, q);
    // the grid end points are admissible optima too
    for &edge in &[grid[0], grid[GRID]] {
        let (v, pe) = profile(data, edge);
        if v < nll {
            nll = v;
            p = pe;
            q = edge;
        }
    }
    Ok(FitReport { params: TrfModelParams { p, q }, nll })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: f64, q: f64) -> TrfModelParams {
        TrfModelParams { p, q }
    }

    #[test]
    fn closed_forms() {
        assert_eq!(trf_probability(params(0.5, 0.5), 1), 0.25);
        assert_eq!(trf_probability(params(0.3, 1.0), 7), 0.3);
        assert_eq!(trf_probability(params(0.3, 0.2), 0), 0.0);
        let nr = TrfModelParams::NONRECIPROCAL_24H;
        assert!((trf_probability(nr, 1) - 0.16e-4).abs() < 1e-18);
        assert!((trf_probability(params(0.3, 0.2), 100_000) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        let one = FitInput::new(FitSemantics::AtMostN, [(1, 100, 3)]);
        assert_eq!(fit_pq(&one), Err(FitError::Underdetermined));
        let zero = FitInput::new(FitSemantics::AtMostN, [(1, 100, 0), (2, 100, 0)]);
        assert_eq!(fit_pq(&zero), Err(FitError::AllZeroSuccesses));
        let bad = FitInput::new(FitSemantics::AtMostN, [(1, 1, 3), (2, 100, 0)]);
        assert!(matches!(fit_pq(&bad), Err(FitError::InvalidRow(_))));
    }
}
