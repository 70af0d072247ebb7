use alloc::vec::Vec;
use core::str::FromStr;

use super::sample::UndirectedView;
use super::scc::tarjan_scc;
use super::{TopologyError, DEFAULT_RESTART};
use crate::graph::TemporalDigraph;
use crate::math;
use crate::rng::substream_indexed;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SamplingMethod {
    RandomWalk { restart: f64 },
    Snowball,
}

impl FromStr for SamplingMethod {
    type Err = &'static str;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random_walk" | "random-walk" => Ok(SamplingMethod::RandomWalk { restart: DEFAULT_RESTART }),
            "snowball" => Ok(SamplingMethod::Snowball),
            _ => Err("sampling method must be random_walk or snowball"),
        }
    }
}

/// Mean largest-SCC fraction of samples of one size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub size: usize,
    pub mean_fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub repetitions: usize,
}

/// For each sample size, the mean over `repetitions` weakly connected
/// samples of the fraction of sampled users in the sample's largest SCC,
/// with a 95% normal-approximation interval. Repetition `r` of size index
/// `i` draws its start node and walk from its own sub-stream of `seed`.
pub fn scc_fraction_curve(
    graph: &TemporalDigraph,
    method: SamplingMethod,
    sizes: &[usize],
    repetitions: usize,
    seed: u64,
) -> Result<Vec<CurvePoint>, TopologyError> {
    if repetitions == 0 {
        return Err(TopologyError::InvalidInput("repetitions must be positive"));
    }
    if sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(TopologyError::InvalidInput("sizes must be ascending"));
    }
    let view = UndirectedView::new(graph);
    if view.is_empty() {
        return Err(TopologyError::InvalidInput("empty graph"));
    }
    let mut out = Vec::with_capacity(sizes.len());
    for (i, &size) in sizes.iter().enumerate() {
        let mut fractions = Vec::with_capacity(repetitions);
        for r in 0..repetitions {
            let index = ((i as u64) << 32) | r as u64;
            let mut rng = substream_indexed(seed, "sample/curve", index);
            let start = view.pick_start(&mut rng);
            let nodes = match method {
                SamplingMethod::RandomWalk { restart } => view.random_walk_from(start, size, restart, &mut rng)?,
                SamplingMethod::Snowball => view.snowball_from(start, size)?,
            };
            fractions.push(tarjan_scc(&graph.induced(&nodes)).largest_fraction);
        }
        let (mean, se) = math::mean_se(&fractions);
        out.push(CurvePoint {
            size,
            mean_fraction: mean,
            ci_low: mean - math::Z95 * se,
            ci_high: mean + math::Z95 * se,
            repetitions,
        });
    }
    Ok(out)
}
