//! Parallel batches and the two-sided advantage estimator.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::ConfigError;
use crate::seed::{substream, trial_seed, Stream};

/// Which of the two compared systems a trial runs against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// `|p_a - p_b|` with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub trials: usize,
    pub ones_a: usize,
    pub ones_b: usize,
    pub p_a: f64,
    pub p_b: f64,
    pub estimate: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn from_counts(trials: usize, ones_a: usize, ones_b: usize) -> Estimate {
        let n = trials as f64;
        let p_a = ones_a as f64 / n;
        let p_b = ones_b as f64 / n;
        let stderr = (p_a * (1.0 - p_a) / n + p_b * (1.0 - p_b) / n).sqrt();
        Estimate {
            trials,
            ones_a,
            ones_b,
            p_a,
            p_b,
            estimate: (p_a - p_b).abs(),
            stderr,
        }
    }
}

/// Runs `f(index, seed)` for `trials` indices in parallel; results are in
/// index order. Seeds are `trial_seed(base, index)`.
pub fn run_batch<T: Send>(trials: usize, base: u64, f: impl Fn(usize, u64) -> T + Sync) -> Vec<T> {
    (0..trials)
        .into_par_iter()
        .map(|i| f(i, trial_seed(base, i as u64)))
        .collect()
}

/// Estimates the advantage of a distinguisher given as `run(side, seed)`,
/// returning its output bit. Each side draws its seeds from its own
/// sub-stream of `base`, so no seed is shared between the sides.
pub fn estimate_advantage(
    trials: usize,
    base: u64,
    run: impl Fn(Side, u64) -> bool + Sync,
) -> Result<Estimate, ConfigError> {
    if trials < 100 {
        return Err(ConfigError::Other(format!(
            "advantage estimation needs at least 100 trials, got {trials}"
        )));
    }
    let count = |side: Side, stream: Stream| {
        run_batch(trials, substream(base, stream), |_, seed| run(side, seed))
            .into_iter()
            .filter(|&b| b)
            .count()
    };
    let ones_a = count(Side::A, Stream::SideA);
    let ones_b = count(Side::B, Stream::SideB);
    Ok(Estimate::from_counts(trials, ones_a, ones_b))
}
