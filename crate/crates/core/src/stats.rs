//! Small numeric helpers shared by the analyses.

use rand::Rng;
use rayon::prelude::*;

use crate::rng;

pub const DEFAULT_BOOTSTRAP: usize = 1000;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Linearly interpolated quantile of sorted data (`q` in [0, 1]).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = pos - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

/// Percentile interval over bootstrap replicates.
pub fn percentile_interval(mut replicates: Vec<f64>, confidence: f64) -> (f64, f64) {
    replicates.sort_by(f64::total_cmp);
    let alpha = (1.0 - confidence) / 2.0;
    (
        quantile_sorted(&replicates, alpha),
        quantile_sorted(&replicates, 1.0 - alpha),
    )
}

/// Resample `n` indices with replacement `b` times and evaluate `statistic`
/// on each resample. Replicate `i` always uses stream `i` of the named
/// substream, so the result does not depend on thread scheduling.
pub fn bootstrap<T, F>(n: usize, b: usize, seed: u64, stream: &str, statistic: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[usize]) -> T + Sync,
{
    (0..b)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::replicate(seed, stream, i as u64);
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            statistic(&idx)
        })
        .collect()
}
