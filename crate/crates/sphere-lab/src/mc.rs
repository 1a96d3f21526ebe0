//! Deterministic chunked Monte Carlo driving, plus interval estimates for
//! proportions.
//!
//! A run of `total` draws is cut into fixed-size chunks; chunk `j` draws from
//! `stream.substream(j)`. The chunk layout depends only on the total and the
//! chunk size, never on the worker count, and partial results are folded in
//! chunk order. A run therefore produces bit-identical output whether it
//! executes on one thread, on eight, or on the sequential fallback compiled
//! without the `parallel` feature.

use crate::stream::RandomStream;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk size for flat per-draw work.
pub const DEFAULT_CHUNK: u64 = 1 << 14;
/// Chunk size for nested experiments where one outer draw hides an inner
/// Monte Carlo loop.
pub const NESTED_CHUNK: u64 = 64;

fn chunk_parts<P, W>(stream: &RandomStream, total: u64, chunk_size: u64, work: &W) -> Vec<P>
where
    P: Send,
    W: Fn(u64, &mut ChaCha8Rng) -> P + Sync,
{
    assert!(chunk_size > 0);
    let n_chunks = total.div_ceil(chunk_size);
    let run = |j: u64| {
        let len = chunk_size.min(total - j * chunk_size);
        let mut rng = stream.substream(j).rng();
        work(len, &mut rng)
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<P> = (0..n_chunks).into_par_iter().map(run).collect();
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<P> = (0..n_chunks).map(run).collect();
    parts
}

/// Run `work` over every chunk and fold the partial results in chunk order.
pub fn fold_chunks<P, W, M>(
    stream: &RandomStream,
    total: u64,
    chunk_size: u64,
    work: W,
    merge: M,
    zero: P,
) -> P
where
    P: Send,
    W: Fn(u64, &mut ChaCha8Rng) -> P + Sync,
    M: Fn(P, P) -> P,
{
    chunk_parts(stream, total, chunk_size, &work)
        .into_iter()
        .fold(zero, merge)
}

/// Sequential twin of [`fold_chunks`]: same chunk layout, same substreams,
/// same fold order, never touches a thread pool. Exists so benches can
/// compare the two paths and tests can assert they agree bitwise.
pub fn fold_chunks_sequential<P, W, M>(
    stream: &RandomStream,
    total: u64,
    chunk_size: u64,
    work: W,
    merge: M,
    zero: P,
) -> P
where
    W: Fn(u64, &mut ChaCha8Rng) -> P,
    M: Fn(P, P) -> P,
{
    assert!(chunk_size > 0);
    let n_chunks = total.div_ceil(chunk_size);
    (0..n_chunks)
        .map(|j| {
            let len = chunk_size.min(total - j * chunk_size);
            let mut rng = stream.substream(j).rng();
            work(len, &mut rng)
        })
        .fold(zero, merge)
}

/// Hit counter for proportion estimates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub hits: u64,
    pub trials: u64,
}

impl Tally {
    pub fn push(&mut self, hit: bool) {
        self.hits += u64::from(hit);
        self.trials += 1;
    }

    pub fn merge(a: Self, b: Self) -> Self {
        Self {
            hits: a.hits + b.hits,
            trials: a.trials + b.trials,
        }
    }

    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.hits as f64 / self.trials as f64
        }
    }
}

/// Streaming sum / sum of squares for mean-and-standard-error estimates.
/// Merging is plain field addition, so results depend only on fold order.
#[derive(Clone, Copy, Debug, Default)]
pub struct MeanVar {
    pub sum: f64,
    pub sum_sq: f64,
    pub count: u64,
}

impl MeanVar {
    pub fn push(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
        self.count += 1;
    }

    pub fn merge(a: Self, b: Self) -> Self {
        Self {
            sum: a.sum + b.sum,
            sum_sq: a.sum_sq + b.sum_sq,
            count: a.count + b.count,
        }
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }

    /// Standard error of the mean; 0 for fewer than two samples.
    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Two-sided standard-normal quantile for a confidence level, e.g.
/// 0.95 -> 1.9599...
pub fn z_quantile(confidence: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    normal.inverse_cdf(0.5 + confidence / 2.0)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(hits: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(trials > 0);
    let z = z_quantile(confidence);
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// One-sided Clopper-Pearson upper bound for a zero-hit outcome.
pub fn clopper_pearson_zero_upper(trials: u64, confidence: f64) -> f64 {
    assert!(trials > 0);
    1.0 - (1.0 - confidence).powf(1.0 / trials as f64)
}

/// One-sided Clopper-Pearson lower bound for an all-hit outcome.
pub fn clopper_pearson_full_lower(trials: u64, confidence: f64) -> f64 {
    (1.0 - confidence).powf(1.0 / trials as f64)
}

/// Proportion estimate with a confidence interval. `std_error` is the raw
/// binomial standard error; the interval is Wilson except at the 0-hit /
/// all-hit boundaries, where the one-sided Clopper-Pearson bound replaces the
/// degenerate endpoint.
#[derive(Clone, Copy, Debug)]
pub struct ProportionEstimate {
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
    pub std_error: f64,
    pub method: &'static str,
}

pub fn proportion_estimate(tally: Tally, confidence: f64) -> ProportionEstimate {
    let Tally { hits, trials } = tally;
    assert!(trials > 0, "proportion of an empty sample");
    let p = tally.rate();
    let std_error = (p * (1.0 - p) / trials as f64).sqrt();
    if hits == 0 {
        ProportionEstimate {
            estimate: 0.0,
            lo: 0.0,
            hi: clopper_pearson_zero_upper(trials, confidence),
            std_error,
            method: "clopper_pearson_zero",
        }
    } else if hits == trials {
        ProportionEstimate {
            estimate: 1.0,
            lo: clopper_pearson_full_lower(trials, confidence),
            hi: 1.0,
            std_error,
            method: "clopper_pearson_full",
        }
    } else {
        let (lo, hi) = wilson_interval(hits, trials, confidence);
        ProportionEstimate {
            estimate: p,
            lo,
            hi,
            std_error,
            method: "wilson",
        }
    }
}
