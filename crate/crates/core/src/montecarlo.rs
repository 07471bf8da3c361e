//! Seeded Monte Carlo cross-check of the closed-form BER.
//!
//! Two estimators over the same SC-output draws:
//! - semi-analytic: average the conditional error probability cep(gamma_sc),
//! - bit-level: flip a Bernoulli(cep) coin per draw and average the flips.
//!
//! Reproducibility contract: a (seed, stream, n) triple fully determines a
//! stream's partial sums, independent of thread count or how many other
//! streams exist. Streams are ChaCha8 with `set_stream(index)`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ber::{cep, Modulation, ScLink};
use crate::error::{Error, Result};

pub const MIN_SAMPLES: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McMode {
    /// Average cep(gamma_sc) over the fading draws.
    SemiAnalytic,
    /// Draw the bit error itself; noisier but assumption-free.
    BitLevel,
}

#[derive(Debug, Clone, Copy)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub streams: u32,
    pub mode: McMode,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64, streams: u32, mode: McMode) -> Result<Self> {
        let cfg = Self { samples, seed, streams, mode };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return Err(Error::InvalidParameter(format!(
                "need at least {MIN_SAMPLES} samples, got {}",
                self.samples
            )));
        }
        if self.streams < 1 {
            return Err(Error::InvalidParameter("streams must be >= 1".into()));
        }
        if self.samples % self.streams as u64 != 0 {
            return Err(Error::InvalidParameter(format!(
                "samples ({}) must divide evenly into {} streams",
                self.samples, self.streams
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub ber: f64,
    pub stderr: f64,
    pub samples: u64,
    /// Kish effective sample size (sum v)^2 / (sum v^2): for bit-level runs
    /// this is the observed error count; for semi-analytic runs it measures
    /// how concentrated the CEP mass was. Small values mean the stderr
    /// estimate itself cannot be trusted.
    pub effective_samples: f64,
}

/// Partial sums (sum, sum of squares) of one stream's per-sample statistic.
/// Deterministic in (seed, stream_index, n) alone.
pub fn stream_partial(
    link: &ScLink,
    modulation: &Modulation,
    mode: McMode,
    seed: u64,
    stream_index: u32,
    n: u64,
) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_index as u64);
    let s1 = link.branch1().sampler()?;
    let s2 = link.branch2().sampler()?;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n {
        let g = s1.sample(&mut rng).max(s2.sample(&mut rng));
        let e = cep(modulation, g)?;
        let v = match mode {
            McMode::SemiAnalytic => e,
            McMode::BitLevel => {
                if rng.gen::<f64>() < e {
                    1.0
                } else {
                    0.0
                }
            }
        };
        sum += v;
        sum_sq += v * v;
    }
    Ok((sum, sum_sq))
}

/// Full estimate: streams run in parallel, partials combined in stream
/// order, so the result is bit-identical for a given config regardless of
/// the thread pool.
pub fn estimate_ber(link: &ScLink, modulation: &Modulation, cfg: &McConfig) -> Result<McEstimate> {
    cfg.validate()?;
    let per_stream = cfg.samples / cfg.streams as u64;
    let partials: Vec<Result<(f64, f64)>> = (0..cfg.streams)
        .into_par_iter()
        .map(|i| stream_partial(link, modulation, cfg.mode, cfg.seed, i, per_stream))
        .collect();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for p in partials {
        let (s, s2) = p?;
        sum += s;
        sum_sq += s2;
    }
    let n = cfg.samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    let effective_samples = if sum_sq > 0.0 { sum * sum / sum_sq } else { 0.0 };
    Ok(McEstimate {
        ber: mean,
        stderr: (var / n).sqrt(),
        samples: cfg.samples,
        effective_samples,
    })
}
