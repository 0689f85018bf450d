//! Sampling estimates of `a_n`, `b_n` and `delta_n` for codes too long to
//! enumerate.
//!
//! Drawing the transmitted index and the channel noise uses `f64`
//! probabilities; the received word is then labeled with the same exact rank
//! comparisons as the exhaustive classifier, so ties are detected exactly at
//! any blocklength. The `a_n` indicator counts an error whenever the sent
//! index is not the least maximizer. Any fixed choice among maximizers is an
//! optimal decoder, so this indicator has mean `a_n`.

use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::classify::{scan, Label, ScoreTable};
use crate::model::{BitWord, Instance};

/// Samples per RNG stream.
pub const BLOCK: u64 = 1 << 13;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MonteCarloError {
    #[error("samples must be at least 1")]
    NoSamples,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub metric: String,
    pub point: f64,
    /// `sqrt(point (1 - point) / samples)`.
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl Estimate {
    fn from_count(metric: &str, hits: u64, samples: u64, seed: u64) -> Estimate {
        let point = hits as f64 / samples as f64;
        Estimate {
            metric: metric.to_string(),
            point,
            stderr: (point * (1.0 - point) / samples as f64).sqrt(),
            samples,
            seed,
        }
    }

    /// `|point - exact|` in units of the standard error. Infinite when the
    /// standard error is zero and the point misses.
    pub fn z_score(&self, exact: f64) -> f64 {
        let gap = (self.point - exact).abs();
        if gap == 0.0 {
            0.0
        } else {
            gap / self.stderr
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimates {
    pub a: Estimate,
    pub b: Estimate,
    pub delta: Estimate,
}

impl Estimates {
    pub fn all(&self) -> [&Estimate; 3] {
        [&self.a, &self.b, &self.delta]
    }
}

/// One channel use: the sent index and the received word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Draw {
    pub sent: usize,
    pub received: BitWord,
    pub label: Label,
    /// Least maximizer of the joint weight.
    pub decoded: usize,
}

struct Sampler<'a> {
    inst: &'a Instance,
    table: ScoreTable,
    cdf: Vec<f64>,
    flip: Bernoulli,
}

impl<'a> Sampler<'a> {
    fn new(inst: &'a Instance) -> Self {
        let mut acc = 0.0;
        let cdf = inst
            .prior()
            .iter()
            .map(|w| {
                acc += w.to_f64();
                acc
            })
            .collect();
        Sampler {
            inst,
            table: ScoreTable::new(inst),
            cdf,
            flip: Bernoulli::new(inst.p().to_f64()).expect("p lies in (0, 1/2)"),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng, dists: &mut [u32], ranks: &mut [u32]) -> Draw {
        let u: f64 = rng.random::<f64>() * self.cdf[self.cdf.len() - 1];
        let sent = self.cdf.iter().position(|&c| u < c).unwrap_or(self.cdf.len() - 1);
        let n = self.inst.n();
        let mut noise = 0u64;
        for t in 0..n {
            if self.flip.sample(rng) {
                noise |= 1 << t;
            }
        }
        let received = self.inst.codeword(sent) ^ BitWord(noise);
        let top = scan(self.inst, &self.table, received, dists, ranks);
        let label = if ranks[sent] < top.rank {
            Label::Error
        } else if top.count >= 2 {
            Label::Tie
        } else {
            Label::Correct
        };
        Draw {
            sent,
            received,
            label,
            decoded: top.first,
        }
    }
}

fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// The first `count` draws of the sampler, in order. Useful for comparing
/// per-sample labels with the exhaustive classifier.
pub fn draws(inst: &Instance, count: u64, seed: u64) -> Vec<Draw> {
    let s = Sampler::new(inst);
    let mut dists = vec![0u32; inst.m()];
    let mut ranks = vec![0u32; inst.m()];
    let mut out = Vec::with_capacity(count as usize);
    let mut block = 0;
    while (out.len() as u64) < count {
        let mut rng = block_rng(seed, block);
        let take = BLOCK.min(count - out.len() as u64);
        for _ in 0..take {
            out.push(s.draw(&mut rng, &mut dists, &mut ranks));
        }
        block += 1;
    }
    out
}

/// Estimates of `a_n`, `b_n`, `delta_n` from `samples` channel uses.
/// Block `b` of [`BLOCK`] samples reads stream `b` of `seed`, so the result
/// does not depend on thread scheduling.
pub fn estimate_metrics(inst: &Instance, samples: u64, seed: u64) -> Result<Estimates, MonteCarloError> {
    if samples == 0 {
        return Err(MonteCarloError::NoSamples);
    }
    let s = Sampler::new(inst);
    let blocks = samples.div_ceil(BLOCK);
    let (a, b, d) = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut rng = block_rng(seed, blk);
            let mut dists = vec![0u32; inst.m()];
            let mut ranks = vec![0u32; inst.m()];
            let take = BLOCK.min(samples - blk * BLOCK);
            let mut c = (0u64, 0u64, 0u64);
            for _ in 0..take {
                let x = s.draw(&mut rng, &mut dists, &mut ranks);
                c.0 += u64::from(x.decoded != x.sent);
                c.1 += u64::from(x.label == Label::Error);
                c.2 += u64::from(x.label == Label::Tie);
            }
            c
        })
        .reduce(|| (0, 0, 0), |x, y| (x.0 + y.0, x.1 + y.1, x.2 + y.2));
    Ok(Estimates {
        a: Estimate::from_count("a", a, samples, seed),
        b: Estimate::from_count("b", b, samples, seed),
        delta: Estimate::from_count("delta", d, samples, seed),
    })
}
