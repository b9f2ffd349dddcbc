//! Binary symmetric channel and the seeded Monte Carlo driver.

use std::time::Instant;

use rand::distributions::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::FrameCodec;
use crate::engine::Frame;
use crate::error::{Error, Result};
use crate::params::Family;

pub use crate::floor::{inject_and_decode, InjectionOutcome};

/// Flips each bit independently with probability `p`.
pub fn bsc_apply(bits: &mut [u8], p: f64, rng: &mut impl Rng) -> Result<()> {
    let coin = bernoulli(p)?;
    for b in bits.iter_mut() {
        if coin.sample(rng) {
            *b ^= 1;
        }
    }
    Ok(())
}

/// [`bsc_apply`] over every transmitted bit of a frame, matrix by matrix in
/// row-major order.
pub fn bsc_apply_frame(frame: &mut Frame, p: f64, rng: &mut impl Rng) -> Result<usize> {
    let coin = bernoulli(p)?;
    let mut flips = 0;
    for m in frame.mats.iter_mut() {
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if coin.sample(rng) {
                    m.flip(i, j);
                    flips += 1;
                }
            }
        }
    }
    Ok(flips)
}

fn bernoulli(p: f64) -> Result<Bernoulli> {
    Bernoulli::new(p).map_err(|_| Error::params(format!("crossover probability {p} outside [0, 1]")))
}

/// Generator for frame `index`: ChaCha8 keyed by the master seed, with the
/// frame index as stream id.
pub fn frame_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub p: f64,
    pub seed: u64,
    /// Stop once this many information-bit errors were seen...
    pub min_bit_errors: u64,
    /// ...or this many frames were run, whichever comes first.
    pub max_frames: u64,
    /// Frames per checkpoint; the stop rule is checked only between batches.
    pub batch: u64,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { p: 1e-2, seed: 1, min_bit_errors: 100, max_frames: 10_000, batch: 32, workers: 0 }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        bernoulli(self.p)?;
        if self.batch == 0 || self.max_frames == 0 || self.min_bit_errors == 0 {
            return Err(Error::params("stop rule and batch size must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ci95 {
    pub ber: f64,
    pub bker: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub family: Family,
    pub p: f64,
    pub frames: u64,
    /// Information bits sent.
    pub bits: u64,
    pub bit_errs: u64,
    /// Information-carrying blocks sent.
    pub blocks: u64,
    pub blk_errs: u64,
    pub ber: f64,
    pub bker: f64,
    /// Normal-approximation half-widths.
    pub ci95: Ci95,
    #[serde(default)]
    pub wall_seconds: f64,
}

impl SimReport {
    /// Equality of everything except timing.
    pub fn same_counts(&self, other: &SimReport) -> bool {
        SimReport { wall_seconds: 0.0, ..self.clone() } == SimReport { wall_seconds: 0.0, ..other.clone() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub frames: u64,
    pub bits: u64,
    pub bit_errs: u64,
    pub blocks: u64,
    pub blk_errs: u64,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            frames: self.frames + o.frames,
            bits: self.bits + o.bits,
            bit_errs: self.bit_errs + o.bit_errs,
            blocks: self.blocks + o.blocks,
            blk_errs: self.blk_errs + o.blk_errs,
        }
    }

    pub fn report(&self, family: Family, p: f64, wall_seconds: f64) -> SimReport {
        let rate = |k: u64, n: u64| if n == 0 { 0.0 } else { k as f64 / n as f64 };
        let half = |k: u64, n: u64| {
            if n == 0 {
                return 0.0;
            }
            let q = rate(k, n);
            1.96 * (q * (1.0 - q) / n as f64).sqrt()
        };
        SimReport {
            family,
            p,
            frames: self.frames,
            bits: self.bits,
            bit_errs: self.bit_errs,
            blocks: self.blocks,
            blk_errs: self.blk_errs,
            ber: rate(self.bit_errs, self.bits),
            bker: rate(self.blk_errs, self.blocks),
            ci95: Ci95 { ber: half(self.bit_errs, self.bits), bker: half(self.blk_errs, self.blocks) },
            wall_seconds,
        }
    }
}

/// Information-bit and block error counts of a decoded frame against the
/// payload that was sent. A block is a transmitted matrix holding
/// information bits; it is in error when any of those bits is wrong.
pub fn count_errors(codec: &dyn FrameCodec, sent: &[u8], decoded: &Frame) -> Tally {
    let mut per_mat = vec![(0u64, 0u64); decoded.mats.len()];
    let mut bit_errs = 0;
    for (&a, &s) in codec.info_addrs().iter().zip(sent) {
        let slot = &mut per_mat[a.mat as usize];
        slot.0 += 1;
        if decoded.bit(a) != s {
            slot.1 += 1;
            bit_errs += 1;
        }
    }
    Tally {
        frames: 1,
        bits: sent.len() as u64,
        bit_errs,
        blocks: per_mat.iter().filter(|s| s.0 > 0).count() as u64,
        blk_errs: per_mat.iter().filter(|s| s.1 > 0).count() as u64,
    }
}

/// Runs frame `index`: random payload, encode, channel, decode.
pub fn run_frame(codec: &dyn FrameCodec, p: f64, seed: u64, index: u64) -> Result<(Vec<u8>, Frame)> {
    let mut rng = frame_rng(seed, index);
    let info: Vec<u8> = (0..codec.info_len()).map(|_| rng.gen_range(0..2u8)).collect();
    let mut frame = codec.encode(&info)?;
    bsc_apply_frame(&mut frame, p, &mut rng)?;
    codec.decode(&mut frame);
    Ok((info, frame))
}

/// Monte Carlo estimate of BER and BKER. Batches are formed from frame
/// indices alone, so the report does not depend on the worker count.
/// `checkpoint` sees the running report after every batch.
pub fn run_monte_carlo(
    codec: &dyn FrameCodec,
    cfg: &SimConfig,
    mut checkpoint: impl FnMut(&SimReport),
) -> Result<SimReport> {
    cfg.validate()?;
    let start = Instant::now();
    let pool = match cfg.workers {
        0 => None,
        n => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::params(format!("thread pool: {e}")))?,
        ),
    };
    let batch = |lo: u64, hi: u64| -> Result<Tally> {
        (lo..hi)
            .into_par_iter()
            .map(|i| run_frame(codec, cfg.p, cfg.seed, i).map(|(info, frame)| count_errors(codec, &info, &frame)))
            .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
    };
    let mut total = Tally::default();
    while total.frames < cfg.max_frames && total.bit_errs < cfg.min_bit_errors {
        let lo = total.frames;
        let hi = (lo + cfg.batch).min(cfg.max_frames);
        let t = match &pool {
            Some(pool) => pool.install(|| batch(lo, hi))?,
            None => batch(lo, hi)?,
        };
        total = total.merge(t);
        checkpoint(&total.report(codec.family(), cfg.p, start.elapsed().as_secs_f64()));
    }
    Ok(total.report(codec.family(), cfg.p, start.elapsed().as_secs_f64()))
}
