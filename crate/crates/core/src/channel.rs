//! BPSK over the binary-input AWGN channel.
//!
//! Bit 0 maps to `+1`, bit 1 to `-1`. For a code of rate `R` at `Eb/N0`
//! (dB) the per-dimension noise deviation is
//! `sigma = sqrt(1 / (2 R 10^(EbN0/10)))`, and the channel LLR of an
//! observation `y` is `2 y / sigma^2`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// LLR magnitude used for noiseless (debug) transmissions.
pub const NOISELESS_LLR: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub ebno_db: f64,
    pub rate: f64,
    pub sigma: f64,
}

impl ChannelParams {
    pub fn new(ebno_db: f64, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) || !ebno_db.is_finite() {
            return Err(Error::InvalidInput(format!("invalid channel: Eb/N0 {ebno_db} dB, rate {rate}")));
        }
        Ok(Self { ebno_db, rate, sigma: sigma_for(ebno_db, rate) })
    }
}

pub fn sigma_for(ebno_db: f64, rate: f64) -> f64 {
    (1.0 / (2.0 * rate * 10f64.powf(ebno_db / 10.0))).sqrt()
}

/// Independent random stream for one Monte Carlo trial. Streams are ChaCha8
/// keyed by the master seed with the trial index as stream id, so draws do
/// not depend on which worker runs the trial.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        Self { master_seed, stream_index, rng }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// `len` uniform random bits.
    pub fn bits(&mut self, len: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(len);
        while out.len() < len {
            let word = self.rng.next_u64();
            let take = (len - out.len()).min(64);
            out.extend((0..take).map(|i| (word >> i & 1) as u8));
        }
        out
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

pub fn modulate(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| if b & 1 == 0 { 1.0 } else { -1.0 }).collect()
}

/// `y = x + n` with `n ~ N(0, sigma^2)` i.i.d. drawn from `stream`.
pub fn awgn(symbols: &[f64], sigma: f64, stream: &mut RngStream) -> Result<Vec<f64>> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::InvalidInput(format!("noise deviation must be positive, got {sigma}")));
    }
    Ok(symbols
        .iter()
        .map(|&x| {
            let z: f64 = StandardNormal.sample(stream);
            x + sigma * z
        })
        .collect())
}

#[inline]
pub fn channel_llr(y: f64, sigma: f64) -> f64 {
    2.0 * y / (sigma * sigma)
}

pub fn channel_llrs(y: &[f64], sigma: f64) -> Vec<f64> {
    y.iter().map(|&v| channel_llr(v, sigma)).collect()
}

/// LLRs of a noiseless transmission: `+20` for 0, `-20` for 1.
pub fn noiseless_llrs(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| if b & 1 == 0 { NOISELESS_LLR } else { -NOISELESS_LLR }).collect()
}

/// Modulates, adds noise and returns channel LLRs.
pub fn transmit(bits: &[u8], params: &ChannelParams, stream: &mut RngStream) -> Vec<f64> {
    let y = awgn(&modulate(bits), params.sigma, stream).expect("sigma validated by ChannelParams");
    channel_llrs(&y, params.sigma)
}
