//! Pilot selection of a random interleaver followed by escalated design.

use anyhow::Result;
use ira_concat::channel::{ChannelParams, RngStream};
use ira_concat::concat::{ConcatCode, Schedule};
use ira_concat::interleaver::{escalate_design_capped, select_by_pilot, BlockPermutation};
use ira_concat::ira::IraCode;
use ira_concat::stopping::sensitivity_histogram;
use rayon::prelude::*;

use crate::config::System;
use crate::sim::{run_trial, RunParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignParams {
    /// Random candidates tried by the pilot.
    pub candidates: usize,
    /// Candidate `i` uses seed `base_seed + i`.
    pub base_seed: u64,
    pub pilot_ebno_db: f64,
    pub pilot_blocks: u64,
    pub pilot_seed: u64,
    pub schedule: Schedule,
    pub step: usize,
    pub max_t: usize,
    /// Seeds the repair swaps.
    pub design_seed: u64,
}

impl Default for DesignParams {
    fn default() -> Self {
        Self {
            candidates: 16,
            base_seed: 1,
            pilot_ebno_db: 1.8,
            pilot_blocks: 20,
            pilot_seed: 1,
            schedule: Schedule::SHORT,
            step: 1,
            max_t: usize::MAX,
            design_seed: 1,
        }
    }
}

/// Pilot score of one interleaver: (block errors, bit errors) over a fixed
/// number of trials. Lower is better.
pub fn pilot_score(
    outer: &IraCode,
    inner: &IraCode,
    pi: &BlockPermutation,
    params: &DesignParams,
) -> Result<(u64, u64)> {
    let system = System::Concat(ConcatCode::new(outer.clone(), inner.clone(), pi.clone())?);
    let channel = ChannelParams::new(params.pilot_ebno_db, system.rate())?;
    let run = RunParams {
        master_seed: params.pilot_seed,
        min_block_errors: u64::MAX,
        max_blocks: params.pilot_blocks,
        batch: 1,
        noiseless: false,
        schedule: params.schedule,
    };
    let trials = (0..params.pilot_blocks)
        .into_par_iter()
        .map(|i| run_trial(&system, &channel, &run, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(trials.iter().fold((0, 0), |(f, b), t| (f + (t.bit_errors > 0) as u64, b + t.bit_errors)))
}

#[derive(Debug, Clone)]
pub struct DesignOutcome {
    pub pi0: BlockPermutation,
    pub designed: BlockPermutation,
    pub pilot_scores: Vec<(u64, u64)>,
}

/// Picks the best pilot candidate as `pi0`, then escalates the design from
/// it with sensitivity histograms of the two codes.
pub fn design_interleaver(outer: &IraCode, inner: &IraCode, params: &DesignParams) -> Result<DesignOutcome> {
    let (k, n) = (outer.k(), outer.n());
    let mut failure = None;
    let (pi0, scores) = select_by_pilot(k, n, params.base_seed, params.candidates, |pi| {
        match pilot_score(outer, inner, pi, params) {
            Ok(s) => s,
            Err(e) => {
                failure.get_or_insert(e);
                (u64::MAX, u64::MAX)
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let hist_row = sensitivity_histogram(outer.h().tanner());
    let hist_col = sensitivity_histogram(inner.h().tanner());
    let mut rng = RngStream::new(params.design_seed, 0);
    let designed = escalate_design_capped(&hist_row, &hist_col, &pi0, params.step, params.max_t, &mut rng)?;
    Ok(DesignOutcome { pi0, designed, pilot_scores: scores })
}
