//! Serially concatenated encoder and iterative decoder.
//!
//! Blocks are row-major. The source is `K x K`; rows are encoded by the
//! outer code into a `K x N` block `B`; `B` is interleaved into `B'`; each
//! of the `N` columns of `B'` is encoded by the inner code, giving the
//! transmitted `N x N` block whose first `K` rows are `B'`. Flat indices of
//! `B'` and of those first `K` rows coincide.
//!
//! Decoding alternates a column pass (inner code, prior = interleaved row
//! extrinsics) and a row pass (outer code, channel = de-interleaved
//! systematic observations, prior = de-interleaved column extrinsics).
//! Component decodes within a pass are independent and run in parallel;
//! results are scattered in index order, so output does not depend on
//! scheduling.

use rayon::prelude::*;

use crate::error::{check_len, Error, Result};
use crate::interleaver::BlockPermutation;
use crate::ira::IraCode;
use crate::spa::DecodeResult;

/// Two component codes joined by a `K x N` interleaver.
#[derive(Debug, Clone)]
pub struct ConcatCode {
    outer: IraCode,
    inner: IraCode,
    pi: BlockPermutation,
    pi_inv: Vec<usize>,
}

impl ConcatCode {
    pub fn new(outer: IraCode, inner: IraCode, pi: BlockPermutation) -> Result<Self> {
        if outer.k() != inner.k() || outer.n() != inner.n() {
            return Err(Error::InvalidInput(format!(
                "component codes differ: [{}, {}] vs [{}, {}]",
                outer.n(),
                outer.k(),
                inner.n(),
                inner.k()
            )));
        }
        if pi.k() != outer.k() || pi.n() != outer.n() {
            return Err(Error::InvalidInput(format!(
                "interleaver is {} x {}, codes need {} x {}",
                pi.k(),
                pi.n(),
                outer.k(),
                outer.n()
            )));
        }
        let pi_inv = pi.invert().forward().to_vec();
        Ok(Self { outer, inner, pi, pi_inv })
    }

    pub fn outer(&self) -> &IraCode {
        &self.outer
    }

    pub fn inner(&self) -> &IraCode {
        &self.inner
    }

    pub fn interleaver(&self) -> &BlockPermutation {
        &self.pi
    }

    pub fn k(&self) -> usize {
        self.outer.k()
    }

    pub fn n(&self) -> usize {
        self.outer.n()
    }

    /// Source bits per block, `K^2`.
    pub fn source_len(&self) -> usize {
        self.k() * self.k()
    }

    /// Transmitted bits per block, `N^2`.
    pub fn block_len(&self) -> usize {
        self.n() * self.n()
    }

    /// `K^2 / N^2`.
    pub fn rate(&self) -> f64 {
        self.source_len() as f64 / self.block_len() as f64
    }
}

/// Iteration schedule of the concatenated decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schedule {
    pub outer_iters: usize,
    /// Maximum SPA iterations of each component decode.
    pub inner_iters: usize,
    /// Skip rows/columns in later passes once they decoded to a codeword.
    /// Off by default: a component that lands on a wrong codeword stays
    /// wrong for the rest of the block when frozen.
    pub freeze_converged: bool,
}

impl Schedule {
    /// 10 outer x 10 component iterations (16384-bit system).
    pub const SHORT: Schedule = Schedule { outer_iters: 10, inner_iters: 10, freeze_converged: false };
    /// 10 outer x 20 component iterations (65536-bit system).
    pub const LONG: Schedule = Schedule { outer_iters: 10, inner_iters: 20, freeze_converged: false };

    pub fn validate(&self) -> Result<()> {
        if self.outer_iters == 0 || self.inner_iters == 0 {
            return Err(Error::InvalidInput("schedule iteration counts must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for Schedule {
    fn default() -> Self {
        Self::SHORT
    }
}

/// Row-wise outer encoding, interleaving, column-wise inner encoding.
/// Returns the `N x N` block, row-major.
pub fn concat_encode(cc: &ConcatCode, source: &[u8]) -> Result<Vec<u8>> {
    let (k, n) = (cc.k(), cc.n());
    check_len(k * k, source.len())?;
    let mut rows = vec![0u8; k * n];
    for (src, dst) in source.chunks_exact(k).zip(rows.chunks_exact_mut(n)) {
        cc.outer.encode_into(src, dst)?;
    }
    let interleaved = cc.pi.apply(&rows)?;
    let mut out = vec![0u8; n * n];
    let mut column = vec![0u8; k];
    let mut coded = vec![0u8; n];
    for c in 0..n {
        for r in 0..k {
            column[r] = interleaved[r * n + c];
        }
        cc.inner.encode_into(&column, &mut coded)?;
        for r in 0..n {
            out[r * n + c] = coded[r];
        }
    }
    Ok(out)
}

/// Validity of every column and row after one outer iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassValidity {
    pub columns: Vec<bool>,
    pub rows: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcatDecodeResult {
    /// `K x K` decided source block, row-major.
    pub source_bits: Vec<u8>,
    /// Every column and row is a codeword and the two agree on every
    /// interleaved bit.
    pub converged: bool,
    pub outer_iters_used: usize,
    /// One entry per outer iteration run.
    pub passes: Vec<PassValidity>,
    /// Component decodes actually run (frozen ones excluded).
    pub component_decodes: usize,
    /// SPA iterations summed over those decodes.
    pub component_iterations: usize,
}

/// Iterative decoder state for one received block.
#[derive(Debug, Clone)]
pub struct ConcatDecoder<'a> {
    cc: &'a ConcatCode,
    schedule: Schedule,
    /// `N x N` channel LLRs.
    lch: &'a [f64],
    /// Row-pass channel LLRs in `B` coordinates.
    row_channel: Vec<f64>,
    /// Row extrinsics in `B` coordinates.
    row_extr: Vec<f64>,
    /// Column extrinsics on the systematic rows, `B'` coordinates.
    col_extr: Vec<f64>,
    row_post: Vec<f64>,
    row_hard: Vec<u8>,
    col_hard: Vec<u8>,
    row_valid: Vec<bool>,
    col_valid: Vec<bool>,
    row_frozen: Vec<bool>,
    col_frozen: Vec<bool>,
    decodes: usize,
    iterations: usize,
}

impl<'a> ConcatDecoder<'a> {
    pub fn new(cc: &'a ConcatCode, lch: &'a [f64], schedule: Schedule) -> Result<Self> {
        schedule.validate()?;
        let (k, n) = (cc.k(), cc.n());
        check_len(n * n, lch.len())?;
        let row_channel = (0..k * n).map(|p| lch[cc.pi.map(p)]).collect();
        Ok(Self {
            cc,
            schedule,
            lch,
            row_channel,
            row_extr: vec![0.0; k * n],
            col_extr: vec![0.0; k * n],
            row_post: vec![0.0; k * n],
            row_hard: vec![0; k * n],
            col_hard: vec![0; k * n],
            row_valid: vec![false; k],
            col_valid: vec![false; n],
            row_frozen: vec![false; k],
            col_frozen: vec![false; n],
            decodes: 0,
            iterations: 0,
        })
    }

    /// Prior handed to the inner decoder for column `c`: the row extrinsic
    /// of whichever bit the interleaver placed at each systematic row, and 0
    /// on the inner parity rows.
    pub fn column_prior(&self, c: usize) -> Vec<f64> {
        let (k, n) = (self.cc.k(), self.cc.n());
        (0..n).map(|r| if r < k { self.row_extr[self.cc.pi_inv[r * n + c]] } else { 0.0 }).collect()
    }

    /// Channel LLRs of column `c`.
    pub fn column_channel(&self, c: usize) -> Vec<f64> {
        let n = self.cc.n();
        (0..n).map(|r| self.lch[r * n + c]).collect()
    }

    /// Prior handed to the outer decoder for row `r`: de-interleaved column
    /// extrinsics.
    pub fn row_prior(&self, r: usize) -> Vec<f64> {
        let n = self.cc.n();
        (0..n).map(|c| self.col_extr[self.cc.pi.map(r * n + c)]).collect()
    }

    pub fn row_channel(&self, r: usize) -> &[f64] {
        let n = self.cc.n();
        &self.row_channel[r * n..(r + 1) * n]
    }

    /// Row extrinsics, `K x N` in row-code coordinates.
    pub fn row_extrinsic(&self) -> &[f64] {
        &self.row_extr
    }

    /// Column extrinsics on the systematic rows, `K x N` in interleaved
    /// coordinates.
    pub fn column_extrinsic(&self) -> &[f64] {
        &self.col_extr
    }

    /// Row-pass posteriors, `K x N`.
    pub fn row_posterior(&self) -> &[f64] {
        &self.row_post
    }

    pub fn column_pass(&mut self) -> Result<()> {
        let (k, n) = (self.cc.k(), self.cc.n());
        let todo: Vec<usize> = (0..n).filter(|&c| !self.col_frozen[c]).collect();
        let this = &*self;
        let results: Vec<(usize, DecodeResult)> = todo
            .par_iter()
            .map(|&c| {
                let r = this.cc.inner.decode(
                    &this.column_channel(c),
                    &this.column_prior(c),
                    this.schedule.inner_iters,
                )?;
                Ok((c, r))
            })
            .collect::<Result<_>>()?;
        for (c, r) in results {
            for row in 0..k {
                self.col_extr[row * n + c] = r.extrinsic[row];
                self.col_hard[row * n + c] = r.hard_bits[row];
            }
            self.col_valid[c] = r.valid;
            if self.schedule.freeze_converged && r.valid {
                self.col_frozen[c] = true;
            }
            self.decodes += 1;
            self.iterations += r.iterations_used;
        }
        Ok(())
    }

    pub fn row_pass(&mut self) -> Result<()> {
        let n = self.cc.n();
        let todo: Vec<usize> = (0..self.cc.k()).filter(|&r| !self.row_frozen[r]).collect();
        let this = &*self;
        let results: Vec<(usize, DecodeResult)> = todo
            .par_iter()
            .map(|&r| {
                let res = this.cc.outer.decode(this.row_channel(r), &this.row_prior(r), this.schedule.inner_iters)?;
                Ok((r, res))
            })
            .collect::<Result<_>>()?;
        for (r, res) in results {
            let span = r * n..(r + 1) * n;
            self.row_extr[span.clone()].copy_from_slice(&res.extrinsic);
            self.row_post[span.clone()].copy_from_slice(&res.posterior);
            self.row_hard[span].copy_from_slice(&res.hard_bits);
            self.row_valid[r] = res.valid;
            if self.schedule.freeze_converged && res.valid {
                self.row_frozen[r] = true;
            }
            self.decodes += 1;
            self.iterations += res.iterations_used;
        }
        Ok(())
    }

    /// All components valid and row decisions agree with the column
    /// decisions they were interleaved into.
    pub fn is_converged(&self) -> bool {
        self.row_valid.iter().all(|&v| v)
            && self.col_valid.iter().all(|&v| v)
            && (0..self.row_hard.len()).all(|p| self.row_hard[p] == self.col_hard[self.cc.pi.map(p)])
    }

    /// Systematic part of the row hard decisions.
    pub fn source_bits(&self) -> Vec<u8> {
        let (k, n) = (self.cc.k(), self.cc.n());
        (0..k).flat_map(|r| self.row_hard[r * n..r * n + k].iter().copied()).collect()
    }

    /// Runs the schedule to completion or global convergence.
    pub fn run(mut self) -> Result<ConcatDecodeResult> {
        let mut passes = Vec::with_capacity(self.schedule.outer_iters);
        let mut converged = false;
        for _ in 0..self.schedule.outer_iters {
            self.column_pass()?;
            self.row_pass()?;
            passes.push(PassValidity { columns: self.col_valid.clone(), rows: self.row_valid.clone() });
            if self.is_converged() {
                converged = true;
                break;
            }
        }
        Ok(ConcatDecodeResult {
            source_bits: self.source_bits(),
            converged,
            outer_iters_used: passes.len(),
            passes,
            component_decodes: self.decodes,
            component_iterations: self.iterations,
        })
    }
}

/// Decodes an `N x N` block of channel LLRs.
pub fn concat_decode(cc: &ConcatCode, lch: &[f64], schedule: Schedule) -> Result<ConcatDecodeResult> {
    ConcatDecoder::new(cc, lch, schedule)?.run()
}
