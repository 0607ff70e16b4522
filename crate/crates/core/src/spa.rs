//! Log-domain sum-product decoding with a priori input and extrinsic output.
//!
//! LLRs are natural-log ratios `log P(0) / P(1)`; positive favours bit 0.

use crate::error::{check_len, Error, Result};
use crate::gf2::SparseBinaryMatrix;

/// Magnitude clamp applied to messages before `tanh`.
pub const LLR_CLAMP: f64 = 50.0;
/// `tanh` products are kept this far inside `(-1, 1)` before `atanh`.
pub const TANH_GUARD: f64 = 1e-12;

/// Output of a component decode.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub hard_bits: Vec<u8>,
    pub posterior: Vec<f64>,
    /// Sum of the final check-to-variable messages (no channel, no prior).
    pub extrinsic: Vec<f64>,
    pub iterations_used: usize,
    pub valid: bool,
}

#[inline]
fn clamp(x: f64) -> f64 {
    x.clamp(-LLR_CLAMP, LLR_CLAMP)
}

#[inline]
fn guarded_atanh2(p: f64) -> f64 {
    let lim = 1.0 - TANH_GUARD;
    2.0 * p.clamp(-lim, lim).atanh()
}

/// Box-plus over all other edges: `out[e] = 2 atanh(prod_{e' != e} tanh(in[e'] / 2))`.
pub fn check_update(incoming: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; incoming.len()];
    check_update_into(incoming, &mut out, &mut Vec::new());
    out
}

/// Prefix/suffix products, so a zero input annihilates exactly the other
/// outputs without dividing.
fn check_update_into(incoming: &[f64], out: &mut [f64], scratch: &mut Vec<f64>) {
    let d = incoming.len();
    scratch.clear();
    scratch.extend(incoming.iter().map(|&x| (0.5 * clamp(x)).tanh()));
    // out holds prefix products, then is combined with a running suffix.
    let mut acc = 1.0;
    for e in 0..d {
        out[e] = acc;
        acc *= scratch[e];
    }
    let mut suffix = 1.0;
    for e in (0..d).rev() {
        let p = out[e] * suffix;
        suffix *= scratch[e];
        out[e] = guarded_atanh2(p);
    }
}

/// Variable node rule. Returns the per-check outgoing messages and the
/// posterior `channel + prior + sum(incoming)`.
pub fn variable_update(channel: f64, prior: f64, incoming_checks: &[f64]) -> (Vec<f64>, f64) {
    let base = channel + prior;
    let posterior = base + incoming_checks.iter().sum::<f64>();
    let out = (0..incoming_checks.len())
        .map(|c| {
            base + incoming_checks
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != c)
                .map(|(_, &x)| x)
                .sum::<f64>()
        })
        .collect();
    (out, posterior)
}

/// Edge layout of a parity-check matrix for flooding SPA.
#[derive(Debug, Clone)]
pub struct SpaDecoder {
    n_vars: usize,
    // Edges are numbered in row-major order; check c owns
    // check_ptr[c]..check_ptr[c+1].
    check_ptr: Vec<usize>,
    edge_var: Vec<usize>,
    var_ptr: Vec<usize>,
    var_edges: Vec<usize>,
}

impl SpaDecoder {
    pub fn new(h: &SparseBinaryMatrix) -> Self {
        let mut check_ptr = Vec::with_capacity(h.n_rows() + 1);
        let mut edge_var = Vec::with_capacity(h.edge_count());
        let mut per_var: Vec<Vec<usize>> = vec![Vec::new(); h.n_cols()];
        check_ptr.push(0);
        for row in h.rows() {
            for &v in row {
                per_var[v].push(edge_var.len());
                edge_var.push(v);
            }
            check_ptr.push(edge_var.len());
        }
        let mut var_ptr = Vec::with_capacity(h.n_cols() + 1);
        let mut var_edges = Vec::with_capacity(edge_var.len());
        var_ptr.push(0);
        for edges in per_var {
            var_edges.extend(edges);
            var_ptr.push(var_edges.len());
        }
        Self { n_vars: h.n_cols(), check_ptr, edge_var, var_ptr, var_edges }
    }

    pub fn n_variables(&self) -> usize {
        self.n_vars
    }

    /// Flooding SPA, stopping at the first iteration whose hard decision is a
    /// codeword. A tie (posterior exactly 0) decides 0.
    pub fn decode(&self, channel: &[f64], prior: &[f64], max_iter: usize) -> Result<DecodeResult> {
        self.run(channel, prior, max_iter, true)
    }

    /// Runs exactly `iterations` flooding iterations with no early stop.
    pub fn decode_fixed(&self, channel: &[f64], prior: &[f64], iterations: usize) -> Result<DecodeResult> {
        self.run(channel, prior, iterations, false)
    }

    fn run(&self, channel: &[f64], prior: &[f64], max_iter: usize, early_stop: bool) -> Result<DecodeResult> {
        check_len(self.n_vars, channel.len())?;
        check_len(self.n_vars, prior.len())?;
        if max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be at least 1".into()));
        }
        let n_edges = self.edge_var.len();
        let mut v2c: Vec<f64> = self.edge_var.iter().map(|&v| channel[v] + prior[v]).collect();
        let mut c2v = vec![0.0; n_edges];
        let mut posterior = vec![0.0; self.n_vars];
        let mut extrinsic = vec![0.0; self.n_vars];
        let mut hard = vec![0u8; self.n_vars];
        let mut scratch = Vec::new();
        let mut valid = false;
        let mut iterations_used = 0;

        for it in 1..=max_iter {
            iterations_used = it;
            for w in self.check_ptr.windows(2) {
                let (a, b) = (w[0], w[1]);
                check_update_into(&v2c[a..b], &mut c2v[a..b], &mut scratch);
            }
            for v in 0..self.n_vars {
                let edges = &self.var_edges[self.var_ptr[v]..self.var_ptr[v + 1]];
                let ext: f64 = edges.iter().map(|&e| c2v[e]).sum();
                let base = channel[v] + prior[v];
                let post = base + ext;
                for &e in edges {
                    v2c[e] = post - c2v[e];
                }
                extrinsic[v] = ext;
                posterior[v] = post;
                hard[v] = u8::from(post < 0.0);
            }
            valid = self.check_ptr.windows(2).all(|w| {
                self.edge_var[w[0]..w[1]].iter().fold(0u8, |acc, &v| acc ^ hard[v]) == 0
            });
            if valid && early_stop {
                break;
            }
        }
        Ok(DecodeResult { hard_bits: hard, posterior, extrinsic, iterations_used, valid })
    }
}

/// Hard decision with ties to 0.
pub fn hard_decision(llr: &[f64]) -> Vec<u8> {
    llr.iter().map(|&l| u8::from(l < 0.0)).collect()
}
