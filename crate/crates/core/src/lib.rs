//! Serially concatenated IRA codes.
//!
//! Two systematic `[N, K]` IRA component codes are joined by a `K x N` block
//! interleaver: source rows are encoded by the outer (row) code, the coded
//! block is interleaved, and each length-`K` column is encoded by the inner
//! (column) code. The interleaver is designed from stopping-set sensitivity
//! histograms so that the sensitive positions of one code do not land on the
//! sensitive positions of the other.
//!
//! Module map:
//! - [`gf2`]: sparse binary matrices, Tanner graphs, alist I/O, cycles
//! - [`ira`]: IRA construction with ACE conditioning and accumulator encoding
//! - [`spa`]: sum-product decoding with prior input and extrinsic output
//! - [`stopping`]: stopping-set detection and sensitivity histograms
//! - [`interleaver`]: block permutations and their constrained design
//! - [`concat`]: the concatenated encoder and iterative decoder
//! - [`channel`]: BPSK over AWGN with reproducible per-trial streams

pub mod channel;
pub mod concat;
pub mod error;
pub mod gf2;
pub mod interleaver;
pub mod ira;
pub mod spa;
pub mod stopping;

pub use error::{Error, Infeasibility, Result};
