//! Monte Carlo BER/FER measurement.
//!
//! Trial `i` of a point draws its source bits and its noise from
//! `RngStream(master_seed, i)`. Trials are decoded in fixed-size batches on
//! a bounded pool; the stop rule is then applied by scanning the batch in
//! trial order, so the set of trials counted (and every output byte except
//! `wall_seconds`) does not depend on the worker count.

use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use ira_concat::channel::{noiseless_llrs, transmit, ChannelParams, RngStream};
use ira_concat::concat::{concat_decode, concat_encode, Schedule};
use rayon::prelude::*;

use crate::config::{SimConfig, System};

pub const CSV_HEADER: &str = "ebno_db,blocks,bit_errors,block_errors,ber,fer,mean_outer_iters,mean_component_iters,seed";

/// Stop rule and decoder settings for one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunParams {
    pub master_seed: u64,
    pub min_block_errors: u64,
    pub max_blocks: u64,
    pub batch: usize,
    pub noiseless: bool,
    pub schedule: Schedule,
}

impl RunParams {
    pub fn from_config(cfg: &SimConfig) -> Self {
        Self {
            master_seed: cfg.master_seed,
            min_block_errors: cfg.min_block_errors,
            max_blocks: cfg.max_blocks,
            batch: cfg.batch,
            noiseless: cfg.noiseless,
            schedule: cfg.schedule.into(),
        }
    }
}

/// Outcome of a single block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Trial {
    pub bit_errors: u64,
    pub outer_iters: u64,
    pub component_decodes: u64,
    pub component_iters: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub ebno_db: f64,
    pub blocks: u64,
    pub bit_errors: u64,
    pub block_errors: u64,
    pub ber: f64,
    pub fer: f64,
    /// 0 in single mode.
    pub mean_outer_iters: f64,
    /// SPA iterations per component decode.
    pub mean_component_iters: f64,
    pub seed: u64,
    pub wall_seconds: f64,
}

impl CurvePoint {
    /// CSV row in [`CSV_HEADER`] order; `wall_seconds` is not written.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.6e},{:.6e},{:.4},{:.4},{}",
            self.ebno_db,
            self.blocks,
            self.bit_errors,
            self.block_errors,
            self.ber,
            self.fer,
            self.mean_outer_iters,
            self.mean_component_iters,
            self.seed
        )
    }
}

/// Encodes, transmits and decodes trial `index`.
pub fn run_trial(system: &System, params: &ChannelParams, run: &RunParams, index: u64) -> Result<Trial> {
    let mut stream = RngStream::new(run.master_seed, index);
    let source = stream.bits(system.source_len());
    let observe = |tx: &[u8], stream: &mut RngStream| {
        if run.noiseless {
            noiseless_llrs(tx)
        } else {
            transmit(tx, params, stream)
        }
    };
    let zero = |a: &[u8], b: &[u8]| a.iter().zip(b).filter(|(x, y)| x != y).count() as u64;
    match system {
        System::Single(code) => {
            let tx = code.encode(&source)?;
            let llr = observe(&tx, &mut stream);
            let out = code.decode(&llr, &vec![0.0; code.n()], run.schedule.inner_iters)?;
            Ok(Trial {
                bit_errors: zero(&out.hard_bits[..code.k()], &source),
                outer_iters: 0,
                component_decodes: 1,
                component_iters: out.iterations_used as u64,
            })
        }
        System::Concat(cc) => {
            let tx = concat_encode(cc, &source)?;
            let llr = observe(&tx, &mut stream);
            let out = concat_decode(cc, &llr, run.schedule)?;
            Ok(Trial {
                bit_errors: zero(&out.source_bits, &source),
                outer_iters: out.outer_iters_used as u64,
                component_decodes: out.component_decodes as u64,
                component_iters: out.component_iterations as u64,
            })
        }
    }
}

/// Runs trials until `min_block_errors` block errors or `max_blocks`
/// blocks. Call inside the pool that should do the work.
pub fn run_ber_point(system: &System, run: &RunParams, ebno_db: f64) -> Result<CurvePoint> {
    let start = Instant::now();
    let params = ChannelParams::new(ebno_db, system.rate())?;
    let mut acc = Trial::default();
    let (mut blocks, mut block_errors) = (0u64, 0u64);
    'outer: while blocks < run.max_blocks && block_errors < run.min_block_errors {
        let end = (blocks + run.batch as u64).min(run.max_blocks);
        let trials: Vec<Trial> = (blocks..end)
            .into_par_iter()
            .map(|i| run_trial(system, &params, run, i))
            .collect::<Result<_>>()?;
        for t in trials {
            blocks += 1;
            acc.bit_errors += t.bit_errors;
            acc.outer_iters += t.outer_iters;
            acc.component_decodes += t.component_decodes;
            acc.component_iters += t.component_iters;
            if t.bit_errors > 0 {
                block_errors += 1;
                if block_errors >= run.min_block_errors {
                    break 'outer;
                }
            }
        }
    }
    let bits = blocks as f64 * system.source_len() as f64;
    Ok(CurvePoint {
        ebno_db,
        blocks,
        bit_errors: acc.bit_errors,
        block_errors,
        ber: acc.bit_errors as f64 / bits,
        fer: block_errors as f64 / blocks as f64,
        mean_outer_iters: acc.outer_iters as f64 / blocks as f64,
        mean_component_iters: if acc.component_decodes == 0 {
            0.0
        } else {
            acc.component_iters as f64 / acc.component_decodes as f64
        },
        seed: run.master_seed,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Builds a pool with `workers` threads.
pub fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().context("building worker pool")
}

/// Data rows of an existing curve file, keyed by their `ebno_db` and `seed`
/// fields. Errors if the header differs from [`CSV_HEADER`].
pub fn read_curve(text: &str) -> Result<Vec<(String, String, String)>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        Some(h) => bail!("unexpected CSV header {h:?}"),
        None => return Ok(Vec::new()),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            bail!("line {}: expected 9 fields, found {}", i + 2, fields.len());
        }
        rows.push((fields[0].to_string(), fields[8].to_string(), line.to_string()));
    }
    Ok(rows)
}

/// Runs every point of the config not already present in its output file,
/// appending and flushing one row per point. Returns the points computed by
/// this call.
pub fn run_curve(cfg: &SimConfig, mut on_point: impl FnMut(&CurvePoint)) -> Result<Vec<CurvePoint>> {
    cfg.validate()?;
    let system = cfg.build()?;
    let run = RunParams::from_config(cfg);
    let existing = match std::fs::read_to_string(&cfg.output) {
        Ok(text) => read_curve(&text).with_context(|| format!("in {}", cfg.output.display()))?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(e).with_context(|| format!("reading {}", cfg.output.display())),
    };
    let seed = cfg.master_seed.to_string();
    let todo: Vec<f64> = cfg
        .ebno_db
        .iter()
        .copied()
        .filter(|e| !existing.iter().any(|(eb, s, _)| *eb == e.to_string() && *s == seed))
        .collect();
    let mut file = open_output(&cfg.output)?;
    let workers = pool(cfg.workers)?;
    let mut done = Vec::new();
    for ebno in todo {
        let point = workers.install(|| run_ber_point(&system, &run, ebno))?;
        writeln!(file, "{}", point.csv_row())?;
        file.flush()?;
        on_point(&point);
        done.push(point);
    }
    Ok(done)
}

fn open_output(path: &Path) -> Result<std::fs::File> {
    let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    if fresh {
        writeln!(file, "{CSV_HEADER}")?;
    }
    Ok(file)
}

/// Merges curve files into one plot-ready table with a leading `series`
/// column, rows ordered by series then Eb/N0.
pub fn merge_curves(inputs: &[(String, String)]) -> Result<String> {
    let mut rows: Vec<(String, f64, String)> = Vec::new();
    for (series, text) in inputs {
        for (ebno, _, line) in read_curve(text).with_context(|| format!("series {series}"))? {
            let e: f64 = ebno.parse().with_context(|| format!("series {series}: bad ebno_db {ebno:?}"))?;
            rows.push((series.clone(), e, line));
        }
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out = format!("series,{CSV_HEADER}\n");
    for (series, _, line) in rows {
        out.push_str(&format!("{series},{line}\n"));
    }
    Ok(out)
}
