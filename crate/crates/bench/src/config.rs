//! Simulation config files (TOML).
//!
//! ```toml
//! mode = "concat"            # or "single"
//! ebno_db = [1.8, 2.0]
//! master_seed = 1
//! workers = 4
//! output = "curve.csv"
//! min_block_errors = 100     # optional, default 100
//! max_blocks = 1000000       # optional, default 10^6
//! batch = 32                 # optional; trials per scheduling batch
//! noiseless = false          # optional; feed +-20 LLRs, no noise
//!
//! [outer]                    # the code in single mode
//! alist = "outer.alist"
//! sidecar = "outer.ira"
//!
//! [inner]                    # concat mode only
//! k = 128
//! n = 181
//! seed = 2                   # check_degree, d_ace, eta optional
//!
//! [interleaver]              # concat mode only
//! path = "pi.txt"            # or: seed = 7
//!
//! [schedule]
//! outer_iters = 10
//! inner_iters = 10           # max SPA iterations per component decode
//! freeze_converged = false
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ira_concat::concat::{ConcatCode, Schedule};
use ira_concat::gf2::load_alist;
use ira_concat::interleaver::{random_permutation, BlockPermutation};
use ira_concat::ira::{AceParams, IraCode, Sidecar, DEFAULT_CHECK_DEGREE};
use serde::Deserialize;

/// Environment variable naming a directory searched for config files given
/// by relative path.
pub const CONFIG_DIR_ENV: &str = "IRABENCH_CONFIG_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Single,
    Concat,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum CodeSource {
    Files { alist: PathBuf, sidecar: PathBuf },
    Construct {
        k: usize,
        n: usize,
        seed: u64,
        #[serde(default = "default_check_degree")]
        check_degree: usize,
        d_ace: Option<usize>,
        eta: Option<usize>,
    },
}

fn default_check_degree() -> usize {
    DEFAULT_CHECK_DEGREE
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum InterleaverSource {
    File { path: PathBuf },
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default = "ten")]
    pub outer_iters: usize,
    #[serde(default = "ten")]
    pub inner_iters: usize,
    #[serde(default)]
    pub freeze_converged: bool,
}

fn ten() -> usize {
    10
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self { outer_iters: 10, inner_iters: 10, freeze_converged: false }
    }
}

impl From<ScheduleConfig> for Schedule {
    fn from(s: ScheduleConfig) -> Self {
        Schedule { outer_iters: s.outer_iters, inner_iters: s.inner_iters, freeze_converged: s.freeze_converged }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub mode: Mode,
    pub ebno_db: Vec<f64>,
    pub master_seed: u64,
    #[serde(default = "one")]
    pub workers: usize,
    pub output: PathBuf,
    #[serde(default = "default_min_block_errors")]
    pub min_block_errors: u64,
    #[serde(default = "default_max_blocks")]
    pub max_blocks: u64,
    #[serde(default = "default_batch")]
    pub batch: usize,
    #[serde(default)]
    pub noiseless: bool,
    pub outer: CodeSource,
    pub inner: Option<CodeSource>,
    pub interleaver: Option<InterleaverSource>,
    #[serde(default)]
    pub schedule: ScheduleConfig,
}

fn one() -> usize {
    1
}

fn default_min_block_errors() -> u64 {
    100
}

fn default_max_blocks() -> u64 {
    1_000_000
}

fn default_batch() -> usize {
    32
}

/// A ready-to-simulate system.
#[derive(Debug, Clone)]
pub enum System {
    Single(IraCode),
    Concat(ConcatCode),
}

impl System {
    /// Source bits per block.
    pub fn source_len(&self) -> usize {
        match self {
            System::Single(c) => c.k(),
            System::Concat(c) => c.source_len(),
        }
    }

    /// Rate used for the Eb/N0 conversion.
    pub fn rate(&self) -> f64 {
        match self {
            System::Single(c) => c.rate(),
            System::Concat(c) => c.rate(),
        }
    }
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).context("config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative paths inside it become relative to
    /// its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let path = locate_config(path)?;
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::from_toml(&text).with_context(|| format!("in {}", path.display()))?;
        if let Some(dir) = path.parent() {
            cfg.rebase(dir);
        }
        Ok(cfg)
    }

    fn rebase(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        fix(&mut self.output);
        for code in [Some(&mut self.outer), self.inner.as_mut()].into_iter().flatten() {
            if let CodeSource::Files { alist, sidecar } = code {
                fix(alist);
                fix(sidecar);
            }
        }
        if let Some(InterleaverSource::File { path }) = &mut self.interleaver {
            fix(path);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ebno_db.is_empty() {
            bail!("ebno_db must list at least one point");
        }
        if self.ebno_db.iter().any(|e| !e.is_finite()) {
            bail!("ebno_db values must be finite");
        }
        if self.min_block_errors == 0 {
            bail!("min_block_errors must be at least 1");
        }
        if self.max_blocks == 0 {
            bail!("max_blocks must be at least 1");
        }
        if self.workers == 0 {
            bail!("workers must be at least 1");
        }
        if self.batch == 0 {
            bail!("batch must be at least 1");
        }
        Schedule::from(self.schedule).validate()?;
        match self.mode {
            Mode::Single => {
                if self.inner.is_some() || self.interleaver.is_some() {
                    bail!("single mode takes only [outer]");
                }
            }
            Mode::Concat => {
                if self.inner.is_none() || self.interleaver.is_none() {
                    bail!("concat mode needs [inner] and [interleaver]");
                }
            }
        }
        Ok(())
    }

    /// Loads or constructs every referenced object.
    pub fn build(&self) -> Result<System> {
        let outer = load_code(&self.outer).context("outer code")?;
        match self.mode {
            Mode::Single => Ok(System::Single(outer)),
            Mode::Concat => {
                let inner = load_code(self.inner.as_ref().expect("validated")).context("inner code")?;
                let pi = match self.interleaver.as_ref().expect("validated") {
                    InterleaverSource::File { path } => load_permutation(path)?,
                    InterleaverSource::Random { seed } => random_permutation(outer.k(), outer.n(), *seed)?,
                };
                Ok(System::Concat(ConcatCode::new(outer, inner, pi)?))
            }
        }
    }
}

fn locate_config(path: &Path) -> Result<PathBuf> {
    if path.exists() || path.is_absolute() {
        return Ok(path.to_path_buf());
    }
    if let Some(dir) = std::env::var_os(CONFIG_DIR_ENV) {
        let candidate = Path::new(&dir).join(path);
        if candidate.exists() {
            return Ok(candidate);
        }
    }
    bail!("config {} not found", path.display())
}

pub fn load_code(src: &CodeSource) -> Result<IraCode> {
    match src {
        CodeSource::Files { alist, sidecar } => load_code_files(alist, sidecar),
        CodeSource::Construct { k, n, seed, check_degree, d_ace, eta } => {
            let mut ace = AceParams::default();
            if let Some(d) = d_ace {
                ace.d_ace = *d;
            }
            if let Some(e) = eta {
                ace.eta = *e;
            }
            Ok(IraCode::construct(*k, *n, *check_degree, ace, *seed)?)
        }
    }
}

pub fn load_code_files(alist: &Path, sidecar: &Path) -> Result<IraCode> {
    let h_text = std::fs::read_to_string(alist).with_context(|| format!("reading {}", alist.display()))?;
    let h = load_alist(&h_text).with_context(|| format!("parsing {}", alist.display()))?;
    let meta_text = std::fs::read_to_string(sidecar).with_context(|| format!("reading {}", sidecar.display()))?;
    let meta = Sidecar::parse(&meta_text).with_context(|| format!("parsing {}", sidecar.display()))?;
    IraCode::from_files(h, &meta).with_context(|| format!("checking {}", alist.display()))
}

pub fn load_permutation(path: &Path) -> Result<BlockPermutation> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    BlockPermutation::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN: &str = r#"
mode = "single"
ebno_db = [1.0]
master_seed = 3
output = "out.csv"
[outer]
k = 8
n = 12
seed = 1
check_degree = 8
eta = 0
"#;

    #[test]
    fn defaults_fill_in() {
        let cfg = SimConfig::from_toml(MIN).unwrap();
        assert_eq!(cfg.min_block_errors, 100);
        assert_eq!(cfg.max_blocks, 1_000_000);
        assert_eq!(cfg.workers, 1);
        assert_eq!(cfg.schedule, ScheduleConfig::default());
        assert!(matches!(cfg.outer, CodeSource::Construct { check_degree: 8, eta: Some(0), .. }));
        assert!(matches!(cfg.build().unwrap(), System::Single(_)));
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(SimConfig::from_toml(&MIN.replace("[1.0]", "[]")).is_err());
        assert!(SimConfig::from_toml(&format!("min_block_errors = 0\n{MIN}")).is_err());
        assert!(SimConfig::from_toml(&format!("bogus = 1\n{MIN}")).is_err());
        assert!(SimConfig::from_toml(&MIN.replace("single", "concat")).is_err());
        assert!(SimConfig::from_toml(&format!("{MIN}[schedule]\nouter_iters = 0\n")).is_err());
    }

    #[test]
    fn relative_paths_follow_the_config() {
        let mut cfg = SimConfig::from_toml(MIN).unwrap();
        cfg.rebase(Path::new("/data/run"));
        assert_eq!(cfg.output, Path::new("/data/run/out.csv"));
    }
}
