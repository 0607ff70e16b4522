use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ira_bench::config::{load_code_files, SimConfig};
use ira_bench::design::{design_interleaver, DesignParams};
use ira_bench::sim::{merge_curves, run_curve};
use ira_concat::concat::Schedule;
use ira_concat::gf2::save_alist;
use ira_concat::ira::{AceParams, IraCode, DEFAULT_CHECK_DEGREE};
use ira_concat::stopping::{detect_all, sensitivity_histogram};

#[derive(Parser)]
#[command(name = "irabench", version = ira_bench::VERSION, about = "Concatenated IRA code workbench")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build an IRA code and write its alist and sidecar.
    Construct(ConstructArgs),
    /// Write the sensitivity histogram and the detected stopping sets.
    Analyze(AnalyzeArgs),
    /// Pilot-select a random interleaver and design from it.
    DesignInterleaver(DesignArgs),
    /// Run a BER/FER curve from a config file.
    Simulate(SimulateArgs),
    /// Merge curve CSVs into one table.
    Report(ReportArgs),
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_CHECK_DEGREE)]
    check_degree: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    d_ace: Option<usize>,
    #[arg(long)]
    eta: Option<usize>,
    #[arg(long)]
    alist: PathBuf,
    #[arg(long)]
    sidecar: PathBuf,
}

#[derive(Args)]
struct CodeFiles {
    #[arg(long)]
    alist: PathBuf,
    #[arg(long)]
    sidecar: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    code: CodeFiles,
    /// Sensitivity histogram, `index,count`.
    #[arg(long)]
    csv: PathBuf,
    /// One line per start node: `start,size,fallback,members`.
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args)]
struct DesignArgs {
    #[arg(long)]
    outer_alist: PathBuf,
    #[arg(long)]
    outer_sidecar: PathBuf,
    #[arg(long)]
    inner_alist: PathBuf,
    #[arg(long)]
    inner_sidecar: PathBuf,
    /// Designed permutation.
    #[arg(long)]
    out: PathBuf,
    /// Sensitive sets the design satisfies.
    #[arg(long)]
    sets: PathBuf,
    /// Also write the pilot-selected random permutation.
    #[arg(long)]
    pi0_out: Option<PathBuf>,
    #[arg(long, default_value_t = 16)]
    candidates: usize,
    #[arg(long, default_value_t = 1)]
    base_seed: u64,
    #[arg(long, default_value_t = 1.8)]
    pilot_ebno: f64,
    #[arg(long, default_value_t = 20)]
    pilot_blocks: u64,
    #[arg(long, default_value_t = 1)]
    pilot_seed: u64,
    #[arg(long, default_value_t = 10)]
    outer_iters: usize,
    #[arg(long, default_value_t = 10)]
    inner_iters: usize,
    #[arg(long, default_value_t = 1)]
    step: usize,
    #[arg(long)]
    max_t: Option<usize>,
    #[arg(long, default_value_t = 1)]
    design_seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML config; relative names are also looked up in $IRABENCH_CONFIG_DIR.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    master_seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Comma-separated Eb/N0 list in dB.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    ebno: Option<Vec<f64>>,
    #[arg(long)]
    min_block_errors: Option<u64>,
    #[arg(long)]
    max_blocks: Option<u64>,
    #[arg(long)]
    noiseless: bool,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    out: PathBuf,
    /// Curve files; each file stem becomes the series name.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn construct(a: ConstructArgs) -> Result<()> {
    let mut ace = AceParams::default();
    if let Some(d) = a.d_ace {
        ace.d_ace = d;
    }
    if let Some(e) = a.eta {
        ace.eta = e;
    }
    let code = IraCode::construct(a.k, a.n, a.check_degree, ace, a.seed)?;
    write(&a.alist, &save_alist(code.h()))?;
    write(&a.sidecar, &code.sidecar().to_text())?;
    println!("constructed [{}, {}] effective_seed={}", code.n(), code.k(), code.effective_seed());
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    let code = load_code_files(&a.code.alist, &a.code.sidecar)?;
    let g = code.h().tanner();
    let hist = sensitivity_histogram(g);
    write(&a.csv, &hist.to_csv())?;
    let mut report = String::from("start,size,fallback,members\n");
    for s in detect_all(g) {
        let members: Vec<String> = s.members.iter().map(|m| m.to_string()).collect();
        writeln!(report, "{},{},{},{}", s.origin, s.len(), s.fallback, members.join(" ")).unwrap();
    }
    write(&a.report, &report)?;
    println!("analyzed {} nodes, max sensitivity {}", hist.counts.len(), hist.max_count());
    Ok(())
}

fn design(a: DesignArgs) -> Result<()> {
    let outer = load_code_files(&a.outer_alist, &a.outer_sidecar).context("outer code")?;
    let inner = load_code_files(&a.inner_alist, &a.inner_sidecar).context("inner code")?;
    if a.workers == 0 {
        bail!("workers must be at least 1");
    }
    let params = DesignParams {
        candidates: a.candidates,
        base_seed: a.base_seed,
        pilot_ebno_db: a.pilot_ebno,
        pilot_blocks: a.pilot_blocks,
        pilot_seed: a.pilot_seed,
        schedule: Schedule { outer_iters: a.outer_iters, inner_iters: a.inner_iters, freeze_converged: false },
        step: a.step,
        max_t: a.max_t.unwrap_or(usize::MAX),
        design_seed: a.design_seed,
    };
    params.schedule.validate()?;
    let out = ira_bench::sim::pool(a.workers)?.install(|| design_interleaver(&outer, &inner, &params))?;
    write(&a.out, &out.designed.to_text())?;
    write(&a.sets, &out.designed.design().sets.to_text())?;
    if let Some(p) = &a.pi0_out {
        write(p, &out.pi0.to_text())?;
    }
    let d = out.designed.design();
    println!("pi0 seed={} t={} repairs={}", out.pi0.seed(), d.t, d.repairs);
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let mut cfg = SimConfig::load(&a.config)?;
    if let Some(w) = a.workers {
        cfg.workers = w;
    }
    if let Some(s) = a.master_seed {
        cfg.master_seed = s;
    }
    if let Some(o) = a.output {
        cfg.output = o;
    }
    if let Some(e) = a.ebno {
        cfg.ebno_db = e;
    }
    if let Some(m) = a.min_block_errors {
        cfg.min_block_errors = m;
    }
    if let Some(m) = a.max_blocks {
        cfg.max_blocks = m;
    }
    cfg.noiseless |= a.noiseless;
    cfg.validate()?;
    run_curve(&cfg, |p| {
        println!("{} wall_seconds={:.3}", p.csv_row(), p.wall_seconds);
    })?;
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    let mut inputs = Vec::new();
    for path in &a.inputs {
        let series = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        inputs.push((series, text));
    }
    write(&a.out, &merge_curves(&inputs)?)
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let first = e.to_string().lines().next().unwrap_or_default().to_string();
            eprintln!("irabench: error: usage: {}", one_line(first.trim_start_matches("error: ")));
            return ExitCode::from(2);
        }
    };
    let result = match cli.cmd {
        Cmd::Construct(a) => construct(a),
        Cmd::Analyze(a) => analyze(a),
        Cmd::DesignInterleaver(a) => design(a),
        Cmd::Simulate(a) => simulate(a),
        Cmd::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("irabench: error: {}", one_line(&format!("{e:#}")));
            ExitCode::FAILURE
        }
    }
}
