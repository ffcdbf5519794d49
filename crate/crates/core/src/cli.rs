//! Command-line front end.
//!
//! `run` executes one search and writes a transcript and hazard log, `bench`
//! repeats searches over seeds and prints a T / sigma / N_miss table, and
//! `replay` re-executes a recorded episode into a frame-by-frame trace.
//!
//! Exit codes: `run` returns 0 when a hazard was found and 1 otherwise;
//! `replay` returns 3 when the replay diverges from the recording; every
//! command returns 2 on usage or input errors.

use crate::scenarios::{load, Builtin};
use crate::search::{
    divergences, read_transcript, replay, search, trace, write_hazard_log, write_transcript, Algorithm, SearchError,
    SearchParams, TRACE_SCHEMA, TRACE_VERSION,
};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

pub const EXIT_FOUND: i32 = 0;
pub const EXIT_NOT_FOUND: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

pub const BENCH_SCHEMA: &str = "hazardsim-bench";

#[derive(Debug, Parser)]
#[command(
    name = "hazardsim",
    version,
    about = "Adversarial virtual-human hazard search for robot workcells"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one search and write its transcript and hazard log.
    Run(RunArgs),
    /// Repeat searches over seeds and summarize iterations to first hazard.
    Bench(BenchArgs),
    /// Re-execute a recorded episode and write a frame-by-frame trace.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    /// Episodes per search.
    #[arg(long, default_value_t = 320)]
    pub iterations: usize,
    /// Actions per episode.
    #[arg(long = "k-max", default_value_t = 8)]
    pub k_max: usize,
    /// Overrides such as `k_pw=2,alpha=0.3,c=1.5,r_e=1`.
    #[arg(long, value_delimiter = ',', value_name = "KEY=VALUE")]
    pub params: Vec<String>,
}

impl SearchArgs {
    pub fn to_params(&self, seed: u64) -> Result<SearchParams, SearchError> {
        let mut p = SearchParams {
            max_iterations: self.iterations,
            k_max: self.k_max,
            seed,
            ..SearchParams::default()
        };
        for kv in &self.params {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| SearchError::Param(format!("expected key=value, got `{kv}`")))?;
            p.set(k.trim(), v.trim())?;
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Builtin name (s1..s6) or scenario file.
    #[arg(long)]
    pub scenario: String,
    #[arg(long, default_value = "mcts")]
    pub algo: Algorithm,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Stop after the first episode that reaches an unsafe state.
    #[arg(long)]
    pub stop_on_first: bool,
    /// Directory for `transcript.jsonl` and `hazards.jsonl`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Scenarios to run; all builtins when omitted.
    #[arg(long, value_delimiter = ',')]
    pub scenario: Vec<String>,
    /// Algorithms to run; both when omitted.
    #[arg(long, value_delimiter = ',')]
    pub algo: Vec<Algorithm>,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    /// Run `i` uses seed `seed + i`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Write the summary with per-run data as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub transcript: PathBuf,
    /// Zero-based episode index.
    #[arg(long)]
    pub episode: usize,
    /// Scenario to replay in; the one named in the transcript when omitted.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Trace file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and executes the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { 0 };
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::Run(a) => cmd_run(&a, &mut out),
        Command::Bench(a) => cmd_bench(&a, &mut out),
        Command::Replay(a) => cmd_replay(&a, &mut out),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            let _ = out.flush();
            eprintln!("error: {msg}");
            EXIT_ERROR
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, String> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| format!("cannot create `{}`: {e}", path.display()))
}

fn io_err(e: io::Error) -> String {
    e.to_string()
}

pub fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<i32, String> {
    let params = SearchParams {
        stop_on_first: args.stop_on_first,
        ..args.search.to_params(args.seed).map_err(|e| e.to_string())?
    };
    let scenario = load(&args.scenario).map_err(|e| e.to_string())?;
    let world = scenario.world().map_err(|e| e.to_string())?;
    let result = search(&world, args.algo, &params).map_err(|e| e.to_string())?;

    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).map_err(|e| format!("cannot create `{}`: {e}", dir.display()))?;
        let mut t = create(&dir.join("transcript.jsonl"))?;
        write_transcript(&mut t, &args.scenario, &result).map_err(io_err)?;
        t.flush().map_err(io_err)?;
        let mut h = create(&dir.join("hazards.jsonl"))?;
        write_hazard_log(&mut h, &args.scenario, &result).map_err(io_err)?;
        h.flush().map_err(io_err)?;
    }

    writeln!(out, "scenario: {}", args.scenario).map_err(io_err)?;
    writeln!(out, "algorithm: {}", args.algo).map_err(io_err)?;
    writeln!(out, "seed: {}", args.seed).map_err(io_err)?;
    writeln!(out, "episodes: {}", result.episodes.len()).map_err(io_err)?;
    writeln!(out, "hazards: {}", result.hazards.len()).map_err(io_err)?;
    match (result.first_hazard_iteration, result.hazards.first()) {
        (Some(it), Some(h)) => {
            writeln!(out, "first_hazard_iteration: {it}").map_err(io_err)?;
            writeln!(
                out,
                "first_hazard: {} {:.1} N > {:.1} N at step {}",
                h.body_region, h.force_n, h.max_force_n, h.step
            )
            .map_err(io_err)?;
            Ok(EXIT_FOUND)
        }
        _ => {
            writeln!(out, "first_hazard_iteration: none").map_err(io_err)?;
            Ok(EXIT_NOT_FOUND)
        }
    }
}

/// Iterations to first hazard for one scenario and algorithm over all runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub scenario: String,
    pub algorithm: Algorithm,
    /// Mean over successful runs.
    pub mean: Option<f64>,
    /// Sample standard deviation over successful runs; 0 for a single one.
    pub std_dev: Option<f64>,
    pub misses: usize,
    /// First-hazard iteration per run, `None` for a miss.
    pub first_hazard: Vec<Option<usize>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSummary {
    pub schema: String,
    pub version: u32,
    pub runs: usize,
    pub seed_base: u64,
    pub params: SearchParams,
    pub cells: Vec<CellSummary>,
}

impl BenchmarkSummary {
    pub fn cell(&self, scenario: &str, algorithm: Algorithm) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.scenario == scenario && c.algorithm == algorithm)
    }
}

/// Mean and sample standard deviation of the successful runs.
pub fn mean_std(values: &[Option<usize>]) -> (Option<f64>, Option<f64>) {
    let ok: Vec<f64> = values.iter().flatten().map(|&v| v as f64).collect();
    if ok.is_empty() {
        return (None, None);
    }
    let n = ok.len() as f64;
    let mean = ok.iter().sum::<f64>() / n;
    if ok.len() == 1 {
        return (Some(mean), Some(0.0));
    }
    let var = ok.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some(var.sqrt()))
}

/// Runs every scenario x algorithm cell `runs` times with seeds
/// `params.seed + i`, stopping each run at its first hazard. Runs execute in
/// parallel; the summary is in input order.
pub fn bench(scenarios: &[String], algorithms: &[Algorithm], runs: usize, params: &SearchParams) -> BenchmarkSummary {
    let worlds: Vec<Result<_, String>> = scenarios
        .iter()
        .map(|s| {
            load(s)
                .map_err(|e| e.to_string())
                .and_then(|sc| sc.world().map_err(|e| e.to_string()))
        })
        .collect();
    let jobs: Vec<(usize, Algorithm, usize)> = (0..scenarios.len())
        .flat_map(|s| algorithms.iter().flat_map(move |&a| (0..runs).map(move |r| (s, a, r))))
        .collect();
    let results: Vec<Result<Option<usize>, String>> = jobs
        .par_iter()
        .map(|&(s, algo, r)| {
            let world = worlds[s].as_ref().map_err(Clone::clone)?;
            let p = SearchParams {
                seed: params.seed.wrapping_add(r as u64),
                stop_on_first: true,
                ..*params
            };
            search(world, algo, &p)
                .map(|res| res.first_hazard_iteration)
                .map_err(|e| e.to_string())
        })
        .collect();

    let mut cells = Vec::new();
    for (chunk, (s, a, _)) in results.chunks(runs.max(1)).zip(jobs.iter().step_by(runs.max(1))) {
        let error = chunk.iter().find_map(|r| r.as_ref().err().cloned());
        let first: Vec<Option<usize>> = chunk.iter().map(|r| r.clone().unwrap_or(None)).collect();
        let (mean, std_dev) = mean_std(&first);
        cells.push(CellSummary {
            scenario: scenarios[*s].clone(),
            algorithm: *a,
            mean,
            std_dev,
            misses: first.iter().filter(|f| f.is_none()).count(),
            first_hazard: first,
            error,
        });
    }
    BenchmarkSummary {
        schema: BENCH_SCHEMA.into(),
        version: 1,
        runs,
        seed_base: params.seed,
        params: SearchParams {
            stop_on_first: true,
            ..*params
        },
        cells,
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.1}"))
}

/// Table with one row per scenario and T, sigma, N_miss per algorithm.
pub fn format_table(summary: &BenchmarkSummary) -> String {
    let mut scenarios: Vec<&str> = Vec::new();
    let mut algorithms: Vec<Algorithm> = Vec::new();
    for c in &summary.cells {
        if !scenarios.contains(&c.scenario.as_str()) {
            scenarios.push(&c.scenario);
        }
        if !algorithms.contains(&c.algorithm) {
            algorithms.push(c.algorithm);
        }
    }
    let width = scenarios.iter().map(|s| s.len()).max().unwrap_or(0).max(8);
    let mut s = format!("{:<width$}", "");
    for a in &algorithms {
        s += &format!(" | {:<22}", a.key());
    }
    s += &format!("\n{:<width$}", "scenario");
    for _ in &algorithms {
        s += &format!(" | {:>7} {:>7} {:>6}", "T", "sigma", "N_miss");
    }
    s.push('\n');
    for sc in &scenarios {
        s += &format!("{sc:<width$}");
        for a in &algorithms {
            match summary.cell(sc, *a) {
                Some(c) if c.error.is_some() => s += &format!(" | {:>22}", "error"),
                Some(c) => s += &format!(" | {:>7} {:>7} {:>6}", fmt_opt(c.mean), fmt_opt(c.std_dev), c.misses),
                None => s += &format!(" | {:>22}", ""),
            }
        }
        s.push('\n');
    }
    s += &format!(
        "runs: {}, seeds {}..{}, iterations: {}, k_max: {}\n",
        summary.runs,
        summary.seed_base,
        summary.seed_base + summary.runs as u64,
        summary.params.max_iterations,
        summary.params.k_max
    );
    s
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<i32, String> {
    if args.runs == 0 {
        return Err("--runs must be at least 1".into());
    }
    let params = args.search.to_params(args.seed).map_err(|e| e.to_string())?;
    let scenarios: Vec<String> = if args.scenario.is_empty() {
        Builtin::ALL.iter().map(|b| b.key().to_string()).collect()
    } else {
        args.scenario.clone()
    };
    let algorithms: Vec<Algorithm> = if args.algo.is_empty() {
        Algorithm::ALL.to_vec()
    } else {
        args.algo.clone()
    };
    let summary = bench(&scenarios, &algorithms, args.runs, &params);
    write!(out, "{}", format_table(&summary)).map_err(io_err)?;
    if let Some(path) = &args.out {
        let mut f = create(path)?;
        serde_json::to_writer_pretty(&mut f, &summary).map_err(|e| e.to_string())?;
        f.write_all(b"\n").map_err(io_err)?;
        f.flush().map_err(io_err)?;
    }
    let mut failed = false;
    for c in &summary.cells {
        if let Some(e) = &c.error {
            eprintln!("error: {} / {}: {e}", c.scenario, c.algorithm);
            failed = true;
        }
    }
    Ok(if failed { EXIT_ERROR } else { 0 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub schema: String,
    pub version: u32,
    pub scenario: String,
    pub episode: usize,
    pub actions: Vec<usize>,
    pub rows: usize,
}

pub fn cmd_replay(args: &ReplayArgs, out: &mut dyn Write) -> Result<i32, String> {
    let file = File::open(&args.transcript).map_err(|e| format!("cannot open `{}`: {e}", args.transcript.display()))?;
    let (header, episodes) = read_transcript(BufReader::new(file))?;
    let recorded = episodes
        .iter()
        .find(|e| e.episode == args.episode)
        .ok_or_else(|| format!("transcript has no episode {}", args.episode))?;
    let name = args.scenario.as_deref().unwrap_or(&header.scenario);
    let world = load(name)
        .map_err(|e| e.to_string())?
        .world()
        .map_err(|e| e.to_string())?;
    let replayed = replay(&world, &recorded.actions, &header.params).map_err(|e| e.to_string())?;
    let rows = trace(&world, &recorded.actions).map_err(|e| e.to_string())?;

    let trace_header = TraceHeader {
        schema: TRACE_SCHEMA.into(),
        version: TRACE_VERSION,
        scenario: name.into(),
        episode: args.episode,
        actions: recorded.actions.clone(),
        rows: rows.len(),
    };
    let write_trace = |w: &mut dyn Write| -> Result<(), String> {
        serde_json::to_writer(&mut *w, &trace_header).map_err(|e| e.to_string())?;
        w.write_all(b"\n").map_err(io_err)?;
        for r in &rows {
            serde_json::to_writer(&mut *w, r).map_err(|e| e.to_string())?;
            w.write_all(b"\n").map_err(io_err)?;
        }
        w.flush().map_err(io_err)
    };
    match &args.out {
        Some(path) => {
            let mut f = create(path)?;
            write_trace(&mut f)?;
        }
        None => write_trace(out)?,
    }

    let diffs = divergences(recorded, &replayed, 1e-9);
    if !diffs.is_empty() {
        for d in &diffs {
            eprintln!("diverged: {d}");
        }
        return Ok(EXIT_DIVERGED);
    }
    if args.out.is_some() {
        match &replayed.hazard {
            Some(h) => writeln!(
                out,
                "episode {} reproduced: {} {:.1} N at step {}",
                args.episode, h.body_region, h.force_n, h.step
            ),
            None => writeln!(out, "episode {} reproduced: no hazard", args.episode),
        }
        .map_err(io_err)?;
    }
    Ok(0)
}
