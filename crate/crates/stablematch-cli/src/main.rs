//! Command-line runner for the matching-market experiment harness.
//!
//! Subcommands map one-to-one onto the library's experiment entry points
//! and write the corresponding CSV artifacts. All randomness flows from
//! `--seed` (defaulting to a fixed constant, never the clock), so any
//! command run twice with the same seed — at any `--threads` setting —
//! produces byte-identical files.
//!
//! Exit codes: 0 success, 1 demo-fixture mismatch, 2 usage or configuration
//! error, 3 output not writable.

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use stablematch::csv as csvout;
use stablematch::engines::{doctor_da, interview_da_traced, TraceEvent};
use stablematch::experiments::{
    aggregate, compare_policies, heatmap_lk, ideal_comparison, sweep_k, Parallelism, SweepConfig,
};
use stablematch::fixtures;
use stablematch::market::Market;
use stablematch::prefgen::GenParams;
use stablematch::stability::{blocking_pairs, BlockReport};
use stablematch::theory::oracle_grid;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const DEFAULT_DOCTORS: usize = 470;
const DEFAULT_HOSPITALS: usize = 400;
const DEFAULT_BETA: f64 = 40.0;
const DEFAULT_GAMMA: f64 = 20.0;
const DEFAULT_L: usize = 25;
const DEFAULT_K_MIN: usize = 1;
const DEFAULT_K_MAX: usize = 100;
const DEFAULT_K_CAP: usize = 5;
const DEFAULT_REPS: usize = 100;
const DEFAULT_SEED: u64 = 42;
const DEFAULT_GRID: usize = 12;
const DEFAULT_HEATMAP_L_MIN: usize = 1;
const DEFAULT_HEATMAP_L_MAX: usize = 10;

#[derive(Parser)]
#[command(
    name = "stablematch",
    version,
    about = "Two-sided matching with an interview stage: experiments and diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the built-in four-by-four demonstration market and check it
    /// against its hand-verified outcome tables
    Demo(DemoArgs),
    /// Sweep the uniform doctor interview capacity k; writes sweep.csv and
    /// sweep_agg.csv
    Sweep(RunArgs),
    /// Compare a capped doctor search against an unconstrained one; writes
    /// compare.csv and hist.csv
    Compare(RunArgs),
    /// Compare the capped pipeline against matching straight on the full
    /// preferences; writes ideal.csv
    Ideal(RunArgs),
    /// Mean match rate over a grid of hospital and doctor capacities;
    /// writes heatmap.csv
    Heatmap(HeatmapArgs),
    /// Closed-form predictions versus pipeline runs on shared-ranking
    /// markets; writes oracle.csv and prints a discrepancy summary
    Oracle(OracleArgs),
}

/// Flags shared by the experiment subcommands. Every value is optional on
/// the command line; unset values fall back to `--config` entries, then to
/// the built-in defaults.
#[derive(Args, Debug, Default, Clone)]
struct RunArgs {
    /// Number of doctors
    #[arg(long)]
    doctors: Option<usize>,
    /// Number of hospitals
    #[arg(long)]
    hospitals: Option<usize>,
    /// Weight on the common-quality trait
    #[arg(long)]
    beta: Option<f64>,
    /// Weight on squared fit distance
    #[arg(long)]
    gamma: Option<f64>,
    /// Interview capacity of every hospital
    #[arg(long)]
    l: Option<usize>,
    /// Smallest doctor capacity in a sweep
    #[arg(long)]
    k_min: Option<usize>,
    /// Largest doctor capacity in a sweep
    #[arg(long)]
    k_max: Option<usize>,
    /// Doctor capacity of the capped policy arm
    #[arg(long)]
    k_cap: Option<usize>,
    /// Number of replications
    #[arg(long)]
    reps: Option<usize>,
    /// Master random seed
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for output files
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads: a number, or "auto"
    #[arg(long)]
    threads: Option<String>,
    /// TOML file with the same keys as these flags; flags win
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct HeatmapArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Smallest hospital capacity row
    #[arg(long)]
    l_min: Option<usize>,
    /// Largest hospital capacity row
    #[arg(long)]
    l_max: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct OracleArgs {
    /// Largest market side (sizes 2..=grid) and capacity (1..=grid)
    #[arg(long)]
    grid: Option<usize>,
    /// Directory for output files
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML file with the same keys as these flags; flags win
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct DemoArgs {
    /// Emit the full fixture outcome as JSON instead of text
    #[arg(long)]
    json: bool,
    /// If set, also write the demo's trace and blocking-pair CSVs here
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure that already knows its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into() }
    }

    fn unwritable(path: &Path, err: std::io::Error) -> Failure {
        Failure { code: 3, message: format!("cannot write {}: {err}", path.display()) }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    // Die quietly when a downstream pager or `head` closes the pipe instead
    // of panicking mid-print.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Demo(args) => cmd_demo(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Compare(args) => cmd_compare(&args),
        Command::Ideal(args) => cmd_ideal(&args),
        Command::Heatmap(args) => cmd_heatmap(&args),
        Command::Oracle(args) => cmd_oracle(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// The subset of settings that may come from a `--config` file. Keys mirror
/// the flag names; unknown keys are rejected.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    doctors: Option<usize>,
    hospitals: Option<usize>,
    beta: Option<f64>,
    gamma: Option<f64>,
    l: Option<usize>,
    k_min: Option<usize>,
    k_max: Option<usize>,
    k_cap: Option<usize>,
    reps: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    threads: Option<String>,
    l_min: Option<usize>,
    l_max: Option<usize>,
    grid: Option<usize>,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<FileConfig, Failure> {
        let Some(path) = path else { return Ok(FileConfig::default()) };
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| Failure::usage(format!("bad config {}: {e}", path.display())))
    }
}

/// Fully resolved settings: defaults, overridden by config file, overridden
/// by flags.
struct Settings {
    gen: GenParams,
    l: usize,
    k_min: usize,
    k_max: usize,
    k_cap: usize,
    reps: usize,
    out: PathBuf,
    parallelism: Parallelism,
    l_min: usize,
    l_max: usize,
}

fn parse_threads(value: &str) -> Result<Parallelism, Failure> {
    if value == "auto" {
        return Ok(Parallelism::Auto);
    }
    match value.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(Parallelism::Threads(n)),
        _ => Err(Failure::usage(format!(
            "--threads must be a positive integer or \"auto\", got {value:?}"
        ))),
    }
}

fn resolve(args: &RunArgs, heat: Option<&HeatmapArgs>) -> Result<Settings, Failure> {
    let file = FileConfig::load(args.config.as_deref())?;
    let doctors = args.doctors.or(file.doctors).unwrap_or(DEFAULT_DOCTORS);
    let hospitals = args.hospitals.or(file.hospitals).unwrap_or(DEFAULT_HOSPITALS);
    let beta = args.beta.or(file.beta).unwrap_or(DEFAULT_BETA);
    let gamma = args.gamma.or(file.gamma).unwrap_or(DEFAULT_GAMMA);
    let l = args.l.or(file.l).unwrap_or(DEFAULT_L);
    let k_min = args.k_min.or(file.k_min).unwrap_or(DEFAULT_K_MIN);
    let k_max = args.k_max.or(file.k_max).unwrap_or(DEFAULT_K_MAX);
    let k_cap = args.k_cap.or(file.k_cap).unwrap_or(DEFAULT_K_CAP);
    let reps = args.reps.or(file.reps).unwrap_or(DEFAULT_REPS);
    let seed = args.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let out = args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("."));
    let threads_value = args.threads.clone().or(file.threads);
    let parallelism = match threads_value.as_deref() {
        Some(value) => parse_threads(value)?,
        None => Parallelism::Auto,
    };
    let l_min = heat
        .and_then(|h| h.l_min)
        .or(file.l_min)
        .unwrap_or(DEFAULT_HEATMAP_L_MIN);
    let l_max = heat
        .and_then(|h| h.l_max)
        .or(file.l_max)
        .unwrap_or(DEFAULT_HEATMAP_L_MAX);

    if doctors < 2 || hospitals < 2 {
        return Err(Failure::usage("need at least two doctors and two hospitals"));
    }
    if beta < 0.0 || gamma < 0.0 {
        return Err(Failure::usage("--beta and --gamma must be non-negative"));
    }
    if l < 1 || k_cap < 1 {
        return Err(Failure::usage("--l and --k-cap must be at least 1"));
    }
    if !(1 <= k_min && k_min <= k_max) {
        return Err(Failure::usage("need 1 <= --k-min <= --k-max"));
    }
    if !(1 <= l_min && l_min <= l_max) {
        return Err(Failure::usage("need 1 <= --l-min <= --l-max"));
    }
    if reps < 1 {
        return Err(Failure::usage("--reps must be at least 1"));
    }

    Ok(Settings {
        gen: GenParams { beta, gamma, n_doctors: doctors, n_hospitals: hospitals, seed },
        l,
        k_min,
        k_max,
        k_cap,
        reps,
        out,
        parallelism,
        l_min,
        l_max,
    })
}

/// Write one CSV file under `dir`, creating the directory if needed, and
/// print the one-line summary.
fn emit<F>(dir: &Path, name: &str, rows: usize, write: F) -> CmdResult
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    fs::create_dir_all(dir).map_err(|e| Failure::unwritable(dir, e))?;
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| Failure::unwritable(&path, e))?;
    let mut w = BufWriter::new(file);
    write(&mut w).and_then(|()| w.flush()).map_err(|e| Failure::unwritable(&path, e))?;
    println!("wrote {} ({rows} rows)", path.display());
    Ok(())
}

fn cmd_sweep(args: &RunArgs) -> CmdResult {
    let s = resolve(args, None)?;
    let config = SweepConfig {
        gen: s.gen,
        l: s.l,
        k_min: s.k_min,
        k_max: s.k_max,
        replications: s.reps,
        parallelism: s.parallelism,
    };
    let rows = sweep_k(&config);
    let agg = aggregate(&rows);
    emit(&s.out, "sweep.csv", rows.len(), |w| csvout::write_sweep(w, &rows))?;
    emit(&s.out, "sweep_agg.csv", agg.len(), |w| csvout::write_sweep_agg(w, &agg))?;
    Ok(())
}

fn cmd_compare(args: &RunArgs) -> CmdResult {
    let s = resolve(args, None)?;
    let (rows, hist) = compare_policies(&s.gen, s.l, s.k_cap, s.reps, s.parallelism);
    emit(&s.out, "compare.csv", rows.len(), |w| csvout::write_compare(w, &rows))?;
    emit(&s.out, "hist.csv", hist.len(), |w| csvout::write_hist(w, &hist))?;
    Ok(())
}

fn cmd_ideal(args: &RunArgs) -> CmdResult {
    let s = resolve(args, None)?;
    let rows = ideal_comparison(&s.gen, s.l, s.k_cap, s.reps, s.parallelism);
    emit(&s.out, "ideal.csv", rows.len(), |w| csvout::write_ideal(w, &rows))?;
    Ok(())
}

fn cmd_heatmap(args: &HeatmapArgs) -> CmdResult {
    let s = resolve(&args.run, Some(args))?;
    let ls: Vec<usize> = (s.l_min..=s.l_max).collect();
    let ks: Vec<usize> = (s.k_min..=s.k_max).collect();
    let cells = heatmap_lk(&s.gen, &ls, &ks, s.reps, s.parallelism);
    emit(&s.out, "heatmap.csv", cells.len(), |w| csvout::write_heatmap(w, &cells))?;
    Ok(())
}

fn cmd_oracle(args: &OracleArgs) -> CmdResult {
    let file = FileConfig::load(args.config.as_deref())?;
    let grid = args.grid.or(file.grid).unwrap_or(DEFAULT_GRID);
    if grid < 2 {
        return Err(Failure::usage("--grid must be at least 2"));
    }
    let out = args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("."));
    let rows = oracle_grid(grid, grid);
    let matched_mismatch = rows.iter().filter(|r| r.predicted_matched != r.observed_matched).count();
    let blocking_mismatch =
        rows.iter().filter(|r| r.predicted_blocking != r.observed_blocking).count();
    let naive_high = rows
        .iter()
        .filter(|r| r.k > r.l && r.naive_blocking != r.observed_blocking as i64)
        .count();
    let naive_low = rows
        .iter()
        .filter(|r| r.k < r.l && r.naive_blocking != r.observed_blocking as i64)
        .count();
    emit(&out, "oracle.csv", rows.len(), |w| csvout::write_oracle(w, &rows))?;
    println!(
        "exact forms: {matched_mismatch} matched mismatches, {blocking_mismatch} blocking mismatches over {} cells",
        rows.len()
    );
    println!(
        "first-cut sum disagrees with the pipeline on {naive_high} cells with k>l and {naive_low} cells with k<l"
    );
    Ok(())
}

/// Everything the demo fixture produces, in a serializable form.
#[derive(Serialize, PartialEq, Debug)]
struct DemoSide {
    interviews: Vec<Vec<usize>>,
    matching: Vec<Option<usize>>,
    blocking_pairs: Vec<(usize, usize)>,
    stable: bool,
}

#[derive(Serialize, PartialEq, Debug)]
struct DemoReport {
    base: DemoSide,
    raised: DemoSide,
}

fn demo_side(market: &Market, arrangement: &stablematch::market::Arrangement) -> (DemoSide, Vec<TraceEvent>, BlockReport) {
    let (nu, trace) = interview_da_traced(market, arrangement);
    let restricted = market.restrict(&nu).expect("demo interviews fit the market");
    let mu = doctor_da(&restricted);
    let report = blocking_pairs(market, &mu);
    let side = DemoSide {
        interviews: (0..market.n_doctors()).map(|d| nu.of_doctor(d).to_vec()).collect(),
        matching: mu.doctor_assignments().to_vec(),
        blocking_pairs: report.pairs.clone(),
        stable: report.is_stable(),
    };
    (side, trace, report)
}

fn expected_demo() -> DemoReport {
    DemoReport {
        base: DemoSide {
            interviews: vec![vec![0], vec![1, 2], vec![2], vec![3]],
            matching: vec![Some(0), Some(1), Some(2), Some(3)],
            blocking_pairs: vec![],
            stable: true,
        },
        raised: DemoSide {
            interviews: vec![vec![0, 1], vec![2, 3], vec![2], vec![3]],
            matching: vec![Some(0), Some(2), None, Some(3)],
            blocking_pairs: vec![(1, 1), (2, 1), (3, 1)],
            stable: false,
        },
    }
}

fn print_demo_side(label: &str, side: &DemoSide) {
    println!("{label}:");
    for (d, hs) in side.interviews.iter().enumerate() {
        println!("  doctor {d} interviews at {hs:?}");
    }
    let assignments: Vec<String> = side
        .matching
        .iter()
        .enumerate()
        .map(|(d, h)| match h {
            Some(h) => format!("d{d}-h{h}"),
            None => format!("d{d}-unmatched"),
        })
        .collect();
    println!("  final matching: {}", assignments.join(" "));
    if side.stable {
        println!("  blocking pairs: none (stable)");
    } else {
        let pairs: Vec<String> =
            side.blocking_pairs.iter().map(|(d, h)| format!("(d{d},h{h})")).collect();
        println!("  blocking pairs: {} (unstable)", pairs.join(" "));
    }
}

fn cmd_demo(args: &DemoArgs) -> CmdResult {
    let market = fixtures::demo_market();
    let (base_arr, raised_arr) = fixtures::demo_arrangements();
    let (base, base_trace, _) = demo_side(&market, &base_arr);
    let (raised, raised_trace, raised_report) = demo_side(&market, &raised_arr);
    let report = DemoReport { base, raised };

    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("demo report serializes")
        );
    } else {
        print_demo_side("base capacities", &report.base);
        print_demo_side("raised capacities", &report.raised);
    }

    if let Some(dir) = &args.out {
        emit(dir, "demo_trace_base.csv", base_trace.len(), |w| {
            csvout::write_trace(w, &base_trace)
        })?;
        emit(dir, "demo_trace_raised.csv", raised_trace.len(), |w| {
            csvout::write_trace(w, &raised_trace)
        })?;
        emit(dir, "demo_blocking_raised.csv", raised_report.count(), |w| {
            csvout::write_blocking(w, &raised_report)
        })?;
    }

    let expected = expected_demo();
    if report != expected {
        return Err(Failure {
            code: 1,
            message: format!("demo outcome diverged from the expected tables: {report:?}"),
        });
    }
    if !args.json {
        println!("demo outcomes match the expected tables");
    }
    Ok(())
}
