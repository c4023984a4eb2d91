//! `vesseltopo` command-line front end.
//!
//! Failures print a single `error[Class]: message` line on stderr and exit
//! with status 1 (2 for command-line usage errors).

mod config;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use config::{EvalOpts, FragmentOpts, PipelineOpts, RepairOpts, SkeletonizeOpts};
use vesseltopo::fragment::FragmentParams;
use vesseltopo::harness::{
    aggregate_csv, breaks_csv, bridges_csv, evaluate_dataset, fragment_dir, markdown_table,
    per_image_csv, repair_dir, run_pipeline, skeletonize_file, EvalConfig, OutputFormat,
    PipelineOptions, Threads,
};
use vesseltopo::metrics::{PairOptions, StdMode, DEFAULT_PATCH_SIZE};
use vesseltopo::repair::{RepairParams, WidthMode};
use vesseltopo::Connectivity;

#[derive(Parser, Debug)]
#[command(
    name = "vesseltopo",
    version,
    about = "Topology-aware vessel mask evaluation and repair"
)]
struct Cli {
    /// JSON file whose keys mirror the subcommand's flags; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score predicted masks against same-named ground truth
    Eval(EvalOpts),
    /// Reconnect broken vessels in every mask of a directory
    Repair(RepairOpts),
    /// Cut seeded breaks into every ground-truth mask of a directory
    Fragment(FragmentOpts),
    /// Zhang-Suen skeleton of one mask file
    Skeletonize(SkeletonizeOpts),
    /// Fragment, repair and score a ground-truth directory in one go
    Pipeline(PipelineOpts),
}

#[derive(Debug)]
pub enum CliError {
    Core(vesseltopo::Error),
    Usage(String),
    Config(String),
    Io(String),
}

impl CliError {
    fn class(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.class(),
            CliError::Usage(_) => "UsageError",
            CliError::Config(_) => "ConfigError",
            CliError::Io(_) => "IoError",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) | CliError::Config(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<vesseltopo::Error> for CliError {
    fn from(e: vesseltopo::Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Merges flags over the config file, if any.
fn layered<T: Default + for<'de> Deserialize<'de>>(
    flags: T,
    config: Option<&Path>,
    or: fn(T, T) -> T,
) -> Result<T> {
    match config {
        Some(path) => Ok(or(flags, config::load(path)?)),
        None => Ok(flags),
    }
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| CliError::Usage(format!("missing required option --{flag}")))
}

fn parsed<T: FromStr<Err = vesseltopo::Error>>(value: Option<String>, default: T) -> Result<T> {
    value.map_or(Ok(default), |v| v.parse().map_err(CliError::Core))
}

fn connectivity(conn: Option<u8>) -> Result<Connectivity> {
    Ok(conn.map_or(Ok(Connectivity::Eight), Connectivity::try_from)?)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn repair_params(
    dmax: Option<f64>,
    cos: Option<f64>,
    width: Option<String>,
) -> Result<RepairParams> {
    let defaults = RepairParams::default();
    let params = RepairParams {
        d_max: dmax.unwrap_or(defaults.d_max),
        cos_min: cos.unwrap_or(defaults.cos_min),
        width_mode: parsed(width, WidthMode::DistanceTransform)?,
    };
    params.validate()?;
    Ok(params)
}

fn fragment_params(
    breaks: Option<usize>,
    rmin: Option<u32>,
    rmax: Option<u32>,
    seed: Option<u64>,
) -> Result<FragmentParams> {
    let defaults = FragmentParams::default();
    let params = FragmentParams {
        breaks: breaks.unwrap_or(defaults.breaks),
        min_radius: rmin.unwrap_or(defaults.min_radius),
        max_radius: rmax.unwrap_or(defaults.max_radius),
        seed: seed.unwrap_or(defaults.seed),
    };
    params.validate()?;
    Ok(params)
}

fn eval(opts: EvalOpts) -> Result<()> {
    let mut cfg = EvalConfig::new(required(opts.pred, "pred")?, required(opts.gt, "gt")?);
    cfg.patch_size = opts.patch.unwrap_or(DEFAULT_PATCH_SIZE);
    cfg.connectivity = connectivity(opts.conn)?;
    cfg.std_mode = parsed(opts.std, StdMode::Population)?;
    cfg.output = parsed(opts.out, OutputFormat::Csv)?;
    cfg.threads = parsed(opts.threads, Threads::Auto)?;
    let report = evaluate_dataset(&cfg)?;
    print!("{}", cfg.render(&report)?);
    Ok(())
}

fn repair(opts: RepairOpts) -> Result<()> {
    let input = required(opts.input, "in")?;
    let out = required(opts.out, "out")?;
    let params = repair_params(opts.dmax, opts.cos, opts.width)?;
    let threads = parsed(opts.threads, Threads::Auto)?;
    let images = repair_dir(&input, &out, &params, threads)?;
    if let Some(path) = opts.bridges {
        write_text(&path, &bridges_csv(&images)?)?;
    }
    let bridges: usize = images.iter().map(|i| i.bridges.len()).sum();
    eprintln!("repaired {} masks with {bridges} bridges", images.len());
    Ok(())
}

fn fragment(opts: FragmentOpts) -> Result<()> {
    let gt = required(opts.gt, "gt")?;
    let out = required(opts.out, "out")?;
    let params = fragment_params(opts.breaks, opts.rmin, opts.rmax, opts.seed)?;
    let threads = parsed(opts.threads, Threads::Auto)?;
    let images = fragment_dir(&gt, &out, &params, threads)?;
    if let Some(path) = opts.records {
        write_text(&path, &breaks_csv(&images)?)?;
    }
    let breaks: usize = images.iter().map(|i| i.breaks.len()).sum();
    eprintln!("fragmented {} masks with {breaks} breaks", images.len());
    Ok(())
}

fn skeletonize(opts: SkeletonizeOpts) -> Result<()> {
    let input = required(opts.input, "in")?;
    let out = required(opts.out, "out")?;
    skeletonize_file(&input, &out)?;
    Ok(())
}

fn pipeline(opts: PipelineOpts) -> Result<()> {
    let gt = required(opts.gt, "gt")?;
    let patch_size = opts.patch.unwrap_or(DEFAULT_PATCH_SIZE);
    if patch_size == 0 {
        return Err(vesseltopo::Error::Domain("patch size must be positive".into()).into());
    }
    let pair = PairOptions {
        patch_size,
        connectivity: connectivity(opts.conn)?,
    };
    let run = PipelineOptions {
        fragment: fragment_params(opts.breaks, opts.rmin, opts.rmax, opts.seed)?,
        repair: repair_params(opts.dmax, opts.cos, opts.width)?,
        pair,
        std_mode: parsed(opts.std, StdMode::Population)?,
        threads: parsed(opts.threads, Threads::Auto)?,
    };
    let report = run_pipeline(&gt, &run)?;
    match parsed(opts.out, OutputFormat::Markdown)? {
        OutputFormat::Markdown => {
            println!("Fragmented vs ground truth\n");
            println!("{}", markdown_table(&report.before.aggregate, pair));
            println!("Repaired vs ground truth\n");
            println!("{}", markdown_table(&report.after.aggregate, pair));
            println!("{}", report.summary());
        }
        OutputFormat::Csv => {
            for (stage, r) in [("fragmented", &report.before), ("repaired", &report.after)] {
                println!("# {stage}");
                println!("{}", per_image_csv(&r.per_image)?);
                print!("{}", aggregate_csv(&r.aggregate)?);
                println!();
            }
            eprintln!("{}", report.summary());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let config = cli.config.as_deref();
    match cli.command {
        Command::Eval(o) => eval(layered(o, config, EvalOpts::or)?),
        Command::Repair(o) => repair(layered(o, config, RepairOpts::or)?),
        Command::Fragment(o) => fragment(layered(o, config, FragmentOpts::or)?),
        Command::Skeletonize(o) => skeletonize(layered(o, config, SkeletonizeOpts::or)?),
        Command::Pipeline(o) => pipeline(layered(o, config, PipelineOpts::or)?),
    }
}

fn fail(err: &CliError) {
    let message = err.to_string().replace('\n', " ");
    eprintln!("error[{}]: {message}", err.class());
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            fail(&CliError::Usage(
                first.trim_start_matches("error: ").to_string(),
            ));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            fail(&e);
            match e {
                CliError::Usage(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
