//! `hmsim`: run, sweep and compare memory-stack simulations.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use hmsim::config::ExperimentConfig;
use hmsim::engine::{run_simulation, workload_records, StatsReport};
use hmsim::report::{comparison_table, decode_report, encode_report, timeline_csv};
use hmsim::sweep::{expand, merged_csv, run_sweep, SweepAxis};
use hmsim::workload::{generate, serialize_trace, validate_trace};

#[derive(Parser)]
#[command(name = "hmsim", version, about = "Hybrid DRAM/SCM memory-stack simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Config file; bare names are also looked up in the config directory.
    config: Option<String>,
    /// Directory searched for config names that are not existing paths.
    #[arg(long, env = "HMSIM_CONFIG_DIR")]
    config_dir: Option<PathBuf>,
    /// Dotted-key override such as `policy=always_fill` (repeatable).
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its JSON summary and CSV timeline.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Directory for outputs not named in the config.
        #[arg(short, long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run the Cartesian product of the given axes in parallel.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Axis as `key=v1,v2,...` (repeatable; first axis varies slowest).
        #[arg(short, long = "axis", required = true)]
        axes: Vec<String>,
        #[arg(short, long, default_value = "sweep-out")]
        out_dir: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(short, long)]
        jobs: Option<usize>,
    },
    /// Print a side-by-side comparison of JSON reports.
    Report {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
    /// Check a trace file and report malformed lines.
    ValidateTrace {
        trace: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Write the configured synthetic workload as a trace file.
    GenTrace {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
}

struct Loaded {
    config: ExperimentConfig,
    text: String,
    /// Directory relative paths in the config resolve against.
    base: PathBuf,
    stem: String,
}

fn resolve_config_path(name: &str, dir: Option<&Path>) -> Result<PathBuf> {
    let direct = PathBuf::from(name);
    if direct.exists() {
        return Ok(direct);
    }
    if let Some(dir) = dir {
        for candidate in [dir.join(name), dir.join(format!("{name}.toml"))] {
            if candidate.exists() {
                return Ok(candidate);
            }
        }
    }
    bail!("config file `{name}` not found")
}

fn load(args: &ConfigArgs) -> Result<Loaded> {
    let (text, base, stem) = match &args.config {
        Some(name) => {
            let path = resolve_config_path(name, args.config_dir.as_deref())?;
            let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            let stem = path.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned());
            (text, base, stem)
        }
        None => (String::new(), PathBuf::from("."), "run".to_string()),
    };
    let config = ExperimentConfig::load(&text, &args.overrides)?;
    Ok(Loaded { config, text, base, stem })
}

fn trace_text(config: &ExperimentConfig, base: &Path) -> Result<Option<String>> {
    match &config.workload.trace {
        Some(t) if config.workload.synthetic().is_none() => {
            let path = base.join(t);
            Ok(Some(fs::read_to_string(&path).with_context(|| format!("reading trace {}", path.display()))?))
        }
        _ => Ok(None),
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_report(report: &StatsReport, json: &Path, csv: &Path) -> Result<()> {
    write(json, &encode_report(report))?;
    write(csv, &timeline_csv(&report.timeline))
}

fn run(args: &ConfigArgs, out_dir: &Path) -> Result<()> {
    let l = load(args)?;
    let trace = trace_text(&l.config, &l.base)?;
    let records = workload_records(&l.config, trace.as_deref())?;
    let report = run_simulation(&l.config, &records)?;
    let json = l.config.output.json.as_ref().map_or_else(|| out_dir.join(format!("{}.json", l.stem)), PathBuf::from);
    let csv =
        l.config.output.csv.as_ref().map_or_else(|| out_dir.join(format!("{}.timeline.csv", l.stem)), PathBuf::from);
    write_report(&report, &json, &csv)?;
    print!("{}", comparison_table(&[l.stem], &[report])?);
    eprintln!("wrote {} and {}", json.display(), csv.display());
    Ok(())
}

fn sweep(args: &ConfigArgs, axes: &[String], out_dir: &Path, jobs: Option<usize>) -> Result<()> {
    let l = load(args)?;
    let axes = axes.iter().map(|a| a.parse()).collect::<hmsim::Result<Vec<SweepAxis>>>()?;
    let points = expand(&l.text, &args.overrides, &axes)?;
    let pool = rayon_pool(jobs)?;
    let base = l.base.clone();
    let results = pool.install(|| {
        run_sweep(&points, |c| {
            let text = trace_text(c, &base).map_err(|e| hmsim::Error::Io(format!("{e:#}")))?;
            workload_records(c, text.as_deref())
        })
    });
    let mut reports = Vec::with_capacity(results.len());
    for (p, r) in points.iter().zip(results) {
        let r = r.with_context(|| format!("sweep point {} ({})", p.index, p.label()))?;
        let name = format!("point-{:03}", p.index);
        write_report(&r, &out_dir.join(format!("{name}.json")), &out_dir.join(format!("{name}.timeline.csv")))?;
        reports.push(r);
    }
    let merged = out_dir.join("sweep.csv");
    write(&merged, &merged_csv(&axes, &points, &reports))?;
    let names: Vec<String> = points.iter().map(|p| format!("p{}", p.index)).collect();
    for p in &points {
        println!("p{}: {}", p.index, p.label());
    }
    print!("{}", comparison_table(&names, &reports)?);
    eprintln!("wrote {} points and {}", points.len(), merged.display());
    Ok(())
}

fn rayon_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        b = b.num_threads(j);
    }
    Ok(b.build()?)
}

fn report(paths: &[PathBuf]) -> Result<()> {
    let mut reports = Vec::new();
    let mut names = Vec::new();
    for p in paths {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        reports.push(decode_report(&text).with_context(|| format!("decoding {}", p.display()))?);
        names.push(p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned()));
    }
    print!("{}", comparison_table(&names, &reports)?);
    Ok(())
}

fn validate(trace: &Path, args: &ConfigArgs) -> Result<bool> {
    let l = load(args)?;
    let text = fs::read_to_string(trace).with_context(|| format!("reading {}", trace.display()))?;
    let (records, errors) = validate_trace(&text, l.config.address_capacity());
    for e in &errors {
        println!("{e}");
    }
    println!("{records} valid records, {} errors", errors.len());
    Ok(errors.is_empty())
}

fn gen_trace(args: &ConfigArgs, output: &Path) -> Result<()> {
    let l = load(args)?;
    let w = &l.config.workload;
    let Some(pattern) = w.synthetic() else { bail!("gen-trace needs a synthetic workload.pattern") };
    let span = w.span_bytes.unwrap_or_else(|| l.config.address_capacity());
    let records: Vec<_> = generate(pattern, l.config.seed, w.length, span, w.streams)?.collect();
    write(output, &serialize_trace(&records))?;
    eprintln!("wrote {} records to {}", records.len(), output.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, out_dir } => run(config, out_dir),
        Command::Sweep { config, axes, out_dir, jobs } => sweep(config, axes, out_dir, *jobs),
        Command::Report { reports } => report(reports),
        Command::ValidateTrace { trace, config } => match validate(trace, config) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::FAILURE,
            Err(e) => Err(e),
        },
        Command::GenTrace { config, output } => gen_trace(config, output),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
