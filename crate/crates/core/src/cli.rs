//! Command-line front end. Every subcommand reads plain-text inputs and writes plain-text
//! outputs, byte-identical for identical inputs.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use crate::engine::{
    compare, parse_config, parse_metrics_csv, parse_summary, run, write_comparison, write_event_log,
    write_metrics_csv, write_summary, EngineConfig, MetricsSeries, Mode, Scenario, SavingReport,
};
use crate::graph::{parse_topology, Topology};
use crate::oracle::{heuristic_gap, write_gap_csv, GapRow, Guardrail};
use crate::traffic::profile::{generate, GeneratorConfig, ProfileKind, ProtocolMix};
use crate::traffic::{parse_traffic, write_traffic, Flow};
use crate::ParseError;

#[derive(Debug, Parser)]
#[command(name = "gospf", version, about = "Energy-aware OSPF simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a scenario and write metrics.csv, events.log and summary.txt
    Run(RunArgs),
    /// Compare two run directories and write comparison.txt
    Compare(CompareArgs),
    /// Generate a synthetic traffic file
    GenTraffic(GenTrafficArgs),
    /// Measure the heuristic against the exact optimum and write gap.csv
    Gap(GapArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    #[arg(long)]
    pub topology: PathBuf,
    /// Traffic file; no traffic when omitted
    #[arg(long)]
    pub traffic: Option<PathBuf>,
    /// key=value settings; defaults when omitted
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the mode in the config file
    #[arg(long)]
    pub mode: Option<Mode>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Run directory of the candidate, normally GOSPF
    pub dir_a: PathBuf,
    /// Run directory of the reference, normally the baseline
    pub dir_b: PathBuf,
    /// Output directory; defaults to DIR_A
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GenTrafficArgs {
    #[arg(long)]
    pub topology: PathBuf,
    #[arg(long, default_value = "daily")]
    pub kind: ProfileKind,
    #[arg(long, default_value_t = 17)]
    pub flows: usize,
    /// Mean utilization of loaded links at the daily peak
    #[arg(long, default_value_t = 0.4)]
    pub peak_util: f64,
    #[arg(long, default_value = "udp")]
    pub protocol: ProtocolMix,
    /// Relative amplitude of per-period rate noise
    #[arg(long, default_value_t = GeneratorConfig::default().fluctuation)]
    pub fluctuation: f64,
    /// Seconds between noise draws
    #[arg(long, default_value_t = GeneratorConfig::default().fluctuation_period)]
    pub fluctuation_period: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Supplies the reference bandwidth used to route flows while placing them
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GapArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, default_value_t = Guardrail::default().max_links)]
    pub max_links: usize,
    #[arg(long, default_value_t = Guardrail::default().max_demands)]
    pub max_demands: usize,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn parsed<T>(path: &Path, parse: impl FnOnce(&str) -> Result<T, ParseError>) -> Result<T> {
    let text = read(path)?;
    Ok(parse(&text).map_err(|e| e.with_path(path))?)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

fn load_config(path: Option<&Path>) -> Result<EngineConfig> {
    match path {
        Some(p) => parsed(p, parse_config),
        None => Ok(EngineConfig::default()),
    }
}

pub fn load_scenario(args: &ScenarioArgs) -> Result<Scenario> {
    let topology: Topology = parsed(&args.topology, parse_topology)?;
    let flows: Vec<Flow> = match &args.traffic {
        Some(p) => parsed(p, parse_traffic)?,
        None => Vec::new(),
    };
    let mut config = load_config(args.config.as_deref())?;
    if let Some(mode) = args.mode {
        config.mode = mode;
    }
    Ok(Scenario::new(topology, flows, config)?)
}

pub fn cmd_run(args: &RunArgs) -> Result<MetricsSeries> {
    let scenario = load_scenario(&args.scenario)?;
    info!(
        "running {} over {} s in {} s windows",
        scenario.config.mode,
        scenario.horizon(),
        scenario.config.t_sample
    );
    let out = run(&scenario)?;
    write(&args.out, "metrics.csv", &write_metrics_csv(&out.metrics.rows))?;
    write(&args.out, "events.log", &write_event_log(&out.events))?;
    write(&args.out, "summary.txt", &write_summary(&out.metrics.summary))?;
    Ok(out.metrics)
}

fn load_run(dir: &Path) -> Result<MetricsSeries> {
    Ok(MetricsSeries {
        rows: parsed(&dir.join("metrics.csv"), parse_metrics_csv)?,
        summary: parsed(&dir.join("summary.txt"), parse_summary)?,
    })
}

pub fn cmd_compare(args: &CompareArgs) -> Result<SavingReport> {
    let report = compare(&load_run(&args.dir_a)?, &load_run(&args.dir_b)?)?;
    let out = args.out.as_deref().unwrap_or(&args.dir_a);
    write(out, "comparison.txt", &write_comparison(&report))?;
    Ok(report)
}

pub fn cmd_gen_traffic(args: &GenTrafficArgs) -> Result<String> {
    let topology = parsed(&args.topology, parse_topology)?;
    let config = load_config(args.config.as_deref())?;
    let generator = GeneratorConfig {
        kind: args.kind,
        flows: args.flows,
        peak_util: args.peak_util,
        protocol: args.protocol,
        reference_bandwidth: config.reference_bandwidth,
        fluctuation: args.fluctuation,
        fluctuation_period: args.fluctuation_period,
        seed: args.seed,
        ..GeneratorConfig::default()
    };
    let text = write_traffic(&generate(&topology, &generator)?);
    if let Some(path) = &args.out {
        fs::write(path, &text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(text)
}

pub fn cmd_gap(args: &GapArgs) -> Result<Vec<GapRow>> {
    let scenario = load_scenario(&args.scenario)?;
    let guardrail = Guardrail {
        max_links: args.max_links,
        max_demands: args.max_demands,
    };
    let rows = heuristic_gap(&scenario, guardrail)?;
    write(&args.out, "gap.csv", &write_gap_csv(&rows))?;
    Ok(rows)
}

/// Runs one parsed command line. Generated traffic without `--out` goes to standard output.
pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run(a) => {
            let m = cmd_run(a)?;
            println!("{}", write_summary(&m.summary).trim_end());
        }
        Command::Compare(a) => {
            let r = cmd_compare(a)?;
            println!("{}", write_comparison(&r).trim_end());
        }
        Command::GenTraffic(a) => {
            let text = cmd_gen_traffic(a)?;
            if a.out.is_none() {
                print!("{text}");
            }
        }
        Command::Gap(a) => {
            let rows = cmd_gap(a)?;
            println!("{} quiesced windows written to {}", rows.len(), a.out.join("gap.csv").display());
        }
    }
    Ok(())
}
