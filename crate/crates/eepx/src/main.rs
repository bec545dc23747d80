//! Thin command-line front end; all logic lives in the library.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use eepx::eep::{eep_witness, generate_planted_eep, quotient};
use eepx::error::Error;
use eepx::filters::{build_filter_matrix, GraphFilter};
use eepx::graph::{Graph, InstanceFile};
use eepx::partition::Partition;
use eepx::pipeline::{
    be_eeps, run_benchmark, write_benchmark_csv, ExperimentConfig, FilterSpec, GroundTruth,
};
use eepx::signals::{sample_observations, SignalBatch};
use eepx::solvers::{SolverConfig, SolverKind};

#[derive(Parser)]
#[command(
    name = "eepx",
    about = "Blind extraction of external equitable partitions from low-pass graph signals",
    version
)]
struct Cli {
    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON configuration file (experiment config for `benchmark`, solver
    /// config for `extract`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory or file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format for structured results.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum BatchEncoding {
    Csv,
    Bin,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FilterPreset {
    /// Heat kernel with sigma = 10 / D_max.
    Strong,
    /// IIR with alpha = 0.5 / D_max.
    Weak,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a planted-EEP instance and write its files.
    Generate(GenerateArgs),
    /// Draw observation signals through a filter and write the batch.
    Signals(SignalsArgs),
    /// Run the blind extraction on a signal batch.
    Extract(ExtractArgs),
    /// Check whether a partition is an EEP of a graph.
    Verify(VerifyArgs),
    /// Run the full benchmark protocol and write CSV tables.
    Benchmark(BenchmarkArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Comma-separated cell sizes, e.g. 126,126,126.
    #[arg(long)]
    sizes: String,
    /// Cross-count matrix rows separated by ';', e.g. "0,1,0;1,0,1;0,1,0".
    #[arg(long)]
    cross: String,
    /// Intra-cell edge probability.
    #[arg(long, default_value_t = 0.3)]
    p_intra: f64,
}

#[derive(Args)]
struct SignalsArgs {
    /// Instance JSON file ({n, edges, cells}).
    #[arg(long)]
    instance: PathBuf,
    /// Inline filter JSON, e.g. '{"kind":"heat","sigma":0.2}'.
    #[arg(long, conflicts_with = "preset")]
    filter: Option<String>,
    /// Built-in filter scaled by the instance's maximum degree.
    #[arg(long, value_enum)]
    preset: Option<FilterPreset>,
    /// Number of samples.
    #[arg(long, default_value_t = 1000)]
    m: usize,
    /// Observation noise variance.
    #[arg(long, default_value_t = 0.01)]
    noise_var: f64,
    /// Batch file encoding.
    #[arg(long, value_enum, default_value_t = BatchEncoding::Csv)]
    encoding: BatchEncoding,
}

#[derive(Args)]
struct ExtractArgs {
    /// Signal batch file (.bin is read as binary, anything else as CSV).
    #[arg(long)]
    signals: PathBuf,
    /// Number of cells to extract.
    #[arg(long)]
    r: usize,
    /// Solver to run (defaults applied); for full control use --config.
    #[arg(long, value_enum, default_value_t = SolverChoice::KMeans)]
    solver: SolverChoice,
    /// Instance JSON with reference cells; enables the evaluation report.
    #[arg(long)]
    instance: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SolverChoice {
    #[value(name = "kmeans")]
    KMeans,
    Psnmf,
    Penalty,
}

impl From<SolverChoice> for SolverKind {
    fn from(c: SolverChoice) -> Self {
        match c {
            SolverChoice::KMeans => SolverKind::KMeans,
            SolverChoice::Psnmf => SolverKind::Psnmf,
            SolverChoice::Penalty => SolverKind::Penalty,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Instance file: JSON ({n, edges, cells}) or edge-list text.
    #[arg(long)]
    instance: PathBuf,
    /// Partition JSON (list of 1-indexed cells); defaults to the instance's
    /// own cells.
    #[arg(long)]
    partition: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Built-in 378-vertex protocol with the given filter; omit when
    /// --config provides the experiment.
    #[arg(long, value_enum)]
    preset: Option<FilterPreset>,
    /// Trial count override.
    #[arg(long)]
    trials: Option<usize>,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse { .. }
        | Error::Config(_)
        | Error::Json(_)
        | Error::Io(_)
        | Error::InvalidGraph(_)
        | Error::InvalidPartition(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Render clap's message but use the documented usage exit code.
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn parse_sizes(text: &str) -> Result<Vec<usize>, Error> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad cell size {tok:?}")))
        })
        .collect()
}

fn parse_cross(text: &str) -> Result<Vec<Vec<u64>>, Error> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<u64>()
                        .map_err(|_| Error::Config(format!("bad cross count {tok:?}")))
                })
                .collect()
        })
        .collect()
}

fn load_instance(path: &Path) -> Result<(Graph, Option<Partition>), Error> {
    let text = fs::read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        let inst = InstanceFile::from_json(&text)?;
        let graph = inst.graph()?;
        let partition = inst.partition()?;
        Ok((graph, partition))
    } else {
        Ok((Graph::parse_edge_list(text.as_bytes(), None)?, None))
    }
}

fn resolve_preset(preset: FilterPreset, graph: &Graph) -> Result<GraphFilter, Error> {
    let spec = match preset {
        FilterPreset::Strong => FilterSpec::heat_per_dmax(10.0),
        FilterPreset::Weak => FilterSpec::iir_per_dmax(0.5),
    };
    spec.resolve(graph)
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Generate(args) => {
            let sizes = parse_sizes(&args.sizes)?;
            let cross = parse_cross(&args.cross)?;
            let seed = cli.seed.unwrap_or(0);
            let inst = generate_planted_eep(&sizes, &cross, args.p_intra, seed)?;
            let out = cli.out.unwrap_or_else(|| PathBuf::from("."));
            fs::create_dir_all(&out)?;
            let file = InstanceFile::new(&inst.graph, Some(&inst.truth));
            fs::write(out.join("instance.json"), file.to_json()? + "\n")?;
            let mut edges = Vec::new();
            inst.graph.write_edge_list(&mut edges)?;
            fs::write(out.join("graph.edges"), edges)?;
            fs::write(out.join("partition.json"), inst.truth.to_json()? + "\n")?;
            println!(
                "wrote instance.json, graph.edges, partition.json to {} (n = {}, r = {})",
                out.display(),
                inst.graph.n(),
                inst.truth.r()
            );
            Ok(0)
        }
        Command::Signals(args) => {
            let (graph, _) = load_instance(&args.instance)?;
            let filter = match (&args.filter, args.preset) {
                (Some(text), _) => {
                    let f: GraphFilter = serde_json::from_str(text)?;
                    f.validate()?;
                    f
                }
                (None, Some(preset)) => resolve_preset(preset, &graph)?,
                (None, None) => {
                    return Err(Error::Config("provide --filter or --preset".into()));
                }
            };
            let fm = build_filter_matrix(&filter, &graph)?;
            let seed = cli.seed.unwrap_or(0);
            let batch = sample_observations(&fm, &filter, args.m, args.noise_var, seed)?;
            let out = cli
                .out
                .unwrap_or_else(|| PathBuf::from(if args.encoding == BatchEncoding::Bin {
                    "signals.bin"
                } else {
                    "signals.csv"
                }));
            let mut buf = Vec::new();
            match args.encoding {
                BatchEncoding::Csv => batch.write_csv(&mut buf)?,
                BatchEncoding::Bin => batch.write_binary(&mut buf)?,
            }
            fs::write(&out, buf)?;
            println!(
                "wrote {} samples of length {} ({}) to {}",
                batch.m(),
                batch.n(),
                filter.describe(),
                out.display()
            );
            Ok(0)
        }
        Command::Extract(args) => {
            let file = fs::File::open(&args.signals)?;
            let batch = if args.signals.extension().is_some_and(|e| e == "bin") {
                SignalBatch::read_binary(BufReader::new(file))?
            } else {
                SignalBatch::read_csv(BufReader::new(file))?
            };
            let solver_cfg = match &cli.config {
                Some(path) => {
                    let text = fs::read_to_string(path)?;
                    serde_json::from_str::<SolverConfig>(&text)?
                }
                None => SolverConfig::new(args.solver.into()),
            };
            let solver_cfg = match cli.seed {
                Some(seed) => {
                    let mut c = solver_cfg;
                    c.seed = Some(seed);
                    c
                }
                None => solver_cfg,
            };
            let truth = match &args.instance {
                Some(path) => {
                    let (graph, partition) = load_instance(path)?;
                    let partition = partition.ok_or_else(|| {
                        Error::Config("instance file carries no cells to evaluate against".into())
                    })?;
                    Some(GroundTruth::from_graph(&graph, &partition)?)
                }
                None => None,
            };
            let extraction = be_eeps(&batch, args.r, &solver_cfg, truth.as_ref())?;
            if extraction.eigengap_warning {
                eprintln!("warning: eigengap at the r/(r+1) boundary is below 1e-12");
            }
            if extraction.solver.diagnostics.stalled {
                for note in &extraction.solver.diagnostics.notes {
                    eprintln!("warning: solver stall: {note}");
                }
            }
            let partition_json = extraction.partition.to_json()?;
            match cli.format {
                OutputFormat::Json => {
                    let report = extraction
                        .report
                        .as_ref()
                        .map(serde_json::to_value)
                        .transpose()?;
                    let payload = serde_json::json!({
                        "solver": extraction.solver.solver_id,
                        "objective": extraction.solver.objective,
                        "iterations": extraction.solver.iterations,
                        "cells": serde_json::from_str::<serde_json::Value>(&partition_json)?,
                        "report": report,
                    });
                    println!("{}", serde_json::to_string_pretty(&payload)?);
                }
                OutputFormat::Csv => {
                    println!("cells: {partition_json}");
                    match &extraction.report {
                        Some(rep) => {
                            println!("solver,m,F_c,gamma,matched_acc,iters,objective");
                            println!(
                                "{},{},{},{},{},{},{}",
                                extraction.solver.solver_id,
                                batch.m(),
                                rep.cost_fc,
                                rep.group_accuracy,
                                rep.matched_accuracy,
                                extraction.solver.iterations,
                                extraction.solver.objective
                            );
                        }
                        None => println!(
                            "solver: {} objective: {} iterations: {}",
                            extraction.solver.solver_id,
                            extraction.solver.objective,
                            extraction.solver.iterations
                        ),
                    }
                }
            }
            if let Some(out) = cli.out {
                fs::create_dir_all(&out)?;
                fs::write(out.join("partition.json"), partition_json + "\n")?;
                if let Some(rep) = &extraction.report {
                    fs::write(out.join("report.json"), serde_json::to_string_pretty(rep)? + "\n")?;
                }
            }
            Ok(0)
        }
        Command::Verify(args) => {
            let (graph, embedded) = load_instance(&args.instance)?;
            let partition = match &args.partition {
                Some(path) => {
                    let text = fs::read_to_string(path)?;
                    Partition::from_json(&text, graph.n())?
                }
                None => embedded.ok_or_else(|| {
                    Error::Config(
                        "no partition: pass --partition or use an instance file with cells".into(),
                    )
                })?,
            };
            match eep_witness(&graph, &partition) {
                None => {
                    let q = quotient(&graph, &partition)?;
                    println!("EEP: yes");
                    println!("quotient Laplacian:");
                    for i in 0..q.r() {
                        let row: Vec<String> =
                            (0..q.r()).map(|j| format!("{}", q.laplacian()[[i, j]])).collect();
                        println!("  [{}]", row.join(", "));
                    }
                    Ok(0)
                }
                Some(witness) => {
                    println!("EEP: no");
                    println!("witness: {witness}");
                    Ok(3)
                }
            }
        }
        Command::Benchmark(args) => {
            let mut cfg = match (&cli.config, args.preset) {
                (Some(path), _) => {
                    let text = fs::read_to_string(path)?;
                    ExperimentConfig::from_json(&text)?
                }
                (None, Some(preset)) => {
                    let filter = match preset {
                        FilterPreset::Strong => FilterSpec::heat_per_dmax(10.0),
                        FilterPreset::Weak => FilterSpec::iir_per_dmax(0.5),
                    };
                    ExperimentConfig::three_class_default(vec![filter])
                }
                (None, None) => {
                    return Err(Error::Config("provide --config or --preset".into()));
                }
            };
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            if let Some(trials) = args.trials {
                cfg.trials = trials;
            }
            let run = run_benchmark(&cfg)?;
            let out = cli.out.unwrap_or_else(|| PathBuf::from("bench_out"));
            write_benchmark_csv(&cfg, &run, &out)?;
            if !run.failures.is_empty() {
                eprintln!("{} trial(s) failed and were excluded:", run.failures.len());
                for (trial, msg) in &run.failures {
                    eprintln!("  trial {trial}: {msg}");
                }
            }
            match cli.format {
                OutputFormat::Json => {
                    println!("{}", serde_json::to_string_pretty(&run.table)?);
                }
                OutputFormat::Csv => {
                    println!("solver,filter,m,trials,mean_F_c,mean_gamma,mean_matched_acc");
                    for row in &run.table.rows {
                        println!(
                            "{},{},{},{},{},{},{}",
                            row.solver,
                            row.filter,
                            row.m,
                            row.trials,
                            row.mean_f_c,
                            row.mean_gamma,
                            row.mean_matched_acc
                        );
                    }
                }
            }
            println!("tables written to {}", out.display());
            Ok(0)
        }
    }
}
