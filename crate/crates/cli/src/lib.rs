//! `tdaguard` command line: generate or load a scenario, build its graph,
//! replay the packet, run detection and report metrics.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use tdaguard_core::detection::{detect_global, run_local_pipeline, DetectionReport, LocalOutcome};
use tdaguard_core::metrics::{eor_csv, eor_table, score, time_phases, OverheadModel, Score};
use tdaguard_core::report::{self, DetectView, MetricsView, ScoreView};
use tdaguard_core::scenario::{self, generate, Preset};
use tdaguard_core::simulator::{simulate, PacketTrace};
use tdaguard_core::twig::Twig;
use tdaguard_core::Scenario;

const DEFAULT_HOPS: [u32; 5] = [4, 5, 7, 10, 15];
const TIMING_REPEATS: usize = 20;

#[derive(Debug, Parser)]
#[command(name = "tdaguard", version, about = "Time-delay attack simulation and detection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random scenario from a preset.
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "table2-row1", value_parser = parse_preset)]
        preset: Preset,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the time-window graph.
    Graph {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay the packet through the scenario.
    Simulate {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay the packet and run detection on its trace.
    Detect {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Mode::Both)]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Overhead ratios, detection scores and phase timings.
    Metrics {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Mode::Both)]
        mode: Mode,
        /// Include the overhead ratio table.
        #[arg(long)]
        eor: bool,
        /// Hop counts for the overhead table.
        #[arg(long, value_delimiter = ',')]
        hops: Option<Vec<u32>>,
        /// Include median phase timings (not deterministic).
        #[arg(long)]
        timing: bool,
        /// Score this many consecutive seeds of the preset in parallel.
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Every stage in order, writing one file per stage into `--out`.
    All {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_delimiter = ',')]
        hops: Option<Vec<u32>>,
        /// Run this many consecutive seeds, one directory each.
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Where the scenario comes from: a file, or a preset and seed.
#[derive(Debug, Clone, Args)]
pub struct Input {
    #[arg(long, conflicts_with = "seed")]
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = parse_preset)]
    pub preset: Option<Preset>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Global,
    Local,
    Both,
}

impl Mode {
    fn global(self) -> bool {
        self != Mode::Local
    }
    fn local(self) -> bool {
        self != Mode::Global
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Dot,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: tdaguard_core::Error| e.to_string())
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flag combination; exit code 1.
    Usage(String),
    /// A pipeline stage failed; exit code 2.
    Stage {
        stage: &'static str,
        error: tdaguard_core::Error,
    },
    Write {
        path: PathBuf,
        error: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Stage { stage, error } => write!(f, "{stage}: {error}"),
            CliError::Write { path, error } => write!(f, "write {}: {error}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

fn stage<T>(stage: &'static str, r: tdaguard_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|error| CliError::Stage { stage, error })
}

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

impl Input {
    fn load(&self) -> Result<Scenario, CliError> {
        match (&self.scenario, self.seed) {
            (Some(path), _) => {
                if self.preset.is_some() {
                    return usage("--preset only applies together with --seed");
                }
                stage("load", scenario::load(path))
            }
            (None, Some(seed)) => generate_preset(self.preset(), seed),
            (None, None) => usage("give --scenario PATH or --seed INT"),
        }
    }

    fn preset(&self) -> Preset {
        self.preset.unwrap_or(Preset::Table2Row1)
    }
}

fn generate_preset(preset: Preset, seed: u64) -> Result<Scenario, CliError> {
    stage("generate", generate(&preset.params(seed)))
}

/// Everything derived from one scenario.
struct Pipeline {
    scenario: Scenario,
    twig: Twig,
    trace: PacketTrace,
}

impl Pipeline {
    fn new(scenario: Scenario) -> Pipeline {
        let twig = Twig::build(&scenario.windows, scenario.t_tr);
        let trace = simulate(&scenario, &twig);
        Pipeline { scenario, twig, trace }
    }

    /// Global report, or `None` when the packet never arrived.
    fn global(&self) -> Result<Option<DetectionReport>, CliError> {
        if !self.trace.delivered {
            return Ok(None);
        }
        stage("detect", detect_global(&self.twig, &self.trace)).map(Some)
    }

    fn local(&self) -> Result<LocalOutcome, CliError> {
        stage("detect", run_local_pipeline(&self.scenario, &self.twig, &self.trace))
    }

    fn graph(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => Ok(report::to_pretty(&report::twig_view(&self.scenario, &self.twig))),
            Format::Dot => Ok(report::twig_dot(&self.scenario, &self.twig)),
            Format::Csv => usage("graph supports --format json or dot"),
        }
    }

    fn trace(&self) -> String {
        report::to_pretty(&report::trace_view(&self.scenario, &self.twig, &self.trace))
    }

    fn detect(&self, mode: Mode) -> Result<String, CliError> {
        let global = if mode.global() { self.global()? } else { None };
        let view = DetectView {
            global: global.as_ref().map(|r| report::global_view(&self.scenario, r)),
            local: if mode.local() {
                Some(report::local_view(&self.scenario, &self.local()?))
            } else {
                None
            },
            note: (mode.global() && global.is_none())
                .then(|| "packet was not delivered; global detection needs the complete path".to_string()),
        };
        Ok(report::to_pretty(&view))
    }

    fn scores(&self, mode: Mode) -> Result<ScoreView, CliError> {
        let truth = &self.scenario.attack;
        let global = if mode.global() {
            self.global()?.map(|r| score(&r, truth))
        } else {
            None
        };
        let local = if mode.local() {
            Some(score(&self.local()?.merged(), truth))
        } else {
            None
        };
        Ok(ScoreView {
            truth: truth.malicious().iter().map(|&n| self.scenario.name_of(n)).collect(),
            global,
            local,
        })
    }
}

fn eor_rows(hops: Option<&[u32]>) -> Result<Vec<tdaguard_core::metrics::EorRow>, CliError> {
    stage(
        "metrics",
        eor_table(&OverheadModel::default(), hops.unwrap_or(&DEFAULT_HOPS)),
    )
}

#[derive(Serialize)]
struct RunSummary {
    run: usize,
    seed: u64,
    delivered: bool,
    truth: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    global: Option<Score>,
    #[serde(skip_serializing_if = "Option::is_none")]
    local: Option<Score>,
}

#[derive(Serialize)]
struct MeanScores {
    runs: usize,
    precision: f64,
    recall: f64,
}

#[derive(Serialize)]
struct BatchSummary {
    preset: String,
    first_seed: u64,
    runs: Vec<RunSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    global: Option<MeanScores>,
    #[serde(skip_serializing_if = "Option::is_none")]
    local: Option<MeanScores>,
}

fn mean(scores: impl Iterator<Item = Score>) -> Option<MeanScores> {
    let v: Vec<Score> = scores.collect();
    (!v.is_empty()).then(|| MeanScores {
        runs: v.len(),
        precision: v.iter().map(|s| s.precision).sum::<f64>() / v.len() as f64,
        recall: v.iter().map(|s| s.recall).sum::<f64>() / v.len() as f64,
    })
}

fn summarize(
    preset: Preset,
    first_seed: u64,
    mode: Mode,
    runs: Vec<(u64, Pipeline)>,
) -> Result<BatchSummary, CliError> {
    let runs = runs
        .iter()
        .enumerate()
        .map(|(run, (seed, p))| {
            let s = p.scores(mode)?;
            Ok(RunSummary {
                run,
                seed: *seed,
                delivered: p.trace.delivered,
                truth: s.truth,
                global: s.global,
                local: s.local,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(BatchSummary {
        preset: preset.to_string(),
        first_seed,
        global: mean(runs.iter().filter_map(|r| r.global)),
        local: mean(runs.iter().filter_map(|r| r.local)),
        runs,
    })
}

/// Seeds `first .. first + k`, generated and replayed in parallel and
/// returned in seed order.
fn batch(preset: Preset, first: u64, k: usize) -> Result<Vec<(u64, Pipeline)>, CliError> {
    (0..k as u64)
        .into_par_iter()
        .map(|i| {
            let seed = first
                .checked_add(i)
                .ok_or_else(|| CliError::Usage("seed range overflows".into()))?;
            Ok((seed, Pipeline::new(generate_preset(preset, seed)?)))
        })
        .collect()
}

fn batch_input(input: &Input) -> Result<(Preset, u64), CliError> {
    match (input.seed, &input.scenario) {
        (Some(seed), None) => Ok((input.preset(), seed)),
        _ => usage("--runs needs --seed (and optionally --preset), not --scenario"),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|error| CliError::Write {
            path: path.into(),
            error,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_all(dir: &Path, p: &Pipeline, hops: Option<&[u32]>) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|error| CliError::Write {
        path: dir.into(),
        error,
    })?;
    for (name, text) in all_outputs(p, hops)? {
        emit(Some(&dir.join(name)), &text)?;
    }
    Ok(())
}

fn all_outputs(p: &Pipeline, hops: Option<&[u32]>) -> Result<[(&'static str, String); 5], CliError> {
    let metrics = MetricsView {
        eor: Some(eor_rows(hops)?),
        detection: Some(p.scores(Mode::Both)?),
        runtime: None,
    };
    Ok([
        ("scenario.json", scenario::to_json(&p.scenario)),
        ("twig.json", p.graph(Format::Json)?),
        ("trace.json", p.trace()),
        ("detect.json", p.detect(Mode::Both)?),
        ("metrics.json", report::to_pretty(&metrics)),
    ])
}

fn only_json(format: Format, what: &str) -> Result<(), CliError> {
    match format {
        Format::Json => Ok(()),
        _ => usage(format!("{what} only supports --format json")),
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { seed, preset, out } => {
            emit(out.as_deref(), &scenario::to_json(&generate_preset(preset, seed)?))
        }
        Command::Graph { input, format, out } => emit(out.as_deref(), &Pipeline::new(input.load()?).graph(format)?),
        Command::Simulate { input, out } => emit(out.as_deref(), &Pipeline::new(input.load()?).trace()),
        Command::Detect { input, mode, out } => emit(out.as_deref(), &Pipeline::new(input.load()?).detect(mode)?),
        Command::Metrics {
            input,
            mode,
            eor,
            hops,
            timing,
            runs,
            format,
            out,
        } => {
            if hops.is_some() && !eor {
                return usage("--hops needs --eor");
            }
            if let Some(k) = runs {
                only_json(format, "metrics --runs")?;
                if eor || timing {
                    return usage("--runs cannot be combined with --eor or --timing");
                }
                let (preset, first) = batch_input(&input)?;
                let summary = summarize(preset, first, mode, batch(preset, first, k)?)?;
                return emit(out.as_deref(), &report::to_pretty(&summary));
            }
            let has_input = input.scenario.is_some() || input.seed.is_some();
            if format == Format::Csv {
                if !eor || has_input || timing {
                    return usage("--format csv writes only the overhead table: use --eor without a scenario");
                }
                return emit(out.as_deref(), &eor_csv(&eor_rows(hops.as_deref())?));
            }
            only_json(format, "metrics")?;
            if !eor && !has_input {
                return usage("metrics needs --eor, --scenario PATH or --seed INT");
            }
            if timing && !has_input {
                return usage("--timing needs a scenario");
            }
            let mut view = MetricsView::default();
            if eor {
                view.eor = Some(eor_rows(hops.as_deref())?);
            }
            if has_input {
                let s = input.load()?;
                let p = Pipeline::new(s);
                view.detection = Some(p.scores(mode)?);
                if timing {
                    view.runtime = Some(stage("metrics", time_phases(&p.scenario, TIMING_REPEATS))?);
                }
            }
            emit(out.as_deref(), &report::to_pretty(&view))
        }
        Command::All { input, hops, runs, out } => {
            let hops = hops.as_deref();
            if let Some(k) = runs {
                let Some(dir) = out else {
                    return usage("all --runs needs --out DIR");
                };
                let (preset, first) = batch_input(&input)?;
                let pipelines = batch(preset, first, k)?;
                pipelines
                    .par_iter()
                    .enumerate()
                    .try_for_each(|(i, (_, p))| write_all(&dir.join(format!("run-{i:04}")), p, hops))?;
                let summary = summarize(preset, first, Mode::Both, pipelines)?;
                return emit(Some(&dir.join("summary.json")), &report::to_pretty(&summary));
            }
            let p = Pipeline::new(input.load()?);
            match out {
                Some(dir) => write_all(&dir, &p, hops),
                None => {
                    for (name, text) in all_outputs(&p, hops)? {
                        emit(None, &format!("== {name}\n{text}"))?;
                    }
                    Ok(())
                }
            }
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code. Help and version requests exit 0.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
