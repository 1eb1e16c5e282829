// SPDX-License-Identifier: Apache-2.0

//! `evolve`: run a search, rebuild a report, or emit a testbench.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use evolve_core::eda::Landscape;
use evolve_core::eval::ScoreMode;
use evolve_core::llm::LlmConfig;
use evolve_core::orchestrator::{
    exit, ingest_problem, parse_clock_sweep, report, run_dirs, execute, BackendKind, LlmKind, RunConfig, RunError,
    RunSummary, StrategyKind,
};
use evolve_core::search::{IgrConfig, MctsConfig};
use evolve_core::stg::{generate_testbench, module_names, StgConfig};
use evolve_core::Directive;

#[derive(Parser)]
#[command(name = "evolve", version, about = "Evolutionary search for Verilog designs driven by a language model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a search on a problem directory.
    Run(RunArgs),
    /// Rebuild summary.json and scaling.csv from a run directory.
    Report {
        run_dir: PathBuf,
    },
    /// Emit a testbench comparing a design against its reference model.
    Stg(StgArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ScoreArg {
    FineGrained,
    Binary,
}

#[derive(Args)]
struct RunArgs {
    /// Directory with problem.json, problem.md and golden.v or tb.v.
    #[arg(long)]
    problem: PathBuf,
    #[arg(long, default_value = "mcts")]
    strategy: StrategyKind,
    /// Node budget; defaults to the problem's own.
    #[arg(long)]
    max_nodes: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "open-source")]
    backend: BackendKind,
    #[arg(long, default_value = "remote")]
    llm: LlmKind,
    /// Replay fixtures for the mock model (JSON).
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Probability that the synthetic mock flips a bit named in its feedback.
    #[arg(long, default_value_t = 0.0)]
    mock_guidance: f64,
    /// Clock periods in ns for independent opt runs, e.g. `3,4,5` or `3-7`.
    #[arg(long)]
    clock_sweep: Option<String>,
    #[arg(long)]
    directive: Option<Directive>,
    #[arg(long, value_enum, default_value = "fine-grained")]
    score_mode: ScoreArg,
    /// Synthetic landscape, e.g. `hamming8` or `area-latency8`.
    #[arg(long)]
    landscape: Option<Landscape>,
    /// IGR: number of ideas (k).
    #[arg(long, default_value_t = IgrConfig::default().ideas)]
    ideas: usize,
    /// IGR: nodes per chain (m).
    #[arg(long, default_value_t = IgrConfig::default().chain_length)]
    chain_length: usize,
    /// MCTS: children added to a node before it stops being a leaf.
    #[arg(long, default_value_t = MctsConfig::default().expansion_rate)]
    expansion_rate: usize,
    /// MCTS: exploration constant.
    #[arg(long, default_value_t = MctsConfig::default().exploration)]
    exploration: f64,
    #[arg(long, env = "EVOLVE_MODEL")]
    model: Option<String>,
    #[arg(long, env = "EVOLVE_ENDPOINT")]
    endpoint: Option<String>,
    #[arg(long)]
    temperature: Option<f64>,
    /// Seed for testbench stimulus.
    #[arg(long, default_value_t = 0)]
    stg_seed: u64,
    /// Simulation timeout in seconds.
    #[arg(long, default_value_t = 60)]
    sim_timeout: u64,
    /// Synthesis timeout in seconds.
    #[arg(long, default_value_t = 300)]
    synth_timeout: u64,
    /// Run directory; nothing is written when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Continue the run already in --out.
    #[arg(long)]
    resume: bool,
}

#[derive(Args)]
struct StgArgs {
    dut: PathBuf,
    #[arg(long)]
    golden: PathBuf,
    /// Top module; defaults to the first module in the design.
    #[arg(long)]
    top: Option<String>,
    #[arg(long, default_value_t = 10.0)]
    clock: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn fail(code: i32, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code as u8)
}

fn print_summary(s: &RunSummary) {
    println!("{}", serde_json::to_string_pretty(s).expect("summary serializes"));
}

fn run_config(a: &RunArgs) -> Result<RunConfig, RunError> {
    let mut llm_config = LlmConfig::default();
    if let Some(m) = &a.model {
        llm_config.model_name = m.clone();
    }
    if let Some(e) = &a.endpoint {
        llm_config.endpoint = e.clone();
    }
    if let Some(t) = a.temperature {
        llm_config.temperature = t;
    }
    let clock_sweep = a.clock_sweep.as_deref().map(parse_clock_sweep).transpose()?.unwrap_or_default();
    Ok(RunConfig {
        strategy: a.strategy,
        max_nodes: a.max_nodes,
        igr: IgrConfig { ideas: a.ideas, chain_length: a.chain_length },
        mcts: MctsConfig { expansion_rate: a.expansion_rate, exploration: a.exploration },
        clock_sweep,
        seed: a.seed,
        backend: a.backend,
        llm: a.llm,
        llm_config,
        fixtures: a.fixtures.clone(),
        mock_guidance: a.mock_guidance,
        directive: a.directive,
        score_mode: match a.score_mode {
            ScoreArg::FineGrained => ScoreMode::FineGrained,
            ScoreArg::Binary => ScoreMode::Binary,
        },
        landscape: a.landscape,
        stg: StgConfig { seed: a.stg_seed, ..StgConfig::default() },
        sim_timeout: Duration::from_secs(a.sim_timeout),
        synth_timeout: Duration::from_secs(a.synth_timeout),
        out_dir: a.out.clone(),
        resume: a.resume,
        ..RunConfig::default()
    })
}

fn cmd_run(a: &RunArgs) -> ExitCode {
    let result = run_config(a).and_then(|config| {
        let problem = ingest_problem(&a.problem)?;
        execute(&problem, &config)
    });
    match result {
        Ok(outcomes) => {
            let mut code = exit::OK;
            for o in &outcomes {
                print_summary(&o.summary);
                code = code.max(o.summary.status.exit_code());
            }
            ExitCode::from(code as u8)
        }
        Err(e) => fail(e.exit_code(), e),
    }
}

fn cmd_report(dir: &Path) -> ExitCode {
    let dirs = match run_dirs(dir) {
        Ok(d) if !d.is_empty() => d,
        Ok(_) => return fail(exit::CONFIG, format!("{} holds no run", dir.display())),
        Err(e) => return fail(exit::CONFIG, format!("{}: {e}", dir.display())),
    };
    for d in dirs {
        match report(&d) {
            Ok(s) => print_summary(&s),
            Err(e) => return fail(e.exit_code(), e),
        }
    }
    ExitCode::SUCCESS
}

fn cmd_stg(a: &StgArgs) -> ExitCode {
    let read = |p: &Path| fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()));
    let (dut, golden) = match (read(&a.dut), read(&a.golden)) {
        (Ok(d), Ok(g)) => (d, g),
        (Err(e), _) | (_, Err(e)) => return fail(exit::CONFIG, e),
    };
    let Some(top) = a.top.clone().or_else(|| module_names(&dut).into_iter().next()) else {
        return fail(exit::CONFIG, format!("{}: no module found", a.dut.display()));
    };
    let config = StgConfig { seed: a.seed, ..StgConfig::default() };
    let bundle = match generate_testbench(&dut, &golden, &top, a.clock, &config) {
        Ok(b) => b,
        Err(e) => return fail(exit::CONFIG, e),
    };
    match &a.output {
        Some(p) => {
            if let Err(e) = fs::write(p, &bundle.source) {
                return fail(exit::BACKEND, format!("{}: {e}", p.display()));
            }
            log::info!("{} vectors written to {}", bundle.total_vectors, p.display());
        }
        None => print!("{}", bundle.source),
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::CONFIG as u8 } else { 0 });
        }
    };
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Report { run_dir } => cmd_report(run_dir),
        Command::Stg(a) => cmd_stg(a),
    }
}
