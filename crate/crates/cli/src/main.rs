use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use timely_aloha_cli::config::{parse_seeds, AsymptoticsSpec, ProbeKind, ProbeSpec, SCHEMA_VERSION};
use timely_aloha_cli::output::{append_table, metadata, sidecar_path, write_atomic};
use timely_aloha_cli::{
    execute, preset, write_trace, CliError, Command, ExperimentConfig, RunOptions, RunSpec, Scheme, StationsSpec,
    ValueSpec, PRESET_NAMES,
};

#[derive(Parser)]
#[command(name = "timely-aloha", version, about = "Timely throughput experiments for delay-constrained random access")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact throughput of the ALOHA schemes over a parameter grid.
    Analytic(RunArgs),
    /// Seeded slot-level simulation.
    Simulate(RunArgs),
    /// Throughput along a growing station count, against the 1/e limit.
    Asymptotics(AsymptoticsArgs),
    /// Station-count estimation sweeps.
    Estimate(RunArgs),
    /// Run or print one of the built-in experiments.
    Preset(PresetArgs),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seeds, as `1,2,3` or `1..100`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    slots: Option<u64>,
    /// Worker threads (default: logical CPUs).
    #[arg(long)]
    jobs: Option<usize>,
    /// Output CSV; rows are appended. Prints to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-slot trace of a single run.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "adhoc")]
    experiment: String,
    /// constant, dynamic, framed, rlra-dc, rlra-dc-estimated or estimator.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    delay: Option<u32>,
    /// Station counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    stations: Vec<u32>,
    /// p (constant, framed) or alpha (dynamic), comma separated.
    #[arg(long, value_delimiter = ',')]
    param: Vec<f64>,
    /// Add the analytic value to simulated ALOHA rows.
    #[arg(long)]
    analytic: bool,
}

#[derive(Args)]
struct AsymptoticsArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "adhoc")]
    experiment: String,
    #[arg(long)]
    delay: Option<u32>,
    /// constant-optimal, dynamic-optimal, framed-optimal or constant-scaled:DELTA.
    #[arg(long = "probe")]
    probes: Vec<String>,
    /// Strictly increasing station counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    stations: Vec<u32>,
    /// Fail unless |R - 1/e| is non-increasing from this N on.
    #[arg(long)]
    monotone_from: Option<u32>,
}

#[derive(Args)]
struct PresetArgs {
    /// One of fig3, fig4, fig5, thm1, thm2, estimator.
    name: String,
    /// Print the preset's JSON config and exit.
    #[arg(long)]
    print_config: bool,
    #[command(flatten)]
    common: Common,
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    ExperimentConfig::from_json(&text)
}

fn base_config(experiment: String, command: Command) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        experiment,
        command,
        runs: Vec::new(),
        seeds: Vec::new(),
        slots: None,
        analytic: false,
        asymptotics: None,
        out: None,
    }
}

fn run_config(args: RunArgs, command: Command) -> Result<ExperimentConfig, CliError> {
    let mut config = match &args.common.config {
        Some(path) => load_config(path)?,
        None => {
            let scheme =
                args.scheme.as_deref().ok_or_else(|| CliError::validation("--scheme or --config is required"))?;
            let scheme =
                Scheme::parse(scheme).ok_or_else(|| CliError::validation(format!("unknown scheme `{scheme}`")))?;
            let delay = args.delay.ok_or_else(|| CliError::validation("--delay is required"))?;
            let mut config = base_config(args.experiment, command);
            config.runs.push(RunSpec {
                scheme,
                delay,
                stations: StationsSpec::List(args.stations),
                param: (!args.param.is_empty()).then_some(ValueSpec::List(args.param)),
            });
            config.analytic = args.analytic;
            config
        }
    };
    if args.analytic {
        config.analytic = true;
    }
    Ok(config)
}

fn parse_probe(s: &str) -> Result<ProbeSpec, CliError> {
    let bad = || CliError::validation(format!("unknown probe `{s}`"));
    let spec = match s.split_once(':') {
        Some(("constant-scaled", delta)) => {
            ProbeSpec { kind: ProbeKind::ConstantScaled, delta: Some(delta.parse().map_err(|_| bad())?) }
        }
        Some(_) => return Err(bad()),
        None => {
            let kind = match s {
                "constant-optimal" => ProbeKind::ConstantOptimal,
                "dynamic-optimal" => ProbeKind::DynamicOptimal,
                "framed-optimal" => ProbeKind::FramedOptimal,
                "constant-inverse" => return Ok(ProbeSpec { kind: ProbeKind::ConstantScaled, delta: Some(1.0) }),
                _ => return Err(bad()),
            };
            ProbeSpec { kind, delta: None }
        }
    };
    Ok(spec)
}

fn asymptotics_config(args: AsymptoticsArgs) -> Result<ExperimentConfig, CliError> {
    if let Some(path) = &args.common.config {
        return load_config(path);
    }
    let delay = args.delay.ok_or_else(|| CliError::validation("--delay is required"))?;
    let probes = if args.probes.is_empty() {
        vec![ProbeSpec { kind: ProbeKind::ConstantOptimal, delta: None }]
    } else {
        args.probes.iter().map(|p| parse_probe(p)).collect::<Result<_, _>>()?
    };
    let mut config = base_config(args.experiment, Command::Asymptotics);
    config.asymptotics = Some(AsymptoticsSpec {
        delay,
        probes,
        stations: StationsSpec::List(args.stations),
        monotone_from: args.monotone_from,
    });
    Ok(config)
}

fn apply_overrides(config: &mut ExperimentConfig, common: &Common) -> Result<(), CliError> {
    if let Some(seeds) = &common.seeds {
        config.seeds = parse_seeds(seeds)?;
    }
    if let Some(slots) = common.slots {
        config.slots = Some(slots);
    }
    if let Some(out) = &common.out {
        config.out = Some(out.clone());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (mut config, common, expected) = match cli.command {
        Cmd::Analytic(args) => {
            let common = args.common.clone();
            (run_config(args, Command::Analytic)?, common, Some(Command::Analytic))
        }
        Cmd::Simulate(args) => {
            let common = args.common.clone();
            (run_config(args, Command::Simulate)?, common, Some(Command::Simulate))
        }
        Cmd::Estimate(args) => {
            let common = args.common.clone();
            (run_config(args, Command::Estimate)?, common, Some(Command::Estimate))
        }
        Cmd::Asymptotics(args) => {
            let common = args.common.clone();
            (asymptotics_config(args)?, common, Some(Command::Asymptotics))
        }
        Cmd::Preset(args) => {
            let config = preset(&args.name).ok_or_else(|| {
                CliError::validation(format!("unknown preset `{}` (known: {})", args.name, PRESET_NAMES.join(", ")))
            })?;
            if args.print_config {
                print!("{}", config.to_canonical_json());
                return Ok(());
            }
            (config, args.common, None)
        }
    };
    if let Some(expected) = expected {
        if config.command != expected {
            return Err(CliError::validation(format!(
                "config is for `{}`, not `{}`",
                config.command.as_str(),
                expected.as_str()
            )));
        }
    }
    apply_overrides(&mut config, &common)?;
    config.validate()?;

    let options = RunOptions { jobs: common.jobs };
    let outcome = execute(&config, &options)?;
    if let Some(trace) = &common.trace {
        write_trace(&config, trace)?;
    }
    match &config.out {
        Some(path) => {
            append_table(path, &outcome.table)?;
            write_atomic(&sidecar_path(path), &metadata(&config, outcome.table.lines.len()))?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(outcome.table.render().as_bytes())
                .map_err(|e| CliError::runtime(format!("stdout: {e}")))?;
        }
    }
    match outcome.check_failure {
        Some(msg) => Err(CliError::runtime(format!("check failed: {msg}"))),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("timely-aloha: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
