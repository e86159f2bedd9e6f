//! Turns validated configurations into result tables.

use std::f64::consts::E;
use std::path::Path;

use rayon::prelude::*;
use timely_aloha::analytic::{asymptotic_series, throughput};
use timely_aloha::rl::{
    estimate_station_count, run_rlra_dc, run_rlra_dc_estimated, run_rlra_dc_observed, ESTIMATOR_BLOCKS,
    ESTIMATOR_BLOCK_LEN,
};
use timely_aloha::sim::{run_simulation, run_simulation_observed, TraceLog};
use timely_aloha::RunRecord;

use crate::config::{Command, ExperimentConfig, Point, Scheme};
use crate::output::{fmt_sig, write_atomic, CsvRow, Table, ASYMPTOTICS_HEADER};
use crate::CliError;

/// Execution settings that do not change results.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses one per logical CPU.
    pub jobs: Option<usize>,
}

/// Result of running a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    /// Set when a post-condition of the experiment did not hold.
    pub check_failure: Option<String>,
}

fn runtime(e: timely_aloha::Error) -> CliError {
    CliError::runtime(e.to_string())
}

fn points(config: &ExperimentConfig) -> Result<Vec<Point>, CliError> {
    let mut all = Vec::new();
    for run in &config.runs {
        all.extend(run.points()?);
    }
    Ok(all)
}

fn pool(options: &RunOptions) -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = options.jobs {
        if jobs == 0 {
            return Err(CliError::validation("--jobs must be at least 1"));
        }
        builder = builder.num_threads(jobs);
    }
    builder.build().map_err(|e| CliError::runtime(format!("thread pool: {e}")))
}

/// Runs a validated configuration.
pub fn execute(config: &ExperimentConfig, options: &RunOptions) -> Result<Outcome, CliError> {
    config.validate()?;
    match config.command {
        Command::Analytic => analytic(config),
        Command::Simulate => simulate(config, options),
        Command::Estimate => estimate(config, options),
        Command::Asymptotics => asymptotics(config),
    }
}

fn analytic_value(point: &Point) -> Result<Option<f64>, CliError> {
    match point.scheme_params()? {
        Some(params) => throughput(&params).map(Some).map_err(runtime),
        None => Ok(None),
    }
}

fn analytic(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let rows = points(config)?
        .iter()
        .map(|point| {
            let value = analytic_value(point)?.expect("analytic configs hold ALOHA schemes only");
            Ok(CsvRow {
                experiment: config.experiment.clone(),
                scheme: point.scheme.as_str().into(),
                delay: point.delay,
                stations: point.stations,
                param: point.param,
                seed: None,
                slots: None,
                delivered: None,
                throughput: value,
                analytic: Some(value),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Outcome { table: Table::from_rows(&rows), check_failure: None })
}

fn simulate_one(point: &Point, seed: u64, slots: u64) -> Result<RunRecord, CliError> {
    match point.scheme {
        Scheme::Constant | Scheme::Dynamic | Scheme::Framed => {
            let params = point.scheme_params()?.expect("ALOHA point");
            run_simulation(&params, seed, slots).map_err(runtime)
        }
        Scheme::RlraDc => run_rlra_dc(point.delay, point.stations, seed, slots).map(|o| o.record).map_err(runtime),
        Scheme::RlraDcEstimated => {
            run_rlra_dc_estimated(point.delay, point.stations, seed, slots).map(|o| o.record).map_err(runtime)
        }
        Scheme::Estimator => Err(CliError::validation("the estimator runs under the estimate command")),
    }
}

fn simulate(config: &ExperimentConfig, options: &RunOptions) -> Result<Outcome, CliError> {
    let slots = config.slots.expect("validated");
    let points = points(config)?;
    let analytic: Vec<Option<f64>> = if config.analytic {
        points.iter().map(analytic_value).collect::<Result<_, _>>()?
    } else {
        vec![None; points.len()]
    };
    let jobs: Vec<(usize, usize)> =
        (0..points.len()).flat_map(|p| (0..config.seeds.len()).map(move |s| (p, s))).collect();

    let mut results = pool(options)?.install(|| {
        jobs.par_iter()
            .map(|&(p, s)| simulate_one(&points[p], config.seeds[s], slots).map(|rec| ((p, s), rec)))
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    results.sort_by_key(|(key, _)| *key);

    let rows: Vec<CsvRow> = results
        .into_iter()
        .map(|((p, _), rec)| CsvRow {
            experiment: config.experiment.clone(),
            scheme: points[p].scheme.as_str().into(),
            delay: rec.delay,
            stations: rec.stations,
            param: rec.param,
            seed: Some(rec.seed),
            slots: Some(rec.slots),
            delivered: Some(rec.delivered),
            throughput: rec.throughput,
            analytic: analytic[p],
        })
        .collect();
    Ok(Outcome { table: Table::from_rows(&rows), check_failure: None })
}

/// Writes the per-slot trace of a configuration that resolves to exactly one
/// run.
pub fn write_trace(config: &ExperimentConfig, path: &Path) -> Result<(), CliError> {
    config.validate()?;
    if config.command != Command::Simulate {
        return Err(CliError::validation("--trace only applies to simulate"));
    }
    let points = points(config)?;
    if points.len() != 1 || config.seeds.len() != 1 {
        return Err(CliError::validation("--trace needs exactly one scheme point and one seed"));
    }
    let (point, seed, slots) = (&points[0], config.seeds[0], config.slots.expect("validated"));
    let mut log = TraceLog::default();
    match point.scheme {
        Scheme::RlraDc | Scheme::RlraDcEstimated => {
            let assumed = if point.scheme == Scheme::RlraDc {
                point.stations
            } else {
                estimate_station_count(point.delay, point.stations, seed).map_err(runtime)?.stations
            };
            run_rlra_dc_observed(point.delay, point.stations, assumed, seed, slots, &mut |e| log.record(e))
                .map_err(runtime)?;
        }
        _ => {
            let params = point.scheme_params()?.expect("ALOHA point");
            run_simulation_observed(&params, seed, slots, &mut |e| log.record(e)).map_err(runtime)?;
        }
    }
    write_atomic(path, &format!("slot,tx_count,feedback\n{}", log.as_str()))
}

fn estimate(config: &ExperimentConfig, options: &RunOptions) -> Result<Outcome, CliError> {
    let points = points(config)?;
    let jobs: Vec<(usize, usize)> =
        (0..points.len()).flat_map(|p| (0..config.seeds.len()).map(move |s| (p, s))).collect();
    let slots = u64::from(ESTIMATOR_BLOCKS) * ESTIMATOR_BLOCK_LEN;
    let mut results = pool(options)?.install(|| {
        jobs.par_iter()
            .map(|&(p, s)| {
                let point = &points[p];
                estimate_station_count(point.delay, point.stations, config.seeds[s])
                    .map(|est| ((p, s), est))
                    .map_err(runtime)
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    results.sort_by_key(|(key, _)| *key);
    let rows: Vec<CsvRow> = results
        .into_iter()
        .map(|((p, s), est)| {
            let delivered = est.block_throughput.iter().map(|r| (r * ESTIMATOR_BLOCK_LEN as f64).round() as u64).sum();
            CsvRow {
                experiment: config.experiment.clone(),
                scheme: Scheme::Estimator.as_str().into(),
                delay: points[p].delay,
                stations: points[p].stations,
                param: Some(f64::from(est.stations)),
                seed: Some(config.seeds[s]),
                slots: Some(slots),
                delivered: Some(delivered),
                throughput: delivered as f64 / slots as f64,
                analytic: None,
            }
        })
        .collect();
    Ok(Outcome { table: Table::from_rows(&rows), check_failure: None })
}

fn asymptotics(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let spec = config.asymptotics.as_ref().expect("validated");
    let stations = spec.stations.values()?;
    let mut lines = Vec::new();
    let mut check_failure = None;
    for probe_spec in &spec.probes {
        let label = probe_spec.label();
        let series = asymptotic_series(spec.delay, probe_spec.probe()?, &stations).map_err(runtime)?;
        let mut last_error: Option<f64> = None;
        for point in &series {
            let error = (point.throughput - 1.0 / E).abs();
            lines.push(format!(
                "{},{},{},{},{},{},{}",
                config.experiment,
                spec.delay,
                label,
                point.stations,
                fmt_sig(point.throughput),
                fmt_sig(error),
                fmt_sig(point.load())
            ));
            if spec.monotone_from.is_some_and(|from| point.stations >= from) {
                if let Some(prev) = last_error {
                    if error > prev && check_failure.is_none() {
                        check_failure = Some(format!(
                            "{label}: |R - 1/e| increases at N = {} ({} > {})",
                            point.stations,
                            fmt_sig(error),
                            fmt_sig(prev)
                        ));
                    }
                }
                last_error = Some(error);
            }
        }
    }
    Ok(Outcome { table: Table { header: ASYMPTOTICS_HEADER, lines }, check_failure })
}
