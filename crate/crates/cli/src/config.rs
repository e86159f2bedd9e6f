//! Experiment configuration: JSON documents, validation and built-in presets.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use timely_aloha::analytic::{framed_optimal_p, optimize_constant_p, DynamicPolicy, Probe, DEFAULT_RESOLUTION};
use timely_aloha::rl::INIT_FRAMES;
use timely_aloha::SchemeParams;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Which subcommand a configuration drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Analytic,
    Simulate,
    Asymptotics,
    Estimate,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Analytic => "analytic",
            Command::Simulate => "simulate",
            Command::Asymptotics => "asymptotics",
            Command::Estimate => "estimate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Constant,
    Dynamic,
    Framed,
    RlraDc,
    RlraDcEstimated,
    Estimator,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Constant => "constant",
            Scheme::Dynamic => "dynamic",
            Scheme::Framed => "framed",
            Scheme::RlraDc => "rlra-dc",
            Scheme::RlraDcEstimated => "rlra-dc-estimated",
            Scheme::Estimator => "estimator",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Scheme::Constant, Scheme::Dynamic, Scheme::Framed, Scheme::RlraDc, Scheme::RlraDcEstimated, Scheme::Estimator]
            .into_iter()
            .find(|x| x.as_str() == s)
    }

    pub fn is_aloha(self) -> bool {
        matches!(self, Scheme::Constant | Scheme::Dynamic | Scheme::Framed)
    }
}

/// A list of values, or an inclusive grid `start, start + step, ..., <= stop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueSpec {
    List(Vec<f64>),
    Grid { start: f64, stop: f64, step: f64 },
}

impl ValueSpec {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        match self {
            ValueSpec::List(v) if v.is_empty() => Err(CliError::validation("empty parameter list")),
            ValueSpec::List(v) => Ok(v.clone()),
            ValueSpec::Grid { start, stop, step } => {
                if !(step.is_finite() && *step > 0.0 && start.is_finite() && stop.is_finite() && start <= stop) {
                    return Err(CliError::validation(format!("invalid grid start={start} stop={stop} step={step}")));
                }
                let count = ((stop - start) / step + 1e-9).floor() as u64 + 1;
                if count > 1_000_000 {
                    return Err(CliError::validation("grid has more than 10^6 points"));
                }
                // Rounding keeps grid points such as 0.3 free of accumulated error.
                Ok((0..count).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect())
            }
        }
    }
}

/// A list of station counts, or an inclusive range with a step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StationsSpec {
    List(Vec<u32>),
    Range { start: u32, stop: u32, step: u32 },
}

impl StationsSpec {
    pub fn values(&self) -> Result<Vec<u32>, CliError> {
        let v: Vec<u32> = match self {
            StationsSpec::List(v) => v.clone(),
            StationsSpec::Range { start, stop, step } if *step > 0 && start <= stop => {
                (*start..=*stop).step_by(*step as usize).collect()
            }
            StationsSpec::Range { .. } => return Err(CliError::validation("invalid station range")),
        };
        if v.is_empty() {
            return Err(CliError::validation("empty station list"));
        }
        if v.contains(&0) {
            return Err(CliError::validation("station count N must be at least 1"));
        }
        Ok(v)
    }
}

/// One scheme evaluated over a set of station counts and parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub scheme: Scheme,
    pub delay: u32,
    pub stations: StationsSpec,
    /// `p` for constant and framed, `alpha` for dynamic. When absent the
    /// optimal value is used (`p*`, `alpha = 1`, `min(D/N, 1)`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<ValueSpec>,
}

/// A fully resolved evaluation point.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub scheme: Scheme,
    pub delay: u32,
    pub stations: u32,
    pub param: Option<f64>,
}

impl Point {
    /// Parameters of an ALOHA point; `None` for learning schemes.
    pub fn scheme_params(&self) -> Result<Option<SchemeParams>, CliError> {
        let p = self.param.unwrap_or(f64::NAN);
        let params = match self.scheme {
            Scheme::Constant => SchemeParams::constant(self.delay, self.stations, p),
            Scheme::Dynamic => DynamicPolicy::scaled(p, self.stations)
                .and_then(|policy| SchemeParams::dynamic(self.delay, self.stations, policy)),
            Scheme::Framed => SchemeParams::framed(self.delay, self.stations, p),
            _ => return Ok(None),
        };
        params.map(Some).map_err(|e| CliError::validation(e.to_string()))
    }
}

impl RunSpec {
    pub fn points(&self) -> Result<Vec<Point>, CliError> {
        if self.delay == 0 {
            return Err(CliError::validation("hard delay D must be at least 1"));
        }
        let stations = self.stations.values()?;
        let explicit = self.param.as_ref().map(ValueSpec::values).transpose()?;
        if explicit.is_some() && !self.scheme.is_aloha() {
            return Err(CliError::validation(format!("scheme {} takes no parameter", self.scheme.as_str())));
        }
        let mut points = Vec::new();
        for &n in &stations {
            let params: Vec<Option<f64>> = match (&explicit, self.scheme) {
                (Some(v), _) => v.iter().copied().map(Some).collect(),
                (None, Scheme::Constant) => {
                    let opt = optimize_constant_p(self.delay, n, DEFAULT_RESOLUTION)
                        .map_err(|e| CliError::validation(e.to_string()))?;
                    vec![Some(opt.p)]
                }
                (None, Scheme::Dynamic) => vec![Some(1.0)],
                (None, Scheme::Framed) => {
                    vec![Some(framed_optimal_p(self.delay, n).map_err(|e| CliError::validation(e.to_string()))?)]
                }
                (None, _) => vec![None],
            };
            for param in params {
                let point = Point { scheme: self.scheme, delay: self.delay, stations: n, param };
                point.scheme_params()?;
                points.push(point);
            }
        }
        Ok(points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeKind {
    /// p-constant at the numerically optimal `p*`.
    ConstantOptimal,
    /// p-constant at `p = delta / N`.
    ConstantScaled,
    DynamicOptimal,
    FramedOptimal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub kind: ProbeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl ProbeSpec {
    pub fn probe(&self) -> Result<Probe, CliError> {
        match (self.kind, self.delta) {
            (ProbeKind::ConstantScaled, Some(delta)) if delta > 0.0 => Ok(Probe::ConstantScaled { delta }),
            (ProbeKind::ConstantScaled, _) => Err(CliError::validation("constant-scaled probe needs delta > 0")),
            (_, Some(_)) => Err(CliError::validation("only the constant-scaled probe takes delta")),
            (ProbeKind::ConstantOptimal, None) => Ok(Probe::ConstantOptimal { resolution: DEFAULT_RESOLUTION }),
            (ProbeKind::DynamicOptimal, None) => Ok(Probe::DynamicOptimal),
            (ProbeKind::FramedOptimal, None) => Ok(Probe::FramedOptimal),
        }
    }

    pub fn label(&self) -> String {
        match (self.kind, self.delta) {
            (ProbeKind::ConstantOptimal, _) => "constant-optimal".into(),
            (ProbeKind::ConstantScaled, d) => format!("constant-scaled:{}", d.unwrap_or(f64::NAN)),
            (ProbeKind::DynamicOptimal, _) => "dynamic-optimal".into(),
            (ProbeKind::FramedOptimal, _) => "framed-optimal".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticsSpec {
    pub delay: u32,
    pub probes: Vec<ProbeSpec>,
    pub stations: StationsSpec,
    /// From this `N` on, `|R - 1/e|` and `|N p - 1|` must not increase.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone_from: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: String,
    pub command: Command,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub runs: Vec<RunSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slots: Option<u64>,
    /// Add the analytic value next to simulated ALOHA rows.
    #[serde(default)]
    pub analytic: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asymptotics: Option<AsymptoticsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::validation(format!("config: {e}")))
    }

    /// Pretty JSON with keys in sorted order.
    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
        text.push('\n');
        text
    }

    /// Checks everything that can be checked without running anything.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::validation(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.experiment.is_empty() || self.experiment.contains([',', '"', '\n']) {
            return Err(CliError::validation("experiment name must be non-empty and free of commas and quotes"));
        }
        match self.command {
            Command::Asymptotics => {
                let spec = self
                    .asymptotics
                    .as_ref()
                    .ok_or_else(|| CliError::validation("asymptotics config needs an `asymptotics` section"))?;
                if spec.delay == 0 {
                    return Err(CliError::validation("hard delay D must be at least 1"));
                }
                if spec.probes.is_empty() {
                    return Err(CliError::validation("asymptotics needs at least one probe"));
                }
                let ns = spec.stations.values()?;
                if ns.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(CliError::validation("station schedule must be strictly increasing"));
                }
                for probe in &spec.probes {
                    if let Probe::ConstantScaled { delta } = probe.probe()? {
                        if delta > f64::from(ns[0]) {
                            return Err(CliError::validation(format!("p = {delta}/{} exceeds 1", ns[0])));
                        }
                    }
                }
                Ok(())
            }
            Command::Analytic => {
                self.check_runs()?;
                if let Some(run) = self.runs.iter().find(|r| !r.scheme.is_aloha()) {
                    return Err(CliError::validation(format!("no analytic model for scheme {}", run.scheme.as_str())));
                }
                Ok(())
            }
            Command::Simulate | Command::Estimate => {
                self.check_runs()?;
                if self.seeds.is_empty() {
                    return Err(CliError::validation("seed list is empty"));
                }
                let estimate_only = self.command == Command::Estimate;
                for run in &self.runs {
                    if (run.scheme == Scheme::Estimator) != estimate_only {
                        return Err(CliError::validation(format!(
                            "scheme {} cannot be used with the {} command",
                            run.scheme.as_str(),
                            self.command.as_str()
                        )));
                    }
                }
                if estimate_only {
                    return Ok(());
                }
                let slots = self.slots.ok_or_else(|| CliError::validation("simulate needs `slots`"))?;
                for run in &self.runs {
                    let d = u64::from(run.delay);
                    if slots == 0 || slots % d != 0 {
                        return Err(CliError::validation(format!(
                            "slots = {slots} is not a positive multiple of D = {d}"
                        )));
                    }
                    if !run.scheme.is_aloha() && slots < INIT_FRAMES * d {
                        return Err(CliError::validation(format!("RLRA-DC needs at least {} slots", INIT_FRAMES * d)));
                    }
                }
                Ok(())
            }
        }
    }

    fn check_runs(&self) -> Result<(), CliError> {
        if self.runs.is_empty() {
            return Err(CliError::validation("config has no runs"));
        }
        for run in &self.runs {
            run.points()?;
        }
        Ok(())
    }
}

/// Parses `1,2,5` or an inclusive range `1..100`.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::validation(format!("cannot parse seeds `{s}`"));
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

pub const PRESET_NAMES: [&str; 6] = ["fig3", "fig4", "fig5", "thm1", "thm2", "estimator"];

/// Built-in configurations reproducing the paper's figures and limit checks.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let base = |experiment: &str, command: Command| ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        experiment: experiment.into(),
        command,
        runs: Vec::new(),
        seeds: Vec::new(),
        slots: None,
        analytic: false,
        asymptotics: None,
        out: None,
    };
    let ns = || StationsSpec::List(vec![5, 10, 15]);
    let probes = |kinds: &[ProbeKind]| kinds.iter().map(|&kind| ProbeSpec { kind, delta: None }).collect();
    let config = match name {
        "fig3" => ExperimentConfig {
            runs: vec![
                RunSpec {
                    scheme: Scheme::Constant,
                    delay: 10,
                    stations: ns(),
                    param: Some(ValueSpec::Grid { start: 0.01, stop: 1.0, step: 0.01 }),
                },
                RunSpec {
                    scheme: Scheme::Dynamic,
                    delay: 10,
                    stations: ns(),
                    param: Some(ValueSpec::Grid { start: 0.05, stop: 2.0, step: 0.05 }),
                },
                RunSpec {
                    scheme: Scheme::Framed,
                    delay: 10,
                    stations: ns(),
                    param: Some(ValueSpec::Grid { start: 0.01, stop: 1.0, step: 0.01 }),
                },
            ],
            seeds: vec![1],
            slots: Some(100_000),
            analytic: true,
            ..base("fig3", Command::Simulate)
        },
        "fig4" => ExperimentConfig {
            asymptotics: Some(AsymptoticsSpec {
                delay: 10,
                probes: probes(&[ProbeKind::ConstantOptimal, ProbeKind::DynamicOptimal, ProbeKind::FramedOptimal]),
                stations: StationsSpec::List(vec![
                    1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 20, 50, 100, 200, 500, 1000,
                ]),
                monotone_from: None,
            }),
            ..base("fig4", Command::Asymptotics)
        },
        "fig5" => ExperimentConfig {
            runs: [Scheme::RlraDc, Scheme::RlraDcEstimated, Scheme::Constant]
                .into_iter()
                .map(|scheme| RunSpec {
                    scheme,
                    delay: 10,
                    stations: StationsSpec::List(vec![10, 50, 100, 1000]),
                    param: None,
                })
                .collect(),
            seeds: (1..=100).collect(),
            slots: Some(100_000),
            analytic: true,
            ..base("fig5", Command::Simulate)
        },
        "thm1" => ExperimentConfig {
            asymptotics: Some(AsymptoticsSpec {
                delay: 10,
                probes: vec![
                    ProbeSpec { kind: ProbeKind::ConstantScaled, delta: Some(1.0) },
                    ProbeSpec { kind: ProbeKind::ConstantOptimal, delta: None },
                ],
                stations: StationsSpec::List(vec![100, 200, 300, 500, 700, 1000, 2000, 5000, 10_000]),
                monotone_from: Some(100),
            }),
            ..base("thm1", Command::Asymptotics)
        },
        "thm2" => ExperimentConfig {
            asymptotics: Some(AsymptoticsSpec {
                delay: 10,
                probes: probes(&[ProbeKind::ConstantOptimal]),
                stations: StationsSpec::List(vec![50, 100, 200]),
                monotone_from: Some(50),
            }),
            ..base("thm2", Command::Asymptotics)
        },
        "estimator" => ExperimentConfig {
            runs: vec![RunSpec {
                scheme: Scheme::Estimator,
                delay: 10,
                stations: StationsSpec::List(vec![10, 50, 100]),
                param: None,
            }],
            seeds: (1..=100).collect(),
            ..base("estimator", Command::Estimate)
        },
        _ => return None,
    };
    Some(config)
}
