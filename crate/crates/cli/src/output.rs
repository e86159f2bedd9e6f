//! CSV rows, number formatting and atomic file output.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;
use timely_aloha::rng::RNG_ALGORITHM;

use crate::config::{ExperimentConfig, SCHEMA_VERSION};
use crate::CliError;

/// Header of every run-record CSV.
pub const CSV_HEADER: &str = "experiment,scheme,D,N,param,seed,slots,delivered,throughput,analytic";

/// Header of the asymptotics table.
pub const ASYMPTOTICS_HEADER: &str = "experiment,D,probe,N,throughput,error,load";

/// Formats `x` with 10 significant digits in the style of C's `%.10g`.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 10;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let mantissa = trim_zeros(mantissa.to_string());
        format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One line of the run-record CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub experiment: String,
    pub scheme: String,
    pub delay: u32,
    pub stations: u32,
    pub param: Option<f64>,
    pub seed: Option<u64>,
    pub slots: Option<u64>,
    pub delivered: Option<u64>,
    pub throughput: f64,
    pub analytic: Option<f64>,
}

impl CsvRow {
    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.scheme,
            self.delay,
            self.stations,
            self.param.map(fmt_sig).unwrap_or_default(),
            opt(self.seed),
            opt(self.slots),
            opt(self.delivered),
            fmt_sig(self.throughput),
            self.analytic.map(fmt_sig).unwrap_or_default(),
        )
    }
}

/// A header plus complete lines, ready to write.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: &'static str,
    pub lines: Vec<String>,
}

impl Table {
    pub fn from_rows(rows: &[CsvRow]) -> Self {
        Self { header: CSV_HEADER, lines: rows.iter().map(CsvRow::to_line).collect() }
    }

    pub fn render(&self) -> String {
        let mut out = String::with_capacity(64 * (self.lines.len() + 1));
        out.push_str(self.header);
        out.push('\n');
        for line in &self.lines {
            let _ = writeln!(out, "{line}");
        }
        out
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::runtime(format!("{}: {e}", path.display()))
}

/// Writes `contents` to `path` by renaming a fully written temporary file
/// from the same directory over it.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_error(dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| io_error(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_error(path, e))?;
    tmp.persist(path).map_err(|e| io_error(path, e.error))?;
    Ok(())
}

/// Appends the table to `path`, or creates it. An existing file must carry
/// the same header. The file is replaced in one rename, so readers only ever
/// see complete rows.
pub fn append_table(path: &Path, table: &Table) -> Result<(), CliError> {
    let mut contents = match fs::read_to_string(path) {
        Ok(existing) if existing.is_empty() => String::new(),
        Ok(existing) => {
            if existing.lines().next() != Some(table.header) {
                return Err(CliError::runtime(format!("{}: existing file has a different header", path.display())));
            }
            let mut s = existing;
            if !s.ends_with('\n') {
                s.push('\n');
            }
            s
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(io_error(path, e)),
    };
    if contents.is_empty() {
        contents.push_str(table.header);
        contents.push('\n');
    }
    for line in &table.lines {
        contents.push_str(line);
        contents.push('\n');
    }
    write_atomic(path, &contents)
}

/// `results.csv` -> `results.csv.meta.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Run metadata written next to the CSV.
pub fn metadata(config: &ExperimentConfig, rows: usize) -> String {
    let value = json!({
        "schema_version": SCHEMA_VERSION,
        "toolkit": "timely-aloha",
        "version": env!("CARGO_PKG_VERSION"),
        "rng_algorithm": RNG_ALGORITHM,
        "experiment": config.experiment,
        "command": config.command.as_str(),
        "rows": rows,
        "config": serde_json::to_value(config).expect("config serializes"),
    });
    let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
    text.push('\n');
    text
}
