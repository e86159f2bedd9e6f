use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use timely_aloha::analytic::framed_optimal_max_throughput;
use timely_aloha_cli::{preset, ExperimentConfig, CSV_HEADER, PRESET_NAMES};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_timely-aloha")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn column(line: &str, i: usize) -> &str {
    line.split(',').nth(i).unwrap()
}

#[test]
fn golden_analytic_table() {
    let out = stdout(&bin(&[
        "analytic",
        "--experiment",
        "golden",
        "--scheme",
        "constant",
        "--delay",
        "1",
        "--stations",
        "5",
        "--param",
        "0.1,0.2,0.5,1",
    ]));
    let golden = "\
experiment,scheme,D,N,param,seed,slots,delivered,throughput,analytic
golden,constant,1,5,0.1,,,,0.32805,0.32805
golden,constant,1,5,0.2,,,,0.4096,0.4096
golden,constant,1,5,0.5,,,,0.15625,0.15625
golden,constant,1,5,1,,,,0,0
";
    assert_eq!(out, golden);
    assert_eq!(out.lines().next().unwrap(), CSV_HEADER);
}

#[test]
fn analytic_grid_peaks_at_one_over_n() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("grid.json");
    fs::write(
        &cfg,
        r#"{"schema_version": 1, "experiment": "d1", "command": "analytic",
            "runs": [{"scheme": "constant", "delay": 1, "stations": [5],
                      "param": {"start": 0.01, "stop": 1.0, "step": 0.01}}]}"#,
    )
    .unwrap();
    let out = stdout(&bin(&["analytic", "--config", cfg.to_str().unwrap()]));
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 100);
    let best = rows
        .iter()
        .max_by(|a, b| column(a, 8).parse::<f64>().unwrap().total_cmp(&column(b, 8).parse().unwrap()))
        .unwrap();
    assert_eq!(column(best, 4), "0.2");
    assert_eq!(column(best, 8), "0.4096");
}

#[test]
fn framed_maximum_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("framed.json");
    fs::write(
        &cfg,
        r#"{"schema_version": 1, "experiment": "framed", "command": "analytic",
            "runs": [{"scheme": "framed", "delay": 10, "stations": {"start": 1, "stop": 200, "step": 1}}]}"#,
    )
    .unwrap();
    let out = stdout(&bin(&["analytic", "--config", cfg.to_str().unwrap()]));
    for (n, row) in (1..=200).zip(out.lines().skip(1)) {
        let r: f64 = column(row, 8).parse().unwrap();
        let exact = framed_optimal_max_throughput(10, n).unwrap();
        assert!((r - exact).abs() <= 1e-9 * exact, "N={n}: {r} vs {exact}");
    }
}

#[test]
fn config_round_trip_is_canonical() {
    for name in PRESET_NAMES {
        let printed = stdout(&bin(&["preset", name, "--print-config"]));
        let parsed = ExperimentConfig::from_json(&printed).unwrap();
        assert_eq!(parsed, preset(name).unwrap());
        assert_eq!(parsed.to_canonical_json(), printed);
    }
    let shuffled = r#"{"seeds": [3, 1], "slots": 100, "runs": [{"stations": [4], "delay": 5, "scheme": "constant", "param": [0.25]}],
                       "command": "simulate", "experiment": "rt", "schema_version": 1}"#;
    let canonical = ExperimentConfig::from_json(shuffled).unwrap().to_canonical_json();
    let again = ExperimentConfig::from_json(&canonical).unwrap().to_canonical_json();
    assert_eq!(canonical, again);
    let keys: Vec<&str> = canonical.lines().filter(|l| l.starts_with("  \"")).map(|l| l.trim()).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn empty_seed_list_fails_before_output() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("never.csv");
    let out = bin(&[
        "simulate",
        "--scheme",
        "constant",
        "--delay",
        "10",
        "--stations",
        "5",
        "--param",
        "0.2",
        "--slots",
        "1000",
        "--seeds",
        "",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out_path.exists());
    assert!(!Path::new(&format!("{}.meta.json", out_path.display())).exists());
}

#[test]
fn validation_failures_exit_with_one() {
    assert_eq!(
        bin(&[
            "simulate",
            "--scheme",
            "constant",
            "--delay",
            "10",
            "--stations",
            "5",
            "--param",
            "0.2",
            "--seeds",
            "1",
            "--slots",
            "15"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        bin(&["analytic", "--scheme", "constant", "--delay", "10", "--stations", "5", "--param", "1.5"]).status.code(),
        Some(1)
    );
    assert_eq!(bin(&["analytic", "--scheme", "rlra-dc", "--delay", "10", "--stations", "5"]).status.code(), Some(1));
    assert_eq!(bin(&["preset", "fig9"]).status.code(), Some(1));
    assert_eq!(bin(&["simulate", "--no-such-flag"]).status.code(), Some(1));
}

fn simulate_args<'a>(jobs: &'a str, out: &'a str) -> Vec<&'a str> {
    vec![
        "simulate",
        "--experiment",
        "det",
        "--scheme",
        "constant",
        "--delay",
        "10",
        "--stations",
        "5,10",
        "--param",
        "0.1,0.2",
        "--seeds",
        "1..6",
        "--slots",
        "5000",
        "--analytic",
        "--jobs",
        jobs,
        "--out",
        out,
    ]
}

#[test]
fn output_is_independent_of_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    stdout(&bin(&simulate_args("1", a.to_str().unwrap())));
    stdout(&bin(&simulate_args("4", b.to_str().unwrap())));
    let (ta, tb) = (fs::read_to_string(&a).unwrap(), fs::read_to_string(&b).unwrap());
    assert_eq!(ta, tb);
    assert_eq!(ta.lines().count(), 1 + 2 * 2 * 6);

    let meta = fs::read_to_string(dir.path().join("a.csv.meta.json")).unwrap();
    let meta: serde_json::Value = serde_json::from_str(&meta).unwrap();
    assert_eq!(meta["schema_version"], 1);
    assert!(meta["rng_algorithm"].as_str().unwrap().contains("ChaCha8"));
    assert_eq!(meta["rows"], 24);
}

#[test]
fn repeated_seed_gives_identical_rows_and_appends() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rep.csv");
    let p = path.to_str().unwrap();
    let args = [
        "simulate",
        "--scheme",
        "rlra-dc",
        "--delay",
        "10",
        "--stations",
        "8",
        "--seeds",
        "4,4",
        "--slots",
        "2000",
        "--out",
        p,
    ];
    stdout(&bin(&args));
    stdout(&bin(&args));
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0], CSV_HEADER);
    assert!(lines[1..].iter().all(|l| *l == lines[1]));
}

#[test]
fn mismatched_header_is_left_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("other.csv");
    fs::write(&path, "a,b\n1,2\n").unwrap();
    let out = bin(&[
        "analytic",
        "--scheme",
        "constant",
        "--delay",
        "1",
        "--stations",
        "2",
        "--param",
        "0.5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(fs::read_to_string(&path).unwrap(), "a,b\n1,2\n");
}

#[test]
fn trace_has_one_line_per_slot() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.txt");
    stdout(&bin(&[
        "simulate",
        "--scheme",
        "framed",
        "--delay",
        "5",
        "--stations",
        "3",
        "--param",
        "1",
        "--seeds",
        "9",
        "--slots",
        "50",
        "--trace",
        trace.to_str().unwrap(),
    ]));
    let text = fs::read_to_string(&trace).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "slot,tx_count,feedback");
    assert_eq!(lines.len(), 51);
    assert!(lines[1..].iter().all(|l| ["ACK", "NACK", "SILENCE"].contains(&column(l, 2))));
    let multi = bin(&[
        "simulate",
        "--scheme",
        "framed",
        "--delay",
        "5",
        "--stations",
        "3",
        "--seeds",
        "1,2",
        "--slots",
        "50",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(multi.status.code(), Some(1));
}

#[test]
fn asymptotics_table_and_check() {
    let out = stdout(&bin(&["asymptotics", "--delay", "1", "--probe", "constant-optimal", "--stations", "2,5,10,100"]));
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        assert_eq!(column(row, 6), "1", "{row}");
    }
    let framed = stdout(&bin(&["asymptotics", "--delay", "10", "--probe", "framed-optimal", "--stations", "11,20,50"]));
    for (n, row) in [11_u32, 20, 50].into_iter().zip(framed.lines().skip(1)) {
        let r: f64 = column(row, 4).parse().unwrap();
        let exact = (1.0 - 1.0 / f64::from(n)).powi(n as i32 - 1);
        assert!((r - exact).abs() < 1e-9);
    }
    // p = 2/N drifts away from 1/e as N grows
    let failing = bin(&[
        "asymptotics",
        "--delay",
        "10",
        "--probe",
        "constant-scaled:2",
        "--stations",
        "20,100,1000",
        "--monotone-from",
        "20",
    ]);
    assert_eq!(failing.status.code(), Some(2));
    assert_eq!(String::from_utf8(failing.stdout).unwrap().lines().count(), 4);
}

#[test]
fn estimate_rows() {
    let out =
        stdout(&bin(&["estimate", "--scheme", "estimator", "--delay", "10", "--stations", "10", "--seeds", "1..3"]));
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        assert_eq!(column(row, 1), "estimator");
        let n_hat: u32 = column(row, 4).parse().unwrap();
        assert_eq!(n_hat % 10, 0);
        assert_eq!(column(row, 6), "10000");
    }
}
