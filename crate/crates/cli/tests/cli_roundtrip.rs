//! CSV/SVG artifact checks: reference-reader round-trips, schema
//! stability, sweep isolation and exit codes.

use brinkfric::commands::{apply_override, cmd_run, cmd_sweep};
use brinkfric::config::parse_config;
use brinkfric::csvout::{fmt_float, write_csv, Table};

const QUICK: &str = include_str!("../../../configs/quick.cfg");

fn quick_config(dir: &std::path::Path) -> brinkfric::RunConfig {
    let mut cfg = parse_config(QUICK).unwrap();
    cfg.output.dir = dir.to_string_lossy().into_owned();
    cfg
}

#[test]
fn one_row_table_round_trips_through_reference_reader() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("table.csv");
    let mut table = Table::new(&["a", "b", "note"]);
    table.push_row(vec![
        fmt_float(1.0 / 3.0, 17),
        fmt_float(-2.5e-11, 17),
        "contains, a comma".to_string(),
    ]);
    write_csv(&table, &path).unwrap();

    let mut rdr = csv::Reader::from_path(&path).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(headers, csv::StringRecord::from(vec!["a", "b", "note"]));
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].get(0).unwrap().parse::<f64>().unwrap(), 1.0 / 3.0);
    assert_eq!(rows[0].get(1).unwrap().parse::<f64>().unwrap(), -2.5e-11);
    assert_eq!(rows[0].get(2).unwrap(), "contains, a comma");
}

#[test]
fn run_artifacts_have_expected_schemas_and_row_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = quick_config(tmp.path());
    assert_eq!(cmd_run(&cfg).unwrap(), 0);

    let mut rdr = csv::Reader::from_path(tmp.path().join("trajectory.csv")).unwrap();
    assert_eq!(
        rdr.headers().unwrap(),
        &csv::StringRecord::from(vec![
            "t",
            "l2_u",
            "h1_u",
            "lp_u_alpha2",
            "l2_p",
            "max_div",
            "picard_iters",
            "uzawa_iters"
        ])
    );
    let n_steps = (cfg.stepping.t_end / cfg.stepping.dt).round() as usize;
    assert_eq!(rdr.records().count(), n_steps + 1);

    let mut rdr = csv::Reader::from_path(tmp.path().join("ledger.csv")).unwrap();
    assert_eq!(
        rdr.headers().unwrap(),
        &csv::StringRecord::from(vec![
            "t",
            "ddt_kinetic",
            "grad",
            "darcy",
            "forch",
            "friction",
            "source",
            "slack"
        ])
    );
    assert_eq!(rdr.records().count(), n_steps);

    let svg = std::fs::read_to_string(tmp.path().join("energy.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 5);
}

#[test]
fn zero_config_produces_zero_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let text = QUICK
        .replace("preset = sine-y\namplitude = 0.5", "preset = zero")
        .replace("preset = shear-profile\namplitude = 1.0", "preset = zero")
        .replace("emit_svg = true", "emit_svg = false");
    let mut cfg = parse_config(&text).unwrap();
    cfg.output.dir = tmp.path().to_string_lossy().into_owned();
    assert_eq!(cmd_run(&cfg).unwrap(), 0);
    let mut rdr = csv::Reader::from_path(tmp.path().join("trajectory.csv")).unwrap();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        assert_eq!(rec.get(1).unwrap().parse::<f64>().unwrap(), 0.0);
        assert_eq!(rec.get(4).unwrap().parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn monotone_kinetic_energy_without_forcing() {
    let tmp = tempfile::tempdir().unwrap();
    let text = QUICK.replace("preset = sine-y\namplitude = 0.5", "preset = zero");
    let mut cfg = parse_config(&text).unwrap();
    cfg.output.dir = tmp.path().to_string_lossy().into_owned();
    assert_eq!(cmd_run(&cfg).unwrap(), 0);
    let mut rdr = csv::Reader::from_path(tmp.path().join("trajectory.csv")).unwrap();
    let l2: Vec<f64> = rdr
        .records()
        .map(|r| r.unwrap().get(1).unwrap().parse::<f64>().unwrap())
        .collect();
    for w in l2.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12));
    }
}

#[test]
fn sweep_isolates_runs_and_indexes_them() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = quick_config(tmp.path());
    std::env::set_var("BRINKFRIC_THREADS", "2");
    let code = cmd_sweep(
        &cfg,
        "params.eps",
        &["1e-2".to_string(), "1e-3".to_string(), "1e-4".to_string()],
    )
    .unwrap();
    assert_eq!(code, 0);
    for k in 0..3 {
        let dir = tmp.path().join(format!("run_{k:03}"));
        assert!(dir.join("trajectory.csv").exists(), "missing run dir {k}");
    }
    let mut rdr = csv::Reader::from_path(tmp.path().join("sweep_index.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1].get(2).unwrap(), "1e-3");
}

#[test]
fn override_keys_are_validated() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = quick_config(tmp.path());
    assert!(apply_override(&cfg, "params.eps", "1e-4").is_ok());
    assert!(apply_override(&cfg, "params.alpha", "5.0").is_err());
    assert!(apply_override(&cfg, "grid.apothem", "3").is_err());
    assert!(apply_override(&cfg, "params.nu", "fast").is_err());
}

#[test]
fn unwritable_output_directory_is_an_io_error() {
    let mut cfg = parse_config(QUICK).unwrap();
    cfg.output.dir = "/proc/definitely/not/writable".to_string();
    assert!(matches!(
        cmd_run(&cfg),
        Err(brinkfric::CliError::Io(_))
    ));
}
