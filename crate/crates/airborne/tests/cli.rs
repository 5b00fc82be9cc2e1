mod common;

use std::path::Path;
use std::process::{Command, Output};

use airborne::table::{self, Estimator, Row, SpecKind, TableConfig};
use airborne_core::{BiasReport, LulccSource, Method};
use common::{synthetic_dataset, write_dataset};

fn airborne(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_airborne"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn estimate_json_matches_library_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let data = synthetic_dataset(1);
    let file = write_dataset(&data, dir.path(), "d.csv");
    let out = stdout(&airborne(&[
        "estimate",
        "--data",
        path_arg(&file),
        "--method",
        "ols",
        "--spec",
        "extended",
        "--format",
        "json",
    ]));
    let rows: Vec<Row> = serde_json::from_str(&out).unwrap();
    assert_eq!(rows.len(), 1);
    let expected = table::estimate_row(
        &data,
        SpecKind::Extended,
        &Estimator::Ols,
        &TableConfig::default(),
    )
    .unwrap();
    assert_eq!(rows[0], expected);
    assert_eq!(
        serde_json::from_str::<Vec<Row>>(&serde_json::to_string(&rows).unwrap()).unwrap(),
        rows
    );

    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let keys: Vec<&str> = v[0]
        .as_object()
        .unwrap()
        .keys()
        .map(String::as_str)
        .collect();
    let mut want = [
        "method",
        "spec",
        "sample",
        "estimate",
        "se",
        "ci",
        "gamma",
        "delta",
        "instruments",
        "bootstrap",
    ];
    want.sort();
    let mut got = keys.clone();
    got.sort();
    assert_eq!(got, want);
    assert_eq!(v[0]["sample"]["from"], 1959);
    assert_eq!(v[0]["sample"]["n"], 64);
    assert!(v[0]["gamma"]["enso"].is_number());
    assert!(v[0]["bootstrap"].is_null());
}

#[test]
fn iv_without_instruments_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_dataset(&synthetic_dataset(1), dir.path(), "d.csv");
    let o = airborne(&["estimate", "--data", path_arg(&file), "--method", "iv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("instruments required"));

    let o = airborne(&["estimate", "--data", path_arg(&file), "--method", "deming"]);
    assert_eq!(o.status.code(), Some(2));
    let o = airborne(&["estimate", "--data", path_arg(&file), "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    let o = airborne(&[
        "estimate",
        "--data",
        path_arg(&file),
        "--method",
        "iv",
        "--instruments",
        "gcp",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn data_problems_exit_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = airborne(&[
        "estimate",
        "--data",
        path_arg(&dir.path().join("missing.csv")),
    ]);
    assert_eq!(o.status.code(), Some(3));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "year,co2_growth\n1959,1\n").unwrap();
    let o = airborne(&["estimate", "--data", path_arg(&bad)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing column"));

    let file = write_dataset(&synthetic_dataset(1), dir.path(), "d.csv");
    let o = airborne(&["estimate", "--data", path_arg(&file), "--from", "1900"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn degenerate_regressor_exits_with_code_4() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("zero.csv");
    let mut text =
        String::from("year,co2_growth,emissions_ff,lulcc_gcp,lulcc_hc,lulcc_vma,enso,vai\n");
    for y in 0..10 {
        text.push_str(&format!("{},{},0,0,0,0,0.1,0\n", 2000 + y, y));
    }
    std::fs::write(&file, text).unwrap();
    let o = airborne(&["estimate", "--data", path_arg(&file)]);
    assert_eq!(
        o.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn replicate_is_deterministic_and_thread_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_dataset(&synthetic_dataset(2), dir.path(), "d.csv");
    let args = |threads: &'static str| {
        vec![
            "replicate",
            "--data",
            path_arg(&file),
            "--bootstrap",
            "300",
            "--seed",
            "42",
            "--format",
            "json",
            "--threads",
            threads,
        ]
    };
    let a = airborne(&args("1"));
    let b = airborne(&args("1"));
    let c = airborne(&args("3"));
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(stdout(&a), stdout(&c));

    let rows: Vec<Row> = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(rows.len(), 36);
    let full: Vec<&Row> = rows.iter().filter(|r| r.sample.from == 1959).collect();
    let recent: Vec<&Row> = rows.iter().filter(|r| r.sample.from == 1992).collect();
    assert_eq!((full.len(), recent.len()), (18, 18));
    assert_eq!(recent[0].sample.n, 31);
    let labels: Vec<String> = full.iter().take(9).map(|r| r.label()).collect();
    assert_eq!(
        labels,
        [
            "OLS",
            "IV (H&C)",
            "IV (vMa)",
            "IV (H&C, vMa)",
            "Deming (δ = 0.2)",
            "Deming (δ = 0.5)",
            "Deming (δ = 1)",
            "Deming (δ = 2)",
            "Deming (δ = 5)"
        ]
    );
    for r in rows.iter().filter(|r| r.method == Method::Deming) {
        assert_eq!(r.bootstrap.unwrap().b, 300);
        assert!(r.se.unwrap() > 0.0);
    }
    assert!(full[9..].iter().all(|r| r.spec == SpecKind::Extended));
}

#[test]
fn markdown_cells_are_rounded_json_values() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_dataset(&synthetic_dataset(3), dir.path(), "d.csv");
    let common = ["replicate", "--data", path_arg(&file), "--bootstrap", "100"];
    let md = stdout(&airborne(&[&common[..], &["--format", "md"]].concat()));
    let rows: Vec<Row> = serde_json::from_str(&stdout(&airborne(
        &[&common[..], &["--format", "json"]].concat(),
    )))
    .unwrap();

    let body: Vec<&str> = md
        .lines()
        .filter(|l| l.starts_with("| ") && !l.starts_with("| Model"))
        .collect();
    assert_eq!(body.len(), 18);
    for (k, line) in body.iter().enumerate() {
        let cells: Vec<&str> = line.split('|').map(str::trim).collect();
        let (panel, i) = (k / 9, k % 9);
        let simple = rows[panel * 18 + i].clone();
        let extended = rows[panel * 18 + 9 + i].clone();
        assert_eq!(cells[1], simple.label());
        for (offset, r) in [(2, &simple), (5, &extended)] {
            assert_eq!(cells[offset], table::fmt4(r.estimate));
            assert_eq!(cells[offset + 1], table::fmt4(r.se.unwrap()));
            let [lo, hi] = r.ci.unwrap();
            assert_eq!(
                cells[offset + 2],
                format!("[{}, {}]", table::fmt4(lo), table::fmt4(hi))
            );
        }
    }
}

#[test]
fn csv_output_parses() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_dataset(&synthetic_dataset(4), dir.path(), "d.csv");
    let out = stdout(&airborne(&[
        "replicate",
        "--data",
        path_arg(&file),
        "--bootstrap",
        "0",
        "--format",
        "csv",
    ]));
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        table::CSV_HEADER
    );
    let recs: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(recs.len(), 36);
    let deming = recs.iter().find(|r| &r[2] == "deming").unwrap();
    assert_eq!(&deming[8], "", "no bootstrap, no se");
}

#[test]
fn deming_estimate_with_bootstrap() {
    let dir = tempfile::tempdir().unwrap();
    let data = synthetic_dataset(5);
    let file = write_dataset(&data, dir.path(), "d.csv");
    let run = |ci: &str| {
        let out = stdout(&airborne(&[
            "estimate",
            "--data",
            path_arg(&file),
            "--method",
            "deming",
            "--delta",
            "1",
            "--bootstrap",
            "999",
            "--seed",
            "42",
            "--format",
            "json",
            "--deming-ci",
            ci,
        ]));
        serde_json::from_str::<Vec<Row>>(&out).unwrap().remove(0)
    };
    let pct = run("percentile");
    let scaled = run("scaled");
    assert_eq!(pct.estimate, scaled.estimate);
    assert_eq!(pct.se, scaled.se);
    assert_ne!(pct.ci, scaled.ci);
    assert_eq!(pct.delta, Some(1.0));
    assert_eq!(pct.bootstrap.unwrap().seed, 42);
    let [lo, hi] = pct.ci.unwrap();
    assert!(lo < pct.estimate && pct.estimate < hi);
}

#[test]
fn iv_estimate_with_two_instruments_uses_give() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_dataset(&synthetic_dataset(6), dir.path(), "d.csv");
    let out = stdout(&airborne(&[
        "estimate",
        "--data",
        path_arg(&file),
        "--method",
        "iv",
        "--instruments",
        "hc,vma",
        "--format",
        "json",
    ]));
    let row = serde_json::from_str::<Vec<Row>>(&out).unwrap().remove(0);
    assert_eq!(row.method, Method::Give);
    assert_eq!(row.instruments, ["hc", "vma"]);
    assert!(row.se.unwrap() > 0.0);
}

#[test]
fn detrended_enso_changes_only_the_extended_fit() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_dataset(&synthetic_dataset(7), dir.path(), "d.csv");
    let fit = |spec: &str, detrend: bool| {
        let mut args = vec![
            "estimate",
            "--data",
            path_arg(&file),
            "--spec",
            spec,
            "--format",
            "json",
        ];
        if detrend {
            args.push("--detrend-enso");
        }
        serde_json::from_str::<Vec<Row>>(&stdout(&airborne(&args)))
            .unwrap()
            .remove(0)
            .estimate
    };
    assert_eq!(fit("simple", false), fit("simple", true));
    assert_ne!(fit("extended", false), fit("extended", true));
}

#[test]
fn trendtest_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_dataset(&synthetic_dataset(8), dir.path(), "d.csv");
    let out = stdout(&airborne(&[
        "trendtest",
        "--data",
        path_arg(&file),
        "--series",
        "enso",
        "--format",
        "json",
    ]));
    let r: airborne::cli::TrendReport = serde_json::from_str(&out).unwrap();
    assert_eq!(r.n, 64);
    assert!((0.0..=1.0).contains(&r.p_value));

    let mut text = std::fs::read_to_string(&file).unwrap();
    text = text
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i == 0 {
                l.to_string()
            } else {
                let mut cells: Vec<&str> = l.split(',').collect();
                cells[7] = "0.5";
                cells.join(",")
            }
        })
        .collect::<Vec<_>>()
        .join("\n");
    let constant = dir.path().join("constant.csv");
    std::fs::write(&constant, text).unwrap();
    let out = stdout(&airborne(&[
        "trendtest",
        "--data",
        path_arg(&constant),
        "--series",
        "vai",
        "--format",
        "json",
    ]));
    let r: airborne::cli::TrendReport = serde_json::from_str(&out).unwrap();
    assert_eq!(r.p_value, 1.0);

    let o = airborne(&["trendtest", "--data", path_arg(&file), "--series", "nope"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn simulate_reports_predicted_and_realised_ols() {
    let out = stdout(&airborne(&[
        "simulate",
        "--alpha",
        "0.5",
        "--sigma-eta",
        "1",
        "--T",
        "1000",
        "--R",
        "1000",
        "--seed",
        "7",
        "--format",
        "json",
    ]));
    let r: BiasReport = serde_json::from_str(&out).unwrap();
    assert_eq!(r.replications, 1000);
    assert_eq!(r.config.t, 1000);
    assert!((r.ols.mean - r.predicted_ols).abs() <= 3.0 * r.ols.mc_se);
    assert!((r.iv.mean - 0.5).abs() < 0.01);
    assert_eq!(
        serde_json::from_str::<BiasReport>(&serde_json::to_string(&r).unwrap()).unwrap(),
        r
    );

    let md = stdout(&airborne(&["simulate", "--T", "50", "--R", "20"]));
    assert!(md.contains("predicted OLS mean"));
    let o = airborne(&["simulate", "--T", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn plot_data_files() {
    let dir = tempfile::tempdir().unwrap();
    let data = synthetic_dataset(9);
    let file = write_dataset(&data, dir.path(), "d.csv");
    let plots = dir.path().join("plots");
    stdout(&airborne(&[
        "replicate",
        "--data",
        path_arg(&file),
        "--bootstrap",
        "0",
        "--emit-plot-data",
        path_arg(&plots),
    ]));
    let emissions = std::fs::read_to_string(plots.join("emissions.csv")).unwrap();
    assert_eq!(emissions.lines().count(), 1 + 64 * 4);
    let second = emissions.lines().nth(2).unwrap();
    let total: f64 = second.split(',').nth(2).unwrap().parse().unwrap();
    assert_eq!(total, data.emissions(LulccSource::Gcp).values()[0]);
    let est = std::fs::read_to_string(plots.join("estimates.csv")).unwrap();
    assert_eq!(est.lines().count(), 1 + 36);
    assert!(plots.join("series.csv").exists());
}

#[test]
fn csv_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let data = synthetic_dataset(10);
    let file = write_dataset(&data, dir.path(), "d.csv");
    let back = airborne::load_csv(&file).unwrap();
    for name in airborne_core::dataset::REQUIRED_SERIES {
        let (a, b) = (data.values(name).unwrap(), back.values(name).unwrap());
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() <= 1e-12);
        }
    }
}
