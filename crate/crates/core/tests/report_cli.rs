use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dyadrec::ingest::load_edge_list;
use dyadrec::nullmodels::{Regime, RegimeConfig};
use dyadrec::report::{
    analyze, report_from_json, report_to_csv, report_to_json, run_regime_comparison,
    AnalysisOptions, OutputLock,
};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/small.csv")
}

fn dyadrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyadrec"))
        .args(args)
        .env_remove("DYADREC_THREADS")
        .output()
        .unwrap()
}

#[test]
fn json_reports_round_trip_byte_for_byte() {
    let g = load_edge_list(&fixture()).unwrap();
    let cmp =
        run_regime_comparison(&g, &RegimeConfig::default(), &AnalysisOptions::default()).unwrap();
    for r in &cmp.reports {
        let text = report_to_json(r).unwrap();
        let back = report_from_json(&text).unwrap();
        assert_eq!(&back, r);
        assert_eq!(report_to_json(&back).unwrap(), text);
    }
}

#[test]
fn comparison_is_deterministic_across_thread_counts() {
    let g = load_edge_list(&fixture()).unwrap();
    let cfg = RegimeConfig {
        seed: 3,
        ..RegimeConfig::default()
    };
    let opts = AnalysisOptions::default();
    let a = run_regime_comparison(&g, &cfg, &opts).unwrap();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let b = pool.install(|| run_regime_comparison(&g, &cfg, &opts).unwrap());
    assert_eq!(a, b);
    let order: Vec<&str> = a
        .reports
        .iter()
        .map(|r| r.provenance.regime.as_str())
        .collect();
    assert_eq!(order, Regime::ALL.map(|r| r.label()));
}

#[test]
fn csv_report_has_histogram_then_summary() {
    let g = load_edge_list(&fixture()).unwrap();
    let r = analyze(&g, "obs", None, None, &AnalysisOptions::default()).unwrap();
    let csv = report_to_csv(&r);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("bin_low,bin_high,count"));
    let bins: u64 = csv
        .lines()
        .skip(1)
        .take_while(|l| !l.starts_with("summary,"))
        .map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(bins, r.census.mutual);
    assert!(csv.contains("summary,mutual,"));
}

#[test]
fn output_lock_is_exclusive() {
    let dir = tempfile::tempdir().unwrap();
    let lock = OutputLock::acquire(dir.path()).unwrap();
    assert!(OutputLock::acquire(dir.path()).is_err());
    drop(lock);
    assert!(OutputLock::acquire(dir.path()).is_ok());
}

#[test]
fn cli_census_and_report() {
    let out = dyadrec(&["census", fixture().to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let census: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let g = load_edge_list(&fixture()).unwrap();
    assert_eq!(census["mutual"], g.dyad_census().mutual);

    let out = dyadrec(&["--format", "csv", "report", fixture().to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .starts_with("bin_low,bin_high,count\n"));
}

#[test]
fn cli_ingest_then_regimes() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("events.csv");
    let mut body = String::from("timestamp,caller,callee\n");
    for i in 0..40u32 {
        for j in 0..40u32 {
            if i != j && (i * 7 + j * 3) % 5 < 2 {
                for _ in 0..=(i + j) % 4 {
                    body.push_str(&format!("{},{},{}\n", i * 100 + j, i, j));
                }
            }
        }
    }
    fs::write(&log, body).unwrap();
    let graph = dir.path().join("graph.csv");
    let out = dyadrec(&[
        "ingest",
        log.to_str().unwrap(),
        "-o",
        graph.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let res = dir.path().join("out");
    let out = dyadrec(&[
        "regimes",
        graph.to_str().unwrap(),
        "--out-dir",
        res.to_str().unwrap(),
        "--save-graphs",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for label in ["obs", "obs_equi", "rw", "rw_equi"] {
        let r = report_from_json(
            &fs::read_to_string(res.join(format!("report_{label}.json"))).unwrap(),
        )
        .unwrap();
        assert_eq!(r.provenance.regime, label);
    }
    assert!(res.join("comparison.json").exists());
    assert!(!res.join(OutputLock::FILE_NAME).exists());
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        dyadrec(&["census", "/nonexistent.csv"]).status.code(),
        Some(3)
    );

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "src,dst,weight\n0,1,-3\n").unwrap();
    assert_eq!(
        dyadrec(&["census", bad.to_str().unwrap()]).status.code(),
        Some(2)
    );

    let one_way = dir.path().join("oneway.csv");
    fs::write(&one_way, "src,dst,weight\n0,1,3\n1,2,1\n").unwrap();
    let out = dyadrec(&["assortativity", one_way.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    let out = dyadrec(&[
        "regimes",
        one_way.to_str().unwrap(),
        "--out-dir",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));

    let dup = dir.path().join("dup.csv");
    fs::write(&dup, "src,dst,weight\n0,1,3\n0,1,1\n1,0,2\n").unwrap();
    assert_eq!(
        dyadrec(&["census", dup.to_str().unwrap()]).status.code(),
        Some(0)
    );
    assert_ne!(
        dyadrec(&["--strict", "census", dup.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );

    assert_eq!(
        dyadrec(&[
            "synth",
            "--vertices",
            "0",
            "-o",
            dir.path().join("s.csv").to_str().unwrap()
        ])
        .status
        .code(),
        Some(2)
    );
}
