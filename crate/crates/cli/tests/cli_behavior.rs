//! End-to-end behavior of the installed binary: exit codes, output file
//! contracts, and byte determinism. The leaderboard CSV is re-read with
//! the `csv` crate — an independent RFC-4180 implementation — so writer
//! bugs can't hide behind a matching in-house reader.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_xtalbench"))
}

fn testdata(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../testdata")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn assert_code(out: &Output, want: i32) {
    let got = out.status.code().unwrap_or(-1);
    assert_eq!(
        got,
        want,
        "exit {got}, wanted {want}\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// ingest + split the mini dataset into `dir`, returning canonical path.
fn ingest_mini(dir: &Path) -> PathBuf {
    let canon = dir.join("canon.json");
    let out = run(&[
        "ingest",
        "--input",
        testdata("mini_dataset.json").to_str().unwrap(),
        "--schema",
        "generic",
        "--out",
        canon.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    canon
}

#[test]
fn version_names_the_schemas() {
    let out = run(&["--version"]);
    assert_code(&out, 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for tag in ["canonical/v1", "split/v1", "report/v1", "stats/v1"] {
        assert!(text.contains(tag), "missing {tag} in {text:?}");
    }
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();

    // 2: usage (clap)
    assert_code(&run(&["frobnicate"]), 2);
    assert_code(&run(&["split", "--input"]), 2);
    assert_code(
        &run(&["split", "--input", "x.json", "--ratios", "0.5,0.5", "--out", "y.json"]),
        2,
    );

    // 4: I/O (missing file)
    let out = run(&[
        "split",
        "--input",
        dir.path().join("absent.json").to_str().unwrap(),
        "--out",
        dir.path().join("s.json").to_str().unwrap(),
    ]);
    assert_code(&out, 4);

    // 3: data (present but not valid JSON)
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "not json").unwrap();
    let out = run(&[
        "split",
        "--input",
        bad.to_str().unwrap(),
        "--out",
        dir.path().join("s.json").to_str().unwrap(),
    ]);
    assert_code(&out, 3);

    // errors are single-line
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.trim_end().lines().count(), 1, "stderr: {stderr:?}");
    assert!(stderr.starts_with("error: "));
}

#[test]
fn ingest_rejects_exit_3_but_write_everything() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.json");
    std::fs::write(
        &raw,
        r#"[
          {"id": "ok-1", "formula": "Al", "tc_k": 1.0,
           "lattice_abc": [4.0, 4.0, 4.0], "lattice_angles": [90, 90, 90],
           "species": ["Al"], "frac_coords": [[0, 0, 0]]},
          {"id": "bad-1", "formula": "Al", "tc_k": -5.0,
           "lattice_abc": [4.0, 4.0, 4.0], "lattice_angles": [90, 90, 90],
           "species": ["Al"], "frac_coords": [[0, 0, 0]]}
        ]"#,
    )
    .unwrap();
    let canon = dir.path().join("canon.json");

    let out = run(&[
        "ingest",
        "--input",
        raw.to_str().unwrap(),
        "--schema",
        "generic",
        "--out",
        canon.to_str().unwrap(),
    ]);
    assert_code(&out, 3);

    // outputs written despite the failure exit
    assert!(canon.exists());
    let rejects: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("canon.json.rejects.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(rejects.as_array().unwrap().len(), 1);
    assert_eq!(rejects[0]["index"], 1);
    let meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("canon.json.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta["n_records"], 1);
    assert_eq!(meta["n_rejects"], 1);
    assert_eq!(meta["config"]["schema"], "generic");

    // --allow-rejects downgrades to success
    let out = run(&[
        "ingest",
        "--input",
        raw.to_str().unwrap(),
        "--schema",
        "generic",
        "--out",
        canon.to_str().unwrap(),
        "--allow-rejects",
    ]);
    assert_code(&out, 0);
}

#[test]
fn eval_on_prediction_directory_tolerates_broken_files() {
    let dir = tempfile::tempdir().unwrap();
    let canon = ingest_mini(dir.path());

    // copy the bundled predictions, then break one and delete another
    let preds = dir.path().join("preds");
    std::fs::create_dir(&preds).unwrap();
    for entry in std::fs::read_dir(testdata("mini_preds")).unwrap() {
        let entry = entry.unwrap();
        std::fs::copy(entry.path(), preds.join(entry.file_name())).unwrap();
    }
    std::fs::write(preds.join("mini-003.vasp"), "garbage\nnot a poscar").unwrap();
    std::fs::remove_file(preds.join("mini-004.vasp")).unwrap();

    let report_path = dir.path().join("report.json");
    let out = run(&[
        "eval",
        "--truth",
        canon.to_str().unwrap(),
        "--pred",
        preds.to_str().unwrap(),
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_code(&out, 0);

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["n_ok"], 8);
    assert_eq!(report["n_skipped_parse"], 2);
    // near-identity predictions: MAE within the writers' 6-decimal grid
    for param in ["a", "b", "c", "alpha", "beta", "gamma"] {
        let mae = report["mae"][param].as_f64().unwrap();
        assert!(mae < 1e-5, "{param} MAE {mae}");
    }
    assert!(report["rmse_mean_angstrom"].as_f64().unwrap() < 1e-4);
    assert_eq!(report["config"]["nbins"], 30);
}

#[test]
fn eval_subset_uses_only_the_split_members() {
    let dir = tempfile::tempdir().unwrap();
    let canon = ingest_mini(dir.path());
    let split = dir.path().join("split.json");
    assert_code(
        &run(&[
            "split",
            "--input",
            canon.to_str().unwrap(),
            "--out",
            split.to_str().unwrap(),
        ]),
        0,
    );
    let report_path = dir.path().join("report.json");
    let out = run(&[
        "eval",
        "--truth",
        canon.to_str().unwrap(),
        "--pred",
        canon.to_str().unwrap(),
        "--split",
        split.to_str().unwrap(),
        "--subset",
        "test",
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    // default ratios on 10 records: floor(0.1·10) = 1 test structure
    assert_eq!(report["n_ok"], 1);
}

#[test]
fn leaderboard_round_trips_through_an_independent_csv_parser() {
    let dir = tempfile::tempdir().unwrap();
    let canon = ingest_mini(dir.path());
    let csv_path = dir.path().join("leaderboard.csv");
    let out = run(&[
        "eval",
        "--truth",
        canon.to_str().unwrap(),
        "--pred",
        canon.to_str().unwrap(),
        "--out",
        dir.path().join("report.json").to_str().unwrap(),
        "--leaderboard",
        csv_path.to_str().unwrap(),
    ]);
    assert_code(&out, 0);

    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        vec!["id", "target", "prediction"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 10);
    // ids in sorted order; POSCAR payloads survive quoting intact
    let ids: Vec<&str> = rows.iter().map(|r| r.get(0).unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    for row in &rows {
        let truth = xtalbench_core::poscar::parse_poscar(row.get(1).unwrap()).unwrap();
        let pred = xtalbench_core::poscar::parse_poscar(row.get(2).unwrap()).unwrap();
        assert_eq!(truth.species_counts(), pred.species_counts());
    }

    let meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("leaderboard.csv.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta["n_rows"], 10);
    assert_eq!(meta["config"]["match_mode"], "assignment");
}

#[test]
fn plots_are_well_formed_xml_with_config_echo() {
    let dir = tempfile::tempdir().unwrap();
    let canon = ingest_mini(dir.path());
    let report_path = dir.path().join("report.json");
    assert_code(
        &run(&[
            "eval",
            "--truth",
            canon.to_str().unwrap(),
            "--pred",
            canon.to_str().unwrap(),
            "--out",
            report_path.to_str().unwrap(),
        ]),
        0,
    );
    let stats_path = dir.path().join("stats.json");
    assert_code(
        &run(&[
            "stats",
            "--input",
            canon.to_str().unwrap(),
            "--out",
            stats_path.to_str().unwrap(),
        ]),
        0,
    );

    let plots = dir.path().join("plots");
    assert_code(
        &run(&["plot", "--report", report_path.to_str().unwrap(), "--out-dir", plots.to_str().unwrap()]),
        0,
    );
    assert_code(
        &run(&["plot", "--stats", stats_path.to_str().unwrap(), "--out-dir", plots.to_str().unwrap()]),
        0,
    );

    let mut names: Vec<String> = std::fs::read_dir(&plots)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        vec![
            "composition.svg",
            "families.svg",
            "hist_a.svg",
            "hist_alpha.svg",
            "hist_b.svg",
            "hist_beta.svg",
            "hist_c.svg",
            "hist_gamma.svg",
            "kld.svg",
            "mae.svg",
            "rmse.svg",
            "tc_hist.svg",
        ]
    );
    for name in &names {
        let svg = std::fs::read_to_string(plots.join(name)).unwrap();
        xtalbench_testkit::check_xml(&svg)
            .unwrap_or_else(|e| panic!("{name} is not well-formed: {e}"));
        assert!(svg.contains("<desc>"), "{name} lost its config echo");
    }
}

#[test]
fn pipeline_reruns_are_byte_identical() {
    let once = |dir: &Path| {
        let canon = ingest_mini(dir);
        let split = dir.join("split.json");
        assert_code(
            &run(&[
                "split",
                "--input",
                canon.to_str().unwrap(),
                "--seed",
                "3407",
                "--out",
                split.to_str().unwrap(),
            ]),
            0,
        );
        let report = dir.join("report.json");
        assert_code(
            &run(&[
                "eval",
                "--truth",
                canon.to_str().unwrap(),
                "--pred",
                testdata("mini_preds").to_str().unwrap(),
                "--out",
                report.to_str().unwrap(),
                "--leaderboard",
                dir.join("lb.csv").to_str().unwrap(),
            ]),
            0,
        );
        assert_code(
            &run(&[
                "plot",
                "--report",
                report.to_str().unwrap(),
                "--out-dir",
                dir.join("plots").to_str().unwrap(),
            ]),
            0,
        );
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    once(a.path());
    once(b.path());

    for rel in [
        "canon.json",
        "canon.json.meta.json",
        "split.json",
        "report.json",
        "lb.csv",
        "lb.csv.meta.json",
        "plots/hist_a.svg",
        "plots/mae.svg",
        "plots/kld.svg",
    ] {
        let x = std::fs::read(a.path().join(rel)).unwrap();
        let y = std::fs::read(b.path().join(rel)).unwrap();
        assert_eq!(x, y, "{rel} differs between identical runs");
    }
}

#[test]
fn vasp_takes_precedence_over_txt_for_the_same_id() {
    let dir = tempfile::tempdir().unwrap();
    let canon = ingest_mini(dir.path());

    let preds = dir.path().join("preds");
    std::fs::create_dir(&preds).unwrap();
    // only mini-001: a .txt with WRONG species, plus a correct .vasp copy
    std::fs::copy(
        testdata("mini_preds/mini-001.vasp"),
        preds.join("mini-001.vasp"),
    )
    .unwrap();
    std::fs::write(
        preds.join("mini-001.txt"),
        "5.0 5.0 5.0\n90 90 90\nCu 0 0 0\n",
    )
    .unwrap();

    let report_path = dir.path().join("report.json");
    assert_code(
        &run(&[
            "eval",
            "--truth",
            canon.to_str().unwrap(),
            "--pred",
            preds.to_str().unwrap(),
            "--out",
            report_path.to_str().unwrap(),
        ]),
        0,
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    // the .vasp file (right species) won; had the .txt won this would be
    // a species mismatch instead
    assert_eq!(report["n_ok"], 1);
    assert_eq!(report["n_skipped_species"], 0);
    assert_eq!(report["n_skipped_parse"], 9);
}
