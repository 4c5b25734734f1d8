//! Subcommand implementations. Every file is written atomically and every
//! output embeds the configuration that produced it, so a rerun on the
//! same inputs is byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;
use xtalbench_core::crystal::Crystal;
use xtalbench_core::dataset::{load_dataset, write_canonical, DatasetRecord, DatasetSchema};
use xtalbench_core::error::{Result, XtalError};
use xtalbench_core::fetch::{fetch_dataset, load_manifest, DatasetManifest};
use xtalbench_core::fsutil::{read_text, write_atomic};
use xtalbench_core::metrics::{evaluate, EvalConfig, MetricReport};
use xtalbench_core::pairing::pair_structures;
use xtalbench_core::report::emit_leaderboard_csv;
use xtalbench_core::split::{split_dataset, Split};
use xtalbench_core::stats::{dataset_stats, StatsConfig, StatsReport};
use xtalbench_core::{atomgpt, poscar};

use crate::{EvalArgs, FetchArgs, IngestArgs, PlotArgs, SplitArgs, StatsArgs};

fn data_err(msg: impl Into<String>) -> XtalError {
    XtalError::Schema(msg.into())
}

/// Serialize pretty with a trailing newline and write atomically.
fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| data_err(format!("serialization failed: {e}")))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())?;
    Ok(())
}

/// Load a canonical JSON file, refusing files with rejects: canonical
/// data is supposed to be clean by construction.
fn load_canonical(path: &Path) -> Result<Vec<DatasetRecord>> {
    let report = load_dataset(path, DatasetSchema::Generic)?;
    if !report.rejects.is_empty() {
        return Err(data_err(format!(
            "{}: {} of {} records failed canonical validation (first: index {}: {})",
            path.display(),
            report.rejects.len(),
            report.records.len() + report.rejects.len(),
            report.rejects[0].index,
            report.rejects[0].reason,
        )));
    }
    Ok(report.records)
}

pub fn fetch(args: FetchArgs) -> Result<()> {
    let manifest = match (&args.manifest, &args.url, &args.sha256) {
        (Some(path), _, _) => load_manifest(path)?,
        (None, Some(url), Some(sha)) => {
            let m = DatasetManifest {
                name: args.name.clone(),
                source_url: url.clone(),
                sha256: sha.clone(),
                record_count: None,
            };
            m.validate()?;
            m
        }
        _ => {
            return Err(XtalError::InvalidManifest(
                "provide either --manifest or both --url and --sha256".into(),
            ))
        }
    };
    let path = fetch_dataset(&manifest, &args.cache_dir)?;
    println!("{}", path.display());
    Ok(())
}

pub fn ingest(args: IngestArgs) -> Result<()> {
    let report = load_dataset(&args.input, args.schema)?;
    let n_records = report.records.len();
    let n_rejects = report.rejects.len();

    write_atomic(&args.out, write_canonical(&report.records)?.as_bytes())?;
    write_json(
        &sibling(&args.out, ".meta.json"),
        &json!({
            "schema_version": xtalbench_core::SCHEMA_CANONICAL,
            "toolkit_version": env!("CARGO_PKG_VERSION"),
            "config": { "schema": args.schema.to_string() },
            "n_records": n_records,
            "n_rejects": n_rejects,
        }),
    )?;
    write_json(&sibling(&args.out, ".rejects.json"), &report.rejects)?;

    println!(
        "ingested {} records ({} rejected) -> {}",
        n_records,
        n_rejects,
        args.out.display()
    );
    if n_rejects > 0 && !args.allow_rejects {
        return Err(data_err(format!(
            "{} records rejected; see {} (pass --allow-rejects to accept the valid subset)",
            n_rejects,
            sibling(&args.out, ".rejects.json").display()
        )));
    }
    Ok(())
}

/// `x.json` -> `x.json.meta.json` style sibling paths.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

pub fn split(args: SplitArgs) -> Result<()> {
    let records = load_canonical(&args.input)?;
    let ids: Vec<String> = records.iter().map(|r| r.id.clone()).collect();
    let split = split_dataset(&ids, args.ratios.0, args.seed, args.test_rounding)?;
    write_json(&args.out, &split)?;
    println!(
        "split {} ids into {}/{}/{} -> {}",
        split.n_total(),
        split.train.len(),
        split.val.len(),
        split.test.len(),
        args.out.display()
    );
    Ok(())
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let truths = load_canonical(&args.truth)?;
    let by_id: BTreeMap<&str, &DatasetRecord> =
        truths.iter().map(|r| (r.id.as_str(), r)).collect();

    // ids to evaluate, in sorted order so aggregation order never depends
    // on shuffle order or prediction-directory listing order
    let mut ids: Vec<String> = match &args.split {
        Some(path) => {
            let text = read_text(path)?;
            let split: Split = serde_json::from_str(&text)
                .map_err(|e| data_err(format!("{} is not a split file: {e}", path.display())))?;
            let subset = split.subset(&args.subset)?;
            for id in subset {
                if !by_id.contains_key(id.as_str()) {
                    return Err(data_err(format!(
                        "split id {id:?} is not present in {}",
                        args.truth.display()
                    )));
                }
            }
            subset.to_vec()
        }
        None => by_id.keys().map(|s| s.to_string()).collect(),
    };
    ids.sort();

    let truth_subset: Vec<DatasetRecord> =
        ids.iter().map(|id| by_id[id.as_str()].clone()).collect();
    let preds = load_predictions(&args.pred, &ids)?;

    let pairs = pair_structures(
        &truth_subset,
        &preds,
        !args.no_reduce,
        args.niggli_tol,
        args.niggli_max_iter,
    );
    let config = EvalConfig {
        nbins: args.nbins,
        epsilon: args.epsilon,
        epsilon_sensitivity: args.epsilon_sensitivity,
        rmse_norm: args.rmse_norm,
        match_mode: args.match_mode,
        align_translation: args.align_translation,
        niggli_tol: args.niggli_tol,
        niggli_max_iter: args.niggli_max_iter,
        ..EvalConfig::default()
    };
    let report = evaluate(&pairs, &config)?;
    write_json(&args.out, &report)?;

    if let Some(csv_path) = &args.leaderboard {
        let csv = emit_leaderboard_csv(&pairs, &ids)?;
        write_atomic(csv_path, csv.as_bytes())?;
        write_json(
            &sibling(csv_path, ".meta.json"),
            &json!({
                "schema_version": xtalbench_core::SCHEMA_REPORT,
                "toolkit_version": env!("CARGO_PKG_VERSION"),
                "config": &report.config,
                "subset": args.split.as_ref().map(|_| args.subset.as_str()),
                "n_rows": csv.matches("\r\n").count().saturating_sub(1),
            }),
        )?;
    }

    println!(
        "evaluated {} pairs (ok={}, species_mismatch={}, parse_failed={}, reduction_failed={}) -> {}",
        pairs.len(),
        report.n_ok,
        report.n_skipped_species,
        report.n_skipped_parse,
        report.n_skipped_reduction,
        args.out.display()
    );
    Ok(())
}

/// Load predictions from a directory of `<id>.vasp|.poscar|.txt` files or
/// from one canonical JSON file. Unparseable or missing entries simply
/// stay absent — the pairing stage records them as parse failures.
fn load_predictions(path: &Path, ids: &[String]) -> Result<BTreeMap<String, Crystal>> {
    let mut preds = BTreeMap::new();
    if path.is_dir() {
        for id in ids {
            // fixed precedence; the first file that exists decides the format
            let candidates = [
                (path.join(format!("{id}.vasp")), false),
                (path.join(format!("{id}.poscar")), false),
                (path.join(format!("{id}.txt")), true),
            ];
            let Some((file, is_atomgpt)) = candidates.iter().find(|(p, _)| p.is_file()) else {
                continue;
            };
            let Ok(text) = fs::read_to_string(file) else {
                continue;
            };
            let parsed = if *is_atomgpt {
                atomgpt::parse_atomgpt_block(&text)
            } else {
                poscar::parse_poscar(&text)
            };
            if let Ok(c) = parsed {
                preds.insert(id.clone(), c);
            }
        }
    } else {
        let report = load_dataset(path, DatasetSchema::Generic)?;
        for rec in report.records {
            preds.insert(rec.id, rec.structure);
        }
        // rejects are per-record prediction failures, not a fatal error:
        // their ids stay absent and pair as parse_failed
    }
    Ok(preds)
}

pub fn stats(args: StatsArgs) -> Result<()> {
    let records = load_canonical(&args.input)?;
    let config = StatsConfig {
        weighting: args.weighting,
        top_k: args.top_k,
        tc_bin_width: args.tc_bin_width,
        len_tol_rel: args.len_tol_rel,
        ang_tol_deg: args.ang_tol_deg,
        niggli_tol: args.niggli_tol,
        niggli_max_iter: args.niggli_max_iter,
    };
    let report = dataset_stats(&records, &config)?;
    write_json(&args.out, &report)?;
    println!(
        "stats over {} records -> {}",
        report.n_records,
        args.out.display()
    );
    Ok(())
}

pub fn plot(args: PlotArgs) -> Result<()> {
    fs::create_dir_all(&args.out_dir)?;
    let written = match (&args.report, &args.stats) {
        (Some(report_path), None) => {
            let text = read_text(report_path)?;
            let report: MetricReport = serde_json::from_str(&text).map_err(|e| {
                data_err(format!(
                    "{} is not a metric report: {e}",
                    report_path.display()
                ))
            })?;
            crate::plots::plot_report(&report, &args.out_dir)?
        }
        (None, Some(stats_path)) => {
            let text = read_text(stats_path)?;
            let stats: StatsReport = serde_json::from_str(&text).map_err(|e| {
                data_err(format!(
                    "{} is not a stats file: {e}",
                    stats_path.display()
                ))
            })?;
            crate::plots::plot_stats(&stats, &args.out_dir)?
        }
        _ => {
            return Err(XtalError::InvalidConfig(
                "plot needs exactly one of --report or --stats".into(),
            ))
        }
    };
    for name in &written {
        println!("{}", args.out_dir.join(name).display());
    }
    Ok(())
}
