//! Chart assembly: turns a metric report or a stats file into a fixed set
//! of deterministically named SVG files.

use std::path::Path;

use xtalbench_core::error::{Result, XtalError};
use xtalbench_core::fsutil::write_atomic;
use xtalbench_core::lattice::Param;
use xtalbench_core::metrics::MetricReport;
use xtalbench_core::report::{emit_bar_chart, emit_overlay_histogram, PlotSpec, Series, SeriesData};
use xtalbench_core::stats::{CrystalFamily, StatsReport};

fn config_echo<T: serde::Serialize>(config: &T) -> Result<String> {
    serde_json::to_string(config)
        .map_err(|e| XtalError::Schema(format!("config echo serialization failed: {e}")))
}

fn write_svg(dir: &Path, name: &str, svg: &str, written: &mut Vec<String>) -> Result<()> {
    write_atomic(&dir.join(name), svg.as_bytes())?;
    written.push(name.to_string());
    Ok(())
}

/// Per-parameter truth/prediction histogram overlays plus MAE, KLD and
/// RMSE bar charts. Returns the file names written, in emission order.
pub fn plot_report(report: &MetricReport, dir: &Path) -> Result<Vec<String>> {
    let echo = config_echo(&report.config)?;
    let mut written = Vec::new();

    for param in Param::ALL {
        let key = param.label();
        let Some(h) = report.histograms.get(key) else {
            continue; // tolerate reports with fewer histograms
        };
        let mut spec = PlotSpec::new(
            format!("Lattice parameter {key}: truth vs prediction"),
            format!("{key} ({})", param.unit()),
            "count",
        );
        spec.desc = echo.clone();
        spec.series = vec![
            Series {
                name: "truth".into(),
                data: SeriesData::Histogram {
                    edges: h.edges.clone(),
                    counts: h.truth.clone(),
                },
            },
            Series {
                name: "prediction".into(),
                data: SeriesData::Histogram {
                    edges: h.edges.clone(),
                    counts: h.pred.clone(),
                },
            },
        ];
        write_svg(dir, &format!("hist_{key}.svg"), &emit_overlay_histogram(&spec)?, &mut written)?;
    }

    let labels: Vec<String> = Param::ALL.iter().map(|p| p.label().to_string()).collect();
    let mut mae = PlotSpec::new("Lattice parameter MAE", "parameter", "MAE (Å / deg)");
    mae.desc = echo.clone();
    mae.series = vec![Series {
        name: "mae".into(),
        data: SeriesData::Bars {
            labels: labels.clone(),
            values: Param::ALL.iter().map(|&p| report.mae.get(p)).collect(),
        },
    }];
    write_svg(dir, "mae.svg", &emit_bar_chart(&mae)?, &mut written)?;

    let mut kld = PlotSpec::new("Lattice parameter KLD", "parameter", "D(truth ‖ pred) (nats)");
    kld.desc = echo.clone();
    kld.series = vec![Series {
        name: "kld".into(),
        data: SeriesData::Bars {
            labels,
            values: Param::ALL.iter().map(|&p| report.kld.get(p)).collect(),
        },
    }];
    write_svg(dir, "kld.svg", &emit_bar_chart(&kld)?, &mut written)?;

    if let (Some(norm), Some(ang)) = (report.rmse_mean, report.rmse_mean_angstrom) {
        let mut rmse = PlotSpec::new("Coordinate RMSE", "measure", "RMSE");
        rmse.desc = echo;
        rmse.series = vec![Series {
            name: "rmse".into(),
            data: SeriesData::Bars {
                labels: vec!["normalized".into(), "angstrom".into()],
                values: vec![norm, ang],
            },
        }];
        write_svg(dir, "rmse.svg", &emit_bar_chart(&rmse)?, &mut written)?;
    }
    Ok(written)
}

/// Top-element composition, crystal-family and Tc bar charts.
pub fn plot_stats(stats: &StatsReport, dir: &Path) -> Result<Vec<String>> {
    let echo = config_echo(&stats.config)?;
    let mut written = Vec::new();

    let mut comp = PlotSpec::new("Element fractions (top)", "element", "fraction");
    comp.desc = echo.clone();
    comp.series = vec![Series {
        name: "fraction".into(),
        data: SeriesData::Bars {
            labels: stats.composition.top_k.iter().map(|(e, _)| e.clone()).collect(),
            values: stats.composition.top_k.iter().map(|&(_, f)| f).collect(),
        },
    }];
    write_svg(dir, "composition.svg", &emit_bar_chart(&comp)?, &mut written)?;

    let mut fam = PlotSpec::new("Crystal families (lattice proxy)", "family", "count");
    fam.desc = echo.clone();
    fam.series = vec![Series {
        name: "count".into(),
        data: SeriesData::Bars {
            labels: CrystalFamily::ALL.iter().map(|f| f.label().to_string()).collect(),
            values: CrystalFamily::ALL
                .iter()
                .map(|f| stats.families.counts.get(f).copied().unwrap_or(0) as f64)
                .collect(),
        },
    }];
    write_svg(dir, "families.svg", &emit_bar_chart(&fam)?, &mut written)?;

    let edges = stats.tc.edges();
    let mut tc = PlotSpec::new("Critical temperature distribution", "Tc (K)", "count");
    tc.desc = echo;
    tc.series = vec![Series {
        name: "count".into(),
        data: SeriesData::Bars {
            labels: edges
                .windows(2)
                .map(|w| format!("{}–{}", trim_num(w[0]), trim_num(w[1])))
                .collect(),
            values: stats.tc.counts().iter().map(|&c| c as f64).collect(),
        },
    }];
    write_svg(dir, "tc_hist.svg", &emit_bar_chart(&tc)?, &mut written)?;
    Ok(written)
}

/// "5" not "5.000000" in tick-style bin labels.
fn trim_num(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".to_string()
    } else {
        s.to_string()
    }
}
