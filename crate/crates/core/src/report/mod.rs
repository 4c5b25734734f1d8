//! Human-readable artifacts: deterministic SVG charts and leaderboard
//! CSVs. The machine-readable JSON report lives in [`crate::metrics`].

mod csv;
mod svg;

pub use csv::{csv_field, csv_row, emit_leaderboard_csv};
pub use svg::{
    emit_bar_chart, emit_overlay_histogram, PlotSpec, Series, SeriesData, SERIES_COLORS,
};
