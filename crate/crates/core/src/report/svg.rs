//! Hand-rolled SVG 1.1 chart emission.
//!
//! No plotting library: the whole point is byte-deterministic output from
//! a pure function of the spec, with nothing (fonts, locales, library
//! versions) able to change the bytes. Charts are deliberately plain —
//! axes, ≤8 round-number ticks, translucent overlays, a small legend.

use crate::error::{Result, XtalError};

/// Colors for the two overlay series: truth first, prediction second.
pub const SERIES_COLORS: [&str; 2] = ["#4682b4", "#daa520"];
const FILL_OPACITY: &str = "0.55";
const AXIS_COLOR: &str = "#333333";
const GRID_COLOR: &str = "#dddddd";
const FONT: &str = "font-family=\"Helvetica,Arial,sans-serif\"";

/// One named data series.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub data: SeriesData,
}

#[derive(Debug, Clone)]
pub enum SeriesData {
    /// Binned counts over shared edges (`edges.len() == counts.len() + 1`).
    Histogram { edges: Vec<f64>, counts: Vec<u64> },
    /// Labeled nonnegative values.
    Bars { labels: Vec<String>, values: Vec<f64> },
}

/// Everything a chart needs. `desc` lands verbatim in a `<desc>` element
/// (used for the config echo); empty means no element.
#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub width: u32,
    pub height: u32,
    pub desc: String,
    pub series: Vec<Series>,
}

impl PlotSpec {
    /// 800×500, the default frame used by every chart the CLI emits.
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        PlotSpec {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            width: 800,
            height: 500,
            desc: String::new(),
            series: Vec::new(),
        }
    }

    fn validate_frame(&self) -> Result<()> {
        if self.title.trim().is_empty() || self.x_label.trim().is_empty() {
            return Err(XtalError::SpecError("title and x_label must be nonempty".into()));
        }
        if self.width < 200 || self.height < 150 {
            return Err(XtalError::SpecError(format!(
                "{}×{} px is too small to draw into",
                self.width, self.height
            )));
        }
        if self.series.is_empty() {
            return Err(XtalError::SpecError("series must be nonempty".into()));
        }
        Ok(())
    }
}

/// Escape text for XML content and attribute values.
fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(ch),
        }
    }
    out
}

/// Fixed two-decimal coordinate formatting; normalizes −0.00.
fn px(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{:.2}", v + 0.0)
}

/// Tick label: up to 6 significant-looking decimals, trailing zeros
/// trimmed, −0 normalized.
fn tick_label(v: f64) -> String {
    let v = v + 0.0; // -0.0 → 0.0
    let mut s = format!("{v:.6}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// Round-number ticks covering [lo, hi], at most `max_ticks` of them,
/// with a 1/2/5×10^k step.
fn nice_ticks(lo: f64, hi: f64, max_ticks: usize) -> Vec<f64> {
    debug_assert!(hi > lo && max_ticks >= 2);
    let raw_step = (hi - lo) / max_ticks as f64;
    let mag = 10f64.powf(raw_step.log10().floor());
    let mut step = mag;
    for mult in [1.0, 2.0, 5.0, 10.0] {
        if mag * mult >= raw_step {
            step = mag * mult;
            break;
        }
    }
    let mut ticks = Vec::new();
    let mut t = (lo / step).ceil() * step;
    // tolerate one half-step of float drift at the ends
    while t <= hi + step * 1e-9 {
        let snapped = if t.abs() < step * 1e-9 { 0.0 } else { t };
        ticks.push(snapped);
        t += step;
    }
    ticks
}

struct Frame {
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
}

impl Frame {
    fn of(spec: &PlotSpec) -> Frame {
        Frame {
            left: 70.0,
            right: spec.width as f64 - 25.0,
            top: 45.0,
            bottom: spec.height as f64 - 65.0,
        }
    }
}

fn open_svg(spec: &PlotSpec, out: &mut String) {
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
        w = spec.width,
        h = spec.height
    ));
    out.push_str(&format!("<title>{}</title>\n", xml_escape(&spec.title)));
    if !spec.desc.is_empty() {
        out.push_str(&format!("<desc>{}</desc>\n", xml_escape(&spec.desc)));
    }
    out.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n",
        spec.width, spec.height
    ));
}

fn draw_chrome(spec: &PlotSpec, f: &Frame, out: &mut String) {
    // title and axis labels
    out.push_str(&format!(
        "<text x=\"{}\" y=\"26\" text-anchor=\"middle\" {FONT} font-size=\"16\">{}</text>\n",
        px(spec.width as f64 / 2.0),
        xml_escape(&spec.title)
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" {FONT} font-size=\"13\">{}</text>\n",
        px((f.left + f.right) / 2.0),
        px(spec.height as f64 - 18.0),
        xml_escape(&spec.x_label)
    ));
    if !spec.y_label.is_empty() {
        out.push_str(&format!(
            "<text x=\"20\" y=\"{0}\" text-anchor=\"middle\" {FONT} font-size=\"13\" transform=\"rotate(-90 20 {0})\">{1}</text>\n",
            px((f.top + f.bottom) / 2.0),
            xml_escape(&spec.y_label)
        ));
    }
    // axis lines
    out.push_str(&format!(
        "<line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"{AXIS_COLOR}\" stroke-width=\"1\"/>\n",
        l = px(f.left),
        r = px(f.right),
        b = px(f.bottom)
    ));
    out.push_str(&format!(
        "<line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\" stroke=\"{AXIS_COLOR}\" stroke-width=\"1\"/>\n",
        l = px(f.left),
        t = px(f.top),
        b = px(f.bottom)
    ));
}

fn draw_y_ticks(f: &Frame, y_max: f64, out: &mut String) {
    for t in nice_ticks(0.0, y_max, 8) {
        let y = f.bottom - (t / y_max) * (f.bottom - f.top);
        out.push_str(&format!(
            "<line x1=\"{l}\" y1=\"{y}\" x2=\"{r}\" y2=\"{y}\" stroke=\"{GRID_COLOR}\" stroke-width=\"1\"/>\n",
            l = px(f.left),
            r = px(f.right),
            y = px(y)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" {FONT} font-size=\"11\">{}</text>\n",
            px(f.left - 6.0),
            px(y + 4.0),
            tick_label(t)
        ));
    }
}

fn draw_legend(spec: &PlotSpec, f: &Frame, out: &mut String) {
    for (i, series) in spec.series.iter().enumerate() {
        let y = f.top + 8.0 + i as f64 * 18.0;
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\" fill-opacity=\"{FILL_OPACITY}\"/>\n",
            px(f.right - 150.0),
            px(y),
            SERIES_COLORS[i % SERIES_COLORS.len()]
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" {FONT} font-size=\"12\">{}</text>\n",
            px(f.right - 133.0),
            px(y + 10.0),
            xml_escape(&series.name)
        ));
    }
}

/// Two translucent histogram series over shared edges (truth vs
/// prediction, Figs. 3–4 style). Errors if the spec has anything other
/// than exactly two histogram series with identical edges.
pub fn emit_overlay_histogram(spec: &PlotSpec) -> Result<String> {
    spec.validate_frame()?;
    if spec.series.len() != 2 {
        return Err(XtalError::SpecError(format!(
            "overlay histogram needs exactly 2 series, got {}",
            spec.series.len()
        )));
    }
    let mut edges_counts = Vec::new();
    for s in &spec.series {
        match &s.data {
            SeriesData::Histogram { edges, counts } => {
                if edges.len() < 2 || counts.len() + 1 != edges.len() {
                    return Err(XtalError::SpecError(format!(
                        "series {:?}: {} edges with {} counts",
                        s.name,
                        edges.len(),
                        counts.len()
                    )));
                }
                if edges.windows(2).any(|w| w[1] <= w[0]) || edges.iter().any(|e| !e.is_finite()) {
                    return Err(XtalError::SpecError(format!(
                        "series {:?}: edges must be finite and increasing",
                        s.name
                    )));
                }
                edges_counts.push((edges, counts));
            }
            SeriesData::Bars { .. } => {
                return Err(XtalError::SpecError(
                    "overlay histogram series must be histograms".into(),
                ))
            }
        }
    }
    if edges_counts[0].0 != edges_counts[1].0 {
        return Err(XtalError::SpecError(
            "overlay histogram series must share identical edges".into(),
        ));
    }

    let edges = edges_counts[0].0;
    let (x_lo, x_hi) = (edges[0], *edges.last().unwrap());
    let y_max = edges_counts
        .iter()
        .flat_map(|(_, c)| c.iter())
        .copied()
        .max()
        .unwrap_or(0)
        .max(1) as f64;

    let f = Frame::of(spec);
    let sx = |v: f64| f.left + (v - x_lo) / (x_hi - x_lo) * (f.right - f.left);
    let sy = |v: f64| f.bottom - (v / y_max) * (f.bottom - f.top);

    let mut out = String::new();
    open_svg(spec, &mut out);
    draw_y_ticks(&f, y_max, &mut out);
    for t in nice_ticks(x_lo, x_hi, 8) {
        let x = sx(t);
        out.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{b}\" x2=\"{x}\" y2=\"{b2}\" stroke=\"{AXIS_COLOR}\" stroke-width=\"1\"/>\n",
            x = px(x),
            b = px(f.bottom),
            b2 = px(f.bottom + 5.0)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" {FONT} font-size=\"11\">{}</text>\n",
            px(x),
            px(f.bottom + 18.0),
            tick_label(t)
        ));
    }
    for (i, (edges, counts)) in edges_counts.iter().enumerate() {
        out.push_str(&format!(
            "<g class=\"series-{i}\" fill=\"{}\" fill-opacity=\"{FILL_OPACITY}\">\n",
            SERIES_COLORS[i]
        ));
        for (b, &count) in counts.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let x0 = sx(edges[b]);
            let x1 = sx(edges[b + 1]);
            let y = sy(count as f64);
            out.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/>\n",
                px(x0),
                px(y),
                px(x1 - x0),
                px(f.bottom - y)
            ));
        }
        out.push_str("</g>\n");
    }
    draw_chrome(spec, &f, &mut out);
    draw_legend(spec, &f, &mut out);
    out.push_str("</svg>\n");
    Ok(out)
}

/// One series of labeled nonnegative bars (Figs. 5–8 style).
pub fn emit_bar_chart(spec: &PlotSpec) -> Result<String> {
    spec.validate_frame()?;
    if spec.series.len() != 1 {
        return Err(XtalError::SpecError(format!(
            "bar chart needs exactly 1 series, got {}",
            spec.series.len()
        )));
    }
    let (labels, values) = match &spec.series[0].data {
        SeriesData::Bars { labels, values } => (labels, values),
        SeriesData::Histogram { .. } => {
            return Err(XtalError::SpecError("bar chart series must be bars".into()))
        }
    };
    if labels.is_empty() || labels.len() != values.len() {
        return Err(XtalError::SpecError(format!(
            "{} labels for {} values",
            labels.len(),
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(XtalError::SpecError(
            "bar values must be finite and nonnegative".into(),
        ));
    }

    let y_max = values.iter().cloned().fold(0.0f64, f64::max).max(1e-12);
    let f = Frame::of(spec);
    let n = values.len() as f64;
    let slot = (f.right - f.left) / n;
    let bar_w = slot * 0.7;

    let mut out = String::new();
    open_svg(spec, &mut out);
    draw_y_ticks(&f, y_max, &mut out);
    out.push_str(&format!(
        "<g class=\"series-0\" fill=\"{}\" fill-opacity=\"{FILL_OPACITY}\">\n",
        SERIES_COLORS[0]
    ));
    for (i, &v) in values.iter().enumerate() {
        let x = f.left + slot * (i as f64 + 0.5) - bar_w / 2.0;
        let y = f.bottom - (v / y_max) * (f.bottom - f.top);
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/>\n",
            px(x),
            px(y),
            px(bar_w),
            px(f.bottom - y)
        ));
    }
    out.push_str("</g>\n");
    for (i, label) in labels.iter().enumerate() {
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" {FONT} font-size=\"11\">{}</text>\n",
            px(f.left + slot * (i as f64 + 0.5)),
            px(f.bottom + 18.0),
            xml_escape(label)
        ));
    }
    draw_chrome(spec, &f, &mut out);
    out.push_str("</svg>\n");
    Ok(out)
}
