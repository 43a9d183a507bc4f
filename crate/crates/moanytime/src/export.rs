//! Plot-ready exports: CSV, JSON and static SVG.
//!
//! CSV files have a header row, comma separators and shortest round-trip
//! numbers. JSON files hold the same records as an array of objects, with
//! the numbers spelled exactly as in the CSV. SVG figures embed the CSV of
//! the data they draw in their `<metadata>` element.

use std::fmt::Write as _;

use crate::format::fmt_f64;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Str(String),
    Int(u64),
    Float(f64),
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Str(s)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as u64)
    }
}

impl From<u32> for Value {
    fn from(v: u32) -> Self {
        Value::Int(v.into())
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

/// Records with named columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn number_text(v: f64) -> String {
    if v.is_finite() {
        fmt_f64(v)
    } else {
        if v.is_nan() { "NaN" } else if v > 0.0 { "Infinity" } else { "-Infinity" }.to_string()
    }
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    /// Prepends a constant column.
    pub fn with_leading(&self, name: &str, value: &str) -> Table {
        let mut columns = vec![name.to_string()];
        columns.extend(self.columns.iter().cloned());
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut row = vec![Value::from(value)];
                row.extend(r.iter().cloned());
                row
            })
            .collect();
        Table { columns, rows }
    }

    /// Appends the rows of another table with the same columns.
    pub fn extend(&mut self, other: Table) {
        assert_eq!(self.columns, other.columns, "column mismatch");
        self.rows.extend(other.rows);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self.columns.iter().map(|c| csv_field(c)).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|v| match v {
                    Value::Str(s) => csv_field(s),
                    Value::Int(i) => i.to_string(),
                    Value::Float(f) => number_text(*f),
                })
                .collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut out = String::from("[");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(if i == 0 { "\n  {" } else { ",\n  {" });
            for (j, (c, v)) in self.columns.iter().zip(row).enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                out.push_str(&json_string(c));
                out.push_str(": ");
                match v {
                    Value::Str(s) => out.push_str(&json_string(s)),
                    Value::Int(n) => out.push_str(&n.to_string()),
                    Value::Float(f) if f.is_finite() => out.push_str(&fmt_f64(*f)),
                    Value::Float(f) => out.push_str(&json_string(&number_text(*f))),
                }
            }
            out.push('}');
        }
        out.push_str(if self.rows.is_empty() { "]\n" } else { "\n]\n" });
        out
    }
}

pub fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

pub fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn px(v: f64) -> String {
    let r = (v * 100.0).round() / 100.0;
    fmt_f64(if r == 0.0 { 0.0 } else { r })
}

/// Linear or logarithmic mapping of a data range onto a pixel range.
#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
    p0: f64,
    p1: f64,
}

impl Axis {
    fn new(mut lo: f64, mut hi: f64, log: bool, p0: f64, p1: f64) -> Self {
        if log {
            lo = lo.max(f64::MIN_POSITIVE).ln();
            hi = hi.max(f64::MIN_POSITIVE).ln();
        }
        if !(hi > lo) {
            lo -= 0.5;
            hi += 0.5;
        }
        Axis { lo, hi, log, p0, p1 }
    }

    fn map(&self, v: f64) -> f64 {
        let v = if self.log { v.max(f64::MIN_POSITIVE).ln() } else { v };
        self.p0 + (v - self.lo) / (self.hi - self.lo) * (self.p1 - self.p0)
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo / std::f64::consts::LN_10, self.hi / std::f64::consts::LN_10);
            ((a - 1e-9).ceil() as i32..=(b + 1e-9).floor() as i32).map(|e| 10f64.powi(e)).collect()
        } else {
            (0..=4).map(|i| self.lo + (self.hi - self.lo) * i as f64 / 4.0).collect()
        }
    }
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" { "0".into() } else { s.into() }
    }
}

struct Canvas {
    body: String,
}

impl Canvas {
    fn new(title: &str, csv: &str) -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {} {}\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" font-size=\"12\">",
            WIDTH, HEIGHT, WIDTH, HEIGHT
        );
        let _ = writeln!(body, "<metadata>{}</metadata>", xml_escape(csv));
        let _ = writeln!(body, "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
        let _ = writeln!(
            body,
            "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>",
            px((LEFT + WIDTH - RIGHT) / 2.0),
            xml_escape(title)
        );
        Canvas { body }
    }

    fn axes(&mut self, x: &Axis, y: &Axis, x_label: &str, y_label: &str) {
        let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
        let _ = writeln!(
            self.body,
            "<path d=\"M{} {} H{} M{} {} V{}\" stroke=\"black\" fill=\"none\"/>",
            px(x0), px(y0), px(x1), px(x0), px(y0), px(y1)
        );
        for t in x.ticks() {
            let p = x.map(t);
            let _ = writeln!(
                self.body,
                "<path d=\"M{} {} V{}\" stroke=\"black\"/><text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
                px(p), px(y0), px(y0 + 5.0), px(p), px(y0 + 18.0), tick_label(t)
            );
        }
        for t in y.ticks() {
            let p = y.map(t);
            let _ = writeln!(
                self.body,
                "<path d=\"M{} {} H{}\" stroke=\"black\"/><text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
                px(x0 - 5.0), px(p), px(x0), px(x0 - 8.0), px(p + 4.0), tick_label(t)
            );
        }
        let _ = writeln!(
            self.body,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            px((x0 + x1) / 2.0),
            px(HEIGHT - 12.0),
            xml_escape(x_label)
        );
        let _ = writeln!(
            self.body,
            "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>",
            px((y0 + y1) / 2.0),
            px((y0 + y1) / 2.0),
            xml_escape(y_label)
        );
    }

    fn legend(&mut self, entries: &[(String, &str)]) {
        for (i, (label, color)) in entries.iter().enumerate() {
            let y = TOP + 10.0 + 20.0 * i as f64;
            let x = WIDTH - RIGHT + 15.0;
            let _ = writeln!(
                self.body,
                "<rect x=\"{}\" y=\"{}\" width=\"14\" height=\"10\" fill=\"{color}\"/><text x=\"{}\" y=\"{}\">{}</text>",
                px(x), px(y - 9.0), px(x + 20.0), px(y), xml_escape(label)
            );
        }
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

/// One line of a time chart with an optional band.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSeries {
    pub label: String,
    /// `(x, y, band_lo, band_hi)`
    pub points: Vec<(f64, f64, f64, f64)>,
    pub band: bool,
}

/// Lines (and shaded bands) over budgets, with a logarithmic x axis when
/// `log_x` is set.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[LineSeries], log_x: bool, csv: &str) -> String {
    let finite = |v: f64| v.is_finite();
    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).filter(|v| finite(*v));
    let (x_lo, x_hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let ys = series
        .iter()
        .flat_map(|s| s.points.iter().flat_map(move |p| if s.band { vec![p.1, p.2, p.3] } else { vec![p.1] }))
        .filter(|v| finite(*v));
    let (y_lo, y_hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (x_lo, x_hi) = if x_lo.is_finite() { (x_lo, x_hi) } else { (1.0, 10.0) };
    let (y_lo, y_hi) = if y_lo.is_finite() { (y_lo, y_hi) } else { (0.0, 1.0) };
    let pad = (y_hi - y_lo) * 0.05;
    let x = Axis::new(x_lo, x_hi, log_x, LEFT, WIDTH - RIGHT);
    let y = Axis::new(y_lo - pad, y_hi + pad, false, HEIGHT - BOTTOM, TOP);
    let mut c = Canvas::new(title, csv);
    c.axes(&x, &y, x_label, y_label);
    for (i, s) in series.iter().enumerate() {
        let col = color(i);
        let pts: Vec<_> = s.points.iter().filter(|p| finite(p.0) && finite(p.1)).collect();
        if pts.is_empty() {
            continue;
        }
        if s.band {
            let mut d = String::new();
            for (k, p) in pts.iter().enumerate() {
                let _ = write!(d, "{}{} {} ", if k == 0 { "M" } else { "L" }, px(x.map(p.0)), px(y.map(p.3)));
            }
            for p in pts.iter().rev() {
                let _ = write!(d, "L{} {} ", px(x.map(p.0)), px(y.map(p.2)));
            }
            d.push('Z');
            let _ = writeln!(c.body, "<path d=\"{d}\" fill=\"{col}\" fill-opacity=\"0.2\" stroke=\"none\"/>");
        }
        let mut d = String::new();
        for (k, p) in pts.iter().enumerate() {
            let _ = write!(d, "{}{} {}", if k == 0 { "M" } else { " L" }, px(x.map(p.0)), px(y.map(p.1)));
        }
        let _ = writeln!(c.body, "<path d=\"{d}\" fill=\"none\" stroke=\"{col}\" stroke-width=\"2\"/>");
    }
    let legend: Vec<(String, &str)> = series.iter().enumerate().map(|(i, s)| (s.label.clone(), color(i))).collect();
    c.legend(&legend);
    c.finish()
}

/// Axis-aligned rectangle with a value in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatRect {
    pub x_lo: f64,
    pub y_lo: f64,
    pub x_hi: f64,
    pub y_hi: f64,
    pub value: f64,
}

/// Heat map of rectangles over `[lo, upper]`. Positive values are drawn in
/// blue, negative ones in red, with opacity proportional to magnitude.
pub fn heat_chart(title: &str, rects: &[HeatRect], lo: [f64; 2], upper: [f64; 2], csv: &str) -> String {
    let x = Axis::new(lo[0], upper[0], false, LEFT, WIDTH - RIGHT);
    let y = Axis::new(lo[1], upper[1], false, HEIGHT - BOTTOM, TOP);
    let mut c = Canvas::new(title, csv);
    for r in rects {
        let (x0, x1) = (x.map(r.x_lo), x.map(r.x_hi));
        let (y0, y1) = (y.map(r.y_hi), y.map(r.y_lo));
        let fill = if r.value >= 0.0 { "#1f4e9c" } else { "#c0392b" };
        let _ = writeln!(
            c.body,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{fill}\" fill-opacity=\"{}\"/>",
            px(x0),
            px(y0),
            px((x1 - x0).max(0.0)),
            px((y1 - y0).max(0.0)),
            px(r.value.abs().min(1.0))
        );
    }
    c.axes(&x, &y, "f1", "f2");
    c.legend(&[("+ attained".into(), "#1f4e9c"), ("- attained".into(), "#c0392b")]);
    c.finish()
}

/// Staircase lines through point sets (attainment surfaces).
pub fn surface_chart(title: &str, surfaces: &[(String, Vec<[f64; 2]>)], upper: [f64; 2], csv: &str) -> String {
    let lo_x = surfaces.iter().flat_map(|s| s.1.iter().map(|p| p[0])).fold(upper[0], f64::min);
    let lo_y = surfaces.iter().flat_map(|s| s.1.iter().map(|p| p[1])).fold(upper[1], f64::min);
    let x = Axis::new(lo_x, upper[0], false, LEFT, WIDTH - RIGHT);
    let y = Axis::new(lo_y, upper[1], false, HEIGHT - BOTTOM, TOP);
    let mut c = Canvas::new(title, csv);
    c.axes(&x, &y, "f1", "f2");
    for (i, (_, pts)) in surfaces.iter().enumerate() {
        if pts.is_empty() {
            continue;
        }
        let mut d = format!("M{} {}", px(x.map(pts[0][0])), px(y.map(upper[1])));
        for w in pts.windows(2) {
            let _ = write!(d, " V{} H{}", px(y.map(w[0][1])), px(x.map(w[1][0])));
        }
        let last = pts[pts.len() - 1];
        let _ = write!(d, " V{} H{}", px(y.map(last[1])), px(x.map(upper[0])));
        let _ = writeln!(c.body, "<path d=\"{d}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>", color(i));
    }
    let legend: Vec<(String, &str)> = surfaces.iter().enumerate().map(|(i, s)| (s.0.clone(), color(i))).collect();
    c.legend(&legend);
    c.finish()
}

/// Extracts and unescapes the CSV embedded in an SVG produced here.
pub fn embedded_csv(svg: &str) -> Option<String> {
    let start = svg.find("<metadata>")? + "<metadata>".len();
    let end = svg[start..].find("</metadata>")? + start;
    Some(
        svg[start..end]
            .replace("&lt;", "<")
            .replace("&gt;", ">")
            .replace("&quot;", "\"")
            .replace("&amp;", "&"),
    )
}
