use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::force::{Component, PeriodForces};
use crate::stress::Dimensionality;

/// Round to nine significant digits, then print the shortest string that
/// reads back to the rounded value.
pub fn fmt9(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.8e}").parse().unwrap_or(x);
    if rounded == 0.0 {
        return "0".into();
    }
    if (1e-4..1e15).contains(&rounded.abs()) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// One sweep point: the geometry's `v` (rack only), the shift, and the
/// forces or the failure message.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub v: Option<f64>,
    pub s: f64,
    pub result: std::result::Result<PeriodForces, String>,
}

pub fn csv_name(dim: Dimensionality, comp: Component) -> String {
    format!("force_{}_{}.csv", dim.label(), comp.label())
}

/// CSV text for one (dimensionality, component). A `status` column is added
/// only when some row failed.
pub fn sweep_csv(rows: &[SweepRow], period: f64, dim: Dimensionality, comp: Component) -> Result<String> {
    let failed = rows.iter().any(|r| r.result.is_err());
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let mut header = vec!["v", "s", "force_per_period", "force_density", "error_estimate"];
    if failed {
        header.push("status");
    }
    w.write_record(&header).map_err(csv_error)?;
    for row in rows {
        let v = row.v.map(fmt9).unwrap_or_default();
        let mut record = vec![v, fmt9(row.s)];
        match &row.result {
            Ok(forces) => {
                let f = forces.get(dim, comp);
                record.extend([fmt9(f.value), fmt9(f.value / period), fmt9(f.error)]);
                if failed {
                    record.push("ok".into());
                }
            }
            Err(msg) => {
                record.extend([String::new(), String::new(), String::new(), msg.clone()]);
            }
        }
        w.write_record(&record).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

/// A polyline per `v`; failed points break the line.
pub struct Series {
    pub label: String,
    pub points: Vec<Option<(f64, f64)>>,
}

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const STYLES: [(&str, &str); 6] = [
    ("#1f4e9c", ""),
    ("#b8321d", "8 5"),
    ("#2f7d32", "2 4"),
    ("#7b3294", "12 4 2 4"),
    ("#c27c0e", "4 2"),
    ("#444444", "1 2"),
];

/// Nice tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let raw = (hi - lo) / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line chart of force against shift.
pub fn svg_chart(title: &str, y_label: &str, x_max: f64, series: &[Series]) -> String {
    let ys: Vec<f64> = series.iter().flat_map(|s| s.points.iter().flatten().map(|p| p.1)).collect();
    let (mut lo, mut hi) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    if !lo.is_finite() {
        lo = -1.0;
        hi = 1.0;
    }
    if hi - lo <= 1e-300 + 1e-12 * hi.abs().max(lo.abs()) {
        let pad = 0.5 * hi.abs().max(1e-12);
        lo -= pad;
        hi += pad;
    }
    let pad = 0.06 * (hi - lo);
    lo -= pad;
    hi += pad;
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + x / x_max * plot_w;
    let py = |y: f64| TOP + (hi - y) / (hi - lo) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##);
    let _ = writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, LEFT + plot_w / 2.0, esc(title));
    for t in ticks(lo, hi, 6) {
        let y = py(t);
        let _ = writeln!(out, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e4e4e4"/>"##, LEFT + plot_w);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, y + 4.0, fmt_tick(t));
    }
    for t in ticks(0.0, x_max, 8) {
        let x = px(t);
        let _ = writeln!(out, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#e4e4e4"/>"##, TOP + plot_h);
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + plot_h + 18.0, fmt_tick(t));
    }
    let _ = writeln!(out, r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#000000"/>"##);
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">shift s</text>"#, LEFT + plot_w / 2.0, HEIGHT - 16.0);
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        esc(y_label)
    );
    for (k, s) in series.iter().enumerate() {
        let (color, dash) = STYLES[k % STYLES.len()];
        let dash_attr = if dash.is_empty() { String::new() } else { format!(r#" stroke-dasharray="{dash}""#) };
        for run in s.points.split(|p| p.is_none()) {
            if run.is_empty() {
                continue;
            }
            let pts: Vec<String> = run.iter().flatten().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"{dash_attr}/>"#,
                pts.join(" ")
            );
        }
        let ly = TOP + 16.0 + 20.0 * k as f64;
        let lx = LEFT + plot_w + 14.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="1.8"{dash_attr}/>"#,
            lx + 30.0
        );
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 36.0, ly + 4.0, esc(&s.label));
    }
    out.push_str("</svg>\n");
    out
}

fn fmt_tick(t: f64) -> String {
    if t == 0.0 {
        return "0".into();
    }
    let a = t.abs();
    if (1e-3..1e4).contains(&a) {
        format!("{}", (t * 1e6).round() / 1e6)
    } else {
        format!("{t:.1e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt9(0.5), "0.5");
        assert_eq!(fmt9(-0.025864463123456), "-0.0258644631");
        assert_eq!(fmt9(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt9(0.0), "0");
        assert_eq!(fmt9(-0.0), "0");
        assert_eq!(fmt9(1.25e-19), "1.25e-19");
        assert_eq!(fmt9(-2.30070791234e-19), "-2.30070791e-19");
    }

    #[test]
    fn tick_positions() {
        assert_eq!(ticks(0.0, 2.0, 8), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(ticks(0.0, 2.0, 10).len(), 11);
        let t = ticks(-0.026, -0.021, 5);
        assert!(t.len() >= 4 && t.iter().all(|&x| (-0.026 - 1e-12..=-0.021 + 1e-12).contains(&x)));
    }

    #[test]
    fn chart_has_one_polyline_per_unbroken_run() {
        let series = vec![
            Series { label: "v = 0.5".into(), points: vec![Some((0.0, 1.0)), Some((1.0, 2.0))] },
            Series { label: "v = 0.3".into(), points: vec![Some((0.0, 1.0)), None, Some((1.0, 2.0)), Some((1.5, 0.0))] },
        ];
        let svg = svg_chart("t", "F", 2.0, &series);
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.contains("v = 0.3"));
        assert!(svg.starts_with("<svg"));
    }

    proptest::proptest! {
        #[test]
        fn fmt9_reads_back_within_nine_digits(x in proptest::num::f64::NORMAL) {
            let back: f64 = fmt9(x).parse().unwrap();
            proptest::prop_assert!((back - x).abs() <= 5e-9 * x.abs(), "{x} -> {back}");
            proptest::prop_assert_eq!(fmt9(back), fmt9(x));
        }
    }
}
