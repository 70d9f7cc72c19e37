//! Minimal SVG line plots for eyeballing estimate/ground-truth overlays.
//! CSV reports are the contract; these are a convenience.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 4] = ["#b22222", "#555555", "#1f77b4", "#999999"];

/// One labelled series: `(label, timestamps, values)`.
pub type PlotSeries<'a> = (&'a str, &'a [f64], &'a [f64]);

/// Writes an overlay line plot of the given series with shared axes.
pub fn write_line_plot(
    path: &Path,
    title: &str,
    y_label: &str,
    series: &[PlotSeries<'_>],
) -> Result<()> {
    let mut t_min = f64::INFINITY;
    let mut t_max = f64::NEG_INFINITY;
    let mut v_min = f64::INFINITY;
    let mut v_max = f64::NEG_INFINITY;
    for (_, ts, vs) in series {
        for &t in *ts {
            t_min = t_min.min(t);
            t_max = t_max.max(t);
        }
        for &v in *vs {
            v_min = v_min.min(v);
            v_max = v_max.max(v);
        }
    }
    if !(t_max > t_min) {
        t_max = t_min + 1.0;
    }
    if !(v_max > v_min) {
        v_max = v_min + 1.0;
    }
    let pad = 0.05 * (v_max - v_min);
    v_min -= pad;
    v_max += pad;

    let sx = |t: f64| MARGIN + (t - t_min) / (t_max - t_min) * (WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| HEIGHT - MARGIN - (v - v_min) / (v_max - v_min) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        out,
        r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##
    );
    let _ = writeln!(
        out,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="#cccccc"/>"##,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{title}</text>"#,
        WIDTH / 2.0
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {})">{y_label}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">time (s)</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );

    for (i, (label, ts, vs)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut d = String::new();
        for (j, (&t, &v)) in ts.iter().zip(vs.iter()).enumerate() {
            let _ = write!(d, "{}{:.2},{:.2} ", if j == 0 { "M" } else { "L" }, sx(t), sy(v));
        }
        let _ = writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.2"/>"#,
            d.trim_end()
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="{color}">{label}</text>"#,
            WIDTH - MARGIN - 150.0,
            MARGIN + 18.0 * (i as f64 + 1.0)
        );
    }
    let _ = writeln!(out, "</svg>");
    crate::io::write_string(path, &out)
}
