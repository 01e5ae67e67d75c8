//! Standalone SVG trend plots: mean MAE per axis value with +/- one
//! standard deviation whiskers. No dependencies, deterministic output.

use std::fmt::Write as _;
use std::path::Path;

use shapegraph_core::eval::TrendRow;

use crate::error::Result;
use crate::io::write_string;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 0.01 && v.abs() < 1000.0 {
        format!("{v:.4}").trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

/// Writes a line chart of `rows`; x is the axis value, y is mean MAE (mm).
pub fn write_trend_svg(path: &Path, title: &str, x_label: &str, rows: &[TrendRow]) -> Result<()> {
    let xs: Vec<f64> = rows.iter().map(|r| r.axis_value).collect();
    let lo_y = rows.iter().map(|r| r.mean_mae_mm - r.std_mae_mm).fold(f64::INFINITY, f64::min);
    let hi_y = rows.iter().map(|r| r.mean_mae_mm + r.std_mae_mm).fold(f64::NEG_INFINITY, f64::max);
    let (lo_y, hi_y) = if rows.is_empty() || !lo_y.is_finite() {
        (0.0, 1.0)
    } else if lo_y == hi_y {
        (lo_y - 0.5 * lo_y.abs().max(1e-6), hi_y + 0.5 * hi_y.abs().max(1e-6))
    } else {
        let pad = 0.08 * (hi_y - lo_y);
        (lo_y - pad, hi_y + pad)
    };
    let (lo_x, hi_x) = match (xs.iter().cloned().reduce(f64::min), xs.iter().cloned().reduce(f64::max)) {
        (Some(a), Some(b)) if a != b => (a - 0.05 * (b - a), b + 0.05 * (b - a)),
        (Some(a), Some(_)) => (a - 1.0, a + 1.0),
        _ => (0.0, 1.0),
    };

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - lo_x) / (hi_x - lo_x) * plot_w;
    let sy = |y: f64| MARGIN_T + (hi_y - y) / (hi_y - lo_y) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{title}</text>"#,
        WIDTH / 2.0
    );

    // axes
    let x0 = MARGIN_L;
    let y0 = HEIGHT - MARGIN_B;
    let _ = writeln!(
        svg,
        r#"<line x1="{x0}" y1="{MARGIN_T}" x2="{x0}" y2="{y0}" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{x0}" y1="{y0}" x2="{}" y2="{y0}" stroke="black"/>"#,
        WIDTH - MARGIN_R
    );

    // y ticks
    for i in 0..=4 {
        let v = lo_y + (hi_y - lo_y) * i as f64 / 4.0;
        let y = sy(v);
        let _ = writeln!(svg, r#"<line x1="{}" y1="{y}" x2="{x0}" y2="{y}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
            x0 - 8.0,
            y + 4.0,
            fmt_tick(v)
        );
    }
    // x ticks at the data points
    for r in rows {
        let x = sx(r.axis_value);
        let _ = writeln!(svg, r#"<line x1="{x}" y1="{y0}" x2="{x}" y2="{}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(
            svg,
            r#"<text x="{x}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
            y0 + 20.0,
            fmt_tick(r.axis_value)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">{x_label}</text>"#,
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 16 {})">MAE [mm]</text>"#,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0
    );

    // whiskers
    for r in rows {
        let x = sx(r.axis_value);
        let top = sy(r.mean_mae_mm + r.std_mae_mm);
        let bottom = sy(r.mean_mae_mm - r.std_mae_mm);
        let _ = writeln!(svg, r#"<line x1="{x}" y1="{top}" x2="{x}" y2="{bottom}" stroke="gray"/>"#);
        let _ = writeln!(svg, r#"<line x1="{}" y1="{top}" x2="{}" y2="{top}" stroke="gray"/>"#, x - 4.0, x + 4.0);
        let _ = writeln!(svg, r#"<line x1="{}" y1="{bottom}" x2="{}" y2="{bottom}" stroke="gray"/>"#, x - 4.0, x + 4.0);
    }

    // mean polyline and markers
    if rows.len() > 1 {
        let points: Vec<String> =
            rows.iter().map(|r| format!("{},{}", sx(r.axis_value), sy(r.mean_mae_mm))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
    }
    for r in rows {
        let _ = writeln!(
            svg,
            r#"<circle cx="{}" cy="{}" r="3.5" fill="steelblue"/>"#,
            sx(r.axis_value),
            sy(r.mean_mae_mm)
        );
    }

    svg.push_str("</svg>\n");
    write_string(path, &svg)
}
