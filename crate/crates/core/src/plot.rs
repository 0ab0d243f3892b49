//! Self-contained SVG line chart of mean test error against alpha.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::sweep::SummaryRow;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 70.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn trim_num(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Renders rows with at least one completed run. Each data point is a
/// `<circle>` carrying `data-alpha`, `data-mean` and `data-std` attributes
/// with the exact plotted values.
pub fn render_svg(rows: &[SummaryRow], title: &str) -> Result<String> {
    let rows: Vec<&SummaryRow> = rows.iter().filter(|r| r.n_seeds > 0 && r.mean_test_err.is_finite()).collect();
    if rows.is_empty() {
        return Err(Error::invalid("nothing to plot: no completed runs"));
    }
    let (mut x_lo, mut x_hi) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.alpha), hi.max(r.alpha)));
    if x_hi - x_lo < 1e-12 {
        x_lo -= 0.05;
        x_hi += 0.05;
    }
    let (mut y_lo, mut y_hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r.mean_test_err - r.std_test_err), hi.max(r.mean_test_err + r.std_test_err))
    });
    let pad = ((y_hi - y_lo) * 0.1).max(0.5);
    y_lo = (y_lo - pad).max(0.0);
    y_hi = (y_hi + pad).min(100.0);

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |y: f64| TOP + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        esc(title)
    );

    // Axes
    let _ = writeln!(
        svg,
        r#"<path class="axes" d="M{LEFT},{TOP} V{} H{}" fill="none" stroke="black"/>"#,
        TOP + plot_h,
        LEFT + plot_w
    );
    for r in &rows {
        let x = sx(r.alpha);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/><text class="xtick" x="{x:.2}" y="{}" text-anchor="end" transform="rotate(-45 {x:.2} {})">{}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 16.0,
            TOP + plot_h + 16.0,
            trim_num(r.alpha)
        );
    }
    for i in 0..=5 {
        let v = y_lo + (y_hi - y_lo) * i as f64 / 5.0;
        let y = sy(v);
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text class="ytick" x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            trim_num((v * 100.0).round() / 100.0)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text class="xlabel" x="{}" y="{}" text-anchor="middle">Balance coefficient (alpha)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text class="ylabel" x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">Test error %</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    // Std band: upper edge left to right, lower edge back.
    let upper = rows.iter().map(|r| format!("{:.2},{:.2}", sx(r.alpha), sy(r.mean_test_err + r.std_test_err)));
    let lower = rows
        .iter()
        .rev()
        .map(|r| format!("{:.2},{:.2}", sx(r.alpha), sy(r.mean_test_err - r.std_test_err)));
    let band: Vec<String> = upper.chain(lower).collect();
    let _ = writeln!(
        svg,
        r#"<polygon class="band" points="{}" fill="steelblue" fill-opacity="0.2" stroke="none"/>"#,
        band.join(" ")
    );
    let line: Vec<String> = rows
        .iter()
        .map(|r| format!("{:.2},{:.2}", sx(r.alpha), sy(r.mean_test_err)))
        .collect();
    let _ = writeln!(
        svg,
        r#"<polyline class="mean" points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
        line.join(" ")
    );
    for r in &rows {
        let _ = writeln!(
            svg,
            r#"<circle class="point" cx="{:.2}" cy="{:.2}" r="3" fill="steelblue" data-alpha="{:?}" data-mean="{:?}" data-std="{:?}"/>"#,
            sx(r.alpha),
            sy(r.mean_test_err),
            r.alpha,
            r.mean_test_err,
            r.std_test_err
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// `(alpha, mean, std)` of every plotted point, read back from the SVG.
pub fn parse_points(svg: &str) -> Vec<(f64, f64, f64)> {
    fn attr(tag: &str, name: &str) -> Option<f64> {
        let key = format!("{name}=\"");
        let start = tag.find(&key)? + key.len();
        let end = tag[start..].find('"')? + start;
        tag[start..end].parse().ok()
    }
    svg.lines()
        .filter(|l| l.contains("class=\"point\""))
        .filter_map(|l| Some((attr(l, "data-alpha")?, attr(l, "data-mean")?, attr(l, "data-std")?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(alpha: f64, mean: f64, std: f64) -> SummaryRow {
        SummaryRow {
            alpha,
            mean_test_err: mean,
            std_test_err: std,
            n_seeds: 3,
        }
    }

    #[test]
    fn three_points_with_labels() {
        let rows = vec![row(-0.08, 30.5, 1.5), row(0.0, 32.0, 2.0), row(0.5, 40.25, 0.0)];
        let svg = render_svg(&rows, "test").unwrap();
        let pts = parse_points(&svg);
        assert_eq!(pts, vec![(-0.08, 30.5, 1.5), (0.0, 32.0, 2.0), (0.5, 40.25, 0.0)]);
        assert!(svg.contains(">-0.08</text>"));
        assert!(svg.contains(">0.5</text>"));
        assert!(svg.contains("Balance coefficient"));
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn single_point_is_fine() {
        let svg = render_svg(&[row(0.0, 12.0, 0.0)], "one").unwrap();
        assert_eq!(parse_points(&svg).len(), 1);
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn empty_input_rejected() {
        assert!(render_svg(&[], "none").is_err());
        let dead = SummaryRow {
            alpha: 0.0,
            mean_test_err: f64::NAN,
            std_test_err: f64::NAN,
            n_seeds: 0,
        };
        assert!(render_svg(&[dead], "none").is_err());
    }

    #[test]
    fn title_is_escaped() {
        let svg = render_svg(&[row(0.0, 1.0, 0.0)], "a<b & c").unwrap();
        assert!(svg.contains("a&lt;b &amp; c"));
    }
}
