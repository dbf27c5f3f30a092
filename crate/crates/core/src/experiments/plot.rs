//! Minimal standalone SVG line plots of sweep aggregates.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::{AggregateRow, SweepResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotMetric {
    Spr,
    Acc,
}

impl PlotMetric {
    fn label(self) -> &'static str {
        match self {
            PlotMetric::Spr => "SPR",
            PlotMetric::Acc => "ACC",
        }
    }

    fn pick(self, row: &AggregateRow) -> f64 {
        match self {
            PlotMetric::Spr => row.mean_spr,
            PlotMetric::Acc => row.mean_acc,
        }
    }
}

impl FromStr for PlotMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spr" => Ok(PlotMetric::Spr),
            "acc" => Ok(PlotMetric::Acc),
            other => Err(Error::InvalidParameter(format!("unknown metric {other:?}"))),
        }
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 132.0;
const MARGIN_TOP: f64 = 24.0;
const MARGIN_BOTTOM: f64 = 52.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e"];

/// Renders one mean-metric-vs-ambient-dimension line per method, with the
/// metric on a fixed [0, 1] axis. Errors on an empty aggregate.
pub fn render_svg(aggregate: &[AggregateRow], metric: PlotMetric) -> Result<String> {
    if aggregate.is_empty() {
        return Err(Error::EmptyInput);
    }
    let x_min = aggregate.iter().map(|a| a.ambient_dim).min().unwrap() as f64;
    let x_max = aggregate.iter().map(|a| a.ambient_dim).max().unwrap() as f64;
    let span = (x_max - x_min).max(1.0);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let to_x = |d: f64| MARGIN_LEFT + (d - x_min) / span * plot_w;
    let to_y = |v: f64| MARGIN_TOP + (1.0 - v.clamp(0.0, 1.0)) * plot_h;

    let mut methods = Vec::new();
    for a in aggregate {
        if !methods.contains(&a.method) {
            methods.push(a.method);
        }
    }

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    // Axes.
    let x0 = MARGIN_LEFT;
    let y0 = MARGIN_TOP + plot_h;
    let _ = writeln!(
        svg,
        r#"<line x1="{x0}" y1="{y0}" x2="{}" y2="{y0}" stroke="black"/>"#,
        MARGIN_LEFT + plot_w
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{x0}" y1="{MARGIN_TOP}" x2="{x0}" y2="{y0}" stroke="black"/>"#
    );
    for (v, label) in [(0.0, "0"), (0.5, "0.5"), (1.0, "1")] {
        let y = to_y(v);
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{y}" x2="{x0}" y2="{y}" stroke="black"/>"#,
            x0 - 4.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{label}</text>"#,
            x0 - 8.0,
            y + 4.0
        );
    }
    for d in [x_min, x_max] {
        let x = to_x(d);
        let _ = writeln!(
            svg,
            r#"<line x1="{x}" y1="{y0}" x2="{x}" y2="{}" stroke="black"/>"#,
            y0 + 4.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x}" y="{}" font-size="12" text-anchor="middle">{d}</text>"#,
            y0 + 18.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="14" text-anchor="middle">D</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{}" font-size="14" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        metric.label()
    );

    // One polyline (when at least two points) plus markers per method.
    for (mi, &method) in methods.iter().enumerate() {
        let color = COLORS[mi % COLORS.len()];
        let pts: Vec<(f64, f64)> = aggregate
            .iter()
            .filter(|a| a.method == method)
            .map(|a| (to_x(a.ambient_dim as f64), to_y(metric.pick(a))))
            .collect();
        if pts.len() >= 2 {
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                path.join(" ")
            );
        }
        for (x, y) in &pts {
            let _ = writeln!(
                svg,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#
            );
        }
        let legend_y = MARGIN_TOP + 16.0 + 18.0 * mi as f64;
        let legend_x = WIDTH - MARGIN_RIGHT + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{legend_x}" y1="{legend_y}" x2="{}" y2="{legend_y}" stroke="{color}" stroke-width="2"/>"#,
            legend_x + 22.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="13">{method}</text>"#,
            legend_x + 28.0,
            legend_y + 4.0
        );
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Writes the rendered plot of `result` to `path`.
pub fn emit_plot(result: &SweepResult, metric: PlotMetric, path: &Path) -> Result<()> {
    let svg = render_svg(&result.aggregate(), metric)?;
    std::fs::write(path, svg)?;
    Ok(())
}
