//! Minimal SVG emission for headway profiles: a single polyline with labeled
//! axes, generated with fixed-precision coordinates so identical input yields
//! byte-identical output.

use std::path::Path;

use crate::csvio::{atomic_write, read_profile_csv};
use crate::error::CliError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 16.0;
const MARGIN_BOTTOM: f64 = 48.0;

/// Renders `headway vs vehicle index` from a profile CSV into an SVG file.
pub fn render_profile_plot(csv: &Path, out: &Path) -> Result<(), CliError> {
    let rows = read_profile_csv(csv)?;
    let svg = profile_svg(&rows);
    atomic_write(out, svg.as_bytes())
}

fn profile_svg(rows: &[(f64, f64)]) -> String {
    let (x_min, x_max) = bounds(rows.iter().map(|r| r.0));
    let (mut y_min, mut y_max) = bounds(rows.iter().map(|r| r.1));
    if y_max - y_min < 1e-12 {
        // flat profile: pad so the line sits mid-canvas
        y_min -= 1.0;
        y_max += 1.0;
    }
    let x_span = (x_max - x_min).max(1e-12);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + (x - x_min) / x_span * plot_w;
    let py = |y: f64| MARGIN_TOP + (y_max - y) / (y_max - y_min) * plot_h;

    let mut points = String::new();
    for (i, (x, y)) in rows.iter().enumerate() {
        if i > 0 {
            points.push(' ');
        }
        points.push_str(&format!("{:.2},{:.2}", px(*x), py(*y)));
    }

    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" ",
            "viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x1:.2}\" y2=\"{y0:.2}\" stroke=\"black\"/>\n",
            "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x0:.2}\" y2=\"{y1:.2}\" stroke=\"black\"/>\n",
            "<text x=\"{xlab:.2}\" y=\"{xlaby:.2}\" text-anchor=\"middle\" font-size=\"14\">vehicle index n</text>\n",
            "<text x=\"14\" y=\"{ylab:.2}\" text-anchor=\"middle\" font-size=\"14\" ",
            "transform=\"rotate(-90 14 {ylab:.2})\">headway (m)</text>\n",
            "<text x=\"{x0:.2}\" y=\"{ticky:.2}\" text-anchor=\"middle\" font-size=\"12\">{xmin}</text>\n",
            "<text x=\"{x1:.2}\" y=\"{ticky:.2}\" text-anchor=\"middle\" font-size=\"12\">{xmax}</text>\n",
            "<text x=\"{tickx:.2}\" y=\"{y0:.2}\" text-anchor=\"end\" font-size=\"12\">{ymin}</text>\n",
            "<text x=\"{tickx:.2}\" y=\"{y1p:.2}\" text-anchor=\"end\" font-size=\"12\">{ymax}</text>\n",
            "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"{points}\"/>\n",
            "</svg>\n"
        ),
        w = WIDTH,
        h = HEIGHT,
        x0 = x0,
        x1 = x1,
        y0 = y0,
        y1 = y1,
        y1p = y1 + 4.0,
        xlab = (x0 + x1) / 2.0,
        xlaby = HEIGHT - 10.0,
        ylab = (y0 + y1) / 2.0,
        ticky = y0 + 18.0,
        tickx = x0 - 6.0,
        xmin = format!("{:.0}", x_min),
        xmax = format!("{:.0}", x_max),
        ymin = format!("{:.3}", y_min),
        ymax = format!("{:.3}", y_max),
        points = points,
    )
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}
