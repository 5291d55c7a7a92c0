//! Tiny static line-chart writer. No dependencies, no interactivity: a
//! titled plot box, linear axes with a few ticks, one polyline per series,
//! and a legend. Enough to eyeball a training curve or a mix trajectory.

use std::fs;
use std::io;
use std::path::Path;

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const PLOT_LEFT: f64 = 80.0;
const PLOT_RIGHT: f64 = 770.0;
const PLOT_TOP: f64 = 40.0;
const PLOT_BOTTOM: f64 = 430.0;

pub fn write_line_chart(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
) -> io::Result<()> {
    let finite = |v: f64| v.is_finite();
    let xs: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|p| finite(p.0) && finite(p.1))
        .map(|p| p.0)
        .collect();
    let ys: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|p| finite(p.0) && finite(p.1))
        .map(|p| p.1)
        .collect();
    if xs.is_empty() {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "no finite points to plot"));
    }
    let (x_min, x_max) = padded_span(&xs);
    let (y_min, y_max) = padded_span(&ys);
    let sx = |x: f64| PLOT_LEFT + (x - x_min) / (x_max - x_min) * (PLOT_RIGHT - PLOT_LEFT);
    let sy = |y: f64| PLOT_BOTTOM - (y - y_min) / (y_max - y_min) * (PLOT_BOTTOM - PLOT_TOP);

    let mut svg = String::with_capacity(4096);
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"13\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{PLOT_LEFT}\" y=\"22\" font-size=\"16\" font-weight=\"bold\">{}</text>\n",
        escape(title)
    ));
    // Plot frame and tick labels.
    svg.push_str(&format!(
        "<rect x=\"{PLOT_LEFT}\" y=\"{PLOT_TOP}\" width=\"{}\" height=\"{}\" fill=\"none\" \
         stroke=\"#404040\"/>\n",
        PLOT_RIGHT - PLOT_LEFT,
        PLOT_BOTTOM - PLOT_TOP
    ));
    for i in 0..=4 {
        let frac = i as f64 / 4.0;
        let x = x_min + frac * (x_max - x_min);
        let y = y_min + frac * (y_max - y_min);
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" fill=\"#404040\">{}</text>\n",
            sx(x),
            PLOT_BOTTOM + 18.0,
            tick(x)
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" fill=\"#404040\">{}</text>\n",
            PLOT_LEFT - 8.0,
            sy(y) + 4.0,
            tick(y)
        ));
        if i > 0 && i < 4 {
            svg.push_str(&format!(
                "<line x1=\"{PLOT_LEFT}\" y1=\"{0:.1}\" x2=\"{PLOT_RIGHT}\" y2=\"{0:.1}\" \
                 stroke=\"#e0e0e0\"/>\n",
                sy(y)
            ));
        }
    }
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" fill=\"#404040\">{}</text>\n",
        (PLOT_LEFT + PLOT_RIGHT) / 2.0,
        HEIGHT - 10.0,
        escape(x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{:.1}\" transform=\"rotate(-90 18 {:.1})\" text-anchor=\"middle\" \
         fill=\"#404040\">{}</text>\n",
        (PLOT_TOP + PLOT_BOTTOM) / 2.0,
        (PLOT_TOP + PLOT_BOTTOM) / 2.0,
        escape(y_label)
    ));

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .filter(|p| finite(p.0) && finite(p.1))
            .map(|p| format!("{:.1},{:.1}", sx(p.0), sy(p.1)))
            .collect();
        if coords.len() >= 2 {
            svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
                coords.join(" ")
            ));
        } else if coords.len() == 1 {
            let (x, y) = s.points[0];
            svg.push_str(&format!(
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{color}\"/>\n",
                sx(x),
                sy(y)
            ));
        }
        // Legend entry, stacked top-right inside the frame.
        let ly = PLOT_TOP + 16.0 + 18.0 * i as f64;
        svg.push_str(&format!(
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"12\" height=\"12\" fill=\"{color}\"/>\n",
            PLOT_RIGHT - 150.0,
            ly - 10.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n",
            PLOT_RIGHT - 133.0,
            ly,
            escape(s.label)
        ));
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg)
}

/// Data span padded 3% each side; degenerate spans get a unit of slack.
fn padded_span(values: &[f64]) -> (f64, f64) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return (min - 1.0, max + 1.0);
    }
    let pad = (max - min) * 0.03;
    (min - pad, max + pad)
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let magnitude = v.abs();
    if magnitude >= 1000.0 {
        format!("{v:.0}")
    } else if magnitude >= 1.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.4}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
