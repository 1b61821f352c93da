//! Minimal standalone SVG plots: log-log profile curves, convergence
//! curves, and Betti tables. Diff-able vector output, no dependencies.

use std::fmt::Write;

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Line plot with optional log axes.
pub fn line_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    log_x: bool,
    log_y: bool,
    series: &[Series],
) -> String {
    let tx = |v: f64| if log_x { v.log10() } else { v };
    let ty = |v: f64| if log_y { v.log10() } else { v };
    let all: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|&(x, y)| (tx(x), ty(y))))
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() || x0 == x1 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    if !y0.is_finite() || y0 == y1 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);
    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    );
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" \
         font-size=\"15\">{}</text>\n",
        W / 2.0,
        xml_escape(title)
    );
    // axes
    let _ = write!(
        svg,
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN,
        t = MARGIN
    );
    let fmt_tick = |v: f64, log: bool| {
        if log {
            format!("1e{v:.1}")
        } else {
            format!("{v:.3}")
        }
    };
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" \
             font-size=\"10\">{}</text>\n",
            px(fx),
            H - MARGIN + 16.0,
            fmt_tick(fx, log_x)
        );
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"monospace\" \
             font-size=\"10\">{}</text>\n",
            MARGIN - 6.0,
            py(fy) + 4.0,
            fmt_tick(fy, log_y)
        );
    }
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" \
         font-size=\"12\">{}</text>\n",
        W / 2.0,
        H - 14.0,
        xml_escape(x_label)
    );
    let _ = write!(
        svg,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" \
         font-size=\"12\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        H / 2.0,
        H / 2.0,
        xml_escape(y_label)
    );
    for (si, s) in series.iter().enumerate() {
        let color = COLORS[si % COLORS.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(tx(x)), py(ty(y))))
            .collect();
        let _ = write!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            pts.join(" ")
        );
        for &(x, y) in &s.points {
            let _ = write!(
                svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                px(tx(x)),
                py(ty(y))
            );
        }
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" \
             fill=\"{color}\">{}</text>\n",
            W - MARGIN + 4.0,
            MARGIN + 14.0 * si as f64,
            xml_escape(s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Tabular Betti output as an SVG text grid.
pub fn betti_table(title: &str, rows: &[(String, Vec<usize>)]) -> String {
    let mut svg = String::new();
    let height = 80.0 + 22.0 * rows.len() as f64;
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{height}\" \
         viewBox=\"0 0 {W} {height}\">\n<rect width=\"{W}\" height=\"{height}\" fill=\"white\"/>\n"
    );
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" \
         font-size=\"15\">{}</text>\n",
        W / 2.0,
        xml_escape(title)
    );
    let _ = write!(
        svg,
        "<text x=\"40\" y=\"52\" font-family=\"monospace\" font-size=\"12\">label</text>\n\
         <text x=\"320\" y=\"52\" font-family=\"monospace\" font-size=\"12\">b0 b1 b2 ...</text>\n"
    );
    for (i, (label, betti)) in rows.iter().enumerate() {
        let y = 76.0 + 22.0 * i as f64;
        let b: Vec<String> = betti.iter().map(usize::to_string).collect();
        let _ = write!(
            svg,
            "<text x=\"40\" y=\"{y}\" font-family=\"monospace\" font-size=\"12\">{}</text>\n\
             <text x=\"320\" y=\"{y}\" font-family=\"monospace\" font-size=\"12\">{}</text>\n",
            xml_escape(label),
            b.join(" ")
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
