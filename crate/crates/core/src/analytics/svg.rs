//! Minimal static SVG charts. Output depends only on the inputs, so charts
//! are byte-stable across runs.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 360.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 96.0;
const PALETTE: [&str; 6] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948"];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    );
}

fn nice_max(max: f64) -> f64 {
    if max <= 0.0 || !max.is_finite() {
        return 1.0;
    }
    let magnitude = 10f64.powf(max.log10().floor());
    for step in [1.0, 2.0, 2.5, 5.0, 10.0] {
        if step * magnitude >= max {
            return step * magnitude;
        }
    }
    10.0 * magnitude
}

fn axes(out: &mut String, y_max: f64) {
    let plot_h = HEIGHT - TOP - BOTTOM;
    for i in 0..=4 {
        let v = y_max * f64::from(i) / 4.0;
        let y = TOP + plot_h - plot_h * f64::from(i) / 4.0;
        let _ = writeln!(
            out,
            "<line x1=\"{LEFT}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#dddddd\"/>\
             <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            WIDTH - RIGHT,
            LEFT - 6.0,
            y + 4.0,
            fmt_tick(v)
        );
    }
    let _ = writeln!(
        out,
        "<line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{:.2}\" stroke=\"black\"/>",
        HEIGHT - BOTTOM
    );
}

fn fmt_tick(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').to_string()
    }
}

fn x_label(out: &mut String, x: f64, label: &str) {
    let y = HEIGHT - BOTTOM + 12.0;
    let _ = writeln!(
        out,
        "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"end\" transform=\"rotate(-40 {x:.2} {y:.2})\">{}</text>",
        escape(label)
    );
}

fn legend(out: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let x = LEFT + 8.0 + 140.0 * i as f64;
        let _ = writeln!(
            out,
            "<rect x=\"{x:.2}\" y=\"28\" width=\"10\" height=\"10\" fill=\"{}\"/><text x=\"{:.2}\" y=\"37\">{}</text>",
            PALETTE[i % PALETTE.len()],
            x + 14.0,
            escape(name)
        );
    }
}

/// Grouped vertical bars: one group per category, one bar per series.
pub fn bar_chart(title: &str, categories: &[String], series: &[(&str, Vec<f64>)], y_max: Option<f64>) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let max = series.iter().flat_map(|(_, v)| v.iter().copied()).fold(0.0, f64::max);
    let y_max = y_max.unwrap_or_else(|| nice_max(max));
    axes(&mut out, y_max);
    if series.len() > 1 {
        legend(&mut out, &series.iter().map(|(n, _)| *n).collect::<Vec<_>>());
    }
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let group_w = plot_w / categories.len().max(1) as f64;
    let bar_w = group_w * 0.8 / series.len().max(1) as f64;
    for (c, label) in categories.iter().enumerate() {
        let gx = LEFT + group_w * c as f64 + group_w * 0.1;
        for (s, (_, values)) in series.iter().enumerate() {
            let v = values.get(c).copied().unwrap_or(0.0).max(0.0);
            let h = plot_h * (v / y_max).min(1.0);
            let _ = writeln!(
                out,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{h:.2}\" fill=\"{}\"><title>{}: {v:.4}</title></rect>",
                gx + bar_w * s as f64,
                TOP + plot_h - h,
                bar_w,
                PALETTE[s % PALETTE.len()],
                escape(label)
            );
        }
        x_label(&mut out, gx + group_w * 0.4, label);
    }
    out.push_str("</svg>\n");
    out
}

/// One polyline per series over shared x labels.
pub fn line_chart(title: &str, x_labels: &[String], series: &[(&str, Vec<f64>)], y_max: Option<f64>) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let max = series.iter().flat_map(|(_, v)| v.iter().copied()).fold(0.0, f64::max);
    let y_max = y_max.unwrap_or_else(|| nice_max(max));
    axes(&mut out, y_max);
    legend(&mut out, &series.iter().map(|(n, _)| *n).collect::<Vec<_>>());
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let step = plot_w / x_labels.len().max(1) as f64;
    let x_at = |i: usize| LEFT + step * (i as f64 + 0.5);
    for (i, label) in x_labels.iter().enumerate() {
        x_label(&mut out, x_at(i), label);
    }
    for (s, (_, values)) in series.iter().enumerate() {
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{:.2},{:.2}", x_at(i), TOP + plot_h - plot_h * (v.max(0.0) / y_max).min(1.0)))
            .collect();
        let color = PALETTE[s % PALETTE.len()];
        let _ = writeln!(out, "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>", points.join(" "));
    }
    out.push_str("</svg>\n");
    out
}
