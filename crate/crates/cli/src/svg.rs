use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
// Plot area; the legend sits to the right of it.
const LEFT: f64 = 60.0;
const RIGHT: f64 = 560.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 550.0;

const PALETTE: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const DASHES: &[&str] = &["", "6,3", "2,2"];

pub struct Series {
    pub label: String,
    pub values: Vec<f64>,
}

/// Line plot of every series against `xs`. The first series is drawn in
/// black as the reference curve. Output depends only on the inputs.
pub fn line_plot(title: &str, xs: &[f64], series: &[Series]) -> String {
    let (x0, x1) = bounds(xs.iter().copied());
    let (mut y0, mut y1) = bounds(series.iter().flat_map(|s| s.values.iter().copied()));
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    } else {
        let pad = 0.05 * (y1 - y0);
        y0 -= pad;
        y1 += pad;
    }
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (RIGHT - LEFT);
    let py = |y: f64| BOTTOM - (y - y0) / (y1 - y0) * (BOTTOM - TOP);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        (LEFT + RIGHT) / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        RIGHT - LEFT,
        BOTTOM - TOP
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let (gx, gy) = (px(xv), py(yv));
        let _ = writeln!(
            s,
            r##"<line x1="{gx:.2}" y1="{BOTTOM}" x2="{gx:.2}" y2="{}" stroke="#000"/>"##,
            BOTTOM + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{gx:.2}" y="{}" text-anchor="middle">{}</text>"#,
            BOTTOM + 18.0,
            tick(xv)
        );
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{gy:.2}" x2="{LEFT}" y2="{gy:.2}" stroke="#000"/>"##,
            LEFT - 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            gy + 4.0,
            tick(yv)
        );
    }

    for (i, ser) in series.iter().enumerate() {
        let (color, dash, width) = style(i);
        let points: Vec<String> = xs
            .iter()
            .zip(&ser.values)
            .map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="{width}"{dash} points="{}"/>"#,
            points.join(" ")
        );
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="575" y1="{ly}" x2="605" y2="{ly}" stroke="{color}" stroke-width="{width}"{dash}/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="612" y="{}">{}</text>"#,
            ly + 4.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn style(i: usize) -> (&'static str, String, f64) {
    if i == 0 {
        return ("#000000", String::new(), 2.0);
    }
    let k = i - 1;
    let dash = DASHES[(k / PALETTE.len()) % DASHES.len()];
    let dash = if dash.is_empty() {
        String::new()
    } else {
        format!(r#" stroke-dasharray="{dash}""#)
    };
    (PALETTE[k % PALETTE.len()], dash, 1.2)
}

fn bounds(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if lo > hi {
        (0.0, 1.0)
    } else if lo == hi {
        (lo, lo + f64::EPSILON.max(lo.abs() * 1e-12))
    } else {
        (lo, hi)
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
