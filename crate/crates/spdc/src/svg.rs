//! Minimal SVG rendering with fixed styling and fixed-precision numbers,
//! so identical data gives identical bytes.

use std::fmt::Write as _;

const W: f64 = 480.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const TOP: f64 = 40.0;
const PLOT: f64 = 320.0;

/// Viridis anchor colors.
const MAP: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

fn color(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let x = t * (MAP.len() - 1) as f64;
    let k = (x.floor() as usize).min(MAP.len() - 2);
    let f = x - k as f64;
    let (a, b) = (MAP[k], MAP[k + 1]);
    let mix = |p: f64, q: f64| (p + (q - p) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn header(out: &mut String, title: &str) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(out, r#"<text x="{}" y="24" text-anchor="middle">{}</text>"#, LEFT + PLOT / 2.0, escape(title)).unwrap();
}

fn axes(out: &mut String, x_label: &str, y_label: &str, xr: (f64, f64), yr: (f64, f64)) {
    writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{PLOT}" height="{PLOT}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    let bottom = TOP + PLOT;
    writeln!(out, r#"<text x="{LEFT}" y="{}">{}</text>"#, bottom + 16.0, tick(xr.0)).unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        LEFT + PLOT,
        bottom + 16.0,
        tick(xr.1)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + PLOT / 2.0,
        bottom + 34.0,
        escape(x_label)
    )
    .unwrap();
    writeln!(out, r#"<text x="{}" y="{bottom}" text-anchor="end">{}</text>"#, LEFT - 4.0, tick(yr.0)).unwrap();
    writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, LEFT - 4.0, TOP + 10.0, tick(yr.1)).unwrap();
    writeln!(
        out,
        r#"<text transform="translate(16 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
        TOP + PLOT / 2.0,
        escape(y_label)
    )
    .unwrap();
}

fn tick(v: f64) -> String {
    format!("{v:.4e}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Heat map of a row-major field (rows along `ys`, drawn with `ys`
/// increasing upward), scaled to its maximum.
pub fn heatmap(title: &str, x_label: &str, y_label: &str, xs: &[f64], ys: &[f64], values: &[f64]) -> String {
    let (nx, ny) = (xs.len(), ys.len());
    assert_eq!(values.len(), nx * ny);
    let vmax = values.iter().cloned().fold(0.0, f64::max);
    let scale = if vmax > 0.0 { 1.0 / vmax } else { 0.0 };
    let mut out = String::new();
    header(&mut out, title);
    let cw = PLOT / nx as f64;
    let ch = PLOT / ny as f64;
    for r in 0..ny {
        for c in 0..nx {
            let v = values[r * nx + c] * scale;
            let x = LEFT + c as f64 * cw;
            let y = TOP + PLOT - (r + 1) as f64 * ch;
            writeln!(
                out,
                r#"<rect x="{x:.3}" y="{y:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
                cw + 0.02,
                ch + 0.02,
                color(v)
            )
            .unwrap();
        }
    }
    axes(&mut out, x_label, y_label, (xs[0], xs[nx - 1]), (ys[0], ys[ny - 1]));
    out.push_str("</svg>\n");
    out
}

const LINE_COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Line plot of one or more named series; non-finite points are skipped.
pub fn lines(title: &str, x_label: &str, y_label: &str, series: &[(&str, Vec<(f64, f64)>)]) -> String {
    let pts = series.iter().flat_map(|s| s.1.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, x_label, y_label, (x0, x1), (y0, y1));
    for (k, (name, s)) in series.iter().enumerate() {
        let col = LINE_COLORS[k % LINE_COLORS.len()];
        let mut path = String::new();
        for &(x, y) in s.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
            let px = LEFT + (x - x0) / (x1 - x0) * PLOT;
            let py = TOP + PLOT - (y - y0) / (y1 - y0) * PLOT;
            write!(path, "{px:.3},{py:.3} ").unwrap();
            writeln!(out, r#"<circle cx="{px:.3}" cy="{py:.3}" r="2.5" fill="{col}"/>"#).unwrap();
        }
        writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{col}" stroke-width="1.5"/>"#,
            path.trim_end()
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{col}">{}</text>"#,
            LEFT + PLOT + 8.0,
            TOP + 14.0 + 16.0 * k as f64,
            escape(name)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}
