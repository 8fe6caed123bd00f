//! Self-contained SVG: line plots and the vertex-height diagrams.

use std::fmt::Write;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let span = (hi - lo).max(1e-300);
    let raw = span / n as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|k| k * mag).find(|s| span / s <= n as f64).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.abs() >= 1e4 || x.abs() < 1e-2 {
        format!("{x:.0e}")
    } else {
        let s = format!("{x:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Line plot; `log_x` plots `log10 x` with decade ticks.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series], log_x: bool) -> String {
    let (w, h) = (720.0, 440.0);
    let (l, r, t, b) = (70.0, 170.0, 40.0, 50.0);
    let tx = |x: f64| if log_x { x.log10() } else { x };
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|&(x, y)| (!log_x || x > 0.0) && x.is_finite() && y.is_finite())
        .map(|(x, y)| (tx(x), y))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = pts.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
    );
    if pts.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let px = |x: f64| l + (x - x0) / (x1 - x0) * (w - l - r);
    let py = |y: f64| h - b - (y - y0) / (y1 - y0) * (h - t - b);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, (l + w - r) / 2.0, esc(title)).unwrap();
    let xt: Vec<f64> = if log_x { (x0.ceil() as i64..=x1.floor() as i64).map(|k| k as f64).collect() } else { nice_ticks(x0, x1, 6) };
    for &x in &xt {
        let label = if log_x { format!("1e{}", x as i64) } else { fmt_tick(x) };
        writeln!(s, r##"<line x1="{0:.2}" y1="{1}" x2="{0:.2}" y2="{2}" stroke="#ddd"/>"##, px(x), t, h - b).unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">{label}</text>"#, px(x), h - b + 16.0).unwrap();
    }
    for y in nice_ticks(y0, y1, 6) {
        writeln!(s, r##"<line x1="{l}" y1="{0:.2}" x2="{1}" y2="{0:.2}" stroke="#ddd"/>"##, py(y), w - r).unwrap();
        writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, l - 6.0, py(y) + 4.0, fmt_tick(y)).unwrap();
    }
    writeln!(s, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, w - l - r, h - t - b).unwrap();
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (l + w - r) / 2.0, h - 12.0, esc(x_label)).unwrap();
    writeln!(s, r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#, (t + h - b) / 2.0, esc(y_label)).unwrap();
    for (k, ser) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = ser
            .points
            .iter()
            .filter(|&&(x, y)| (!log_x || x > 0.0) && x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", px(tx(x)), py(y)))
            .collect();
        writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" ")).unwrap();
        let ly = t + 14.0 + 18.0 * k as f64;
        writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, w - r + 10.0, w - r + 30.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, w - r + 36.0, ly + 4.0, esc(&ser.label)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// One panel of the vertex-height diagram.
pub struct Panel {
    pub title: String,
    /// `(column, height)` per vertex; labels are `m₁…`.
    pub vertices: Vec<(f64, f64)>,
    /// `(source, target, dashed)`.
    pub edges: Vec<(usize, usize, bool)>,
}

pub fn height_panels(panels: &[Panel]) -> String {
    let (pw, ph) = (240.0, 320.0);
    let w = pw * panels.len() as f64;
    let unit = 90.0;
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{ph}" font-family="sans-serif" font-size="13">"#).unwrap();
    writeln!(s, r#"<rect width="{w}" height="{ph}" fill="white"/>"#).unwrap();
    for (k, p) in panels.iter().enumerate() {
        let ox = pw * k as f64;
        let pos = |(c, hgt): (f64, f64)| (ox + 70.0 + c * unit, ph / 2.0 + 10.0 - hgt * unit);
        writeln!(s, r#"<g class="panel" id="panel-{k}">"#).unwrap();
        writeln!(s, r#"<text x="{}" y="24" text-anchor="middle">{}</text>"#, ox + pw / 2.0, esc(&p.title)).unwrap();
        if k > 0 {
            writeln!(s, r#"<line x1="{ox}" y1="0" x2="{ox}" y2="{ph}" stroke="black"/>"#).unwrap();
        }
        for &(a, b, dashed) in &p.edges {
            let (x1, y1) = pos(p.vertices[a]);
            let (x2, y2) = pos(p.vertices[b]);
            let dash = if dashed { r#" stroke-dasharray="6,4""# } else { "" };
            writeln!(s, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="black"{dash} data-edge="{a}-{b}"/>"#)
                .unwrap();
        }
        for (i, &v) in p.vertices.iter().enumerate() {
            let (x, y) = pos(v);
            writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="5" fill="black" data-vertex="{i}" data-height="{}"/>"#, v.1).unwrap();
            let dx = if v.0 < 0.5 { -12.0 } else { 12.0 };
            let anchor = if v.0 < 0.5 { "end" } else { "start" };
            writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="{anchor}">m{} ({})</text>"#, x + dx, y + 4.0, i + 1, fmt_tick(v.1))
                .unwrap();
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_cover_the_range() {
        let t = nice_ticks(0.0, 1.0, 5);
        assert_eq!(t, vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0]);
    }

    #[test]
    fn plots_are_well_formed() {
        let s = line_plot("a<b", "x", "y", &[Series { label: "s".into(), points: vec![(1.0, 2.0), (10.0, 3.0)] }], true);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("a&lt;b"));
        let p = height_panels(&[Panel { title: "P".into(), vertices: vec![(0.0, 0.5), (1.5, -1.0)], edges: vec![(0, 1, true)] }]);
        assert!(p.contains(r#"data-height="-1""#) && p.contains("stroke-dasharray"));
    }
}
