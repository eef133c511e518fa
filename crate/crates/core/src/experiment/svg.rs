//! Minimal SVG charts: line/marker plots, histograms, vertex heat maps.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Markers,
    LineMarkers,
    Dashed,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>, style: Style) -> Self {
        Self {
            name: name.into(),
            points,
            style,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>
"#,
        W / 2.0,
        esc(title)
    );
}

/// Linear axis mapping with padded, non-degenerate range.
#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    px0: f64,
    px1: f64,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, px0: f64, px1: f64) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 * (1.0 + lo.abs()) {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.05 * (hi - lo);
        Self {
            lo: lo - pad,
            hi: hi + pad,
            px0,
            px1,
        }
    }

    fn map(&self, v: f64) -> f64 {
        self.px0 + (v - self.lo) / (self.hi - self.lo) * (self.px1 - self.px0)
    }

    fn ticks(&self) -> Vec<f64> {
        (0..=4).map(|i| self.lo + (self.hi - self.lo) * i as f64 / 4.0).collect()
    }
}

fn tick_label(v: f64, log: bool) -> String {
    let v = if log { 10f64.powf(v) } else { v };
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

impl Plot {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            ..Default::default()
        }
    }

    pub fn log_log(mut self) -> Self {
        self.log_x = true;
        self.log_y = true;
        self
    }

    pub fn with(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }

    fn tx(&self, (x, y): (f64, f64)) -> Option<(f64, f64)> {
        let x = if self.log_x { x.log10() } else { x };
        let y = if self.log_y { y.log10() } else { y };
        (x.is_finite() && y.is_finite()).then_some((x, y))
    }

    pub fn render(&self) -> String {
        let pts: Vec<Vec<(f64, f64)>> = self
            .series
            .iter()
            .map(|s| s.points.iter().filter_map(|&p| self.tx(p)).collect())
            .collect();
        let ax = Axis::new(pts.iter().flatten().map(|p| p.0), LEFT, W - RIGHT);
        let ay = Axis::new(pts.iter().flatten().map(|p| p.1), H - BOTTOM, TOP);
        let mut out = String::new();
        header(&mut out, &self.title);
        frame(&mut out, &ax, &ay, self.log_x, self.log_y, &self.x_label, &self.y_label);
        for (i, (s, p)) in self.series.iter().zip(&pts).enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            if matches!(s.style, Style::Line | Style::LineMarkers | Style::Dashed) && p.len() > 1 {
                let path: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", ax.map(x), ay.map(y))).collect();
                let dash = if s.style == Style::Dashed { r#" stroke-dasharray="6 4""# } else { "" };
                let _ = writeln!(
                    out,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
                    path.join(" ")
                );
            }
            if matches!(s.style, Style::Markers | Style::LineMarkers) {
                for &(x, y) in p {
                    let _ = writeln!(
                        out,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                        ax.map(x),
                        ay.map(y)
                    );
                }
            }
            let ly = TOP + 8.0 + 16.0 * i as f64;
            let _ = writeln!(
                out,
                r#"<rect x="{}" y="{}" width="12" height="4" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
                LEFT + 12.0,
                ly - 4.0,
                LEFT + 30.0,
                ly + 1.0,
                esc(&s.name)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

fn frame(out: &mut String, ax: &Axis, ay: &Axis, log_x: bool, log_y: bool, xl: &str, yl: &str) {
    let _ = writeln!(
        out,
        r##"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
        W - LEFT - RIGHT,
        H - TOP - BOTTOM
    );
    for t in ax.ticks() {
        let x = ax.map(t);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="#444"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"##,
            H - BOTTOM,
            H - BOTTOM + 5.0,
            H - BOTTOM + 18.0,
            tick_label(t, log_x)
        );
    }
    for t in ay.ticks() {
        let y = ay.map(t);
        let _ = writeln!(
            out,
            r##"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="#444"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            tick_label(t, log_y)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        H - 12.0,
        esc(xl)
    );
    let _ = writeln!(
        out,
        r#"<text transform="translate(16,{}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (TOP + H - BOTTOM) / 2.0,
        esc(yl)
    );
}

/// Bar chart of `counts` over equal bins spanning `[lo, hi]`.
pub fn histogram(title: &str, x_label: &str, counts: &[u64], lo: f64, hi: f64) -> String {
    let n = counts.len().max(1) as f64;
    let peak = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let ax = Axis {
        lo,
        hi,
        px0: LEFT,
        px1: W - RIGHT,
    };
    let ay = Axis {
        lo: 0.0,
        hi: peak * 1.05,
        px0: H - BOTTOM,
        px1: TOP,
    };
    let mut out = String::new();
    header(&mut out, title);
    frame(&mut out, &ax, &ay, false, false, x_label, "count");
    let width = (hi - lo) / n;
    for (i, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let x0 = ax.map(lo + width * i as f64);
        let x1 = ax.map(lo + width * (i + 1) as f64);
        let y = ay.map(c as f64);
        let _ = writeln!(
            out,
            r#"<rect x="{x0:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            (x1 - x0).max(0.5),
            ay.map(0.0) - y,
            PALETTE[0]
        );
    }
    out.push_str("</svg>\n");
    out
}

fn heat_color(t: f64) -> String {
    // white -> dark red
    let t = t.clamp(0.0, 1.0);
    let g = (255.0 * (1.0 - t)) as u8;
    let r = (255.0 - 100.0 * t) as u8;
    format!("#{r:02x}{g:02x}{g:02x}")
}

/// Vertices at `coords` with edges drawn grey and values shaded; `None`
/// values are drawn as small grey dots.
pub fn heat_map(title: &str, coords: &[[f64; 2]], edges: &[(usize, usize)], values: &[Option<f64>]) -> String {
    let ax = Axis::new(coords.iter().map(|c| c[0]), LEFT, W - RIGHT);
    let ay = Axis::new(coords.iter().map(|c| c[1]), H - BOTTOM, TOP);
    // equal aspect ratio
    let sx = (ax.px1 - ax.px0) / (ax.hi - ax.lo);
    let sy = (ay.px0 - ay.px1) / (ay.hi - ay.lo);
    let s = sx.min(sy);
    let map = |c: [f64; 2]| (LEFT + (c[0] - ax.lo) * s, H - BOTTOM - (c[1] - ay.lo) * s);
    let peak = values.iter().flatten().copied().fold(0.0, f64::max);
    let mut out = String::new();
    header(&mut out, title);
    for &(u, v) in edges {
        let (x0, y0) = map(coords[u]);
        let (x1, y1) = map(coords[v]);
        let _ = writeln!(
            out,
            r##"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y1:.2}" stroke="#bbb" stroke-width="0.6"/>"##
        );
    }
    for (c, v) in coords.iter().zip(values) {
        let (x, y) = map(*c);
        match v {
            Some(p) => {
                let t = if peak > 0.0 { p / peak } else { 0.0 };
                let _ = writeln!(
                    out,
                    r##"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="{}" stroke="#333" stroke-width="0.4"><title>{p:.6}</title></circle>"##,
                    heat_color(t)
                );
            }
            None => {
                let _ = writeln!(out, r##"<circle cx="{x:.2}" cy="{y:.2}" r="1" fill="#888"/>"##);
            }
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">max mass {peak:.4}</text>"#,
        W - RIGHT,
        H - 12.0
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plots_are_well_formed() {
        let p = Plot::new("a <b>", "x", "y")
            .with(Series::new("s", vec![(1.0, 2.0), (2.0, 3.0)], Style::LineMarkers))
            .render();
        assert!(p.starts_with("<svg") && p.trim_end().ends_with("</svg>"));
        assert!(p.contains("a &lt;b&gt;"));
        assert_eq!(p.matches("<circle").count(), 2);

        let h = histogram("h", "t", &[1, 0, 3], 0.0, 1.0);
        assert_eq!(h.matches("<rect x=").count(), 1 + 2);

        let m = heat_map("m", &[[0.0, 0.0], [1.0, 0.0]], &[(0, 1)], &[Some(0.5), None]);
        assert_eq!(m.matches("<circle").count(), 2);
    }

    #[test]
    fn log_axes_drop_nonpositive() {
        let p = Plot::new("t", "x", "y")
            .log_log()
            .with(Series::new("s", vec![(0.0, 1.0), (1.0, 1.0), (10.0, 0.1)], Style::Markers))
            .render();
        assert_eq!(p.matches("<circle").count(), 2);
    }
}
