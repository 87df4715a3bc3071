//! Minimal self-contained SVG line plots.

use std::fmt::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.filter(|x| x.is_finite()).collect();
        let (mut lo, mut hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
        if v.is_empty() {
            (lo, hi) = (0.0, 1.0);
        }
        // log scale when everything is positive and spans more than a decade
        let log = lo > 0.0 && hi / lo > 10.0;
        if log {
            return Axis { lo: lo.log10(), hi: hi.log10(), log };
        }
        if hi - lo < 1e-12 * (1.0 + hi.abs()) {
            let pad = 0.05 * (1.0 + hi.abs());
            lo -= pad;
            hi += pad;
        }
        Axis { lo, hi, log }
    }

    fn map(&self, x: f64, a: f64, b: f64) -> f64 {
        let t = if self.log { x.log10() } else { x };
        a + (t - self.lo) / (self.hi - self.lo) * (b - a)
    }

    fn ticks(&self) -> Vec<f64> {
        let raw: Vec<f64> = (0..=4).map(|i| self.lo + (self.hi - self.lo) * i as f64 / 4.0).collect();
        if self.log {
            raw.into_iter().map(|t| 10f64.powf(t)).collect()
        } else {
            raw
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl LinePlot {
    pub fn render(&self) -> String {
        let pts = || self.series.iter().flat_map(|s| s.points.iter());
        let xa = Axis::fit(pts().map(|p| p.0));
        let ya = Axis::fit(pts().map(|p| p.1));
        let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            (x0 + x1) / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y0 - y1
        );
        for t in xa.ticks() {
            let x = xa.map(t, x0, x1);
            let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{}" stroke="black"/>"#, y0 + 5.0);
            let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{t:.3e}</text>"#, y0 + 18.0);
        }
        for t in ya.ticks() {
            let y = ya.map(t, y0, y1);
            let _ = writeln!(s, r#"<line x1="{}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/>"#, x0 - 5.0);
            let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{t:.3e}</text>"#, x0 - 8.0, y + 4.0);
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}{}</text>"#,
            (x0 + x1) / 2.0,
            H - 16.0,
            escape(&self.x_label),
            if xa.log { " (log)" } else { "" }
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(&self.y_label),
            if ya.log { " (log)" } else { "" }
        );
        for (i, ser) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let path: Vec<String> = ser
                .points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|(x, y)| format!("{:.2},{:.2}", xa.map(*x, x0, x1), ya.map(*y, y0, y1)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                path.join(" ")
            );
            for p in &path {
                let (cx, cy) = p.split_once(',').unwrap_or(("0", "0"));
                let _ = writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>"#);
            }
            let ly = y1 + 16.0 * (i as f64 + 1.0);
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
                x1 + 10.0,
                x1 + 30.0
            );
            let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, x1 + 36.0, ly + 4.0, escape(&ser.label));
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_series_and_labels() {
        let plot = LinePlot {
            title: "ratio vs k".into(),
            x_label: "k".into(),
            y_label: "ratio".into(),
            series: vec![Series {
                label: "h < 1".into(),
                points: vec![(1.0, 0.2), (2.0, 0.15), (4.0, 0.12)],
            }],
        };
        let svg = plot.render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("h &lt; 1"));
        assert_eq!(svg, plot.render());
    }

    #[test]
    fn empty_plot_is_valid() {
        let plot = LinePlot {
            title: String::new(),
            x_label: String::new(),
            y_label: String::new(),
            series: vec![],
        };
        assert!(plot.render().contains("</svg>"));
    }
}
