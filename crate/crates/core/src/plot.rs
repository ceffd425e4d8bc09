//! Minimal static SVG charts: line plots with an optional horizontal rule,
//! and strip plots of value distributions.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub label: String,
    pub y: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Axes {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Frame {
        let (x0, x1) = bounds(xs);
        let (y0, y1) = bounds(ys);
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn bounds(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn header(out: &mut String, axes: &Axes, frame: &Frame) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(&axes.title)
    );
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        out,
        r#"<g class="axes" stroke="black" fill="none"><line x1="{l}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{l}" y1="{t}" x2="{l}" y2="{b}"/></g>"#
    );
    for k in 0..=4 {
        let fx = frame.x0 + (frame.x1 - frame.x0) * k as f64 / 4.0;
        let fy = frame.y0 + (frame.y1 - frame.y0) * k as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.3}</text>"#,
            frame.px(fx),
            b + 16.0,
            fx
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.3}</text>"#,
            l - 6.0,
            frame.py(fy) + 4.0,
            fy
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 14.0,
        escape(&axes.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(&axes.y_label)
    );
}

/// Polylines with a circle marker per point (`class="point"`) and an optional
/// horizontal rule (`class="criterion"`).
pub fn line_plot(axes: &Axes, series: &[Series], rule: Option<&Rule>) -> String {
    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let ys = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .chain(rule.map(|r| r.y));
    let frame = Frame::new(xs, ys);
    let mut out = String::new();
    header(&mut out, axes, &frame);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="series" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        for &(x, y) in &s.points {
            let _ = writeln!(
                out,
                r#"<circle class="point" cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
                frame.px(x),
                frame.py(y)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" fill="{color}">{}</text>"#,
            WIDTH - MARGIN - 140.0,
            MARGIN + 14.0 * (i as f64 + 1.0),
            escape(&s.name)
        );
    }
    if let Some(r) = rule {
        let y = frame.py(r.y);
        let _ = writeln!(
            out,
            r#"<line class="criterion" x1="{MARGIN}" y1="{y:.2}" x2="{:.1}" y2="{y:.2}" stroke="gray" stroke-dasharray="6 4"/>"#,
            WIDTH - MARGIN
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.2}" fill="gray">{}</text>"#,
            MARGIN + 4.0,
            y - 4.0,
            escape(&r.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// One horizontal strip per group; markers are spread vertically by a fixed
/// hash of their index so the output is deterministic.
pub fn strip_plot(axes: &Axes, groups: &[(String, Vec<f64>)]) -> String {
    let xs = groups.iter().flat_map(|g| g.1.iter().copied()).chain([0.0]);
    let frame = Frame::new(xs, [0.0, groups.len().max(1) as f64].into_iter());
    let mut out = String::new();
    header(&mut out, axes, &frame);
    let zero = frame.px(0.0);
    let _ = writeln!(
        out,
        r#"<line x1="{zero:.2}" y1="{MARGIN}" x2="{zero:.2}" y2="{:.1}" stroke="gray"/>"#,
        HEIGHT - MARGIN
    );
    for (i, (name, vals)) in groups.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let centre = i as f64 + 0.5;
        for (k, &v) in vals.iter().enumerate() {
            let jitter =
                ((k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 40) as f64 / (1u64 << 24) as f64;
            let _ = writeln!(
                out,
                r#"<circle class="point" cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}" fill-opacity="0.7"/>"#,
                frame.px(v),
                frame.py(centre + 0.6 * (jitter - 0.5))
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" fill="{color}">{}</text>"#,
            MARGIN + 6.0,
            frame.py(centre + 0.4),
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_and_rule_counts() {
        let s = Series {
            name: "score".into(),
            points: (0..11).map(|k| (k as f64 / 10.0, (k * k) as f64)).collect(),
        };
        let rule = Rule {
            label: "criterion".into(),
            y: 5.0,
        };
        let svg = line_plot(&Axes::default(), &[s], Some(&rule));
        assert_eq!(svg.matches(r#"class="point""#).count(), 11);
        assert_eq!(svg.matches(r#"class="criterion""#).count(), 1);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn escapes_and_degenerate_ranges() {
        let axes = Axes {
            title: "a < b & c".into(),
            ..Axes::default()
        };
        let s = Series {
            name: "flat".into(),
            points: vec![(1.0, 2.0), (1.0, 2.0)],
        };
        let svg = line_plot(&axes, &[s], None);
        assert!(svg.contains("a &lt; b &amp; c"));
        assert!(!svg.contains("NaN"));
        let strip = strip_plot(&axes, &[("x".into(), vec![0.1, -0.2, 0.3])]);
        assert_eq!(strip.matches(r#"class="point""#).count(), 3);
        assert_eq!(
            strip,
            strip_plot(&axes, &[("x".into(), vec![0.1, -0.2, 0.3])])
        );
    }
}
