//! Minimal deterministic SVG line charts.

use std::fmt::Write;

use tonsure_core::scans::NamedCurve;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const PALETTE: [&str; 9] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf", "#7f7f7f",
];

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        let pad = if lo == 0.0 { 0.5 } else { lo.abs() * 0.1 };
        return (lo - pad, hi + pad);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let m = raw / mag;
    let nice = if m < 1.5 {
        1.0
    } else if m < 3.5 {
        2.0
    } else if m < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn ticks(lo: f64, hi: f64) -> (Vec<f64>, usize) {
    let step = nice_step(hi - lo);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        out.push(t + 0.0);
        t += step;
    }
    (out, decimals)
}

fn label(v: f64, decimals: usize) -> String {
    let s = format!("{:.*}", decimals, v);
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Runs of consecutive present values, as polyline point lists.
fn segments(frame: &Frame, pts: impl Iterator<Item = (f64, Option<f64>)>) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for (x, y) in pts {
        match y {
            Some(y) => {
                let _ = write!(cur, "{:.2},{:.2} ", frame.px(x), frame.py(y));
            }
            None if !cur.is_empty() => out.push(std::mem::take(&mut cur)),
            None => {}
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out.into_iter().map(|s| s.trim_end().to_string()).collect()
}

/// Line chart of the given curves; each curve's null envelope, if any, is
/// drawn as a shaded band with a dashed mean.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, curves: &[&NamedCurve]) -> String {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for c in curves {
        for (j, p) in c.points.iter().enumerate() {
            xs.push(p.x);
            ys.extend(p.value);
            if let Some(e) = c.envelope.as_ref().and_then(|e| e.points.get(j)) {
                ys.extend([e.mean, e.lower, e.upper].into_iter().flatten());
            }
        }
    }
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let frame = Frame {
        x: padded(min(&xs), max(&xs)),
        y: padded(min(&ys), max(&ys)),
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(title)
    );

    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let (xt, xd) = ticks(frame.x.0, frame.x.1);
    for t in xt {
        let px = frame.px(t);
        let _ = writeln!(svg, r##"<line x1="{px:.2}" y1="{y1:.2}" x2="{px:.2}" y2="{y0:.2}" stroke="#e5e5e5"/>"##);
        let _ = writeln!(
            svg,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 16.0,
            label(t, xd)
        );
    }
    let (yt, yd) = ticks(frame.y.0, frame.y.1);
    for t in yt {
        let py = frame.py(t);
        let _ = writeln!(svg, r##"<line x1="{x0:.2}" y1="{py:.2}" x2="{x1:.2}" y2="{py:.2}" stroke="#e5e5e5"/>"##);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            py + 4.0,
            label(t, yd)
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 14.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );

    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if let Some(env) = &c.envelope {
            let band: Vec<(f64, Option<(f64, f64)>)> = c
                .points
                .iter()
                .zip(&env.points)
                .map(|(p, e)| (p.x, e.lower.zip(e.upper)))
                .collect();
            for run in band.split(|(_, b)| b.is_none()).filter(|r| !r.is_empty()) {
                let mut d = String::new();
                for (x, b) in run {
                    let _ = write!(d, "{:.2},{:.2} ", frame.px(*x), frame.py(b.unwrap().1));
                }
                for (x, b) in run.iter().rev() {
                    let _ = write!(d, "{:.2},{:.2} ", frame.px(*x), frame.py(b.unwrap().0));
                }
                let _ = writeln!(
                    svg,
                    r#"<polygon points="{}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
                    d.trim_end()
                );
            }
            let means = c.points.iter().zip(&env.points).map(|(p, e)| (p.x, e.mean));
            for seg in segments(&frame, means) {
                let _ = writeln!(
                    svg,
                    r#"<polyline points="{seg}" fill="none" stroke="{color}" stroke-width="1" stroke-dasharray="5,4"/>"#
                );
            }
        }
        for seg in segments(&frame, c.points.iter().map(|p| (p.x, p.value))) {
            let _ = writeln!(
                svg,
                r#"<polyline points="{seg}" fill="none" stroke="{color}" stroke-width="2"/>"#
            );
        }
        let ly = TOP + 12.0 + 18.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            x1 + 12.0,
            x1 + 32.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            x1 + 38.0,
            ly + 4.0,
            escape(&c.name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use tonsure_core::null::{gen_gaussian_pair, GaussianPairSpec, NullSpec};
    use tonsure_core::scans::{run_tonsure_scan, TonsureScanConfig};

    #[test]
    fn ticks_are_round() {
        let (t, d) = ticks(-0.05, 1.05);
        let labels: Vec<String> = t.iter().map(|&v| label(v, d)).collect();
        assert_eq!(labels, ["0.0", "0.2", "0.4", "0.6", "0.8", "1.0"]);
        assert_eq!(label(-0.0001, 2), "0.00");
    }

    #[test]
    fn chart_has_band_and_lines() {
        let s = gen_gaussian_pair(&GaussianPairSpec { n: 80, rho: 0.5, seed: 4 }).unwrap();
        let null = NullSpec {
            replicates: 10,
            ..Default::default()
        };
        let scan = run_tonsure_scan(&s, &TonsureScanConfig::default(), Some(&null)).unwrap();
        let curves: Vec<_> = scan.curves.iter().collect();
        let a = line_chart("t", "x", "y", &curves);
        let b = line_chart("t", "x", "y", &curves);
        assert_eq!(a, b);
        assert_eq!(a.matches("<polygon").count(), 3);
        assert!(a.matches("stroke-dasharray").count() >= 3);
        assert!(a.contains(">somers_dba<"));
        assert!(a.trim_end().ends_with("</svg>"));
    }
}
