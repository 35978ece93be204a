//! Minimal SVG line plots. Output depends only on the input data, so equal
//! inputs give equal bytes.

use std::fmt::Write;

use crate::error::CliError;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const MAX_MARKERS: usize = 40;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Filled markers; open markers otherwise.
    pub filled: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

/// Ticks at 1, 2 or 5 times a power of ten covering `[lo, hi]`.
pub fn nice_ticks(lo: f64, hi: f64, target: usize) -> (Vec<f64>, usize) {
    let span = (hi - lo).max(f64::EPSILON * hi.abs().max(1.0));
    let raw = span / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    ((first..=last).map(|k| k as f64 * step).collect(), decimals)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn points(s: &Series, log_y: bool) -> Vec<(f64, f64)> {
    s.x.iter()
        .zip(&s.y)
        .filter(|(x, y)| x.is_finite() && y.is_finite() && (!log_y || **y > 0.0))
        .map(|(x, y)| (*x, if log_y { y.log10() } else { *y }))
        .collect()
}

pub fn render(spec: &PlotSpec) -> Result<String, CliError> {
    if spec.series.is_empty() {
        return Err(CliError::Plot("no series to plot".into()));
    }
    let data: Vec<Vec<(f64, f64)>> = spec.series.iter().map(|s| points(s, spec.log_y)).collect();
    let all: Vec<&(f64, f64)> = data.iter().flatten().collect();
    if all.is_empty() {
        return Err(CliError::Plot("no finite data points".into()));
    }
    let fold = |f: fn(&(f64, f64)) -> f64| {
        all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(f(p)), hi.max(f(p))))
    };
    let (mut x0, mut x1) = fold(|p| p.0);
    let (mut y0, mut y1) = fold(|p| p.1);
    if x1 == x0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if spec.log_y {
        y0 = y0.floor();
        y1 = y1.ceil().max(y0 + 1.0);
    } else if y1 == y0 {
        y0 -= 0.5;
        y1 += 0.5;
    } else {
        let pad = 0.05 * (y1 - y0);
        y0 -= pad;
        y1 += pad;
    }
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut o = String::new();
    let _ = writeln!(o, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        o,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(o, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(o, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, escape(&spec.title));

    let (xt, xd) = nice_ticks(x0, x1, 6);
    for t in xt {
        let x = sx(t);
        let _ = writeln!(o, r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd"/>"##, TOP, TOP + ph);
        let _ = writeln!(o, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{t:.xd$}</text>"#, TOP + ph + 18.0);
    }
    let yt: Vec<(f64, String)> = if spec.log_y {
        (y0 as i64..=y1 as i64).map(|k| (k as f64, format!("1e{k}"))).collect()
    } else {
        let (t, d) = nice_ticks(y0, y1, 6);
        t.into_iter().map(|v| (v, format!("{v:.d$}"))).collect()
    };
    for (v, label) in yt {
        let y = sy(v);
        let _ = writeln!(o, r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##, LEFT + pw);
        let _ = writeln!(o, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#, LEFT - 6.0, y + 4.0);
    }
    let _ = writeln!(o, r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#);
    let _ = writeln!(
        o,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 16.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        o,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&spec.y_label)
    );

    for (i, (s, pts)) in spec.series.iter().zip(&data).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let fill = if s.filled { color } else { "white" };
        if pts.len() > 1 {
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
            let _ = writeln!(o, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        }
        let every = pts.len().div_ceil(MAX_MARKERS).max(1);
        for (x, y) in pts.iter().step_by(every) {
            let _ = writeln!(
                o,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{fill}" stroke="{color}" stroke-width="1.2"/>"#,
                sx(*x),
                sy(*y)
            );
        }
        let ly = TOP + 14.0 + 20.0 * i as f64;
        let lx = LEFT + pw + 14.0;
        let _ = writeln!(o, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="1.5"/>"#, lx + 24.0);
        let _ = writeln!(o, r#"<circle cx="{:.2}" cy="{ly:.2}" r="3.5" fill="{fill}" stroke="{color}" stroke-width="1.2"/>"#, lx + 12.0);
        let _ = writeln!(o, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 30.0, ly + 4.0, escape(&s.label));
    }
    o.push_str("</svg>\n");
    Ok(o)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round() {
        let (t, d) = nice_ticks(0.0, 1.0, 5);
        assert_eq!(t, vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0]);
        assert_eq!(d, 1);
        let (t, _) = nice_ticks(-3.0, 17.0, 5);
        assert_eq!(t.first(), Some(&0.0));
        assert_eq!(t.last(), Some(&15.0));
    }

    #[test]
    fn open_and_filled_markers() {
        let s = |label: &str, filled| Series { label: label.into(), x: vec![0.0, 1.0], y: vec![1.0, 0.5], filled };
        let spec = PlotSpec { series: vec![s("rwa", true), s("full", false)], ..Default::default() };
        let svg = render(&spec).unwrap();
        assert!(svg.contains(r##"fill="#1f77b4" stroke="#1f77b4""##));
        assert!(svg.contains(r##"fill="white" stroke="#d62728""##));
    }

    #[test]
    fn log_scale_drops_non_positive() {
        let spec = PlotSpec {
            log_y: true,
            series: vec![Series { label: "a".into(), x: vec![0.0, 1.0, 2.0], y: vec![1e-3, 0.0, 0.5], filled: true }],
            ..Default::default()
        };
        let svg = render(&spec).unwrap();
        assert!(svg.contains(">1e-3<"));
        assert_eq!(svg.matches("<circle").count(), 2 + 1);
    }
}
