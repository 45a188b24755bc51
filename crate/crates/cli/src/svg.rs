//! Minimal self-contained SVG line/histogram plots.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 48.0;

pub const BLUE: &str = "#1f77b4";
pub const RED: &str = "#d62728";
pub const GREY: &str = "#7f7f7f";
pub const GREEN: &str = "#2ca02c";

enum Element {
    Line {
        points: Vec<(f64, f64)>,
        color: String,
        step: bool,
    },
    Bars {
        bins: Vec<(f64, f64, f64)>,
        color: String,
    },
    Points {
        points: Vec<(f64, f64)>,
        color: String,
    },
    VLine {
        x: f64,
        color: String,
        label: String,
    },
}

/// A single-panel plot accumulated element by element.
pub struct Plot {
    title: String,
    xlabel: String,
    ylabel: String,
    elements: Vec<Element>,
    legend: Vec<(String, String)>,
}

/// Equal-width histogram of `values` as `(left, right, density)` bins.
pub fn histogram(values: &[f64], bins: usize) -> Vec<(f64, f64, f64)> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        hi = lo + 1.0;
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for v in &finite {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let total = finite.len() as f64;
    counts
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let left = lo + k as f64 * width;
            (left, left + width, c as f64 / (total * width))
        })
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Roughly five round tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![lo];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-3) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

impl Plot {
    pub fn new(title: &str, xlabel: &str, ylabel: &str) -> Self {
        Plot {
            title: title.to_string(),
            xlabel: xlabel.to_string(),
            ylabel: ylabel.to_string(),
            elements: Vec::new(),
            legend: Vec::new(),
        }
    }

    fn legend_entry(&mut self, label: &str, color: &str) {
        if !label.is_empty() {
            self.legend.push((label.to_string(), color.to_string()));
        }
    }

    pub fn line(mut self, points: Vec<(f64, f64)>, color: &str, label: &str) -> Self {
        self.legend_entry(label, color);
        self.elements.push(Element::Line {
            points,
            color: color.into(),
            step: false,
        });
        self
    }

    /// Staircase through `points`, holding each value until the next x.
    pub fn step(mut self, points: Vec<(f64, f64)>, color: &str, label: &str) -> Self {
        self.legend_entry(label, color);
        self.elements.push(Element::Line {
            points,
            color: color.into(),
            step: true,
        });
        self
    }

    pub fn bars(mut self, bins: Vec<(f64, f64, f64)>, color: &str, label: &str) -> Self {
        self.legend_entry(label, color);
        self.elements.push(Element::Bars {
            bins,
            color: color.into(),
        });
        self
    }

    pub fn points(mut self, points: Vec<(f64, f64)>, color: &str, label: &str) -> Self {
        self.legend_entry(label, color);
        self.elements.push(Element::Points {
            points,
            color: color.into(),
        });
        self
    }

    pub fn vline(mut self, x: f64, color: &str, label: &str) -> Self {
        if x.is_finite() {
            self.elements.push(Element::VLine {
                x,
                color: color.into(),
                label: label.into(),
            });
        }
        self
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let (mut x0, mut x1, mut y0, mut y1) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        let mut see = |x: f64, y: Option<f64>| {
            if x.is_finite() {
                x0 = x0.min(x);
                x1 = x1.max(x);
            }
            if let Some(y) = y.filter(|y| y.is_finite()) {
                y0 = y0.min(y);
                y1 = y1.max(y);
            }
        };
        for e in &self.elements {
            match e {
                Element::Line { points, .. } | Element::Points { points, .. } => {
                    points.iter().for_each(|&(x, y)| see(x, Some(y)))
                }
                Element::Bars { bins, .. } => bins.iter().for_each(|&(a, b, h)| {
                    see(a, Some(0.0));
                    see(b, Some(h));
                }),
                Element::VLine { x, .. } => see(*x, None),
            }
        }
        if !x0.is_finite() {
            (x0, x1) = (0.0, 1.0);
        }
        if !y0.is_finite() {
            (y0, y1) = (0.0, 1.0);
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
        let pad = 0.04 * (y1 - y0);
        (x0, x1, y0 - if y0 == 0.0 { 0.0 } else { pad }, y1 + pad)
    }

    /// Render, embedding `metadata` (typically the run manifest) verbatim
    /// inside a `<metadata>` element.
    pub fn render(&self, metadata: Option<&str>) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = |x: f64| MARGIN_LEFT + (x.clamp(x0, x1) - x0) / (x1 - x0) * pw;
        let sy = |y: f64| MARGIN_TOP + ph - (y.clamp(y0, y1) - y0) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        );
        if let Some(meta) = metadata {
            let _ = writeln!(s, "<metadata>{}</metadata>", escape(meta));
        }
        let _ = writeln!(
            s,
            r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        for t in ticks(x0, x1) {
            let x = sx(t);
            let _ = writeln!(
                s,
                r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                MARGIN_TOP + ph,
                MARGIN_TOP + ph + 4.0,
                MARGIN_TOP + ph + 16.0,
                fmt_tick(t)
            );
        }
        for t in ticks(y0, y1) {
            let y = sy(t);
            let _ = writeln!(
                s,
                r#"<line x1="{:.1}" y1="{y:.1}" x2="{MARGIN_LEFT}" y2="{y:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                MARGIN_LEFT - 4.0,
                MARGIN_LEFT - 6.0,
                y + 4.0,
                fmt_tick(t)
            );
        }
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + pw / 2.0,
            HEIGHT - 10.0,
            escape(&self.xlabel)
        );
        let _ = writeln!(
            s,
            r#"<text transform="translate(16,{:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
            MARGIN_TOP + ph / 2.0,
            escape(&self.ylabel)
        );

        for e in &self.elements {
            match e {
                Element::Bars { bins, color } => {
                    for &(a, b, h) in bins {
                        let _ = writeln!(
                            s,
                            r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{color}" fill-opacity="0.45" stroke="{color}" stroke-width="0.5"/>"#,
                            sx(a),
                            sy(h),
                            (sx(b) - sx(a)).max(0.0),
                            (sy(y0.max(0.0)) - sy(h)).max(0.0)
                        );
                    }
                }
                Element::Line {
                    points,
                    color,
                    step,
                } => {
                    let mut path = Vec::new();
                    let finite: Vec<&(f64, f64)> = points
                        .iter()
                        .filter(|p| p.0.is_finite() && p.1.is_finite())
                        .collect();
                    for (k, &&(x, y)) in finite.iter().enumerate() {
                        if *step && k > 0 {
                            path.push(format!("{:.1},{:.1}", sx(x), sy(finite[k - 1].1)));
                        }
                        path.push(format!("{:.1},{:.1}", sx(x), sy(y)));
                    }
                    let _ = writeln!(
                        s,
                        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                        path.join(" ")
                    );
                }
                Element::Points { points, color } => {
                    for &(x, y) in points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
                        let _ = writeln!(
                            s,
                            r#"<circle cx="{:.1}" cy="{:.1}" r="2" fill="{color}"/>"#,
                            sx(x),
                            sy(y)
                        );
                    }
                }
                Element::VLine { x, color, label } => {
                    let xx = sx(*x);
                    let _ = writeln!(
                        s,
                        r#"<line x1="{xx:.1}" y1="{MARGIN_TOP}" x2="{xx:.1}" y2="{:.1}" stroke="{color}" stroke-width="1.5" stroke-dasharray="5,3"/><text x="{:.1}" y="{:.1}" fill="{color}">{}</text>"#,
                        MARGIN_TOP + ph,
                        xx + 3.0,
                        MARGIN_TOP + 12.0,
                        escape(label)
                    );
                }
            }
        }
        for (k, (label, color)) in self.legend.iter().enumerate() {
            let y = MARGIN_TOP + 14.0 + 14.0 * k as f64;
            let x = MARGIN_LEFT + pw - 150.0;
            let _ = writeln!(
                s,
                r#"<rect x="{x:.1}" y="{:.1}" width="10" height="10" fill="{color}"/><text x="{:.1}" y="{y:.1}">{}</text>"#,
                y - 9.0,
                x + 14.0,
                escape(label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round() {
        let t = ticks(0.0, 1.0);
        assert_eq!(t.len(), 6);
        for (k, v) in t.iter().enumerate() {
            assert!((v - 0.2 * k as f64).abs() < 1e-12);
        }
        assert!(ticks(-3.0, 7.0).contains(&0.0));
    }

    #[test]
    fn histogram_integrates_to_one() {
        let h = histogram(&[0.0, 0.1, 0.5, 0.9, 1.0], 4);
        let area: f64 = h.iter().map(|&(a, b, d)| (b - a) * d).sum();
        assert!((area - 1.0).abs() < 1e-12);
    }

    #[test]
    fn renders_escaped_text() {
        let svg = Plot::new("a < b", "x", "y")
            .line(vec![(0.0, 0.0), (1.0, 1.0)], BLUE, "f")
            .render(Some("{\"k\":1}"));
        assert!(svg.starts_with("<svg") && svg.contains("a &lt; b") && svg.contains("<metadata>"));
    }
}
