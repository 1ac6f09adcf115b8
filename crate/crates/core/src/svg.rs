//! Minimal fixed-size SVG charts (800×500): polylines with optional error
//! bars, scatter points, histogram bars and horizontal reference lines.

use std::fmt::Write;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#6a3d9a", "#2ca02c", "#ff7f0e", "#444444"];

#[derive(Clone, Debug, Default)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    /// Optional `(low, high)` per point, drawn as vertical segments.
    pub error: Option<Vec<(f64, f64)>>,
}

#[derive(Clone, Debug, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub lines: Vec<Series>,
    pub scatter: Vec<Series>,
    /// `(low, high, count)` bars.
    pub bars: Vec<(f64, f64, f64)>,
    pub hlines: Vec<(String, f64)>,
    /// Draw `y = x` across the plot area.
    pub diagonal: bool,
    pub notes: Vec<String>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.0 {
        2.0
    } else if norm < 7.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn fmt_tick(v: f64, step: f64) -> String {
    let decimals = if step >= 1.0 { 0 } else { (-step.log10().floor()) as usize };
    format!("{:.*}", decimals, v)
}

impl Plot {
    fn bounds(&self) -> (f64, f64, f64, f64) {
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for s in self.lines.iter().chain(&self.scatter) {
            for &(x, y) in &s.points {
                xs.push(x);
                ys.push(y);
            }
            if let Some(err) = &s.error {
                for &(lo, hi) in err {
                    ys.push(lo);
                    ys.push(hi);
                }
            }
        }
        for &(lo, hi, c) in &self.bars {
            xs.push(lo);
            xs.push(hi);
            ys.push(0.0);
            ys.push(c);
        }
        for (_, y) in &self.hlines {
            ys.push(*y);
        }
        let finite = |v: &Vec<f64>| v.iter().cloned().filter(|x| x.is_finite()).collect::<Vec<_>>();
        let (xs, ys) = (finite(&xs), finite(&ys));
        let range = |v: &[f64]| {
            if v.is_empty() {
                return (0.0, 1.0);
            }
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                let pad = (hi - lo) * 0.05;
                (lo - pad, hi + pad)
            }
        };
        let (x0, x1) = range(&xs);
        let (mut y0, mut y1) = range(&ys);
        if self.diagonal {
            y0 = y0.min(x0);
            y1 = y1.max(x1);
        }
        (x0, x1, y0, y1)
    }

    pub fn render(&self) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| MARGIN_TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            MARGIN_LEFT + pw / 2.0,
            escape(&self.title)
        );

        // grid and ticks
        let xstep = nice_step(x1 - x0);
        let mut x = (x0 / xstep).ceil() * xstep;
        while x <= x1 + 1e-9 {
            let px = sx(x);
            let _ = writeln!(
                out,
                r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#e0e0e0"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
                MARGIN_TOP,
                MARGIN_TOP + ph,
                MARGIN_TOP + ph + 16.0,
                fmt_tick(x, xstep)
            );
            x += xstep;
        }
        let ystep = nice_step(y1 - y0);
        let mut y = (y0 / ystep).ceil() * ystep;
        while y <= y1 + 1e-9 {
            let py = sy(y);
            let _ = writeln!(
                out,
                r##"<line x1="{:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#e0e0e0"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
                MARGIN_LEFT,
                MARGIN_LEFT + pw,
                MARGIN_LEFT - 6.0,
                py + 4.0,
                fmt_tick(y, ystep)
            );
            y += ystep;
        }
        let _ = writeln!(
            out,
            r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + pw / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
            MARGIN_TOP + ph / 2.0,
            MARGIN_TOP + ph / 2.0,
            escape(&self.y_label)
        );

        for &(lo, hi, c) in &self.bars {
            let (left, right) = (sx(lo), sx(hi));
            let top = sy(c);
            let _ = writeln!(
                out,
                r##"<rect x="{left:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="#6a8fc7" stroke="#35507a" stroke-width="0.5"/>"##,
                (right - left).max(0.5),
                (sy(0.0) - top).max(0.0)
            );
        }

        if self.diagonal {
            let lo = x0.max(y0);
            let hi = x1.min(y1);
            let _ = writeln!(
                out,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#999999" stroke-dasharray="4 3"/>"##,
                sx(lo),
                sy(lo),
                sx(hi),
                sy(hi)
            );
        }

        let mut legend: Vec<(String, &str, bool)> = Vec::new();
        for (i, s) in self.lines.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                pts.join(" ")
            );
            if let Some(err) = &s.error {
                for (&(x, _), &(lo, hi)) in s.points.iter().zip(err) {
                    let px = sx(x);
                    let _ = writeln!(
                        out,
                        r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.2"/>"#,
                        sy(lo),
                        sy(hi)
                    );
                }
            }
            legend.push((s.name.clone(), color, true));
        }
        for (i, s) in self.scatter.iter().enumerate() {
            let color = PALETTE[(i + self.lines.len()) % PALETTE.len()];
            for &(x, y) in &s.points {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="1.6" fill="{color}" fill-opacity="0.5"/>"#,
                    sx(x),
                    sy(y)
                );
            }
            legend.push((s.name.clone(), color, false));
        }
        for (label, yv) in &self.hlines {
            let py = sy(*yv);
            let _ = writeln!(
                out,
                r#"<line x1="{MARGIN_LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="black" stroke-dasharray="2 4" stroke-width="1.5"/>"#,
                MARGIN_LEFT + pw
            );
            legend.push((format!("{label} ({yv:.4})"), "black", true));
        }

        let lx = MARGIN_LEFT + pw + 12.0;
        for (i, (name, color, is_line)) in legend.iter().enumerate() {
            let ly = MARGIN_TOP + 14.0 + 18.0 * i as f64;
            if *is_line {
                let _ = writeln!(
                    out,
                    r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="2"/>"#,
                    ly - 4.0,
                    lx + 20.0,
                    ly - 4.0
                );
            } else {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#,
                    lx + 10.0,
                    ly - 4.0
                );
            }
            let _ = writeln!(out, r#"<text x="{:.1}" y="{ly:.1}">{}</text>"#, lx + 26.0, escape(name));
        }
        for (i, note) in self.notes.iter().enumerate() {
            let ny = MARGIN_TOP + 14.0 + 18.0 * (legend.len() + 1 + i) as f64;
            let _ = writeln!(
                out,
                r##"<text x="{lx:.1}" y="{ny:.1}" font-size="11" fill="#555555">{}</text>"##,
                escape(note)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_all_elements() {
        let plot = Plot {
            title: "a < b".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            lines: vec![Series {
                name: "line".into(),
                points: vec![(0.0, 1.0), (1.0, 2.0)],
                error: Some(vec![(0.9, 1.1), (1.8, 2.2)]),
            }],
            scatter: vec![Series {
                name: "pts".into(),
                points: vec![(0.5, 0.5)],
                error: None,
            }],
            bars: vec![(0.0, 0.5, 3.0)],
            hlines: vec![("optimum".into(), 2.5)],
            diagonal: true,
            notes: vec!["note".into()],
        };
        let svg = plot.render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(r#"width="800""#) && svg.contains(r#"height="500""#));
        assert!(svg.contains("a &lt; b"));
        assert!(svg.contains("<polyline"));
        assert!(svg.contains("<circle"));
        assert!(svg.contains("optimum (2.5000)"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn degenerate_ranges_do_not_panic() {
        let plot = Plot {
            lines: vec![Series {
                name: "flat".into(),
                points: vec![(1.0, 3.0)],
                error: None,
            }],
            ..Plot::default()
        };
        assert!(!plot.render().contains("NaN"));
        assert!(!Plot::default().render().contains("NaN"));
    }
}
