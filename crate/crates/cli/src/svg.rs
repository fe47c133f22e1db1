//! Minimal SVG line plots.

use std::fmt::Write;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 320.0;
const MARGIN: (f64, f64, f64, f64) = (60.0, 20.0, 30.0, 50.0); // left, right, top, bottom

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
    pub hline: Option<(f64, String)>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if log {
            lo = lo.floor();
            hi = hi.ceil();
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        Axis { lo, hi, log }
    }

    fn map(&self, v: f64, a: f64, b: f64) -> Option<f64> {
        let v = if self.log { v.log10() } else { v };
        v.is_finite().then(|| a + (v - self.lo) / (self.hi - self.lo) * (b - a))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let step = ((self.hi - self.lo) / 6.0).ceil().max(1.0) as i64;
            (self.lo as i64..=self.hi as i64)
                .step_by(step as usize)
                .map(|e| (10f64.powi(e as i32), format!("1e{e}")))
                .collect()
        } else {
            (0..=4)
                .map(|i| {
                    let v = self.lo + (self.hi - self.lo) * i as f64 / 4.0;
                    (v, format!("{}", (v * 1e4).round() / 1e4))
                })
                .collect()
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn panel(out: &mut String, p: &Panel, x0: f64) {
    let (ml, mr, mt, mb) = MARGIN;
    let (left, right, top, bottom) = (x0 + ml, x0 + PANEL_W - mr, mt, PANEL_H - mb);
    let keep = |y: f64| !p.log_y || y > 0.0;
    let xs = Axis::fit(p.series.iter().flat_map(|s| s.points.iter().map(|q| q.0)), false);
    let ys = Axis::fit(
        p.series
            .iter()
            .flat_map(|s| s.points.iter().map(|q| q.1))
            .chain(p.hline.as_ref().map(|h| h.0))
            .filter(|&y| keep(y)),
        p.log_y,
    );
    let _ = writeln!(out, r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#, right - left, bottom - top);
    let _ = writeln!(out, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#, (left + right) / 2.0, escape(&p.title));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#, (left + right) / 2.0, PANEL_H - 12.0, escape(&p.x_label));
    let _ = writeln!(
        out,
        r#"<text x="{0}" y="{1}" text-anchor="middle" font-size="12" transform="rotate(-90 {0} {1})">{2}</text>"#,
        x0 + 14.0,
        (top + bottom) / 2.0,
        escape(&p.y_label)
    );
    for (v, label) in xs.ticks() {
        if let Some(x) = xs.map(v, left, right) {
            let _ = writeln!(out, r#"<line x1="{x:.1}" y1="{bottom}" x2="{x:.1}" y2="{}" stroke="black"/>"#, bottom + 4.0);
            let _ = writeln!(out, r#"<text x="{x:.1}" y="{}" text-anchor="middle" font-size="10">{label}</text>"#, bottom + 16.0);
        }
    }
    for (v, label) in ys.ticks() {
        if let Some(y) = ys.map(v, bottom, top) {
            let _ = writeln!(out, r#"<line x1="{}" y1="{y:.1}" x2="{left}" y2="{y:.1}" stroke="black"/>"#, left - 4.0);
            let _ = writeln!(out, r#"<text x="{}" y="{:.1}" text-anchor="end" font-size="10">{label}</text>"#, left - 6.0, y + 3.0);
        }
    }
    if let Some((v, label)) = &p.hline {
        if let Some(y) = ys.map(*v, bottom, top) {
            let _ = writeln!(out, r#"<line x1="{left}" y1="{y:.1}" x2="{right}" y2="{y:.1}" stroke="gray" stroke-dasharray="5,4"/>"#);
            let _ = writeln!(out, r#"<text x="{}" y="{:.1}" text-anchor="end" font-size="10" fill="gray">{}</text>"#, right - 4.0, y - 4.0, escape(label));
        }
    }
    for (i, s) in p.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s
            .points
            .iter()
            .filter(|q| keep(q.1))
            .filter_map(|&(x, y)| Some((xs.map(x, left, right)?, ys.map(y, bottom, top)?)))
            .collect();
        let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, path.join(" "));
        for (x, y) in &pts {
            let _ = writeln!(out, r#"<circle cx="{x:.1}" cy="{y:.1}" r="2.5" fill="{color}"/>"#);
        }
        let ly = top + 14.0 + 14.0 * i as f64;
        let _ = writeln!(out, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, left + 8.0, left + 24.0);
        let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="10">{}</text>"#, left + 28.0, ly + 3.0, escape(&s.name));
    }
}

/// Panels side by side.
pub fn render(panels: &[Panel]) -> String {
    let width = PANEL_W * panels.len() as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{PANEL_H}" viewBox="0 0 {width} {PANEL_H}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, p) in panels.iter().enumerate() {
        panel(&mut out, p, PANEL_W * i as f64);
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_series_and_skips_nonpositive_on_log_axis() {
        let p = Panel {
            title: "err".into(),
            x_label: "U/t".into(),
            y_label: "dE".into(),
            log_y: true,
            series: vec![Series { name: "a<b".into(), points: vec![(0.0, 0.0), (1.0, 1e-3), (2.0, 1e-6)] }],
            hline: Some((1e-4, "line".into())),
        };
        let s = render(&[p]);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("a&lt;b"));
        assert_eq!(s.matches("<circle").count(), 2);
        assert!(s.contains("stroke-dasharray"));
    }

    #[test]
    fn flat_data_gets_a_nonempty_range() {
        let a = Axis::fit([3.0, 3.0].into_iter(), false);
        assert!(a.hi > a.lo);
        assert_eq!(a.map(3.0, 0.0, 10.0), Some(5.0));
    }
}
