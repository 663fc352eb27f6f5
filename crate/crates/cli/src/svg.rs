//! Minimal SVG figures for a study summary.

use std::fmt::Write;

use mmfbo::bench::{Band, FiveNumber, MethodSummary, StudySummary};

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Clone, Copy)]
enum Scale {
    Linear,
    Log,
}

struct Axis {
    lo: f64,
    hi: f64,
    scale: Scale,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, scale: Scale) -> Option<Self> {
        let usable: Vec<f64> = values
            .filter(|v| v.is_finite() && (matches!(scale, Scale::Linear) || *v > 0.0))
            .map(|v| if matches!(scale, Scale::Log) { v.log10() } else { v })
            .collect();
        let lo = usable.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = usable.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            return None;
        }
        let (lo, hi) = if hi - lo < 1e-12 { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
        let pad = 0.05 * (hi - lo);
        Some(Self { lo: lo - pad, hi: hi + pad, scale })
    }

    fn map(&self, v: f64) -> Option<f64> {
        let t = match self.scale {
            Scale::Log if v > 0.0 && v.is_finite() => v.log10(),
            Scale::Linear if v.is_finite() => v,
            _ => return None,
        };
        Some(H - BOTTOM - (t - self.lo) / (self.hi - self.lo) * (H - TOP - BOTTOM))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        match self.scale {
            Scale::Log => (self.lo.ceil() as i32..=self.hi.floor() as i32)
                .map(|e| (10f64.powi(e), format!("1e{e}")))
                .collect(),
            Scale::Linear => (0..=4)
                .map(|i| {
                    let v = self.lo + (self.hi - self.lo) * i as f64 / 4.0;
                    (v, format!("{v:.3}"))
                })
                .collect(),
        }
    }
}

fn x_of(k: usize, n: usize) -> f64 {
    let span = (n.max(2) - 1) as f64;
    LEFT + k as f64 / span * (W - LEFT - RIGHT)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn frame(out: &mut String, title: &str, xlabel: &str, ylabel: &str, axis: &Axis) {
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, (LEFT + W - RIGHT) / 2.0, escape(title));
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(out, r#"<path d="M{x0} {y0} L{x0} {y1} L{x1} {y1}" fill="none" stroke="black"/>"#);
    for (v, label) in axis.ticks() {
        if let Some(y) = axis.map(v) {
            let _ = writeln!(out, r##"<line x1="{}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{label}</text>"##, x0 - 4.0, x0 - 6.0, y + 4.0);
        }
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, H - 12.0, escape(xlabel));
    let _ = writeln!(out, r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#, (y0 + y1) / 2.0, (y0 + y1) / 2.0, escape(ylabel));
}

fn legend(out: &mut String, i: usize, label: &str) {
    let y = TOP + 10.0 + 18.0 * i as f64;
    let x = W - RIGHT + 15.0;
    let _ = writeln!(out, r#"<rect x="{x}" y="{}" width="14" height="10" fill="{}"/><text x="{}" y="{}">{}</text>"#, y - 9.0, COLORS[i % COLORS.len()], x + 20.0, y, escape(label));
}

fn band_plot(summary: &StudySummary, title: &str, ylabel: &str, pick: fn(&MethodSummary) -> &Band, scale: Scale) -> Option<String> {
    let all = summary.methods.iter().flat_map(|m| {
        let b = pick(m);
        b.q1.iter().chain(&b.median).chain(&b.q3).cloned().collect::<Vec<_>>()
    });
    let axis = Axis::new(all, scale)?;
    let mut out = String::new();
    frame(&mut out, title, "evaluation", ylabel, &axis);
    for (i, m) in summary.methods.iter().enumerate() {
        let b = pick(m);
        let n = b.median.len();
        let color = COLORS[i % COLORS.len()];
        let upper: Vec<String> = (0..n).filter_map(|k| axis.map(b.q3[k]).map(|y| format!("{:.2},{y:.2}", x_of(k, n)))).collect();
        let lower: Vec<String> = (0..n).rev().filter_map(|k| axis.map(b.q1[k]).map(|y| format!("{:.2},{y:.2}", x_of(k, n)))).collect();
        if !upper.is_empty() && !lower.is_empty() {
            let _ = writeln!(out, r#"<polygon points="{} {}" fill="{color}" fill-opacity="0.18" stroke="none"/>"#, upper.join(" "), lower.join(" "));
        }
        let line: Vec<String> = (0..n).filter_map(|k| axis.map(b.median[k]).map(|y| format!("{:.2},{y:.2}", x_of(k, n)))).collect();
        if !line.is_empty() {
            let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, line.join(" "));
        }
        legend(&mut out, i, m.method.as_str());
    }
    out.push_str("</svg>\n");
    Some(out)
}

fn box_plot(summary: &StudySummary, title: &str, ylabel: &str, pick: fn(&MethodSummary) -> FiveNumber, scale: Scale) -> Option<String> {
    let all = summary.methods.iter().flat_map(|m| {
        let f = pick(m);
        [f.min, f.q1, f.median, f.q3, f.max]
    });
    let axis = Axis::new(all, scale)?;
    let mut out = String::new();
    frame(&mut out, title, "method", ylabel, &axis);
    let n = summary.methods.len();
    let slot = (W - LEFT - RIGHT) / n as f64;
    for (i, m) in summary.methods.iter().enumerate() {
        let f = pick(m);
        let cx = LEFT + slot * (i as f64 + 0.5);
        let half = (slot * 0.25).min(30.0);
        let color = COLORS[i % COLORS.len()];
        if let (Some(lo), Some(hi)) = (axis.map(f.min), axis.map(f.max)) {
            let _ = writeln!(out, r#"<line x1="{cx:.2}" y1="{lo:.2}" x2="{cx:.2}" y2="{hi:.2}" stroke="{color}"/>"#);
        }
        if let (Some(q1), Some(q3)) = (axis.map(f.q1), axis.map(f.q3)) {
            let _ = writeln!(out, r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}" fill-opacity="0.3" stroke="{color}"/>"#, cx - half, q3.min(q1), 2.0 * half, (q1 - q3).abs());
        }
        if let Some(med) = axis.map(f.median) {
            let _ = writeln!(out, r#"<line x1="{:.2}" y1="{med:.2}" x2="{:.2}" y2="{med:.2}" stroke="black" stroke-width="2"/>"#, cx - half, cx + half);
        }
        let _ = writeln!(out, r#"<text x="{cx:.2}" y="{}" text-anchor="middle">{}</text>"#, H - BOTTOM + 16.0, escape(m.method.as_str()));
    }
    out.push_str("</svg>\n");
    Some(out)
}

/// The four standard figures as `(file name, svg)`; figures without any
/// plottable value are omitted.
pub fn figures(summary: &StudySummary) -> Vec<(&'static str, String)> {
    if summary.methods.is_empty() {
        return Vec::new();
    }
    let title = |what: &str| format!("{} {what} (R = {})", summary.oracle, summary.replications);
    let mut out = Vec::new();
    let plots = [
        ("regret.svg", band_plot(summary, &title("regret"), "regret", |m| &m.regret, Scale::Log)),
        ("normalized_regret.svg", band_plot(summary, &title("normalized regret"), "r / r0", |m| &m.normalized_regret, Scale::Log)),
        ("final_regret.svg", box_plot(summary, &title("final regret"), "regret", |m| m.final_regret, Scale::Log)),
        ("auoc.svg", box_plot(summary, &title("AUOC"), "AUOC", |m| m.auoc, Scale::Linear)),
    ];
    for (name, svg) in plots {
        match svg {
            Some(s) => out.push((name, s)),
            None => log::warn!("{name}: nothing to plot"),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_axis_skips_nonpositive() {
        let a = Axis::new([0.0, -1.0, 1e-3, 1.0, f64::INFINITY].into_iter(), Scale::Log).unwrap();
        assert!(a.map(0.0).is_none());
        assert!(a.map(1e-3).unwrap() > a.map(1.0).unwrap());
        assert_eq!(a.ticks().len(), 4);
        assert!(Axis::new([0.0, f64::NAN].into_iter(), Scale::Log).is_none());
    }

    #[test]
    fn labels_are_escaped() {
        assert_eq!(escape("a<b&c>"), "a&lt;b&amp;c&gt;");
    }
}
