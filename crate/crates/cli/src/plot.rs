//! Minimal hand-written SVG charts. Output depends only on the inputs, so
//! plots are byte-reproducible.

use std::fmt::Write;

use qtraffic::eval::{BoxStats, ConvergenceHistory};

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

pub const CLASSIC_COLOR: &str = "#1f77b4";
pub const HYBRID_COLOR: &str = "#ff7f0e";

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let (y0, y1) = if (y1 - y0).abs() < 1e-12 { (y0 - 0.5, y1 + 0.5) } else { (y0, y1) };
        let x1 = if x1 <= x0 { x0 + 1.0 } else { x1 };
        Self { x0, x1, y0, y1 }
    }

    fn x(&self, v: f64) -> f64 {
        LEFT + (v - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        H - BOTTOM - (v - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(out, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(out, "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>", W / 2.0, escape(title));
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str, x_ticks: &[(f64, String)]) {
    let (l, r, t, b) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(out, "<path d=\"M{l} {t}V{b}H{r}\" stroke=\"black\" fill=\"none\"/>");
    for i in 0..=4 {
        let v = f.y0 + (f.y1 - f.y0) * i as f64 / 4.0;
        let y = f.y(v);
        let _ = writeln!(out, "<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{l}\" y2=\"{y:.2}\" stroke=\"black\"/>", l - 4.0);
        let _ = writeln!(out, "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>", l - 6.0, y + 4.0, fmt_tick(v));
    }
    for (v, label) in x_ticks {
        let x = f.x(*v);
        let _ = writeln!(out, "<line x1=\"{x:.2}\" y1=\"{b}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"black\"/>", b + 4.0);
        let _ = writeln!(out, "<text x=\"{x:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>", b + 18.0, escape(label));
    }
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>", (l + r) / 2.0, H - 10.0, escape(x_label));
    let _ = writeln!(
        out,
        "<text transform=\"translate(16 {}) rotate(-90)\" text-anchor=\"middle\">{}</text>",
        (t + b) / 2.0,
        escape(y_label)
    );
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn polyline(points: impl Iterator<Item = (f64, f64)>) -> String {
    points.map(|(x, y)| format!("{x:.2},{y:.2}")).collect::<Vec<_>>().join(" ")
}

/// Cross-fold mean training loss per epoch with a 1-σ band and the
/// individual fold curves.
pub fn loss_curve_svg(title: &str, history: &ConvergenceHistory) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let epochs = history.mean.len();
    if epochs == 0 {
        out.push_str("</svg>\n");
        return out;
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (m, s) in history.mean.iter().zip(&history.std) {
        lo = lo.min(m - s);
        hi = hi.max(m + s);
    }
    for fold in &history.train {
        for &v in fold.iter().take(epochs) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let f = Frame::new(1.0, epochs as f64, lo.min(0.0), hi);
    let step = epochs.div_ceil(10).max(1);
    let ticks: Vec<(f64, String)> = (1..=epochs).step_by(step).map(|e| (e as f64, e.to_string())).collect();
    axes(&mut out, &f, "epoch", "training loss (MSE)", &ticks);

    let upper = (0..epochs).map(|e| (f.x((e + 1) as f64), f.y(history.mean[e] + history.std[e])));
    let lower = (0..epochs).rev().map(|e| (f.x((e + 1) as f64), f.y(history.mean[e] - history.std[e])));
    let _ = writeln!(
        out,
        "<polygon class=\"sigma-band\" points=\"{}\" fill=\"{CLASSIC_COLOR}\" fill-opacity=\"0.2\" stroke=\"none\"/>",
        polyline(upper.chain(lower))
    );
    for fold in &history.train {
        let pts = fold.iter().take(epochs).enumerate().map(|(e, &v)| (f.x((e + 1) as f64), f.y(v)));
        let _ = writeln!(
            out,
            "<polyline class=\"fold\" points=\"{}\" fill=\"none\" stroke=\"#888\" stroke-width=\"0.8\"/>",
            polyline(pts)
        );
    }
    let pts = history.mean.iter().enumerate().map(|(e, &v)| (f.x((e + 1) as f64), f.y(v)));
    let _ = writeln!(
        out,
        "<polyline class=\"mean\" points=\"{}\" fill=\"none\" stroke=\"{CLASSIC_COLOR}\" stroke-width=\"2\"/>",
        polyline(pts)
    );
    out.push_str("</svg>\n");
    out
}

/// One box per entry, coloured by variant.
pub fn boxplot_svg(title: &str, y_label: &str, entries: &[(String, bool, Option<BoxStats>)]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for b in entries.iter().filter_map(|e| e.2.as_ref()) {
        lo = lo.min(b.whisker_low);
        hi = hi.max(b.whisker_high);
        for &o in &b.outliers {
            lo = lo.min(o);
            hi = hi.max(o);
        }
    }
    if !lo.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    let n = entries.len().max(1);
    let f = Frame::new(0.0, n as f64, lo, hi);
    let ticks: Vec<(f64, String)> = entries.iter().enumerate().map(|(i, e)| (i as f64 + 0.5, e.0.clone())).collect();
    axes(&mut out, &f, "model", y_label, &ticks);
    let half = 0.3 * (f.x(1.0) - f.x(0.0));
    for (i, (_, hybrid, stats)) in entries.iter().enumerate() {
        let Some(b) = stats else { continue };
        let color = if *hybrid { HYBRID_COLOR } else { CLASSIC_COLOR };
        let cx = f.x(i as f64 + 0.5);
        let (y1, ym, y3) = (f.y(b.q1), f.y(b.median), f.y(b.q3));
        let _ = writeln!(
            out,
            "<line x1=\"{cx:.2}\" y1=\"{:.2}\" x2=\"{cx:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
            f.y(b.whisker_low),
            f.y(b.whisker_high)
        );
        let _ = writeln!(
            out,
            "<rect x=\"{:.2}\" y=\"{y3:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{color}\" stroke=\"black\"/>",
            cx - half,
            2.0 * half,
            (y1 - y3).max(0.5)
        );
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{ym:.2}\" x2=\"{:.2}\" y2=\"{ym:.2}\" stroke=\"black\" stroke-width=\"2\"/>",
            cx - half,
            cx + half
        );
        for &o in &b.outliers {
            let _ = writeln!(out, "<circle cx=\"{cx:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"none\" stroke=\"black\"/>", f.y(o));
        }
    }
    out.push_str("</svg>\n");
    out
}
