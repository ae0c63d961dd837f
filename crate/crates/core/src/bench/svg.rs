//! Minimal SVG line charts for profiles and eigenvalue decay.

use std::fmt::Write;

use super::profiles::StepFunction;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    log_x: bool,
    log_y: bool,
}

impl Frame {
    fn sx(&self, x: f64) -> f64 {
        let (a, b, v) =
            if self.log_x { (self.x_min.log10(), self.x_max.log10(), x.log10()) } else { (self.x_min, self.x_max, x) };
        MARGIN + (v - a) / (b - a).max(1e-300) * (W - 2.0 * MARGIN)
    }

    fn sy(&self, y: f64) -> f64 {
        let (a, b, v) =
            if self.log_y { (self.y_min.log10(), self.y_max.log10(), y.log10()) } else { (self.y_min, self.y_max, y) };
        H - MARGIN - (v - a) / (b - a).max(1e-300) * (H - 2.0 * MARGIN)
    }
}

fn chart(title: &str, x_label: &str, y_label: &str, frame: &Frame, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{title}</text>"#, W / 2.0);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, W / 2.0, H - 16.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{y_label}</text>"#,
        H / 2.0,
        H / 2.0
    );
    for (label, x) in [("min", frame.x_min), ("max", frame.x_max)] {
        let anchor = if label == "min" { "start" } else { "end" };
        let _ =
            writeln!(s, r#"<text x="{}" y="{}" text-anchor="{anchor}">{x:.3e}</text>"#, frame.sx(x), H - MARGIN + 14.0);
    }
    for y in [frame.y_min, frame.y_max] {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{y:.3e}</text>"#, MARGIN - 4.0, frame.sy(y) + 4.0);
    }
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", frame.sx(x), frame.sy(y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, path.join(" "));
        let ly = MARGIN + 16.0 + 16.0 * i as f64;
        let _ = writeln!(s, r#"<text x="{}" y="{ly}" fill="{color}">{name}</text>"#, MARGIN + 8.0);
    }
    s.push_str("</svg>\n");
    s
}

/// Step functions drawn as staircases from the smallest breakpoint onward.
pub fn step_plot(title: &str, x_label: &str, names: &[String], profiles: &[StepFunction]) -> String {
    let xs: Vec<f64> = profiles.iter().flat_map(|p| p.steps.iter().map(|s| s.0)).collect();
    let x_min = xs.iter().copied().fold(f64::INFINITY, f64::min).min(1.0);
    let x_max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(x_min * 2.0).max(x_min + 1.0);
    let x_max = x_max * 1.1;
    let frame = Frame { x_min, x_max, y_min: 0.0, y_max: 1.0, log_x: false, log_y: false };
    let series: Vec<(String, Vec<(f64, f64)>)> = names
        .iter()
        .zip(profiles)
        .map(|(name, p)| {
            let mut pts = vec![(x_min, p.value_at(x_min))];
            for &(x, v) in &p.steps {
                if x > x_min {
                    pts.push((x, pts.last().unwrap().1));
                    pts.push((x, v));
                }
            }
            pts.push((x_max, p.limit()));
            (name.clone(), pts)
        })
        .collect();
    chart(title, x_label, "fraction of problems", &frame, &series)
}

/// Log-log lines, one per series; non-positive values are dropped.
pub fn loglog_plot(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let series: Vec<(String, Vec<(f64, f64)>)> = series
        .iter()
        .map(|(n, pts)| (n.clone(), pts.iter().copied().filter(|&(x, y)| x > 0.0 && y > 0.0).collect()))
        .collect();
    let all: Vec<(f64, f64)> = series.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    let fold = |f: fn(&(f64, f64)) -> f64, init: f64, op: fn(f64, f64) -> f64| all.iter().map(f).fold(init, op);
    let mut frame = Frame {
        x_min: fold(|p| p.0, f64::INFINITY, f64::min),
        x_max: fold(|p| p.0, f64::NEG_INFINITY, f64::max),
        y_min: fold(|p| p.1, f64::INFINITY, f64::min),
        y_max: fold(|p| p.1, f64::NEG_INFINITY, f64::max),
        log_x: true,
        log_y: true,
    };
    if all.is_empty() {
        frame = Frame { x_min: 0.1, x_max: 1.0, y_min: 0.1, y_max: 1.0, ..frame };
    }
    if frame.x_max <= frame.x_min {
        frame.x_max = frame.x_min * 10.0;
    }
    if frame.y_max <= frame.y_min {
        frame.y_max = frame.y_min * 10.0;
    }
    chart(title, x_label, y_label, &frame, &series)
}
