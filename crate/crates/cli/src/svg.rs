//! Minimal SVG emitters: a heat map over the moduli triangle and a log-log
//! polyline. Output depends only on the input numbers.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn axes(s: &mut String, x_label: &str, y_label: &str, x_range: (f64, f64), y_range: (f64, f64)) {
    let (x0, y0) = (MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<line x1="{x0}" y1="{y0}" x2="{}" y2="{y0}" stroke="black"/>"#,
        WIDTH - MARGIN
    );
    let _ = writeln!(
        s,
        r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{MARGIN}" stroke="black"/>"#
    );
    let text = |s: &mut String, x: f64, y: f64, anchor: &str, t: &str| {
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor}" font-family="sans-serif" font-size="12">{}</text>"#,
            escape(t)
        );
    };
    text(s, WIDTH / 2.0, HEIGHT - 15.0, "middle", x_label);
    text(s, 15.0, HEIGHT / 2.0, "start", y_label);
    text(s, x0, y0 + 18.0, "middle", &format!("{:.3}", x_range.0));
    text(
        s,
        WIDTH - MARGIN,
        y0 + 18.0,
        "middle",
        &format!("{:.3}", x_range.1),
    );
    text(s, x0 - 6.0, y0, "end", &format!("{:.3}", y_range.0));
    text(
        s,
        x0 - 6.0,
        MARGIN + 4.0,
        "end",
        &format!("{:.3}", y_range.1),
    );
}

/// Blue (low) to red (high).
fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * t).round() as u8;
    let b = (255.0 * (1.0 - t)).round() as u8;
    let g = (255.0 * (1.0 - (2.0 * t - 1.0).abs()) * 0.6).round() as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Cells at `(alpha, beta)` coloured by `ln xi`; `cell` is the grid spacing.
pub fn moduli_heat_map(cells: &[(f64, f64, f64)], cell: f64, title: &str) -> String {
    let mut s = header(title);
    let (ax, ay) = ((0.0, 1.0 / 3.0), (0.0, 0.5));
    axes(&mut s, "alpha", "beta", ax, ay);
    let sx = (WIDTH - 2.0 * MARGIN) / (ax.1 - ax.0);
    let sy = (HEIGHT - 2.0 * MARGIN) / (ay.1 - ay.0);
    let logs: Vec<f64> = cells.iter().map(|c| c.2.ln()).collect();
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    for ((a, b, xi), l) in cells.iter().zip(&logs) {
        let x = MARGIN + (a - 0.5 * cell - ax.0) * sx;
        let y = HEIGHT - MARGIN - (b + 0.5 * cell - ay.0) * sy;
        let _ = writeln!(
            s,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}"><title>alpha={a} beta={b} xi={xi}</title></rect>"#,
            cell * sx,
            cell * sy,
            color((l - lo) / span)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-family="sans-serif" font-size="12">xi from {:.4} (blue) to {:.4} (red)</text>"#,
        WIDTH - MARGIN,
        MARGIN - 8.0,
        lo.exp(),
        hi.exp()
    );
    s.push_str("</svg>\n");
    s
}

/// Polyline of `(ln x, ln y)` with markers.
pub fn log_log_plot(points: &[(f64, f64)], x_label: &str, y_label: &str, title: &str) -> String {
    let mut s = header(title);
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let range = |f: fn(&(f64, f64)) -> f64| {
        let lo = pts.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        if pts.is_empty() {
            (0.0, 1.0)
        } else if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let (rx, ry) = (range(|p| p.0), range(|p| p.1));
    axes(
        &mut s,
        &format!("ln {x_label}"),
        &format!("ln {y_label}"),
        rx,
        ry,
    );
    let map = |p: &(f64, f64)| {
        (
            MARGIN + (p.0 - rx.0) / (rx.1 - rx.0) * (WIDTH - 2.0 * MARGIN),
            HEIGHT - MARGIN - (p.1 - ry.0) / (ry.1 - ry.0) * (HEIGHT - 2.0 * MARGIN),
        )
    };
    let coords: Vec<String> = pts
        .iter()
        .map(|p| {
            let (x, y) = map(p);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
        coords.join(" ")
    );
    for p in &pts {
        let (x, y) = map(p);
        let _ = writeln!(
            s,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="steelblue"/>"#
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heat_map_is_well_formed() {
        let s = moduli_heat_map(
            &[(1.0 / 3.0, 1.0 / 3.0, 70.18), (0.1, 0.45, 133.0)],
            1.0 / 30.0,
            "xi",
        );
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert_eq!(s.matches("<rect x=").count(), 2);
        assert!(s.contains("#0000ff") && s.contains("#ff0000"));
    }

    #[test]
    fn plot_skips_nonpositive_points() {
        let s = log_log_plot(
            &[(0.1, 10.0), (0.05, 20.0), (0.0, 1.0)],
            "alpha",
            "xi",
            "a < b",
        );
        assert_eq!(s.matches("<circle").count(), 2);
        assert!(s.contains("a &lt; b"));
    }
}
