//! Self-contained SVG figures.
//!
//! Everything is emitted by hand with fixed-precision number formatting, so
//! a figure is byte-identical across runs of the same build and inputs.
//! Three plots are produced: the low end of the spectrum, an eigenfunction
//! heat map on the flattened parameter domain, and the λ₁-versus-parameter
//! line of a sweep.

use std::fmt::Write as _;

use capstab_core::spectrum::SpectrumReport;
use capstab_core::TriMesh;

use crate::sweep::SweepRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 48.0;

/// Coordinate formatting: two decimals is below SVG rendering resolution.
fn c(x: f64) -> String {
    format!("{x:.2}")
}

/// Tick-label formatting: short but unambiguous.
fn tick_label(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let a = x.abs();
    if (1e-3..1e4).contains(&a) {
        let s = format!("{x:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{x:.1e}")
    }
}

/// Tick positions covering [lo, hi] at a 1/2/5 × 10^k step.
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm <= 1.0 {
        mag
    } else if norm <= 2.0 {
        2.0 * mag
    } else if norm <= 5.0 {
        5.0 * mag
    } else {
        10.0 * mag
    };
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

struct Frame {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN_L + (v - self.x_lo) / (self.x_hi - self.x_lo) * (WIDTH - MARGIN_L - MARGIN_R)
    }
    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_B - (v - self.y_lo) / (self.y_hi - self.y_lo) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn svg_open(out: &mut String, title: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" \
         font-family=\"Helvetica, Arial, sans-serif\" font-size=\"12\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{tx}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{title}</text>\n",
        W = WIDTH,
        H = HEIGHT,
        tx = c(WIDTH / 2.0),
    );
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str, integer_x: bool) {
    let x0 = MARGIN_L;
    let x1 = WIDTH - MARGIN_R;
    let y0 = HEIGHT - MARGIN_B;
    let y1 = MARGIN_T;
    let _ = write!(
        out,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n",
        c(x0),
        c(y1),
        c(x1 - x0),
        c(y0 - y1),
    );
    for t in ticks(frame.x_lo, frame.x_hi, 6) {
        if integer_x && (t - t.round()).abs() > 1e-9 {
            continue;
        }
        let px = frame.x(t);
        let _ = write!(
            out,
            "<line x1=\"{x}\" y1=\"{y0}\" x2=\"{x}\" y2=\"{y2}\" stroke=\"#444\"/>\n\
             <text x=\"{x}\" y=\"{ty}\" text-anchor=\"middle\">{label}</text>\n",
            x = c(px),
            y0 = c(y0),
            y2 = c(y0 + 5.0),
            ty = c(y0 + 18.0),
            label = tick_label(t),
        );
    }
    for t in ticks(frame.y_lo, frame.y_hi, 6) {
        let py = frame.y(t);
        let _ = write!(
            out,
            "<line x1=\"{x0}\" y1=\"{y}\" x2=\"{x2}\" y2=\"{y}\" stroke=\"#444\"/>\n\
             <text x=\"{tx}\" y=\"{ty}\" text-anchor=\"end\">{label}</text>\n",
            x0 = c(x0),
            x2 = c(x0 - 5.0),
            y = c(py),
            tx = c(x0 - 8.0),
            ty = c(py + 4.0),
            label = tick_label(t),
        );
    }
    let _ = write!(
        out,
        "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\">{x_label}</text>\n\
         <text x=\"16\" y=\"{cy}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {cy})\">{y_label}</text>\n",
        x = c((x0 + x1) / 2.0),
        y = c(HEIGHT - 12.0),
        cy = c((y0 + y1) / 2.0),
    );
}

fn zero_line(out: &mut String, frame: &Frame) {
    if frame.y_lo < 0.0 && frame.y_hi > 0.0 {
        let y = frame.y(0.0);
        let _ = write!(
            out,
            "<line x1=\"{x0}\" y1=\"{y}\" x2=\"{x1}\" y2=\"{y}\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n",
            x0 = c(MARGIN_L),
            x1 = c(WIDTH - MARGIN_R),
            y = c(y),
        );
    }
}

fn pad_range(lo: f64, hi: f64) -> (f64, f64) {
    let span = (hi - lo).max(1e-12);
    (lo - 0.08 * span, hi + 0.08 * span)
}

/// Low end of both eigenvalue sequences: circles for the unconstrained
/// problem, crosses for the area-constrained one, with the numerical zero
/// band shaded.
pub fn spectrum_svg(report: &SpectrumReport, title: &str) -> String {
    let uncon = &report.unconstrained.values;
    let con = &report.constrained.values;
    let count = uncon.len().max(con.len());
    let all_lo = uncon.iter().chain(con.iter()).cloned().fold(f64::INFINITY, f64::min);
    let all_hi = uncon.iter().chain(con.iter()).cloned().fold(f64::NEG_INFINITY, f64::max);
    let (y_lo, y_hi) = pad_range(all_lo.min(-report.eps_zero), all_hi.max(report.eps_zero));
    let frame = Frame { x_lo: -0.5, x_hi: count as f64 - 0.5, y_lo, y_hi };

    let mut out = String::new();
    svg_open(&mut out, title);

    // Numerical zero band.
    let band_top = frame.y(report.eps_zero);
    let band_bot = frame.y(-report.eps_zero);
    let _ = write!(
        out,
        "<rect x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\" fill=\"#f3e9c8\"/>\n",
        x = c(MARGIN_L),
        y = c(band_top),
        w = c(WIDTH - MARGIN_L - MARGIN_R),
        h = c((band_bot - band_top).max(1.0)),
    );
    zero_line(&mut out, &frame);
    axes(&mut out, &frame, "mode index", "eigenvalue", true);

    for (i, v) in uncon.iter().enumerate() {
        let _ = write!(
            out,
            "<circle cx=\"{x}\" cy=\"{y}\" r=\"4\" fill=\"#2c6fbb\" fill-opacity=\"0.85\"/>\n",
            x = c(frame.x(i as f64)),
            y = c(frame.y(*v)),
        );
    }
    for (i, v) in con.iter().enumerate() {
        let (x, y) = (frame.x(i as f64), frame.y(*v));
        let _ = write!(
            out,
            "<path d=\"M {x0} {y0} L {x1} {y1} M {x0} {y1} L {x1} {y0}\" stroke=\"#c2521a\" stroke-width=\"1.8\"/>\n",
            x0 = c(x - 4.0),
            x1 = c(x + 4.0),
            y0 = c(y - 4.0),
            y1 = c(y + 4.0),
        );
    }

    let lx = MARGIN_L + 12.0;
    let _ = write!(
        out,
        "<circle cx=\"{lx}\" cy=\"{y1}\" r=\"4\" fill=\"#2c6fbb\"/>\
         <text x=\"{tx}\" y=\"{ty1}\">free</text>\n\
         <path d=\"M {mx0} {my0} L {mx1} {my1} M {mx0} {my1} L {mx1} {my0}\" stroke=\"#c2521a\" stroke-width=\"1.8\"/>\
         <text x=\"{tx}\" y=\"{ty2}\">area-constrained</text>\n",
        lx = c(lx),
        y1 = c(MARGIN_T + 14.0),
        tx = c(lx + 12.0),
        ty1 = c(MARGIN_T + 18.0),
        mx0 = c(lx - 4.0),
        mx1 = c(lx + 4.0),
        my0 = c(MARGIN_T + 28.0),
        my1 = c(MARGIN_T + 36.0),
        ty2 = c(MARGIN_T + 36.0),
    );
    out.push_str("</svg>\n");
    out
}

/// Diverging colour map for signed data: blue for negative, red for
/// positive, near-white at zero. `t` is clamped to [-1, 1].
fn diverging_color(t: f64) -> String {
    let t = t.clamp(-1.0, 1.0);
    let lerp = |a: f64, b: f64, s: f64| a + (b - a) * s;
    let (r, g, b) = if t < 0.0 {
        let s = -t;
        (lerp(245.0, 38.0, s), lerp(245.0, 84.0, s), lerp(245.0, 164.0, s))
    } else {
        (lerp(245.0, 186.0, t), lerp(245.0, 36.0, t), lerp(245.0, 42.0, t))
    };
    format!("#{:02x}{:02x}{:02x}", r.round() as u8, g.round() as u8, b.round() as u8)
}

/// Flat-shaded heat map of a vertex scalar over the mesh's parameter
/// domain. Returns `None` when the mesh carries no parameter coordinates.
pub fn heatmap_svg(mesh: &TriMesh, values: &[f64], title: &str) -> Option<String> {
    let params = mesh.params.as_ref()?;
    if params.len() != values.len() {
        return None;
    }
    let (mut u_lo, mut u_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut v_lo, mut v_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in params {
        u_lo = u_lo.min(p[0]);
        u_hi = u_hi.max(p[0]);
        v_lo = v_lo.min(p[1]);
        v_hi = v_hi.max(p[1]);
    }
    let vmax = values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);

    // Fit the parameter box into the plot area preserving aspect ratio.
    let plot_w = WIDTH - MARGIN_L - MARGIN_R - 60.0; // room for the colour bar
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let span_u = (u_hi - u_lo).max(1e-12);
    let span_v = (v_hi - v_lo).max(1e-12);
    let scale = (plot_w / span_u).min(plot_h / span_v);
    let off_x = MARGIN_L + 0.5 * (plot_w - scale * span_u);
    let off_y = MARGIN_T + 0.5 * (plot_h - scale * span_v);
    let px = |p: [f64; 2]| (off_x + (p[0] - u_lo) * scale, off_y + (v_hi - p[1]) * scale);

    let mut out = String::new();
    svg_open(&mut out, title);
    for t in &mesh.triangles {
        let (x0, y0) = px(params[t[0]]);
        let (x1, y1) = px(params[t[1]]);
        let (x2, y2) = px(params[t[2]]);
        let mean = (values[t[0]] + values[t[1]] + values[t[2]]) / 3.0;
        let _ = write!(
            out,
            "<polygon points=\"{},{} {},{} {},{}\" fill=\"{}\"/>\n",
            c(x0),
            c(y0),
            c(x1),
            c(y1),
            c(x2),
            c(y2),
            diverging_color(mean / vmax),
        );
    }

    // Colour bar.
    let bar_x = WIDTH - MARGIN_R - 28.0;
    let bar_h = plot_h;
    let segments = 48;
    for i in 0..segments {
        let t = 1.0 - 2.0 * (i as f64 + 0.5) / segments as f64; // +1 at top
        let y = MARGIN_T + bar_h * i as f64 / segments as f64;
        let _ = write!(
            out,
            "<rect x=\"{x}\" y=\"{y}\" width=\"16\" height=\"{h}\" fill=\"{fill}\"/>\n",
            x = c(bar_x),
            y = c(y),
            h = c(bar_h / segments as f64 + 0.5),
            fill = diverging_color(t),
        );
    }
    let _ = write!(
        out,
        "<rect x=\"{x}\" y=\"{y}\" width=\"16\" height=\"{h}\" fill=\"none\" stroke=\"#444\"/>\n\
         <text x=\"{tx}\" y=\"{ty0}\" text-anchor=\"start\">{top}</text>\n\
         <text x=\"{tx}\" y=\"{ty1}\" text-anchor=\"start\">0</text>\n\
         <text x=\"{tx}\" y=\"{ty2}\" text-anchor=\"start\">{bot}</text>\n",
        x = c(bar_x),
        y = c(MARGIN_T),
        h = c(bar_h),
        tx = c(bar_x - 2.0),
        ty0 = c(MARGIN_T - 6.0),
        ty1 = c(MARGIN_T + bar_h / 2.0 + 4.0),
        ty2 = c(MARGIN_T + bar_h + 14.0),
        top = format!("+{}", tick_label(vmax)),
        bot = format!("-{}", tick_label(vmax)),
    );
    out.push_str("</svg>\n");
    Some(out)
}

/// λ₁ as a function of the swept parameter; failed points leave gaps.
pub fn sweep_svg(rows: &[SweepRow], parameter: &str, title: &str) -> String {
    let pts: Vec<(f64, f64)> =
        rows.iter().filter_map(|r| r.lambda1.map(|l| (r.parameter, l))).collect();
    let (x_lo, x_hi) = if rows.is_empty() {
        (0.0, 1.0)
    } else {
        let lo = rows.iter().map(|r| r.parameter).fold(f64::INFINITY, f64::min);
        let hi = rows.iter().map(|r| r.parameter).fold(f64::NEG_INFINITY, f64::max);
        pad_range(lo, hi)
    };
    let (y_lo, y_hi) = if pts.is_empty() {
        (-1.0, 1.0)
    } else {
        let lo = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        pad_range(lo.min(0.0), hi.max(0.0))
    };
    let frame = Frame { x_lo, x_hi, y_lo, y_hi };

    let mut out = String::new();
    svg_open(&mut out, title);
    zero_line(&mut out, &frame);
    axes(&mut out, &frame, parameter, "lowest eigenvalue", false);

    if pts.len() > 1 {
        let path: Vec<String> =
            pts.iter().map(|(x, y)| format!("{},{}", c(frame.x(*x)), c(frame.y(*y)))).collect();
        let _ = write!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#2c6fbb\" stroke-width=\"1.6\"/>\n",
            path.join(" "),
        );
    }
    for (x, y) in &pts {
        let _ = write!(
            out,
            "<circle cx=\"{x}\" cy=\"{y}\" r=\"4\" fill=\"#2c6fbb\"/>\n",
            x = c(frame.x(*x)),
            y = c(frame.y(*y)),
        );
    }
    for r in rows.iter().filter(|r| r.lambda1.is_none()) {
        let _ = write!(
            out,
            "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\" fill=\"#c2521a\">×</text>\n",
            x = c(frame.x(r.parameter)),
            y = c(HEIGHT - MARGIN_B - 8.0),
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_cover_the_range_at_a_round_step() {
        let t = ticks(-2.3, 7.1, 6);
        assert!(t.len() >= 4 && t.len() <= 10);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        assert!(t.contains(&0.0));
    }

    #[test]
    fn diverging_color_endpoints_and_midpoint() {
        assert_eq!(diverging_color(0.0), "#f5f5f5");
        assert_eq!(diverging_color(-1.0), "#2654a4");
        assert_eq!(diverging_color(1.0), "#ba242a");
        assert_eq!(diverging_color(2.0), diverging_color(1.0));
    }

    #[test]
    fn sweep_plot_marks_failed_points() {
        let rows = vec![
            SweepRow::ok_for_test(0.0, 1.5, -0.2, 0.3, 1, 0),
            SweepRow::failed_for_test(0.5, "build failed"),
        ];
        let svg = sweep_svg(&rows, "height", "sweep");
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("×"));
        assert!(svg.contains("circle"));
    }
}
