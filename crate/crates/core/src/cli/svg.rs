use std::fmt::Write;

use crate::netsim::SimResult;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
/// Polylines are thinned to about this many vertices.
const MAX_POINTS: usize = 2000;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.2}")
    }
}

/// Output trajectories as an 800×500 SVG, one polyline per agent output component.
pub fn plot_outputs(sim: &SimResult, title: &str) -> String {
    let len = sim.times.len();
    let (t0, t1) = match (sim.times.first(), sim.times.last()) {
        (Some(&a), Some(&b)) if b > a => (a, b),
        (Some(&a), _) => (a, a + 1.0),
        _ => (0.0, 1.0),
    };
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in sim.y.iter().flatten().filter(|v| v.is_finite()) {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    if !lo.is_finite() {
        (lo, hi) = (-1.0, 1.0);
    }
    if hi - lo < 1e-12 * (1.0 + hi.abs()) {
        (lo, hi) = (lo - 1.0, hi + 1.0);
    }
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |t: f64| LEFT + (t - t0) / (t1 - t0) * pw;
    let sy = |y: f64| TOP + (hi - y) / (hi - lo) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    // axes, ticks and labels
    let (x0, y0, x1, y1) = (LEFT, TOP + ph, LEFT + pw, TOP);
    let _ = writeln!(s, r#"<g stroke="black" stroke-width="1" fill="none">"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>"#);
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="11">"#);
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let t = t0 + f * (t1 - t0);
        let y = lo + f * (hi - lo);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, sx(t), y0 + 16.0, fmt_tick(t));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, x0 - 6.0, sy(y) + 4.0, fmt_tick(y));
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">t</text>"#, LEFT + pw / 2.0, HEIGHT - 10.0);
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">y</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );
    let _ = writeln!(s, "</g>");

    let step = len.div_ceil(MAX_POINTS).max(1);
    let mut line = 0;
    for (i, traj) in sim.y.iter().enumerate() {
        for d in 0..sim.dim {
            let mut pts = String::new();
            let mut ks: Vec<usize> = (0..len).step_by(step).collect();
            if ks.last() != Some(&(len - 1)) && len > 0 {
                ks.push(len - 1);
            }
            for k in ks {
                let v = traj[k * sim.dim + d];
                if v.is_finite() {
                    let _ = write!(pts, "{:.2},{:.2} ", sx(sim.times[k]), sy(v));
                }
            }
            let label = if sim.dim == 1 { format!("y_{}", i + 1) } else { format!("y_{}_{}", i + 1, d + 1) };
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.2" points="{}"><title>{label}</title></polyline>"#,
                COLORS[line % COLORS.len()],
                pts.trim_end()
            );
            line += 1;
        }
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netsim::sync_metrics;

    #[test]
    fn one_polyline_per_output() {
        let times: Vec<f64> = (0..=10).map(f64::from).collect();
        let y = vec![times.clone(), times.iter().map(|t| -t).collect(), vec![1.0; 11]];
        let metrics = sync_metrics(&times, &y, 1, None, 1e-3).unwrap();
        let sim = SimResult { times, dim: 1, u: y.clone(), y, metrics, final_state: vec![] };
        let svg = plot_outputs(&sim, "a < b");
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.contains(r#"width="800""#) && svg.contains(r#"height="500""#));
        assert!(svg.contains("a &lt; b"));
        assert!(svg.contains(">t</text>") && svg.contains(">y</text>"));
    }
}
