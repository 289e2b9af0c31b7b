use std::fmt::Write;

use super::FrontierCurve;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Tick spacing from {1, 2, 5} x 10^k giving about `target` intervals.
fn nice_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let m = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    m * mag
}

struct Axis {
    lo: f64,
    hi: f64,
    step: f64,
}

impl Axis {
    fn fit(lo: f64, hi: f64) -> Axis {
        let (lo, hi) = if hi - lo < 1e-9 { (lo - 0.01, hi + 0.01) } else { (lo, hi) };
        let step = nice_step(hi - lo, 6.0);
        Axis {
            lo: (lo / step).floor() * step,
            hi: (hi / step).ceil() * step,
            step,
        }
    }

    fn ticks(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step).round() as i64;
        (0..=n).map(|i| self.lo + i as f64 * self.step).collect()
    }
}

/// Static SVG of the frontier, the capital market line and the asset, GMV,
/// tangency and risk-free markers. Axes are in percent.
pub fn render_svg(curve: &FrontierCurve) -> String {
    let mut xs = vec![0.0];
    let mut ys = vec![curve.rf];
    let markers = curve
        .asset_markers
        .iter()
        .map(|m| (m.risk, m.expected_return))
        .chain(std::iter::once(curve.gmv_marker))
        .chain(curve.tangency_marker);
    for (x, y) in curve.points.iter().map(|p| (p.1, p.0)).chain(curve.cml_points.iter().copied()).chain(markers) {
        if x.is_finite() && y.is_finite() {
            xs.push(x);
            ys.push(y);
        }
    }
    let fold = |v: &[f64]| v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(*x), hi.max(*x)));
    let (xlo, xhi) = fold(&xs);
    let (ylo, yhi) = fold(&ys);
    let xa = Axis::fit(xlo.min(0.0), xhi);
    let ya = Axis::fit(ylo, yhi);

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - xa.lo) / (xa.hi - xa.lo) * plot_w;
    let py = |y: f64| TOP + (ya.hi - y) / (ya.hi - ya.lo) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    let _ = writeln!(s, r##"<g id="axes" stroke="#444" stroke-width="1">"##);
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
        LEFT,
        TOP + plot_h,
        LEFT + plot_w,
        TOP + plot_h
    );
    let _ = writeln!(s, r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#, LEFT, TOP, LEFT, TOP + plot_h);
    s.push_str("</g>\n");

    let _ = writeln!(s, r##"<g id="ticks" fill="#444" stroke="none">"##);
    for t in xa.ticks() {
        let x = px(t);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#444"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{:.1}%</text>"##,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 20.0,
            t * 100.0
        );
    }
    for t in ya.ticks() {
        let y = py(t);
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#444"/><text x="{:.2}" y="{:.2}" text-anchor="end">{:.1}%</text>"##,
            LEFT - 5.0,
            LEFT,
            LEFT - 8.0,
            y + 4.0,
            t * 100.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Risk (annualized standard deviation)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.2}" text-anchor="middle" transform="rotate(-90 15 {:.2})">Expected return</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    s.push_str("</g>\n");

    let polyline = |id: &str, color: &str, pts: &mut dyn Iterator<Item = (f64, f64)>| {
        let coords: Vec<String> = pts.map(|(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        format!(
            "<polyline id=\"{id}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
            coords.join(" ")
        )
    };
    s.push_str(&polyline("frontier", "#1f77b4", &mut curve.points.iter().map(|p| (p.1, p.0))));
    if !curve.cml_points.is_empty() {
        s.push_str(&polyline("cml", "#d62728", &mut curve.cml_points.iter().copied()));
    }

    let mut marker = |id: &str, label: &str, color: &str, (x, y): (f64, f64)| {
        if !(x.is_finite() && y.is_finite()) {
            return;
        }
        let _ = writeln!(
            s,
            r#"<g id="{}"><circle cx="{:.2}" cy="{:.2}" r="4" fill="{color}"/><text x="{:.2}" y="{:.2}">{}</text></g>"#,
            escape(id),
            px(x),
            py(y),
            px(x) + 6.0,
            py(y) - 6.0,
            escape(label)
        );
    };
    marker("rf", "rf", "#7f7f7f", (0.0, curve.rf));
    for (i, m) in curve.asset_markers.iter().enumerate() {
        marker(&format!("asset-{i}"), &m.label, "#2ca02c", (m.risk, m.expected_return));
    }
    marker("gmv", "GMV", "#ff7f0e", curve.gmv_marker);
    if let Some(t) = curve.tangency_marker {
        marker("tangency", "Tangency", "#9467bd", t);
    }

    let lx = LEFT + plot_w + 20.0;
    let _ = writeln!(
        s,
        r##"<g id="legend"><line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#1f77b4" stroke-width="2"/><text x="{:.2}" y="{:.2}">Efficient frontier</text>"##,
        TOP + 10.0,
        lx + 20.0,
        TOP + 10.0,
        lx + 25.0,
        TOP + 14.0
    );
    if !curve.cml_points.is_empty() {
        let _ = writeln!(
            s,
            r##"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#d62728" stroke-width="2"/><text x="{:.2}" y="{:.2}">Capital market line</text>"##,
            TOP + 30.0,
            lx + 20.0,
            TOP + 30.0,
            lx + 25.0,
            TOP + 34.0
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}
