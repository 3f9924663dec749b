use std::fmt::Write;

use super::convergence::ConvergenceStudy;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 70.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Log-log plot of `|λ₂ − reference|` against the mesh size with the fitted
/// line. `None` when there is nothing to fit.
pub fn convergence_svg(study: &ConvergenceStudy) -> Option<String> {
    let slope = study.slope?;
    let pts: Vec<(f64, f64)> = study
        .fit_points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let (mx, my) = {
        let m = pts.len() as f64;
        (pts.iter().map(|p| p.0).sum::<f64>() / m, pts.iter().map(|p| p.1).sum::<f64>() / m)
    };
    let fit = |x: f64| my + slope * (x - mx);
    let xs = pts.iter().map(|p| p.0);
    let x0 = xs.clone().fold(f64::INFINITY, f64::min).floor();
    let x1 = xs.fold(f64::NEG_INFINITY, f64::max).ceil();
    let ys = pts.iter().map(|p| p.1).chain([fit(x0), fit(x1)]);
    let (y0, y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let x1 = x1.max(x0 + 1.0);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(s, r#"<path d="M{l} {t} L{l} {b} L{r} {b}" fill="none" stroke="black"/>"#);
    for e in (x0 as i64)..=(x1 as i64) {
        let x = sx(e as f64);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{b}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, b + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{e}</text>"#, b + 20.0);
    }
    for e in (y0 as i64)..=(y1 as i64) {
        let y = sy(e as f64);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{l}" y2="{y:.2}" stroke="black"/>"#, l - 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{e}</text>"#, l - 8.0, y + 4.0);
    }
    let data: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2} {:.2}", sx(*x), sy(*y))).collect();
    let _ = writeln!(s, r##"<path d="M{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##, data.join(" L"));
    for (x, y) in &pts {
        let _ = writeln!(s, r##"<circle cx="{:.2}" cy="{:.2}" r="4" fill="#1f77b4"/>"##, sx(*x), sy(*y));
    }
    let _ = writeln!(
        s,
        r##"<path d="M{:.2} {:.2} L{:.2} {:.2}" fill="none" stroke="#d62728" stroke-dasharray="6 4"/>"##,
        sx(x0),
        sy(fit(x0)),
        sx(x1),
        sy(fit(x1))
    );
    let kind = match study.reference_kind {
        Some(super::convergence::ReferenceKind::ClosedForm) => "closed form",
        _ => "extrapolated",
    };
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}: |lambda2 - reference| ({kind}), fitted slope {slope:.3}</text>"#,
        WIDTH / 2.0,
        MARGIN / 2.0,
        escape(&study.name)
    );
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">mesh size h = 2^-level</text>"#, WIDTH / 2.0, HEIGHT - 20.0);
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">|lambda2 - reference|</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    s.push_str("</svg>\n");
    Some(s)
}
