use std::fmt::Write;

use super::CalibrationReport;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 50.0;

fn to_px(x: f64, y: f64) -> (f64, f64) {
    let span = SIZE - 2.0 * MARGIN;
    (MARGIN + x * span, SIZE - MARGIN - y * span)
}

fn polyline(points: impl Iterator<Item = (f64, f64)>) -> String {
    points
        .map(|(x, y)| {
            let (px, py) = to_px(x, y.clamp(0.0, 1.0));
            format!("{px:.2},{py:.2}")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Self-contained SVG of the apparent and bias-corrected curves over the
/// identity diagonal.
pub fn render_svg(report: &CalibrationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, y0) = to_px(0.0, 0.0);
    let (x1, y1) = to_px(1.0, 1.0);
    let _ = writeln!(
        s,
        r#"<rect x="{x0}" y="{y1}" width="{w}" height="{h}" fill="none" stroke="black"/>"#,
        w = x1 - x0,
        h = y0 - y1
    );
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let (tx, _) = to_px(t, 0.0);
        let (_, ty) = to_px(0.0, t);
        let _ = writeln!(
            s,
            r#"<text x="{tx:.1}" y="{:.1}" text-anchor="middle">{t:.1}</text>"#,
            y0 + 18.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{t:.1}</text>"#,
            x0 - 6.0,
            ty + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">Predicted probability</text>"#,
        (x0 + x1) / 2.0,
        SIZE - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">Observed probability</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    let _ = writeln!(
        s,
        r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y1}" stroke="black" stroke-dasharray="6,4"/>"#
    );
    let apparent = polyline(report.curve.iter().map(|p| (p.predicted, p.apparent)));
    let corrected = polyline(report.curve.iter().map(|p| (p.predicted, p.bias_corrected)));
    let _ = writeln!(
        s,
        r#"<polyline points="{apparent}" fill="none" stroke="gray" stroke-width="1.5"/>"#
    );
    let _ = writeln!(
        s,
        r#"<polyline points="{corrected}" fill="none" stroke="red" stroke-width="2"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}">Emax {:.3}  MAE {:.3}  B = {}</text>"#,
        x0 + 8.0,
        y1 + 16.0,
        report.emax,
        report.mean_abs_error,
        report.replicates
    );
    s.push_str("</svg>\n");
    s
}
