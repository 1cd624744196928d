//! Minimal SVG scatter plot for 2-D data.

use std::fmt::Write as _;

use crate::data::DataMatrix;

const SIZE: f64 = 640.0;
const MARGIN: f64 = 20.0;

fn color(id: usize) -> String {
    // golden-angle hue walk keeps neighbouring ids apart
    let hue = (id as f64 * 137.507_764) % 360.0;
    let lightness = 38 + (id % 3) * 12;
    format!("hsl({hue:.1},70%,{lightness}%)")
}

/// Scatter of the rows of a 2-column matrix, one color per label. `None` if
/// the data is not 2-D.
pub fn scatter_svg(x: &DataMatrix, labels: &[usize], title: &str) -> Option<String> {
    if x.cols() != 2 || x.rows() != labels.len() || x.rows() == 0 {
        return None;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for r in x.iter_rows() {
        x0 = x0.min(r[0]);
        x1 = x1.max(r[0]);
        y0 = y0.min(r[1]);
        y1 = y1.max(r[1]);
    }
    let span = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
    );
    let title = title.replace('&', "&amp;").replace('<', "&lt;");
    let _ = writeln!(out, "<title>{title}</title>");
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    for (r, &l) in x.iter_rows().zip(labels) {
        let cx = MARGIN + (r[0] - x0) * scale;
        let cy = SIZE - MARGIN - (r[1] - y0) * scale;
        let _ = writeln!(
            out,
            "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"2.5\" fill=\"{}\"/>",
            color(l)
        );
    }
    out.push_str("</svg>\n");
    Some(out)
}
