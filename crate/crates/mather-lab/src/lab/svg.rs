//! Self-contained SVG log-log charts; no external renderer.

/// One plotted series: a label and (x, y) points with positive coordinates.
pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

/// Render a log-log line chart. Points with nonpositive coordinates are
/// dropped (they have no logarithm to plot).
pub fn log_log_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let width = 640.0;
    let height = 480.0;
    let margin = 64.0;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in series {
        for &(x, y) in &s.points {
            if x > 0.0 && y > 0.0 {
                xs.push(x.log10());
                ys.push(y.log10());
            }
        }
    }
    let (x_min, x_max) = padded_range(&xs);
    let (y_min, y_max) = padded_range(&ys);
    let to_px = |lx: f64, ly: f64| -> (f64, f64) {
        let px = margin + (lx - x_min) / (x_max - x_min) * (width - 2.0 * margin);
        let py = height - margin - (ly - y_min) / (y_max - y_min) * (height - 2.0 * margin);
        (px, py)
    };
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"28\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"15\">{}</text>\n",
        width / 2.0,
        xml_escape(title)
    ));
    // Axes.
    out.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = margin,
        b = height - margin,
        r = width - margin,
        t = margin
    ));
    // Decade ticks.
    for d in (x_min.floor() as i64)..=(x_max.ceil() as i64) {
        let lx = d as f64;
        if lx < x_min || lx > x_max {
            continue;
        }
        let (px, _) = to_px(lx, y_min);
        out.push_str(&format!(
            "<line x1=\"{px:.1}\" y1=\"{b:.1}\" x2=\"{px:.1}\" y2=\"{b2:.1}\" stroke=\"black\"/>\n<text x=\"{px:.1}\" y=\"{ty:.1}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">1e{d}</text>\n",
            b = height - margin,
            b2 = height - margin + 6.0,
            ty = height - margin + 20.0
        ));
    }
    for d in (y_min.floor() as i64)..=(y_max.ceil() as i64) {
        let ly = d as f64;
        if ly < y_min || ly > y_max {
            continue;
        }
        let (_, py) = to_px(x_min, ly);
        out.push_str(&format!(
            "<line x1=\"{m2:.1}\" y1=\"{py:.1}\" x2=\"{m:.1}\" y2=\"{py:.1}\" stroke=\"black\"/>\n<text x=\"{tx:.1}\" y=\"{py2:.1}\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">1e{d}</text>\n",
            m = margin,
            m2 = margin - 6.0,
            tx = margin - 10.0,
            py2 = py + 4.0
        ));
    }
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">{}</text>\n",
        width / 2.0,
        height - 16.0,
        xml_escape(x_label)
    ));
    out.push_str(&format!(
        "<text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\" transform=\"rotate(-90 18 {:.1})\">{}</text>\n",
        height / 2.0,
        height / 2.0,
        xml_escape(y_label)
    ));
    // Series.
    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let mut path = String::new();
        for &(x, y) in &s.points {
            if !(x > 0.0 && y > 0.0) {
                continue;
            }
            let (px, py) = to_px(x.log10(), y.log10());
            if path.is_empty() {
                path.push_str(&format!("M {px:.2} {py:.2}"));
            } else {
                path.push_str(&format!(" L {px:.2} {py:.2}"));
            }
            out.push_str(&format!(
                "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"3\" fill=\"{color}\"/>\n"
            ));
        }
        if !path.is_empty() {
            out.push_str(&format!("<path d=\"{path}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n"));
        }
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\" fill=\"{color}\">{}</text>\n",
            width - margin - 150.0,
            margin + 16.0 * (idx as f64 + 1.0),
            xml_escape(s.label)
        ));
    }
    out.push_str("</svg>\n");
    out
}

fn padded_range(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (-1.0, 1.0);
    }
    let mut lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if (hi - lo).abs() < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_is_valid_svg_and_deterministic() {
        let series = vec![Series {
            label: "w1",
            points: vec![(0.02, 0.1), (0.01, 0.07), (0.005, 0.05)],
        }];
        let a = log_log_chart("scaling", "delta", "W1", &series);
        let b = log_log_chart("scaling", "delta", "W1", &series);
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.ends_with("</svg>\n"));
        assert!(a.contains("circle"));
    }
}
