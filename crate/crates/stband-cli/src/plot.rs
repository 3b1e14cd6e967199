//! Polyline SVG charts of one table column against the first.

use crate::report::Table;

const W: f64 = 640.0;
const H: f64 = 400.0;
const M: f64 = 48.0;

pub fn svg(table: &Table, column: usize, title: &str) -> String {
    let xs = table.column(0);
    let ys = table.column(column);
    let finite = |v: &[f64]| {
        v.iter().filter(|x| x.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
    };
    let (x0, x1) = finite(&xs);
    let (mut y0, mut y1) = finite(&ys);
    if !(y1 > y0) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let sx = |x: f64| M + (x - x0) / (x1 - x0).max(f64::MIN_POSITIVE) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let points: Vec<String> = xs
        .iter()
        .zip(&ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    let label = &table.headers[column];
    let xl = &table.headers[0];
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
            "<text x=\"{m}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">{title}: {label} against {xl}</text>\n",
            "<rect x=\"{m}\" y=\"{m}\" width=\"{iw}\" height=\"{ih}\" fill=\"none\" stroke=\"#888\"/>\n",
            "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"{pts}\"/>\n",
            "<text x=\"{m}\" y=\"{yb}\" font-family=\"sans-serif\" font-size=\"11\">{x0:.6e}</text>\n",
            "<text x=\"{xr}\" y=\"{yb}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{x1:.6e}</text>\n",
            "<text x=\"4\" y=\"{yt}\" font-family=\"sans-serif\" font-size=\"11\">{y1:.6e}</text>\n",
            "<text x=\"4\" y=\"{ybot}\" font-family=\"sans-serif\" font-size=\"11\">{y0:.6e}</text>\n",
            "</svg>\n"
        ),
        w = W,
        h = H,
        m = M,
        iw = W - 2.0 * M,
        ih = H - 2.0 * M,
        pts = points.join(" "),
        yb = H - M + 16.0,
        xr = W - M,
        yt = M - 4.0,
        ybot = H - M - 4.0,
        title = title,
        label = label,
        xl = xl,
        x0 = x0,
        x1 = x1,
        y0 = y0,
        y1 = y1,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polyline_has_one_point_per_row() {
        let mut t = Table::new(&["x", "y"]);
        for i in 0..5 {
            t.rows.push(vec![i as f64, (i * i) as f64]);
        }
        let s = svg(&t, 1, "test");
        let pts = s.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(pts.split(' ').count(), 5);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
    }
}
