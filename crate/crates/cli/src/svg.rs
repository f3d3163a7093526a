//! Minimal deterministic SVG plots.
//!
//! The heatmap colormap is a fixed 256-entry table, linearly interpolated
//! (in sRGB) between nine viridis anchors at 0, 1/8, ..., 1:
//!
//! ```text
//! #440154 #472d7b #3b528b #2c728e #21918c #28ae80 #5ec962 #addc30 #fde725
//! ```

use std::fmt::Write as _;

const ANCHORS: [[u8; 3]; 9] = [
    [0x44, 0x01, 0x54],
    [0x47, 0x2d, 0x7b],
    [0x3b, 0x52, 0x8b],
    [0x2c, 0x72, 0x8e],
    [0x21, 0x91, 0x8c],
    [0x28, 0xae, 0x80],
    [0x5e, 0xc9, 0x62],
    [0xad, 0xdc, 0x30],
    [0xfd, 0xe7, 0x25],
];

const MAX_COLS: usize = 128;
const MAX_ROWS: usize = 160;

pub fn colormap() -> [[u8; 3]; 256] {
    let mut table = [[0u8; 3]; 256];
    for (i, entry) in table.iter_mut().enumerate() {
        let pos = i as f64 / 255.0 * 8.0;
        let lo = (pos.floor() as usize).min(7);
        let frac = pos - lo as f64;
        for c in 0..3 {
            let a = ANCHORS[lo][c] as f64;
            let b = ANCHORS[lo + 1][c] as f64;
            entry[c] = (a + (b - a) * frac).round() as u8;
        }
    }
    table
}

fn color_hex(rgb: [u8; 3]) -> String {
    format!("#{:02x}{:02x}{:02x}", rgb[0], rgb[1], rgb[2])
}

fn label(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.abs() >= 1e4 || x.abs() < 1e-3 {
        format!("{x:.3e}")
    } else {
        format!("{:.4}", x).trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn sample_indices(len: usize, max: usize) -> Vec<usize> {
    if len <= max {
        (0..len).collect()
    } else {
        (0..max).map(|i| i * (len - 1) / (max - 1)).collect()
    }
}

fn header(width: f64, height: f64, title: &str) -> String {
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{width}" height="{height}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, width / 2.0, escape(title)).unwrap();
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Axis frame with `ticks` labelled ticks on each axis.
#[allow(clippy::too_many_arguments)]
fn axes(s: &mut String, x0: f64, y0: f64, w: f64, h: f64, xr: (f64, f64), yr: (f64, f64), xlabel: &str, ylabel: &str) {
    writeln!(s, r#"<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="black"/>"#).unwrap();
    let ticks = 5;
    for i in 0..=ticks {
        let f = i as f64 / ticks as f64;
        let px = x0 + f * w;
        let py = y0 + h - f * h;
        writeln!(s, r#"<line x1="{px:.2}" y1="{}" x2="{px:.2}" y2="{}" stroke="black"/>"#, y0 + h, y0 + h + 4.0).unwrap();
        writeln!(s, r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#, y0 + h + 16.0, label(xr.0 + f * (xr.1 - xr.0))).unwrap();
        writeln!(s, r#"<line x1="{}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="black"/>"#, x0 - 4.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 6.0, py + 4.0, label(yr.0 + f * (yr.1 - yr.0))).unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, x0 + w / 2.0, y0 + h + 32.0, escape(xlabel)).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" transform="rotate(-90 {} {})">{}</text>"#,
        x0 - 52.0,
        y0 + h / 2.0,
        x0 - 52.0,
        y0 + h / 2.0,
        escape(ylabel)
    )
    .unwrap();
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo.is_finite() && hi.is_finite() {
        (lo, hi)
    } else {
        (0.0, 1.0)
    }
}

/// Heatmap of `rows[t][x]` over (x, t) with a colorbar.
pub fn heatmap(title: &str, xs: &[f64], times: &[f64], rows: &[Vec<f64>]) -> String {
    let (width, height) = (720.0, 460.0);
    let (x0, y0, w, h) = (80.0, 40.0, 520.0, 360.0);
    let mut s = header(width, height, title);
    let cmap = colormap();
    let (lo, hi) = range(rows.iter().flatten().copied());
    let span = hi - lo;
    let cols = sample_indices(xs.len(), MAX_COLS);
    let picked = sample_indices(times.len(), MAX_ROWS);
    let cw = w / cols.len() as f64;
    let rh = h / picked.len().max(1) as f64;
    for (ri, &r) in picked.iter().enumerate() {
        // Time runs upward.
        let y = y0 + h - (ri + 1) as f64 * rh;
        for (ci, &c) in cols.iter().enumerate() {
            let val = rows[r][c];
            let idx = if span > 0.0 { (((val - lo) / span) * 255.0).round().clamp(0.0, 255.0) as usize } else { 128 };
            writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                x0 + ci as f64 * cw,
                y,
                cw + 0.05,
                rh + 0.05,
                color_hex(cmap[idx])
            )
            .unwrap();
        }
    }
    let xr = (xs.first().copied().unwrap_or(0.0), xs.last().copied().unwrap_or(1.0));
    let tr = (times.first().copied().unwrap_or(0.0), times.last().copied().unwrap_or(1.0));
    axes(&mut s, x0, y0, w, h, xr, tr, "x", "t");

    let (bx, bw) = (x0 + w + 20.0, 18.0);
    for i in 0..256 {
        let y = y0 + h - (i + 1) as f64 * h / 256.0;
        writeln!(s, r#"<rect x="{bx}" y="{y:.2}" width="{bw}" height="{:.2}" fill="{}"/>"#, h / 256.0 + 0.05, color_hex(cmap[i])).unwrap();
    }
    writeln!(s, r#"<rect x="{bx}" y="{y0}" width="{bw}" height="{h}" fill="none" stroke="black"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, bx + bw + 4.0, y0 + 8.0, label(hi)).unwrap();
    writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, bx + bw + 4.0, y0 + h, label(lo)).unwrap();
    s.push_str("</svg>\n");
    s
}

/// Final profiles u(x) and v(x), one panel each.
pub fn profiles(title: &str, xs: &[f64], u: &[f64], v: &[f64]) -> String {
    let (width, height) = (640.0, 560.0);
    let mut s = header(width, height, title);
    let panels = [("u", u, "#1f77b4", 40.0), ("v", v, "#d62728", 300.0)];
    for (name, values, color, y0) in panels {
        let (x0, w, h) = (90.0, 500.0, 200.0);
        let (mut lo, mut hi) = range(values.iter().copied());
        if hi - lo < 1e-12 * hi.abs().max(1.0) {
            let pad = 1e-6 * hi.abs().max(1.0);
            lo -= pad;
            hi += pad;
        }
        let xr = (xs.first().copied().unwrap_or(0.0), xs.last().copied().unwrap_or(1.0));
        let points: Vec<String> = xs
            .iter()
            .zip(values)
            .map(|(x, val)| {
                let px = x0 + (x - xr.0) / (xr.1 - xr.0) * w;
                let py = y0 + h - (val - lo) / (hi - lo) * h;
                format!("{px:.2},{py:.2}")
            })
            .collect();
        writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, points.join(" ")).unwrap();
        axes(&mut s, x0, y0, w, h, xr, (lo, hi), "x", name);
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colormap_endpoints_are_anchors() {
        let cmap = colormap();
        assert_eq!(cmap[0], ANCHORS[0]);
        assert_eq!(cmap[255], ANCHORS[8]);
    }

    #[test]
    fn plots_are_well_formed() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let rows = vec![xs.clone(), xs.iter().map(|x| x * 2.0).collect()];
        let svg = heatmap("u", &xs, &[0.0, 1.0], &rows);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        let svg = profiles("final", &xs, &xs, &[1.0; 10]);
        assert!(svg.contains("polyline"));
    }
}
