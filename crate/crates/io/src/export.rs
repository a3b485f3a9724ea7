//! Plot data: CSV slices (the canonical machine output) and SVG heatmaps.

use std::fmt::Write as _;

use ndarray::ArrayView2;
use tomo_core::{AxisGrid, OpticalTomogram1, PhaseSpaceDensity, Result};

/// A value with 17 significant digits.
pub fn number(v: f64) -> String {
    format!("{v:.16e}")
}

/// Table with the row axis as first column and one column per sample of `col_axis`.
fn table(row_name: &str, rows: &AxisGrid, col_name: &str, cols: &AxisGrid, v: ArrayView2<'_, f64>) -> String {
    let mut out = String::from(row_name);
    for c in cols.points() {
        write!(out, ",{col_name}={}", number(c)).expect("write to String");
    }
    out.push('\n');
    for (i, x) in rows.points().into_iter().enumerate() {
        out += &number(x);
        for j in 0..cols.len() {
            write!(out, ",{}", number(v[[i, j]])).expect("write to String");
        }
        out.push('\n');
    }
    out
}

/// Per-angle slices: column `X`, then one column per grid angle.
pub fn tomogram_csv(w: &OpticalTomogram1) -> String {
    table("X", w.x_axis(), "theta", w.theta_axis(), w.values().view())
}

/// Density slices: column `q`, then one column per grid momentum.
pub fn phase_space_csv(f: &PhaseSpaceDensity) -> Result<String> {
    Ok(table("q", &f.q_axes()[0], "p", &f.p_axes()[0], f.values2()?))
}

/// Diverging blue-white-red map of `v ∈ [-1, 1]`.
fn colour(v: f64) -> (u8, u8, u8) {
    let t = v.clamp(-1.0, 1.0);
    let fade = |c: f64, a: f64| (255.0 + (c - 255.0) * a).round() as u8;
    if t >= 0.0 {
        (fade(178.0, t), fade(24.0, t), fade(43.0, t))
    } else {
        (fade(33.0, -t), fade(102.0, -t), fade(172.0, -t))
    }
}

/// Heatmap with the column axis horizontal and the row axis increasing upwards.
/// Colours are scaled by the largest magnitude so zero is always white.
fn heatmap(title: &str, rows: &AxisGrid, cols: &AxisGrid, v: ArrayView2<'_, f64>) -> String {
    const CELL: usize = 4;
    const MARGIN: usize = 24;
    let (n, m) = v.dim();
    let scale = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let (width, height) = (m * CELL + 2 * MARGIN, n * CELL + 2 * MARGIN);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    );
    writeln!(s, "<title>{title}</title>").expect("write to String");
    writeln!(s, "<rect width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>").expect("write to String");
    for i in 0..n {
        let y = MARGIN + (n - 1 - i) * CELL;
        for j in 0..m {
            let (r, g, b) = colour(v[[i, j]] / scale);
            writeln!(
                s,
                "<rect x=\"{}\" y=\"{y}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"#{r:02x}{g:02x}{b:02x}\"/>",
                MARGIN + j * CELL
            )
            .expect("write to String");
        }
    }
    let label = |a: &AxisGrid| format!("{} [{:.3}, {:.3}]", a.kind(), a.start(), a.last());
    writeln!(
        s,
        "<text x=\"{MARGIN}\" y=\"{}\" font-size=\"10\" font-family=\"monospace\">{} horizontal, {} vertical, |max| {:.6e}</text>",
        height - 8,
        label(cols),
        label(rows),
        scale
    )
    .expect("write to String");
    s.push_str("</svg>\n");
    s
}

pub fn tomogram_svg(w: &OpticalTomogram1) -> String {
    heatmap("w(X, theta)", w.x_axis(), w.theta_axis(), w.values().view())
}

pub fn phase_space_svg(f: &PhaseSpaceDensity) -> Result<String> {
    Ok(heatmap("f(q, p)", &f.q_axes()[0], &f.p_axes()[0], f.values2()?))
}
