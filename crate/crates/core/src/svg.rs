//! Deterministic SVG figures: correlation heatmaps and recovery interval
//! plots.

use std::fmt::Write;

use crate::analysis::CorrelationSummary;
use crate::simstudy::RecoveryRow;

const CELL: f64 = 22.0;
const BANDS: f64 = 8.0;
const GREEN: (f64, f64, f64) = (0.0, 109.0, 44.0);
const RED: (f64, f64, f64) = (165.0, 15.0, 21.0);

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Fill for a correlation: white at 0, darkening in eight equal bands of
/// `|r|` toward green (positive) or red (negative).
pub fn fill_color(r: f64) -> String {
    let level = (r.abs().min(1.0) * BANDS).ceil() / BANDS;
    if level == 0.0 || r.is_nan() {
        return "#ffffff".into();
    }
    let (cr, cg, cb) = if r > 0.0 { GREEN } else { RED };
    let mix = |c: f64| (255.0 + (c - 255.0) * level).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(cr), mix(cg), mix(cb))
}

/// Coordinates whose block label is in `blocks`, in order.
pub fn select_blocks(summary: &CorrelationSummary, blocks: &[&str]) -> Vec<usize> {
    (0..summary.dim()).filter(|&i| blocks.contains(&summary.block_labels[i].as_str())).collect()
}

/// Heatmap of posterior-mean correlations over the selected coordinates
/// (all when `selection` is `None`). Reliable cells get a black border.
pub fn emit_heatmap(summary: &CorrelationSummary, selection: Option<&[usize]>) -> String {
    let all: Vec<usize> = (0..summary.dim()).collect();
    let idx = selection.unwrap_or(&all);
    let n = idx.len() as f64;
    let margin = 12.0
        + 7.0 * idx
            .iter()
            .map(|&i| summary.param_names[i].chars().count())
            .max()
            .unwrap_or(0) as f64;
    let size = margin + n * CELL + 10.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0}" height="{size:.0}" viewBox="0 0 {size:.0} {size:.0}" font-family="sans-serif" font-size="11">"##
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    for (a, &i) in idx.iter().enumerate() {
        let label = escape(&summary.param_names[i]);
        let y = margin + (a as f64 + 0.5) * CELL + 4.0;
        let _ = writeln!(s, r##"<text x="{:.1}" y="{y:.1}" text-anchor="end">{label}</text>"##, margin - 4.0);
        let x = margin + (a as f64 + 0.5) * CELL;
        let _ = writeln!(
            s,
            r##"<text x="{x:.1}" y="{:.1}" text-anchor="start" transform="rotate(-90 {x:.1} {:.1})">{label}</text>"##,
            margin - 4.0,
            margin - 4.0
        );
    }
    let mut borders = String::new();
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            let x = margin + b as f64 * CELL;
            let y = margin + a as f64 * CELL;
            let m = summary.mean[(i, j)];
            let _ = writeln!(
                s,
                r##"<rect x="{x:.1}" y="{y:.1}" width="{CELL}" height="{CELL}" fill="{}" stroke="#dddddd" stroke-width="0.5"><title>{} ~ {}: {m:.3} ({:.3})</title></rect>"##,
                fill_color(m),
                escape(&summary.param_names[i]),
                escape(&summary.param_names[j]),
                summary.sd[(i, j)]
            );
            if summary.reliable[(i, j)] {
                let _ = writeln!(
                    borders,
                    r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#000000" stroke-width="2"/>"##,
                    x + 1.0,
                    y + 1.0,
                    CELL - 2.0,
                    CELL - 2.0
                );
            }
        }
    }
    s.push_str(&borders);
    // separators between blocks
    for a in 1..idx.len() {
        if summary.block_labels[idx[a]] != summary.block_labels[idx[a - 1]] {
            let p = margin + a as f64 * CELL;
            let end = margin + n * CELL;
            let _ = writeln!(
                s,
                r##"<line x1="{p:.1}" y1="{margin:.1}" x2="{p:.1}" y2="{end:.1}" stroke="#444444" stroke-width="1"/>"##
            );
            let _ = writeln!(
                s,
                r##"<line x1="{margin:.1}" y1="{p:.1}" x2="{end:.1}" y2="{p:.1}" stroke="#444444" stroke-width="1"/>"##
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// One row per covariance element: the 95% interval as a bar, the
/// posterior mean as a dot and the generating value as a tick. Between
/// block elements are red, within-block blue, variances grey.
pub fn emit_recovery_plot(rows: &[RecoveryRow]) -> String {
    let row_h = 16.0;
    let label_w = 12.0 + 7.0 * rows.iter().map(|r| r.element.chars().count()).max().unwrap_or(0) as f64;
    let plot_w = 420.0;
    let top = 24.0;
    let height = top + rows.len() as f64 * row_h + 30.0;
    let width = label_w + plot_w + 20.0;
    let lo = rows.iter().map(|r| r.lo95.min(r.generating)).fold(0.0, f64::min);
    let hi = rows.iter().map(|r| r.hi95.max(r.generating)).fold(0.0, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (lo, hi) = (lo - 0.05 * span, hi + 0.05 * span);
    let px = |v: f64| label_w + (v - lo) / (hi - lo) * plot_w;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"##
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let zero = px(0.0);
    let bottom = top + rows.len() as f64 * row_h;
    let _ = writeln!(
        s,
        r##"<line x1="{zero:.1}" y1="{:.1}" x2="{zero:.1}" y2="{bottom:.1}" stroke="#888888" stroke-dasharray="3,3"/>"##,
        top - 6.0
    );
    for (k, r) in rows.iter().enumerate() {
        let y = top + (k as f64 + 0.5) * row_h;
        let color = match r.kind.as_str() {
            "between" => "#b2182b",
            "within" => "#2166ac",
            _ => "#666666",
        };
        let _ = writeln!(
            s,
            r##"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
            label_w - 6.0,
            y + 4.0,
            escape(&r.element)
        );
        let _ = writeln!(
            s,
            r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{color}" stroke-width="3"/>"##,
            px(r.lo95),
            px(r.hi95)
        );
        let _ = writeln!(s, r##"<circle cx="{:.1}" cy="{y:.1}" r="3" fill="{color}"/>"##, px(r.posterior_mean));
        let g = px(r.generating);
        let _ = writeln!(
            s,
            r##"<line x1="{g:.1}" y1="{:.1}" x2="{g:.1}" y2="{:.1}" stroke="#000000" stroke-width="2"/>"##,
            y - 6.0,
            y + 6.0
        );
    }
    let _ = writeln!(
        s,
        r##"<text x="{:.1}" y="{:.1}" text-anchor="middle">{lo:.3}</text><text x="{:.1}" y="{:.1}" text-anchor="middle">{hi:.3}</text>"##,
        px(lo),
        bottom + 16.0,
        px(hi),
        bottom + 16.0
    );
    s.push_str("</svg>\n");
    s
}
