use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use quermass_core::DiagnosticsRow;

use crate::CliError;

pub const CSV_HEADER: [&str; 15] = [
    "t", "I_k", "I_km1", "Vol", "A", "S", "alpha", "vp_ratio", "bar_x", "bar_y", "bar_z", "C0", "C1", "C2",
    "cone_margin",
];

fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn record(r: &DiagnosticsRow) -> Vec<String> {
    let mut out: Vec<String> = [r.t, r.i_k, r.i_km1, r.vol, r.a].iter().map(|v| v.to_string()).collect();
    out.extend([cell(r.s), cell(r.alpha), cell(r.vp_ratio)]);
    out.extend(r.bar.iter().map(|v| v.to_string()));
    out.extend([r.c0, r.c1, r.c2, r.cone_margin].iter().map(|v| v.to_string()));
    out
}

/// Writes the diagnostics table; missing values are empty cells.
pub fn emit_csv(rows: &[DiagnosticsRow], path: &Path) -> Result<(), CliError> {
    if rows.is_empty() {
        return Err(CliError::Invalid("no diagnostics rows to write".into()));
    }
    let io = |e: csv::Error| CliError::Csv { path: path.to_path_buf(), source: e };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record(record(r)).map_err(io)?;
    }
    w.flush().map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    Ok(())
}

/// Value of a named CSV column.
pub fn column(r: &DiagnosticsRow, name: &str) -> Option<f64> {
    let i = CSV_HEADER.iter().position(|&c| c == name)?;
    match name {
        "S" => r.s,
        "alpha" => r.alpha,
        "vp_ratio" => r.vp_ratio,
        _ => record(r)[i].parse().ok(),
    }
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
const MAX_POINTS: usize = 800;

/// Line plot of `columns` against `t`. With `log_scale` nonpositive values
/// are skipped.
pub fn emit_svg(rows: &[DiagnosticsRow], columns: &[&str], log_scale: bool, path: &Path) -> Result<(), CliError> {
    if rows.is_empty() {
        return Err(CliError::Invalid("no diagnostics rows to plot".into()));
    }
    let (w, h, left, right, top, bottom) = (720.0, 420.0, 70.0, 130.0, 20.0, 40.0);
    let stride = rows.len().div_ceil(MAX_POINTS).max(1);
    let picked: Vec<&DiagnosticsRow> = rows
        .iter()
        .enumerate()
        .filter(|(i, _)| i % stride == 0 || *i == rows.len() - 1)
        .map(|(_, r)| r)
        .collect();
    let tx = |v: f64| if log_scale { (v > 0.0).then(|| v.log10()) } else { Some(v) };
    let series: Vec<Vec<(f64, f64)>> = columns
        .iter()
        .map(|c| picked.iter().filter_map(|r| Some((r.t, tx(column(r, c)?)?))).filter(|p| p.1.is_finite()).collect())
        .collect();
    let (t0, t1) = (picked[0].t, picked[picked.len() - 1].t);
    let ys = series.iter().flatten().map(|p| p.1);
    let (mut y0, mut y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    if !y0.is_finite() {
        (y0, y1) = (0.0, 1.0);
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let tspan = if t1 > t0 { t1 - t0 } else { 1.0 };
    let px = |t: f64| left + (t - t0) / tspan * (w - left - right);
    let py = |y: f64| top + (y1 - y) / (y1 - y0) * (h - top - bottom);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - left - right,
        h - top - bottom
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let y = y0 + f * (y1 - y0);
        let label = if log_scale { format!("1e{y:.1}") } else { format!("{y:.3e}") };
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{label}</text>"#, left - 4.0, py(y) + 4.0);
        let t = t0 + f * tspan;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{t:.2}</text>"#, px(t), h - bottom + 15.0);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">t</text>"#, left + 0.5 * (w - left - right), h - 6.0);
    for (k, (name, pts)) in columns.iter().zip(&series).enumerate() {
        let color = COLORS[k % COLORS.len()];
        if !pts.is_empty() {
            let mut d = String::new();
            for (i, (t, y)) in pts.iter().enumerate() {
                let _ = write!(d, "{}{:.1},{:.1}", if i == 0 { "M" } else { " L" }, px(*t), py(*y));
            }
            let _ = writeln!(s, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#);
        }
        let ly = top + 16.0 * k as f64 + 10.0;
        let lx = w - right + 10.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{name}</text>"#, lx + 26.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    fs::write(path, s).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}
