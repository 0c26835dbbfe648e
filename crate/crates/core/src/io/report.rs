//! CSV tables, check rows and log-log SVG plots.
//!
//! Floats are written with 17 significant digits, so every table reads back
//! to the same bits.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{FlowRow, FlowSeries};
use crate::harness::loja::loglog_slope;

/// `{:.16e}`: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Columns of the companion table holding what the diagnostics table omits.
pub const ENERGY_HEADER: [&str; 8] = ["step", "s", "dissipated", "grad_norm", "u_L2", "kernel_quadratic", "kernel_cos", "kernel_sin"];

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Writes the diagnostics table with the fixed header.
pub fn write_diagnostics(path: &Path, series: &FlowSeries) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(FlowRow::HEADER)?;
    for row in &series.rows {
        let v = row.values();
        let mut rec = vec![row.step.to_string()];
        rec.extend(v[1..].iter().map(|x| fmt_f64(*x)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_energy(path: &Path, series: &FlowSeries) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(ENERGY_HEADER)?;
    for r in &series.rows {
        let vals = [r.s, r.dissipated, r.grad_norm, r.u_l2, r.kernel[0], r.kernel[1], r.kernel[2]];
        let mut rec = vec![r.step.to_string()];
        rec.extend(vals.iter().map(|x| fmt_f64(*x)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn parse(field: &str, line: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Data(format!("line {line}: '{field}' is not a number")))
}

/// Reads a diagnostics table, and its `energy.csv` companion when one sits
/// next to it. Without the companion, `F`-drops come from `F` itself.
pub fn read_series(path: &Path) -> Result<FlowSeries> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != FlowRow::HEADER {
        return Err(Error::Data(format!("unexpected header {header:?}")));
    }
    let mut series = FlowSeries::default();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        let v: Vec<f64> = rec.iter().map(|f| parse(f, line + 2)).collect::<Result<_>>()?;
        series.push(FlowRow {
            step: v[0] as usize,
            s: v[1],
            f: v[2],
            phi_l1_br: v[3],
            phi_l2_br: v[4],
            phi_l2: v[5],
            dfds: v[6],
            dc_r: v[7],
            r_cyl: v[8],
            r_shrink: v[9],
            axis_a: v[10],
            axis_b: v[11],
            grad_norm: f64::NAN,
            u_l2: f64::NAN,
            kernel: [f64::NAN; 3],
            dissipated: f64::NAN,
        });
    }
    if series.is_empty() {
        return Err(Error::Data(format!("{} has no rows", path.display())));
    }
    let companion = path.with_file_name("energy.csv");
    if companion.exists() {
        let mut rd = csv::Reader::from_path(&companion)?;
        for (line, (rec, row)) in rd.records().zip(series.rows.iter_mut()).enumerate() {
            let v: Vec<f64> = rec?.iter().map(|f| parse(f, line + 2)).collect::<Result<_>>()?;
            if v.len() != ENERGY_HEADER.len() || v[0] as usize != row.step {
                return Err(Error::Data(format!("{} does not match the diagnostics rows", companion.display())));
            }
            row.dissipated = v[2];
            row.grad_norm = v[3];
            row.u_l2 = v[4];
            row.kernel = [v[5], v[6], v[7]];
        }
    } else {
        let f0 = series.rows[0].f;
        for r in &mut series.rows {
            r.dissipated = f0 - r.f;
        }
    }
    Ok(series)
}

/// One line of a check table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub params: String,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub pass: bool,
}

impl CheckRow {
    pub fn new(check: &str, params: impl Into<String>, lhs: f64, rhs: f64, constant: f64, pass: bool) -> Self {
        Self { check: check.into(), params: params.into(), lhs, rhs, constant, pass }
    }

    /// `lhs ≤ rhs`.
    pub fn bound(check: &str, params: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self::new(check, params, lhs, rhs, f64::NAN, lhs <= rhs)
    }
}

pub const CHECK_HEADER: [&str; 6] = ["check", "params", "lhs", "rhs", "constant", "pass"];

pub fn write_checks(out: impl std::io::Write, rows: &[CheckRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CHECK_HEADER)?;
    for r in rows {
        w.write_record([r.check.clone(), r.params.clone(), fmt_f64(r.lhs), fmt_f64(r.rhs), fmt_f64(r.constant), r.pass.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// A log-log plot with one polyline and fitted slope per family.
pub fn loglog_svg(title: &str, x_label: &str, y_label: &str, families: &[(String, Vec<(f64, f64)>)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const PAD: f64 = 60.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    let logs: Vec<Vec<(f64, f64)>> = families
        .iter()
        .map(|(_, pts)| pts.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite()).map(|(x, y)| (x.log10(), y.log10())).collect())
        .collect();
    let all = logs.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let (x0, x1) = (x0.floor(), x1.ceil().max(x0.floor() + 1.0));
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n\
         <rect x=\"{PAD}\" y=\"{PAD}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        W / 2.0,
        escape(title),
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    for d in x0 as i64..=x1 as i64 {
        svg += &format!("<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">1e{d}</text>\n", px(d as f64), H - PAD + 16.0);
    }
    for d in y0 as i64..=y1 as i64 {
        svg += &format!("<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">1e{d}</text>\n", PAD - 6.0, py(d as f64) + 4.0);
    }
    svg += &format!("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", W / 2.0, H - 14.0, escape(x_label));
    svg += &format!("<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n", H / 2.0, H / 2.0, escape(y_label));
    for (i, ((name, pts), log)) in families.iter().zip(&logs).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let d: Vec<String> = log.iter().enumerate().map(|(k, (x, y))| format!("{}{:.2},{:.2}", if k == 0 { 'M' } else { 'L' }, px(*x), py(*y))).collect();
        svg += &format!("<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n", d.join(" "));
        let slope = loglog_slope(pts).map(|f| format!("{:.3}", f.slope)).unwrap_or_else(|_| "n/a".into());
        svg += &format!("<text x=\"{:.1}\" y=\"{:.1}\" fill=\"{color}\">{} slope = {slope}</text>\n", PAD + 10.0, PAD + 18.0 * (i + 1) as f64, escape(name));
    }
    svg += "</svg>\n";
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [std::f64::consts::PI, 1e-300, -2.5e17, 0.1 + 0.2] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn svg_has_a_path_and_label_per_family() {
        let line: Vec<(f64, f64)> = (1..20).map(|i| (i as f64, (i as f64).powf(1.5))).collect();
        let svg = loglog_svg("t", "x", "y", &[("a".into(), line.clone()), ("b".into(), line)]);
        assert_eq!(svg.matches("<path").count(), 2);
        assert_eq!(svg.matches("slope = 1.500").count(), 2);
    }
}
