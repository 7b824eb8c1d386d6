use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{MerbError, Result};
use crate::merb::MerbMethod;
use crate::types::{ConvergenceReport, ReportRow};

use super::fit::pre_floor_rows;

/// CSV column order.
pub const CSV_HEADER: &str = "H,m,max_error,slow_calls,total_calls,wall_time_s";

/// Method and run metadata written to `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub problem: String,
    pub method: String,
    pub order: usize,
    pub nodes: Vec<f64>,
    pub traversal: f64,
    pub num_fast_ivps: usize,
    pub m: usize,
    pub inner_orders: (usize, usize),
    pub fd_jacobian: bool,
    pub fitted_rate: Option<f64>,
    pub m_search: Option<Vec<(usize, f64)>>,
}

impl RunSummary {
    pub fn new(problem: &str, method: &MerbMethod, m: usize, drop_stage_order: bool, fd: bool) -> Self {
        Self {
            problem: problem.to_string(),
            method: method.name().to_string(),
            order: method.order(),
            nodes: method.nodes().to_vec(),
            traversal: method.traversal(),
            num_fast_ivps: method.num_fast_ivps(),
            m,
            inner_orders: method.inner_orders(drop_stage_order),
            fd_jacobian: fd,
            fitted_rate: None,
            m_search: None,
        }
    }
}

/// Files written by [`emit_results`].
#[derive(Debug, Clone, PartialEq)]
pub struct Emitted {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub plot: Option<PathBuf>,
}

/// Writes `<problem>_<method>.csv`, `summary.json` and optionally an SVG
/// log–log plot into `out_dir`. Nothing is written for an empty report.
pub fn emit_results(
    report: &ConvergenceReport,
    summary: &RunSummary,
    out_dir: &Path,
    plot: bool,
) -> Result<Emitted> {
    if report.rows.is_empty() {
        return Err(MerbError::EmptyReport);
    }
    fs::create_dir_all(out_dir)?;
    let stem = format!("{}_{}", summary.problem, summary.method);
    let csv_path = out_dir.join(format!("{stem}.csv"));
    write_csv(&report.rows, &csv_path)?;

    let mut summary = summary.clone();
    summary.fitted_rate = report.fitted_rate.is_finite().then_some(report.fitted_rate);
    let summary_path = out_dir.join("summary.json");
    fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)?;

    let plot_path = if plot {
        let p = out_dir.join(format!("{stem}.svg"));
        fs::write(&p, svg_plot(report, &format!("{} on {}", summary.method, summary.problem)))?;
        Some(p)
    } else {
        None
    };
    Ok(Emitted {
        csv: csv_path,
        summary: summary_path,
        plot: plot_path,
    })
}

pub fn write_csv(rows: &[ReportRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(MerbError::from)).collect()
}

/// Static log–log plot of error against `H`; fitted rows are drawn filled.
pub fn svg_plot(report: &ConvergenceReport, title: &str) -> String {
    let (w, h, pad) = (480.0, 360.0, 50.0);
    let pts: Vec<(f64, f64)> = report
        .rows
        .iter()
        .filter(|r| r.max_error.is_finite() && r.max_error > 0.0)
        .map(|r| (r.h.log10(), r.max_error.log10()))
        .collect();
    let fitted: Vec<f64> = pre_floor_rows(&report.rows).iter().map(|r| r.h).collect();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle">{title} (rate {:.2})</text>"#,
        w / 2.0,
        report.fitted_rate
    );
    if pts.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let (xmin, xmax) = bounds(pts.iter().map(|p| p.0));
    let (ymin, ymax) = bounds(pts.iter().map(|p| p.1));
    let sx = |x: f64| pad + (x - xmin) / (xmax - xmin) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - ymin) / (ymax - ymin) * (h - 2.0 * pad);
    let _ = writeln!(
        svg,
        r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    let line: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
    let _ = writeln!(
        svg,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
        line.join(" ")
    );
    for (r, &(x, y)) in report.rows.iter().filter(|r| r.max_error.is_finite() && r.max_error > 0.0).zip(&pts) {
        let fill = if fitted.contains(&r.h) { "steelblue" } else { "white" };
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{fill}" stroke="steelblue"/>"#,
            sx(x),
            sy(y)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">log10 H</text>"#,
        w / 2.0,
        h - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">log10 max error</text>"#,
        h / 2.0,
        h / 2.0
    );
    svg.push_str("</svg>\n");
    svg
}

fn bounds(it: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::fit_rate;

    fn report() -> ConvergenceReport {
        let rows = (0..4)
            .map(|k| {
                let h = 0.1 * 0.5f64.powi(k);
                ReportRow {
                    h,
                    m: 10,
                    max_error: 0.7 * h.powi(3),
                    slow_calls: 10 << k,
                    total_calls: 100 << k,
                    wall_time: 0.01,
                }
            })
            .collect();
        ConvergenceReport::from_rows(rows)
    }

    #[test]
    fn csv_header_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let rep = report();
        let summary = RunSummary::new("bidirectional", &MerbMethod::merb3_default(), 10, false, false);
        let out = emit_results(&rep, &summary, dir.path(), true).unwrap();
        let text = fs::read_to_string(&out.csv).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        let rows = read_csv(&out.csv).unwrap();
        assert_eq!(rows, rep.rows);
        assert!((fit_rate(&rows) - rep.fitted_rate).abs() < 1e-12);
        let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out.summary).unwrap()).unwrap();
        assert_eq!(json["num_fast_ivps"], 2);
        assert!(out.plot.unwrap().exists());
    }

    #[test]
    fn empty_report_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("out");
        let rep = ConvergenceReport {
            rows: vec![],
            fitted_rate: f64::NAN,
        };
        let summary = RunSummary::new("bidirectional", &MerbMethod::merb2(), 1, false, false);
        assert_eq!(emit_results(&rep, &summary, &target, false).unwrap_err(), MerbError::EmptyReport);
        assert!(!target.exists());
    }
}
