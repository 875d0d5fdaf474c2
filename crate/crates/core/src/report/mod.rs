//! Aggregation of a finished sweep into fits, bound checks and plots.

pub mod svg;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{ed_exponent_points, envelope_mixing, mixing_window, verify_trace_bound, MixingParams, RateFit};
use crate::error::{Error, Result};
use crate::evolution::DecayTrace;
use crate::models::{rebuild, Family};
use crate::sweep::{RowParams, RowStatus, SweepResult, SweepRow};
use svg::{LogLogPlot, Series, Style};

pub const REPORT_JSON: &str = "report.json";

/// Slack allowed above a predicted upper-bound exponent.
pub const Q_SLACK: f64 = 0.05;
/// Tolerance for the diffusive calibration `q = 1`.
pub const HEAT_TOL: f64 = 0.01;
pub const BOUND_TOL: f64 = 5e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Measured exponent respects the prediction.
    Consistent,
    /// Measured exponent exceeds the prediction beyond the slack.
    Exceeds,
    /// Too few completed rows to fit.
    Insufficient,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowBound {
    pub nu: f64,
    pub pass: Option<bool>,
    pub worst_margin: Option<f64>,
    pub checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub label: String,
    pub params: RowParams,
    pub rows: usize,
    pub completed: usize,
    pub q_meas: Option<f64>,
    pub q_pred: Option<f64>,
    pub verdict: Verdict,
    pub fit: Option<RateFit>,
    pub mixing: Option<MixingParams>,
    pub bounds: Vec<RowBound>,
    /// Rows that did not complete, as `nu: status`.
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub groups: Vec<GroupReport>,
    pub artifacts: Vec<PathBuf>,
}

impl ReportBundle {
    pub fn all_bounds_pass(&self) -> bool {
        self.groups.iter().flat_map(|g| &g.bounds).all(|b| b.pass != Some(false))
    }
}

/// Judges a measured exponent: the heat family must reproduce `q = 1`,
/// every other family must not exceed its predicted upper bound.
pub fn verdict(family: Family, q_meas: f64, q_pred: Option<f64>) -> Verdict {
    match (family, q_pred) {
        (Family::Heat, _) => {
            if (q_meas - 1.0).abs() <= HEAT_TOL {
                Verdict::Consistent
            } else {
                Verdict::Exceeds
            }
        }
        (_, Some(q)) if q_meas > q + Q_SLACK => Verdict::Exceeds,
        _ => Verdict::Consistent,
    }
}

/// Aggregates a sweep directory into `report.json` and SVG plots.
/// Nothing is written unless the directory holds at least one row.
pub fn build_report(dir: &Path) -> Result<ReportBundle> {
    let sweep = SweepResult::load(dir)?;
    if sweep.rows.is_empty() {
        return Err(Error::InsufficientData(format!("{} has no sweep rows", dir.display())));
    }
    let mut groups = Vec::new();
    let mut artifacts = Vec::new();
    for (gi, rows) in sweep.groups().into_iter().enumerate() {
        let g = group_report(&sweep, &rows)?;
        let stem = format!("group{gi}");
        artifacts.push(write_tau_plot(dir, &stem, &g, &rows)?);
        if let Some(p) = write_hm1_plot(dir, &stem, &sweep, &rows)? {
            artifacts.push(p);
        }
        groups.push(g);
    }
    let bundle = ReportBundle { groups, artifacts };
    let path = dir.join(REPORT_JSON);
    serde_json::to_writer_pretty(std::fs::File::create(&path)?, &bundle)?;
    Ok(bundle)
}

fn group_report(sweep: &SweepResult, rows: &[&SweepRow]) -> Result<GroupReport> {
    let first = rows[0];
    let done: Vec<&&SweepRow> = rows.iter().filter(|r| r.status == RowStatus::Completed).collect();
    let failures = rows
        .iter()
        .filter(|r| r.status != RowStatus::Completed)
        .map(|r| format!("{:e}: {}", r.nu, r.status.as_str()))
        .collect();
    let nus: Vec<f64> = done.iter().map(|r| r.nu).collect();
    let taus: Vec<f64> = done.iter().filter_map(|r| r.tau).collect();
    let fit = ed_exponent_points(&nus, &taus).ok();
    let q_meas = fit.as_ref().map(RateFit::rate);
    let verdict = q_meas.map_or(Verdict::Insufficient, |q| verdict(first.model, q, first.q_pred));

    let mut mixing = None;
    let mut bounds = Vec::new();
    if first.model != Family::Heat {
        if let Some(trace0) = done.iter().find_map(|r| sweep.trace_path(r)) {
            mixing = group_mixing(&trace0);
        }
        for r in &done {
            let Some(path) = sweep.trace_path(r) else { continue };
            bounds.push(match (mixing, DecayTrace::load(&path)) {
                (Some(m), Ok(trace)) => match verify_trace_bound(&trace, m, BOUND_TOL) {
                    Ok(b) => RowBound {
                        nu: r.nu,
                        pass: Some(b.pass),
                        worst_margin: Some(b.worst_margin),
                        checked: b.checked,
                        error: None,
                    },
                    Err(e) => RowBound { nu: r.nu, pass: None, worst_margin: None, checked: 0, error: Some(e.to_string()) },
                },
                (None, _) => RowBound {
                    nu: r.nu,
                    pass: None,
                    worst_margin: None,
                    checked: 0,
                    error: Some("no mixing fit for this model".into()),
                },
                (_, Err(e)) => RowBound { nu: r.nu, pass: None, worst_margin: None, checked: 0, error: Some(e.to_string()) },
            });
        }
    }
    Ok(GroupReport {
        label: first.params.group_label(),
        params: first.params.clone(),
        rows: rows.len(),
        completed: done.len(),
        q_meas,
        q_pred: first.q_pred,
        verdict,
        fit,
        mixing,
        bounds,
        failures,
    })
}

/// Envelope mixing fit for the model that produced `trace_path`.
fn group_mixing(trace_path: &Path) -> Option<MixingParams> {
    let trace = DecayTrace::load(trace_path).ok()?;
    let model = rebuild(&trace.model).ok()?;
    if !model.has_exact_inviscid() {
        return None;
    }
    envelope_mixing(&model, mixing_window(&model), 24, 0).ok().map(|f| MixingParams::from(&f))
}

fn write_tau_plot(dir: &Path, stem: &str, g: &GroupReport, rows: &[&SweepRow]) -> Result<PathBuf> {
    let measured: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.tau.map(|t| (r.nu, t))).collect();
    let mut series = vec![Series { name: "tau measured".into(), points: measured.clone(), style: Style::Markers }];
    if let Some(fit) = &g.fit {
        let line = measured.iter().map(|&(nu, _)| (nu, (fit.intercept + fit.exponent * nu.ln()).exp())).collect();
        series.push(Series {
            name: format!("fit q = {:.3}", fit.rate()),
            points: line,
            style: Style::Line,
        });
    }
    let plot = LogLogPlot { title: format!("{}: tau vs nu", g.label), x_label: "nu".into(), y_label: "tau".into(), series };
    let path = dir.join(format!("{stem}_tau.svg"));
    std::fs::write(&path, plot.render())?;
    Ok(path)
}

/// `hm1(t)` for the smallest and largest viscosity in the group.
fn write_hm1_plot(dir: &Path, stem: &str, sweep: &SweepResult, rows: &[&SweepRow]) -> Result<Option<PathBuf>> {
    let mut done: Vec<&&SweepRow> = rows.iter().filter(|r| r.status == RowStatus::Completed).collect();
    done.sort_by(|a, b| a.nu.total_cmp(&b.nu));
    let picks: Vec<&&SweepRow> = match done.len() {
        0 => return Ok(None),
        1 => vec![done[0]],
        n => vec![done[0], done[n - 1]],
    };
    let mut series = Vec::new();
    for r in picks {
        let Some(path) = sweep.trace_path(r) else { continue };
        let Ok(trace) = DecayTrace::load(&path) else { continue };
        let points = trace.times.iter().copied().zip(trace.hm1_norm.iter().copied()).collect();
        series.push(Series { name: format!("nu = {:.1e}", r.nu), points, style: Style::Line });
    }
    if series.is_empty() {
        return Ok(None);
    }
    let plot = LogLogPlot {
        title: format!("{}: H^-1 norm", rows[0].params.group_label()),
        x_label: "t".into(),
        y_label: "||f||_{H^-1}".into(),
        series,
    };
    let path = dir.join(format!("{stem}_hm1.svg"));
    std::fs::write(&path, plot.render())?;
    Ok(Some(path))
}
