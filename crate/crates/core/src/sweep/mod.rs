//! Batch `(model, nu, k)` runs with persistence and resume.

mod config;

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::default_theta;
use crate::error::{Error, Result};
use crate::evolution::{bracket_tau, default_sample_every, evolve_with, worst_case_tau, EvolveOptions, StopRule, WorstCaseOptions};
use crate::models::{
    build_heat, build_kinetic, build_kolmogorov, build_shear, build_spiral, initial_field, normalize_h1, Family,
    InitialDatum, KineticModel, KolmogorovModel, ModelProblem, Profile, ShearModel, SpiralModel,
    DEFAULT_HERMITE_DEGREE, DEFAULT_RADIAL_POINTS, DEFAULT_TORUS_MODES,
};

pub use config::{log_spaced, NuSpec, SweepConfig};

pub const SWEEP_CSV: &str = "sweep.csv";
pub const TRACE_DIR: &str = "traces";
const HEADER: &str = "model,alpha,gamma,n0,k,nu,tau,q_pred,status";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowStatus {
    Completed,
    /// No threshold crossing before `t_end`.
    Unresolved,
    Failed,
}

impl RowStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RowStatus::Completed => "completed",
            RowStatus::Unresolved => "unresolved",
            RowStatus::Failed => "failed",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "completed" => Ok(RowStatus::Completed),
            "unresolved" => Ok(RowStatus::Unresolved),
            "failed" => Ok(RowStatus::Failed),
            _ => Err(Error::InvalidParameter(format!("unknown row status '{s}'"))),
        }
    }
}

/// Parameters identifying one sweep row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowParams {
    pub model: Family,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub n0: Option<u32>,
    pub k: i64,
    pub nu: f64,
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "x".to_string(), |v| v.to_string())
}

impl RowParams {
    /// File-name-safe unique key.
    pub fn key(&self) -> String {
        format!(
            "{}_a{}_g{}_n{}_k{}_nu{:.6e}",
            self.model.name(),
            opt(&self.alpha),
            opt(&self.gamma),
            opt(&self.n0),
            self.k,
            self.nu
        )
        .replace('+', "")
    }

    /// Same parameters apart from `nu`.
    pub fn same_group(&self, other: &RowParams) -> bool {
        self.model == other.model
            && self.alpha == other.alpha
            && self.gamma == other.gamma
            && self.n0 == other.n0
            && self.k == other.k
    }

    pub fn group_label(&self) -> String {
        let mut s = self.model.name().to_string();
        if let Some(a) = self.alpha {
            s += &format!(" alpha={a}");
        }
        if let Some(g) = self.gamma {
            s += &format!(" gamma={g}");
        }
        if let Some(n) = self.n0 {
            s += &format!(" n0={n}");
        }
        s + &format!(" k={}", self.k)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(flatten)]
    pub params: RowParams,
    pub tau: Option<f64>,
    pub q_pred: Option<f64>,
    pub status: RowStatus,
    /// Trace CSV relative to the sweep directory.
    pub trace: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl std::ops::Deref for SweepRow {
    type Target = RowParams;

    fn deref(&self) -> &RowParams {
        &self.params
    }
}

impl SweepRow {
    pub fn same_family(&self, other: &SweepRow) -> bool {
        self.params.same_group(&other.params)
    }

    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{:.16e},{},{},{}",
            self.model.name(),
            self.alpha.map_or(String::new(), |v| v.to_string()),
            self.gamma.map_or(String::new(), |v| v.to_string()),
            self.n0.map_or(String::new(), |v| v.to_string()),
            self.k,
            self.nu,
            self.tau.map_or(String::new(), |v| format!("{v:.16e}")),
            self.q_pred.map_or(String::new(), |v| format!("{v:.16e}")),
            self.status.as_str()
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub output: PathBuf,
}

impl SweepResult {
    pub fn completed(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.status == RowStatus::Completed)
    }

    /// Rows grouped by parameters other than `nu`, in first-appearance order.
    pub fn groups(&self) -> Vec<Vec<&SweepRow>> {
        let mut groups: Vec<Vec<&SweepRow>> = Vec::new();
        for row in &self.rows {
            match groups.iter_mut().find(|g| g[0].same_family(row)) {
                Some(g) => g.push(row),
                None => groups.push(vec![row]),
            }
        }
        groups
    }

    /// Reads `sweep.csv` from a sweep directory.
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(SWEEP_CSV);
        if !path.exists() {
            return Err(Error::InsufficientData(format!("no {} in {}", SWEEP_CSV, dir.display())));
        }
        let rows = read_rows(&path)?;
        Ok(Self { rows, output: dir.to_path_buf() })
    }

    pub fn trace_path(&self, row: &SweepRow) -> Option<PathBuf> {
        row.trace.as_ref().map(|t| self.output.join(t))
    }
}

fn parse_opt<T: std::str::FromStr>(s: &str) -> Result<Option<T>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| Error::InvalidParameter(format!("cannot parse '{s}' in sweep.csv")))
}

fn read_rows(path: &Path) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != 9 {
            return Err(Error::InvalidParameter(format!("malformed sweep row {:?}", rec)));
        }
        let params = RowParams {
            model: rec[0].parse()?,
            alpha: parse_opt(&rec[1])?,
            gamma: parse_opt(&rec[2])?,
            n0: parse_opt(&rec[3])?,
            k: parse_opt(&rec[4])?.ok_or_else(|| Error::InvalidParameter("missing k".into()))?,
            nu: parse_opt(&rec[5])?.ok_or_else(|| Error::InvalidParameter("missing nu".into()))?,
        };
        let trace = PathBuf::from(TRACE_DIR).join(format!("{}.csv", params.key()));
        rows.push(SweepRow {
            tau: parse_opt(&rec[6])?,
            q_pred: parse_opt(&rec[7])?,
            status: RowStatus::parse(&rec[8])?,
            trace: Some(trace),
            message: None,
            params,
        });
    }
    Ok(rows)
}

/// Expands a config into row parameters in a fixed order.
pub fn expand(cfg: &SweepConfig) -> Vec<RowParams> {
    let alphas: Vec<Option<f64>> = match cfg.family {
        Family::Spiral if cfg.alpha.is_empty() => vec![Some(1.0)],
        Family::Spiral => cfg.alpha.iter().map(|&a| Some(a)).collect(),
        _ => vec![None],
    };
    let gammas: Vec<Option<f64>> = match cfg.family {
        Family::Shear if cfg.gamma.is_empty() => vec![Some(2.0)],
        Family::Shear => cfg.gamma.iter().map(|&g| Some(g)).collect(),
        Family::Heat | Family::Kolmogorov | Family::Spiral => vec![Some(2.0)],
        Family::Kinetic => vec![None],
    };
    let n0 = match cfg.family {
        Family::Shear => cfg.n0.or_else(|| {
            cfg.profile
                .as_deref()
                .map_or(Some(Profile::Sin), |p| Profile::resolve(p).ok())
                .and_then(|p| p.default_n0())
        }),
        _ => None,
    };
    let mut out = Vec::new();
    for &alpha in &alphas {
        for &gamma in &gammas {
            for &k in &cfg.k {
                for nu in cfg.nu.values() {
                    out.push(RowParams { model: cfg.family, alpha, gamma, n0, k, nu });
                }
            }
        }
    }
    out
}

/// Builds the model for one row.
pub fn build_model(cfg: &SweepConfig, p: &RowParams) -> Result<ModelProblem> {
    match p.model {
        Family::Heat => build_heat(p.k, cfg.resolution.unwrap_or(DEFAULT_TORUS_MODES)),
        Family::Shear => {
            let profile = Profile::resolve(cfg.profile.as_deref().unwrap_or("sin"))?;
            build_shear(&ShearModel {
                profile,
                n0: p.n0,
                gamma: p.gamma.unwrap_or(2.0),
                k: p.k,
                m_max: cfg.resolution.unwrap_or(DEFAULT_TORUS_MODES),
            })
        }
        Family::Kolmogorov => build_kolmogorov(&KolmogorovModel {
            l: cfg.l.unwrap_or(2.0),
            k: p.k,
            m_max: cfg.resolution.unwrap_or(DEFAULT_TORUS_MODES),
        }),
        Family::Spiral => build_spiral(&SpiralModel {
            alpha: p.alpha.unwrap_or(1.0),
            k: p.k,
            points: cfg.resolution.unwrap_or(DEFAULT_RADIAL_POINTS),
        }),
        Family::Kinetic => {
            let mut k = vec![0; cfg.dim.unwrap_or(1).max(1)];
            k[0] = p.k;
            build_kinetic(&KineticModel { k, degree: cfg.resolution.unwrap_or(DEFAULT_HERMITE_DEGREE) })
        }
    }
}

/// Time after which the model's decay bound applies: `nu^{-q}`, or
/// `1 / (nu^q |k|^{1-q})` for spiral flows. `None` without a prediction.
pub fn bound_onset(model: &ModelProblem, nu: f64) -> Option<f64> {
    onset_for(model, nu, model.predicted_q()?)
}

fn onset_for(model: &ModelProblem, nu: f64, q: f64) -> Option<f64> {
    if model.family() == Family::Heat {
        return None;
    }
    let kk = model.descriptor().k.unsigned_abs() as f64;
    Some(match model.family() {
        Family::Spiral => 1.0 / (nu.powf(q) * kk.powf(1.0 - q)),
        _ => nu.powf(-q),
    })
}

/// Traces run past the onset computed with `q + ONSET_SLACK`, so bounds
/// built from measured mixing exponents slightly worse than predicted still
/// have samples to check.
pub const ONSET_SLACK: f64 = 0.05;

/// Predicted dissipation time-scale used to size runs.
pub fn predicted_timescale(model: &ModelProblem, nu: f64) -> f64 {
    bound_onset(model, nu).unwrap_or_else(|| {
        let q = model.predicted_q().unwrap_or(1.0);
        nu.powf(-q)
    })
}

/// Sweep time step: exact splitting makes any step valid for pure diffusion,
/// so heat rows use `t_end / 20000`; advected rows resolve the fastest phase
/// with `0.1 / max |B|`.
pub fn sweep_dt(model: &ModelProblem, t_end: f64) -> f64 {
    if model.max_b_symbol() == 0.0 {
        t_end / 20_000.0
    } else {
        0.1 / model.max_b_symbol()
    }
}

fn default_datum(family: Family) -> InitialDatum {
    match family {
        Family::Heat | Family::Shear | Family::Kolmogorov => InitialDatum::SingleMode { m: 1 },
        Family::Spiral | Family::Kinetic => InitialDatum::LowestMode,
    }
}

/// Runs one row and writes its trace. Row-level numerical failures are
/// returned as a row status rather than an error.
pub fn run_row(cfg: &SweepConfig, p: &RowParams) -> SweepRow {
    let trace_rel = PathBuf::from(TRACE_DIR).join(format!("{}.csv", p.key()));
    let mut row = SweepRow {
        params: p.clone(),
        tau: None,
        q_pred: None,
        status: RowStatus::Failed,
        trace: None,
        message: None,
    };
    match run_row_inner(cfg, p, &trace_rel, &mut row) {
        Ok(()) => {}
        Err(Error::NoCrossing { theta, t_end }) => {
            row.status = RowStatus::Unresolved;
            row.message = Some(format!("no crossing of {theta:.4} by t = {t_end}"));
        }
        Err(e) => {
            row.status = RowStatus::Failed;
            row.message = Some(e.to_string());
        }
    }
    if let Some(m) = &row.message {
        log::warn!("row {}: {m}", p.key());
    }
    row
}

fn run_row_inner(cfg: &SweepConfig, p: &RowParams, trace_rel: &Path, row: &mut SweepRow) -> Result<()> {
    let model = build_model(cfg, p)?;
    row.q_pred = model.predicted_q();
    let theta = cfg.theta.unwrap_or_else(default_theta);
    let scale = predicted_timescale(&model, p.nu);
    let t_end = cfg.t_end_factor * scale;
    let dt = cfg.dt.unwrap_or_else(|| sweep_dt(&model, t_end));
    let datum = cfg.datum.clone().unwrap_or_else(|| default_datum(p.model));
    let (f_in, tau_hint) = match datum {
        InitialDatum::WorstCase => {
            // bracket from below the advection time so the doubling never overshoots by more than 2x
            let t0: f64 = model.mixed_bound().filter(|b| *b > 0.0).map_or(1.0, |b| 1.0 / b);
            let guess = bracket_tau(&model, p.nu, theta, dt, t0.min(scale), cfg.seed)?;

            let mut opts = WorstCaseOptions::new(dt, guess);
            opts.seed = cfg.seed;
            let wc = worst_case_tau(&model, p.nu, theta, &opts)?;

            (normalize_h1(&model, wc.datum)?, Some(wc.tau))
        }
        d => (initial_field(&model, &d)?, None),
    };
    let onset = model
        .predicted_q()
        .and_then(|q| onset_for(&model, p.nu, q + ONSET_SLACK))
        .map(|o| 1.1 * o);
    let horizon = onset
        .unwrap_or(0.0)
        .max(tau_hint.unwrap_or(scale) * 1.5)
        .min(t_end);
    let sample_every = default_sample_every((horizon / dt).ceil() as usize, cfg.max_samples);
    let evo = evolve_with(
        &model,
        &f_in,
        p.nu,
        &EvolveOptions {
            t_end,
            dt,
            sample_every,
            stop: Some(StopRule { below: theta, not_before: onset.unwrap_or(0.0) }),
            theta: Some(theta),
        },
    )?;

    let dir = cfg.output.join(TRACE_DIR);
    std::fs::create_dir_all(&dir)?;
    evo.trace.save(&cfg.output.join(trace_rel))?;
    row.trace = Some(trace_rel.to_path_buf());
    let tau = evo.crossing.ok_or(Error::NoCrossing { theta, t_end: *evo.trace.times.last().unwrap() })?;
    row.tau = Some(tau);
    row.status = RowStatus::Completed;
    Ok(())
}

/// Runs every row of `cfg` on `workers` threads (default: the config's
/// value, else all cores). Completed rows already present in the output
/// directory are reused. Rows are appended to `sweep.csv` as they finish
/// through a single writer and the file is rewritten in config order at the
/// end, so reruns and interrupted runs produce identical files.
pub fn run_sweep(cfg: &SweepConfig, workers: Option<usize>) -> Result<SweepResult> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output)?;
    let params = expand(cfg);
    let csv_path = cfg.output.join(SWEEP_CSV);
    let mut done: HashMap<String, SweepRow> = HashMap::new();
    if csv_path.exists() {
        for row in read_rows(&csv_path)? {
            let trace_ok = row.trace.as_ref().is_some_and(|t| cfg.output.join(t).exists());
            if row.status == RowStatus::Completed && trace_ok {
                done.insert(row.params.key(), row);
            }
        }
    }
    // keep reusable rows on disk before starting new work
    write_rows(&csv_path, params.iter().filter_map(|p| done.get(&p.key())))?;
    let todo: Vec<&RowParams> = params.iter().filter(|p| !done.contains_key(&p.key())).collect();
    log::info!("sweep: {} rows, {} reused, {} to run", params.len(), done.len(), todo.len());

    let (tx, rx) = mpsc::channel::<SweepRow>();
    let writer_path = csv_path.clone();
    let writer = std::thread::spawn(move || -> Result<Vec<SweepRow>> {
        let mut file = std::fs::OpenOptions::new().append(true).open(&writer_path)?;
        let mut got = Vec::new();
        for row in rx {
            writeln!(file, "{}", row.csv_line())?;
            file.flush()?;
            got.push(row);
        }
        Ok(got)
    });
    let n_workers = workers.or(cfg.workers).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n_workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        todo.par_iter().for_each_with(tx, |tx, p| {
            let row = run_row(cfg, p);
            // the receiver only disappears if the writer failed; that error is reported below
            let _ = tx.send(row);
        })
    });
    let fresh = writer.join().map_err(|_| Error::InvalidParameter("sweep writer panicked".into()))??;
    for row in fresh {
        done.insert(row.params.key(), row);
    }
    let rows: Vec<SweepRow> = params.iter().filter_map(|p| done.remove(&p.key())).collect();
    write_rows(&csv_path, rows.iter())?;
    Ok(SweepResult { rows, output: cfg.output.clone() })
}

fn write_rows<'a>(path: &Path, rows: impl Iterator<Item = &'a SweepRow>) -> Result<()> {
    let tmp = path.with_extension("csv.tmp");
    {
        let mut out = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
        writeln!(out, "{HEADER}")?;
        for row in rows {
            writeln!(out, "{}", row.csv_line())?;
        }
        out.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests;
