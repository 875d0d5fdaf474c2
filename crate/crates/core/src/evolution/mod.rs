//! Time integration of `d_t f + B f + nu A f = 0` and its inviscid limit.

mod propagator;
mod worst;

use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ModelDescriptor, ModelProblem};
use crate::spectral::Field;

pub use propagator::{Propagator, UNITARITY_TOL};
pub use worst::{bracket_tau, mixing_envelope, semigroup_norm, worst_case_tau, MixingEnvelope, WorstCase, WorstCaseOptions};

pub const SCHEME: &str = "strang";

/// Largest Hermite top-degree energy fraction tolerated before a run is
/// flagged as under-resolved.
pub const CLOSURE_LIMIT: f64 = 0.01;

/// Sampled `H`, `H^1`, `H^{-1}` norms of one solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayTrace {
    pub times: Vec<f64>,
    pub h_norm: Vec<f64>,
    pub h1_norm: Vec<f64>,
    pub hm1_norm: Vec<f64>,
    pub nu: f64,
    pub model: ModelDescriptor,
    pub dt: f64,
    pub scheme: String,
    pub sample_every: usize,
    /// Largest top-degree energy fraction seen (kinetic models only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closure_max: Option<f64>,
}

/// Integrator metadata written next to a trace CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub model: ModelDescriptor,
    pub nu: f64,
    pub dt: f64,
    pub scheme: String,
    pub sample_every: usize,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closure_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closure_flagged: Option<bool>,
}

#[derive(Deserialize)]
struct TraceRow {
    t: f64,
    h: f64,
    h1: f64,
    hm1: f64,
}

impl DecayTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn closure_flagged(&self) -> bool {
        self.closure_max.is_some_and(|c| c > CLOSURE_LIMIT)
    }

    pub fn meta(&self) -> TraceMeta {
        TraceMeta {
            model: self.model.clone(),
            nu: self.nu,
            dt: self.dt,
            scheme: self.scheme.clone(),
            sample_every: self.sample_every,
            samples: self.len(),
            closure_max: self.closure_max,
            closure_flagged: self.closure_max.map(|_| self.closure_flagged()),
        }
    }

    /// Writes `t,h,h1,hm1` with 17 significant digits.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "t,h,h1,hm1")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.times[i], self.h_norm[i], self.h1_norm[i], self.hm1_norm[i]
            )?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn sidecar_path(csv: &Path) -> PathBuf {
        csv.with_extension("json")
    }

    /// Writes the CSV and its JSON metadata sidecar.
    pub fn save(&self, csv: &Path) -> Result<()> {
        self.write_csv(csv)?;
        let file = std::fs::File::create(Self::sidecar_path(csv))?;
        serde_json::to_writer_pretty(file, &self.meta())?;
        Ok(())
    }

    pub fn load(csv: &Path) -> Result<Self> {
        let meta: TraceMeta =
            serde_json::from_reader(std::fs::File::open(Self::sidecar_path(csv))?)?;
        let mut rdr = csv::Reader::from_path(csv)?;
        let mut trace = DecayTrace {
            times: Vec::new(),
            h_norm: Vec::new(),
            h1_norm: Vec::new(),
            hm1_norm: Vec::new(),
            nu: meta.nu,
            model: meta.model,
            dt: meta.dt,
            scheme: meta.scheme,
            sample_every: meta.sample_every,
            closure_max: meta.closure_max,
        };
        for row in rdr.deserialize() {
            let r: TraceRow = row?;
            trace.times.push(r.t);
            trace.h_norm.push(r.h);
            trace.h1_norm.push(r.h1);
            trace.hm1_norm.push(r.hm1);
        }
        Ok(trace)
    }
}

/// Early termination for long runs: stop at the first sample where the `H`
/// norm is below `below * h(0)` and `t >= not_before`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub below: f64,
    pub not_before: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolveOptions {
    pub t_end: f64,
    pub dt: f64,
    pub sample_every: usize,
    pub stop: Option<StopRule>,
    /// Locate the first crossing of `theta * h(0)` at full step resolution.
    pub theta: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Evolution {
    pub trace: DecayTrace,
    pub field: Field,
    /// Crossing time when [`EvolveOptions::theta`] was set and reached.
    pub crossing: Option<f64>,
}

/// One Strang step.
pub fn step_viscous(model: &ModelProblem, f: &Field, nu: f64, dt: f64) -> Result<Field> {
    let mut p = Propagator::new(model, nu, dt)?;
    let mut x = p.load(f)?;
    p.advance(&mut x, 1)?;
    p.store(&x)
}

/// Evolves to `t_end`, sampling every `sample_every` steps and at the end.
/// The step is shrunk slightly if needed so that `t_end` is hit exactly.
pub fn evolve(
    model: &ModelProblem,
    f_in: &Field,
    nu: f64,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Evolution> {
    evolve_with(model, f_in, nu, &EvolveOptions { t_end, dt, sample_every, stop: None, theta: None })
}

/// Number of steps and the adjusted step for reaching `t_end` exactly.
pub fn step_plan(t_end: f64, dt: f64) -> (usize, f64) {
    if t_end == 0.0 {
        return (0, dt);
    }
    let n = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
    (n, t_end / n as f64)
}

/// Sampling stride keeping a trace at or below `max_points` samples.
pub fn default_sample_every(steps: usize, max_points: usize) -> usize {
    steps.div_ceil(max_points.max(2) - 1).max(1)
}

pub fn evolve_with(model: &ModelProblem, f_in: &Field, nu: f64, opts: &EvolveOptions) -> Result<Evolution> {
    if !(opts.t_end >= 0.0) || !opts.t_end.is_finite() {
        return Err(Error::InvalidParameter(format!("t_end = {} must be nonnegative", opts.t_end)));
    }
    if opts.sample_every == 0 {
        return Err(Error::InvalidParameter("sample_every must be >= 1".into()));
    }
    let (steps, dt) = step_plan(opts.t_end, opts.dt);
    let mut p = Propagator::new(model, nu, dt)?;
    let mut x = p.load(f_in)?;
    let mut trace = DecayTrace {
        times: Vec::new(),
        h_norm: Vec::new(),
        h1_norm: Vec::new(),
        hm1_norm: Vec::new(),
        nu,
        model: model.descriptor().clone(),
        dt,
        scheme: SCHEME.into(),
        sample_every: opts.sample_every,
        closure_max: None,
    };
    record(&mut trace, &p, model, &x, 0.0)?;
    let h0 = trace.h_norm[0];
    let target = opts.theta.map(|th| th * h0);
    let mut crossing = None;
    let mut prev_h = h0;
    let mut done = 0;
    let mut since = 0;
    while done < steps {
        match target {
            Some(target) if crossing.is_none() => {
                p.advance(&mut x, 1)?;
                done += 1;
                since += 1;
                let h = p.h_norm(&x);
                if !h.is_finite() {
                    return Err(Error::NonFinite { t: done as f64 * dt });
                }
                if h < target {
                    let (a, b) = (prev_h.ln(), h.ln());
                    crossing = Some((done - 1) as f64 * dt + dt * (target.ln() - a) / (b - a));
                }
                prev_h = h;
            }
            _ => {
                let chunk = (opts.sample_every - since).min(steps - done);
                p.advance(&mut x, chunk)?;
                done += chunk;
                since += chunk;
            }
        }
        if since < opts.sample_every && done < steps {
            continue;
        }
        since = 0;
        let t = if done == steps { opts.t_end } else { done as f64 * dt };
        record(&mut trace, &p, model, &x, t)?;
        if let Some(stop) = opts.stop {
            if t >= stop.not_before && *trace.h_norm.last().unwrap() < stop.below * h0 {
                break;
            }
        }
    }
    let field = p.store(&x)?;
    Ok(Evolution { trace, field, crossing })
}

fn record(trace: &mut DecayTrace, p: &Propagator, model: &ModelProblem, x: &[Complex64], t: f64) -> Result<()> {
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite { t });
    }
    let n = p.norms(x);
    trace.times.push(t);
    trace.h_norm.push(n.h);
    trace.h1_norm.push(n.h1);
    trace.hm1_norm.push(n.hm1);
    if let Some(frac) = model.top_degree_fraction(x) {
        let prev = trace.closure_max.unwrap_or(0.0);
        if frac > CLOSURE_LIMIT && prev <= CLOSURE_LIMIT {
            log::warn!("Hermite closure: {:.2}% of the energy at the top degree (t = {t})", 100.0 * frac);
        }
        trace.closure_max = Some(prev.max(frac));
    }
    Ok(())
}

/// Max over interior samples of `|d/dt h^2 + 2 nu h1^2| / h(0)^2`, taken in
/// integrated form: the change of `h^2` over two sampling intervals against
/// Simpson's rule for `2 nu int h1^2`, divided by the elapsed time. The
/// sampling error is fourth order in the sample spacing.
pub fn energy_residual(trace: &DecayTrace) -> Result<f64> {
    let n = trace.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "energy residual needs at least 3 samples, trace has {n}"
        )));
    }
    let h0 = trace.h_norm[0] * trace.h_norm[0];
    if h0 == 0.0 {
        return Ok(0.0);
    }
    let mut worst = 0.0f64;
    let h1 = |i: usize| trace.h1_norm[i].powi(2);
    for i in 1..n - 1 {
        let (a, b) = (trace.times[i] - trace.times[i - 1], trace.times[i + 1] - trace.times[i]);
        // Simpson's rule on possibly unequal intervals
        let integral = (a + b) / 6.0
            * ((2.0 - b / a) * h1(i - 1) + (a + b).powi(2) / (a * b) * h1(i) + (2.0 - a / b) * h1(i + 1));
        let dh = trace.h_norm[i + 1].powi(2) - trace.h_norm[i - 1].powi(2);
        let r = (dh + 2.0 * trace.nu * integral) / (a + b);
        worst = worst.max(r.abs() / h0);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests;
