//! Rate fits, dissipation time-scales and checks of the explicit decay bounds.

pub mod constants;
mod mixing;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::DecayTrace;
use crate::sweep::SweepResult;

pub use mixing::{
    datum_mixing, envelope_mixing, inviscid_hm1, mixing_window, verify_trace_bound, MixingParams, MIXING_T_MAX,
    MIXING_T_MIN,
};
pub use constants::{
    constant_c0_exp, constant_c0_poly, constant_c_alpha, constant_cs, exp_nu_threshold, q_poly, q_s,
    q_shear,
};

/// Mixing fits ignore samples where `hm1` has fallen this far below its
/// initial value.
pub const NOISE_FLOOR: f64 = 1e-12;

/// Default threshold `theta = e^{-1}` defining the dissipation time `tau`.
pub fn default_theta() -> f64 {
    (-1.0f64).exp()
}

/// Least-squares line through `(log x, log y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// Slope in log-log coordinates.
    pub exponent: f64,
    /// Natural-log intercept.
    pub intercept: f64,
    /// RMS residual in log space.
    pub residual: f64,
    /// Smallest and largest abscissa actually used.
    pub window: (f64, f64),
    pub n_points: usize,
}

impl RateFit {
    /// `-exponent`, the decay rate of a mixing fit or `q` of a `tau(nu)` fit.
    pub fn rate(&self) -> f64 {
        -self.exponent
    }

    /// `exp(intercept)`.
    pub fn amplitude(&self) -> f64 {
        self.intercept.exp()
    }
}

pub fn fit_power_law(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<RateFit> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), found: values.len() });
    }
    let (lo, hi) = window;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t < lo || t > hi {
            continue;
        }
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!("abscissa {t} in the fit window is not positive")));
        }
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!("value {v} at {t} is not positive")));
        }
        xs.push(t.ln());
        ys.push(v.ln());
    }
    if xs.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "fit window [{lo}, {hi}] holds {} points, need at least 4",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual =
        (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    let used_lo = xs.iter().cloned().fold(f64::INFINITY, f64::min).exp();
    let used_hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max).exp();
    Ok(RateFit { exponent: slope, intercept, residual, window: (used_lo, used_hi), n_points: xs.len() })
}

/// Fits `hm1(t) / ||f_in||_{H^1}`, dropping samples below the noise floor.
pub fn fit_mixing(times: &[f64], hm1: &[f64], h1_in: f64, window: (f64, f64)) -> Result<RateFit> {
    if !(h1_in > 0.0) {
        return Err(Error::InvalidParameter("initial H^1 norm must be positive".into()));
    }
    let floor = NOISE_FLOOR * hm1.first().copied().unwrap_or(0.0);
    let (ts, vs): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(hm1)
        .filter(|(_, &v)| v > floor)
        .map(|(&t, &v)| (t, v / h1_in))
        .unzip();
    fit_power_law(&ts, &vs, window)
}

/// Mixing amplitude rounded up to the next power of two.
pub fn conservative_amplitude(a: f64) -> f64 {
    2f64.powf(a.log2().ceil())
}

/// First time the series falls below `theta * values[0]`, interpolating
/// linearly in `(t, log h)`.
pub fn crossing_time(times: &[f64], values: &[f64], theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParameter(format!("theta = {theta} must lie in (0, 1)")));
    }
    if times.is_empty() || times.len() != values.len() {
        return Err(Error::InsufficientData("empty or ragged trace".into()));
    }
    let target = theta * values[0];
    for i in 1..values.len() {
        if values[i] <= target {
            let (a, b) = (values[i - 1].ln(), values[i].ln());
            if !(b < a) {
                return Ok(times[i]);
            }
            let s = (target.ln() - a) / (b - a);
            return Ok(times[i - 1] + s * (times[i] - times[i - 1]));
        }
    }
    Err(Error::NoCrossing { theta, t_end: *times.last().unwrap() })
}

pub fn tau_threshold(trace: &DecayTrace, theta: f64) -> Result<f64> {
    crossing_time(&trace.times, &trace.h_norm, theta)
}

/// Slope of `log tau` against `log nu`; `q_meas` is its negative.
pub fn ed_exponent_points(nus: &[f64], taus: &[f64]) -> Result<RateFit> {
    let mut distinct: Vec<f64> = nus.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "need at least 4 viscosities, got {}",
            distinct.len()
        )));
    }
    let span = (distinct[distinct.len() - 1] / distinct[0]).log10();
    if span < 2.0 - 1e-9 {
        return Err(Error::InsufficientData(format!(
            "viscosities span {span:.2} decades, need at least 2"
        )));
    }
    fit_power_law(nus, taus, (0.0, f64::INFINITY))
}

/// Enhanced-dissipation fit over the completed rows of a sweep, which must
/// all share one parameter set apart from `nu`.
pub fn ed_exponent(sweep: &SweepResult) -> Result<RateFit> {
    let rows: Vec<_> = sweep.rows.iter().filter(|r| r.tau.is_some()).collect();
    if let Some(first) = rows.first() {
        if rows.iter().any(|r| !first.same_family(r)) {
            return Err(Error::InvalidParameter(
                "sweep mixes parameter sets; fit each group separately".into(),
            ));
        }
    }
    let nus: Vec<f64> = rows.iter().map(|r| r.nu).collect();
    let taus: Vec<f64> = rows.iter().map(|r| r.tau.unwrap()).collect();
    ed_exponent_points(&nus, &taus)
}

/// Outcome of checking `h(t) <= (1 + tol) e^{-rate t} h(0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub pass: bool,
    /// `min (bound - h) / bound` over the checked samples.
    pub worst_margin: f64,
    pub checked: usize,
    /// Samples before this time are outside the bound's validity window.
    pub t_min: f64,
    pub rate: f64,
}

/// Checks `h(t) <= (1 + tol) e^{-rate t} h(0)` at every sample with `t > t_min`.
pub fn check_decay_bound(trace: &DecayTrace, rate: f64, t_min: f64, tol: f64) -> Result<BoundReport> {
    if trace.is_empty() {
        return Err(Error::InsufficientData("empty trace".into()));
    }
    let h0 = trace.h_norm[0];
    let mut worst = f64::INFINITY;
    let mut checked = 0;
    for (&t, &h) in trace.times.iter().zip(&trace.h_norm) {
        if t <= t_min {
            continue;
        }
        let bound = (-rate * t).exp() * h0;
        worst = worst.min((bound - h) / bound);
        checked += 1;
    }
    if checked == 0 {
        return Err(Error::InsufficientData(format!(
            "trace ends at t = {} before the bound applies (t > {t_min})",
            trace.times.last().unwrap()
        )));
    }
    Ok(BoundReport { pass: worst >= -tol, worst_margin: worst, checked, t_min, rate })
}

/// Polynomial-mixing bound `e^{-c0 nu^q t}` for `t > nu^{-q}`.
pub fn theorem_bound_check(trace: &DecayTrace, nu: f64, q: f64, c0: f64, tol: f64) -> Result<BoundReport> {
    check_decay_bound(trace, c0 * nu.powf(q), nu.powf(-q), tol)
}

/// Spiral bound `e^{-c0 nu^q |k|^{1-q} t}` for `t > 1 / (nu^q |k|^{1-q})`.
pub fn spiral_bound_check(
    trace: &DecayTrace,
    nu: f64,
    q: f64,
    k: i64,
    c0: f64,
    tol: f64,
) -> Result<BoundReport> {
    let s = nu.powf(q) * (k.unsigned_abs() as f64).powf(1.0 - q);
    check_decay_bound(trace, c0 * s, 1.0 / s, tol)
}

/// Exponential-mixing bound `e^{-c0 |ln nu|^{-2/p} t}` for `t > |ln nu|^{2/p}`,
/// only asserted below the admissible viscosity threshold.
pub fn exp_bound_check(
    trace: &DecayTrace,
    nu: f64,
    p: f64,
    a1: f64,
    a2: f64,
    c0: f64,
    tol: f64,
) -> Result<BoundReport> {
    let limit = exp_nu_threshold(p, a1, a2);
    if !(nu < limit) {
        return Err(Error::InvalidParameter(format!(
            "nu = {nu} is above the admissible threshold {limit:.3e} for the exponential-mixing bound"
        )));
    }
    let scale = nu.ln().abs().powf(2.0 / p);
    check_decay_bound(trace, c0 / scale, scale, tol)
}
