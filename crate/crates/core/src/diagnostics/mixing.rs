use serde::{Deserialize, Serialize};

use super::{
    conservative_amplitude, constant_c0_poly, constant_c_alpha, fit_mixing, fit_power_law, spiral_bound_check,
    theorem_bound_check, BoundReport, RateFit,
};
use crate::error::{Error, Result};
use crate::evolution::{mixing_envelope, DecayTrace, Propagator};
use crate::models::{exact_inviscid, rebuild, Family, ModelProblem};
use crate::spectral::Field;
use crate::sweep::log_spaced;

/// Mixing fits start after the initial transient.
pub const MIXING_T_MIN: f64 = 10.0;
pub const MIXING_T_MAX: f64 = 1000.0;

/// Fit window `[10, min(1000, t_res)]`, where `t_res` is the time at which
/// filaments reach half the grid resolution.
pub fn mixing_window(model: &ModelProblem) -> (f64, f64) {
    let k = model.descriptor().k.unsigned_abs().max(1) as f64;
    let n = model.descriptor().resolution as f64;
    let t_res = match model.family() {
        Family::Shear | Family::Kolmogorov if model.c_b() > 0.0 => 0.5 * n / (k * model.c_b()),
        Family::Spiral => 0.5 * n / (k * model.descriptor().alpha.unwrap_or(1.0)),
        _ => f64::INFINITY,
    };
    (MIXING_T_MIN, MIXING_T_MAX.min(t_res))
}

/// `||f(t)||_{H^-1}` of the inviscid solution at the given increasing times,
/// exact where a closed form exists and integrated otherwise.
pub fn inviscid_hm1(model: &ModelProblem, f_in: &Field, times: &[f64]) -> Result<Vec<f64>> {
    if model.has_exact_inviscid() {
        return times
            .iter()
            .map(|&t| model.hm1_sq(exact_inviscid(model, f_in, t)?.coeffs()).map(f64::sqrt))
            .collect();
    }
    let dt = model.default_dt();
    let mut p = Propagator::new(model, 0.0, dt)?;
    let mut x = p.load(f_in)?;
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if t < now {
            return Err(Error::InvalidParameter("sample times must increase".into()));
        }
        let steps = ((t - now) / dt).round() as usize;
        p.advance(&mut x, steps)?;
        now += steps as f64 * dt;
        out.push(p.norms(&x).hm1);
    }
    Ok(out)
}

/// Mixing exponent of a single datum over `window`.
pub fn datum_mixing(model: &ModelProblem, f_in: &Field, window: (f64, f64), points: usize) -> Result<RateFit> {
    let times = log_spaced(window.0, window.1, points);
    let hm1 = inviscid_hm1(model, f_in, &times)?;
    let h1 = model.h1_sq(f_in.coeffs()).sqrt();
    fit_mixing(&times, &hm1, h1, window)
}

/// Mixing exponent of the operator envelope `sup ||P(t) f||_{H^-1} / ||f||_{H^1}`.
pub fn envelope_mixing(model: &ModelProblem, window: (f64, f64), points: usize, seed: u64) -> Result<RateFit> {
    let times = log_spaced(window.0, window.1, points);
    let env = mixing_envelope(model, &times, 30, seed)?;
    fit_power_law(&env.times, &env.values, window)
}

/// Mixing rate `p` and amplitude `a` feeding a bound check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingParams {
    pub a: f64,
    pub p: f64,
}

impl From<&RateFit> for MixingParams {
    fn from(f: &RateFit) -> Self {
        MixingParams { a: f.amplitude(), p: f.rate() }
    }
}

/// Checks a viscous trace against the decay bound implied by mixing
/// parameters `(a, p)`: spiral traces against `e^{-c_alpha nu^q |k|^{1-q} t}`
/// with `q = (4-p)/(4+p)`, all others against `e^{-c0 nu^q t}` with
/// `q = 2/(2+p)`. The amplitude is rounded up to a power of two first.
pub fn verify_trace_bound(trace: &DecayTrace, mix: MixingParams, tol: f64) -> Result<BoundReport> {
    if !(mix.p > 0.0) || !(mix.a > 0.0) {
        return Err(Error::InvalidParameter(format!("mixing parameters {mix:?} must be positive")));
    }
    let model = rebuild(&trace.model)?;
    let a = conservative_amplitude(mix.a);
    let p = mix.p;
    match model.family() {
        Family::Heat => Err(Error::Unsupported("pure diffusion has no mixing bound".into())),
        Family::Spiral => {
            let q = (4.0 - p) / (4.0 + p);
            let alpha = trace.model.alpha.unwrap_or(1.0);
            spiral_bound_check(trace, trace.nu, q, trace.model.k, constant_c_alpha(alpha, a, p), tol)
        }
        _ => {
            let q = 2.0 / (2.0 + p);
            theorem_bound_check(trace, trace.nu, q, constant_c0_poly(p, a, model.c_b()), tol)
        }
    }
}
