//! Worst-case (operator-norm) versions of the decay and mixing measurements.
//!
//! The decay theorems bound `sup_f ||S(t) f|| / ||f||` and the mixing
//! hypotheses bound `sup_f ||P(t) f||_{H^-1} / ||f||_{H^1}`. A single initial
//! datum only gives a lower bound on either, which can decay at a different
//! rate; these routines find the maximizing datum by power iteration.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Propagator;
use crate::error::{Error, Result};
use crate::models::ModelProblem;
use crate::spectral::Field;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstCaseOptions {
    pub dt: f64,
    /// Power iterations per refinement round.
    pub iters: usize,
    pub max_rounds: usize,
    /// Initial guess for the crossing time.
    pub t_guess: f64,
    /// Relative change in the crossing time at which refinement stops.
    pub rtol: f64,
    pub seed: u64,
}

impl WorstCaseOptions {
    pub fn new(dt: f64, t_guess: f64) -> Self {
        Self { dt, iters: 3, max_rounds: 8, t_guess, rtol: 2e-3, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct WorstCase {
    /// First time `||S(t)|| <= theta`.
    pub tau: f64,
    /// Datum attaining the operator norm at `tau`, unit `H` norm.
    pub datum: Field,
    pub rounds: usize,
}

fn random_unit(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    normalize(&mut v);
    v
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|c| *c /= n);
    }
    n
}

fn power(
    fwd: &mut Propagator,
    bwd: &mut Propagator,
    steps: usize,
    v: &mut [Complex64],
    iters: usize,
) -> Result<f64> {
    let mut sigma = 0.0;
    for _ in 0..iters.max(1) {
        normalize(v);
        fwd.advance(v, steps)?;
        sigma = fwd.h_norm(v);
        bwd.advance(v, steps)?;
    }
    normalize(v);
    Ok(sigma)
}

/// `||S(t)||_{H -> H}` of the discrete semigroup, with the maximizing datum.
pub fn semigroup_norm(
    model: &ModelProblem,
    nu: f64,
    t: f64,
    dt: f64,
    iters: usize,
    seed: u64,
) -> Result<(f64, Field)> {
    let mut fwd = Propagator::with_direction(model, nu, dt, false)?;
    let mut bwd = Propagator::with_direction(model, nu, dt, true)?;
    let steps = (t / dt).round().max(1.0) as usize;
    let mut v = random_unit(model.dim(), seed);
    let sigma = power(&mut fwd, &mut bwd, steps, &mut v, iters)?;
    Ok((sigma, fwd.store(&v)?))
}

/// Doubles `t` from `t0` until `||S(t)|| < theta`, warm-starting the power
/// iteration across trials. The result lies within a factor 2 above the
/// operator-norm crossing and is a cheap starting point for
/// [`worst_case_tau`].
pub fn bracket_tau(model: &ModelProblem, nu: f64, theta: f64, dt: f64, t0: f64, seed: u64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParameter(format!("theta = {theta} must lie in (0, 1)")));
    }
    let mut fwd = Propagator::with_direction(model, nu, dt, false)?;
    let mut bwd = Propagator::with_direction(model, nu, dt, true)?;
    let mut v = random_unit(model.dim(), seed);
    let mut t = t0.max(dt);
    for _ in 0..60 {
        let steps = (t / dt).round().max(1.0) as usize;
        let sigma = power(&mut fwd, &mut bwd, steps, &mut v, 2)?;
        if sigma < theta {
            return Ok(t);
        }
        t *= 2.0;
    }
    Err(Error::NoCrossing { theta, t_end: t })
}

/// Crossing time of `||S(t)||` through `theta`.
///
/// Alternates power iteration at a trial time with a forward run of the
/// resulting datum; the datum's own crossing time becomes the next trial.
/// At the fixed point the datum attains the operator norm at its crossing.
pub fn worst_case_tau(model: &ModelProblem, nu: f64, theta: f64, opts: &WorstCaseOptions) -> Result<WorstCase> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParameter(format!("theta = {theta} must lie in (0, 1)")));
    }
    let mut fwd = Propagator::with_direction(model, nu, opts.dt, false)?;
    let mut bwd = Propagator::with_direction(model, nu, opts.dt, true)?;
    let mut v = random_unit(model.dim(), opts.seed);
    let mut t_trial = opts.t_guess.max(opts.dt);
    let mut tau = f64::NAN;
    let mut rounds = 0;
    while rounds < opts.max_rounds {
        rounds += 1;
        let steps = (t_trial / opts.dt).round().max(1.0) as usize;
        power(&mut fwd, &mut bwd, steps, &mut v, opts.iters)?;
        let cap = 50.0 * t_trial;
        tau = crossing(&mut fwd, &v, theta, cap)?;
        log::debug!("worst case round {rounds}: trial {t_trial:.4} -> crossing {tau:.4}");
        let change = (tau - t_trial).abs() / t_trial;
        t_trial = tau;
        if change < opts.rtol {
            break;
        }
    }
    Ok(WorstCase { tau, datum: fwd.store(&v)?, rounds })
}

fn crossing(p: &mut Propagator, v: &[Complex64], theta: f64, cap: f64) -> Result<f64> {
    let mut x = v.to_vec();
    let h0 = p.h_norm(&x);
    let target = theta * h0;
    let dt = p.dt();
    let mut prev = h0;
    let mut t = 0.0;
    while t < cap {
        p.advance(&mut x, 1)?;
        let h = p.h_norm(&x);
        if !h.is_finite() {
            return Err(Error::NonFinite { t: t + dt });
        }
        if h < target {
            let (a, b) = (prev.ln(), h.ln());
            return Ok(t + dt * (target.ln() - a) / (b - a));
        }
        prev = h;
        t += dt;
    }
    Err(Error::NoCrossing { theta, t_end: t })
}

/// `sup_f ||P(t) f||_{H^-1} / ||f||_{H^1}` for the exact inviscid flow `P`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingEnvelope {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Power iteration on `A^{-1} P(t)^* A^{-1} P(t)`, which is self-adjoint in
/// the `H^1` product with Rayleigh quotient `||P x||^2_{H^-1} / ||x||^2_{H^1}`.
/// Times are processed in order, each warm-started from the previous vector.
pub fn mixing_envelope(model: &ModelProblem, times: &[f64], iters: usize, seed: u64) -> Result<MixingEnvelope> {
    if !model.has_exact_inviscid() {
        return Err(Error::Unsupported(format!(
            "mixing envelope needs the closed-form inviscid flow, not available for {}",
            model.family().name()
        )));
    }
    let mut x = random_unit(model.dim(), seed);
    let mut values = Vec::with_capacity(times.len());
    for &t in times {
        let mut value = 0.0;
        for _ in 0..iters.max(1) {
            let h1 = model.h1_sq(&x).sqrt();
            x.iter_mut().for_each(|c| *c /= h1);
            let mut y = x.clone();
            model.apply_inviscid(&mut y, t);
            let z = model.apply_a_inv(&y)?;
            value = model.inner(&z, &y).re.max(0.0).sqrt();
            let mut w = z;
            model.apply_inviscid(&mut w, -t);
            x = model.apply_a_inv(&w)?;
        }
        values.push(value);
    }
    Ok(MixingEnvelope { times: times.to_vec(), values })
}
